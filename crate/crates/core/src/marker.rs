//! Marker blocks: a domain D = D₀ ∪ {g₁, …, g_N} and blocks M_i that are 1 on
//! D₀ ∪ {g_i} and 2 on the other g_j. Under a mild guard condition an
//! occurrence of some M_i is the only one in its neighbourhood.

use serde::{Deserialize, Serialize};

use crate::block::{Block, Configuration};
use crate::error::{Error, Result};
use crate::group::{FiniteSubset, GroupElement, GroupId};
use crate::source::SourceSpec;
use crate::verdict::Verdict;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerSet {
    pub group: GroupId,
    pub d0: FiniteSubset,
    pub gs: Vec<GroupElement>,
    pub blocks: Vec<Block>,
    pub delta_m: f64,
    pub s: u32,
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Least prime p with s^{−p} ≤ δ.
pub fn marker_prime(s: u32, delta_m: f64) -> usize {
    let mut p = 1usize;
    while (s as f64).powi(-(p as i32)) > delta_m {
        p += 1;
    }
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Canonical marker system: D₀ is the first p elements of the nonnegative
/// shell scan, and each g_i is the next scan element outside D₀² with
/// D₀·g_i ∩ D₀ = ∅.
pub fn construct_markers(n: usize, delta_m: f64, s: u32, group: GroupId) -> Result<MarkerSet> {
    if s < 2 {
        return Err(Error::InvalidArgument("marker alphabet needs at least 2 symbols".into()));
    }
    if !(delta_m > 0.0) {
        return Err(Error::InvalidArgument("δ_M must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("at least one marker is required".into()));
    }
    let p = marker_prime(s, delta_m);
    let d0: FiniteSubset = group.shell_scan().take(p).collect();
    let d0sq = d0.product(&d0);
    let gs: Vec<GroupElement> = group
        .shell_scan()
        .filter(|g| {
            !d0sq.contains(g) && d0.iter().all(|&d| !d0.contains(&(d * *g)))
        })
        .take(n)
        .collect();
    let mut m = MarkerSet {
        group,
        d0,
        gs,
        blocks: Vec::new(),
        delta_m,
        s,
    };
    m.blocks = (0..n).map(|i| m.build_block(i)).collect::<Result<_>>()?;
    m.validate()?;
    Ok(m)
}

impl MarkerSet {
    pub fn count(&self) -> usize {
        self.gs.len()
    }

    /// D = D₀ ∪ {g_i}.
    pub fn domain(&self) -> FiniteSubset {
        self.d0.union(&self.gs.iter().copied().collect())
    }

    fn build_block(&self, i: usize) -> Result<Block> {
        let pairs = self
            .d0
            .iter()
            .map(|&d| (d, 1))
            .chain(
                self.gs
                    .iter()
                    .enumerate()
                    .map(|(j, &g)| (g, if j == i { 1 } else { 2 })),
            );
        Block::from_pairs(pairs, self.s)
    }

    /// Marker i (0-based).
    pub fn block(&self, i: usize) -> &Block {
        &self.blocks[i]
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Internal(format!("marker invariant: {m}")));
        if !is_prime(self.d0.len()) {
            return bad("|D0| is not prime");
        }
        if !self.d0.contains(&self.group.identity()) {
            return bad("e ∉ D0");
        }
        if (self.s as f64).powi(-(self.d0.len() as i32)) > self.delta_m {
            return bad("s^{-|D0|} exceeds δ_M");
        }
        let d0sq = self.d0.product(&self.d0);
        for (i, g) in self.gs.iter().enumerate() {
            if d0sq.contains(g) || self.d0.contains(g) {
                return bad("g_i ∈ D0²");
            }
            if self.d0.iter().any(|&d| self.d0.contains(&(d * *g))) {
                return bad("D0·g_i meets D0");
            }
            if self.gs[..i].contains(g) {
                return bad("g_i repeated");
            }
        }
        if self.blocks.len() != self.gs.len() {
            return bad("block count");
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if *b != self.build_block(i)? {
                return bad("marker block content");
            }
        }
        Ok(())
    }

    /// Measure of all-1s on D₀ under a Bernoulli source (None for Markov).
    pub fn budget_under(&self, spec: &SourceSpec) -> Option<f64> {
        match spec {
            SourceSpec::Bernoulli { probs } => Some(probs[0].powi(self.d0.len() as i32)),
            SourceSpec::Markov { .. } => None,
        }
    }

    /// Precomputed neighbourhoods for repeated uniqueness checks.
    pub fn geometry(&self) -> MarkerGeometry {
        let d = self.domain();
        let dinv_d = d.inverse().product(&d);
        let guard = dinv_d.difference(&d);
        // u with D·u ⊆ D⁻¹D, i.e. occurrences inside the neighbourhood
        let candidates = d
            .inverse()
            .product(&dinv_d)
            .iter()
            .copied()
            .filter(|&u| d.iter().all(|&x| dinv_d.contains(&(x * u))))
            .collect();
        MarkerGeometry {
            domain: d,
            neighbourhood: dinv_d,
            guard,
            candidates,
        }
    }

    /// Index of the marker whose pattern sits at D·g, if any.
    fn marker_at<C: Configuration + ?Sized>(&self, c: &C, g: GroupElement) -> Option<usize> {
        if c.symbol_at(&g) != Some(1) && self.d0.contains(&self.group.identity()) {
            return None;
        }
        for &d in self.d0.iter() {
            if c.symbol_at(&(d * g)) != Some(1) {
                return None;
            }
        }
        let mut which = None;
        for (j, &gj) in self.gs.iter().enumerate() {
            match c.symbol_at(&(gj * g)) {
                Some(1) if which.is_none() => which = Some(j),
                Some(2) => {}
                _ => return None,
            }
        }
        which
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkerGeometry {
    pub domain: FiniteSubset,
    /// D ∪ D⁻¹D (= D⁻¹D since e ∈ D).
    pub neighbourhood: FiniteSubset,
    /// D⁻¹D ∖ D.
    pub guard: FiniteSubset,
    /// All u with D·u ⊆ D⁻¹D.
    pub candidates: FiniteSubset,
}

/// If C(D·g) = M_i and no 1 occurs on (D⁻¹D ∖ D)·g, the only marker occurrence
/// within C(D⁻¹D·g) is the one at g.
pub fn verify_marker_uniqueness<C: Configuration + ?Sized>(
    c: &C,
    m: &MarkerSet,
    g: GroupElement,
) -> Result<Verdict> {
    verify_marker_uniqueness_with(c, m, &m.geometry(), g)
}

pub fn verify_marker_uniqueness_with<C: Configuration + ?Sized>(
    c: &C,
    m: &MarkerSet,
    geo: &MarkerGeometry,
    g: GroupElement,
) -> Result<Verdict> {
    for &x in geo.neighbourhood.iter() {
        if c.symbol_at(&(x * g)).is_none() {
            return Err(Error::DomainEscape(x * g));
        }
    }
    let Some(i) = m.marker_at(c, g) else {
        return Ok(Verdict::PremiseFailed(format!("no marker at {g:?}")));
    };
    if let Some(x) = geo
        .guard
        .iter()
        .find(|&&x| c.symbol_at(&(x * g)) == Some(1))
    {
        return Ok(Verdict::PremiseFailed(format!(
            "symbol 1 in the guard region at {:?}",
            *x * g
        )));
    }
    for &u in geo.candidates.iter() {
        if u.is_identity() {
            continue;
        }
        let h = u * g;
        if let Some(j) = m.marker_at(c, h) {
            return Ok(Verdict::Violated(format!(
                "marker {} at {h:?} besides marker {} at {g:?}",
                j + 1,
                i + 1
            )));
        }
    }
    Ok(Verdict::Holds)
}

/// Every g (canonical order) with D·g inside the configuration and C(D·g) = M_i;
/// marker indices are 1-based.
pub fn find_marker_occurrences<C: Configuration + ?Sized>(
    c: &C,
    m: &MarkerSet,
) -> Vec<(GroupElement, usize)> {
    c.positions()
        .filter_map(|g| m.marker_at(c, g).map(|i| (g, i + 1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{occurs_at, Grid};
    use crate::group::BoxWindow;

    fn z(a: i64) -> GroupElement {
        GroupElement::z1(a)
    }

    #[test]
    fn canonical_example() {
        let m = construct_markers(2, 0.05, 3, GroupId::Z1).unwrap();
        assert_eq!(m.d0, (0..3).map(z).collect());
        assert_eq!(m.gs, vec![z(5), z(6)]);
        assert_eq!(
            m.block(0).iter().collect::<Vec<_>>(),
            vec![(z(0), 1), (z(1), 1), (z(2), 1), (z(5), 1), (z(6), 2)]
        );
        assert_eq!(m.block(1).get(&z(5)), Some(2));
        assert_eq!(m.block(1).get(&z(6)), Some(1));

        let one = construct_markers(1, 0.05, 3, GroupId::Z1).unwrap();
        assert_eq!(one.domain().len(), 4);
        assert_eq!(marker_prime(2, 1e-6), 23);
        assert_eq!(marker_prime(3, 0.05), 3);
    }

    #[test]
    fn markers_in_other_groups_validate() {
        for group in [GroupId::Z2, GroupId::H3] {
            for n in [1, 2, 4] {
                construct_markers(n, 0.05, 2, group).unwrap().validate().unwrap();
            }
        }
    }

    #[test]
    fn uniqueness_examples() {
        let m = construct_markers(2, 0.05, 3, GroupId::Z1).unwrap();
        let geo = m.geometry();
        let pairs: Vec<_> = geo
            .neighbourhood
            .iter()
            .map(|&x| (x, m.block(0).get(&x).unwrap_or(2)))
            .collect();
        let c = Block::from_pairs(pairs, 3).unwrap();
        assert_eq!(verify_marker_uniqueness(&c, &m, z(0)).unwrap(), Verdict::Holds);

        let ones = Block::constant(geo.neighbourhood.clone(), 1, 3).unwrap();
        assert!(matches!(
            verify_marker_uniqueness(&ones, &m, z(0)).unwrap(),
            Verdict::PremiseFailed(_)
        ));
        assert!(verify_marker_uniqueness(&m.block(0).clone(), &m, z(0)).is_err());
    }

    #[test]
    fn occurrences_match_naive_scan() {
        let m = construct_markers(2, 0.05, 3, GroupId::Z1).unwrap();
        let w = BoxWindow::cube(GroupId::Z1, 60).unwrap();
        let mut g = Grid::filled(w, 3, 2);
        for (d, s) in m.block(0).iter() {
            g.set(&(d * z(17)), s).unwrap();
        }
        assert_eq!(find_marker_occurrences(&g, &m), vec![(z(17), 1)]);
        let mut naive = Vec::new();
        for h in g.window.points() {
            for i in 0..m.count() {
                if occurs_at(m.block(i), &g, h) {
                    naive.push((h, i + 1));
                }
            }
        }
        assert_eq!(naive, vec![(z(17), 1)]);
        let twos = Grid::filled(BoxWindow::cube(GroupId::Z1, 30).unwrap(), 3, 2);
        assert!(find_marker_occurrences(&twos, &m).is_empty());
    }
}
