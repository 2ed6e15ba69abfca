//! Seeded trial generators for the exact invariants, shared by the `verify`
//! subcommand and the acceptance runs.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::Grid;
use crate::codec::counting_bound_check;
use crate::error::Result;
use crate::group::{BoxWindow, FiniteSubset, GroupElement, GroupId};
use crate::marker::{construct_markers, verify_marker_uniqueness_with};
use crate::source::{derive_seed, rng};
use crate::tiling::{
    construct_quasitiling_layers, disjointify, is_alpha_subset, is_epsilon_disjoint, layer_count,
    TilingParams,
};
use crate::verdict::Verdict;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: usize,
    pub holds: usize,
    pub violated: usize,
    pub premise_failed: usize,
    /// First failure message, if any.
    pub first_failure: Option<String>,
}

impl Tally {
    pub fn record(&mut self, v: &Verdict) {
        self.trials += 1;
        match v {
            Verdict::Holds => self.holds += 1,
            Verdict::Violated(m) => {
                self.violated += 1;
                self.first_failure.get_or_insert_with(|| m.clone());
            }
            Verdict::PremiseFailed(m) => {
                self.premise_failed += 1;
                self.first_failure.get_or_insert_with(|| m.clone());
            }
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.trials += other.trials;
        self.holds += other.holds;
        self.violated += other.violated;
        self.premise_failed += other.premise_failed;
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
    }

    pub fn all_hold(&self) -> bool {
        self.trials > 0 && self.holds == self.trials
    }
}

/// Marker δ_M used by the trials: prime 5 for s = 2, 3 for s = 3.
pub const TRIAL_DELTA_M: f64 = 0.05;

/// Random background, a random marker planted at a random g, guard cells
/// forced off 1; then the uniqueness check. Every trial satisfies the premise.
pub fn marker_trials(group: GroupId, s: u32, n: usize, trials: usize, seed: u64) -> Result<Tally> {
    let m = construct_markers(n, TRIAL_DELTA_M, s, group)?;
    let geo = m.geometry();
    let r = geo.neighbourhood.radius() as usize;
    let side = 2 * r + 1 + 6;
    let window = BoxWindow::cube(group, side)?;
    let mut rg = rng(seed);
    let mut grid = Grid::filled(window, s, 1);
    let order: Vec<GroupElement> = m.d0.iter().chain(m.gs.iter()).copied().collect();
    let mut tally = Tally::default();
    for t in 0..trials {
        if t % 64 == 0 {
            for v in grid.data.iter_mut() {
                *v = rg.gen_range(1..=s);
            }
        }
        let coords: Vec<i64> = (0..group.dim())
            .map(|_| rg.gen_range(r..side - r) as i64)
            .collect();
        let g = group.element(&coords)?;
        let marker = rg.gen_range(0..m.count());
        let mut saved = Vec::with_capacity(geo.neighbourhood.len());
        for &x in geo.neighbourhood.iter() {
            let h = x * g;
            saved.push((h, grid.get(&h).expect("inside")));
        }
        for (j, &d) in order.iter().enumerate() {
            let sym = if j < m.d0.len() || j - m.d0.len() == marker { 1 } else { 2 };
            grid.set(&(d * g), sym)?;
        }
        for &x in geo.guard.iter() {
            grid.set(&(x * g), rg.gen_range(2..=s))?;
        }
        tally.record(&verify_marker_uniqueness_with(&grid, &m, &geo, g)?);
        for (h, v) in saved {
            grid.set(&h, v)?;
        }
    }
    Ok(tally)
}

/// The marker trials over every (group, s, N) in {ℤ, ℤ²} × {2, 3} × {1, 2, 4},
/// splitting `total` evenly.
pub fn marker_sweep(total: usize, seed: u64) -> Result<BTreeMap<String, Tally>> {
    let cases: Vec<(GroupId, u32, usize)> = [GroupId::Z1, GroupId::Z2]
        .into_iter()
        .flat_map(|g| [2u32, 3].into_iter().flat_map(move |s| [1usize, 2, 4].map(|n| (g, s, n))))
        .collect();
    let per = total.div_ceil(cases.len());
    let mut out = BTreeMap::new();
    for (g, s, n) in cases {
        let key = format!("{g}/s={s}/N={n}");
        let t = marker_trials(g, s, n, per, derive_seed(seed, &key))?;
        out.insert(key, t);
    }
    Ok(out)
}

/// Checks one disjointification: pairwise disjoint, each output tile a
/// (1−η)-subset of its input tile, same union, idempotent.
pub fn check_disjointify(t: &crate::tiling::Quasitiling, eta: f64) -> Result<Verdict> {
    if !is_epsilon_disjoint(t, eta).holds {
        return Ok(Verdict::PremiseFailed("input is not η-disjoint".into()));
    }
    let out = disjointify(t, None)?;
    let before: BTreeMap<GroupElement, FiniteSubset> =
        t.tiles().into_iter().map(|x| (x.center, x.set)).collect();
    let after: BTreeMap<GroupElement, FiniteSubset> =
        out.tiles().into_iter().map(|x| (x.center, x.set)).collect();
    if before.len() != after.len() || !before.keys().eq(after.keys()) {
        return Ok(Verdict::Violated("tile centers changed".into()));
    }
    let mut seen: BTreeMap<GroupElement, GroupElement> = BTreeMap::new();
    for (c, set) in &after {
        for &h in set.iter() {
            if let Some(other) = seen.insert(h, *c) {
                return Ok(Verdict::Violated(format!(
                    "{h:?} lies in the tiles at {other:?} and {c:?}"
                )));
            }
        }
        if !set.is_subset(&before[c]) || !is_alpha_subset(set, &before[c], 1.0 - eta) {
            return Ok(Verdict::Violated(format!(
                "tile at {c:?} kept {} of {} cells",
                set.len(),
                before[c].len()
            )));
        }
    }
    if out.union() != t.union() {
        return Ok(Verdict::Violated("union changed".into()));
    }
    if disjointify(&out, None)? != out {
        return Ok(Verdict::Violated("not idempotent".into()));
    }
    Ok(Verdict::Holds)
}

/// Greedy η-disjoint quasitilings of random small windows in ℤ and ℤ².
pub fn disjointify_trials(trials: usize, eta: f64, seed: u64) -> Result<Tally> {
    let mut rg = rng(seed);
    let mut tally = Tally::default();
    for t in 0..trials {
        let k = rg.gen_range(1..4);
        // the top layer F_{K+L−1} must fit
        let top = 2 * (k + layer_count(eta) - 1) + 1;
        let (group, side) = if t % 2 == 0 {
            (GroupId::Z1, rg.gen_range(top..top * 8))
        } else {
            (GroupId::Z2, rg.gen_range(top..top + 24))
        };
        let w = BoxWindow::cube(group, side)?;
        let p = TilingParams::new(eta, k, rg.gen())?;
        let q = construct_quasitiling_layers(&w, &p)?;
        tally.record(&check_disjointify(&q, eta)?);
    }
    Ok(tally)
}

/// s^{|D|} + Σ C(|S|,i)·2^i against 2^{2δ|S|}, with every quantity built
/// from scratch and compared without shortcuts.
pub fn counting_oracle(s_size: u64, d_size: u64, j: u64, s: u32, delta: Ratio<u64>) -> bool {
    let mut lhs = BigUint::from(1u32);
    for _ in 0..d_size {
        lhs *= s;
    }
    for i in 1..=j.min(s_size) {
        let mut c = BigUint::from(1u32);
        for k in 0..i {
            c = c * (s_size - k) / (k + 1);
        }
        let mut p = BigUint::from(1u32);
        for _ in 0..i {
            p *= 2u32;
        }
        lhs += c * p;
    }
    let num = 2 * delta.numer() * s_size;
    let den = *delta.denom();
    let mut left = BigUint::from(1u32);
    for _ in 0..den {
        left *= &lhs;
    }
    let mut right = BigUint::from(1u32);
    for _ in 0..num {
        right *= 2u32;
    }
    left <= right
}

pub fn counting_trials(trials: usize, seed: u64) -> Tally {
    let mut rg = rng(seed);
    let mut tally = Tally::default();
    for _ in 0..trials {
        let s_size = rg.gen_range(1..=160u64);
        let d_size = rg.gen_range(0..=24u64);
        let j = rg.gen_range(0..=6u64);
        let s = rg.gen_range(2..=5u32);
        let den = rg.gen_range(1..=12u64);
        let num = rg.gen_range(0..=den * 3);
        let delta = Ratio::new(num, den);
        let fast = counting_bound_check(s_size, d_size, j, s, delta).holds;
        let slow = counting_oracle(s_size, d_size, j, s, delta);
        tally.record(&if fast == slow {
            Verdict::Holds
        } else {
            Verdict::Violated(format!(
                "|S|={s_size} |D|={d_size} j={j} s={s} δ={delta}: fast {fast}, oracle {slow}"
            ))
        });
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweeps_hold() {
        for t in marker_sweep(1200, 1).unwrap().values() {
            assert!(t.all_hold(), "{t:?}");
        }
        assert!(disjointify_trials(20, 0.1, 2).unwrap().all_hold());
        assert!(counting_trials(200, 3).all_hold());
    }

    #[test]
    fn broken_marker_is_caught() {
        let m = construct_markers(2, TRIAL_DELTA_M, 2, GroupId::Z1).unwrap();
        let geo = m.geometry();
        // marker 1 planted twice, second copy overlapping the guard
        let w = BoxWindow::cube(GroupId::Z1, 80).unwrap();
        let mut g = Grid::filled(w, 2, 2);
        let at = GroupElement::z1(30);
        for (j, d) in m.d0.iter().chain(m.gs.iter()).enumerate() {
            let sym = if j <= m.d0.len() { 1 } else { 2 };
            g.set(&(*d * at), sym).unwrap();
            g.set(&(*d * GroupElement::z1(31)), sym).unwrap();
        }
        let v = verify_marker_uniqueness_with(&g, &m, &geo, at).unwrap();
        assert!(!v.holds());
    }
}
