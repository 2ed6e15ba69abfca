//! Block codes built from a quasitiling: typical-block filters, the marker
//! insertion map Ψ, marriage-lemma dictionaries, encoding of y into x̄ tile by
//! tile and decoding back through the marker positions.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::block::{Block, Grid};
use crate::entropy::{approx_inclusion_check, JointEmpirical, Partition};
use crate::error::{Error, Result};
use crate::group::{folner_set, FiniteSubset, GroupElement, GroupId};
use crate::marker::{find_marker_occurrences, MarkerSet};
use crate::measure::EmpiricalMeasure;
use crate::tiling::{disjointify, Quasitiling, Shape};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecParams {
    pub delta: f64,
    pub eta: f64,
    pub l: u32,
    pub k: u32,
    pub eps_k: f64,
    /// h(X) − h(Y) in bits.
    pub d_gap: f64,
    pub j_max: usize,
    pub n0: usize,
    pub eps: f64,
    /// Proximity slack of the joint filter; δ when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_prime: Option<f64>,
}

impl CodecParams {
    pub fn delta_prime(&self) -> f64 {
        self.delta_prime.unwrap_or(self.delta)
    }

    /// Checks every inequality tying the slacks together; the error names the
    /// first one violated.
    pub fn validate(&self, group: GroupId, s: u32) -> Result<()> {
        let f = folner_set(group, self.n0).len() as f64;
        let fail = |m: String| Err(Error::CodecParams(m));
        if !(self.delta > 0.0 && self.eta > 0.0 && self.eta < 1.0) {
            return fail(format!("need δ > 0 and 0 < η < 1 (δ={}, η={})", self.delta, self.eta));
        }
        if self.l < 1 || self.k < 1 {
            return fail("l and k must be at least 1".into());
        }
        if self.delta >= self.eps / (18.0 * f) {
            return fail(format!(
                "δ < ε/(18|F_n0|) violated: {} ≥ {}",
                self.delta,
                self.eps / (18.0 * f)
            ));
        }
        if self.eta >= self.eps / (12.0 * f) {
            return fail(format!(
                "η < ε/(12|F_n0|) violated: {} ≥ {}",
                self.eta,
                self.eps / (12.0 * f)
            ));
        }
        if self.delta >= self.d_gap / 12.0 {
            return fail(format!(
                "δ < d/12 violated: {} ≥ {}",
                self.delta,
                self.d_gap / 12.0
            ));
        }
        let lhs = (2.0 * self.delta + 2.0 * self.eta) * (s as f64).log2().max((self.l as f64).log2());
        if lhs >= self.eps_k {
            return fail(format!(
                "(2δ+2η)·max(log s, log l) < ε_k violated: {lhs} ≥ {}",
                self.eps_k
            ));
        }
        if let Some(dp) = self.delta_prime {
            if !(dp > 0.0) {
                return fail(format!("δ′ must be positive (got {dp})"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmbSide {
    X,
    Y,
    Joint,
}

/// Whether a block of log-probability `log2p` on `size` sites lies on the
/// requested side of the 2^{−size(h±δ)} band.
pub fn smb_band_pass(log2p: f64, size: usize, h: f64, delta: f64, side: SmbSide) -> bool {
    let lo = -(size as f64) * (h + delta) - 1e-9;
    let hi = -(size as f64) * (h - delta) + 1e-9;
    match side {
        SmbSide::Y => log2p >= lo,
        SmbSide::X => log2p <= hi,
        SmbSide::Joint => log2p >= lo && log2p <= hi,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFamily {
    pub blocks: Vec<Vec<u32>>,
    pub mass: f64,
}

impl BlockFamily {
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// The blocks of the depth-n table that pass the band filter, with their
/// total mass. An empty result means the parameters do not fit the source.
pub fn filter_blocks_smb(
    m: &EmpiricalMeasure,
    n: usize,
    h: f64,
    delta: f64,
    side: SmbSide,
) -> Result<BlockFamily> {
    let size = folner_set(m.group, n).len();
    let mut blocks = Vec::new();
    let mut mass = 0.0;
    for (b, &p) in m.table_at(n)? {
        if smb_band_pass(p.log2(), size, h, delta, side) {
            blocks.push(b.clone());
            mass += p;
        }
    }
    Ok(BlockFamily { blocks, mass })
}

/// Per-shape tables for Ψ: where D sits in S, the cells whose D-translate
/// leaves S, and every other D-translate inside S.
#[derive(Clone, Debug)]
pub struct PsiPlan {
    shape: FiniteSubset,
    d_idx: Vec<usize>,
    in_d: Vec<bool>,
    boundary: Vec<usize>,
    /// (position, indices of D·h in D order: D₀ first, then g₁ … g_N).
    others: Vec<Vec<usize>>,
    d0_len: usize,
}

impl PsiPlan {
    pub fn new(shape: &FiniteSubset, m: &MarkerSet) -> Result<PsiPlan> {
        let ordered: Vec<GroupElement> = m.d0.iter().chain(m.gs.iter()).copied().collect();
        let idx = |g: GroupElement| shape.index_of(&g);
        let d_idx: Vec<usize> = ordered
            .iter()
            .map(|&d| idx(d))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::MarkerDomain(format!("D ⊄ S (|S| = {})", shape.len())))?;
        let mut in_d = vec![false; shape.len()];
        for &i in &d_idx {
            in_d[i] = true;
        }
        let mut boundary = Vec::new();
        let mut others = Vec::new();
        for (pos, &h) in shape.iter().enumerate() {
            let cells: Option<Vec<usize>> = ordered.iter().map(|&d| idx(d * h)).collect();
            match cells {
                None => boundary.push(pos),
                Some(c) if !h.is_identity() => others.push(c),
                Some(_) => {}
            }
        }
        Ok(PsiPlan {
            shape: shape.clone(),
            d_idx,
            in_d,
            boundary,
            others,
            d0_len: m.d0.len(),
        })
    }

    pub fn shape(&self) -> &FiniteSubset {
        &self.shape
    }

    fn occurrence(&self, sym: &[u32], cells: &[usize]) -> bool {
        if cells[..self.d0_len].iter().any(|&i| sym[i] != 1) {
            return false;
        }
        let mut ones = 0;
        for &i in &cells[self.d0_len..] {
            match sym[i] {
                1 => ones += 1,
                2 => {}
                _ => return false,
            }
        }
        ones == 1
    }

    /// Ψ on a symbol vector in the canonical order of S; `marker` is 1-based.
    pub fn apply(&self, ap: &[u32], m: &MarkerSet, marker: usize) -> Vec<u32> {
        let mut sym = ap.to_vec();
        for (j, &i) in self.d_idx.iter().enumerate() {
            sym[i] = if j < self.d0_len || j - self.d0_len + 1 == marker { 1 } else { 2 };
        }
        for &i in &self.boundary {
            if sym[i] == 1 && !self.in_d[i] {
                sym[i] = 2;
            }
        }
        loop {
            let mut changed = false;
            for cells in &self.others {
                if self.occurrence(&sym, cells) {
                    let low = cells
                        .iter()
                        .copied()
                        .filter(|&i| sym[i] == 1 && !self.in_d[i])
                        .min()
                        .expect("an occurrence off e always has a 1 outside D");
                    sym[low] = 2;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        debug_assert!(m.count() >= marker);
        sym
    }
}

/// Ψ: plant marker `marker` (1-based) on D, clear 1s whose D-translate leaves
/// S, and break every other marker occurrence by turning its lowest 1 outside
/// D into a 2. The result has exactly one occurrence, at e.
pub fn psi_transform(ap: &Block, shape: &FiniteSubset, m: &MarkerSet, marker: usize) -> Result<Block> {
    if ap.domain() != shape {
        return Err(Error::InvalidArgument("Ψ input must have domain S".into()));
    }
    if marker == 0 || marker > m.count() {
        return Err(Error::InvalidArgument(format!("marker index {marker} out of range")));
    }
    if ap.alphabet() != m.s || ap.symbols().iter().any(|&x| x == 0) {
        return Err(Error::AlphabetMismatch {
            left: ap.alphabet(),
            right: m.s,
        });
    }
    let plan = PsiPlan::new(shape, m)?;
    Block::new(shape.clone(), plan.apply(ap.symbols(), m, marker), m.s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub holds: bool,
    /// s^{|D|} + Σ_{i=1}^{j} C(|S|,i)·2^i, decimal.
    pub lhs: String,
    pub marker_condition: bool,
    pub occurrence_condition: bool,
}

/// s^{|D|} + Σ_{i=1}^{j} C(|S|,i)·2^i ≤ 2^{2δ|S|}, decided in integers.
pub fn counting_bound_check(
    s_size: u64,
    d_size: u64,
    j: u64,
    s: u32,
    delta: Ratio<u64>,
) -> CountingReport {
    let lhs = counting_lhs(s_size, d_size, j, s);
    // 2δ|S| = num/den
    let num = 2 * *delta.numer() * s_size;
    let den = *delta.denom();
    let holds = pow2_dominates(&lhs, num, den);
    let sf = s_size as f64;
    let df = delta.to_f64().unwrap_or(0.0);
    let marker_condition = (d_size as f64) < df / (s as f64).log2() * sf;
    let occurrence_condition = j == 0 || {
        let jf = j as f64;
        2.0 * jf / sf + jf / sf * (3.0 * sf / jf).log2() <= df
    };
    CountingReport {
        holds,
        lhs: lhs.to_string(),
        marker_condition,
        occurrence_condition,
    }
}

pub fn counting_lhs(s_size: u64, d_size: u64, j: u64, s: u32) -> BigUint {
    let mut lhs = BigUint::from(s).pow(d_size as u32);
    let n = BigUint::from(s_size);
    for i in 1..=j.min(s_size) {
        lhs += binomial(n.clone(), BigUint::from(i)) << i as usize;
    }
    lhs
}

/// x ≤ 2^{num/den} ⇔ x^den ≤ 2^num; the bit length settles most cases.
fn pow2_dominates(x: &BigUint, num: u64, den: u64) -> bool {
    if x.is_zero() {
        return true;
    }
    let bits = x.bits();
    // 2^{bits−1} ≤ x < 2^{bits}
    if num >= bits * den {
        return true;
    }
    if num < (bits - 1) * den {
        return false;
    }
    x.pow(den as u32) <= BigUint::one() << num as usize
}

/// An injective code from typical Y-blocks on `shape` to marker-carrying
/// X-blocks; other Y-blocks go to `default`, which lies outside the range
/// whenever the image family leaves a spare block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DictionaryWire", into = "DictionaryWire")]
pub struct Dictionary {
    pub shape: FiniteSubset,
    /// 1-based marker planted in every image.
    pub marker: usize,
    map: BTreeMap<Vec<u32>, Vec<u32>>,
    default: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct DictionaryWire {
    shape: FiniteSubset,
    marker: usize,
    entries: Vec<(Vec<u32>, Vec<u32>)>,
    default: Vec<u32>,
}

impl TryFrom<DictionaryWire> for Dictionary {
    type Error = Error;

    fn try_from(w: DictionaryWire) -> Result<Dictionary> {
        let d = Dictionary {
            shape: w.shape,
            marker: w.marker,
            map: w.entries.into_iter().collect(),
            default: w.default,
        };
        d.check_injective()?;
        Ok(d)
    }
}

impl From<Dictionary> for DictionaryWire {
    fn from(d: Dictionary) -> DictionaryWire {
        DictionaryWire {
            shape: d.shape,
            marker: d.marker,
            entries: d.map.into_iter().collect(),
            default: d.default,
        }
    }
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn contains(&self, b: &[u32]) -> bool {
        self.map.contains_key(b)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u32>, &Vec<u32>)> {
        self.map.iter()
    }

    pub fn default_image(&self) -> &[u32] {
        &self.default
    }

    pub fn image(&self, b: &[u32]) -> &[u32] {
        self.map.get(b).unwrap_or(&self.default)
    }

    pub fn inverse(&self) -> HashMap<&[u32], &[u32]> {
        self.map.iter().map(|(b, a)| (a.as_slice(), b.as_slice())).collect()
    }

    pub fn check_injective(&self) -> Result<()> {
        let n = self.shape.len();
        let mut seen = HashSet::new();
        for (b, a) in &self.map {
            if b.len() != n || a.len() != n {
                return Err(Error::Internal("dictionary block off its shape".into()));
            }
            if !seen.insert(a) {
                return Err(Error::Internal("dictionary is not injective".into()));
            }
        }
        if self.default.len() != n {
            return Err(Error::Internal("default image off its shape".into()));
        }
        Ok(())
    }

    /// Every image (default included) carries exactly one marker occurrence,
    /// the dictionary's own, at e.
    pub fn audit(&self, m: &MarkerSet) -> Result<()> {
        self.check_injective()?;
        let e = self.shape.iter().find(|g| g.is_identity()).copied();
        let want = e.map(|e| vec![(e, self.marker)]);
        for a in self.map.values().chain(std::iter::once(&self.default)) {
            let blk = Block::new(self.shape.clone(), a.clone(), m.s)?;
            if Some(find_marker_occurrences(&blk, m)) != want {
                return Err(Error::Internal(format!(
                    "dictionary image for marker {} lacks a unique marker at e",
                    self.marker
                )));
            }
        }
        Ok(())
    }
}

/// Maximum matching of `bfam` into `afam` along `relation[b]` (indices into
/// `afam`). Requires every B to have degree ≥ k and every A degree ≤ k, which
/// makes a complete matching exist; a missing one is an internal error.
pub fn build_dictionary(
    shape: &FiniteSubset,
    marker: usize,
    bfam: &[Vec<u32>],
    afam: &[Vec<u32>],
    relation: &[Vec<usize>],
    k: usize,
) -> Result<Dictionary> {
    if relation.len() != bfam.len() {
        return Err(Error::InvalidArgument("relation must list neighbours of every B".into()));
    }
    if afam.is_empty() {
        return Err(Error::EmptySet("dictionary image family"));
    }
    let mut a_deg = vec![0usize; afam.len()];
    for (bi, nbrs) in relation.iter().enumerate() {
        if nbrs.len() < k {
            return Err(Error::DegreeCondition(format!(
                "B #{bi} {:?} has {} neighbours < K = {k}",
                short(&bfam[bi]),
                nbrs.len()
            )));
        }
        for &a in nbrs {
            if a >= afam.len() {
                return Err(Error::InvalidArgument(format!("relation refers to A #{a}")));
            }
            a_deg[a] += 1;
        }
    }
    if let Some((ai, d)) = a_deg.iter().enumerate().find(|(_, &d)| d > k) {
        return Err(Error::DegreeCondition(format!(
            "A #{ai} {:?} has {d} neighbours > K = {k}",
            short(&afam[ai])
        )));
    }
    let m = crate::matching::hopcroft_karp(bfam.len(), afam.len(), relation);
    if m.size() < bfam.len() {
        return Err(Error::MatchingIncomplete {
            matched: m.size(),
            needed: bfam.len(),
        });
    }
    let map: BTreeMap<Vec<u32>, Vec<u32>> = bfam
        .iter()
        .zip(&m.left)
        .map(|(b, a)| (b.clone(), afam[a.expect("complete matching")].clone()))
        .collect();
    // an unused image keeps the decoder from mistaking an out-of-family tile
    // for an entry; only when every image is taken does the first one serve
    let used: HashSet<&Vec<u32>> = map.values().collect();
    let default = afam
        .iter()
        .filter(|a| !used.contains(a))
        .min()
        .or_else(|| map.values().min())
        .expect("nonempty")
        .clone();
    let d = Dictionary {
        shape: shape.clone(),
        marker,
        map,
        default,
    };
    d.check_injective()?;
    Ok(d)
}

fn short(v: &[u32]) -> Vec<u32> {
    v.iter().take(12).copied().collect()
}

/// Everything the decoder shares with the encoder: markers, the untrimmed
/// shape of each layer (marker i ↔ layer i) and one dictionary per trimmed
/// shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub markers: MarkerSet,
    pub layers: Vec<Shape>,
    pub dictionaries: Vec<Dictionary>,
}

impl Codebook {
    pub fn dictionary(&self, shape: &FiniteSubset) -> Option<&Dictionary> {
        self.dictionaries.iter().find(|d| &d.shape == shape)
    }

    pub fn audit(&self) -> Result<()> {
        self.markers.validate()?;
        if self.layers.len() != self.markers.count() {
            return Err(Error::Internal("one marker per layer required".into()));
        }
        for d in &self.dictionaries {
            d.audit(&self.markers)?;
        }
        Ok(())
    }
}

/// x̄ on the window of y: each tile gets the dictionary image of y on it,
/// everything off the tiles is 2.
pub fn encode(y: &Grid, t: &Quasitiling, book: &Codebook) -> Result<Grid> {
    let mut xbar = Grid::filled(y.window.clone(), book.markers.s, 2);
    for tile in t.tiles() {
        let shape = &t.shape(tile.shape).set;
        let dict = book
            .dictionary(shape)
            .ok_or(Error::MissingDictionary(tile.shape))?;
        let b = y
            .pattern_at(shape, tile.center)
            .ok_or(Error::DomainEscape(tile.center))?;
        for (&f, &a) in shape.iter().zip(dict.image(&b)) {
            xbar.set(&(f * tile.center), a)?;
        }
    }
    Ok(xbar)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    /// y on the recovered coordinates.
    pub y: Block,
    /// Trimmed tiling rebuilt from the marker positions.
    pub tiling: Quasitiling,
    pub tiles: usize,
    pub inverted: usize,
    /// Recovered coordinates over window size.
    pub coverage: f64,
}

/// Marker positions → untrimmed tiling → disjointification → inverse
/// dictionaries. Coordinates that cannot be inverted are left out.
pub fn decode(xbar: &Grid, book: &Codebook, y_alphabet: u32) -> Result<Decoded> {
    let window = crate::group::Window::Box(xbar.window.clone());
    let mut centers: BTreeMap<usize, Vec<GroupElement>> = BTreeMap::new();
    for (g, i) in find_marker_occurrences(xbar, &book.markers) {
        let Some(layer) = book.layers.get(i - 1) else { continue };
        if layer.set.iter().all(|&f| window.contains(&(f * g))) {
            centers.entry(i).or_default().push(g);
        }
    }
    let group = xbar.window.group;
    let empty = || Quasitiling::empty(window.clone());
    let tiling = Quasitiling::new(group, book.layers.clone(), centers, window.clone())
        .and_then(|t| disjointify(&t, None))
        .unwrap_or_else(|_| empty());
    let mut pairs = Vec::new();
    let mut inverted = 0;
    let inverses: Vec<_> = book.dictionaries.iter().map(|d| d.inverse()).collect();
    for tile in tiling.tiles() {
        let shape = &tiling.shape(tile.shape).set;
        let Some(di) = book.dictionaries.iter().position(|d| &d.shape == shape) else {
            continue;
        };
        let Some(a) = xbar.pattern_at(shape, tile.center) else { continue };
        if let Some(b) = inverses[di].get(a.as_slice()) {
            inverted += 1;
            pairs.extend(shape.iter().zip(b.iter()).map(|(&f, &s)| (f * tile.center, s)));
        }
    }
    let recovered = pairs.len();
    Ok(Decoded {
        y: Block::from_pairs(pairs, y_alphabet)?,
        tiles: tiling.tile_count(),
        tiling,
        inverted,
        coverage: recovered as f64 / xbar.window.size() as f64,
    })
}

/// Q^(l) ⊂_{1/k} ∨_{F_n} P and P ⊂_{1/k} ∨_{F_n} Q^(l).
pub fn vkl_check(joint: &JointEmpirical, k: u32, l: u32, n: usize) -> Result<bool> {
    let eps = 1.0 / k as f64;
    let p = Partition::x_side(joint.s, joint.l);
    let q = Partition::y_truncated(joint.s, joint.l, l);
    Ok(approx_inclusion_check(joint, &q, &p, eps, n)?.holds
        && approx_inclusion_check(joint, &p, &q, eps, n)?.holds)
}

/// h_ν − (2δ + 2η)·log l.
pub fn entropy_deficit_bound(h_nu: f64, delta: f64, eta: f64, l: u32) -> f64 {
    h_nu - (2.0 * delta + 2.0 * eta) * (l as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marker::construct_markers;

    fn z(a: i64) -> GroupElement {
        GroupElement::z1(a)
    }

    fn seg(n: i64) -> FiniteSubset {
        (0..n).map(z).collect()
    }

    #[test]
    fn params_validation_names_inequality() {
        let mut p = CodecParams {
            delta: 0.035,
            eta: 0.05,
            l: 3,
            k: 3,
            eps_k: 0.35,
            d_gap: 0.515,
            j_max: 2,
            n0: 1,
            eps: 2.0,
            delta_prime: None,
        };
        p.validate(GroupId::Z1, 4).unwrap();
        p.delta = 0.045;
        let e = p.validate(GroupId::Z1, 4).unwrap_err().to_string();
        assert!(e.contains("δ < ε/(18|F_n0|)"), "{e}");
        p.delta = 0.035;
        p.d_gap = 0.4;
        let e = p.validate(GroupId::Z1, 4).unwrap_err().to_string();
        assert!(e.contains("d/12"), "{e}");
    }

    #[test]
    fn counting_examples() {
        let r = counting_bound_check(1000, 10, 2, 3, Ratio::new(1, 10));
        assert_eq!(r.lhs, "2059049");
        assert!(r.holds);
        assert!(counting_bound_check(50, 0, 0, 2, Ratio::new(1, 10)).holds);
        assert!(!counting_bound_check(50, 0, 1, 2, Ratio::new(0, 1)).holds);
        // 2^{2·(1/4)·4} = 4: 3^1 fits, 3^2 does not
        assert!(counting_bound_check(4, 1, 0, 3, Ratio::new(1, 4)).holds);
        assert!(!counting_bound_check(4, 2, 0, 3, Ratio::new(1, 4)).holds);
    }

    #[test]
    fn psi_on_all_ones() {
        let m = construct_markers(2, 0.05, 3, GroupId::Z1).unwrap();
        let s = seg(40);
        for marker in 1..=2 {
            let ap = Block::constant(s.clone(), 1, 3).unwrap();
            let a = psi_transform(&ap, &s, &m, marker).unwrap();
            assert_eq!(find_marker_occurrences(&a, &m), vec![(z(0), marker)]);
        }
    }

    #[test]
    fn psi_touches_only_d_when_clean() {
        let m = construct_markers(2, 0.05, 3, GroupId::Z1).unwrap();
        let s = seg(30);
        let ap = Block::constant(s.clone(), 3, 3).unwrap();
        let a = psi_transform(&ap, &s, &m, 1).unwrap();
        let dom = m.domain();
        for (g, x) in a.iter() {
            if !dom.contains(&g) {
                assert_eq!(x, 3);
            }
        }
        assert!(psi_transform(&Block::constant(seg(5), 3, 3).unwrap(), &seg(5), &m, 1).is_err());
    }

    #[test]
    fn dictionary_small_example() {
        let s = seg(1);
        let b = vec![vec![1], vec![2]];
        let a = vec![vec![1], vec![2], vec![3]];
        let d = build_dictionary(&s, 1, &b, &a, &[vec![0, 1], vec![1, 2]], 2).unwrap();
        assert_eq!(d.image(&[1]), &[1]);
        assert_eq!(d.image(&[2]), &[2]);
        assert_eq!(d.default_image(), &[3]);
        let full = build_dictionary(&s, 1, &b, &a[..2], &[vec![0, 1], vec![0, 1]], 2).unwrap();
        assert_eq!(full.default_image(), &[1]);
        let e = build_dictionary(&s, 1, &[], &a, &[], 2).unwrap();
        assert!(e.is_empty());
        let err = build_dictionary(&s, 1, &b, &a, &[vec![0], vec![1, 2]], 2).unwrap_err();
        assert!(matches!(err, Error::DegreeCondition(_)));
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<Dictionary>(&json).unwrap(), d);
        let bad = json.replace("[[2],[2]]", "[[2],[1]]");
        assert!(serde_json::from_str::<Dictionary>(&bad).is_err());
    }

    #[test]
    fn deficit_examples() {
        assert_eq!(entropy_deficit_bound(1.3, 0.0, 0.0, 4), 1.3);
        assert!((entropy_deficit_bound(1.0, 0.01, 0.01, 4) - 0.92).abs() < 1e-12);
    }

    #[test]
    fn vkl_examples() {
        let diag = JointEmpirical::from_matrix(GroupId::Z1, &[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let indep =
            JointEmpirical::from_matrix(GroupId::Z1, &[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        for k in 2..6 {
            assert!(vkl_check(&diag, k, 2, 0).unwrap());
        }
        assert!(!vkl_check(&indep, 3, 2, 0).unwrap());
    }

    #[test]
    fn smb_filter_uniform_passes_everything() {
        use crate::source::{rng, SourceSpec};
        let w = crate::group::BoxWindow::cube(GroupId::Z1, 1 << 12).unwrap();
        let g = SourceSpec::uniform(2).sample_grid(&w, &mut rng(1)).unwrap();
        let m = crate::measure::empirical_measure_depths(&g, [2]).unwrap();
        let f = filter_blocks_smb(&m, 2, 1.0, 0.05, SmbSide::Joint).unwrap();
        assert!((f.mass - 1.0).abs() < 1e-9);
        assert_eq!(f.blocks.len(), 32);
    }
}
