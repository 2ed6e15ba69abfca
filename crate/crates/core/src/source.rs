//! Seeded Bernoulli and Markov samplers and their exact cylinder measures.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block::{Block, Grid};
use crate::entropy::partition_entropy;
use crate::error::{Error, Result};
use crate::group::{folner_set, BoxWindow, FiniteSubset, GroupId};
use crate::measure::{CylinderMeasure, EmpiricalMeasure, Table};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-stage seed: splitmix64(seed XOR fnv1a64(stage)).
pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stage.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

/// A stationary process on symbols 1..=s. Markov chains run along the last
/// coordinate; distinct rows of a ℤ² window are independent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Bernoulli { probs: Vec<f64> },
    Markov { rows: Vec<Vec<f64>> },
}

fn check_prob_vector(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::MalformedDistribution(format!("{what}: empty")));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::MalformedDistribution(format!("{what}: negative or non-finite entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::MalformedDistribution(format!("{what}: sums to {sum}")));
    }
    Ok(())
}

impl SourceSpec {
    pub fn bernoulli(probs: &[f64]) -> Result<SourceSpec> {
        let s = SourceSpec::Bernoulli {
            probs: probs.to_vec(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn markov(rows: Vec<Vec<f64>>) -> Result<SourceSpec> {
        let s = SourceSpec::Markov { rows };
        s.validate()?;
        Ok(s)
    }

    pub fn uniform(s: u32) -> SourceSpec {
        SourceSpec::Bernoulli {
            probs: vec![1.0 / s as f64; s as usize],
        }
    }

    /// Point mass on the all-`symbol` configuration.
    pub fn constant(symbol: u32, s: u32) -> SourceSpec {
        let mut probs = vec![0.0; s as usize];
        probs[symbol as usize - 1] = 1.0;
        SourceSpec::Bernoulli { probs }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::Bernoulli { probs } => check_prob_vector(probs, "bernoulli"),
            SourceSpec::Markov { rows } => {
                for (i, r) in rows.iter().enumerate() {
                    if r.len() != rows.len() {
                        return Err(Error::MalformedDistribution(format!(
                            "markov row {i} has {} entries for {} states",
                            r.len(),
                            rows.len()
                        )));
                    }
                    check_prob_vector(r, &format!("markov row {i}"))?;
                }
                Ok(())
            }
        }
    }

    /// Law of the pair (x, y) of independent processes, on joint symbols
    /// 1 + (x−1)·l + (y−1).
    pub fn product(&self, other: &SourceSpec) -> SourceSpec {
        match (self, other) {
            (SourceSpec::Bernoulli { probs: a }, SourceSpec::Bernoulli { probs: b }) => {
                SourceSpec::Bernoulli {
                    probs: a.iter().flat_map(|p| b.iter().map(move |q| p * q)).collect(),
                }
            }
            _ => {
                let (ra, rb) = (self.as_rows(), other.as_rows());
                let rows = ra
                    .iter()
                    .flat_map(|r1| {
                        rb.iter().map(move |r2| {
                            r1.iter().flat_map(|p| r2.iter().map(move |q| p * q)).collect()
                        })
                    })
                    .collect();
                SourceSpec::Markov { rows }
            }
        }
    }

    fn as_rows(&self) -> Vec<Vec<f64>> {
        match self {
            SourceSpec::Bernoulli { probs } => vec![probs.clone(); probs.len()],
            SourceSpec::Markov { rows } => rows.clone(),
        }
    }

    pub fn alphabet(&self) -> u32 {
        match self {
            SourceSpec::Bernoulli { probs } => probs.len() as u32,
            SourceSpec::Markov { rows } => rows.len() as u32,
        }
    }

    /// One-site marginal.
    pub fn marginal(&self) -> Vec<f64> {
        match self {
            SourceSpec::Bernoulli { probs } => probs.clone(),
            SourceSpec::Markov { rows } => stationary(rows),
        }
    }

    /// Entropy per site in bits.
    pub fn entropy_rate(&self) -> f64 {
        match self {
            SourceSpec::Bernoulli { probs } => partition_entropy(probs).unwrap_or(0.0),
            SourceSpec::Markov { rows } => stationary(rows)
                .iter()
                .zip(rows)
                .map(|(pi, r)| pi * partition_entropy(r).unwrap_or(0.0))
                .sum(),
        }
    }

    pub fn sample_grid(&self, window: &BoxWindow, rng: &mut impl Rng) -> Result<Grid> {
        self.validate()?;
        let mut data = vec![0u32; window.size()];
        match self {
            SourceSpec::Bernoulli { probs } => {
                let dist = WeightedIndex::new(probs)
                    .map_err(|e| Error::MalformedDistribution(e.to_string()))?;
                for v in data.iter_mut() {
                    *v = dist.sample(rng) as u32 + 1;
                }
            }
            SourceSpec::Markov { rows } => {
                let init = WeightedIndex::new(stationary(rows))
                    .map_err(|e| Error::MalformedDistribution(e.to_string()))?;
                let steps = rows
                    .iter()
                    .map(WeightedIndex::new)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::MalformedDistribution(e.to_string()))?;
                let row_len = *window.len.last().unwrap();
                for row in data.chunks_mut(row_len) {
                    let mut cur = init.sample(rng);
                    row[0] = cur as u32 + 1;
                    for v in row.iter_mut().skip(1) {
                        cur = steps[cur].sample(rng);
                        *v = cur as u32 + 1;
                    }
                }
            }
        }
        Grid::new(window.clone(), self.alphabet(), data)
    }

    /// Independent symbols on an arbitrary region (Bernoulli only).
    pub fn sample_region(&self, region: &FiniteSubset, rng: &mut impl Rng) -> Result<Block> {
        let SourceSpec::Bernoulli { probs } = self else {
            return Err(Error::InvalidArgument(
                "Markov sources are sampled on box windows only".into(),
            ));
        };
        let dist =
            WeightedIndex::new(probs).map_err(|e| Error::MalformedDistribution(e.to_string()))?;
        let symbols = (0..region.len())
            .map(|_| dist.sample(rng) as u32 + 1)
            .collect();
        Block::new(region.clone(), symbols, self.alphabet())
    }
}

/// Stationary vector of a stochastic matrix, by iterating the lazy chain.
pub fn stationary(rows: &[Vec<f64>]) -> Vec<f64> {
    let k = rows.len();
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..100_000 {
        let mut next = vec![0.0; k];
        for i in 0..k {
            next[i] += 0.5 * pi[i];
            for j in 0..k {
                next[j] += 0.5 * pi[i] * rows[i][j];
            }
        }
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if diff < 1e-15 {
            break;
        }
    }
    pi
}

/// The exact law of a [`SourceSpec`], evaluated on cylinders over F_n.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMeasure {
    pub group: GroupId,
    pub spec: SourceSpec,
    marginal: Vec<f64>,
}

impl ModelMeasure {
    pub fn new(group: GroupId, spec: SourceSpec) -> Result<Self> {
        spec.validate()?;
        if group == GroupId::H3 && matches!(spec, SourceSpec::Markov { .. }) {
            return Err(Error::InvalidArgument(
                "Markov sources are defined on z1 and z2 only".into(),
            ));
        }
        let marginal = spec.marginal();
        Ok(ModelMeasure {
            group,
            spec,
            marginal,
        })
    }

    /// log₂ of the probability of a pattern on any domain whose canonical
    /// order consists of contiguous rows of length `row_len`.
    pub fn log2_prob_rows(&self, pattern: &[u32], row_len: usize) -> f64 {
        let lg = |p: f64| p.log2();
        match &self.spec {
            SourceSpec::Bernoulli { probs } => {
                pattern.iter().map(|&s| lg(probs[s as usize - 1])).sum()
            }
            SourceSpec::Markov { rows } => pattern
                .chunks(row_len.max(1))
                .map(|row| {
                    let mut acc = lg(self.marginal[row[0] as usize - 1]);
                    for w in row.windows(2) {
                        acc += lg(rows[w[0] as usize - 1][w[1] as usize - 1]);
                    }
                    acc
                })
                .sum(),
        }
    }

    fn row_len(&self, depth: usize) -> usize {
        match self.group {
            GroupId::H3 => 1,
            _ => 2 * depth + 1,
        }
    }

    /// Exact tables at the given depths, refusing anything with more than
    /// `limit` blocks.
    pub fn tabulate(
        &self,
        depths: impl IntoIterator<Item = usize>,
        limit: usize,
    ) -> Result<EmpiricalMeasure> {
        let s = self.spec.alphabet() as usize;
        let mut tables = BTreeMap::new();
        for n in depths {
            let width = folner_set(self.group, n).len();
            let count = (s as f64).powi(width as i32);
            if count > limit as f64 {
                return Err(Error::InvalidArgument(format!(
                    "depth {n} has {count} blocks, above the limit {limit}"
                )));
            }
            let mut t = Table::new();
            for code in 0..count as usize {
                let mut rest = code;
                let mut key = vec![1u32; width];
                for k in key.iter_mut().rev() {
                    *k = (rest % s) as u32 + 1;
                    rest /= s;
                }
                let p = self.log2_prob_rows(&key, self.row_len(n)).exp2();
                if p > 0.0 {
                    t.insert(key, p);
                }
            }
            // floating roundoff: renormalize
            let sum: f64 = t.values().sum();
            for v in t.values_mut() {
                *v /= sum;
            }
            tables.insert(n, t);
        }
        EmpiricalMeasure::from_tables(self.group, s as u32, tables, None)
    }
}

impl ModelMeasure {
    /// log₂ probability of `pattern` on an arbitrary finite domain. Markov
    /// chains run along the last coordinate; a domain is split into maximal
    /// runs of consecutive cells, which are independent of each other.
    pub fn log2_prob_on(&self, shape: &FiniteSubset, pattern: &[u32]) -> f64 {
        if let SourceSpec::Bernoulli { .. } = self.spec {
            return self.log2_prob_rows(pattern, pattern.len());
        }
        let els = shape.as_slice();
        let mut total = 0.0;
        let mut start = 0;
        for i in 1..=els.len() {
            let split = i == els.len() || {
                let (a, b) = (els[i - 1].coords(), els[i].coords());
                let d = a.len() - 1;
                a[..d] != b[..d] || b[d] != a[d] + 1
            };
            if split {
                total += self.log2_prob_rows(&pattern[start..i], i - start);
                start = i;
            }
        }
        total
    }
}

impl CylinderMeasure for ModelMeasure {
    fn group(&self) -> GroupId {
        self.group
    }

    fn alphabet(&self) -> u32 {
        self.spec.alphabet()
    }

    fn prob(&self, depth: usize, pattern: &[u32]) -> Result<f64> {
        Ok(self.log2_prob(depth, pattern)?.exp2())
    }

    fn log2_prob(&self, depth: usize, pattern: &[u32]) -> Result<f64> {
        if let Some(&bad) = pattern.iter().find(|&&s| s == 0 || s > self.alphabet()) {
            return Err(Error::AlphabetMismatch {
                left: bad,
                right: self.alphabet(),
            });
        }
        Ok(self.log2_prob_rows(pattern, self.row_len(depth)))
    }

    fn table(&self, _depth: usize) -> Option<&Table> {
        None
    }
}

/// Symbol of the pair (x, y) in the product alphabet {1, …, s·l}.
pub fn joint_symbol(x: u32, y: u32, l: u32) -> u32 {
    1 + (x - 1) * l + (y - 1)
}

pub fn split_joint(z: u32, l: u32) -> (u32, u32) {
    ((z - 1) / l + 1, (z - 1) % l + 1)
}

/// Merge every Y symbol ≥ l into l.
pub fn truncate_symbol(y: u32, l: u32) -> u32 {
    y.min(l)
}

/// Pair two grids over the same window into one over the product alphabet.
pub fn join_grids(x: &Grid, y: &Grid) -> Result<Grid> {
    if x.window != y.window {
        return Err(Error::InvalidArgument("joined grids must share a window".into()));
    }
    let l = y.alphabet;
    let data = x
        .data
        .iter()
        .zip(&y.data)
        .map(|(&a, &b)| joint_symbol(a, b, l))
        .collect();
    Grid::new(x.window.clone(), x.alphabet * l, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MetricParams;

    #[test]
    fn seeds_are_reproducible_and_split() {
        let w = BoxWindow::cube(GroupId::Z1, 100).unwrap();
        let s = SourceSpec::uniform(3);
        let a = s.sample_grid(&w, &mut rng(5)).unwrap();
        let b = s.sample_grid(&w, &mut rng(5)).unwrap();
        let c = s.sample_grid(&w, &mut rng(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(derive_seed(1, "tile"), derive_seed(1, "code"));
        assert_eq!(derive_seed(1, "tile"), derive_seed(1, "tile"));
    }

    #[test]
    fn markov_stationary_and_rate() {
        let m = SourceSpec::markov(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let pi = m.marginal();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-9);
        let h = 2.0 / 3.0 * partition_entropy(&[0.9, 0.1]).unwrap()
            + 1.0 / 3.0 * partition_entropy(&[0.2, 0.8]).unwrap();
        assert!((m.entropy_rate() - h).abs() < 1e-9);
        assert!(SourceSpec::markov(vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn tabulated_model_sums_to_one() {
        let m = ModelMeasure::new(GroupId::Z1, SourceSpec::bernoulli(&[0.3, 0.7]).unwrap()).unwrap();
        let t = m.tabulate(0..=3, 1 << 10).unwrap();
        assert_eq!(t.table_at(3).unwrap().len(), 128);
        let mk = ModelMeasure::new(
            GroupId::Z2,
            SourceSpec::markov(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap(),
        )
        .unwrap();
        let t = mk.tabulate(0..=1, 1 << 10).unwrap();
        assert_eq!(t.table_at(1).unwrap().len(), 512);
    }

    #[test]
    fn empirical_tables_approach_model() {
        let w = BoxWindow::cube(GroupId::Z1, 1 << 16).unwrap();
        let spec = SourceSpec::uniform(2);
        let g = spec.sample_grid(&w, &mut rng(11)).unwrap();
        let m = crate::measure::empirical_measure(&g, MetricParams::new(1).unwrap()).unwrap();
        let t = m.table_at(1).unwrap();
        assert_eq!(t.len(), 8);
        for p in t.values() {
            assert!((p - 0.125).abs() < 0.02);
        }
    }

    #[test]
    fn joint_code_round_trip() {
        for x in 1..=4 {
            for y in 1..=3 {
                let z = joint_symbol(x, y, 3);
                assert!((1..=12).contains(&z));
                assert_eq!(split_joint(z, 3), (x, y));
            }
        }
    }
}
