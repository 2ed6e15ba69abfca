//! Block-frequency measures, the weighted metric between them, and the
//! frequency lemma for large subsets of a Følner set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::block::{pattern_counts, Block, Configuration};
use crate::error::{Error, Result};
use crate::group::{folner_set, FiniteSubset, GroupId};
use crate::verdict::Verdict;

/// Probability of every block with domain F_n, keyed by the symbols read in
/// canonical order of F_n.
pub type Table = BTreeMap<Vec<u32>, f64>;

/// Truncation depth of the metric series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricParams {
    pub n_max: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { n_max: 6 }
    }
}

impl MetricParams {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        Ok(MetricParams { n_max })
    }

    /// Upper bound on the omitted tail of the series.
    pub fn truncation_bound(&self) -> f64 {
        2f64.powi(1 - self.n_max as i32)
    }
}

/// A measure that can be evaluated on cylinders over F_n.
pub trait CylinderMeasure {
    fn group(&self) -> GroupId;
    fn alphabet(&self) -> u32;
    /// μ of the cylinder given by `pattern` on F_depth.
    fn prob(&self, depth: usize, pattern: &[u32]) -> Result<f64>;
    /// log₂ μ of the cylinder; may be −∞.
    fn log2_prob(&self, depth: usize, pattern: &[u32]) -> Result<f64> {
        Ok(self.prob(depth, pattern)?.log2())
    }
    /// The finite support at `depth`, if the measure stores one.
    fn table(&self, depth: usize) -> Option<&Table>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub window_size: usize,
    pub seed: Option<u64>,
}

/// Frequency tables at depths 0..=n_max (depth 0 is the single site {e}).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureWire", into = "MeasureWire")]
pub struct EmpiricalMeasure {
    pub group: GroupId,
    pub alphabet: u32,
    tables: BTreeMap<usize, Table>,
    pub source: Option<SourceMeta>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    block: Vec<u32>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureWire {
    group: GroupId,
    alphabet: u32,
    source: Option<SourceMeta>,
    tables: BTreeMap<usize, Vec<Entry>>,
}

impl TryFrom<MeasureWire> for EmpiricalMeasure {
    type Error = Error;

    fn try_from(w: MeasureWire) -> Result<Self> {
        let tables = w
            .tables
            .into_iter()
            .map(|(n, es)| (n, es.into_iter().map(|e| (e.block, e.p)).collect()))
            .collect();
        EmpiricalMeasure::from_tables(w.group, w.alphabet, tables, w.source)
    }
}

impl From<EmpiricalMeasure> for MeasureWire {
    fn from(m: EmpiricalMeasure) -> Self {
        MeasureWire {
            group: m.group,
            alphabet: m.alphabet,
            source: m.source,
            tables: m
                .tables
                .into_iter()
                .map(|(n, t)| {
                    (
                        n,
                        t.into_iter().map(|(block, p)| Entry { block, p }).collect(),
                    )
                })
                .collect(),
        }
    }
}

impl EmpiricalMeasure {
    pub fn from_tables(
        group: GroupId,
        alphabet: u32,
        tables: BTreeMap<usize, Table>,
        source: Option<SourceMeta>,
    ) -> Result<Self> {
        for (&n, t) in &tables {
            let width = folner_set(group, n).len();
            let mut sum = 0.0;
            for (k, &p) in t {
                if k.len() != width {
                    return Err(Error::MalformedDistribution(format!(
                        "depth {n} key of length {} (expected {width})",
                        k.len()
                    )));
                }
                if !(p >= 0.0) {
                    return Err(Error::MalformedDistribution(format!("negative entry {p}")));
                }
                if k.iter().any(|&s| s > alphabet) {
                    return Err(Error::AlphabetMismatch {
                        left: *k.iter().max().unwrap(),
                        right: alphabet,
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::MalformedDistribution(format!(
                    "depth {n} table sums to {sum}"
                )));
            }
        }
        Ok(EmpiricalMeasure {
            group,
            alphabet,
            tables,
            source,
        })
    }

    pub fn depths(&self) -> impl Iterator<Item = usize> + '_ {
        self.tables.keys().copied()
    }

    pub fn max_depth(&self) -> usize {
        self.tables.keys().copied().max().unwrap_or(0)
    }

    pub fn table_at(&self, depth: usize) -> Result<&Table> {
        self.tables.get(&depth).ok_or(Error::MissingTable(depth))
    }

    /// Marginal of the depth-`from` table on F_to ⊆ F_from.
    pub fn restrict_table(&self, from: usize, to: usize) -> Result<Table> {
        if to > from {
            return Err(Error::InvalidArgument("can only restrict to a smaller depth".into()));
        }
        let big = folner_set(self.group, from);
        let small = folner_set(self.group, to);
        let idx: Vec<usize> = small.iter().map(|g| big.index_of(g).unwrap()).collect();
        let mut out = Table::new();
        for (k, &p) in self.table_at(from)? {
            let key: Vec<u32> = idx.iter().map(|&i| k[i]).collect();
            *out.entry(key).or_insert(0.0) += p;
        }
        Ok(out)
    }

    /// Apply a symbol map site-wise (used for marginals of product alphabets).
    pub fn map_symbols(&self, alphabet: u32, f: impl Fn(u32) -> u32) -> EmpiricalMeasure {
        let tables = self
            .tables
            .iter()
            .map(|(&n, t)| {
                let mut out = Table::new();
                for (k, &p) in t {
                    let key: Vec<u32> = k.iter().map(|&s| f(s)).collect();
                    *out.entry(key).or_insert(0.0) += p;
                }
                (n, out)
            })
            .collect();
        EmpiricalMeasure {
            group: self.group,
            alphabet,
            tables,
            source: self.source.clone(),
        }
    }
}

impl CylinderMeasure for EmpiricalMeasure {
    fn group(&self) -> GroupId {
        self.group
    }

    fn alphabet(&self) -> u32 {
        self.alphabet
    }

    fn prob(&self, depth: usize, pattern: &[u32]) -> Result<f64> {
        Ok(self.table_at(depth)?.get(pattern).copied().unwrap_or(0.0))
    }

    fn table(&self, depth: usize) -> Option<&Table> {
        self.tables.get(&depth)
    }
}

/// Frequency tables of `c` for depths 0..=n_max, renormalized over fully
/// contained translates.
pub fn empirical_measure<C: Configuration + ?Sized>(
    c: &C,
    p: MetricParams,
) -> Result<EmpiricalMeasure> {
    empirical_measure_depths(c, 0..=p.n_max)
}

pub fn empirical_measure_depths<C: Configuration + ?Sized>(
    c: &C,
    depths: impl IntoIterator<Item = usize>,
) -> Result<EmpiricalMeasure> {
    let group = c.group();
    let mut tables = BTreeMap::new();
    for n in depths {
        let shape = folner_set(group, n);
        let (counts, total) = pattern_counts(c, &shape);
        if total == 0 {
            return Err(Error::WindowTooSmall { n });
        }
        let t: Table = counts
            .into_iter()
            .map(|(k, v)| (k, v as f64 / total as f64))
            .collect();
        tables.insert(n, t);
    }
    EmpiricalMeasure::from_tables(
        group,
        c.alphabet(),
        tables,
        Some(SourceMeta {
            window_size: c.domain_len(),
            seed: None,
        }),
    )
}

/// Raw frequencies fr_C(B) = (#occurrences)/|domain C|; these need not sum to 1.
pub fn frequency_table<C: Configuration + ?Sized>(c: &C, depth: usize) -> Table {
    let shape = folner_set(c.group(), depth);
    let (counts, _) = pattern_counts(c, &shape);
    let n = c.domain_len().max(1) as f64;
    counts.into_iter().map(|(k, v)| (k, v as f64 / n)).collect()
}

fn block_count_weight(alphabet: u32, group: GroupId, n: usize) -> f64 {
    let width = folner_set(group, n).len() as f64;
    2f64.powf(-(n as f64)) * (alphabet as f64).powf(-width)
}

/// Σ over all blocks B on F_n of |a(B) − b(B)|, where `a` is an explicit
/// finite table and `b` a probability measure of total mass 1.
fn l1_against(a: &Table, b: &dyn CylinderMeasure, depth: usize) -> Result<f64> {
    if let Some(bt) = b.table(depth) {
        let mut sum = 0.0;
        for (k, &pa) in a {
            sum += (pa - bt.get(k).copied().unwrap_or(0.0)).abs();
        }
        for (k, &pb) in bt {
            if !a.contains_key(k) {
                sum += pb;
            }
        }
        return Ok(sum);
    }
    // mass of b off the support of a is 1 − Σ_{supp a} b
    let mut sum = 1.0;
    for (k, &pa) in a {
        let pb = b.prob(depth, k)?;
        sum += (pa - pb).abs() - pb;
    }
    Ok(sum.max(0.0))
}

/// Truncated weighted metric Σ_{n=1}^{n_max} 2^{−n} |B_n|^{−1} Σ_B |m1(B) − m2(B)|.
pub fn metric_measures(
    m1: &dyn CylinderMeasure,
    m2: &dyn CylinderMeasure,
    p: MetricParams,
) -> Result<f64> {
    if m1.alphabet() != m2.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: m1.alphabet(),
            right: m2.alphabet(),
        });
    }
    let group = m1.group();
    let mut total = 0.0;
    for n in 1..=p.n_max {
        let l1 = match (m1.table(n), m2.table(n)) {
            (Some(a), _) => l1_against(a, m2, n)?,
            (None, Some(b)) => l1_against(b, m1, n)?,
            (None, None) => return Err(Error::MissingTable(n)),
        };
        total += block_count_weight(m1.alphabet(), group, n) * l1;
    }
    Ok(total)
}

/// The same series with the raw frequencies of blocks in `c` as second argument.
pub fn metric_measure_block<C: Configuration + ?Sized>(
    m: &dyn CylinderMeasure,
    c: &C,
    p: MetricParams,
) -> Result<f64> {
    if m.alphabet() != c.alphabet() {
        return Err(Error::AlphabetMismatch {
            left: m.alphabet(),
            right: c.alphabet(),
        });
    }
    let group = c.group();
    if pattern_counts_any(c, &folner_set(group, 1)) == 0 {
        return Err(Error::WindowTooSmall { n: 1 });
    }
    let mut total = 0.0;
    for n in 1..=p.n_max {
        let fr = frequency_table(c, n);
        total += block_count_weight(m.alphabet(), group, n) * l1_against(&fr, m, n)?;
    }
    Ok(total)
}

fn pattern_counts_any<C: Configuration + ?Sized>(c: &C, shape: &FiniteSubset) -> usize {
    c.positions()
        .filter(|&h| shape.iter().all(|&d| c.symbol_at(&(d * h)).is_some()))
        .take(1)
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetFrequencyReport {
    pub avg_f: f64,
    pub avg_fp: f64,
    pub admissible_eta: f64,
    pub verdict: Verdict,
}

/// Largest η for which (1−η)-subsets keep block averages within 2δ.
pub fn admissible_eta(delta: f64) -> f64 {
    delta / (1.0 + 2.0 * delta)
}

fn average_occurrence<C: Configuration + ?Sized>(c: &C, b: &Block, f: &FiniteSubset) -> f64 {
    let hits = f
        .iter()
        .filter(|&&g| crate::block::occurs_at(b, c, g))
        .count();
    hits as f64 / f.len() as f64
}

/// If avg over F of 1[B occurs at f] is within δ of μ(B) and F′ is a large
/// enough subset of F, the average over F′ is within 2δ.
pub fn subset_frequency_bound_check<C: Configuration + ?Sized>(
    c: &C,
    b: &Block,
    f: &FiniteSubset,
    fp: &FiniteSubset,
    mu_b: f64,
    delta: f64,
) -> Result<SubsetFrequencyReport> {
    if f.is_empty() || fp.is_empty() {
        return Err(Error::EmptySet("subset_frequency_bound_check: F or F′"));
    }
    let eta = admissible_eta(delta);
    let avg_f = average_occurrence(c, b, f);
    let avg_fp = average_occurrence(c, b, fp);
    let verdict = if !fp.is_subset(f) {
        Verdict::PremiseFailed("F′ ⊄ F".into())
    } else if fp.len() as f64 <= (1.0 - eta) * f.len() as f64 {
        Verdict::PremiseFailed(format!(
            "|F′| = {} is not above (1 − {eta:.5})·{}",
            fp.len(),
            f.len()
        ))
    } else if (avg_f - mu_b).abs() > delta {
        Verdict::PremiseFailed(format!("|avg_F − μ(B)| = {} > δ", (avg_f - mu_b).abs()))
    } else if (avg_fp - mu_b).abs() > 2.0 * delta {
        Verdict::Violated(format!("|avg_F′ − μ(B)| = {} > 2δ", (avg_fp - mu_b).abs()))
    } else {
        Verdict::Holds
    };
    Ok(SubsetFrequencyReport {
        avg_f,
        avg_fp,
        admissible_eta: eta,
        verdict,
    })
}
