//! Independent symbol noise on the X coordinate, the checks that go with it,
//! and a transport estimate of d̄ between two block distributions.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::Grid;
use crate::entropy::{process_entropy_estimate, JointEmpirical, Partition};
use crate::error::{Error, Result};
use crate::flow::MinCostFlow;
use crate::group::folner_set;
use crate::measure::{empirical_measure_depths, metric_measures, EmpiricalMeasure, MetricParams, Table};
use crate::source::{join_grids, joint_symbol, rng, split_joint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub eps: f64,
    pub s: u32,
    pub seed: u64,
}

impl NoiseParams {
    /// 0 ≤ ε < 1; ε = 0 is the noiseless map.
    pub fn new(eps: f64, s: u32, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidArgument(format!("ε = {eps} must lie in [0, 1)")));
        }
        if s < 1 {
            return Err(Error::InvalidArgument("alphabet must be nonempty".into()));
        }
        Ok(NoiseParams { eps, s, seed })
    }

    /// μ₀(0) = 1 − ε, μ₀(i) = ε/s.
    pub fn noise_distribution(&self) -> Vec<f64> {
        let mut d = vec![self.eps / self.s as f64; self.s as usize + 1];
        d[0] = 1.0 - self.eps;
        d
    }
}

fn noise(p: &NoiseParams, len: usize) -> Vec<u32> {
    let mut r = rng(p.seed);
    (0..len)
        .map(|_| {
            if r.gen::<f64>() < p.eps {
                r.gen_range(1..=p.s)
            } else {
                0
            }
        })
        .collect()
}

/// x¹_g = x_g where c_g = 0 and c_g otherwise, c iid μ₀.
pub fn perturb(x: &Grid, p: &NoiseParams) -> Result<Grid> {
    if x.alphabet != p.s {
        return Err(Error::AlphabetMismatch {
            left: x.alphabet,
            right: p.s,
        });
    }
    let c = noise(p, x.data.len());
    let data = x.data.iter().zip(&c).map(|(&a, &b)| if b == 0 { a } else { b }).collect();
    Grid::new(x.window.clone(), x.alphabet, data)
}

/// The same map applied to the X half of a joint (x, y) grid.
pub fn perturb_joint(z: &Grid, l: u32, p: &NoiseParams) -> Result<Grid> {
    if z.alphabet != p.s * l {
        return Err(Error::AlphabetMismatch {
            left: z.alphabet,
            right: p.s * l,
        });
    }
    let c = noise(p, z.data.len());
    let data = z
        .data
        .iter()
        .zip(&c)
        .map(|(&v, &b)| {
            let (x, y) = split_joint(v, l);
            joint_symbol(if b == 0 { x } else { b }, y, l)
        })
        .collect();
    Grid::new(z.window.clone(), z.alphabet, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub eps: f64,
    pub n: usize,
    pub distance: f64,
    pub h_before: f64,
    pub h_after: f64,
    /// ĥ_before + ε(log s − ĥ_before).
    pub entropy_bound: f64,
    pub y_drift: f64,
    pub distance_ok: bool,
    pub entropy_ok: bool,
    pub y_ok: bool,
}

impl PerturbationReport {
    pub fn pass(&self) -> bool {
        self.distance_ok && self.entropy_ok && self.y_ok
    }
}

/// Distance ≤ 2ε + 0.02, X-entropy gain ≥ ε(log s − ĥ) − 0.05 and Y-marginal
/// drift ≤ 0.01 (largest change of a depth-n block probability). Entropies
/// are per-site block entropies at depth n.
pub fn verify_perturbation_bounds(
    before: &JointEmpirical,
    after: &JointEmpirical,
    p: &NoiseParams,
    n: usize,
) -> Result<PerturbationReport> {
    if before.s != after.s || before.l != after.l {
        return Err(Error::AlphabetMismatch {
            left: before.measure.alphabet,
            right: after.measure.alphabet,
        });
    }
    if before.s != p.s {
        return Err(Error::AlphabetMismatch {
            left: before.s,
            right: p.s,
        });
    }
    let depth = before.measure.max_depth().min(after.measure.max_depth());
    let distance = metric_measures(
        &before.measure,
        &after.measure,
        MetricParams::new(depth.max(1))?,
    )?;
    let px = Partition::x_side(before.s, before.l);
    let h_before = process_entropy_estimate(&before.measure, &px, n)?.per_site;
    let h_after = process_entropy_estimate(&after.measure, &px, n)?.per_site;
    let log_s = (p.s as f64).log2();
    let entropy_bound = h_before + p.eps * (log_s - h_before);
    let yb = before.y_marginal();
    let ya = after.y_marginal();
    let y_drift = sup_distance(yb.table_at(n)?, ya.table_at(n)?);
    Ok(PerturbationReport {
        eps: p.eps,
        n,
        distance,
        h_before,
        h_after,
        entropy_bound,
        y_drift,
        distance_ok: distance <= 2.0 * p.eps + 0.02,
        entropy_ok: h_after - h_before >= p.eps * (log_s - h_before) - 0.05,
        y_ok: y_drift <= 0.01,
    })
}

/// Perturb the X half of (x, y) at rate ε and check the bounds with tables
/// up to depth max(n_max, n).
pub fn perturbation_run(
    x: &Grid,
    y: &Grid,
    eps: f64,
    noise_seed: u64,
    n: usize,
    n_max: usize,
) -> Result<PerturbationReport> {
    let (s, l) = (x.alphabet, y.alphabet);
    let np = NoiseParams::new(eps, s, noise_seed)?;
    let z = join_grids(x, y)?;
    let z1 = perturb_joint(&z, l, &np)?;
    let depths = 0..=n_max.max(n);
    let before = JointEmpirical::new(empirical_measure_depths(&z, depths.clone())?, s, l)?;
    let after = JointEmpirical::new(empirical_measure_depths(&z1, depths)?, s, l)?;
    verify_perturbation_bounds(&before, &after, &np, n)
}

fn sup_distance(a: &Table, b: &Table) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

/// A coupling of two distributions on a common list of blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    pub blocks: Vec<Vec<u32>>,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    /// (row, column) → mass.
    #[serde(with = "entries")]
    pub mass: BTreeMap<(usize, usize), f64>,
}

mod entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<(usize, usize), f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(&(i, j), &v)| (i, j, v)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let v: Vec<(usize, usize, f64)> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|(i, j, x)| ((i, j), x)).collect())
    }
}

impl CouplingTable {
    pub fn validate(&self) -> Result<()> {
        let k = self.blocks.len();
        if self.mu1.len() != k || self.mu2.len() != k {
            return Err(Error::MalformedDistribution("marginal length".into()));
        }
        let mut rows = vec![0.0; k];
        let mut cols = vec![0.0; k];
        for (&(i, j), &v) in &self.mass {
            if i >= k || j >= k || !(v >= 0.0) {
                return Err(Error::MalformedDistribution(format!("entry ({i}, {j}) = {v}")));
            }
            rows[i] += v;
            cols[j] += v;
        }
        for i in 0..k {
            if (rows[i] - self.mu1[i]).abs() > 1e-9 || (cols[i] - self.mu2[i]).abs() > 1e-9 {
                return Err(Error::MalformedDistribution(format!(
                    "marginals off at block {i}: rows {} vs {}, columns {} vs {}",
                    rows[i], self.mu1[i], cols[i], self.mu2[i]
                )));
            }
        }
        Ok(())
    }

    pub fn identity(blocks: Vec<Vec<u32>>, mu: Vec<f64>) -> CouplingTable {
        let mass = mu.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, &v)| ((i, i), v)).collect();
        CouplingTable {
            blocks,
            mu1: mu.clone(),
            mu2: mu,
            mass,
        }
    }

    pub fn independent(blocks: Vec<Vec<u32>>, mu1: Vec<f64>, mu2: Vec<f64>) -> CouplingTable {
        let mut mass = BTreeMap::new();
        for (i, &a) in mu1.iter().enumerate() {
            for (j, &b) in mu2.iter().enumerate() {
                if a * b > 0.0 {
                    mass.insert((i, j), a * b);
                }
            }
        }
        CouplingTable {
            blocks,
            mu1,
            mu2,
            mass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub agreement: f64,
    /// μ₁(A) − ρ(A × A) per block.
    pub deficits: Vec<f64>,
}

/// Diagonal mass ρ(∪ A × A).
pub fn joining_agreement(rho: &CouplingTable) -> Result<Agreement> {
    rho.validate()?;
    let diag = |i: usize| rho.mass.get(&(i, i)).copied().unwrap_or(0.0);
    let deficits: Vec<f64> = (0..rho.blocks.len()).map(|i| rho.mu1[i] - diag(i)).collect();
    Ok(Agreement {
        agreement: (0..rho.blocks.len()).map(diag).sum(),
        deficits,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbarEstimate {
    pub n: usize,
    /// Expected fraction of disagreeing sites under the optimal coupling.
    pub value: f64,
    pub coupling: CouplingTable,
}

/// Largest block space routed through the Hamming graph; beyond it the
/// transport runs on the two supports directly.
const HAMMING_GRAPH_LIMIT: f64 = 4096.0;

/// Minimum over couplings of the two depth-n block laws of the expected
/// Hamming distance per site.
pub fn dbar_estimate(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure, n: usize) -> Result<DbarEstimate> {
    if m1.alphabet != m2.alphabet {
        return Err(Error::AlphabetMismatch {
            left: m1.alphabet,
            right: m2.alphabet,
        });
    }
    let t1 = m1.table_at(n)?;
    let t2 = m2.table_at(n)?;
    let width = folner_set(m1.group, n).len();
    let s = m1.alphabet;
    let space = (s as f64).powi(width as i32);
    let (blocks, mu1, mu2, mass, cost) = if space <= HAMMING_GRAPH_LIMIT {
        transport_hamming_graph(t1, t2, s, width)
    } else {
        transport_dense(t1, t2)
    };
    Ok(DbarEstimate {
        n,
        value: if width == 0 { 0.0 } else { (cost / width as f64).clamp(0.0, 1.0) },
        coupling: CouplingTable {
            blocks,
            mu1,
            mu2,
            mass,
        },
    })
}

type Transport = (Vec<Vec<u32>>, Vec<f64>, Vec<f64>, BTreeMap<(usize, usize), f64>, f64);

fn union_support(t1: &Table, t2: &Table) -> (Vec<Vec<u32>>, Vec<f64>, Vec<f64>) {
    let keys: Vec<Vec<u32>> = t1
        .keys()
        .chain(t2.keys())
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mu1 = keys.iter().map(|k| t1.get(k).copied().unwrap_or(0.0)).collect();
    let mu2 = keys.iter().map(|k| t2.get(k).copied().unwrap_or(0.0)).collect();
    (keys, mu1, mu2)
}

fn hamming(a: &[u32], b: &[u32]) -> i64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as i64
}

/// Every block of the space is a node joined to its Hamming neighbours at
/// unit cost, so shortest paths realize the Hamming distance. The optimal
/// flow has no cycles and decomposes into source-to-sink paths, one coupling
/// entry each.
fn transport_hamming_graph(t1: &Table, t2: &Table, s: u32, width: usize) -> Transport {
    let (keys, mu1, mu2) = union_support(t1, t2);
    let size = (s as usize).pow(width as u32);
    let code = |b: &[u32]| b.iter().fold(0usize, |acc, &x| acc * s as usize + (x - 1) as usize);
    let src = size;
    let sink = size + 1;
    let mut g = MinCostFlow::new(size + 2);
    let mut stride = vec![1usize; width];
    for i in (0..width.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * s as usize;
    }
    for v in 0..size {
        for &st in &stride {
            let digit = (v / st) % s as usize;
            for d in 0..s as usize {
                if d != digit {
                    g.add_edge(v, v - digit * st + d * st, f64::INFINITY, 1);
                }
            }
        }
    }
    for (k, (&a, &b)) in keys.iter().zip(mu1.iter().zip(&mu2)) {
        if a > 0.0 {
            g.add_edge(src, code(k), a, 0);
        }
        if b > 0.0 {
            g.add_edge(code(k), sink, b, 0);
        }
    }
    let total: f64 = mu1.iter().sum();
    let (_, cost) = g.run(src, sink, total);

    // path decomposition
    let index: BTreeMap<usize, usize> = keys.iter().enumerate().map(|(i, k)| (code(k), i)).collect();
    let mut residual: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); size + 2];
    for (v, r) in residual.iter_mut().enumerate() {
        for (to, f, _) in g.out_flows(v) {
            *r.entry(to).or_insert(0.0) += f;
        }
    }
    let mut mass = BTreeMap::new();
    loop {
        let Some((&start, &f0)) = residual[src].iter().find(|(_, &f)| f > 1e-12) else {
            break;
        };
        let mut path = vec![src, start];
        let mut amount = f0;
        let mut v = start;
        while v != sink {
            let Some((&next, &f)) = residual[v].iter().find(|(_, &f)| f > 1e-12) else {
                break;
            };
            amount = amount.min(f);
            path.push(next);
            v = next;
        }
        if v != sink {
            // numerical dust
            residual[src].remove(&start);
            continue;
        }
        for w in path.windows(2) {
            let e = residual[w[0]].get_mut(&w[1]).unwrap();
            *e -= amount;
        }
        let a = index[&path[1]];
        let b = index[&path[path.len() - 2]];
        *mass.entry((a, b)).or_insert(0.0) += amount;
    }
    (keys, mu1, mu2, mass, cost)
}

fn transport_dense(t1: &Table, t2: &Table) -> Transport {
    let (keys, mu1, mu2) = union_support(t1, t2);
    let rows: Vec<usize> = (0..keys.len()).filter(|&i| mu1[i] > 0.0).collect();
    let cols: Vec<usize> = (0..keys.len()).filter(|&j| mu2[j] > 0.0).collect();
    let (r, c) = (rows.len(), cols.len());
    let src = r + c;
    let sink = src + 1;
    let mut g = MinCostFlow::new(r + c + 2);
    for (ri, &i) in rows.iter().enumerate() {
        g.add_edge(src, ri, mu1[i], 0);
        for (ci, &j) in cols.iter().enumerate() {
            g.add_edge(ri, r + ci, f64::INFINITY, hamming(&keys[i], &keys[j]));
        }
    }
    for (ci, &j) in cols.iter().enumerate() {
        g.add_edge(r + ci, sink, mu2[j], 0);
    }
    let total: f64 = mu1.iter().sum();
    let (_, cost) = g.run(src, sink, total);
    let mut mass = BTreeMap::new();
    for (ri, &i) in rows.iter().enumerate() {
        for (to, f, _) in g.out_flows(ri) {
            mass.insert((i, cols[to - r]), f);
        }
    }
    (keys, mu1, mu2, mass, cost)
}
