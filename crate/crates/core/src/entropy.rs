//! Partition entropy, conditional entropy on finite tables, SMB band checks
//! and approximate inclusion of partitions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{folner_set, GroupId};
use crate::measure::{CylinderMeasure, EmpiricalMeasure, Table};
use crate::source::split_joint;
use crate::verdict::Verdict;

/// Base-2 entropy with 0·log 0 = 0.
pub fn partition_entropy(dist: &[f64]) -> Result<f64> {
    if dist.iter().any(|&p| !(p >= -1e-12) || !p.is_finite()) {
        return Err(Error::MalformedDistribution("negative entry".into()));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::MalformedDistribution(format!("sums to {sum}")));
    }
    Ok(entropy_unchecked(dist.iter().copied()))
}

fn entropy_unchecked(ps: impl Iterator<Item = f64>) -> f64 {
    let h: f64 = ps.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    h.max(0.0)
}

pub fn table_entropy(t: &Table) -> f64 {
    entropy_unchecked(t.values().copied())
}

/// A labelling of site symbols; labels are 1..=labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub name: String,
    pub labels: u32,
    /// `assign[sym]` is the label of symbol `sym` (index 0 unused).
    assign: Vec<u32>,
}

impl Partition {
    pub fn new(name: &str, assign: Vec<u32>) -> Result<Partition> {
        let labels = assign.iter().copied().max().unwrap_or(0);
        if assign.iter().skip(1).any(|&a| a == 0) {
            return Err(Error::InvalidArgument("partition must label every symbol".into()));
        }
        Ok(Partition {
            name: name.to_string(),
            labels,
            assign,
        })
    }

    /// Each symbol of an alphabet of size `s` is its own atom.
    pub fn identity(s: u32) -> Partition {
        Partition {
            name: "id".into(),
            labels: s,
            assign: (0..=s).collect(),
        }
    }

    /// P = {x_e = i} on the product alphabet of sizes s × l.
    pub fn x_side(s: u32, l: u32) -> Partition {
        let mut assign = vec![0];
        assign.extend((1..=s * l).map(|z| split_joint(z, l).0));
        Partition {
            name: "P".into(),
            labels: s,
            assign,
        }
    }

    /// Q = {y_e = j} on the product alphabet of sizes s × l.
    pub fn y_side(s: u32, l: u32) -> Partition {
        Partition::y_truncated(s, l, l)
    }

    /// Q^(k): Y symbols ≥ k merged into one atom.
    pub fn y_truncated(s: u32, l: u32, k: u32) -> Partition {
        let mut assign = vec![0];
        assign.extend((1..=s * l).map(|z| split_joint(z, l).1.min(k)));
        Partition {
            name: format!("Q({k})"),
            labels: k.min(l),
            assign,
        }
    }

    pub fn alphabet(&self) -> u32 {
        self.assign.len() as u32 - 1
    }

    pub fn label(&self, sym: u32) -> u32 {
        self.assign[sym as usize]
    }
}

/// An empirical measure on the product alphabet of X (size s) and Y (size l).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointEmpirical {
    pub measure: EmpiricalMeasure,
    pub s: u32,
    pub l: u32,
}

impl JointEmpirical {
    pub fn new(measure: EmpiricalMeasure, s: u32, l: u32) -> Result<Self> {
        if measure.alphabet != s * l {
            return Err(Error::AlphabetMismatch {
                left: measure.alphabet,
                right: s * l,
            });
        }
        Ok(JointEmpirical { measure, s, l })
    }

    /// A depth-0 joint from a matrix `p[x−1][y−1]`.
    pub fn from_matrix(group: GroupId, p: &[Vec<f64>]) -> Result<Self> {
        let s = p.len() as u32;
        let l = p.first().map_or(0, |r| r.len()) as u32;
        let mut t = Table::new();
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 0.0 {
                    t.insert(
                        vec![crate::source::joint_symbol(i as u32 + 1, j as u32 + 1, l)],
                        v,
                    );
                }
            }
        }
        let m = EmpiricalMeasure::from_tables(group, s * l, BTreeMap::from([(0, t)]), None)?;
        JointEmpirical::new(m, s, l)
    }

    pub fn x_marginal(&self) -> EmpiricalMeasure {
        let l = self.l;
        self.measure.map_symbols(self.s, move |z| split_joint(z, l).0)
    }

    pub fn y_marginal(&self) -> EmpiricalMeasure {
        let l = self.l;
        self.measure.map_symbols(self.l, move |z| split_joint(z, l).1)
    }
}

/// Distribution of the P-name on F_n.
pub fn partition_table(m: &EmpiricalMeasure, p: &Partition, n: usize) -> Result<Table> {
    check_partition(m, p)?;
    let mut out = Table::new();
    for (k, &v) in m.table_at(n)? {
        let key: Vec<u32> = k.iter().map(|&s| p.label(s)).collect();
        *out.entry(key).or_insert(0.0) += v;
    }
    Ok(out)
}

fn check_partition(m: &EmpiricalMeasure, p: &Partition) -> Result<()> {
    if p.alphabet() != m.alphabet {
        return Err(Error::AlphabetMismatch {
            left: p.alphabet(),
            right: m.alphabet,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub n: usize,
    /// H(P^{F_n}).
    pub block_entropy: f64,
    /// H(P^{F_n}) / |F_n|.
    pub per_site: f64,
    /// (H_n − H_{n−1}) / (|F_n| − |F_{n−1}|) when depth n−1 is available.
    pub difference_quotient: Option<f64>,
}

pub fn process_entropy_estimate(
    m: &EmpiricalMeasure,
    p: &Partition,
    n: usize,
) -> Result<EntropyEstimate> {
    let h = table_entropy(&partition_table(m, p, n)?);
    let width = folner_set(m.group, n).len();
    let difference_quotient = if n > 0 && m.table(n - 1).is_some() {
        let h0 = table_entropy(&partition_table(m, p, n - 1)?);
        let w0 = folner_set(m.group, n - 1).len();
        Some((h - h0) / (width - w0) as f64)
    } else {
        None
    };
    Ok(EntropyEstimate {
        n,
        block_entropy: h,
        per_site: h / width as f64,
        difference_quotient,
    })
}

/// Joint table of (P-label at e, Q-name on F_n).
fn pe_qn_table(
    joint: &JointEmpirical,
    p: &Partition,
    q: &Partition,
    n: usize,
) -> Result<BTreeMap<Vec<u32>, BTreeMap<u32, f64>>> {
    check_partition(&joint.measure, p)?;
    check_partition(&joint.measure, q)?;
    let f = folner_set(joint.measure.group, n);
    let e = f
        .index_of(&joint.measure.group.identity())
        .expect("Følner sets contain e");
    let mut out: BTreeMap<Vec<u32>, BTreeMap<u32, f64>> = BTreeMap::new();
    for (k, &v) in joint.measure.table_at(n)? {
        let qname: Vec<u32> = k.iter().map(|&s| q.label(s)).collect();
        *out.entry(qname)
            .or_default()
            .entry(p.label(k[e]))
            .or_insert(0.0) += v;
    }
    Ok(out)
}

/// H(P | ∨_{g∈F_n} gQ) = Σ_B ξ(B) H_B(P).
pub fn conditional_entropy(
    joint: &JointEmpirical,
    p: &Partition,
    q: &Partition,
    n: usize,
) -> Result<f64> {
    let t = pe_qn_table(joint, p, q, n)?;
    let mut h = 0.0;
    for row in t.values() {
        let mass: f64 = row.values().sum();
        if mass > 0.0 {
            h += mass * entropy_unchecked(row.values().map(|v| v / mass));
        }
    }
    Ok(h.max(0.0))
}

/// ε²/9 scaled just below the threshold.
pub fn delta_for_inclusion(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {eps} must lie in (0, 1)")));
    }
    Ok(eps * eps / 9.0 * 0.99)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionWitness {
    pub holds: bool,
    /// For each P-label A: the Q^{F_n}-names whose union approximates A.
    pub unions: BTreeMap<u32, Vec<Vec<u32>>>,
    /// ξ(A △ B_A) per P-label.
    pub defects: BTreeMap<u32, f64>,
    /// Whether the dominating-set construction itself was the witness.
    pub dominating: bool,
}

/// P ⊂_ε ∨_{g∈F_n} gQ: every atom A of P is within ε of a union of Q-names.
///
/// The dominating-set union is tried first; if it fails, each atom is also
/// tested against its best possible union (a Q-name joins B_A iff more than
/// half its mass lies in A), which decides the question exactly.
pub fn approx_inclusion_check(
    joint: &JointEmpirical,
    p: &Partition,
    q: &Partition,
    eps: f64,
    n: usize,
) -> Result<InclusionWitness> {
    let t = pe_qn_table(joint, p, q, n)?;
    let mut atom_mass: BTreeMap<u32, f64> = (1..=p.labels).map(|a| (a, 0.0)).collect();
    for row in t.values() {
        for (&a, &v) in row {
            *atom_mass.get_mut(&a).unwrap() += v;
        }
    }
    let evaluate = |choose: &dyn Fn(u32, &BTreeMap<u32, f64>) -> bool| {
        let mut unions = BTreeMap::new();
        let mut defects = BTreeMap::new();
        for a in 1..=p.labels {
            let mut names = Vec::new();
            let mut in_union = 0.0;
            let mut overlap = 0.0;
            for (name, row) in &t {
                if choose(a, row) {
                    names.push(name.clone());
                    in_union += row.values().sum::<f64>();
                    overlap += row.get(&a).copied().unwrap_or(0.0);
                }
            }
            let d = (atom_mass[&a] + in_union - 2.0 * overlap).max(0.0);
            unions.insert(a, names);
            defects.insert(a, d);
        }
        let holds = defects.values().all(|&d| d < eps);
        (holds, unions, defects)
    };
    let dominating = |a: u32, row: &BTreeMap<u32, f64>| {
        // lowest label among maximizers
        let mut best = (0u32, f64::NEG_INFINITY);
        for lab in 1..=p.labels {
            let v = row.get(&lab).copied().unwrap_or(0.0);
            if v > best.1 {
                best = (lab, v);
            }
        }
        best.0 == a
    };
    let (holds, unions, defects) = evaluate(&dominating);
    if holds {
        return Ok(InclusionWitness {
            holds,
            unions,
            defects,
            dominating: true,
        });
    }
    let optimal = |a: u32, row: &BTreeMap<u32, f64>| {
        let inside = row.get(&a).copied().unwrap_or(0.0);
        let total: f64 = row.values().sum();
        inside > total - inside
    };
    let (holds, unions, defects) = evaluate(&optimal);
    Ok(InclusionWitness {
        holds,
        unions,
        defects,
        dominating: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmbReport {
    pub n: usize,
    pub h: f64,
    pub delta: f64,
    /// Probability band [2^{−|F_n|(h+δ)}, 2^{−|F_n|(h−δ)}].
    pub lower: f64,
    pub upper: f64,
    /// Total mass of depth-n blocks whose probability lies in the band.
    pub mass: f64,
    pub pass: bool,
}

pub fn smb_check(m: &EmpiricalMeasure, h: f64, delta: f64, n: usize) -> Result<SmbReport> {
    let width = folner_set(m.group, n).len() as f64;
    let lo_exp = -width * (h + delta);
    let hi_exp = -width * (h - delta);
    let mut mass = 0.0;
    for &p in m.table_at(n)?.values() {
        let lp = p.log2();
        if lp >= lo_exp - 1e-9 && lp <= hi_exp + 1e-9 {
            mass += p;
        }
    }
    Ok(SmbReport {
        n,
        h,
        delta,
        lower: lo_exp.exp2(),
        upper: hi_exp.exp2(),
        mass,
        pass: mass >= 1.0 - delta,
    })
}

/// min(2δ/(h+3δ), δ/log s).
pub fn smb_subset_eta(delta: f64, h: f64, s: u32) -> Result<f64> {
    if !(delta > 0.0) || s < 2 || !(h >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need δ > 0, h ≥ 0, s ≥ 2 (got δ={delta}, h={h}, s={s})"
        )));
    }
    Ok((2.0 * delta / (h + 3.0 * delta)).min(delta / (s as f64).log2()))
}

/// For f ≥ 0 on a finite probability space: ∫f < ab implies μ{f ≥ a} < b.
pub fn rectangle_rule_check(values: &[f64], weights: &[f64], a: f64, b: f64) -> Verdict {
    let integral: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    if values.iter().any(|&v| v < 0.0) || integral >= a * b {
        return Verdict::PremiseFailed(format!("∫f = {integral} not below ab = {}", a * b));
    }
    let tail: f64 = values
        .iter()
        .zip(weights)
        .filter(|(v, _)| **v >= a)
        .map(|(_, w)| w)
        .sum();
    if tail < b {
        Verdict::Holds
    } else {
        Verdict::Violated(format!("μ{{f ≥ a}} = {tail} ≥ b = {b}"))
    }
}

/// Entropy of the joint name (P at e, Q on F_n); used for the chain rule.
pub fn joint_entropy_pe_qn(
    joint: &JointEmpirical,
    p: &Partition,
    q: &Partition,
    n: usize,
) -> Result<f64> {
    let t = pe_qn_table(joint, p, q, n)?;
    Ok(entropy_unchecked(t.values().flat_map(|r| r.values().copied())))
}

/// H(∨_{g∈F_n} gQ).
pub fn name_entropy(joint: &JointEmpirical, q: &Partition, n: usize) -> Result<f64> {
    Ok(table_entropy(&partition_table(&joint.measure, q, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert!(close(partition_entropy(&[0.25; 4]).unwrap(), 2.0, 1e-12));
        assert!(close(partition_entropy(&[0.25, 0.75]).unwrap(), 0.811278, 1e-6));
        assert_eq!(partition_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(partition_entropy(&[0.5, 0.6]).is_err());
        assert!(partition_entropy(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn conditional_entropy_examples() {
        let diag = JointEmpirical::from_matrix(GroupId::Z1, &[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let (p, q) = (Partition::x_side(2, 2), Partition::y_side(2, 2));
        assert_eq!(conditional_entropy(&diag, &p, &q, 0).unwrap(), 0.0);
        assert_eq!(conditional_entropy(&diag, &p, &p, 0).unwrap(), 0.0);

        let ind = JointEmpirical::from_matrix(
            GroupId::Z1,
            &[vec![0.3 * 0.6, 0.3 * 0.4], vec![0.7 * 0.6, 0.7 * 0.4]],
        )
        .unwrap();
        let h = conditional_entropy(&ind, &p, &q, 0).unwrap();
        assert!(close(h, partition_entropy(&[0.3, 0.7]).unwrap(), 1e-12));
        let chain = joint_entropy_pe_qn(&ind, &p, &q, 0).unwrap();
        assert!(close(chain, name_entropy(&ind, &q, 0).unwrap() + h, 1e-12));
    }

    #[test]
    fn delta_examples() {
        assert!(close(delta_for_inclusion(0.3).unwrap(), 0.0099, 1e-15));
        assert!(delta_for_inclusion(1.0).is_err());
        assert!(delta_for_inclusion(0.0).is_err());
        assert!(delta_for_inclusion(0.2).unwrap() < delta_for_inclusion(0.5).unwrap());
    }

    #[test]
    fn inclusion_examples() {
        let (p, q) = (Partition::x_side(2, 2), Partition::y_side(2, 2));
        let diag = JointEmpirical::from_matrix(GroupId::Z1, &[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let w = approx_inclusion_check(&diag, &p, &q, 1e-9, 0).unwrap();
        assert!(w.holds && w.dominating);
        assert_eq!(w.defects[&1], 0.0);

        let ind = JointEmpirical::from_matrix(GroupId::Z1, &[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let w = approx_inclusion_check(&ind, &p, &q, 0.4, 0).unwrap();
        assert!(!w.holds);
        assert!(close(w.defects[&1], 0.5, 1e-12));
    }

    #[test]
    fn smb_eta_examples() {
        assert!(close(smb_subset_eta(0.1, 1.0, 2).unwrap(), 0.1, 1e-12));
        assert!(close(smb_subset_eta(0.1, 0.0, 2).unwrap(), 0.1, 1e-12));
        assert!(close(smb_subset_eta(0.1, 1.0, 1024).unwrap(), 0.01, 1e-12));
        assert!(smb_subset_eta(0.0, 1.0, 2).is_err());
        assert!(smb_subset_eta(0.1, 1.0, 1).is_err());
    }

    #[test]
    fn rectangle_rule() {
        assert!(rectangle_rule_check(&[0.0, 1.0], &[0.9, 0.1], 0.5, 0.3).holds());
        assert!(matches!(
            rectangle_rule_check(&[1.0, 1.0], &[0.5, 0.5], 0.5, 0.3),
            Verdict::PremiseFailed(_)
        ));
    }
}
