//! End-to-end run: sample (x, y), tile the window, fit markers, build the
//! dictionaries, encode y into x̄, decode it back and measure what was lost.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::block::{Block, Grid};
use crate::codec::{
    build_dictionary, counting_bound_check, decode, encode, entropy_deficit_bound, smb_band_pass,
    vkl_check, Codebook, Dictionary, PsiPlan, SmbSide,
};
use crate::config::ExperimentConfig;
use crate::entropy::{process_entropy_estimate, JointEmpirical, Partition};
use crate::error::{Error, Result};
use crate::group::{BoxWindow, FiniteSubset, GroupElement};
use crate::marker::{construct_markers, find_marker_occurrences, MarkerSet};
use crate::measure::{empirical_measure_depths, metric_measure_block};
use crate::perturb::{perturbation_run, PerturbationReport};
use crate::source::{derive_seed, join_grids, joint_symbol, rng, truncate_symbol, ModelMeasure};
use crate::tiling::{
    construct_quasitiling_layers, disjointify, is_epsilon_disjoint, layer_count, Quasitiling,
    TilingParams,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub modules: BTreeMap<String, String>,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Provenance {
        Provenance::with_hash(cfg.hash(), cfg.seed)
    }

    pub fn with_hash(config_sha256: String, seed: u64) -> Provenance {
        let modules = [
            "group", "block", "tiling", "entropy", "marker", "codec", "perturb", "pipeline",
        ]
        .iter()
        .map(|m| (m.to_string(), VERSION.to_string()))
        .collect();
        Provenance {
            config_sha256,
            seed,
            version: VERSION.to_string(),
            modules,
        }
    }
}

/// Report files by name; written verbatim so identical runs give identical bytes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bundle {
    pub files: BTreeMap<String, String>,
}

impl Bundle {
    pub fn insert_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.files.insert(name.to_string(), text);
        Ok(())
    }

    pub fn insert_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Error::Internal(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))?;
        self.files
            .insert(name.to_string(), String::from_utf8(bytes).expect("csv is utf-8"));
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub tile: usize,
    pub center: i64,
    pub center_row: i64,
    pub layer: usize,
    pub size: usize,
    pub in_family: bool,
    pub recovered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryAudit {
    pub shape_size: usize,
    pub marker: usize,
    pub tiles: usize,
    pub observed_y_blocks: usize,
    pub typical_y_blocks: usize,
    pub entries: usize,
    pub pool: usize,
    pub images: usize,
    pub k: usize,
    pub injective: bool,
    pub counting_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(value: f64, bound: f64) -> Check {
        Check {
            value,
            bound,
            pass: value <= bound,
        }
    }

    fn at_least(value: f64, bound: f64) -> Check {
        Check {
            value,
            bound,
            pass: value >= bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub provenance: Provenance,
    pub window: usize,
    pub layers: usize,
    pub marker_d0: usize,
    pub marker_domain: usize,
    pub marker_budget: Option<f64>,
    pub tiles: usize,
    pub tiles_dropped: usize,
    pub tile_cover: f64,
    pub shapes: usize,
    pub in_family_tiles: usize,
    pub typical_tile_mass: f64,
    pub decoded_tiles: usize,
    pub inverted_tiles: usize,
    pub counting_bound_shapes: usize,
    pub h_x: f64,
    pub h_y: f64,
    pub h_xbar: f64,
    /// Exact invariants: injectivity, marker audit, disjointness, round trip.
    pub exact_ok: bool,
    pub unrecovered: Check,
    pub h_q_given_p: Check,
    pub h_p_given_q: Check,
    pub entropy_deficit: Check,
    pub vkl: bool,
    pub perturbation: Option<PerturbationReport>,
}

impl Summary {
    pub fn pass(&self) -> bool {
        self.exact_ok
            && self.unrecovered.pass
            && self.h_q_given_p.pass
            && self.h_p_given_q.pass
            && self.entropy_deficit.pass
            && self.perturbation.as_ref().map_or(true, PerturbationReport::pass)
    }
}

pub struct PipelineOutput {
    pub summary: Summary,
    pub bundle: Bundle,
    pub xbar: Grid,
    pub codebook: Codebook,
}

/// Remove tiles whose trimmed shape cannot hold D·D and disjointify again
/// until every tile can carry its marker.
pub fn fit_markers(raw: &Quasitiling, dd: &FiniteSubset) -> Result<(Quasitiling, Quasitiling, usize)> {
    let mut current = raw.clone();
    let mut dropped = 0;
    loop {
        let t = disjointify(&current, None)?;
        let bad: BTreeSet<GroupElement> = t
            .tiles()
            .into_iter()
            .filter(|tile| !dd.is_subset(&t.shape(tile.shape).set))
            .map(|tile| tile.center)
            .collect();
        if bad.is_empty() {
            return Ok((current, t, dropped));
        }
        dropped += bad.len();
        let mut centers = current.centers.clone();
        for cs in centers.values_mut() {
            cs.retain(|c| !bad.contains(c));
        }
        current = Quasitiling::new(current.group, current.shapes.clone(), centers, current.window.clone())?;
    }
}

/// H(A | B) of the empirical joint law of the pairs.
fn conditional_entropy_of_pairs(pairs: impl Iterator<Item = (u32, u32)>) -> f64 {
    let mut joint: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut cond: BTreeMap<u32, u64> = BTreeMap::new();
    let mut total = 0u64;
    for (a, b) in pairs {
        *joint.entry((b, a)).or_insert(0) += 1;
        *cond.entry(b).or_insert(0) += 1;
        total += 1;
    }
    let n = total as f64;
    let mut h = 0.0;
    for (&(b, _), &c) in &joint {
        let p = c as f64 / n;
        let pb = cond[&b] as f64 / n;
        h -= p * (p / pb).log2();
    }
    h.max(0.0)
}

struct ShapeCode {
    dictionary: Dictionary,
    audit: DictionaryAudit,
}

#[allow(clippy::too_many_arguments)]
fn build_shape_code(
    cfg: &ExperimentConfig,
    t: &Quasitiling,
    shape_id: usize,
    x: &Grid,
    y: &Grid,
    markers: &MarkerSet,
    models: (&ModelMeasure, &ModelMeasure, &ModelMeasure),
) -> Result<ShapeCode> {
    let (mx, my, mj) = models;
    let shape = t.shape(shape_id);
    let set = &shape.set;
    let size = set.len();
    let delta = cfg.codec.delta;
    let (s, l) = (cfg.s(), cfg.codec.l);
    let h_x = cfg.source_x.entropy_rate();
    let h_y = cfg.h_y();
    let centers = &t.centers[&shape_id];
    let observed: BTreeSet<Vec<u32>> = centers
        .iter()
        .map(|&c| y.pattern_at(set, c).ok_or(Error::DomainEscape(c)))
        .collect::<Result<_>>()?;
    let typical: Vec<Vec<u32>> = observed
        .iter()
        .filter(|b| smb_band_pass(my.log2_prob_on(set, b), size, h_y, delta, SmbSide::Y))
        .cloned()
        .collect();

    // candidate X-blocks: typical x-blocks on translates of S, canonical order
    let need = cfg.pool.max(2 * typical.len()).max(1);
    let mut pool: Vec<Vec<u32>> = Vec::new();
    let mut seen = BTreeSet::new();
    for c in x.window.points() {
        if pool.len() >= need {
            break;
        }
        let Some(a) = x.pattern_at(set, c) else { continue };
        if smb_band_pass(mx.log2_prob_on(set, &a), size, h_x, delta, SmbSide::X) && seen.insert(a.clone()) {
            pool.push(a);
        }
    }
    if pool.is_empty() {
        return Err(Error::EmptySet("typical X-blocks for a shape"));
    }
    let plan = PsiPlan::new(set, markers)?;
    let mut images: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
    for (i, a) in pool.iter().enumerate() {
        images.entry(plan.apply(a, markers, shape.layer)).or_default().push(i);
    }
    let afam: Vec<Vec<u32>> = images.keys().cloned().collect();
    let preimages: Vec<&Vec<usize>> = images.values().collect();

    let related = |a: &[u32], b: &[u32]| -> Result<bool> {
        let lp = mx.log2_prob_on(set, a) + my.log2_prob_on(set, b);
        if !smb_band_pass(lp, size, h_x + h_y, delta, SmbSide::Joint) {
            return Ok(false);
        }
        let joint: Vec<u32> = a.iter().zip(b).map(|(&u, &v)| joint_symbol(u, v, l)).collect();
        let blk = Block::new(set.clone(), joint, s * l)?;
        Ok(metric_measure_block(mj, &blk, cfg.metric)? < cfg.codec.delta_prime())
    };
    let mut bfam = Vec::new();
    let mut relation = Vec::new();
    for b in &typical {
        let mut nbrs = Vec::new();
        for (ai, pre) in preimages.iter().enumerate() {
            let mut hit = false;
            for &p in pre.iter() {
                if related(&pool[p], b)? {
                    hit = true;
                    break;
                }
            }
            if hit {
                nbrs.push(ai);
            }
        }
        if !nbrs.is_empty() {
            bfam.push(b.clone());
            relation.push(nbrs);
        }
    }
    let k = relation.iter().map(Vec::len).min().unwrap_or(0);
    let dictionary = build_dictionary(set, shape.layer, &bfam, &afam, &relation, k)?;
    dictionary.audit(markers)?;
    let delta_ratio = Ratio::new((delta * 1e6).round() as u64, 1_000_000);
    let counting = counting_bound_check(
        size as u64,
        markers.domain().len() as u64,
        cfg.codec.j_max as u64,
        s,
        delta_ratio,
    );
    let audit = DictionaryAudit {
        shape_size: size,
        marker: shape.layer,
        tiles: centers.len(),
        observed_y_blocks: observed.len(),
        typical_y_blocks: typical.len(),
        entries: dictionary.len(),
        pool: pool.len(),
        images: afam.len(),
        k,
        injective: dictionary.check_injective().is_ok(),
        counting_bound: counting.holds,
    };
    Ok(ShapeCode { dictionary, audit })
}

fn internal(m: String) -> Error {
    Error::Internal(m)
}

pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    cfg.validate().map_err(|e| e.at_stage("config"))?;
    let seed = cfg.seed;
    let group = cfg.group;
    let (s, l) = (cfg.s(), cfg.codec.l);
    let (delta, eta) = (cfg.codec.delta, cfg.codec.eta);

    let window = BoxWindow::cube(group, cfg.window).map_err(|e| e.at_stage("sample"))?;
    let x = cfg
        .source_x
        .sample_grid(&window, &mut rng(derive_seed(seed, "x")))
        .map_err(|e| e.at_stage("sample"))?;
    let y = cfg
        .source_y
        .sample_grid(&window, &mut rng(derive_seed(seed, "y")))
        .map_err(|e| e.at_stage("sample"))?
        .map(l, |v| truncate_symbol(v, l));

    let layers = layer_count(eta);
    let markers = construct_markers(layers, cfg.markers.delta_m, s, group)
        .map_err(|e| e.at_stage("markers"))?;
    let d = markers.domain();
    let dd = d.product(&d);

    let tp = TilingParams::new(eta, cfg.tiling.k_min, derive_seed(seed, "tiling"))
        .map_err(|e| e.at_stage("tiling"))?;
    let raw = construct_quasitiling_layers(&window, &tp).map_err(|e| e.at_stage("tiling"))?;
    let (_, t, dropped) = fit_markers(&raw, &dd).map_err(|e| e.at_stage("tiling"))?;

    let mx = ModelMeasure::new(group, cfg.source_x.clone()).map_err(|e| e.at_stage("dictionary"))?;
    let my = ModelMeasure::new(group, cfg.truncated_y()).map_err(|e| e.at_stage("dictionary"))?;
    let mj = ModelMeasure::new(group, cfg.source_x.product(&cfg.truncated_y()))
        .map_err(|e| e.at_stage("dictionary"))?;
    let mut dictionaries = Vec::new();
    let mut audits = Vec::new();
    for &id in t.centers.keys() {
        let code = build_shape_code(cfg, &t, id, &x, &y, &markers, (&mx, &my, &mj))
            .map_err(|e| e.at_stage("dictionary"))?;
        dictionaries.push(code.dictionary);
        audits.push(code.audit);
    }
    let codebook = Codebook {
        markers: markers.clone(),
        layers: raw.shapes.clone(),
        dictionaries,
    };

    let xbar = encode(&y, &t, &codebook).map_err(|e| e.at_stage("encode"))?;

    // exact audits
    let tiles = t.tiles();
    let mut expected: Vec<(GroupElement, usize)> = tiles
        .iter()
        .map(|tile| (tile.center, t.shape(tile.shape).layer))
        .collect();
    expected.sort();
    let found = find_marker_occurrences(&xbar, &markers);
    let markers_ok = found == expected;
    let disjoint_ok = is_epsilon_disjoint(&t, 0.0).holds;

    let decoded = decode(&xbar, &codebook, l).map_err(|e| e.at_stage("decode"))?;
    let tile_key = |q: &Quasitiling| -> BTreeSet<(GroupElement, FiniteSubset)> {
        q.tiles()
            .into_iter()
            .map(|tile| (tile.center, q.shape(tile.shape).set.clone()))
            .collect()
    };
    let tiling_ok = tile_key(&decoded.tiling) == tile_key(&t);

    let dec: HashMap<GroupElement, u32> = decoded.y.iter().collect();
    let mut rows = Vec::new();
    let mut in_family_tiles = 0;
    let mut roundtrip_ok = true;
    let mut typical_area = 0usize;
    let mut family_mask = vec![false; window.size()];
    for (i, tile) in tiles.iter().enumerate() {
        let set = &t.shape(tile.shape).set;
        let dict = codebook
            .dictionary(set)
            .ok_or_else(|| internal("tile without dictionary".into()))?;
        let b = y.pattern_at(set, tile.center).expect("tile inside window");
        let in_family = dict.contains(&b);
        let recovered = set
            .iter()
            .zip(&b)
            .all(|(&f, &v)| dec.get(&(f * tile.center)) == Some(&v));
        if in_family {
            in_family_tiles += 1;
            roundtrip_ok &= recovered;
            for &f in set.iter() {
                family_mask[window.index(&(f * tile.center)).expect("inside")] = true;
            }
        }
        if smb_band_pass(my.log2_prob_on(set, &b), set.len(), cfg.h_y(), delta, SmbSide::Y) {
            typical_area += set.len();
        }
        let coords = tile.center.coords();
        rows.push(CoverageRow {
            tile: i + 1,
            center: *coords.last().unwrap(),
            center_row: if coords.len() > 1 { coords[0] } else { 0 },
            layer: t.shape(tile.shape).layer,
            size: set.len(),
            in_family,
            recovered,
        });
    }
    let injective_ok = codebook.dictionaries.iter().all(|d| d.check_injective().is_ok());
    let exact_ok = markers_ok && disjoint_ok && tiling_ok && roundtrip_ok && injective_ok;

    let w = window.size() as f64;
    let correct = window
        .points()
        .zip(&y.data)
        .filter(|(g, v)| dec.get(g) == Some(v))
        .count();
    let unrecovered = 1.0 - correct as f64 / w;
    let cover = t.union().len();
    let on_tile: Vec<bool> = {
        let mut m = vec![false; window.size()];
        for tile in &tiles {
            for &g in tile.set.iter() {
                m[window.index(&g).expect("inside")] = true;
            }
        }
        m
    };

    // decoder view: the decoded symbol or 0
    let h_qp = conditional_entropy_of_pairs(
        window
            .points()
            .zip(&y.data)
            .map(|(g, &v)| (v, dec.get(&g).copied().unwrap_or(0))),
    );
    // encoder view: x̄ is known off the tiles and on in-family tiles
    let h_pq = conditional_entropy_of_pairs(xbar.data.iter().enumerate().map(|(i, &a)| {
        let known = !on_tile[i] || family_mask[i];
        (a, if known { a } else { 0 })
    }));
    let log_l = (l as f64).log2();
    let log_s = (s as f64).log2();
    let slack = 2.0 * delta + 2.0 * eta;

    let n_h = cfg.entropy_depth;
    let mxbar = empirical_measure_depths(&xbar, [n_h]).map_err(|e| e.at_stage("entropy"))?;
    let h_xbar = process_entropy_estimate(&mxbar, &Partition::identity(s), n_h)
        .map_err(|e| e.at_stage("entropy"))?
        .per_site;
    let h_y = cfg.h_y();
    let deficit_bound = entropy_deficit_bound(h_y, delta, eta, l);

    let joint_grid = join_grids(&xbar, &y).map_err(|e| e.at_stage("entropy"))?;
    let jm = JointEmpirical::new(
        empirical_measure_depths(&joint_grid, [0]).map_err(|e| e.at_stage("entropy"))?,
        s,
        l,
    )?;
    let vkl = vkl_check(&jm, cfg.codec.k, l, 0).map_err(|e| e.at_stage("entropy"))?;

    let perturbation = match cfg.noise {
        Some(nc) => Some(
            perturbation_run(&x, &y, nc.eps, derive_seed(seed, "noise"), n_h, cfg.metric.n_max)
                .map_err(|e| e.at_stage("perturb"))?,
        ),
        None => None,
    };

    let summary = Summary {
        provenance: Provenance::of(cfg),
        window: window.size(),
        layers,
        marker_d0: markers.d0.len(),
        marker_domain: d.len(),
        marker_budget: markers.budget_under(&cfg.source_x),
        tiles: tiles.len(),
        tiles_dropped: dropped,
        tile_cover: cover as f64 / w,
        shapes: codebook.dictionaries.len(),
        in_family_tiles,
        typical_tile_mass: typical_area as f64 / cover.max(1) as f64,
        decoded_tiles: decoded.tiles,
        inverted_tiles: decoded.inverted,
        counting_bound_shapes: audits.iter().filter(|a| a.counting_bound).count(),
        h_x: cfg.source_x.entropy_rate(),
        h_y,
        h_xbar,
        exact_ok,
        unrecovered: Check::at_most(unrecovered, slack + 0.03),
        h_q_given_p: Check::at_most(h_qp, slack * log_l + 0.05),
        h_p_given_q: Check::at_most(h_pq, slack * log_s + 0.05),
        entropy_deficit: Check::at_least(h_xbar, deficit_bound - 0.05),
        vkl,
        perturbation,
    };

    let mut bundle = Bundle::default();
    bundle.insert_json("summary.json", &summary)?;
    bundle.insert_csv("coverage.csv", &rows)?;
    bundle.insert_json("dictionaries.json", &audits)?;
    bundle.insert_json("codebook.json", &codebook)?;
    bundle.insert_json("xbar.json", &xbar)?;
    bundle.insert_json("config.json", cfg)?;
    Ok(PipelineOutput {
        summary,
        bundle,
        xbar,
        codebook,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditional_entropy_of_pairs_basics() {
        let same = (1..=4u32).map(|v| (v, v));
        assert!(conditional_entropy_of_pairs(same).abs() < 1e-12);
        let blind = (1..=4u32).map(|v| (v, 0));
        assert!((conditional_entropy_of_pairs(blind) - 2.0).abs() < 1e-12);
    }
}
