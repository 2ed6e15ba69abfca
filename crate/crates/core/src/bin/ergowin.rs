use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ergowin::config::{ExperimentConfig, BUNDLED_ZD1};
use ergowin::group::{folner_set, invariance_defect, BoxWindow, FiniteSubset, GroupId};
use ergowin::marker::{construct_markers, verify_marker_uniqueness};
use ergowin::measure::{empirical_measure_depths, EmpiricalMeasure};
use ergowin::perturb::{dbar_estimate, perturbation_run};
use ergowin::pipeline::{run_pipeline, Bundle, Provenance};
use ergowin::source::{derive_seed, rng, SourceSpec};
use ergowin::suite::{counting_trials, disjointify_trials, marker_sweep, Tally};
use ergowin::tiling::{
    boundary_margin, construct_quasitiling, covering_density, interior_covering_density,
    is_epsilon_disjoint, TilingParams,
};
use ergowin::entropy::{process_entropy_estimate, Partition};
use ergowin::block::Grid;

const EXIT_USAGE: u8 = 1;
const EXIT_ASSERT: u8 = 2;

/// Finite-window experiments with quasitilings, markers, block codes and
/// perturbations.
#[derive(Parser)]
#[command(name = "ergowin", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Serialize)]
struct Common {
    /// JSON experiment configuration; defaults to the bundled ℤ config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory; without it reports go to stdout.
    #[arg(long, env = "ERGOWIN_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    group: Option<GroupId>,
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Følner sets and their invariance defects.
    Folner {
        #[command(flatten)]
        common: Common,
        /// Largest index.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Greedy quasitiling of a box window, disjointified.
    Tile {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        k_min: Option<usize>,
        /// Følner index of the density windows.
        #[arg(long, default_value_t = 4)]
        density_n: usize,
    },
    /// Marker blocks for N layers.
    Markers {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long)]
        delta_m: Option<f64>,
        /// X alphabet size.
        #[arg(long)]
        s: Option<u32>,
    },
    /// Block entropies of a stored measure, or of a sample of the X source.
    Entropy {
        #[command(flatten)]
        common: Common,
        /// Serialized EmpiricalMeasure (JSON).
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Full coding pipeline: tiling, markers, dictionaries, encode, decode.
    Code {
        #[command(flatten)]
        common: Common,
    },
    /// Noise on X at each ε and the distance/entropy/Y-drift checks.
    Perturb {
        #[command(flatten)]
        common: Common,
        /// Comma-separated noise rates.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// X as Bernoulli probabilities, e.g. 0.9,0.1.
        #[arg(long, value_delimiter = ',', conflicts_with = "rows")]
        probs: Option<Vec<f64>>,
        /// X as Markov rows, e.g. "0.9,0.1;0.1,0.9".
        #[arg(long)]
        rows: Option<String>,
        /// Entropy depth.
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// d̄ estimate between Bernoulli(p) and Bernoulli(q) samples on ℤ.
    Dbar {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
    /// Run an invariant suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Suite::Exact)]
        suite: Suite,
        /// Marker configurations to check.
        #[arg(long, default_value_t = 120_000)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Exact,
    Full,
}

struct Outcome {
    bundle: Bundle,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.cmd.common().out.clone();
    match run(cli.cmd) {
        Ok(o) => {
            if let Err(e) = emit(&o.bundle, out) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            if o.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("assertion failure; see the reports");
                ExitCode::from(EXIT_ASSERT)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

impl Cmd {
    fn common(&self) -> &Common {
        match self {
            Cmd::Folner { common, .. }
            | Cmd::Tile { common, .. }
            | Cmd::Markers { common, .. }
            | Cmd::Entropy { common, .. }
            | Cmd::Code { common }
            | Cmd::Perturb { common, .. }
            | Cmd::Dbar { common, .. }
            | Cmd::Verify { common, .. } => common,
        }
    }
}

fn emit(b: &Bundle, out: Option<PathBuf>) -> ergowin::Result<()> {
    match out {
        Some(dir) => b.write(&dir),
        None => {
            for (name, text) in &b.files {
                println!("# {name}");
                print!("{text}");
            }
            Ok(())
        }
    }
}

fn config(c: &Common) -> ergowin::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::from_json(BUNDLED_ZD1)?,
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(g) = c.group {
        cfg.group = g;
    }
    if let Some(w) = c.window {
        cfg.window = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Provenance of a subcommand run: hash of the effective parameters.
fn provenance<T: Serialize>(params: &T, seed: u64) -> Provenance {
    let text = serde_json::to_string(params).expect("parameters serialize");
    let digest = Sha256::digest(text.as_bytes());
    Provenance::with_hash(digest.iter().map(|b| format!("{b:02x}")).collect(), seed)
}

fn start<T: Serialize>(params: &T, seed: u64) -> ergowin::Result<Bundle> {
    let mut b = Bundle::default();
    b.insert_json("params.json", params)?;
    b.insert_json("provenance.json", &provenance(params, seed))?;
    Ok(b)
}

fn run(cmd: Cmd) -> ergowin::Result<Outcome> {
    match cmd {
        Cmd::Folner { common, n } => folner(common, n),
        Cmd::Tile {
            common,
            eta,
            k_min,
            density_n,
        } => tile(common, eta, k_min, density_n),
        Cmd::Markers {
            common,
            layers,
            delta_m,
            s,
        } => markers(common, layers, delta_m, s),
        Cmd::Entropy {
            common,
            measure,
            n_max,
        } => entropy(common, measure, n_max),
        Cmd::Code { common } => code(common),
        Cmd::Perturb {
            common,
            eps,
            probs,
            rows,
            n,
        } => perturb(common, eps, probs, rows, n),
        Cmd::Dbar {
            common,
            p,
            q,
            n,
            tolerance,
        } => dbar(common, p, q, n, tolerance),
        Cmd::Verify {
            common,
            suite,
            trials,
        } => verify(common, suite, trials),
    }
}

#[derive(Serialize)]
struct FolnerRow {
    n: usize,
    size: usize,
    radius: i64,
    defect: f64,
}

fn folner(c: Common, n: usize) -> ergowin::Result<Outcome> {
    let group = c.group.unwrap_or(GroupId::Z1);
    #[derive(Serialize)]
    struct P {
        group: GroupId,
        n: usize,
    }
    let params = P { group, n };
    let mut b = start(&params, 0)?;
    let gens = FiniteSubset::new(group.generators());
    let rows = (0..=n)
        .map(|k| {
            let f = folner_set(group, k);
            Ok(FolnerRow {
                n: k,
                size: f.len(),
                radius: f.radius(),
                defect: invariance_defect(&f, &gens)?,
            })
        })
        .collect::<ergowin::Result<Vec<_>>>()?;
    b.insert_csv("folner.csv", &rows)?;
    b.insert_json("folner.json", &folner_set(group, n))?;
    Ok(Outcome { bundle: b, pass: true })
}

#[derive(Serialize)]
struct DensityRow {
    n: usize,
    tiles: usize,
    covering_density: f64,
    interior_density: f64,
    disjoint: bool,
}

fn tile(c: Common, eta: Option<f64>, k_min: Option<usize>, density_n: usize) -> ergowin::Result<Outcome> {
    #[derive(Serialize)]
    struct P {
        group: GroupId,
        window: usize,
        eta: f64,
        k_min: usize,
        seed: u64,
        density_n: usize,
    }
    let base = c.config.as_ref().map(|_| config(&c)).transpose()?;
    let params = P {
        group: c.group.or(base.as_ref().map(|b| b.group)).unwrap_or(GroupId::Z2),
        window: c.window.or(base.as_ref().map(|b| b.window)).unwrap_or(256),
        eta: eta.or(base.as_ref().map(|b| b.tiling.eta)).unwrap_or(0.1),
        k_min: k_min.or(base.as_ref().map(|b| b.tiling.k_min)).unwrap_or(3),
        seed: c.seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(7),
        density_n,
    };
    let mut b = start(&params, params.seed)?;
    let w = BoxWindow::cube(params.group, params.window)?;
    let t = construct_quasitiling(&w, &TilingParams::new(params.eta, params.k_min, params.seed)?)?;
    let disjoint = is_epsilon_disjoint(&t, 0.0).holds;
    let row = DensityRow {
        n: density_n,
        tiles: t.tile_count(),
        covering_density: covering_density(&t, density_n)?,
        interior_density: interior_covering_density(&t, density_n, boundary_margin(&t))?,
        disjoint,
    };
    b.insert_json("tiling.json", &t)?;
    b.insert_csv("density.csv", &[row])?;
    Ok(Outcome { bundle: b, pass: disjoint })
}

#[derive(Serialize)]
struct MarkerRow {
    marker: usize,
    d0: usize,
    domain: usize,
    budget_uniform: f64,
    budget_source: Option<f64>,
    unique: bool,
}

fn markers(c: Common, layers: usize, delta_m: Option<f64>, s: Option<u32>) -> ergowin::Result<Outcome> {
    #[derive(Serialize)]
    struct P {
        group: GroupId,
        layers: usize,
        delta_m: f64,
        s: u32,
    }
    let base = c.config.as_ref().map(|_| config(&c)).transpose()?;
    let params = P {
        group: c.group.or(base.as_ref().map(|b| b.group)).unwrap_or(GroupId::Z1),
        layers,
        delta_m: delta_m.or(base.as_ref().map(|b| b.markers.delta_m)).unwrap_or(0.001),
        s: s.or(base.as_ref().map(|b| b.s())).unwrap_or(2),
    };
    let mut b = start(&params, 0)?;
    let m = construct_markers(params.layers, params.delta_m, params.s, params.group)?;
    m.validate()?;
    let budget_uniform = (params.s as f64).powi(-(m.d0.len() as i32));
    let budget_source = base.as_ref().and_then(|cfg| m.budget_under(&cfg.source_x));
    let mut rows = Vec::new();
    // each marker alone on a background of 2s
    let r = m.geometry().neighbourhood.radius() as usize;
    let w = BoxWindow::cube(params.group, 2 * r + 1)?;
    let centre = params.group.element(&vec![r as i64; params.group.dim()])?;
    for i in 0..m.count() {
        let mut g = Grid::filled(w.clone(), params.s, 2);
        for (h, v) in m.block(i).iter() {
            g.set(&(h * centre), v)?;
        }
        rows.push(MarkerRow {
            marker: i + 1,
            d0: m.d0.len(),
            domain: m.domain().len(),
            budget_uniform,
            budget_source,
            unique: verify_marker_uniqueness(&g, &m, centre)?.holds(),
        });
    }
    let pass = rows.iter().all(|r| r.unique) && budget_uniform <= params.delta_m;
    b.insert_json("markers.json", &m)?;
    b.insert_csv("markers.csv", &rows)?;
    Ok(Outcome { bundle: b, pass })
}

#[derive(Serialize)]
struct EntropyRow {
    n: usize,
    block_entropy: f64,
    per_site: f64,
    conditional: Option<f64>,
}

fn entropy(c: Common, measure: Option<PathBuf>, n_max: Option<usize>) -> ergowin::Result<Outcome> {
    let (m, mut b) = match &measure {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let m: EmpiricalMeasure = serde_json::from_str(&text)?;
            let digest = Sha256::digest(text.as_bytes());
            let hash = digest.iter().map(|b| format!("{b:02x}")).collect();
            let mut b = Bundle::default();
            b.insert_json("provenance.json", &Provenance::with_hash(hash, 0))?;
            (m, b)
        }
        None => {
            let cfg = config(&c)?;
            let w = BoxWindow::cube(cfg.group, cfg.window)?;
            let x = cfg.source_x.sample_grid(&w, &mut rng(derive_seed(cfg.seed, "x")))?;
            let depth = n_max.unwrap_or(cfg.metric.n_max);
            let m = empirical_measure_depths(&x, 0..=depth)?;
            let mut b = Bundle::default();
            b.insert_json("provenance.json", &Provenance::of(&cfg))?;
            b.insert_json("measure.json", &m)?;
            (m, b)
        }
    };
    let top = n_max.unwrap_or(m.max_depth()).min(m.max_depth());
    let p = Partition::identity(m.alphabet);
    let rows = m
        .depths()
        .filter(|&n| n <= top)
        .map(|n| {
            let e = process_entropy_estimate(&m, &p, n)?;
            Ok(EntropyRow {
                n,
                block_entropy: e.block_entropy,
                per_site: e.per_site,
                conditional: e.difference_quotient,
            })
        })
        .collect::<ergowin::Result<Vec<_>>>()?;
    b.insert_csv("entropy.csv", &rows)?;
    Ok(Outcome { bundle: b, pass: true })
}

fn code(c: Common) -> ergowin::Result<Outcome> {
    let cfg = config(&c)?;
    let out = run_pipeline(&cfg)?;
    Ok(Outcome {
        pass: out.summary.pass(),
        bundle: out.bundle,
    })
}

#[derive(Serialize)]
struct PerturbRow {
    eps: f64,
    n: usize,
    distance: f64,
    distance_bound: f64,
    h_before: f64,
    h_after: f64,
    entropy_bound: f64,
    margin: f64,
    y_drift: f64,
    pass: bool,
}

fn parse_rows(text: &str) -> ergowin::Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|r| {
            r.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| ergowin::Error::InvalidArgument(format!("rows: {e}")))
                })
                .collect()
        })
        .collect()
}

fn perturb(
    c: Common,
    eps: Option<Vec<f64>>,
    probs: Option<Vec<f64>>,
    rows: Option<String>,
    n: usize,
) -> ergowin::Result<Outcome> {
    #[derive(Serialize)]
    struct P {
        group: GroupId,
        window: usize,
        seed: u64,
        source_x: SourceSpec,
        source_y: SourceSpec,
        eps: Vec<f64>,
        n: usize,
        n_max: usize,
    }
    let cfg = config(&c)?;
    let source_x = match (probs, rows) {
        (Some(p), _) => SourceSpec::bernoulli(&p)?,
        (None, Some(r)) => SourceSpec::markov(parse_rows(&r)?)?,
        (None, None) => cfg.source_x.clone(),
    };
    let eps = eps
        .or(cfg.noise.map(|n| vec![n.eps]))
        .unwrap_or_else(|| vec![0.1, 0.3, 0.5]);
    let params = P {
        group: cfg.group,
        window: c.window.unwrap_or(if cfg.group == GroupId::Z1 { 1 << 16 } else { 256 }),
        seed: cfg.seed,
        source_x,
        source_y: cfg.truncated_y(),
        eps,
        n,
        n_max: cfg.metric.n_max,
    };
    let mut b = start(&params, params.seed)?;
    let w = BoxWindow::cube(params.group, params.window)?;
    let x = params.source_x.sample_grid(&w, &mut rng(derive_seed(params.seed, "x")))?;
    let y = params.source_y.sample_grid(&w, &mut rng(derive_seed(params.seed, "y")))?;
    let mut out = Vec::new();
    for &e in &params.eps {
        let noise = derive_seed(params.seed, &format!("noise/{e}"));
        let r = perturbation_run(&x, &y, e, noise, n, params.n_max)?;
        out.push(PerturbRow {
            eps: e,
            n,
            distance: r.distance,
            distance_bound: 2.0 * e + 0.02,
            h_before: r.h_before,
            h_after: r.h_after,
            entropy_bound: r.entropy_bound,
            margin: r.h_after - r.entropy_bound + 0.05,
            y_drift: r.y_drift,
            pass: r.pass(),
        });
    }
    let pass = out.iter().all(|r| r.pass);
    b.insert_csv("perturb.csv", &out)?;
    Ok(Outcome { bundle: b, pass })
}

#[derive(Serialize)]
struct DbarRow {
    p: f64,
    q: f64,
    n: usize,
    value: f64,
    target: f64,
    error: f64,
    pass: bool,
}

fn dbar(c: Common, p: f64, q: f64, n: usize, tolerance: f64) -> ergowin::Result<Outcome> {
    #[derive(Serialize)]
    struct P {
        p: f64,
        q: f64,
        n: usize,
        window: usize,
        seed: u64,
    }
    let params = P {
        p,
        q,
        n,
        window: c.window.unwrap_or(10_000),
        seed: c.seed.unwrap_or(7),
    };
    let mut b = start(&params, params.seed)?;
    let w = BoxWindow::cube(GroupId::Z1, params.window)?;
    let sample = |prob: f64, stage: &str| -> ergowin::Result<EmpiricalMeasure> {
        let spec = SourceSpec::bernoulli(&[prob, 1.0 - prob])?;
        let g = spec.sample_grid(&w, &mut rng(derive_seed(params.seed, stage)))?;
        empirical_measure_depths(&g, [n])
    };
    let est = dbar_estimate(&sample(p, "p")?, &sample(q, "q")?, n)?;
    let target = (p - q).abs();
    let error = (est.value - target).abs();
    let row = DbarRow {
        p,
        q,
        n,
        value: est.value,
        target,
        error,
        pass: error <= tolerance,
    };
    let pass = row.pass;
    b.insert_csv("dbar.csv", &[row])?;
    b.insert_json("coupling.json", &est.coupling)?;
    Ok(Outcome { bundle: b, pass })
}

#[derive(Serialize)]
struct VerifyRow {
    check: String,
    trials: usize,
    holds: usize,
    violated: usize,
    premise_failed: usize,
    pass: bool,
    note: String,
}

impl VerifyRow {
    fn from_tally(check: &str, t: &Tally) -> VerifyRow {
        VerifyRow {
            check: check.to_string(),
            trials: t.trials,
            holds: t.holds,
            violated: t.violated,
            premise_failed: t.premise_failed,
            pass: t.all_hold(),
            note: t.first_failure.clone().unwrap_or_default(),
        }
    }

    fn single(check: &str, pass: bool, note: String) -> VerifyRow {
        VerifyRow {
            check: check.to_string(),
            trials: 1,
            holds: pass as usize,
            violated: !pass as usize,
            premise_failed: 0,
            pass,
            note,
        }
    }
}

fn verify(c: Common, suite: Suite, trials: usize) -> ergowin::Result<Outcome> {
    #[derive(Serialize)]
    struct P {
        suite: Suite,
        trials: usize,
        seed: u64,
    }
    let cfg = config(&c)?;
    let params = P {
        suite,
        trials,
        seed: cfg.seed,
    };
    let mut b = start(&params, cfg.seed)?;
    let mut rows = Vec::new();
    for (k, t) in marker_sweep(trials, derive_seed(cfg.seed, "verify/markers"))? {
        rows.push(VerifyRow::from_tally(&format!("marker_uniqueness/{k}"), &t));
    }
    let t = disjointify_trials(200, 0.1, derive_seed(cfg.seed, "verify/disjointify"))?;
    rows.push(VerifyRow::from_tally("disjointify", &t));
    let t = counting_trials(2000, derive_seed(cfg.seed, "verify/counting"));
    rows.push(VerifyRow::from_tally("counting_bound", &t));
    let out = run_pipeline(&cfg)?;
    let s = &out.summary;
    rows.push(VerifyRow::single(
        "pipeline_exact",
        s.exact_ok,
        "dictionary injectivity, marker audit, disjointness, in-family round trip".into(),
    ));
    if let Suite::Full = suite {
        for (name, chk) in [
            ("unrecovered", &s.unrecovered),
            ("h_q_given_p", &s.h_q_given_p),
            ("h_p_given_q", &s.h_p_given_q),
            ("entropy_deficit", &s.entropy_deficit),
        ] {
            rows.push(VerifyRow::single(
                name,
                chk.pass,
                format!("{} against {}", chk.value, chk.bound),
            ));
        }
        if let Some(p) = &s.perturbation {
            rows.push(VerifyRow::single("perturbation", p.pass(), format!("ε = {}", p.eps)));
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    b.insert_csv("verify.csv", &rows)?;
    Ok(Outcome { bundle: b, pass })
}
