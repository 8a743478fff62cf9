use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use losstree::baselines::{binarize, scfs};
use losstree::fixtures;
use losstree::lossmodel::{parse_observation, receiver_solution, TOL};
use losstree::noiseless::solve;
use losstree::noisy::{upsparse_plus, IntervalObservation, Objective};
use losstree::oracle::{
    census_csv_row, l1_sampling_check, noisy_grid_check, sparsest_enumerate, uniqueness_census, CensusConfig,
    Placement, CENSUS_CSV_HEADER, ENUMERATION_LIMIT, GRID_LIMIT, RESTRICTED_TOL,
};
use losstree::simulation::{
    experiment_csv, run_experiment_on, ExperimentConfig, IntervalSource, ProbeBudget, ProbeModel, SolverMode,
};
use losstree::topology::{gen_random_tree, gen_regular_tree, parse_topology, tree_from_spec};
use losstree::LogicalTree;

#[derive(Parser)]
#[command(name = "losstree", version, about = "Sparse link loss inference on tree topologies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a topology file.
    GenTree(GenTree),
    /// Solve exact path observations with UpSparse.
    Solve(Solve),
    /// Solve interval observations with UpSparse+.
    SolveNoisy(SolveNoisy),
    /// Uniqueness census of sparsest solutions.
    Census(Census),
    /// Probe simulation experiment.
    Experiment(Experiment),
    /// Cross-check solver outputs against the brute-force oracles.
    Verify(Verify),
    /// Smallest consistent failure set from binarised observations.
    Scfs(ScfsArgs),
}

#[derive(Args)]
struct TreeArg {
    /// Topology file, or a shorthand such as `ternary:13`, `fig1`, `random:8:3:1`.
    #[arg(long)]
    tree: String,
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when omitted. A `<out>.manifest.json` is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenTree {
    /// Complete tree: branching factor and height.
    #[arg(long, num_args = 2, value_names = ["C", "H"], conflicts_with_all = ["random", "spec"])]
    regular: Option<Vec<usize>>,
    /// Random tree: leaves and largest branching factor.
    #[arg(long, num_args = 2, value_names = ["M", "B"], conflicts_with = "spec")]
    random: Option<Vec<usize>>,
    /// Any tree shorthand.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct Solve {
    #[command(flatten)]
    tree: TreeArg,
    /// Path observations: JSON array, `{"scale", "y"}` object, or `y <j> <v>` text.
    #[arg(long)]
    obs: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SolveNoisy {
    #[command(flatten)]
    tree: TreeArg,
    /// Interval observations: `[{"path", "lo", "hi"}]`.
    #[arg(long)]
    intervals: PathBuf,
    #[arg(long, default_value = "min-l1-among-l0")]
    mode: Objective,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct Census {
    #[command(flatten)]
    tree: TreeArg,
    /// Sparsity levels, comma separated.
    #[arg(long = "K", value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Visit every K-subset of links once instead of random draws.
    #[arg(long)]
    exhaustive: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct Experiment {
    /// JSON experiment configuration; the flags below build one when omitted.
    #[arg(long, conflicts_with_all = ["tree", "k", "probes"])]
    config: Option<PathBuf>,
    #[arg(long)]
    tree: Option<String>,
    #[arg(long = "K", value_delimiter = ',')]
    k: Vec<usize>,
    /// Probes per path, comma separated; `inf` uses exact observations.
    #[arg(long, value_delimiter = ',')]
    probes: Vec<ProbeBudget>,
    /// Repetitions per (K, N).
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.9)]
    level: f64,
    /// `upsparse`, `min-l0`, `min-l1` or `min-l1-among-l0`.
    #[arg(long, default_value = "upsparse")]
    mode: SolverMode,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct Verify {
    #[command(flatten)]
    tree: TreeArg,
    #[arg(long, conflicts_with = "intervals")]
    obs: Option<PathBuf>,
    #[arg(long)]
    intervals: Option<PathBuf>,
    #[arg(long, default_value = "min-l0")]
    mode: Objective,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ScfsArgs {
    #[command(flatten)]
    tree: TreeArg,
    #[arg(long)]
    obs: PathBuf,
    /// A path is bad when its addloss exceeds this value.
    #[arg(long, default_value_t = TOL)]
    threshold: f64,
    #[command(flatten)]
    out: OutArg,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<losstree::Error> for Failure {
    fn from(e: losstree::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: Value,
    seed: Option<u64>,
    version: &'static str,
    outputs: Vec<String>,
    wall_clock_ms: f64,
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Explicit files win over shorthand specs.
fn load_tree(arg: &str) -> Outcome<LogicalTree> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(parse_topology(&read(path)?)?);
    }
    match arg {
        "fig1" => Ok(fixtures::fig1()),
        "fig2" => Ok(fixtures::fig2()),
        _ => tree_from_spec(arg).map_err(|e| Failure::Input(format!("--tree {arg}: not a file, and {e}"))),
    }
}

/// Writes `body` to `--out` (or stdout) and returns the output list for the manifest.
fn emit(out: &OutArg, body: &str) -> Outcome<Vec<String>> {
    match &out.out {
        Some(p) => {
            fs::write(p, body).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            Ok(vec![p.display().to_string()])
        }
        None => {
            print!("{body}");
            Ok(vec!["-".into()])
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

struct Done {
    config: Value,
    seed: Option<u64>,
    outputs: Vec<String>,
    manifest_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> Outcome<(String, Done)> {
    match cli.command {
        Command::GenTree(a) => {
            let tree = match (&a.regular, &a.random, &a.spec) {
                (Some(r), _, _) => gen_regular_tree(r[0], r[1])?,
                (_, Some(r), _) => gen_random_tree(r[0], r[1], a.seed)?,
                (_, _, Some(s)) => load_tree(s)?,
                _ => return Err(Failure::Input("one of --regular, --random or --spec is required".into())),
            };
            let outputs = emit(&a.out, &tree.to_topology_text())?;
            let config = json!({"regular": a.regular, "random": a.random, "spec": a.spec, "n": tree.n(), "m": tree.m()});
            Ok(("gen-tree".into(), done(config, Some(a.seed), outputs, &a.out)))
        }
        Command::Solve(a) => {
            let tree = load_tree(&a.tree.tree)?;
            let y = parse_observation(&read(&a.obs)?, tree.m())?;
            let report = solve(&tree, &y)?;
            let outputs = emit(&a.out, &pretty(&report))?;
            let config = json!({"tree": a.tree.tree, "obs": a.obs});
            Ok(("solve".into(), done(config, None, outputs, &a.out)))
        }
        Command::SolveNoisy(a) => {
            let tree = load_tree(&a.tree.tree)?;
            let obs = IntervalObservation::from_json(&read(&a.intervals)?, tree.m())?;
            let sol = upsparse_plus(&tree, &obs, a.mode)?;
            let outputs = emit(&a.out, &pretty(&sol))?;
            let config = json!({"tree": a.tree.tree, "intervals": a.intervals, "mode": a.mode});
            Ok(("solve-noisy".into(), done(config, None, outputs, &a.out)))
        }
        Command::Census(a) => {
            let tree = load_tree(&a.tree.tree)?;
            let mut csv = format!("{CENSUS_CSV_HEADER}\n");
            for &k in &a.k {
                let cfg = CensusConfig {
                    placement: if a.exhaustive { Placement::Exhaustive } else { Placement::Random },
                    ..CensusConfig::new(k, a.trials, a.seed)
                };
                let r = uniqueness_census(&tree, &cfg)?;
                csv.push_str(&census_csv_row(&a.tree.tree, &r));
                csv.push('\n');
            }
            let outputs = emit(&a.out, &csv)?;
            let config = json!({"tree": a.tree.tree, "K": a.k, "trials": a.trials, "exhaustive": a.exhaustive,
                "loss_range": [0.01, 0.10], "enumeration_limit": ENUMERATION_LIMIT});
            Ok(("census".into(), done(config, Some(a.seed), outputs, &a.out)))
        }
        Command::Experiment(a) => {
            let cfg = match &a.config {
                Some(p) => ExperimentConfig::from_json(&read(p)?)?,
                None => ExperimentConfig {
                    tree: a.tree.clone().ok_or_else(|| Failure::Input("--tree or --config is required".into()))?,
                    k: a.k.clone(),
                    loss_range: [0.01, 0.10],
                    probes: a.probes.clone(),
                    repetitions: a.trials,
                    level: a.level,
                    mode: a.mode,
                    intervals: IntervalSource::Confidence,
                    probe_model: ProbeModel::PerProbe,
                    seed: a.seed,
                },
            };
            let tree = load_tree(&cfg.tree)?;
            let rows = run_experiment_on(&tree, &cfg)?;
            let outputs = emit(&a.out, &experiment_csv(&rows))?;
            let config = serde_json::to_value(&cfg).expect("config serializes");
            Ok(("experiment".into(), done(config, Some(cfg.seed), outputs, &a.out)))
        }
        Command::Verify(a) => {
            let tree = load_tree(&a.tree.tree)?;
            let report = match (&a.obs, &a.intervals) {
                (Some(p), _) => verify_exact(&tree, &parse_observation(&read(p)?, tree.m())?, a.trials, a.seed)?,
                (_, Some(p)) => verify_intervals(&tree, &IntervalObservation::from_json(&read(p)?, tree.m())?, a.mode)?,
                _ => return Err(Failure::Input("--obs or --intervals is required".into())),
            };
            let passed = report["passed"].as_bool().unwrap_or(false);
            let outputs = emit(&a.out, &pretty(&report))?;
            if !passed {
                return Err(Failure::Invariant(format!("oracle check failed: {report}")));
            }
            let config = json!({"tree": a.tree.tree, "obs": a.obs, "intervals": a.intervals, "mode": a.mode, "trials": a.trials});
            Ok(("verify".into(), done(config, Some(a.seed), outputs, &a.out)))
        }
        Command::Scfs(a) => {
            let tree = load_tree(&a.tree.tree)?;
            let y = parse_observation(&read(&a.obs)?, tree.m())?;
            let links = scfs(&tree, &binarize(&y, a.threshold)?)?;
            let outputs = emit(&a.out, &pretty(&json!({"links": links})))?;
            let config = json!({"tree": a.tree.tree, "obs": a.obs, "threshold": a.threshold});
            Ok(("scfs".into(), done(config, None, outputs, &a.out)))
        }
    }
}

fn done(config: Value, seed: Option<u64>, outputs: Vec<String>, out: &OutArg) -> Done {
    Done {
        config,
        seed,
        outputs,
        manifest_dir: out.out.clone(),
    }
}

fn verify_exact(tree: &LogicalTree, y: &[f64], samples: usize, seed: u64) -> Outcome<Value> {
    let sol = solve(tree, y)?;
    let mut checks = serde_json::Map::new();
    let mut passed = true;
    if tree.n() <= ENUMERATION_LIMIT {
        let e = sparsest_enumerate(tree, y, tree.m(), RESTRICTED_TOL)?;
        let l0_ok = e.k_star == sol.l0;
        let match_ok = !e.unique || e.solutions[0].x.iter().zip(&sol.x).all(|(a, b)| (a - b).abs() <= 1e-9);
        let claim_ok = !sol.unique_sparsest || e.unique;
        passed &= l0_ok && match_ok && claim_ok;
        checks.insert(
            "enumeration".into(),
            json!({"k_star": e.k_star, "unique": e.unique, "solutions": e.solutions.len(),
                "l0_matches": l0_ok, "unique_solution_matches": match_ok, "unique_claim_holds": claim_ok}),
        );
    }
    let l1_ok = l1_sampling_check(tree, y, &sol.x, samples, seed)?;
    passed &= l1_ok;
    checks.insert("l1_sampling".into(), json!({"samples": samples, "passed": l1_ok}));
    let recv = receiver_solution(tree, y)?;
    checks.insert("receiver_l1".into(), json!(losstree::lossmodel::l1(&recv)));
    Ok(json!({"x": sol.x, "l0": sol.l0, "l1": sol.l1, "checks": checks, "passed": passed}))
}

fn verify_intervals(tree: &LogicalTree, obs: &IntervalObservation, mode: Objective) -> Outcome<Value> {
    if tree.n() > GRID_LIMIT {
        return Err(Failure::Input(format!("grid verification needs n <= {GRID_LIMIT}, tree has {}", tree.n())));
    }
    let sol = upsparse_plus(tree, obs, mode)?;
    let rep = noisy_grid_check(tree, obs, &sol, 9)?;
    Ok(json!({"x": sol.x, "mode": mode, "grid": rep, "passed": rep.passed}))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli) {
        Ok((command, d)) => {
            let manifest = RunManifest {
                command,
                config: d.config,
                seed: d.seed,
                version: env!("CARGO_PKG_VERSION"),
                outputs: d.outputs,
                wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            let text = pretty(&manifest);
            match d.manifest_dir {
                Some(out) => {
                    let mut p = out.into_os_string();
                    p.push(".manifest.json");
                    if let Err(e) = fs::write(&p, text) {
                        eprintln!("error: cannot write manifest: {e}");
                        return ExitCode::from(1);
                    }
                }
                None => eprint!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(2)
        }
    }
}
