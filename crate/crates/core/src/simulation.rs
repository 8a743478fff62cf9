//! Probe-level loss simulation, per-path estimates with confidence
//! intervals, error metrics, and the noise experiment driver.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{check_len, Error, Result};
use crate::lossmodel::{addloss, addloss_value, forward, inverse_addloss, TOL};
use crate::noiseless::solve;
use crate::noisy::{upsparse_plus, IntervalObservation, Objective, Upper};
use crate::par::map_range;
use crate::rng::{derive_seed, substream};
use crate::topology::{sample_links, tree_from_spec, LogicalTree};

/// Largest loss probability mapped to a finite addloss value.
pub const PROB_CEILING: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeModel {
    /// Every probe walks its path link by link.
    #[default]
    PerProbe,
    /// Loss counts drawn directly from the binomial path marginal.
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRun {
    pub probes: u64,
    pub losses: Vec<u64>,
    pub p_hat: Vec<f64>,
    /// `addloss(min(p_hat, PROB_CEILING))`.
    pub y_hat: Vec<f64>,
    pub seed: u64,
}

impl ProbeRun {
    fn from_counts(probes: u64, losses: Vec<u64>, seed: u64) -> Self {
        let p_hat: Vec<f64> = losses.iter().map(|&c| c as f64 / probes as f64).collect();
        let y_hat = p_hat.iter().map(|&p| addloss_value(p.min(PROB_CEILING))).collect();
        Self {
            probes,
            losses,
            p_hat,
            y_hat,
            seed,
        }
    }
}

fn check_probabilities(b: &[f64]) -> Result<()> {
    match b.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(k) => Err(Error::OutOfDomain {
            index: k,
            value: b[k],
            domain: "[0, 1]",
        }),
        None => Ok(()),
    }
}

pub fn simulate_probes(tree: &LogicalTree, b: &[f64], probes: u64, seed: u64) -> Result<ProbeRun> {
    simulate_probes_with(tree, b, probes, seed, ProbeModel::PerProbe)
}

/// Sends `probes` probes down every path; each link drops a probe
/// independently with its loss probability. Paths use separate random
/// substreams, so there is no correlation between paths.
pub fn simulate_probes_with(tree: &LogicalTree, b: &[f64], probes: u64, seed: u64, model: ProbeModel) -> Result<ProbeRun> {
    check_len("link loss vector", tree.n(), b.len())?;
    check_probabilities(b)?;
    if probes == 0 {
        return Err(Error::ParameterOutOfRange("at least one probe per path".into()));
    }
    let losses = (1..=tree.m())
        .map(|j| {
            let mut rng = substream(seed, &[j as u64]);
            let path: Vec<f64> = tree.path(j).iter().map(|&k| b[k - 1]).collect();
            match model {
                ProbeModel::PerProbe => (0..probes)
                    .filter(|_| path.iter().any(|&p| rng.random::<f64>() < p))
                    .count() as u64,
                ProbeModel::Binomial => {
                    let pass: f64 = path.iter().map(|p| 1.0 - p).product();
                    Binomial::new(probes, (1.0 - pass).clamp(0.0, 1.0))
                        .expect("probability is clamped")
                        .sample(&mut rng)
                }
            }
        })
        .collect();
    Ok(ProbeRun::from_counts(probes, losses, seed))
}

fn t_quantile(level: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof)
        .expect("positive degrees of freedom")
        .inverse_cdf((1.0 + level) / 2.0)
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("confidence level must be in (0, 1), got {level}")))
    }
}

/// Half-width `t_{(1+level)/2, N-1} * sqrt(p (1 - p) / N)` on the
/// probability scale.
pub fn half_width(p_hat: f64, probes: u64, level: f64) -> Result<f64> {
    check_level(level)?;
    if probes < 2 {
        return Err(Error::ParameterOutOfRange("intervals need at least two probes".into()));
    }
    let n = probes as f64;
    Ok(t_quantile(level, n - 1.0) * (p_hat * (1.0 - p_hat) / n).sqrt())
}

/// Student-t intervals around each `p_hat`, mapped to addloss units.
pub fn confidence_intervals(run: &ProbeRun, level: f64) -> Result<IntervalObservation> {
    let mut lo = Vec::with_capacity(run.p_hat.len());
    let mut hi = Vec::with_capacity(run.p_hat.len());
    for (&p, &count) in run.p_hat.iter().zip(&run.losses) {
        let h = half_width(p, run.probes, level)?;
        let lower = if count == 0 { 0.0 } else { (p - h).clamp(0.0, PROB_CEILING) };
        lo.push(addloss_value(lower));
        hi.push(if count == run.probes {
            Upper::Unbounded
        } else {
            Upper::Finite(addloss_value((p + h).min(PROB_CEILING)))
        });
    }
    IntervalObservation::new(lo, hi)
}

/// Intervals that always contain the true path loss: `[p - w u1, p + w u2]`
/// on the probability scale with `u1, u2` uniform on `[0, 1]`.
pub fn guaranteed_cover_intervals<R: Rng>(p_true: &[f64], width: f64, rng: &mut R) -> Result<IntervalObservation> {
    if !(width >= 0.0) {
        return Err(Error::ParameterOutOfRange(format!("interval width must be non-negative, got {width}")));
    }
    check_probabilities(p_true)?;
    let mut lo = Vec::with_capacity(p_true.len());
    let mut hi = Vec::with_capacity(p_true.len());
    for &p in p_true {
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        lo.push(addloss_value((p - width * u1).max(0.0)));
        hi.push(Upper::Finite(addloss_value((p + width * u2).min(PROB_CEILING))));
    }
    IntervalObservation::new(lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// Common lossy links over true lossy links.
    pub e0: f64,
    /// `||b - b_hat|| / ||b||`.
    pub e2: f64,
    /// `b_true` is all zero: `e2` is `||b_hat||` and `e0` is 1.
    pub degenerate: bool,
}

pub fn metrics(b_true: &[f64], b_hat: &[f64]) -> Result<Metrics> {
    check_len("estimated link losses", b_true.len(), b_hat.len())?;
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|a| a * a).sum::<f64>().sqrt();
    let truth = norm(&mut b_true.iter().copied());
    let diff = norm(&mut b_true.iter().zip(b_hat).map(|(a, b)| a - b));
    let lossy = b_true.iter().filter(|&&v| v > TOL).count();
    let common = b_true.iter().zip(b_hat).filter(|(&a, &b)| a > TOL && b > TOL).count();
    if lossy == 0 {
        return Ok(Metrics {
            e0: 1.0,
            e2: norm(&mut b_hat.iter().copied()),
            degenerate: true,
        });
    }
    Ok(Metrics {
        e0: common as f64 / lossy as f64,
        e2: diff / truth,
        degenerate: false,
    })
}

/// Probes per path; `Exact` skips simulation and uses the true observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeBudget {
    Finite(u64),
    Exact,
}

impl fmt::Display for ProbeBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbeBudget::Finite(n) => write!(f, "{n}"),
            ProbeBudget::Exact => f.write_str("inf"),
        }
    }
}

impl FromStr for ProbeBudget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            return Ok(ProbeBudget::Exact);
        }
        s.parse::<u64>()
            .ok()
            .filter(|&n| n > 0)
            .map(ProbeBudget::Finite)
            .ok_or_else(|| Error::ConfigInvalid(format!("probe budget `{s}` is not a positive integer or \"inf\"")))
    }
}

impl Serialize for ProbeBudget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ProbeBudget::Finite(n) => s.serialize_u64(*n),
            ProbeBudget::Exact => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ProbeBudget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(ProbeBudget::Finite(n)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Which solver turns the measurements into a loss estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// UpSparse on the point estimate.
    Upsparse,
    MinL0,
    MinL1,
    #[serde(rename = "min-l1-among-l0")]
    MinL1AmongMinL0,
}

impl SolverMode {
    pub fn objective(self) -> Option<Objective> {
        match self {
            SolverMode::Upsparse => None,
            SolverMode::MinL0 => Some(Objective::MinL0),
            SolverMode::MinL1 => Some(Objective::MinL1),
            SolverMode::MinL1AmongMinL0 => Some(Objective::MinL1AmongMinL0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self.objective() {
            None => "upsparse",
            Some(o) => o.as_str(),
        }
    }
}

impl FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "upsparse" {
            return Ok(SolverMode::Upsparse);
        }
        Ok(match s.parse::<Objective>()? {
            Objective::MinL0 => SolverMode::MinL0,
            Objective::MinL1 => SolverMode::MinL1,
            Objective::MinL1AmongMinL0 => SolverMode::MinL1AmongMinL0,
        })
    }
}

/// Where interval observations come from in the interval modes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntervalSource {
    /// Student-t intervals from the simulated probes.
    #[default]
    Confidence,
    /// Random intervals of the given probability width around the true
    /// path loss; no probes are simulated.
    Cover { width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Topology shorthand, e.g. `ternary:13`.
    pub tree: String,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    /// Per-link loss probability range.
    pub loss_range: [f64; 2],
    pub probes: Vec<ProbeBudget>,
    pub repetitions: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub mode: SolverMode,
    #[serde(default)]
    pub intervals: IntervalSource,
    #[serde(default)]
    pub probe_model: ProbeModel,
    pub seed: u64,
}

fn default_level() -> f64 {
    0.9
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn validate(&self, tree: &LogicalTree) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        let [lo, hi] = self.loss_range;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return bad(format!("loss range [{lo}, {hi}] must satisfy 0 < lo <= hi < 1"));
        }
        if self.k.is_empty() || self.probes.is_empty() {
            return bad("K and probes must be non-empty".into());
        }
        if let Some(&k) = self.k.iter().find(|&&k| k > tree.n()) {
            return bad(format!("K = {k} exceeds the {} links of the tree", tree.n()));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("confidence level {} outside (0, 1)", self.level));
        }
        if let IntervalSource::Cover { width } = self.intervals {
            if !(width >= 0.0) {
                return bad(format!("cover width {width} must be non-negative"));
            }
        }
        if self.mode.objective().is_some() && self.intervals == IntervalSource::Confidence {
            if let Some(ProbeBudget::Finite(n)) = self.probes.iter().find(|p| matches!(p, ProbeBudget::Finite(n) if *n < 2)) {
                return bad(format!("confidence intervals need at least two probes, got {n}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub probes: ProbeBudget,
    pub mode: &'static str,
    pub reps: usize,
    pub e0_mean: f64,
    pub e0_se: f64,
    pub e2_mean: f64,
    pub e2_se: f64,
    pub seed: u64,
}

pub const EXPERIMENT_CSV_HEADER: &str = "K,N,mode,reps,e0_mean,e0_se,e2_mean,e2_se,seed";

impl ExperimentRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            self.k, self.probes, self.mode, self.reps, self.e0_mean, self.e0_se, self.e2_mean, self.e2_se, self.seed
        )
    }
}

pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(EXPERIMENT_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Ground truth of one repetition: depends on `(seed, K, rep)` only, so
/// every probe budget and interval width sees the same loss vector.
pub fn draw_truth(tree: &LogicalTree, k: usize, range: [f64; 2], seed: u64, rep: usize) -> Vec<f64> {
    let mut rng = substream(seed, &[0x7275, k as u64, rep as u64]);
    let mut b = vec![0.0; tree.n()];
    for link in sample_links(&mut rng, tree.n(), k) {
        b[link - 1] = rng.random_range(range[0]..=range[1]);
    }
    b
}

/// One repetition: measure, solve, invert addloss, score.
pub fn run_trial(tree: &LogicalTree, cfg: &ExperimentConfig, k: usize, budget: ProbeBudget, rep: usize) -> Result<Metrics> {
    let b = draw_truth(tree, k, cfg.loss_range, cfg.seed, rep);
    let x_true = addloss(&b)?;
    let y_true = forward(tree, &x_true)?;
    let p_true: Vec<f64> = y_true.iter().map(|&v| -(-v).exp_m1()).collect();
    let run = match budget {
        ProbeBudget::Exact => None,
        ProbeBudget::Finite(n) => {
            let s = derive_seed(cfg.seed, &[0x7072, k as u64, n, rep as u64]);
            Some(simulate_probes_with(tree, &b, n, s, cfg.probe_model)?)
        }
    };
    let x_hat = match cfg.mode.objective() {
        None => {
            let y = run.as_ref().map_or(&y_true, |r| &r.y_hat);
            solve(tree, y)?.x
        }
        Some(obj) => {
            let obs = match (cfg.intervals, &run) {
                (IntervalSource::Cover { width }, _) => {
                    let mut rng = substream(cfg.seed, &[0x6376, k as u64, rep as u64]);
                    guaranteed_cover_intervals(&p_true, width, &mut rng)?
                }
                (IntervalSource::Confidence, Some(r)) => confidence_intervals(r, cfg.level)?,
                (IntervalSource::Confidence, None) => IntervalObservation::exact(&y_true)?,
            };
            upsparse_plus(tree, &obs, obj)?.x
        }
    };
    metrics(&b, &inverse_addloss(&x_hat)?)
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and standard error of `e0` and `e2` for every `(K, N)` pair, in
/// configuration order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let tree = tree_from_spec(&cfg.tree).map_err(|e| Error::ConfigInvalid(format!("tree `{}`: {e}", cfg.tree)))?;
    run_experiment_on(&tree, cfg)
}

pub fn run_experiment_on(tree: &LogicalTree, cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    cfg.validate(tree)?;
    let mut rows = Vec::new();
    for &k in &cfg.k {
        for &budget in &cfg.probes {
            let trials = map_range(cfg.repetitions, |rep| run_trial(tree, cfg, k, budget, rep));
            let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
            let e0: Vec<f64> = trials.iter().map(|t| t.e0).collect();
            let e2: Vec<f64> = trials.iter().map(|t| t.e2).collect();
            let (e0_mean, e0_se) = mean_se(&e0);
            let (e2_mean, e2_se) = mean_se(&e2);
            rows.push(ExperimentRow {
                k,
                probes: budget,
                mode: cfg.mode.as_str(),
                reps: cfg.repetitions,
                e0_mean,
                e0_se,
                e2_mean,
                e2_se,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}
