//! Multi-trial experiments: seeding, parallel execution, aggregation, scaling
//! checks and CSV output.
//!
//! Trial seeds are hashed from `(master seed, n, trial index)`, so adding sizes
//! or trials never changes the runs that were already there, and the worker count
//! only affects speed.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algorithms::{AlgorithmConfig, AlgorithmError, AlgorithmKind, FailureKind};
use crate::fitness::{FitnessError, FitnessFunction, FitnessKind};
use crate::rng::{derive_seed, Role};

/// Multiplicative slack on the `n ln n` growth bound in [`check_scaling`].
pub const SCALING_SLACK: f64 = 1.25;

/// Minimum success rate at both sizes for [`check_scaling`] to decide.
pub const MIN_SUCCESS_RATE: f64 = 0.9;

pub const CSV_HEADER: [&str; 10] = [
    "algorithm",
    "function",
    "n",
    "params_json",
    "seed",
    "iterations",
    "evaluations",
    "success",
    "failure_kind",
    "wallclock_ms",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn is_io(&self) -> bool {
        match self {
            HarnessError::Io(_) | HarnessError::Json(_) => true,
            HarnessError::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}

/// Per-trial evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetRule {
    Fixed(u64),
    /// `⌈c·n·ln n⌉`, at least 2.
    PerNLnN(f64),
}

impl BudgetRule {
    pub fn for_size(&self, n: usize) -> u64 {
        match *self {
            BudgetRule::Fixed(b) => b,
            BudgetRule::PerNLnN(c) => {
                let n = n as f64;
                ((c * n * n.ln()).ceil() as u64).max(2)
            }
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        match *self {
            BudgetRule::Fixed(b) if b < 2 => Err(HarnessError::InvalidConfig(format!(
                "budget must be at least 2 evaluations, got {b}"
            ))),
            BudgetRule::PerNLnN(c) if !(c > 0.0 && c.is_finite()) => Err(
                HarnessError::InvalidConfig(format!("budget factor must be positive, got {c}")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BudgetRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BudgetRule::Fixed(b) => write!(f, "{b}"),
            BudgetRule::PerNLnN(c) => write!(f, "{c}nlnn"),
        }
    }
}

/// Accepts a plain count (`1000000`, `1e6`) or a factor of `n ln n` (`200nlnn`).
impl FromStr for BudgetRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(factor) = s.strip_suffix("nlnn") {
            let c: f64 = factor
                .trim_end_matches('*')
                .parse()
                .map_err(|_| format!("invalid budget factor in {s:?}"))?;
            return Ok(BudgetRule::PerNLnN(c));
        }
        if let Ok(b) = s.parse::<u64>() {
            return Ok(BudgetRule::Fixed(b));
        }
        match s.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 => {
                Ok(BudgetRule::Fixed(x as u64))
            }
            _ => Err(format!(
                "invalid budget {s:?} (expected an evaluation count or e.g. 200nlnn)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmConfig,
    pub function: FitnessKind,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub budget: BudgetRule,
    /// Worker threads; 1 runs everything on the calling thread.
    pub jobs: usize,
    /// Fill the `wallclock_ms` column. Off by default since timings make the
    /// output differ between otherwise identical runs.
    pub record_wallclock: bool,
}

impl ExperimentConfig {
    pub fn new(algorithm: AlgorithmConfig, function: FitnessKind, sizes: Vec<usize>) -> Self {
        Self {
            algorithm,
            function,
            sizes,
            trials: 1,
            master_seed: 0,
            budget: BudgetRule::PerNLnN(200.0),
            jobs: 1,
            record_wallclock: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sizes.is_empty() {
            return bad("at least one size is required".into());
        }
        if self.sizes[0] == 0 {
            return bad("sizes must be at least 1".into());
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "sizes must be strictly increasing, got {:?}",
                self.sizes
            ));
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        self.budget.validate()?;
        for &n in &self.sizes {
            self.algorithm.resolve(n)?;
        }
        Ok(())
    }

    pub fn algorithm_kind(&self) -> AlgorithmKind {
        self.algorithm.kind.unwrap_or(AlgorithmKind::SigCga)
    }
}

/// Seed of trial `trial` at size `n`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    derive_seed(master, &[Role::Trial as u64, n as u64, trial as u64])
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: AlgorithmKind,
    pub function: FitnessKind,
    pub n: usize,
    pub params_json: String,
    pub seed: u64,
    pub iterations: u64,
    pub evaluations: u64,
    pub success: bool,
    pub failure_kind: Option<FailureKind>,
    pub wallclock_ms: Option<u64>,
}

/// Runs `trials × sizes` independent trials. Records come back ordered by size,
/// then trial index, whatever the worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>, HarnessError> {
    cfg.validate()?;
    let mut tasks = Vec::with_capacity(cfg.sizes.len() * cfg.trials);
    for &n in &cfg.sizes {
        let resolved = cfg.algorithm.resolve(n)?;
        let f = FitnessFunction::new(cfg.function, n)?;
        let budget = cfg.budget.for_size(n);
        for trial in 0..cfg.trials {
            tasks.push((
                resolved.clone(),
                f,
                budget,
                trial_seed(cfg.master_seed, n, trial),
            ));
        }
    }
    log::info!(
        "{} on {}: {} trials over sizes {:?}",
        cfg.algorithm_kind(),
        cfg.function,
        tasks.len(),
        cfg.sizes
    );

    let run_one = |(alg, f, budget, seed): &(_, FitnessFunction, u64, u64)| {
        let start = Instant::now();
        let r = crate::algorithms::ResolvedAlgorithm::run_on(alg, f, *budget, *seed)?;
        let elapsed = start.elapsed().as_millis() as u64;
        log::debug!(
            "n={} seed={seed}: success={} evaluations={}",
            f.n,
            r.success,
            r.evaluations
        );
        Ok(TrialRecord {
            algorithm: alg.kind(),
            function: f.kind,
            n: f.n,
            params_json: alg.params_json(),
            seed: *seed,
            iterations: r.iterations,
            evaluations: r.evaluations,
            success: r.success,
            failure_kind: r.failure,
            wallclock_ms: cfg.record_wallclock.then_some(elapsed),
        })
    };

    if cfg.jobs == 1 {
        return tasks.iter().map(run_one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| HarnessError::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| tasks.par_iter().map(run_one).collect())
}

/// Element at nearest rank `⌈p·len⌉` (1-based) of a sorted slice; `p = 1/2`
/// gives the lower median.
pub fn nearest_rank(sorted: &[u64], p: f64) -> Option<u64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

pub fn lower_median(values: &[u64]) -> Option<u64> {
    let mut v = values.to_vec();
    v.sort_unstable();
    nearest_rank(&v, 0.5)
}

/// Aggregate over all records sharing algorithm, function, size and parameters.
/// Run-time statistics cover successful trials only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub algorithm: AlgorithmKind,
    pub function: FitnessKind,
    pub n: usize,
    pub params_json: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_evaluations: Option<u64>,
    pub q1_evaluations: Option<u64>,
    pub q3_evaluations: Option<u64>,
    /// `median / (n ln n)`; absent for `n = 1`.
    pub ratio: Option<f64>,
}

impl ScalingSummary {
    pub fn iqr(&self) -> Option<u64> {
        Some(self.q3_evaluations? - self.q1_evaluations?)
    }

    fn same_series(&self, other: &ScalingSummary) -> bool {
        self.algorithm == other.algorithm && self.function == other.function
    }
}

/// Groups in order of first appearance.
pub fn summarize(records: &[TrialRecord]) -> Vec<ScalingSummary> {
    let mut groups: Vec<(&TrialRecord, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        let key = |g: &TrialRecord| {
            g.algorithm == r.algorithm
                && g.function == r.function
                && g.n == r.n
                && g.params_json == r.params_json
        };
        match groups.iter_mut().find(|(head, _)| key(head)) {
            Some((_, members)) => members.push(r),
            None => groups.push((r, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(head, members)| {
            let mut evals: Vec<u64> = members
                .iter()
                .filter(|r| r.success)
                .map(|r| r.evaluations)
                .collect();
            evals.sort_unstable();
            let median = nearest_rank(&evals, 0.5);
            let n = head.n as f64;
            ScalingSummary {
                algorithm: head.algorithm,
                function: head.function,
                n: head.n,
                params_json: head.params_json.clone(),
                trials: members.len(),
                successes: evals.len(),
                success_rate: evals.len() as f64 / members.len() as f64,
                median_evaluations: median,
                q1_evaluations: nearest_rank(&evals, 0.25),
                q3_evaluations: nearest_rank(&evals, 0.75),
                ratio: median
                    .filter(|_| head.n > 1)
                    .map(|m| m as f64 / (n * n.ln())),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub algorithm: AlgorithmKind,
    pub function: FitnessKind,
    pub n_small: usize,
    pub n_large: usize,
    /// `median(n_large) / median(n_small)` when both medians exist.
    pub ratio: Option<f64>,
    /// `(n_large ln n_large) / (n_small ln n_small) × slack`.
    pub bound: f64,
    pub verdict: Verdict,
}

/// Compares the median growth between two sizes with `n ln n` growth.
pub fn check_scaling(small: &ScalingSummary, large: &ScalingSummary) -> ScalingCheck {
    let nlnn = |n: usize| n as f64 * (n as f64).ln();
    let bound = nlnn(large.n) / nlnn(small.n) * SCALING_SLACK;
    let ratio = match (small.median_evaluations, large.median_evaluations) {
        (Some(a), Some(b)) if a > 0 => Some(b as f64 / a as f64),
        _ => None,
    };
    let enough = small.success_rate >= MIN_SUCCESS_RATE && large.success_rate >= MIN_SUCCESS_RATE;
    let verdict = match ratio {
        Some(r) if enough && small.n >= 2 => Verdict::from_bool(r <= bound),
        _ => Verdict::Inconclusive,
    };
    ScalingCheck {
        algorithm: small.algorithm,
        function: small.function,
        n_small: small.n,
        n_large: large.n,
        ratio,
        bound,
        verdict,
    }
}

/// Checks every pair of consecutive sizes within each algorithm/function series.
/// Parameters may differ between sizes (defaults often depend on `n`); when one
/// size holds several parameter sets, only equal sets are paired.
pub fn scaling_checks(summaries: &[ScalingSummary]) -> Vec<ScalingCheck> {
    let mut out = Vec::new();
    for (i, s) in summaries.iter().enumerate() {
        let later = || {
            summaries[i + 1..]
                .iter()
                .filter(|t| t.same_series(s) && t.n > s.n)
        };
        let Some(n_next) = later().map(|t| t.n).min() else {
            continue;
        };
        let at_next: Vec<&ScalingSummary> = later().filter(|t| t.n == n_next).collect();
        let peers = summaries
            .iter()
            .filter(|t| t.same_series(s) && t.n == s.n)
            .count();
        let partner = if at_next.len() == 1 && peers == 1 {
            Some(at_next[0])
        } else {
            at_next.into_iter().find(|t| t.params_json == s.params_json)
        };
        if let Some(t) = partner {
            out.push(check_scaling(s, t));
        }
    }
    out
}

pub fn write_csv<W: Write>(records: &[TrialRecord], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<(), HarnessError> {
    write_csv(records, BufWriter::new(File::create(path)?))
}

pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut r = csv::ReaderBuilder::new().from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::InvalidConfig(format!(
            "unexpected csv header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    parse_csv(File::open(path)?)
}
