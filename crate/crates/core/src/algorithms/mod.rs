//! The four optimizers as stepwise state machines, plus the shared run loop.
//!
//! Budgets are counted in fitness evaluations. A run stops with success as soon
//! as an optimum has been sampled, and with [`FailureKind::BudgetExhausted`] when
//! the next iteration would exceed the budget.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fitness::{Fitness, FitnessError, FitnessFunction, FitnessKind, Individual};
use crate::history::HistoryMode;
use crate::significance::{SignificanceError, DEFAULT_EPSILON};

pub mod cga;
pub mod csa;
pub mod sampling;
pub mod scga;
pub mod sig_cga;

pub use cga::{cga_update_position, Cga};
pub use csa::{csa_step, Csa, CsaConfig, CsaStep};
pub use sampling::{sample_bit, sample_offspring, select_winner};
pub use scga::{scga_update_position, Scga, ScgaParams};
pub use sig_cga::{SigCga, SigCgaConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgorithmError {
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error(transparent)]
    Significance(#[from] SignificanceError),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("unknown algorithm {0:?} (expected sigcga, scga, cga or csa)")]
    UnknownAlgorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    BudgetExhausted,
    WrongFixation,
    /// scGA stopped at the first frequency leaving `(1 − d, d)`.
    LeftBand,
}

impl FailureKind {
    pub fn name(self) -> &'static str {
        match self {
            FailureKind::BudgetExhausted => "budget_exhausted",
            FailureKind::WrongFixation => "wrong_fixation",
            FailureKind::LeftBand => "left_band",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FailureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "budget_exhausted" => Ok(FailureKind::BudgetExhausted),
            "wrong_fixation" => Ok(FailureKind::WrongFixation),
            "left_band" => Ok(FailureKind::LeftBand),
            _ => Err(format!("unknown failure kind {s:?}")),
        }
    }
}

/// Final model of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum TerminalState {
    Frequencies(Vec<f64>),
    Population(Vec<Individual>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub success: bool,
    pub evaluations: u64,
    pub iterations: u64,
    pub failure: Option<FailureKind>,
    /// The sampled optimum when `success` holds.
    pub best: Option<Individual>,
    pub terminal: TerminalState,
    /// CSA only.
    pub restarts: u64,
    /// scGA only: first iteration after which some frequency lay outside `(1 − d, d)`.
    pub band_exit_iteration: Option<u64>,
}

/// What a single iteration produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Continue,
    /// An optimum was sampled.
    Optimum(Individual),
    /// The run ended without an optimum.
    Halt(FailureKind),
    /// The state is a fixed point; no later iteration can change anything.
    Stalled,
}

/// A stepwise optimizer driven by [`drive`].
pub trait Optimizer {
    fn step<F: Fitness>(&mut self, f: &F) -> Step;

    fn evaluations(&self) -> u64;

    fn iterations(&self) -> u64;

    /// Evaluations the next call to `step` will consume.
    fn next_step_cost(&self) -> u64;

    fn terminal_state(&self) -> TerminalState;

    fn restarts(&self) -> u64 {
        0
    }

    fn band_exit_iteration(&self) -> Option<u64> {
        None
    }
}

/// Runs `opt` on `f` until success, a halt, or the evaluation budget.
pub fn drive<O: Optimizer, F: Fitness>(opt: &mut O, f: &F, max_evals: u64) -> RunResult {
    let finish = |opt: &O, success, failure, best, evaluations, iterations| RunResult {
        success,
        evaluations,
        iterations,
        failure,
        best,
        terminal: opt.terminal_state(),
        restarts: opt.restarts(),
        band_exit_iteration: opt.band_exit_iteration(),
    };
    loop {
        let cost = opt.next_step_cost();
        if opt.evaluations() + cost > max_evals {
            let (e, i) = (opt.evaluations(), opt.iterations());
            return finish(opt, false, Some(FailureKind::BudgetExhausted), None, e, i);
        }
        match opt.step(f) {
            Step::Continue => {}
            Step::Optimum(x) => {
                debug_assert!(f.is_optimum(&x));
                let (e, i) = (opt.evaluations(), opt.iterations());
                return finish(opt, true, None, Some(x), e, i);
            }
            Step::Halt(kind) => {
                let (e, i) = (opt.evaluations(), opt.iterations());
                return finish(opt, false, Some(kind), None, e, i);
            }
            Step::Stalled => {
                // Every remaining iteration would leave the state unchanged.
                let cost = opt.next_step_cost().max(1);
                let extra = (max_evals - opt.evaluations()) / cost;
                let e = opt.evaluations() + extra * cost;
                let i = opt.iterations() + extra;
                return finish(opt, false, Some(FailureKind::BudgetExhausted), None, e, i);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    SigCga,
    Scga,
    Cga,
    Csa,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::SigCga => "sigcga",
            AlgorithmKind::Scga => "scga",
            AlgorithmKind::Cga => "cga",
            AlgorithmKind::Csa => "csa",
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = AlgorithmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sigcga" | "sig-cga" => Ok(AlgorithmKind::SigCga),
            "scga" => Ok(AlgorithmKind::Scga),
            "cga" => Ok(AlgorithmKind::Cga),
            "csa" => Ok(AlgorithmKind::Csa),
            _ => Err(AlgorithmError::UnknownAlgorithm(s.to_string())),
        }
    }
}

/// Parameter overrides; unset fields take per-`n` defaults in [`AlgorithmConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub kind: Option<AlgorithmKind>,
    pub epsilon: Option<f64>,
    pub history_mode: Option<HistoryMode>,
    pub rho: Option<f64>,
    pub a: Option<f64>,
    pub d: Option<f64>,
    pub mu: Option<usize>,
    pub restart: Option<bool>,
    /// scGA: stop at the first frequency leaving `(1 − d, d)`.
    pub stop_on_band_exit: Option<bool>,
}

/// Fully specified algorithm and parameters for one problem size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum ResolvedAlgorithm {
    SigCga(SigCgaConfig),
    Scga {
        #[serde(flatten)]
        params: ScgaParams,
        stop_on_band_exit: bool,
    },
    Cga {
        rho: f64,
    },
    Csa(CsaConfig),
}

/// `⌈8·log2(4n² + n)⌉`, the population size the LeadingOnes guarantee asks for.
pub fn default_csa_mu(n: usize) -> usize {
    let n = n as f64;
    (8.0 * (4.0 * n * n + n).log2()).ceil().max(2.0) as usize
}

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            kind: Some(kind),
            ..Self::default()
        }
    }

    pub fn resolve(&self, n: usize) -> Result<ResolvedAlgorithm, AlgorithmError> {
        let kind = self.kind.unwrap_or(AlgorithmKind::SigCga);
        let resolved = match kind {
            AlgorithmKind::SigCga => ResolvedAlgorithm::SigCga(SigCgaConfig {
                epsilon: self.epsilon.unwrap_or(DEFAULT_EPSILON),
                history_mode: self.history_mode.unwrap_or_default(),
            }),
            AlgorithmKind::Scga => {
                let defaults = ScgaParams::defaults_for(n);
                let rho = self.rho.unwrap_or(defaults.rho);
                let params = ScgaParams {
                    rho,
                    a: self.a.unwrap_or(rho / 2.0),
                    d: self.d.unwrap_or(defaults.d),
                };
                params.validate()?;
                ResolvedAlgorithm::Scga {
                    params,
                    stop_on_band_exit: self.stop_on_band_exit.unwrap_or(false),
                }
            }
            AlgorithmKind::Cga => {
                let rho = self.rho.unwrap_or_else(|| cga::default_rho(n));
                cga::validate_rho(rho)?;
                ResolvedAlgorithm::Cga { rho }
            }
            AlgorithmKind::Csa => {
                let config = CsaConfig {
                    mu: self.mu.unwrap_or_else(|| default_csa_mu(n)),
                    restart: self.restart.unwrap_or(false),
                };
                config.validate()?;
                ResolvedAlgorithm::Csa(config)
            }
        };
        if let ResolvedAlgorithm::SigCga(cfg) = &resolved {
            if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
                return Err(SignificanceError::InvalidEpsilon(cfg.epsilon).into());
            }
        }
        Ok(resolved)
    }
}

impl ResolvedAlgorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            ResolvedAlgorithm::SigCga(_) => AlgorithmKind::SigCga,
            ResolvedAlgorithm::Scga { .. } => AlgorithmKind::Scga,
            ResolvedAlgorithm::Cga { .. } => AlgorithmKind::Cga,
            ResolvedAlgorithm::Csa(_) => AlgorithmKind::Csa,
        }
    }

    /// Parameter snapshot as a JSON object with sorted keys.
    pub fn params_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("parameters serialize");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("algorithm");
        }
        value.to_string()
    }

    /// One run of this algorithm on `kind` at size `n`.
    pub fn run(
        &self,
        kind: FitnessKind,
        n: usize,
        max_evals: u64,
        seed: u64,
    ) -> Result<RunResult, AlgorithmError> {
        let f = FitnessFunction::new(kind, n)?;
        self.run_on(&f, max_evals, seed)
    }

    pub fn run_on<F: Fitness>(
        &self,
        f: &F,
        max_evals: u64,
        seed: u64,
    ) -> Result<RunResult, AlgorithmError> {
        let n = f.dimension();
        Ok(match self {
            ResolvedAlgorithm::SigCga(cfg) => drive(&mut SigCga::new(n, cfg, seed)?, f, max_evals),
            ResolvedAlgorithm::Scga {
                params,
                stop_on_band_exit,
            } => {
                let mut opt = Scga::new(n, *params, seed)?;
                opt.stop_on_band_exit(*stop_on_band_exit);
                drive(&mut opt, f, max_evals)
            }
            ResolvedAlgorithm::Cga { rho } => drive(&mut Cga::new(n, *rho, seed)?, f, max_evals),
            ResolvedAlgorithm::Csa(cfg) => drive(&mut Csa::new(n, *cfg, seed)?, f, max_evals),
        })
    }
}

pub fn run_sig_cga(
    kind: FitnessKind,
    n: usize,
    epsilon: f64,
    max_evals: u64,
    seed: u64,
) -> Result<RunResult, AlgorithmError> {
    ResolvedAlgorithm::SigCga(SigCgaConfig {
        epsilon,
        history_mode: HistoryMode::Exact,
    })
    .run(kind, n, max_evals, seed)
}

pub fn run_scga(
    kind: FitnessKind,
    n: usize,
    params: ScgaParams,
    max_evals: u64,
    seed: u64,
) -> Result<RunResult, AlgorithmError> {
    params.validate()?;
    ResolvedAlgorithm::Scga {
        params,
        stop_on_band_exit: false,
    }
    .run(kind, n, max_evals, seed)
}

pub fn run_csa(
    kind: FitnessKind,
    n: usize,
    mu: usize,
    max_evals: u64,
    seed: u64,
    restart: bool,
) -> Result<RunResult, AlgorithmError> {
    ResolvedAlgorithm::Csa(CsaConfig { mu, restart }).run(kind, n, max_evals, seed)
}
