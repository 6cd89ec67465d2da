//! Named experiments with built-in pass/fail verdicts.
//!
//! Each preset fixes algorithm, functions, sizes, trial count and budget; sizes,
//! trials, budget and history mode can be overridden for quicker smoke runs.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algorithms::{default_csa_mu, AlgorithmConfig, AlgorithmKind, FailureKind};
use crate::fitness::FitnessKind;
use crate::harness::{
    run_experiment, scaling_checks, summarize, BudgetRule, ExperimentConfig, HarnessError,
    ScalingCheck, ScalingSummary, TrialRecord, Verdict,
};
use crate::history::HistoryMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[serde(rename = "table1-sigcga")]
    Table1SigCga,
    ScgaLeadingones,
    ScgaOnemaxStagnation,
    CsaLeadingones,
    CsaOnemaxFailure,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Table1SigCga,
        Preset::ScgaLeadingones,
        Preset::ScgaOnemaxStagnation,
        Preset::CsaLeadingones,
        Preset::CsaOnemaxFailure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1SigCga => "table1-sigcga",
            Preset::ScgaLeadingones => "scga-leadingones",
            Preset::ScgaOnemaxStagnation => "scga-onemax-stagnation",
            Preset::CsaLeadingones => "csa-leadingones",
            Preset::CsaOnemaxFailure => "csa-onemax-failure",
        }
    }

    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            Preset::Table1SigCga => vec![50, 100, 200, 400],
            Preset::ScgaLeadingones => vec![50, 100],
            Preset::ScgaOnemaxStagnation => vec![200],
            Preset::CsaLeadingones => vec![50],
            Preset::CsaOnemaxFailure => vec![100],
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Preset::CsaLeadingones => 20,
            _ => 30,
        }
    }

    pub fn default_functions(self) -> Vec<FitnessKind> {
        match self {
            Preset::Table1SigCga => vec![
                FitnessKind::OneMax,
                FitnessKind::LeadingOnes,
                FitnessKind::BinVal,
            ],
            Preset::ScgaLeadingones | Preset::CsaLeadingones => vec![FitnessKind::LeadingOnes],
            Preset::ScgaOnemaxStagnation | Preset::CsaOnemaxFailure => vec![FitnessKind::OneMax],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown preset {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// sig-cGA success rate required at every size.
pub const SIGCGA_MIN_SUCCESS: f64 = 29.0 / 30.0;
/// Largest allowed ratio between BinVal and LeadingOnes medians at one size.
pub const BINVAL_LEADINGONES_FACTOR: f64 = 2.0;
pub const SCGA_MIN_SUCCESS: f64 = 0.9;
/// Required growth of the median band-exit time per doubling of `1/ρ`.
pub const STAGNATION_GROWTH: f64 = 2.0;
pub const STAGNATION_INVERSE_RHOS: [f64; 3] = [8.0, 16.0, 32.0];
pub const STAGNATION_BUDGET: u64 = 10_000_000;
pub const CSA_MIN_SUCCESS: f64 = 0.9;
pub const CSA_MIN_FAILURE: f64 = 0.9;
pub const CSA_FAILURE_ITERATIONS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PresetOptions {
    pub sizes: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub budget: Option<BudgetRule>,
    pub functions: Option<Vec<FitnessKind>>,
    pub history_mode: Option<HistoryMode>,
    pub master_seed: u64,
    pub jobs: usize,
    pub record_wallclock: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    fn new(name: String, verdict: Verdict, detail: String) -> Self {
        Self {
            name,
            verdict,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetReport {
    pub preset: Preset,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<ScalingSummary>,
    pub scaling: Vec<ScalingCheck>,
    pub checks: Vec<Check>,
}

impl PresetReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }
}

pub fn run_preset(preset: Preset, opts: &PresetOptions) -> Result<PresetReport, HarnessError> {
    let sizes = opts.sizes.clone().unwrap_or_else(|| preset.default_sizes());
    let functions = opts
        .functions
        .clone()
        .unwrap_or_else(|| preset.default_functions());
    let experiment = |algorithm: AlgorithmConfig, function, sizes: Vec<usize>, budget| {
        let mut cfg = ExperimentConfig::new(algorithm, function, sizes);
        cfg.trials = opts.trials.unwrap_or_else(|| preset.default_trials());
        cfg.master_seed = opts.master_seed;
        cfg.budget = opts.budget.unwrap_or(budget);
        cfg.jobs = opts.jobs.max(1);
        cfg.record_wallclock = opts.record_wallclock;
        run_experiment(&cfg)
    };

    let mut records = Vec::new();
    let mut checks = Vec::new();
    match preset {
        Preset::Table1SigCga => {
            let mut algorithm = AlgorithmConfig::new(AlgorithmKind::SigCga);
            algorithm.history_mode = opts.history_mode;
            for &f in &functions {
                records.extend(experiment(
                    algorithm.clone(),
                    f,
                    sizes.clone(),
                    BudgetRule::PerNLnN(200.0),
                )?);
            }
            let summaries = summarize(&records);
            checks.extend(success_checks(&summaries, SIGCGA_MIN_SUCCESS));
            for c in scaling_checks(&summaries) {
                checks.push(Check::new(
                    format!("scaling {} n={}->{}", c.function, c.n_small, c.n_large),
                    c.verdict,
                    format!(
                        "median ratio {} vs bound {:.3}",
                        fmt_opt(c.ratio.map(|r| format!("{r:.3}"))),
                        c.bound
                    ),
                ));
            }
            if functions.contains(&FitnessKind::BinVal)
                && functions.contains(&FitnessKind::LeadingOnes)
            {
                checks.extend(binval_vs_leadingones(&summaries));
            }
        }
        Preset::ScgaLeadingones => {
            for &f in &functions {
                let algorithm = AlgorithmConfig::new(AlgorithmKind::Scga);
                records.extend(experiment(
                    algorithm,
                    f,
                    sizes.clone(),
                    BudgetRule::Fixed(1_000_000),
                )?);
            }
            checks.extend(success_checks(&summarize(&records), SCGA_MIN_SUCCESS));
        }
        Preset::ScgaOnemaxStagnation => {
            for &f in &functions {
                for &n in &sizes {
                    let mut medians = Vec::new();
                    for inv in STAGNATION_INVERSE_RHOS {
                        let mut algorithm = AlgorithmConfig::new(AlgorithmKind::Scga);
                        algorithm.rho = Some(1.0 / inv);
                        algorithm.a = Some(0.5 / inv);
                        algorithm.d = Some(5.0 / 6.0);
                        algorithm.stop_on_band_exit = Some(true);
                        let rs = experiment(
                            algorithm,
                            f,
                            vec![n],
                            BudgetRule::Fixed(STAGNATION_BUDGET),
                        )?;
                        medians.push((inv, band_exit_median(&rs)));
                        records.extend(rs);
                    }
                    checks.extend(stagnation_checks(f, n, &medians));
                }
            }
        }
        Preset::CsaLeadingones => {
            for &f in &functions {
                let mut algorithm = AlgorithmConfig::new(AlgorithmKind::Csa);
                algorithm.restart = Some(true);
                records.extend(experiment(
                    algorithm,
                    f,
                    sizes.clone(),
                    BudgetRule::Fixed(1_000_000),
                )?);
            }
            checks.extend(success_checks(&summarize(&records), CSA_MIN_SUCCESS));
        }
        Preset::CsaOnemaxFailure => {
            for &f in &functions {
                for &n in &sizes {
                    let mut algorithm = AlgorithmConfig::new(AlgorithmKind::Csa);
                    algorithm.restart = Some(false);
                    let mu = default_csa_mu(n) as u64;
                    let budget = BudgetRule::Fixed(mu * (1 + CSA_FAILURE_ITERATIONS));
                    let rs = experiment(algorithm, f, vec![n], budget)?;
                    checks.push(failure_check(f, n, &rs));
                    records.extend(rs);
                }
            }
        }
    }

    let summaries = summarize(&records);
    let scaling = scaling_checks(&summaries);
    Ok(PresetReport {
        preset,
        records,
        summaries,
        scaling,
        checks,
    })
}

fn fmt_opt(x: Option<String>) -> String {
    x.unwrap_or_else(|| "n/a".into())
}

fn success_checks(summaries: &[ScalingSummary], min_rate: f64) -> Vec<Check> {
    summaries
        .iter()
        .map(|s| {
            Check::new(
                format!("success {} n={}", s.function, s.n),
                Verdict::from_bool(s.success_rate >= min_rate - 1e-12),
                format!(
                    "{}/{} successful (need {:.3}), median evaluations {}",
                    s.successes,
                    s.trials,
                    min_rate,
                    fmt_opt(s.median_evaluations.map(|m| m.to_string()))
                ),
            )
        })
        .collect()
}

fn binval_vs_leadingones(summaries: &[ScalingSummary]) -> Vec<Check> {
    let find = |f, n| summaries.iter().find(|s| s.function == f && s.n == n);
    summaries
        .iter()
        .filter(|s| s.function == FitnessKind::LeadingOnes)
        .map(|lo| {
            let bv = find(FitnessKind::BinVal, lo.n);
            let medians = bv.and_then(|b| Some((b.median_evaluations?, lo.median_evaluations?)));
            let (verdict, detail) = match medians {
                Some((b, l)) if b > 0 && l > 0 => {
                    let r = b as f64 / l as f64;
                    let ok =
                        (1.0 / BINVAL_LEADINGONES_FACTOR..=BINVAL_LEADINGONES_FACTOR).contains(&r);
                    (
                        Verdict::from_bool(ok),
                        format!("binval/leadingones median ratio {r:.3}"),
                    )
                }
                _ => (Verdict::Inconclusive, "a median is missing".to_string()),
            };
            Check::new(format!("binval~leadingones n={}", lo.n), verdict, detail)
        })
        .collect()
}

/// Lower median of the band-exit iteration over all trials, with a flag that is
/// set when the median trial never left the band (a lower bound only).
pub fn band_exit_median(records: &[TrialRecord]) -> Option<(u64, bool)> {
    let mut times: Vec<(u64, bool)> = records
        .iter()
        .map(|r| {
            (
                r.iterations,
                r.failure_kind != Some(FailureKind::LeftBand) && !r.success,
            )
        })
        .collect();
    times.sort_unstable();
    let rank = times.len().div_ceil(2);
    (rank > 0).then(|| times[rank - 1])
}

fn stagnation_checks(
    f: FitnessKind,
    n: usize,
    medians: &[(f64, Option<(u64, bool)>)],
) -> Vec<Check> {
    medians
        .windows(2)
        .map(|w| {
            let (inv_a, a) = w[0];
            let (inv_b, b) = w[1];
            let name = format!("band exit {f} n={n} 1/rho={inv_a}->{inv_b}");
            let (verdict, detail) = match (a, b) {
                (Some((ta, false)), Some((tb, censored_b))) if ta > 0 => {
                    let growth = tb as f64 / ta as f64;
                    let detail = format!(
                        "median iterations {ta} -> {tb}{}, growth {growth:.3} (need {STAGNATION_GROWTH})",
                        if censored_b { " (censored)" } else { "" }
                    );
                    // a censored larger median only understates the growth
                    (Verdict::from_bool(growth >= STAGNATION_GROWTH), detail)
                }
                _ => (Verdict::Inconclusive, "median band exit not observed".to_string()),
            };
            Check::new(name, verdict, detail)
        })
        .collect()
}

fn failure_check(f: FitnessKind, n: usize, records: &[TrialRecord]) -> Check {
    let failed = records.iter().filter(|r| !r.success).count();
    let rate = failed as f64 / records.len() as f64;
    let mut kinds: Vec<String> = Vec::new();
    for kind in [FailureKind::WrongFixation, FailureKind::BudgetExhausted] {
        let c = records
            .iter()
            .filter(|r| r.failure_kind == Some(kind))
            .count();
        kinds.push(format!("{kind}={c}"));
    }
    Check::new(
        format!("failure {f} n={n}"),
        Verdict::from_bool(rate >= CSA_MIN_FAILURE),
        format!(
            "{failed}/{} runs without the optimum ({}; need {CSA_MIN_FAILURE})",
            records.len(),
            kinds.join(", ")
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>(), Ok(p));
            assert_eq!(
                serde_json::to_string(&p).unwrap(),
                format!("\"{}\"", p.name())
            );
        }
        assert!("table2".parse::<Preset>().is_err());
    }

    #[test]
    fn table1_defaults() {
        assert_eq!(
            Preset::Table1SigCga.default_sizes(),
            vec![50, 100, 200, 400]
        );
        assert_eq!(Preset::Table1SigCga.default_functions().len(), 3);
    }

    fn rec(iterations: u64, failure: Option<FailureKind>) -> TrialRecord {
        TrialRecord {
            algorithm: AlgorithmKind::Scga,
            function: FitnessKind::OneMax,
            n: 10,
            params_json: String::new(),
            seed: 0,
            iterations,
            evaluations: 2 * iterations,
            success: failure.is_none(),
            failure_kind: failure,
            wallclock_ms: None,
        }
    }

    #[test]
    fn band_exit_median_flags_censoring() {
        let left = Some(FailureKind::LeftBand);
        let cap = Some(FailureKind::BudgetExhausted);
        assert_eq!(
            band_exit_median(&[rec(5, left), rec(3, left), rec(9, cap)]),
            Some((5, false))
        );
        assert_eq!(
            band_exit_median(&[rec(50, cap), rec(3, left), rec(50, cap)]),
            Some((50, true))
        );
        assert_eq!(band_exit_median(&[]), None);
    }

    #[test]
    fn stagnation_growth_rules() {
        let c = stagnation_checks(
            FitnessKind::OneMax,
            10,
            &[(8.0, Some((3, false))), (16.0, Some((6, false)))],
        );
        assert_eq!(c[0].verdict, Verdict::Pass);
        let c = stagnation_checks(
            FitnessKind::OneMax,
            10,
            &[(8.0, Some((3, false))), (16.0, Some((5, false)))],
        );
        assert_eq!(c[0].verdict, Verdict::Fail);
        let c = stagnation_checks(
            FitnessKind::OneMax,
            10,
            &[(8.0, Some((3, true))), (16.0, Some((9, false)))],
        );
        assert_eq!(c[0].verdict, Verdict::Inconclusive);
    }

    #[test]
    fn small_csa_leadingones_preset() {
        let opts = PresetOptions {
            sizes: Some(vec![12]),
            trials: Some(4),
            ..PresetOptions::default()
        };
        let report = run_preset(Preset::CsaLeadingones, &opts).unwrap();
        assert_eq!(report.records.len(), 4);
        assert_eq!(report.checks.len(), 1);
        assert!(report.passed(), "{:?}", report.checks);
    }
}
