//! Command-line interface: single runs, sweeps, presets and a quick self-test.
//!
//! Exit codes: 0 success, 1 failed verdict, 2 usage error, 3 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::algorithms::{AlgorithmConfig, AlgorithmKind};
use crate::fitness::FitnessKind;
use crate::harness::{
    run_experiment, scaling_checks, summarize, write_csv, BudgetRule, ExperimentConfig,
    HarnessError, ScalingCheck, ScalingSummary, TrialRecord,
};
use crate::history::HistoryMode;
use crate::presets::{run_preset, Preset, PresetOptions, PresetReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "eda-lab",
    version,
    about = "Run compact-GA style optimizers on benchmark functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run trials of one algorithm on one function at one size.
    Run(RunArgs),
    /// Run trials over several sizes and report scaling.
    Sweep(SweepArgs),
    /// Run a built-in experiment and check its verdicts.
    Preset(PresetArgs),
    /// Quick end-to-end sanity checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct AlgoArgs {
    /// sigcga, scga, cga or csa.
    #[arg(long, default_value = "sigcga")]
    pub algo: AlgorithmKind,
    /// onemax, leadingones or binval.
    #[arg(long, default_value = "onemax")]
    pub function: FitnessKind,
    /// sig-cGA significance factor [default: 13].
    #[arg(long, value_parser = positive_f64)]
    pub epsilon: Option<f64>,
    /// sig-cGA history store: exact or condensed [default: exact].
    #[arg(long)]
    pub history_mode: Option<HistoryMode>,
    /// scGA/cGA step size in (0, 1).
    #[arg(long, value_parser = unit_open_f64)]
    pub rho: Option<f64>,
    /// scGA extra step toward 1/2 [default: rho/2].
    #[arg(long, value_parser = non_negative_f64)]
    pub a: Option<f64>,
    /// scGA commit border in (1/2, 1) [default: 5/6].
    #[arg(long, value_parser = commit_border)]
    pub d: Option<f64>,
    /// CSA population size [default: ceil(8 log2(4n^2 + n))].
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub mu: Option<u64>,
    /// CSA: restart from a fresh population on a non-optimal terminal state.
    #[arg(long)]
    pub restart: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluation budget per trial: a count (1000000, 1e6) or a factor of n ln n (200nlnn).
    #[arg(long)]
    pub budget: Option<BudgetRule>,
    /// Worker threads.
    #[arg(long, env = "EDA_LAB_JOBS", default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a JSON summary here.
    #[arg(long)]
    pub summary_json: Option<PathBuf>,
    /// Record per-trial wall-clock time (makes the CSV non-reproducible).
    #[arg(long)]
    pub wallclock: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Problem size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Trials.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Comma-separated, strictly increasing problem sizes.
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Vec<u64>,
    /// Trials per size.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// table1-sigcga, scga-leadingones, scga-onemax-stagnation, csa-leadingones or csa-onemax-failure.
    pub name: Preset,
    /// Override the preset sizes (comma-separated).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<Vec<u64>>,
    /// Override the functions (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub function: Option<Vec<FitnessKind>>,
    /// Override the trial count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    /// sig-cGA history store for table1-sigcga.
    #[arg(long)]
    pub history_mode: Option<HistoryMode>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|x| {
        if x > 0.0 {
            Ok(x)
        } else {
            Err("must be positive".into())
        }
    })
}

fn non_negative_f64(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|x| {
        if x >= 0.0 {
            Ok(x)
        } else {
            Err("must be non-negative".into())
        }
    })
}

fn unit_open_f64(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|x| {
        if x > 0.0 && x < 1.0 {
            Ok(x)
        } else {
            Err("must lie in (0, 1)".into())
        }
    })
}

fn commit_border(s: &str) -> Result<f64, String> {
    parse_f64(s).and_then(|x| {
        if x > 0.5 && x < 1.0 {
            Ok(x)
        } else {
            Err("must lie in (1/2, 1)".into())
        }
    })
}

/// Parameter flags the chosen algorithm does not take.
fn foreign_flags(a: &AlgoArgs) -> Vec<&'static str> {
    let accepts = |flag: &str| match a.algo {
        AlgorithmKind::SigCga => matches!(flag, "--epsilon" | "--history-mode"),
        AlgorithmKind::Scga => matches!(flag, "--rho" | "--a" | "--d"),
        AlgorithmKind::Cga => flag == "--rho",
        AlgorithmKind::Csa => matches!(flag, "--mu" | "--restart"),
    };
    let given = [
        ("--epsilon", a.epsilon.is_some()),
        ("--history-mode", a.history_mode.is_some()),
        ("--rho", a.rho.is_some()),
        ("--a", a.a.is_some()),
        ("--d", a.d.is_some()),
        ("--mu", a.mu.is_some()),
        ("--restart", a.restart),
    ];
    given
        .into_iter()
        .filter(|&(flag, set)| set && !accepts(flag))
        .map(|(flag, _)| flag)
        .collect()
}

impl AlgoArgs {
    fn to_config(&self) -> Result<AlgorithmConfig, clap::Error> {
        if let Some(flag) = foreign_flags(self).first() {
            return Err(usage_error(
                ErrorKind::ArgumentConflict,
                format!("{flag} cannot be used with --algo {}", self.algo),
            ));
        }
        let mut cfg = AlgorithmConfig::new(self.algo);
        cfg.epsilon = self.epsilon;
        cfg.history_mode = self.history_mode;
        cfg.rho = self.rho;
        cfg.a = self.a;
        cfg.d = self.d;
        cfg.mu = self.mu.map(|m| m as usize);
        cfg.restart = (self.algo == AlgorithmKind::Csa).then_some(self.restart);
        Ok(cfg)
    }
}

fn usage_error(kind: ErrorKind, msg: String) -> clap::Error {
    Cli::command().error(kind, msg)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => {
            experiment_command(&args.algo, vec![args.n], args.trials, &args.output)
        }
        Command::Sweep(args) => experiment_command(&args.algo, args.n, args.trials, &args.output),
        Command::Preset(args) => preset_command(&args),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}

fn experiment_command(
    algo: &AlgoArgs,
    sizes: Vec<u64>,
    trials: u64,
    output: &OutputArgs,
) -> Result<i32, Failure> {
    let algorithm = match algo.to_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return Ok(EXIT_USAGE);
        }
    };
    let mut cfg = ExperimentConfig::new(
        algorithm,
        algo.function,
        sizes.into_iter().map(|n| n as usize).collect(),
    );
    cfg.trials = trials as usize;
    cfg.master_seed = output.seed;
    if let Some(b) = output.budget {
        cfg.budget = b;
    }
    cfg.jobs = output.jobs as usize;
    cfg.record_wallclock = output.wallclock;

    let records = run_experiment(&cfg)?;
    let summaries = summarize(&records);
    let scaling = scaling_checks(&summaries);
    write_records(&records, output.out.as_deref())?;
    print_summaries(&summaries, &scaling);
    if let Some(path) = &output.summary_json {
        let report = serde_json::json!({ "summaries": summaries, "scaling": scaling });
        write_json(path, &report)?;
    }
    Ok(EXIT_OK)
}

fn preset_command(args: &PresetArgs) -> Result<i32, Failure> {
    let opts = PresetOptions {
        sizes: args
            .n
            .as_ref()
            .map(|v| v.iter().map(|&n| n as usize).collect()),
        trials: args.trials.map(|t| t as usize),
        budget: args.output.budget,
        functions: args.function.clone(),
        history_mode: args.history_mode,
        master_seed: args.output.seed,
        jobs: args.output.jobs as usize,
        record_wallclock: args.output.wallclock,
    };
    if args.history_mode.is_some() && args.name != Preset::Table1SigCga {
        let e = usage_error(
            ErrorKind::ArgumentConflict,
            format!("--history-mode cannot be used with preset {}", args.name),
        );
        let _ = e.print();
        return Ok(EXIT_USAGE);
    }
    let report = run_preset(args.name, &opts)?;
    write_records(&report.records, args.output.out.as_deref())?;
    print_report(&report);
    if let Some(path) = &args.output.summary_json {
        write_json(path, &report)?;
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERDICT
    })
}

fn write_records(records: &[TrialRecord], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))?;
            write_csv(records, BufWriter::new(file))?;
        }
        None => write_csv(records, io::stdout().lock())?,
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let file = File::create(path)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(HarnessError::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn print_summaries(summaries: &[ScalingSummary], scaling: &[ScalingCheck]) {
    for s in summaries {
        eprintln!(
            "{} {} n={}: {}/{} successful, median evaluations {}, iqr {}, median/(n ln n) {}",
            s.algorithm,
            s.function,
            s.n,
            s.successes,
            s.trials,
            s.median_evaluations.map_or("n/a".into(), |m| m.to_string()),
            s.iqr().map_or("n/a".into(), |m| m.to_string()),
            s.ratio.map_or("n/a".into(), |r| format!("{r:.2}")),
        );
    }
    for c in scaling {
        eprintln!(
            "scaling {} {} n={}->{}: ratio {} bound {:.3} {}",
            c.algorithm,
            c.function,
            c.n_small,
            c.n_large,
            c.ratio.map_or("n/a".into(), |r| format!("{r:.3}")),
            c.bound,
            c.verdict
        );
    }
}

fn print_report(report: &PresetReport) {
    print_summaries(&report.summaries, &[]);
    for c in &report.checks {
        eprintln!("[{}] {}: {}", c.verdict, c.name, c.detail);
    }
    eprintln!(
        "preset {}: {}",
        report.preset,
        if report.passed() { "pass" } else { "fail" }
    );
}

fn selftest() -> Result<i32, Failure> {
    use crate::algorithms::{run_csa, run_sig_cga};
    use crate::history::{CondensedHistory, ExactHistory};
    use rand::{Rng, SeedableRng};

    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        eprintln!("[{}] {name}", if ok { "pass" } else { "fail" });
        if !ok {
            failures.push(name.to_string());
        }
    };

    let mut rng = rand_pcg::Pcg64Mcg::seed_from_u64(0);
    let mut exact = ExactHistory::new();
    let mut condensed = CondensedHistory::new();
    let mut bits = Vec::new();
    let mut consistent = true;
    for _ in 0..4_096 {
        let b = rng.random::<bool>();
        bits.push(b);
        exact.append(b);
        condensed.append(b);
        let mut len = 1;
        while len <= bits.len() {
            let naive = bits[bits.len() - len..].iter().filter(|&&x| x).count() as u64;
            consistent &= exact.ones_in_suffix(len as u64) == Ok(naive);
            len *= 2;
        }
        consistent &= condensed.structure_ok();
    }
    check("history suffix counts", consistent);

    let solved = (0..10).all(|seed| {
        run_sig_cga(FitnessKind::LeadingOnes, 1, 13.0, 100, seed).is_ok_and(|r| r.success)
    });
    check("sig-cGA on a single bit", solved);

    let csa = (0..5).all(|seed| {
        run_csa(FitnessKind::LeadingOnes, 12, 40, 1_000_000, seed, true).is_ok_and(|r| r.success)
    });
    check("CSA with restarts on LeadingOnes n=12", csa);

    let mut cfg = ExperimentConfig::new(
        AlgorithmConfig::new(AlgorithmKind::Cga),
        FitnessKind::OneMax,
        vec![8, 16],
    );
    cfg.trials = 3;
    cfg.budget = BudgetRule::Fixed(100_000);
    let once = run_experiment(&cfg)?;
    cfg.jobs = 2;
    let twice = run_experiment(&cfg)?;
    check("experiments are reproducible", once == twice);

    Ok(if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERDICT
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("eda-lab").chain(args.iter().copied()))
    }

    #[test]
    fn parses_a_run() {
        let cli = parse(&[
            "run",
            "--algo",
            "sigcga",
            "--function",
            "onemax",
            "--n",
            "100",
            "--seed",
            "7",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else {
            panic!()
        };
        assert_eq!(args.n, 100);
        assert_eq!(args.output.seed, 7);
        assert_eq!(args.algo.algo, AlgorithmKind::SigCga);
        assert!(args.algo.to_config().is_ok());
    }

    #[test]
    fn rejects_bad_values_and_flags() {
        assert!(parse(&["run", "--algo", "sigcga", "--n", "0"]).is_err());
        assert!(parse(&["run", "--n", "10", "--rho", "1.5"]).is_err());
        assert!(parse(&["run", "--n", "10", "--d", "0.4"]).is_err());
        assert!(parse(&["run", "--n", "10", "--mu", "1"]).is_err());
        assert!(parse(&["run", "--n", "10", "--epsilon", "-3"]).is_err());
        assert!(parse(&["run", "--n", "10", "--frobnicate"]).is_err());
        assert!(parse(&["run", "--n", "10", "--algo", "umda"]).is_err());
        assert!(parse(&["preset", "table9"]).is_err());
        assert!(parse(&[]).is_err());
    }

    #[test]
    fn foreign_parameters_are_named() {
        let cli = parse(&["run", "--algo", "csa", "--n", "10", "--epsilon", "13"]).unwrap();
        let Command::Run(args) = cli.command else {
            panic!()
        };
        let err = args.algo.to_config().unwrap_err();
        assert_eq!(err.kind(), ErrorKind::ArgumentConflict);
        assert!(err.to_string().contains("--epsilon"), "{err}");

        let cli = parse(&["run", "--algo", "sigcga", "--n", "10", "--restart"]).unwrap();
        let Command::Run(args) = cli.command else {
            panic!()
        };
        assert!(args
            .algo
            .to_config()
            .unwrap_err()
            .to_string()
            .contains("--restart"));

        let cli = parse(&["run", "--algo", "cga", "--n", "10", "--rho", "0.1"]).unwrap();
        let Command::Run(args) = cli.command else {
            panic!()
        };
        assert!(args.algo.to_config().is_ok());
    }

    #[test]
    fn sweep_and_preset_sizes() {
        let cli = parse(&["sweep", "--n", "50,100,200", "--function", "leadingones"]).unwrap();
        let Command::Sweep(args) = cli.command else {
            panic!()
        };
        assert_eq!(args.n, vec![50, 100, 200]);
        let cli = parse(&["preset", "table1-sigcga", "--n", "10,20", "--trials", "2"]).unwrap();
        let Command::Preset(args) = cli.command else {
            panic!()
        };
        assert_eq!(args.name, Preset::Table1SigCga);
        assert_eq!(args.n, Some(vec![10, 20]));
    }
}
