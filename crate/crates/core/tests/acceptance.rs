//! Acceptance suite. Runs every criterion at its full size, prints one line per
//! criterion and exits non-zero if any of them fails.

use std::process::ExitCode;
use std::time::Instant;

use eda_lab::algorithms::{Optimizer, SigCga, SigCgaConfig};
use eda_lab::fitness::Permuted;
use eda_lab::harness::{write_csv, Verdict};
use eda_lab::history::CondensedHistory;
use eda_lab::presets::{run_preset, Check, Preset, PresetOptions, PresetReport};
use eda_lab::significance::{sig, Level, SignificanceParams, Verdict as SigVerdict};
use eda_lab::{FitnessFunction, FitnessKind, History, HistoryMode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

const MASTER_SEED: u64 = 0;

const FALSE_SIG_N: usize = 100;
const FALSE_SIG_EPSILON: f64 = 13.0;
const FALSE_SIG_LENGTH: usize = 100_000;
const FALSE_SIG_REPETITIONS: u64 = 100;

const ORACLE_STREAMS: u64 = 1_000;
const ORACLE_MAX_LENGTH: usize = 10_000;

const EQUIVARIANCE_N: usize = 20;
const EQUIVARIANCE_PERMUTATIONS: u64 = 10;
const EQUIVARIANCE_ITERATIONS: u64 = 1_000;
/// Small enough that frequencies actually move within the horizon.
const EQUIVARIANCE_EPSILON: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn options() -> PresetOptions {
    PresetOptions {
        master_seed: MASTER_SEED,
        jobs: 1,
        ..PresetOptions::default()
    }
}

fn from_checks<'a>(checks: impl IntoIterator<Item = &'a Check>) -> Outcome {
    let checks: Vec<&Check> = checks.into_iter().collect();
    let pass = !checks.is_empty() && checks.iter().all(|c| c.verdict == Verdict::Pass);
    let detail = checks
        .iter()
        .map(|c| format!("[{}] {}: {}", c.verdict, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("\n      ");
    outcome(pass, detail)
}

fn function_checks(report: &PresetReport, f: FitnessKind) -> Outcome {
    let tag = format!(" {} n=", f.name());
    from_checks(report.checks.iter().filter(|c| c.name.contains(&tag)))
}

fn table1(history_mode: HistoryMode, functions: Vec<FitnessKind>) -> PresetReport {
    let opts = PresetOptions {
        sizes: Some(vec![50, 100, 200]),
        functions: Some(functions),
        history_mode: Some(history_mode),
        ..options()
    };
    run_preset(Preset::Table1SigCga, &opts).expect("table1 preset runs")
}

fn false_significance() -> Outcome {
    let params = SignificanceParams::new(FALSE_SIG_EPSILON, FALSE_SIG_N).unwrap();
    let mut detail = Vec::new();
    let mut total = 0;
    for level in [Level::Half, Level::Low, Level::High] {
        let tau = level.value(FALSE_SIG_N);
        let mut fired = 0u64;
        for rep in 0..FALSE_SIG_REPETITIONS {
            let mut rng = Pcg64Mcg::seed_from_u64(rep ^ ((level as u64) << 32));
            let mut history = History::new(HistoryMode::Exact);
            for _ in 0..FALSE_SIG_LENGTH {
                history.append(rng.random::<f64>() < tau);
                if sig(level, &history, &params).verdict != SigVerdict::Stay {
                    fired += 1;
                    history.reset();
                }
            }
        }
        total += fired;
        detail.push(format!("tau={tau}: {fired} non-stay verdicts"));
    }
    outcome(total == 0, detail.join(", "))
}

fn condensed_oracle() -> Outcome {
    let mut queries = 0u64;
    let mut failures = Vec::new();
    for stream in 0..ORACLE_STREAMS {
        let mut rng = Pcg64Mcg::seed_from_u64(0xC0DE ^ stream);
        let length = rng.random_range(1..=ORACLE_MAX_LENGTH);
        let p: f64 = rng.random();
        let mut h = CondensedHistory::new();
        // prefix[t] = ones among the first t bits
        let mut prefix = vec![0u64];
        for t in 1..=length {
            let bit = rng.random::<f64>() < p;
            h.append(bit);
            prefix.push(prefix[t - 1] + bit as u64);
            if !h.structure_ok() || h.len() != t as u64 {
                failures.push(format!("stream {stream}: structure broken after {t} bits"));
                break;
            }
            let mut len = 1u64;
            while len <= t as u64 {
                queries += 1;
                let ok = match h.ones_in_block_suffix(len) {
                    Ok((eff, ones)) => {
                        eff >= len
                            && eff < 2 * len
                            && eff <= t as u64
                            && ones == prefix[t] - prefix[t - eff as usize]
                    }
                    Err(_) => false,
                };
                if !ok {
                    failures.push(format!(
                        "stream {stream}: suffix {len} wrong after {t} bits"
                    ));
                    break;
                }
                len *= 2;
            }
            if !failures.is_empty() {
                break;
            }
        }
        if !failures.is_empty() {
            break;
        }
    }
    match failures.first() {
        None => outcome(
            true,
            format!("{ORACLE_STREAMS} streams, {queries} suffix queries matched"),
        ),
        Some(f) => outcome(false, f.clone()),
    }
}

fn equivariance() -> Outcome {
    let mut mismatches = Vec::new();
    let mut moved = 0usize;
    for k in 0..EQUIVARIANCE_PERMUTATIONS {
        let mut rng = Pcg64Mcg::seed_from_u64(0xBEEF + k);
        let mut map: Vec<usize> = (0..EQUIVARIANCE_N).collect();
        map.shuffle(&mut rng);
        let kind = if k % 2 == 0 {
            FitnessKind::LeadingOnes
        } else {
            FitnessKind::BinVal
        };
        let mode = if k < EQUIVARIANCE_PERMUTATIONS / 2 {
            HistoryMode::Exact
        } else {
            HistoryMode::Condensed
        };
        let cfg = SigCgaConfig {
            epsilon: EQUIVARIANCE_EPSILON,
            history_mode: mode,
        };
        let f = FitnessFunction::new(kind, EQUIVARIANCE_N).unwrap();
        let g = Permuted::new(f, &map);
        let seed = 1000 + k;
        let mut plain = SigCga::new(EQUIVARIANCE_N, &cfg, seed).unwrap();
        let mut permuted = SigCga::with_position_map(&cfg, seed, &map).unwrap();
        for t in 0..EQUIVARIANCE_ITERATIONS {
            plain.step(&f);
            permuted.step(&g);
            let a = plain.frequencies();
            let b = permuted.frequencies();
            if (0..EQUIVARIANCE_N).any(|j| b[j].to_bits() != a[map[j]].to_bits()) {
                mismatches.push(format!("permutation {k} diverged at iteration {t}"));
                break;
            }
        }
        moved += plain.frequencies().iter().filter(|&&x| x != 0.5).count();
    }
    match mismatches.first() {
        None => outcome(
            moved > 0,
            format!(
                "{EQUIVARIANCE_PERMUTATIONS} permutations matched bit-exactly; {moved} final frequencies away from 1/2"
            ),
        ),
        Some(m) => outcome(false, m.clone()),
    }
}

fn csv_bytes(report: &PresetReport) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(&report.records, &mut out).unwrap();
    out
}

fn determinism() -> Outcome {
    let cases: [(Preset, PresetOptions); 5] = [
        (
            Preset::Table1SigCga,
            PresetOptions {
                sizes: Some(vec![16, 32]),
                trials: Some(5),
                ..options()
            },
        ),
        (
            Preset::ScgaLeadingones,
            PresetOptions {
                sizes: Some(vec![30]),
                trials: Some(6),
                ..options()
            },
        ),
        (Preset::ScgaOnemaxStagnation, options()),
        (Preset::CsaLeadingones, options()),
        (
            Preset::CsaOnemaxFailure,
            PresetOptions {
                sizes: Some(vec![40]),
                trials: Some(6),
                ..options()
            },
        ),
    ];
    let mut detail = Vec::new();
    let mut pass = true;
    for (preset, opts) in cases {
        let reference = csv_bytes(&run_preset(preset, &opts).unwrap());
        let same = [1usize, 2, 4].into_iter().all(|jobs| {
            let again = run_preset(
                preset,
                &PresetOptions {
                    jobs,
                    ..opts.clone()
                },
            )
            .unwrap();
            csv_bytes(&again) == reference
        });
        pass &= same;
        detail.push(format!(
            "{preset}: {}",
            if same { "identical" } else { "differs" }
        ));
    }
    outcome(pass, detail.join(", "))
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut record = |id, name, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {} {name} ({secs:.1}s)\n      {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o, secs));
    };

    let all = vec![
        FitnessKind::OneMax,
        FitnessKind::LeadingOnes,
        FitnessKind::BinVal,
    ];
    let exact = table1(HistoryMode::Exact, all);
    record(
        1,
        "sig-cGA LeadingOnes success and n ln n scaling",
        &mut || function_checks(&exact, FitnessKind::LeadingOnes),
    );
    record(2, "sig-cGA OneMax success and n ln n scaling", &mut || {
        function_checks(&exact, FitnessKind::OneMax)
    });
    record(
        3,
        "sig-cGA BinVal success, scaling, and agreement with LeadingOnes",
        &mut || {
            let mut o = function_checks(&exact, FitnessKind::BinVal);
            let agree = from_checks(
                exact
                    .checks
                    .iter()
                    .filter(|c| c.name.starts_with("binval~")),
            );
            o.pass &= agree.pass;
            o.detail = format!("{}\n      {}", o.detail, agree.detail);
            o
        },
    );
    record(
        4,
        "no false significance on unbiased streams",
        &mut false_significance,
    );
    record(
        5,
        "condensed history matches a naive recount",
        &mut condensed_oracle,
    );
    record(6, "condensed-mode sig-cGA LeadingOnes scaling", &mut || {
        let report = table1(HistoryMode::Condensed, vec![FitnessKind::LeadingOnes]);
        function_checks(&report, FitnessKind::LeadingOnes)
    });
    record(7, "scGA LeadingOnes success", &mut || {
        from_checks(
            &run_preset(Preset::ScgaLeadingones, &options())
                .unwrap()
                .checks,
        )
    });
    record(8, "scGA OneMax band-exit time growth", &mut || {
        from_checks(
            &run_preset(Preset::ScgaOnemaxStagnation, &options())
                .unwrap()
                .checks,
        )
    });
    record(9, "CSA OneMax failure without restarts", &mut || {
        from_checks(
            &run_preset(Preset::CsaOnemaxFailure, &options())
                .unwrap()
                .checks,
        )
    });
    record(10, "CSA LeadingOnes success with restarts", &mut || {
        from_checks(
            &run_preset(Preset::CsaLeadingones, &options())
                .unwrap()
                .checks,
        )
    });
    record(11, "position relabelling equivariance", &mut equivariance);
    record(
        12,
        "byte-identical CSV across runs and worker counts",
        &mut determinism,
    );

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {failed:?}")
        }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
