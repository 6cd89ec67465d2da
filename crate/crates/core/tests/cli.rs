use std::path::Path;
use std::process::{Command, Output};

use eda_lab::harness::read_csv;

fn eda_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eda-lab"))
        .args(args)
        .env_remove("EDA_LAB_JOBS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn run_writes_csv_to_stdout() {
    let out = eda_lab(&[
        "run",
        "--algo",
        "sigcga",
        "--function",
        "onemax",
        "--n",
        "100",
        "--seed",
        "7",
        "--budget",
        "2000",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("algorithm,function,n,params_json,seed"));
    assert!(lines[1].starts_with("sigcga,onemax,100,"));
    assert!(
        lines[1].ends_with(",2000,false,budget_exhausted,"),
        "{}",
        lines[1]
    );
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["run", "--algo", "sigcga", "--n", "0"],
        vec!["run", "--algo", "csa", "--n", "10", "--epsilon", "13"],
        vec!["run", "--n", "10", "--unknown-flag"],
        vec!["run", "--n", "10", "--budget", "1"],
        vec!["sweep", "--n", "20,10"],
        vec!["preset", "no-such-preset"],
        vec!["preset", "csa-leadingones", "--history-mode", "exact"],
    ] {
        let out = eda_lab(&args);
        assert_eq!(
            code(&out),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = eda_lab(&["run", "--algo", "csa", "--n", "10", "--epsilon", "13"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--epsilon"));
}

#[test]
fn unwritable_output_exits_3() {
    let out = eda_lab(&["run", "--n", "4", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let json = dir.path().join("summary.json");
    let out = eda_lab(&[
        "sweep",
        "--algo",
        "cga",
        "--function",
        "onemax",
        "--n",
        "10,20",
        "--trials",
        "4",
        "--budget",
        "100000",
        "--out",
        csv.to_str().unwrap(),
        "--summary-json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_csv(&csv).unwrap().len(), 8);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["summaries"].as_array().unwrap().len(), 2);
    assert_eq!(summary["scaling"].as_array().unwrap().len(), 1);
}

fn preset_csv(dir: &Path, name: &str, args: &[&str]) -> (i32, Vec<u8>) {
    let path = dir.join(name);
    let mut all = vec!["preset"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = eda_lab(&all);
    (code(&out), std::fs::read(&path).unwrap())
}

#[test]
fn preset_output_is_reproducible_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "csa-leadingones",
        "--n",
        "16",
        "--trials",
        "4",
        "--seed",
        "5",
    ];
    let (c1, a) = preset_csv(dir.path(), "a.csv", &args);
    let (c2, b) = preset_csv(dir.path(), "b.csv", &[&args[..], &["--jobs", "3"]].concat());
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let (_, c) = preset_csv(
        dir.path(),
        "c.csv",
        &[
            "csa-leadingones",
            "--n",
            "16",
            "--trials",
            "4",
            "--seed",
            "6",
        ],
    );
    assert_ne!(a, c);
}

#[test]
fn failing_verdict_exits_1() {
    // 10 evaluations cannot solve LeadingOnes at n = 30
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("s.json");
    let (c, _) = preset_csv(
        dir.path(),
        "f.csv",
        &[
            "csa-leadingones",
            "--n",
            "30",
            "--trials",
            "3",
            "--budget",
            "10",
            "--summary-json",
            json.to_str().unwrap(),
        ],
    );
    assert_eq!(c, 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["preset"], "csa-leadingones");
    assert_eq!(report["checks"][0]["verdict"], "fail");
}

#[test]
fn jobs_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_eda-lab"))
        .args(["run", "--n", "4", "--jobs", "2"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let bad = Command::new(env!("CARGO_BIN_EXE_eda-lab"))
        .args(["run", "--n", "4"])
        .env("EDA_LAB_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn selftest_passes() {
    assert_eq!(code(&eda_lab(&["selftest"])), 0);
}
