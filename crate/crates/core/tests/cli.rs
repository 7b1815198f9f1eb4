use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cofine::harness::RegretTrace;
use cofine::hierarchy::learn_u;
use cofine::io::{read_matrix, read_profiles, write_traces};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn cofine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cofine")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn learn_u_on_doc_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let csv = configs().join("toy_profiles.csv");
    let out = cofine(&["learn-u", s(&csv), "--k", "1", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("||U||_F^2 = 1.0000"));

    let u = read_matrix(&dir.path().join("u.csv")).unwrap();
    assert!((u[(0, 0)] - 0.6).abs() < 1e-12 && (u[(1, 0)] - 0.8).abs() < 1e-12);
    let in_memory = learn_u(&read_profiles(&csv).unwrap(), 1, false).unwrap();
    assert!((&u - &in_memory.u).amax() <= 1e-12);
    assert!((read_matrix(&dir.path().join("omega.csv")).unwrap()[(0, 0)] - 1.0).abs() < 1e-12);
    assert!(dir.path().join("u0.csv").exists() && dir.path().join("singular_values.csv").exists());
}

#[test]
fn learn_u_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = configs().join("toy_profiles.csv");
    let out = cofine(&["learn-u", s(&csv), "--k", "2", "--out", s(dir.path())]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank 1"));
    assert_eq!(code(&cofine(&["learn-u", s(&csv), "--k", "2", "--ridge", "--out", s(dir.path())])), 0);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "d0,d1\n0.1,oops\n").unwrap();
    assert_eq!(code(&cofine(&["learn-u", s(&bad), "--k", "1", "--out", s(dir.path())])), 2);
    assert_eq!(code(&cofine(&["learn-u", s(&csv), "--out", s(dir.path())])), 2);
}

#[test]
fn bundled_beta_sweep_emits_one_aggregate_per_beta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("synthetic_beta_sweep.toml");
    let out = cofine(&["simulate", s(&cfg), "--trials", "2", "--horizon", "50", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for beta in ["0", "0.2", "0.4", "0.6", "0.8", "1"] {
        assert!(dir.path().join(format!("aggregate_beta_{beta}.csv")).exists(), "β = {beta}");
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6 * 4);
    assert!(dir.path().join("sweep.svg").exists());
}

#[test]
fn bundled_k_sweep_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let again = dir.path().join("again");
    let cfg = configs().join("k_sweep.toml");
    assert_eq!(code(&cofine(&["simulate", s(&cfg), "--trials", "2", "--horizon", "60", "--seed", "9", "--out", s(&first)])), 0);
    for k in [2, 5, 10, 25] {
        let agg = std::fs::read_to_string(first.join(format!("aggregate_k_{k}.csv"))).unwrap();
        assert!(agg.starts_with("policy,round,mean_cum_regret,stderr\n"));
        assert!(first.join(format!("regret_k_{k}.svg")).exists());
    }
    assert_eq!(code(&cofine(&["simulate", s(&first.join("manifest.toml")), "--out", s(&again)])), 0);
    for entry in std::fs::read_dir(&first).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(again.join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn every_bundled_config_parses() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let cfg = cofine::config::load_config(&p).unwrap();
            cfg.experiment().unwrap();
            cfg.scenario().unwrap();
        }
    }
}

#[test]
fn simulate_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "lamda = 2.0\n").unwrap();
    let out = cofine(&["simulate", s(&bad), "--out", s(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamda"));

    // Mean regularization without a population has no mean profile: a runtime failure.
    std::fs::write(&bad, "policies = [\"mean_regularized\"]\nhorizon = 10\ntrials = 1\n").unwrap();
    assert_eq!(code(&cofine(&["simulate", s(&bad), "--out", s(dir.path())])), 4);

    std::fs::write(&bad, "horizon = 10\ntrials = 1\n").unwrap();
    let threads = Command::new(env!("CARGO_BIN_EXE_cofine"))
        .args(["simulate", s(&bad), "--out", s(dir.path())])
        .env("COFINE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 2);
    let ok = Command::new(env!("CARGO_BIN_EXE_cofine"))
        .args(["simulate", s(&bad), "--out", s(&dir.path().join("ok"))])
        .env("COFINE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&ok), 0);
}

fn trace(policy: &str, trial: usize, inst: Vec<f64>) -> RegretTrace {
    let cum = inst.iter().scan(0.0, |acc, r| {
        *acc += r;
        Some(*acc)
    });
    RegretTrace {
        policy: policy.into(),
        trial,
        user: 0,
        cum: cum.collect(),
        covered: vec![true; inst.len()],
        inst,
        coverage_violations: 0,
        oracle: None,
    }
}

fn report(traces: &[RegretTrace]) -> (i32, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    write_traces(&csv, traces).unwrap();
    let out_dir = dir.path().join("out");
    let out = cofine(&["report", s(&csv), "--out", s(&out_dir)]);
    let table = std::fs::read_to_string(out_dir.join("report.csv")).unwrap_or_default();
    let pairs = std::fs::read_to_string(out_dir.join("pairs.csv")).unwrap_or_default();
    (code(&out), table, pairs)
}

#[test]
fn report_single_trace() {
    let (c, table, _) = report(&[trace("cofine", 0, vec![0.5, 0.25])]);
    assert_eq!(c, 0);
    assert_eq!(table, "policy,n,final_mean_cum_regret,final_stderr\ncofine,1,0.75,0\n");
}

#[test]
fn report_identical_policies_tie() {
    let traces: Vec<_> =
        (0..3).flat_map(|i| [trace("a", i, vec![0.1 * i as f64, 0.2]), trace("b", i, vec![0.1 * i as f64, 0.2])]).collect();
    let (c, _, pairs) = report(&traces);
    assert_eq!(c, 0);
    assert!(pairs.contains("a,b,0,3,0"), "{pairs}");
}

#[test]
fn report_dominating_policy_wins_every_trial() {
    let traces: Vec<_> =
        (0..4).flat_map(|i| [trace("a", i, vec![0.0, 0.1, 0.0]), trace("b", i, vec![0.2, 0.3, 0.1 * i as f64])]).collect();
    let (c, _, pairs) = report(&traces);
    assert_eq!(c, 0);
    assert!(pairs.contains("a,b,4,0,0"), "{pairs}");
}

#[test]
fn report_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    std::fs::write(&csv, "policy,round,mean_cum_regret,stderr\na,1,0.1,0\n").unwrap();
    assert_eq!(code(&cofine(&["report", s(&csv), "--out", s(dir.path())])), 2);
    let a = dir.path().join("a.csv");
    write_traces(&a, &[trace("a", 0, vec![0.1])]).unwrap();
    // The same (policy, trial) twice cannot be merged.
    assert_eq!(code(&cofine(&["report", s(&a), s(&a), "--out", s(dir.path())])), 2);
}
