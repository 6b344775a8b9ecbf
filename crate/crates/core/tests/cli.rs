use std::path::Path;
use std::process::{Command, Output};

const SMALL: &[&str] = &[
    "--set", "I=50",
    "--set", "E=5",
    "--set", "T=200",
    "--set", "init_horizon=48",
    "--set", "test_horizon=200",
    "--set", "D=3",
    "--set", "max_iters=3",
    "--set", "base_rate=2",
];

fn ppvf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppvf")).args(args).output().expect("binary runs")
}

fn with_small(args: &[&str]) -> Vec<String> {
    args.iter().chain(SMALL).map(|s| s.to_string()).collect()
}

fn run_small(args: &[&str]) -> Output {
    let v = with_small(args);
    ppvf(&v.iter().map(String::as_str).collect::<Vec<_>>())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_trace_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    assert!(run_small(&["gen-trace", "--out", path(&a), "--seed", "5"]).status.success());
    assert!(run_small(&["gen-trace", "--out", path(&b), "--seed", "5"]).status.success());
    assert!(run_small(&["gen-trace", "--out", path(&c), "--seed", "6"]).status.success());
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn generated_trace_round_trips_through_loader() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let out = run_small(&["gen-trace", "--out", path(&trace)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = ppvf_core::trace::load_trace(&trace, 1.0).unwrap();
    assert!(!log.is_empty());
    assert!(log.catalog_size() <= 50);
    assert!(log.events().iter().all(|e| e.edge_id < 5 && e.timestamp < 200.0));
}

#[test]
fn simulate_single_baseline_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let out_dir = dir.path().join("run");
    assert!(run_small(&["gen-trace", "--out", path(&trace)]).status.success());
    let out = run_small(&["simulate", "--trace", path(&trace), "--out", path(&out_dir), "--policy", "lru"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("# effective configuration"));
    let chr = std::fs::read_to_string(out_dir.join("chr.csv")).unwrap();
    let lines: Vec<&str> = chr.lines().collect();
    assert_eq!(lines[0], "policy,capacity,chr");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("lru,0.01,"));
    for f in ["js.csv", "budget_cdf.csv", "fl_loss.csv", "manifest.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    assert!(ppvf(&["report", "--out", path(&out_dir)]).status.success());
    std::fs::write(out_dir.join("chr.csv"), "tampered").unwrap();
    assert_eq!(ppvf(&["report", "--out", path(&out_dir)]).status.code(), Some(3));
}

#[test]
fn capacity_sweep_emits_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.conf");
    std::fs::write(&config, "# capacity sweep\npolicies = lru,lfu\nsweep_c = 0.02, 0.1, 0.5\n").unwrap();
    let out_dir = dir.path().join("run");
    let out = run_small(&["simulate", "--config", path(&config), "--out", path(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let chr = std::fs::read_to_string(out_dir.join("chr.csv")).unwrap();
    let rows: Vec<Vec<&str>> = chr.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for policy in ["lru", "lfu"] {
        let values: Vec<f64> = rows.iter().filter(|r| r[0] == policy).map(|r| r[2].parse().unwrap()).collect();
        assert_eq!(values.len(), 3);
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{policy}: {values:?}");
    }
}

#[test]
fn eval_cr_exit_codes() {
    let ok = ppvf(&["eval-cr", "--set", "cr_instances=30"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("worst OPT/ALG"));
    let too_large = ppvf(&["eval-cr", "--set", "cr_catalog=5"]);
    assert_eq!(too_large.status.code(), Some(1));
}

#[test]
fn invalid_inputs_exit_with_usage_or_data_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    assert_eq!(ppvf(&["simulate", "--out", path(&out_dir), "--policy", "arc"]).status.code(), Some(1));
    assert_eq!(ppvf(&["simulate", "--out", path(&out_dir), "--set", "no_such_key=1"]).status.code(), Some(1));
    assert_eq!(ppvf(&["simulate", "--out", path(&out_dir), "--threads", "0"]).status.code(), Some(1));
    assert_eq!(ppvf(&["bogus"]).status.code(), Some(1));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "0,1,2,3\nnot,a,valid,row\n").unwrap();
    let code = ppvf(&["fit", "--trace", path(&bad), "--out", path(&out_dir)]).status.code();
    assert_eq!(code, Some(2));
}
