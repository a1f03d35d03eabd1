use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sparsepois"));
    for var in ["SEED", "ALPHA", "NULL_REPS", "POWER_REPS", "WORKERS", "OUT", "FORMAT", "PRETTY"] {
        c.env_remove(format!("SPARSEPOIS_{var}"));
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SCENARIO: &str = r#"{
  "n": 300,
  "means": { "type": "constant", "lambda0": 15.0 },
  "sparsity": { "beta": 0.6 },
  "regime": { "type": "sparse-two-sided", "r": 0.9 },
  "sidedness": "two-sided"
}"#;

const GRID: &str = r#"{
  "n": 100,
  "means": { "type": "constant", "lambda0": 5.0 },
  "family": "sparse-two-sided",
  "betas": [0.6],
  "signals": [0.3, 0.6],
  "detectors": ["chi2", "hc-z", "lrt"],
  "null_reps": 40,
  "power_reps": 20
}"#;

#[test]
fn counts_at_their_means_are_retained() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..50).map(|i| format!("{i},{},{}\n", 4 + i % 5, 4 + i % 5)).collect();
    let counts = write(dir.path(), "c.csv", &format!("index,lambda,count\n{rows}"));
    let o = run(&["test", "--counts", &counts, "--seed", "3", "--null-reps", "200", "--detectors", "chi2,max,hc-z"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for d in v["detectors"].as_array().unwrap() {
        assert_eq!(d["reject"], false, "{d}");
    }
    assert_eq!(v["detectors"][0]["statistic"], 0.0);
}

#[test]
fn simulated_alternatives_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", &SCENARIO.replace("\"n\": 300", "\"n\": 1000"));
    let cal = run(&["calibrate", "--model", &model, "--seed", "1", "--detectors", "max,hc-p"]);
    assert!(cal.status.success());
    let cal = write(dir.path(), "cal.json", &stdout(&cal));
    let mut rejected = [0; 2];
    for seed in 0..10 {
        let sim = run(&["simulate", "--model", &model, "--seed", &seed.to_string()]);
        assert!(sim.status.success());
        // replicate,index,lambda,count,component -> index,lambda,count
        let body: String = stdout(&sim)
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{},{},{}\n", f[1], f[2], f[3])
            })
            .collect();
        let counts = write(dir.path(), "c.csv", &format!("index,lambda,count\n{body}"));
        let o = run(&["test", "--counts", &counts, "--calibration", &cal, "--detectors", "max,hc-p", "--pvalues"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["pvalues"].as_array().unwrap().len(), 1000);
        for (j, d) in v["detectors"].as_array().unwrap().iter().enumerate() {
            rejected[j] += (d["reject"] == true) as usize;
        }
    }
    // power at this size is about 0.84 for max and 0.99 for hc-p
    assert!(rejected[0] >= 6 && rejected[1] >= 9, "{rejected:?}");
}

#[test]
fn calibrate_is_reproducible_and_honours_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.json", SCENARIO);
    let args = ["calibrate", "--model", &model, "--seed", "5", "--null-reps", "60", "--detectors", "chi2,lrt"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let o = bin().args(args).env("SPARSEPOIS_ALPHA", "0.01").output().unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["alpha"], 0.01);
    let o = bin().args(args).args(["--alpha", "0.1"]).env("SPARSEPOIS_ALPHA", "0.01").output().unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["alpha"], 0.1);

    let cal = write(dir.path(), "cal.json", &stdout(&a));
    let p = run(&["power", "--model", &model, "--calibration", &cal, "--seed", "1", "--power-reps", "30"]);
    assert!(p.status.success(), "{}", String::from_utf8_lossy(&p.stderr));
    let v: Value = serde_json::from_str(&stdout(&p)).unwrap();
    assert_eq!(v["estimates"][0]["reps"], 30);
}

#[test]
fn grid_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.json", GRID);
    let csv = dir.path().join("g.csv");
    let json = dir.path().join("full.json");
    let o = run(&[
        "grid",
        "--config",
        &cfg,
        "--seed",
        "2",
        "--workers",
        "2",
        "--out",
        csv.to_str().unwrap(),
        "--json-out",
        json.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "detector,n,beta,signal_kind,signal,power,reps,boundary_value,flag");
    assert_eq!(lines.count(), 6);
    let grid = sparsepois::harness::load_grid_json(std::fs::File::open(&json).unwrap()).unwrap();
    assert_eq!(grid.config.seed, 2);
}

#[test]
fn boundary_table() {
    let o = run(&["boundary", "--kind", "sparse", "--from", "0.6", "--to", "0.9", "--step", "0.15"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "beta,threshold,regime_label\n0.6,0.09999999999999998,moderately-sparse\n0.75,0.25,moderately-sparse\n0.9,0.4675444679663242,very-sparse\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.csv", "index,lambda,count\n");
    let malformed = write(dir.path(), "m.csv", "index,lambda,count\n0,1,x\n");
    let neg = write(dir.path(), "n.csv", "index,lambda,count\n0,-1,2\n");
    let ok = write(dir.path(), "ok.csv", "index,lambda,count\n0,1,2\n1,2,2\n");
    let cfg = write(dir.path(), "g.json", GRID);
    let bad_cfg = write(dir.path(), "b.json", &GRID.replace("\"sparse-two-sided\"", "\"sparse\""));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["test", "--counts", &malformed, "--seed", "1"]).status.code(), Some(2));
    assert_eq!(run(&["test", "--counts", &empty, "--seed", "1"]).status.code(), Some(3));
    assert_eq!(run(&["test", "--counts", &neg, "--seed", "1"]).status.code(), Some(3));
    assert_eq!(run(&["test", "--counts", &ok, "--seed", "1", "--detectors", "chi3"]).status.code(), Some(3));
    assert_eq!(run(&["grid", "--config", &cfg]).status.code(), Some(3), "seed is mandatory");
    let o = run(&["grid", "--config", &bad_cfg, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("family"));
    assert_eq!(run(&["test", "--counts", "/no/such/file.csv", "--seed", "1"]).status.code(), Some(4));
}
