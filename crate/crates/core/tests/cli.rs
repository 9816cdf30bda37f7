use std::process::{Command, Output};

fn robreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robreg")).args(args).env_remove("ROBREG_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn missing_flag_prints_usage_and_exits_2() {
    let o = robreg(&["generate", "--d", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn help_exits_0() {
    assert_eq!(robreg(&["--help"]).status.code(), Some(0));
    assert_eq!(robreg(&["bench", "--help"]).status.code(), Some(0));
}

#[test]
fn invalid_instance_is_a_usage_error() {
    // eps kappa = 0.5 < 1 - eps: the low-degree instance does not exist.
    let o = robreg(&["reduction-test", "--kappa", "5", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_columns() {
    let o = robreg(&["bench", "--eps", "0.05", "--kappa", "1,2", "--d", "10", "--n", "2000", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "eps,kappa,n,estimator,err_mean,err_se,err_over_sqrt_epskappa");
    // Two cells, three estimators each.
    assert_eq!(lines.count(), 6);
}

#[test]
fn env_seed_overrides_flag() {
    let args = ["generate", "--d", "3", "--n", "50", "--seed", "11"];
    let plain = robreg(&args);
    let env = Command::new(env!("CARGO_BIN_EXE_robreg"))
        .args(["generate", "--d", "3", "--n", "50", "--seed", "99"])
        .env("ROBREG_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(plain.stdout, env.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_robreg")).args(args).env("ROBREG_SEED", "abc").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_files_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let o = robreg(&[
            "regress", "--d", "8", "--n", "3000", "--eps", "0.1", "--kappa", "4", "--trials", "3",
            "--format", "jsonl", "--threads", threads, "--seed", "5", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let a = run("a.jsonl", "1");
    let b = run("b.jsonl", "1");
    let c = run("c.jsonl", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 12);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["error"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn emitted_floats_round_trip() {
    let o = robreg(&["sq-instance", "--mu", "0.2", "--kappa", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let weight = headers.iter().position(|h| h == "weight").unwrap();
    let mut total = 0.0;
    for rec in reader.records() {
        let text = &rec.unwrap()[weight];
        let v: f64 = text.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), text);
        total += v;
    }
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn certify_and_reduction_succeed_on_easy_settings() {
    let o = robreg(&["certify", "--d", "10", "--n", "20000", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 11);
    let o = robreg(&["reduction-test", "--d", "100", "--n", "5000", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn quick_suite_subset_passes() {
    let o = robreg(&["verify-all", "--quick", "--only", "2,5,7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}
