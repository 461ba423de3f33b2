use std::fs;
use std::path::Path;

use chfsim::cli::run_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("chfsim").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let (code, _, _) = run(&["simulate", "--model", "ar1"]);
    assert_eq!(code, 2);
}

#[test]
fn malformed_series_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    fs::write(&input, "1.0\n2.0\nnot-a-number\n").unwrap();
    let (code, _, err) = run(&["estimate", "--input", input.to_str().unwrap(), "--model", "ar1"]);
    assert_eq!(code, 1);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn malformed_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model = ar1\ntheta = 0.5\n");
    let (code, _, err) = run(&["replicate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn simulate_then_estimate_recovers_the_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("ar1.csv");
    let s = series.to_str().unwrap();
    let (code, _, _) = run(&["simulate", "--model", "ar1", "--theta", "0.5,1.0", "--n", "2000", "--seed", "3", "--out", s]);
    assert_eq!(code, 0);
    assert_eq!(fs::read_to_string(&series).unwrap().lines().count(), 2000);

    let (code, out, _) = run(&["estimate", "--input", s, "--model", "ar1", "--estimator", "sim", "--h", "1000", "--seed", "4"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
    let json: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let theta: Vec<f64> = json["theta_hat"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((theta[0] - 0.5).abs() < 0.1 && (theta[1] - 1.0).abs() < 0.1, "{out}");
    assert_eq!(json["master_seed"], 4);
    assert_eq!(json["params"][0], "phi");
}

#[test]
fn cauchy_with_control_variates_warns() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("x.csv");
    let s = series.to_str().unwrap();
    run(&["simulate", "--model", "ar1", "--theta", "0.3,1", "--n", "200", "--out", s]);
    let (code, _, err) = run(&[
        "estimate", "--input", s, "--model", "ar1", "--estimator", "cv", "--weight", "cauchy", "--h", "100", "--m", "100",
    ]);
    assert_eq!(code, 0);
    assert!(err.contains("warning"), "{err}");
}

#[test]
fn replicate_writes_per_replication_and_summary_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "model = ar1\ntheta = 0.5, 1.0\nn = 200\nreplications = 2\nestimators = sim\nh = 200\nseed = 9\n",
    );
    let out = dir.path().join("run");
    let (code, stdout, err) = run(&["replicate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let reps = fs::read_to_string(out.join("replications.csv")).unwrap();
    assert_eq!(reps.lines().count(), 3);
    assert!(reps.starts_with("replication,estimator,status,phi,sigma,"));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary, stdout);
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "param,true,bias,std,rmse,estimator,n,H,p,k,weight,replications,failed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("phi,0.5,"));
    assert!(lines[1].ends_with(",sim,200,200,3,1,laplace,2,0"));
}

#[test]
fn replicate_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "model = poisson-ar\ntheta = 0.15, 0.5, 0.619\nn = 150\nreplications = 3\nestimators = sim, cv\nh = 300\nm = 200\n",
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let (code, _, err) = run(&["replicate", "--config", &cfg, "--seed", "5", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        outputs.push((
            fs::read(out.join("replications.csv")).unwrap(),
            fs::read(out.join("summary.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn diagnose_emits_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("diag.csv");
    let (code, _, err) = run(&[
        "diagnose", "--model", "ar1", "--theta", "0.5,1", "--count", "40", "--h", "500", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "sqrt_var,xi_mc,xi_cv");
    assert_eq!(text.lines().count(), 41);
}
