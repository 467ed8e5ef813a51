use std::process::{Command, Output};

fn dunkl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dunkl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value_column(o: &Output) -> Vec<String> {
    stdout(o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect()
}

#[test]
fn eval_newton_single_row() {
    let o = dunkl(&[
        "--command",
        "eval",
        "--d",
        "3",
        "--k",
        "1",
        "--kernel",
        "newton",
        "--x",
        "0.3,0.2,0",
        "--y",
        "0.1,-0.4,0.2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    let v: f64 = value_column(&o)[0].parse().unwrap();
    assert!(v > 0.0 && v.is_finite());
    assert_eq!(lines.count(), 1);
}

#[test]
fn eval_green_on_sphere_is_zero() {
    let o = dunkl(&[
        "--command",
        "eval",
        "--d",
        "2",
        "--k",
        "0.5",
        "--kernel",
        "green",
        "--x",
        "0.6,0.8",
        "--y",
        "0.1,0.2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_column(&o)[0].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn eval_poisson_at_origin_is_one() {
    let o = dunkl(&[
        "--command",
        "eval",
        "--d",
        "3",
        "--k",
        "1.7",
        "--kernel",
        "poisson",
        "--x",
        "0,0,0",
        "--y",
        "0.6,0,0.8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = value_column(&o)[0].parse().unwrap();
    assert!((v - 1.0).abs() < 1e-12);
}

#[test]
fn eval_on_orbit_prints_inf() {
    let o = dunkl(&[
        "--command",
        "eval",
        "--d",
        "2",
        "--k",
        "1",
        "--kernel",
        "newton",
        "--x",
        "0.3,0.2",
        "--y",
        "-0.3,0.2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_column(&o), vec!["inf"]);
}

#[test]
fn eval_broadcasts_points() {
    let o = dunkl(&[
        "--command",
        "eval",
        "--d",
        "2",
        "--k",
        "1",
        "--kernel",
        "poisson",
        "--x",
        "0.1,0.2",
        "--y",
        "1,0",
        "--y",
        "0,1",
        "--y",
        "-0.6,-0.8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_column(&o).len(), 3);
}

#[test]
fn a1_basis_matches_adapted() {
    let s = 0.5f64.sqrt();
    // (0.3, 0.1) and (0.2, 0.7) in the A_1 presentation.
    let xa = format!("{},{}", (0.3 - 0.1) * s, (0.3 + 0.1) * s);
    let ya = format!("{},{}", (0.2 - 0.7) * s, (0.2 + 0.7) * s);
    let base = ["--command", "eval", "--d", "2", "--k", "1", "--kernel", "newton"];
    let adapted = dunkl(&[&base[..], &["--x", &xa, "--y", &ya]].concat());
    let a1 = dunkl(&[&base[..], &["--x", "0.3,0.1", "--y", "0.2,0.7", "--basis", "a1"]].concat());
    let u: f64 = value_column(&adapted)[0].parse().unwrap();
    let v: f64 = value_column(&a1)[0].parse().unwrap();
    assert!((u - v).abs() < 1e-12 * u);
}

#[test]
fn dyson_requires_chamber() {
    let o = dunkl(&[
        "--command",
        "eval",
        "--d",
        "2",
        "--k",
        "1",
        "--kernel",
        "newton-dyson",
        "--basis",
        "a1",
        "--x",
        "0.1,0.3",
        "--y",
        "0.3,0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_configurations_exit_2() {
    for args in [
        &["--command", "eval", "--d", "2", "--k", "-1", "--x", "0,0", "--y", "0.5,0"][..],
        &["--command", "eval", "--d", "2", "--k", "1", "--kernel", "nope", "--x", "0,0", "--y", "0.5,0"],
        &["--command", "eval", "--d", "2", "--k", "1", "--x", "0,0,0", "--y", "0.5,0"],
        &["--command", "eval", "--d", "2", "--k", "1", "--x", "0,zero", "--y", "0.5,0"],
        &["--command", "scan", "--d", "5", "--k", "1", "--theorem", "newton-5.1", "--n", "0"],
        &["--command", "scan", "--d", "2", "--k", "1", "--theorem", "theorem-9"],
        &["--command", "scan", "--d", "2", "--k", "1", "--theorem", "d1-remark"],
        &["--command", "verify", "--d", "2", "--k", "1", "--suite", "nope"],
        &["--command", "verify", "--d", "3", "--k", "1", "--suite", "closed-forms"],
        &["--command", "bogus", "--d", "2", "--k", "1"],
    ] {
        assert_eq!(dunkl(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn scan_is_reproducible_and_within_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = dunkl(&[
            "--command",
            "scan",
            "--theorem",
            "newton-5.1",
            "--d",
            "5",
            "--k",
            "1",
            "--seed",
            "7",
            "--n",
            "10000",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("theorem,d,k,n_samples,seed,ratio_min,ratio_max"));
    assert!(text.lines().nth(1).unwrap().starts_with("newton,5,"));
}

#[test]
fn scan_poisson_json() {
    let o = dunkl(&[
        "--command",
        "scan",
        "--theorem",
        "poisson-5.8",
        "--d",
        "2",
        "--k",
        "1",
        "--n",
        "2000",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["band"].as_f64().unwrap().is_finite());
}

#[test]
fn verify_closed_forms_passes() {
    let o = dunkl(&["--command", "verify", "--suite", "closed-forms", "--d", "2", "--k", "1", "--n", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "closed-forms");
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_green_paths_d4() {
    let o = dunkl(&["--command", "verify", "--suite", "green-paths", "--d", "4", "--k", "0.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("check,d,k,p,point,residual,tolerance,pass"));
}

#[test]
fn verify_hardy_stein_p2() {
    let o = dunkl(&["--command", "verify", "--suite", "hardy-stein", "--d", "2", "--k", "1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for c in v["checks"].as_array().unwrap() {
        assert!(c["residual"].as_f64().unwrap() < 1e-3);
    }
}

#[test]
fn verify_suite_aliases() {
    for suite in ["lemma-3.3", "lemma-4.5", "dyson"] {
        let o = dunkl(&["--command", "verify", "--suite", suite, "--d", "2", "--k", "1", "--n", "20"]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
    }
}

#[test]
fn failed_verification_exits_5() {
    // For p < 2 the formula needs u(x) != 0; one sample sits next to a zero
    // of x_1^2 - 3x_2^2, where |u|^p is not smooth at the stencil scale.
    let o = dunkl(&["--command", "verify", "--suite", "pth-power", "--d", "2", "--k", "1", "--p", "1.5", "--n", "50"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
}
