use std::process::{Command, Output};

use serde_json::Value;

const REFERENCE: [&str; 10] = [
    "--mass", "1", "--lambda", "1", "--gamma", "0.25", "--rho", "0.5", "--beta", "1",
];

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupled-bec"))
        .args(args)
        .output()
        .expect("spawn coupled-bec")
}

fn with_reference(args: &[&str]) -> Output {
    // reference first so that later flags override it
    let mut all = args[..1].to_vec();
    all.extend(REFERENCE);
    all.extend(&args[1..]);
    cli(&all)
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(csv: &str, name: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap_or_else(|| panic!("no row {name}"))
        .parse()
        .unwrap()
}

#[test]
fn csv_has_version_config_and_header() {
    let text = stdout(&with_reference(&["phase-diagram"]));
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# coupled-bec "));
    assert!(lines[0].ends_with(" phase-diagram"));
    assert!(lines[1].starts_with("# config={"));
    assert_eq!(lines[2], "rho,beta,mu,delta,rho0,rho_c,condensed");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].ends_with(",true"));
}

#[test]
fn reference_fluctuations() {
    let text = stdout(&with_reference(&["fluctuations"]));
    assert!((value(&text, "c_rel") - 1.5883).abs() < 1e-4);
    assert!((value(&text, "var_n_rel") - 1.6213).abs() < 1e-4);
    assert!((value(&text, "var_phi_rel") - 0.25 / 0.25f64.tanh()).abs() < 1e-12);
    assert_eq!(value(&text, "distance_j0_phi"), 0.0);
}

#[test]
fn ground_state_accepts_beta_inf() {
    let mut args = vec!["fluctuations"];
    args.extend(&REFERENCE[..8]);
    args.extend(["--beta", "inf"]);
    let text = stdout(&cli(&args));
    assert_eq!(value(&text, "rho0"), 0.5);
    assert_eq!(value(&text, "var_n_rel"), 0.5);
    assert!(!text.contains("duhamel_nn"));
}

#[test]
fn temperature_is_inverse_beta() {
    let mut args = vec!["phase-diagram"];
    args.extend(&REFERENCE[..8]);
    args.extend(["--temp", "0.5"]);
    let by_temp = stdout(&cli(&args));
    let by_beta = stdout(&with_reference(&["phase-diagram", "--beta", "2"]));
    let row = |s: &str| s.lines().nth(3).unwrap().to_owned();
    assert_eq!(row(&by_temp), row(&by_beta));
}

#[test]
fn zero_gap_is_a_usage_error() {
    let o = with_reference(&["fluctuations", "--gamma", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gap"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn missing_and_conflicting_flags() {
    let o = cli(&[
        "fluctuations",
        "--mass",
        "1",
        "--gamma",
        "1",
        "--rho",
        "1",
        "--beta",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--lambda"));
    let o = with_reference(&["fluctuations", "--temp", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = cli(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn normal_phase_requests_are_degenerate() {
    for cmd in ["fluctuations", "dynamics"] {
        let o = with_reference(&[cmd, "--rho", "0.05"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    // plain equilibrium output is fine above the transition
    stdout(&with_reference(&["phase-diagram", "--rho", "0.05"]));
}

#[test]
fn json_output_parses() {
    let text = stdout(&with_reference(&[
        "dynamics",
        "--t-steps",
        "5",
        "--format",
        "json",
    ]));
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["command"], "dynamics");
    assert_eq!(doc["columns"][1], "corr_nn");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 5);
    assert_eq!(doc["config"]["beta"], 1.0);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let first = stdout(&with_reference(&["converge", "--quantity", "density"]));
    let echo = first
        .lines()
        .nth(1)
        .and_then(|l| l.strip_prefix("# config="))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, echo).unwrap();
    let again = stdout(&cli(&["converge", "--config", path.to_str().unwrap()]));
    assert_eq!(first, again);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"mass": 1, "lambda": 1, "gamma": 0.25, "rho": 0.5, "beta": "inf"}"#,
    )
    .unwrap();
    let text = stdout(&cli(&[
        "phase-diagram",
        "--config",
        path.to_str().unwrap(),
        "--beta",
        "1",
    ]));
    assert!(text.lines().nth(3).unwrap().starts_with("0.5,1.0,"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"mass": 1, "lamda": 1}"#).unwrap();
    let o = cli(&["fluctuations", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lamda"));
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let o = with_reference(&["occupations", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3 + 64);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn failed_run_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let o = with_reference(&[
        "fluctuations",
        "--rho",
        "0.05",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn converge_reports_a_verdict() {
    let text = stdout(&with_reference(&["converge", "--quantity", "density"]));
    assert_eq!(text.lines().nth(2), Some("L,oracle,closed_form,abs_err"));
    assert_eq!(text.lines().last(), Some("# verdict=pass"));
    let off = with_reference(&["converge", "--quantity", "var-n-tot", "--k", "0.3"]);
    assert_eq!(off.status.code(), Some(1), "{}", stderr(&off));
    let ground = with_reference(&["converge", "--beta", "inf"]);
    assert_eq!(ground.status.code(), Some(1));
}

#[test]
fn dynamics_period_of_the_gap() {
    // t_max = 2 pi / gamma covers two periods of 2 gamma
    let text = stdout(&with_reference(&["dynamics", "--t-steps", "5"]));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(3)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for r in [&rows[2], &rows[4]] {
        assert!((r[1] - rows[0][1]).abs() < 1e-12);
    }
    assert!((rows[1][1] + rows[0][1]).abs() < 1e-12);
}
