use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn fpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpc")).args(args).env_remove("FPC_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn at1p_report(dir: &Path) -> PathBuf {
    let out = dir.join("at1p.json");
    let o = fpc(&[
        "calibrate", "--model", "at1p", "--h", "0.4", "--beta", "0.5",
        "--quotes", data("vodafone.csv").to_str().unwrap(), "--curve", data("flat3.csv").to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

#[test]
fn missing_quote_file_exits_one_and_names_path() {
    let o = fpc(&["calibrate", "--model", "at1p", "--h", "0.4", "--quotes", "/nonexistent/quotes.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/quotes.csv"), "{}", stderr(&o));
}

#[test]
fn malformed_quotes_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "tenor_years,bid_bps,ask_bps,mid_bps,recovery\n1,abc,24,21.5,0.4\n").unwrap();
    let o = fpc(&["calibrate", "--model", "at1p", "--h", "0.4", "--quotes", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cfg.json");
    std::fs::write(&p, r#"{"beta": 0.5, "scenario_count": 2, "bogus": true}"#).unwrap();
    let o = fpc(&["calibrate", "--model", "sbat1p", "--quotes", data("vodafone.csv").to_str().unwrap(), "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn unattainable_cascade_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("q.csv");
    // a 1y spread far beyond what any volatility can produce with this barrier
    std::fs::write(&p, "tenor_years,bid_bps,ask_bps,mid_bps,recovery\n1,9000,9100,9050,0.4\n").unwrap();
    let o = fpc(&["calibrate", "--model", "at1p", "--h", "0.01", "--quotes", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn optimizer_out_of_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cfg.json");
    std::fs::write(&p, r#"{"beta": 0.0, "scenario_count": 2, "optimizer": {"multistart_count": 1, "max_iterations": 5, "tolerance": 1e-12}}"#).unwrap();
    let o = fpc(&["calibrate", "--model", "svbat1p", "--quotes", data("vodafone.csv").to_str().unwrap(), "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("converged false"));
}

#[test]
fn at1p_table_lists_piecewise_volatility() {
    let o = fpc(&["calibrate", "--model", "at1p", "--h", "0.4", "--beta", "0.5", "--quotes", data("vodafone.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("sigma_i"));
    assert_eq!(s.lines().filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit()) && l.contains('%')).count(), 5);
}

#[test]
fn svbat1p_report_has_five_parameters_and_residuals() {
    let o = fpc(&[
        "calibrate", "--model", "svbat1p", "--beta", "0", "--weights", "bidask",
        "--quotes", data("vodafone.csv").to_str().unwrap(), "--curve", data("flat3.csv").to_str().unwrap(), "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["model"], "svbat1p");
    assert_eq!(v["parameters"].as_array().unwrap().len(), 2);
    assert_eq!(v["residuals"].as_array().unwrap().len(), 5);
}

#[test]
fn survival_grid_has_monthly_rows() {
    let dir = tempfile::tempdir().unwrap();
    let report = at1p_report(dir.path());
    let o = fpc(&["survival", "--params", report.to_str().unwrap(), "--horizon", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "time_years,survival");
    assert_eq!(lines[1], "0,1");
    assert_eq!(lines.len(), 122);
}

#[test]
fn survival_difference_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let report = at1p_report(dir.path());
    let r = report.to_str().unwrap();
    let o = fpc(&["survival", "--params", r, "--diff", r]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0"));
    }
}

#[test]
fn survival_beyond_calibrated_range_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let report = at1p_report(dir.path());
    let o = fpc(&["survival", "--params", report.to_str().unwrap(), "--horizon", "15"]);
    assert_eq!(o.status.code(), Some(1));
    let o = fpc(&["survival", "--params", report.to_str().unwrap(), "--horizon", "15", "--extrapolate"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn calibrated_book_prices_to_zero_at_mid() {
    let dir = tempfile::tempdir().unwrap();
    let report = at1p_report(dir.path());
    let o = fpc(&["price-cds", "--params", report.to_str().unwrap(), "--quotes", data("vodafone.csv").to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v.as_array().unwrap() {
        assert!(row["pv_mid"].as_f64().unwrap().abs() < 1e-6);
        assert_eq!(row["mid_in_window"], true);
    }
}

#[test]
fn empty_quote_file_gives_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.csv");
    std::fs::write(&p, "tenor_years,bid_bps,ask_bps,mid_bps,recovery\n").unwrap();
    let o = fpc(&["price-cds", "--quotes", p.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "[]");
}

#[test]
fn ers_is_reproducible_and_echoes_seed() {
    let dir = tempfile::tempdir().unwrap();
    let report = at1p_report(dir.path());
    let args = ["ers", "--params", report.to_str().unwrap(), "--paths", "20000", "--steps", "50", "--seed", "99", "--rho=-1,0.5"];
    let a = fpc(&args);
    let b = fpc(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["seed"], 99);
    assert_eq!(v["results"][0]["spread_bps"], 0.0);
}

#[test]
fn ers_full_recovery_has_zero_fair_spread() {
    let dir = tempfile::tempdir().unwrap();
    let report = at1p_report(dir.path());
    let o = fpc(&["ers", "--params", report.to_str().unwrap(), "--paths", "20000", "--steps", "50", "--recovery", "1", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"][0]["spread_bps"], 0.0);
}

#[test]
fn ers_price_mode_reports_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let report = at1p_report(dir.path());
    let o = fpc(&["ers", "--params", report.to_str().unwrap(), "--paths", "20000", "--steps", "50", "--price", "--spread", "14.2", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mode"], "price");
    assert!(v["results"][0]["std_error_bps"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config_echo"]["contract"]["spread"], 14.2);
}

#[test]
fn bad_thread_count_exits_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_fpc"))
        .args(["price-cds", "--quotes", data("vodafone.csv").to_str().unwrap()])
        .env("FPC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
