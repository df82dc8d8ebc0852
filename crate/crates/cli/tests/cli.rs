use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn concmeter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_concmeter"))
        .args(args)
        .env_remove("CONCMETER_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn run_single_cor_farlinf_job() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"jobs":[{"check":"cor_farlinf","n":8,"eps":[0.1,0.5,0.9],"samples":20000}]}"#,
    );
    let out = dir.path().join("out");
    let o = concmeter(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("# resolved config: {"));
    let rows = data_lines(&summary);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,cor_farlinf,pass,0,3,"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("000_cor_farlinf.json")).unwrap()).unwrap();
    assert_eq!(report["check_id"], "cor_farlinf");
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["inputs"]["seed"], 0);
}

#[test]
fn empty_job_list_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"jobs":[]}"#);
    let out = dir.path().join("out");
    let o = concmeter(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(data_lines(&summary).len(), 1);
}

#[test]
fn malformed_configs_exit_one_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let family = write(
        dir.path(),
        "family.json",
        r#"{"jobs":[{"check":"median_law","n":4,"p":2,"samples":1000,"seed":1},
            {"check":"ledoux_lemma","measure":{"family":"torus","dim":4},"metric":{"kind":"lp","p":2,"dim":4}}]}"#,
    );
    let o = concmeter(&["run", &family, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("family") && err.contains("torus") && err.contains("jobs[1]"), "{err}");
    assert!(!dir.path().join("o").exists(), "nothing runs before validation");

    let unknown = write(dir.path(), "unknown.json", r#"{"jobs":[], "colour":"red"}"#);
    let o = concmeter(&["run", &unknown]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn failing_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // No finite sample meets a 1e-9 tolerance.
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"jobs":[{"check":"median_law","n":2,"p":1,"samples":1000,"seed":3,"tolerance":1e-9}]}"#,
    );
    let out = dir.path().join("out");
    let o = concmeter(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(data_lines(&fs::read_to_string(out.join("summary.csv")).unwrap())[1].contains(",fail,"));
}

#[test]
fn alpha_is_deterministic_and_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "alpha".to_string(),
            "--measure".into(),
            "haar_sphere".into(),
            "--metric".into(),
            "l2".into(),
            "--n".into(),
            "64".into(),
            "--eps".into(),
            "0.05:1:12".into(),
            "--N".into(),
            "20000".into(),
            "--seed".into(),
            "9".into(),
            "--out".into(),
            p.to_str().unwrap().to_string(),
        ]
    };
    let run = |extra: &[&str], p: &Path| {
        let mut v: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        v.extend(args(p));
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        assert_eq!(concmeter(&refs).status.code(), Some(0));
    };
    run(&["--jobs", "1"], &a);
    run(&["--jobs", "3"], &b);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let rows = data_lines(&text);
    assert_eq!(rows[0], "eps,alpha_hat,ci,direction_id_of_max");
    let alpha: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(alpha.len(), 12);
    assert!(alpha.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn alpha_rejects_empty_grid() {
    let o = concmeter(&["alpha", "--measure", "haar_sphere", "--metric", "l2", "--n", "8", "--eps", ""]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn beta_identity_column_is_one() {
    let o = concmeter(&["beta", "--K", "l2", "--L", "l2", "--n", "4,8", "--N", "5000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for row in &data_lines(&text)[1..] {
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{row}");
    }
}

#[test]
fn seed_env_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"jobs":[{"check":"median_law","n":4,"p":2,"samples":2000,"seed":1}]}"#,
    );
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_concmeter"))
        .args(["run", &cfg, "--out", out.to_str().unwrap()])
        .env("CONCMETER_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("000_median_law.json")).unwrap()).unwrap();
    assert_eq!(report["inputs"]["seed"], 77);
}

#[test]
fn verify_single_check_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"n":8,"eps":[0.2,0.4],"samples":10000,"seed":5}"#;
    let report = dir.path().join("r.json");
    let o = concmeter(&["verify", "cor_farlinf", "--json", body, "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = write(dir.path(), "c.json", &format!(r#"{{"jobs":[{{"check":"cor_farlinf",{}}}]}}"#, &body[1..body.len() - 1]));
    let out = dir.path().join("out");
    assert_eq!(concmeter(&["run", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&report).unwrap(),
        fs::read_to_string(out.join("000_cor_farlinf.json")).unwrap()
    );
    let o = concmeter(&["verify", "thm_main", "--json", r#"{"check":"cor_farlinf"}"#]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn transport_and_median_and_pushforward() {
    let o = concmeter(&["transport", "--source", "ggp:1", "--target", "uniform_ball:l1", "--norm", "l1", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let first = text.lines().next().unwrap();
    let cfg: serde_json::Value = serde_json::from_str(first.trim_start_matches("# resolved config: ")).unwrap();
    let lip = cfg["lipschitz_u"].as_f64().unwrap();
    assert!((4.0 * lip - 1.807).abs() < 0.02, "{lip}");
    assert_eq!(data_lines(&text)[0], "r,u");

    let o = concmeter(&["median", "--measure", "uniform_ball:l2", "--norm", "l2", "--n", "8", "--N", "20000"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let m: f64 = data_lines(&text)[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((m - 0.5f64.powf(1.0 / 8.0)).abs() < 0.01);

    let o = concmeter(&["pushforward", "--measure", "uniform_ball:l2", "--map", "pi", "--K", "l2", "--L", "l1", "--n", "3", "--N", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(data_lines(&text).len(), 501);
    let o = concmeter(&["pushforward", "--measure", "gaussian", "--map", "pi", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
}
