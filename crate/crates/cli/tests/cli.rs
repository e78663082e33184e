use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fracmc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracmc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FRACMC_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].parse().unwrap()
}

#[test]
fn constant_datum_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracmc(&["estimate", "--phi", "1", "--n", "1000"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = read_csv(&dir.path().join("estimate.csv"));
    assert_eq!(
        &h[..13],
        ["alpha", "beta", "gamma", "d", "abar", "x1", "h", "n", "mean", "variance", "stderr", "max_path_len", "seed"]
    );
    assert_eq!(column(&h, &rows[0], "mean"), 1.0);
    assert_eq!(column(&h, &rows[0], "variance"), 0.0);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("estimate.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["config"]["phi"], "1.0");
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap().to_string();
    let bytes = fs::read(dir.path().join("estimate.csv")).unwrap();
    assert_eq!(digest, fracmc::output::sha256_hex(&bytes));
}

#[test]
fn configuration_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracmc(&["estimate", "--gamma", "0.8"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("--gamma") && msg.contains("beta/2"), "{msg}");
    let o = fracmc(&["estimate", "--phi", "pow(x[1], 0.5)"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("abs"), "{}", stderr(&o));
    let o = fracmc(&["estimate", "--alpha", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn non_finite_datum_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracmc(&["estimate", "--phi", "pow(norm(x), 400)", "--n", "20000"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("sample"), "{}", stderr(&o));
}

#[test]
fn unflattened_scaling_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scaling", "--n", "20000", "--abar-grid", "1,4,10"];
    let o = fracmc(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, flat) = read_csv(&dir.path().join("scaling.csv"));
    let mut raw_args = args.to_vec();
    raw_args.extend(["--exponent", "0"]);
    let o = fracmc(&raw_args, dir.path());
    assert_eq!(o.status.code(), Some(3));
    let (_, raw) = read_csv(&dir.path().join("scaling.csv"));
    // exponent 0 leaves the raw, increasing curve; the estimates themselves are unchanged
    let ratios: Vec<f64> = raw.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    for (a, b) in flat.iter().zip(&raw) {
        assert_eq!(a[1], b[1]);
    }
}

#[test]
fn tail_slope_matches_beta() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracmc(&["tail"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = summary["slope"].as_f64().unwrap();
    assert!((-1.65..=-1.35).contains(&slope), "{slope}");
    let (h, rows) = read_csv(&dir.path().join("tail.csv"));
    assert_eq!(h, ["threshold", "survival", "fit_survival"]);
    assert!(rows.len() >= 5);
}

#[test]
fn config_file_env_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# catalog problem\nt = 2\nn = 4096\nseed = 77\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let a = dir.path().join("a");
    let o = fracmc(&["estimate", "--config", cfg], &a);
    assert!(o.status.success(), "{}", stderr(&o));
    let b = dir.path().join("b");
    let o = fracmc(&["estimate", "--t", "2", "--n", "4096", "--seed", "77"], &b);
    assert!(o.status.success());
    assert_eq!(fs::read(a.join("estimate.csv")).unwrap(), fs::read(b.join("estimate.csv")).unwrap());
    // the environment seed is only a fallback
    let c = dir.path().join("c");
    let o = Command::new(env!("CARGO_BIN_EXE_fracmc"))
        .args(["estimate", "--t", "2", "--n", "4096", "--out"])
        .arg(&c)
        .env("FRACMC_SEED", "77")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(fs::read(b.join("estimate.csv")).unwrap(), fs::read(c.join("estimate.csv")).unwrap());
    let o = fracmc(&["estimate", "--config", cfg, "--seed", "78"], &c);
    assert!(o.status.success());
    assert_ne!(fs::read(b.join("estimate.csv")).unwrap(), fs::read(c.join("estimate.csv")).unwrap());
    fs::write(dir.path().join("bad.cfg"), "alpha = 0.5\nbeta = 3\n").unwrap();
    let o = fracmc(&["estimate", "--config", dir.path().join("bad.cfg").to_str().unwrap()], &c);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.cfg:2"), "{}", stderr(&o));
}

#[test]
fn bounds_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracmc(&["bounds", "--g", "pow(norm(x), 0.5)"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = read_csv(&dir.path().join("bounds.csv"));
    assert_eq!(h[0], "fingerprint");
    for name in ["c_beta", "var_bound", "bias_const", "z_sq_bound", "l2_bound"] {
        let v = column(&h, &rows[0], name);
        assert!(v.is_finite() && v > 0.0, "{name} = {v}");
    }
    // the second moment of x[1] is infinite for beta < 2
    let o = fracmc(&["bounds", "--phi", "x[1]"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let opaque = ["bounds", "--phi", "1 + pow(abs(x[1]), 0.5)"];
    let o = fracmc(&opaque, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("growth"), "{}", stderr(&o));
    let mut declared = opaque.to_vec();
    declared.extend(["--growth", "0.5", "--phi-sq", "3"]);
    let o = fracmc(&declared, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn figures_regenerate_identically() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "figures",
        "--n",
        "2500",
        "--abar-step",
        "1",
        "--x-step",
        "2.5",
        "--h",
        "0.05",
        "--h-ci",
        "0.01",
        "--seed",
        "5",
    ];
    let mut first = args.to_vec();
    first.extend(["--workers", "1"]);
    let mut second = args.to_vec();
    second.extend(["--workers", "3"]);
    let o = fracmc(&first, &dir.path().join("one"));
    assert!(o.status.code() == Some(0) || o.status.code() == Some(3), "{}", stderr(&o));
    let o = fracmc(&second, &dir.path().join("three"));
    assert!(o.status.code() == Some(0) || o.status.code() == Some(3), "{}", stderr(&o));
    for name in fracmc::figures::FIGURES {
        let file = format!("{name}.csv");
        let a = fs::read(dir.path().join("one").join(&file)).unwrap();
        let b = fs::read(dir.path().join("three").join(&file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file}");
    }
    let (h, rows) = read_csv(&dir.path().join("one").join("fig4_1b.csv"));
    assert_eq!(h, ["abar", "ratio", "ratio_stderr", "exact_ratio"]);
    assert_eq!(rows.len(), 10);
}
