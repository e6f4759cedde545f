use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_orthosurv"));
    c.env("RUST_LOG", "warn");
    c
}

fn smoke_config(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("smoke.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# tiny run\nscenario = 1\nsettings = full\nn_train = 3000\nn_test = 500\nschemes = none\nhorizons = 0\nseeds = 1\nout = {}\n",
            dir.join("out").display()
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn gen_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let out = bin()
        .args(["gen", "--scenario", "2", "--setting", "low_treatment", "--n", "300", "--seed", "4", "--out"])
        .arg(&data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let header = std::fs::read_to_string(&data).unwrap();
    assert!(header.starts_with("x0,x1,x2,x3,x4,x5,x6,x7,x8,x9,a,t_tilde,delta_s,delta_g\n"));

    let out = bin().args(["validate", "--data"]).arg(&data).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("300 rows"));
}

#[test]
fn validate_reports_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "x0,a,t_tilde,delta_s,delta_g\n0.5,1,2,1,0\n0.1,2,1,1,0\n").unwrap();
    let out = bin().args(["validate", "--data"]).arg(&data).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}

#[test]
fn smoke_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = smoke_config(dir.path());
    let t0 = std::time::Instant::now();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(t0.elapsed().as_secs() < 120);
    let results = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    let lines: Vec<&str> = results.lines().collect();
    assert_eq!(lines.len(), 2);
    let pehe: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert!(pehe.is_finite() && pehe >= 0.0);
    assert!(dir.path().join("out/summary.md").exists());
    assert_eq!(std::fs::read_to_string(dir.path().join("out/ratios.csv")).unwrap().lines().count(), 2);
}

#[test]
fn bogus_scheme_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "schemes = bogus\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("`schemes`"));
}

#[test]
fn meanzero_probe_prints_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("probe.cfg");
    std::fs::write(&cfg, "probe.n = 4000\nprobe.bins = 4\nprobe.horizon = 2\n").unwrap();
    let out = bin().args(["probe", "--kind", "meanzero", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("full,")).count(), 8);
}
