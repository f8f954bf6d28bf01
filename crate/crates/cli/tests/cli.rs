use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn fppdt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fppdt")).args(args).arg("--out").arg(dir).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn minimal_mu_campaign_writes_three_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fppdt(tmp.path(), &["mu", "side=64", "n=8,16", "replicas=6", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("mu.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,replica,T,seed"));
    assert_eq!(lines.count(), 12);
    let summary = json(&tmp.path().join("mu.json"));
    assert_eq!(summary["schema"], "fppdt-1");
    assert_eq!(summary["results"]["per_n"].as_array().unwrap().len(), 2);
    let manifest = json(&tmp.path().join("mu.manifest.json"));
    assert_eq!(manifest["config"]["seed"], "3");
    assert_eq!(manifest["derived_seeds"]["points"].as_array().unwrap().len(), 6);
    assert!(manifest["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn invalid_probability_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fppdt(tmp.path(), &["perc", "R=4", "p=1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1.5"));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
    let fresh = tmp.path().join("fresh");
    assert_eq!(fppdt(&fresh, &["mu", "replicas=0"]).status.code(), Some(2));
    assert!(!fresh.exists());
}

#[test]
fn bad_input_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["nonsense"][..],
        &["mu", "bogus=1"],
        &["mu", "replicas=0"],
        &["mu", "dist=gamma(1)"],
        &["fluct", "kappa=0.4"],
        &["shape", "side=100"],
        &["truncgap", "delta=0.2"],
        &["paths", "mode=spiral"],
        &["mu", "noequals"],
    ] {
        let out = fppdt(tmp.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn rerun_and_manifest_replay_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    let args = ["truncgap", "side=96", "n=16", "replicas=8", "--seed", "9"];
    assert!(fppdt(&a, &args).status.success());
    assert!(fppdt(&b, &args).status.success());
    let manifest = a.join("truncgap.manifest.json");
    assert!(fppdt(&c, &["truncgap", "--config", manifest.to_str().unwrap()]).status.success());
    for name in ["truncgap.csv", "truncgap.json"] {
        let first = std::fs::read(a.join(name)).unwrap();
        assert_eq!(first, std::fs::read(b.join(name)).unwrap(), "{name}");
        assert_eq!(first, std::fs::read(c.join(name)).unwrap(), "{name}");
    }
    // A manifest for another command is rejected.
    assert_eq!(fppdt(&c, &["mu", "--config", manifest.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("kappa.cfg");
    std::fs::write(&cfg, "# table of self-avoiding walk counts\nrmax = 3\nreplicas = 2\nseed = 5\n").unwrap();
    let out = fppdt(tmp.path(), &["kappa", "--config", cfg.to_str().unwrap(), "rmax=4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&tmp.path().join("kappa.json"));
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["results"]["rmax"], 4);
    let csv = std::fs::read_to_string(tmp.path().join("kappa.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
}

#[test]
fn geometry_exports() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(fppdt(tmp.path(), &["gen", "side=12", "margin=1"]).status.success());
    let points = tmp.path().join("gen.points");
    let n = std::fs::read_to_string(tmp.path().join("gen.csv")).unwrap().lines().count() - 1;
    let out = fppdt(tmp.path(), &["triangulate", &format!("input={}", points.display())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&tmp.path().join("triangulate.json"));
    assert_eq!(summary["results"]["vertices"], n);
    assert_eq!(summary["results"]["euler_characteristic"], 2);

    assert!(fppdt(tmp.path(), &["fpp", "side=40", "from=6,6", "to=30,30"]).status.success());
    let fpp = json(&tmp.path().join("fpp.json"));
    let path = fpp["results"]["geodesic"].as_array().unwrap();
    let rows = std::fs::read_to_string(tmp.path().join("fpp.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + path.len());
    let last_t: f64 = rows.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(last_t, fpp["results"]["time"].as_f64().unwrap());
}
