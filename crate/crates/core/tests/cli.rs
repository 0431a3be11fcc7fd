use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lattice-smooth");

fn rate_config(tolerance: f64) -> String {
    format!(
        r#"{{"d":1,"n_values":[128,256,512,1024],
            "generator":{{"kind":"md_neighbor","innovation":{{"law":"rademacher"}},"link":{{"kind":"sign"}}}},
            "kernel":{{"kind":"uniform"}},"bandwidth":{{"form":"optimal_as"}},
            "regression":{{"function":{{"kind":"affine","slope":1.0}},"lipschitz":1.0}},
            "replications":30,"seed":7,"slope_tolerance":{tolerance}}}"#
    )
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).env("LATTICE_SMOOTH_THREADS", "2").output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn rates_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rates.json", &rate_config(10.0));
    let out = run(&["rates", "--config", &cfg, "--out", "report", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("study,d,n,h,replicate,statistic,value\n"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["verdict"], "PASS");
    assert_eq!(json["points"].as_array().unwrap().len(), 4);
}

#[test]
fn identical_seeds_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rates.json", &rate_config(10.0));
    for (out, seed) in [("a", "99"), ("b", "99"), ("c", "100")] {
        let status = run(&["rates", "--config", &cfg, "--out", out, "--seed", seed, "--quiet"], dir.path()).status;
        assert_eq!(status.code(), Some(0));
    }
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn slope_outside_band_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rates.json", &rate_config(1e-9));
    let out = run(&["rates", "--config", &cfg, "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bias", "--config", "absent.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn invalid_invocations_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["bias", "--bogus"], dir.path()).status.code(), Some(1));
    let unknown_key = rate_config(10.0).replacen("\"seed\":7", "\"seed\":7,\"extra\":1", 1);
    let cfg = write_config(dir.path(), "bad.json", &unknown_key);
    assert_eq!(run(&["bias", "--config", &cfg], dir.path()).status.code(), Some(1));
    let too_few = rate_config(10.0).replacen("[128,256,512,1024]", "[128,256]", 1);
    let cfg = write_config(dir.path(), "few.json", &too_few);
    assert_eq!(run(&["rates", "--config", &cfg], dir.path()).status.code(), Some(1));
}

#[test]
fn output_may_not_overwrite_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", &rate_config(10.0));
    let out = run(&["bias", "--config", &cfg, "--out", "cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(dir.path().join("cfg.json")).unwrap(), rate_config(10.0));
}

#[test]
fn every_subcommand_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", &rate_config(10.0));
    for sub in ["simulate", "estimate", "bias", "variance", "conditions"] {
        let out = run(&[sub, "--config", &cfg, "--out", sub, "--quiet"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("{sub}.json")).exists(), "{sub}");
    }
    let query = write_config(dir.path(), "orlicz.json", r#"{"marginal":{"law":"gaussian","sigma":1.0},"q":1.0,"alpha":0.1,"p":4.0}"#);
    let out = run(&["orlicz", "--config", &query], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let json_start = stdout.find('{').unwrap();
    let answer: serde_json::Value = serde_json::from_str(&stdout[json_start..]).unwrap();
    assert!((answer["luxemburg"].as_f64().unwrap() - (8.0f64 / 3.0).sqrt()).abs() < 1e-6);
}
