use std::fs;
use std::path::Path;
use std::process::Command;

use kwise_lab::Config;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kwise-lab"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = "[grid]\nrmax = 20.0\nn = 1200\n[sweep]\nbetas = [-1.0, -10.0]\n";

#[test]
fn defaults_subcommand_writes_a_loadable_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("defaults.toml");
    let status = lab().args(["defaults", "--out"]).arg(&path).status().unwrap();
    assert!(status.success());
    assert_eq!(Config::load(&path).unwrap(), Config::default());
}

#[test]
fn config_errors_exit_with_two_and_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[params]\nd = 2\nq = \"two\"\n");
    let out = lab()
        .args(["scalar", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");

    let cfg = write(dir.path(), "bad2.toml", "[sweep]\nbetas = [-1.0, 5.0]\n");
    let out = lab().args(["sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
}

#[test]
fn solver_failures_in_required_steps_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "coarse.toml", "[grid]\nrmax = 1.0\nn = 16\n");
    let out = lab()
        .args(["limit", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

fn run_to(experiment: &str, cfg: &Path, out: &Path, jobs: &str) {
    let run = lab()
        .args([experiment, "--config"])
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(["--seed", "11", "--jobs", jobs])
        .output()
        .unwrap();
    assert!(run.status.success(), "{experiment}");
}

fn csv_bodies(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "dat"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    for experiment in ["scalar", "limit", "sweep"] {
        let a = dir.path().join(format!("{experiment}-a"));
        let b = dir.path().join(format!("{experiment}-b"));
        run_to(experiment, &cfg, &a, "1");
        run_to(experiment, &cfg, &b, "3");
        let (ca, cb) = (csv_bodies(&a), csv_bodies(&b));
        assert!(!ca.is_empty());
        assert_eq!(ca, cb, "{experiment}");
    }
}

#[test]
fn sidecar_echoes_the_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("o");
    run_to("scalar", &cfg, &out, "2");
    let text = fs::read_to_string(out.join("scalar.meta.toml")).unwrap();
    let table: toml::Table = text.parse().unwrap();
    assert_eq!(table["meta"]["experiment"].as_str(), Some("scalar"));
    assert_eq!(table["meta"]["seeds"].as_array().unwrap()[0].as_integer(), Some(11));
    assert_eq!(table["grid"]["n"].as_integer(), Some(1200));
    assert!(table["meta"]["wall_time_s"].as_float().is_some());
    // the echoed configuration is itself a valid config
    let mut echoed = table.clone();
    echoed.remove("meta");
    let cfg: Config = Config::parse(&toml::to_string(&echoed).unwrap()).unwrap();
    assert_eq!(cfg.run.seeds, vec![11]);
}

#[test]
fn scalar_csv_reports_the_soliton_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let run = lab().args(["scalar", "--out"]).arg(&out).output().unwrap();
    assert!(run.status.success());
    let mut rdr = csv::Reader::from_path(out.join("scalar.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "soliton_max_err").unwrap();
    let first = rdr.records().next().unwrap().unwrap();
    let err: f64 = first[col].parse().unwrap();
    assert!(err < 1e-4, "{err}");
}
