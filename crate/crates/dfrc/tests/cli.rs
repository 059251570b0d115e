use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn smoke() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml")
}

fn dfrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfrc")).args(args).output().expect("binary runs")
}

fn run_into(experiment: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![experiment, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    dfrc(&args)
}

/// Every file under `dir`, keyed by relative path.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn write_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let base = std::fs::read_to_string(smoke()).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, format!("{base}{extra}")).unwrap();
    path
}

#[test]
fn every_experiment_exits_zero_and_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    for (experiment, csv) in [
        ("pareto", "pareto.csv"),
        ("se-vs-snr", "se_vs_snr.csv"),
        ("beampattern", "beampattern.csv"),
        ("doa", "doa.csv"),
        ("design", "design/metrics.csv"),
    ] {
        let out = tmp.path().join(experiment);
        let o = run_into(experiment, &smoke(), &out, &[]);
        assert!(o.status.success(), "{experiment}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(o.status.code(), Some(0));
        assert!(out.join(csv).is_file(), "{experiment} missing {csv}");
        assert!(out.join("manifest.toml").is_file());
        assert!(out.join("config.toml").is_file());
    }
}

#[test]
fn manifest_hashes_match_file_contents() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("se");
    assert!(run_into("se-vs-snr", &smoke(), &out, &[]).status.success());
    let manifest: toml::Value = std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();
    assert_eq!(manifest["experiment"].as_str(), Some("se-vs-snr"));
    let files = manifest["files"].as_array().unwrap();
    assert!(files.len() >= 4);
    for f in files {
        let name = f["name"].as_str().unwrap();
        let bytes = std::fs::read(out.join(name)).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str(), Some(hex.as_str()), "{name}");
    }
    // the emitted config reproduces the config hash
    let cfg = dfrc::ExperimentConfig::load(&out.join("config.toml")).unwrap();
    assert_eq!(manifest["config_hash"].as_str(), Some(cfg.hash().as_str()));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for experiment in ["pareto", "beampattern", "design"] {
        // same output dir: the resolved config.toml records it
        let out = tmp.path().join(experiment);
        assert!(run_into(experiment, &smoke(), &out, &[]).status.success());
        let first = snapshot(&out);
        assert!(run_into(experiment, &smoke(), &out, &["--jobs", "2"]).status.success());
        let second = snapshot(&out);
        assert_eq!(first.keys().collect::<Vec<_>>(), second.keys().collect::<Vec<_>>());
        for (name, bytes) in &first {
            assert!(second[name] == *bytes, "{experiment}: {} differs", name.display());
        }
    }
}

#[test]
fn seed_flag_replaces_seed_list() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("se");
    assert!(run_into("se-vs-snr", &smoke(), &out, &["--seed", "5"]).status.success());
    let text = std::fs::read_to_string(out.join("se_vs_snr_seeds.csv")).unwrap();
    let seeds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(seeds, ["5", "5"]);
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seeds = [5]"));
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cases = [
        write_config(tmp.path(), "unknown.toml", "dims.n_antennas = 3\n"),
        write_config(tmp.path(), "streams.toml", "dims.n_streams = 3\n"),
        write_config(tmp.path(), "weights.toml", "sweep.weights = []\n"),
        tmp.path().join("missing.toml"),
    ];
    for cfg in &cases {
        let o = run_into("design", cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "{}: {}", cfg.display(), String::from_utf8_lossy(&o.stderr));
    }
    let o = run_into("design", &smoke(), &out, &["--jobs", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = write_config(tmp.path(), "no-span.toml", "sweep.weights = [0.0, 0.5]\n");
    assert_eq!(run_into("pareto", &bad, &out, &[]).status.code(), Some(2));
}

#[test]
fn solver_failure_in_design_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "eps.toml", "solver.method = \"twostage\"\nscalarization.kind = \"epsilon\"\n");
    let o = run_into("design", &cfg, &tmp.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn sweep_records_failures_per_row() {
    // the two-stage leg of beampattern cannot run an epsilon-constraint
    // design; the sweep keeps going and records the failure
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "eps.toml", "scalarization.kind = \"epsilon\"\n");
    let out = tmp.path().join("o");
    let o = run_into("beampattern", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("beampattern_summary.csv")).unwrap();
    let two: Vec<&str> = text.lines().filter(|l| l.starts_with("twostage,")).collect();
    assert_eq!(two.len(), 2);
    assert!(two.iter().all(|l| l.contains("error")));
    assert!(text.lines().filter(|l| l.starts_with("admm,")).all(|l| !l.contains("error")));
}
