//! End-to-end runs of the binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_levy-spde"));
    c.args(args).env_remove("LEVY_SPDE_OUT");
    if let Some(p) = env_out {
        c.env("LEVY_SPDE_OUT", p);
    }
    c.output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("levy-spde-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_symbols_run_writes_psi_csv() {
    let d = scratch("minimal");
    let cfg = write(&d, "seed = 1\nsuites = [\"symbols\"]\n");
    let out = d.join("out");
    let o = bin(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("symbols.csv")).unwrap();
    assert!(csv.starts_with("# schema: levy-spde/symbols/v1\nxi0,xi1,re_psi,im_psi,oracle\n"));
    assert_eq!(csv.lines().count(), 2 + 256);
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    for key in ["seed = 1", "resolved_base = 2", "n_high = 8000", "[config.cz]", "angles = 64", "c0 = 4.0"] {
        assert!(manifest.contains(key), "manifest lacks {key}");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("symbols,pass,"));
}

#[test]
fn seed_flag_overrides_and_env_sets_output() {
    let d = scratch("seed");
    let cfg = write(&d, "seed = 1\nsuites = [\"noise\"]\n[ensemble]\nisometry = 200\n");
    let o = bin(&["run", cfg.to_str().unwrap(), "--seed", "99"], Some(&d.join("env")));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = std::fs::read_to_string(d.join("env").join("manifest.toml")).unwrap();
    assert!(manifest.starts_with("package = \"levy-spde\""));
    assert!(manifest.contains("seed = 99"));
}

#[test]
fn wrong_scaling_is_a_prerequisite_error() {
    let d = scratch("prereq");
    let cfg = write(&d, "seed = 1\nsuites = [\"t1\"]\n[measure]\nsigma = 0.5\n[scaling]\nkind = \"power\"\nexponent = 2.0\n");
    let o = bin(&["run", cfg.to_str().unwrap(), "--out", d.join("out").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("SuitePrereqError") && err.contains("DominationFailed"), "{err}");
}

#[test]
fn config_errors_name_line_or_field() {
    let d = scratch("cfgerr");
    let cfg = write(&d, "seed = 1\nsuites = [\"symbols\"]\n[grid]\nn = 100\n");
    let o = bin(&["run", cfg.to_str().unwrap(), "--out", d.join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.n"));
    let cfg = write(&d, "seed = 1\nsuites = [\"symbols\"]\nbogus = 3\n");
    let o = bin(&["run", cfg.to_str().unwrap(), "--out", d.join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = bin(&["run", d.join("missing.toml").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn catalogue_lists_anchors_and_rejects_unknown_queries() {
    let o = bin(&["list-suites"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for id in ["symbols", "densities", "spaces", "noise", "solver", "t1", "hormander", "cz"] {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
    assert!(text.contains("Hormander condition"));
    assert!(text.contains("Fefferman-Stein"));
    let o = bin(&["list-suites", "hormandr"], None);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did you mean: hormander"));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let d = scratch("determinism");
    let cfg = write(
        &d,
        "seed = 3\nsuites = [\"noise\", \"solver\", \"t1\", \"cz\"]\n[ensemble]\nn_low = 32\nn_high = 64\nisometry = 300\n[cz]\nresolutions = [16]\nfields = 4\n",
    );
    let mut dirs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let out = d.join(name);
        let o = bin(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads], None);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        dirs.push(out);
    }
    let mut names: Vec<_> = std::fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 6);
    for n in names {
        assert_eq!(std::fs::read(dirs[0].join(&n)).unwrap(), std::fs::read(dirs[1].join(&n)).unwrap(), "{n:?} differs");
    }
}
