use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn critlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("run critlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn bracket(summary: &str) -> (f64, f64) {
    let inner = summary.split('[').nth(1).unwrap().split(']').next().unwrap();
    let mut it = inner.split(',').map(|s| s.trim().parse::<f64>().unwrap());
    (it.next().unwrap(), it.next().unwrap())
}

#[test]
fn gaussian_seminorms_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = critlab(&["seminorm", "--op", "free:3", "--data", "gaussian(1)", "--alpha", "0.4"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let r = rows(&dir.path().join("seminorm.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!((r[0][1].as_str(), r[0][4].as_str()), ("Finite", "Finite"));
    assert!(r[0][7].parse::<f64>().unwrap() < 1e-3);
    assert_eq!(r[0][8], "yes");
}

#[test]
fn bump_above_endpoint_diverges_on_both_routes() {
    let dir = tempfile::tempdir().unwrap();
    let o = critlab(&["seminorm", "--op", "free:3", "--data", "bump(0,2)", "--alpha", "0.8"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let r = rows(&dir.path().join("seminorm.csv"));
    assert_eq!((r[0][1].as_str(), r[0][4].as_str()), ("Divergent", "Divergent"));
}

#[test]
fn empty_alpha_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = critlab(&["seminorm", "--alpha", ""], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = critlab(&["seminorm", "--op", "free:0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = critlab(&["nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scan_brackets_the_endpoint() {
    for (op, sup, critical) in [("free1d", 0.25, true), ("free:4", 1.0, false), ("hardy:2:0", 0.5, true)] {
        let dir = tempfile::tempdir().unwrap();
        let o = critlab(&["scan", "--op", op], dir.path());
        assert!(o.status.success(), "{op}: {o:?}");
        let s = stdout(&o);
        let (lo, hi) = bracket(&s);
        assert!(lo <= sup && sup <= hi && hi - lo <= 0.02 + 1e-12, "{op}: [{lo}, {hi}]");
        assert_eq!(s.contains("verdict: Critical"), critical, "{op}: {s}");
        assert!(dir.path().join("scan.csv").exists());
    }
}

#[test]
fn wave_models_through_the_cli() {
    let cases = [
        ("free:3", "bump(0,2)", "Bounded"),
        ("hardy:3:-0.25", "bump(0.75,0.5)", "SqrtLog"),
        ("free1d", "bump(0,2)", "Power"),
    ];
    for (op, data, model) in cases {
        let dir = tempfile::tempdir().unwrap();
        let o = critlab(&["wave", "--op", op, "--data", data], dir.path());
        assert!(o.status.success(), "{op}: {o:?}");
        assert_eq!(rows(&dir.path().join("wave_fit.csv"))[0][0], model, "{op}");
        assert!(rows(&dir.path().join("wave.csv")).len() >= 90);
    }
}

#[test]
fn wave_guard_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = critlab(&["wave", "--op", "free:3", "--grid-m", "32"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn green_values_and_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let o = critlab(&["green", "--op", "free:3", "--alpha", "0.5,0.75"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let r = rows(&dir.path().join("green.csv"));
    let q: f64 = r[0][3].parse().unwrap();
    assert!((q * 4.0 * std::f64::consts::PI - 1.0).abs() < 1e-4);
    assert_eq!(r[1][2], "Divergent");
}

#[test]
fn transmutation_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let o = critlab(&["transmute", "--op", "hardy:3:1"], dir.path());
    assert!(o.status.success(), "{o:?}");
    let r = rows(&dir.path().join("transmute.csv"));
    assert_eq!(r.len(), 3);
    assert!(r.iter().all(|row| row[2].parse::<f64>().unwrap() < 1e-4));
}

#[test]
fn flags_override_config_and_manifest_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "op = free:2\ngrid_m = 256\n[seminorm]\nalpha = 0.1,0.2\ndata = gaussian(2)\n").unwrap();
    let out = dir.path().join("o");
    let o = critlab(&["seminorm", "--config", cfg.to_str().unwrap(), "--op", "free:3"], &out);
    assert!(o.status.success(), "{o:?}");
    let m = fs::read_to_string(out.join("manifest.txt")).unwrap();
    for line in ["op = free:3", "grid_m = 256", "alpha = 0.1,0.2", "data = gaussian(2)"] {
        assert!(m.lines().any(|l| l == line), "{line} missing from\n{m}");
    }
    assert_eq!(rows(&out.join("seminorm.csv")).len(), 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        assert!(critlab(&["scan", "--op", "hardy:3:1"], dir).status.success());
        assert!(critlab(&["wave", "--op", "free1d"], dir).status.success());
        assert_eq!(critlab(&["verify", "--grid-m", "16", "--seed", "7"], dir).status.code(), Some(3));
    }
    for f in ["scan.csv", "crosscheck.csv", "wave.csv", "wave_fit.csv", "report.txt"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn coarse_verify_reports_guards_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = critlab(&["verify", "--grid-m", "16"], dir.path());
    assert_ne!(o.status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("[GUARD]"), "{report}");
    assert_eq!(report.lines().count(), 11);
}
