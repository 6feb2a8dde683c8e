use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use proptest::prelude::*;

use dirac_stab::grid::Grid1D;
use dirac_stab::linearize::OperatorKind;
use dirac_stab::spectra::SpectrumResult;
use dirac_stab::Error;
use dirac_stab_cli::args::Args;
use dirac_stab_cli::plot::plot_spectrum;
use dirac_stab_cli::{error_json, run, Command, RunConfig, Suite};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dirac-stab-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn omega_outside_the_gap_is_a_config_error() {
    let cfg = RunConfig { omega: 1.5, ..RunConfig::default() };
    match run(&cfg) {
        Err(Error::ConfigInvalid { path, .. }) => assert_eq!(path, "omega"),
        other => panic!("expected ConfigInvalid, got {:?}", other.map(|o| o.files)),
    }
    let bad = RunConfig { command: Command::Sweep, omegas: vec![0.9, 0.8], ..RunConfig::default() };
    assert!(matches!(bad.validate(), Err(Error::ConfigInvalid { path, .. }) if path == "omegas"));
    let e = Error::ConfigInvalid { path: "omega".into(), message: "x".into() };
    let v: serde_json::Value = serde_json::from_str(&error_json(&e, Some("abc"))).unwrap();
    assert_eq!(v["path"], "omega");
    assert_eq!(v["config_hash"], "abc");
}

#[test]
fn unknown_config_keys_are_rejected() {
    assert!(matches!(RunConfig::from_json(r#"{"omgea": 0.5}"#), Err(Error::ConfigInvalid { .. })));
}

#[test]
fn profile_run_writes_tagged_artifacts() {
    let out = scratch("profile");
    let cfg = RunConfig { omega: 0.9, output: out.clone(), ..RunConfig::default() };
    let files = run(&cfg).unwrap().files;
    assert_eq!(files.len(), 3);
    let csv = read(&out, "profile.csv");
    assert!(csv.lines().next().unwrap().starts_with("x[length],re_phi0[amplitude]"));
    assert_eq!(csv.lines().count(), 1 + cfg.grid.points);
    let meta: serde_json::Value = serde_json::from_str(&read(&out, "profile.json")).unwrap();
    assert_eq!(meta["config_hash"], cfg.hash());
    let mu = meta["decay"]["mu"].as_f64().unwrap();
    let eps = meta["expected_decay_rate"].as_f64().unwrap();
    assert!((mu - eps).abs() < 0.05 * eps);
    assert_eq!(RunConfig::from_json(&read(&out, "config.json")).unwrap(), cfg);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn sweep_without_stability_writes_one_row_per_branch_point() {
    let out = scratch("sweep");
    let cfg = RunConfig { command: Command::Sweep, stability: false, output: out.clone(), ..RunConfig::default() };
    run(&cfg).unwrap();
    let sweep: serde_json::Value = serde_json::from_str(&read(&out, "sweep.json")).unwrap();
    assert!(sweep["stability"].is_null());
    let points: u64 = sweep["branches"].as_array().unwrap().iter().map(|b| b["points"].as_u64().unwrap()).sum();
    assert_eq!(read(&out, "branches.csv").lines().count() as u64 - 1, points);
    assert!(read(&out, "branches_im.svg").contains("<polyline"));
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for (dir, sequential) in [(&a, false), (&b, true)] {
        let cfg = RunConfig { command: Command::Spectrum, omega: 0.9, grid: dirac_stab_cli::config::GridConfig { points: 128, ..Default::default() }, output: dir.clone(), sequential, ..RunConfig::default() };
        run(&cfg).unwrap();
    }
    for name in ["spectrum.csv", "spectrum.svg"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    for d in [a, b] {
        std::fs::remove_dir_all(d).unwrap();
    }
}

#[test]
fn verify_suites_write_reports() {
    let out = scratch("verify");
    for suite in [Suite::Derrick, Suite::Matexp] {
        let cfg = RunConfig { command: Command::Verify, suite, output: out.clone(), ..RunConfig::default() };
        run(&cfg).unwrap();
    }
    let m: serde_json::Value = serde_json::from_str(&read(&out, "verify_matexp.json")).unwrap();
    assert_eq!(m["inequality"]["pass"], true);
    let d: serde_json::Value = serde_json::from_str(&read(&out, "verify_derrick.json")).unwrap();
    assert!((d["min_eigenvalue"].as_f64().unwrap() + 3.0).abs() < 1e-4);
    std::fs::remove_dir_all(&out).unwrap();
}

#[test]
fn empty_spectrum_plots_axes_only() {
    let s = SpectrumResult {
        kind: OperatorKind::JL,
        grid: Grid1D::new(10.0, 16).unwrap(),
        block_dim: 4,
        op_norm: 0.0,
        omega: None,
        m: 1.0,
        pairs: vec![],
        bands: None,
    };
    let svg = plot_spectrum(&s);
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("<circle"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = scratch("override");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cfg.json");
    std::fs::write(&path, r#"{"omega": 0.7, "grid": {"points": 256}}"#).unwrap();
    let args = Args::try_parse_from(["dirac-stab", "spectrum", "--omega", "0.3", "--points", "64", "--c-l", "20", "--config", path.to_str().unwrap()]).unwrap();
    let cfg = args.resolve().unwrap();
    assert_eq!(cfg.command, Command::Spectrum);
    assert_eq!(cfg.omega, 0.7);
    assert_eq!(cfg.grid.points, 256);
    assert_eq!(cfg.grid.c_l, 20.0);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_exits_with_2_on_invalid_config() {
    let out = scratch("exit");
    let status = Process::new(env!("CARGO_BIN_EXE_dirac-stab"))
        .args(["profile", "--omega", "1.5", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&status.stderr).unwrap();
    assert_eq!(err["path"], "omega");
    assert!(out.join("error.json").exists());
    std::fs::remove_dir_all(&out).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_json_round_trips(omega in -0.99..0.99f64, points in 2usize..600, k in 1u32..4, seed in any::<u64>(), stability in any::<bool>(), radius in proptest::option::of(1e-6..1.0f64)) {
        let mut cfg = RunConfig { omega, k, seed, stability, ..RunConfig::default() };
        cfg.grid.points = 2 * points;
        cfg.tolerances.matching_radius = radius;
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }
}
