//! Command dispatch. Each command writes its artifacts into `config.output`
//! and returns the list of files written.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use dirac_stab::clifford::default_rep_1d;
use dirac_stab::continuation::{
    branches_csv, compare_nls, nls_reference, rescaled_limit, stability_report, sweep, track, vk_monitor, GridPolicy,
    StabilityOptions, SweepConfig, TrackOptions,
};
use dirac_stab::error::{Error, Result};
use dirac_stab::evans::{scan_csv, winding, Contour, EvansOptions, ScanOptions};
use dirac_stab::exec::Execution;
use dirac_stab::grid::Grid1D;
use dirac_stab::profiles::{charge, decay_rate, nld_solitary_wave, scaled_grid, NewtonOptions, Nonlinearity, SolitaryWave};
use dirac_stab::spectra::{check_symmetry, spectrum_csv, spectrum_of_wave, verify_2omega, ClassifyOptions, EigenOptions, Label, SpectrumResult};
use dirac_stab::verify::{
    carleman_sample, carleman_samples, derrick_demo, hardy_sample, hardy_saturation, matrix_exp_bound, CarlemanOptions,
    DerrickParams, SampleFamily, Weight,
};

use crate::config::{Command, RunConfig, Suite};
use crate::plot::{plot_branches, plot_evans, plot_spectrum};

pub struct Outcome {
    pub files: Vec<PathBuf>,
}

struct Writer {
    dir: PathBuf,
    hash: String,
    files: Vec<PathBuf>,
}

impl Writer {
    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    /// Writes `{"config_hash": ..., <fields of value>}`.
    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
        let mut obj = serde_json::Map::new();
        obj.insert("config_hash".into(), Value::String(self.hash.clone()));
        match v.take() {
            Value::Object(map) => obj.extend(map),
            other => {
                obj.insert("result".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&Value::Object(obj)).map_err(|e| Error::Io(e.to_string()))?;
        self.text(name, &(text + "\n"))
    }
}

fn exec(cfg: &RunConfig) -> Execution {
    if cfg.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn grid_for(cfg: &RunConfig, omega: f64) -> Result<Grid1D> {
    if cfg.grid.auto_rescale {
        scaled_grid(omega, cfg.m, cfg.grid.c_l, cfg.grid.points)
    } else {
        Grid1D::new(cfg.grid.half_length, cfg.grid.points)
    }
}

fn newton(cfg: &RunConfig) -> NewtonOptions {
    NewtonOptions { tol: cfg.tolerances.tol_newton, ..NewtonOptions::default() }
}

fn eigen_opts(cfg: &RunConfig) -> EigenOptions {
    EigenOptions { exec: exec(cfg), ..EigenOptions::default() }
}

fn classify_opts(cfg: &RunConfig) -> ClassifyOptions {
    ClassifyOptions { rho_loc: cfg.tolerances.rho_loc, ..ClassifyOptions::default() }
}

fn evans_opts(cfg: &RunConfig) -> EvansOptions {
    EvansOptions { rtol: cfg.tolerances.evans_rtol, ..EvansOptions::default() }
}

fn scan_opts(cfg: &RunConfig) -> ScanOptions {
    ScanOptions { exec: exec(cfg), ..ScanOptions::default() }
}

fn wave(cfg: &RunConfig) -> Result<SolitaryWave> {
    let grid = grid_for(cfg, cfg.omega)?;
    nld_solitary_wave(cfg.omega, cfg.m, &Nonlinearity::power(cfg.k), &grid, &newton(cfg))
}

/// Validates, creates the output directory, echoes the config and runs.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::Io(format!("{}: {e}", cfg.output.display())))?;
    let mut w = Writer { dir: cfg.output.clone(), hash: cfg.hash(), files: Vec::new() };
    w.text("config.json", &(cfg.to_json() + "\n"))?;
    match cfg.command {
        Command::Profile => profile(cfg, &mut w)?,
        Command::Spectrum => spectrum(cfg, &mut w)?,
        Command::Sweep => run_sweep(cfg, &mut w)?,
        Command::Evans => evans(cfg, &mut w)?,
        Command::Verify => verify(cfg, cfg.suite, &mut w)?,
        Command::Derrick => verify(cfg, Suite::Derrick, &mut w)?,
    }
    Ok(Outcome { files: w.files })
}

/// Machine-readable error report.
pub fn error_json(err: &Error, config_hash: Option<&str>) -> String {
    let mut v = json!({ "error": err.kind(), "message": err.to_string() });
    if let Error::ConfigInvalid { path, .. } = err {
        v["path"] = Value::String(path.clone());
    }
    if let Some(h) = config_hash {
        v["config_hash"] = Value::String(h.to_string());
    }
    serde_json::to_string_pretty(&v).expect("error serializes") + "\n"
}

/// Writes `error.json` into `dir` when possible.
pub fn write_error(dir: &Path, err: &Error, config_hash: Option<&str>) {
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("error.json"), error_json(err, config_hash));
    }
}

pub fn profile_csv(wave: &SolitaryWave) -> String {
    let dim = wave.dim();
    let mut out = String::from("x[length]");
    for c in 0..dim {
        let _ = write!(out, ",re_phi{c}[amplitude],im_phi{c}[amplitude]");
    }
    out.push_str(",abs_phi[amplitude]\n");
    let mags = wave.magnitudes();
    for i in 0..wave.grid.points {
        let _ = write!(out, "{:.17e}", wave.grid.node(i));
        for z in wave.spinor(i) {
            let _ = write!(out, ",{:.17e},{:.17e}", z.re, z.im);
        }
        let _ = writeln!(out, ",{:.17e}", mags[i]);
    }
    out
}

fn profile(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let wave = wave(cfg)?;
    let decay = decay_rate(&wave).ok();
    w.text("profile.csv", &profile_csv(&wave))?;
    w.json(
        "profile.json",
        &json!({
            "metadata": wave.metadata(),
            "charge": charge(&wave),
            "decay": decay,
            "expected_decay_rate": (cfg.m * cfg.m - cfg.omega * cfg.omega).sqrt(),
        }),
    )
}

fn label_counts(s: &SpectrumResult) -> Value {
    let count = |l: Label| s.with_label(l).count();
    json!({
        "point": count(Label::Point),
        "embedded-candidate": count(Label::EmbeddedCandidate),
        "threshold": count(Label::Threshold),
        "essential-artifact": count(Label::EssentialArtifact),
    })
}

fn spectrum(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let wave = wave(cfg)?;
    let s = spectrum_of_wave(&wave, &eigen_opts(cfg), &classify_opts(cfg))?;
    let two = verify_2omega(&wave, &wave.rep, &s)?;
    let sym = check_symmetry(&s.eigenvalues(), 1e-7);
    let zero: Vec<C64> = s.zero_cluster(cfg.tolerances.delta0).iter().map(|p| p.lambda).collect();
    let unstable: Vec<C64> = s.unstable(cfg.tolerances.tol_eig).iter().map(|p| p.lambda).collect();
    w.text("spectrum.csv", &spectrum_csv(&s))?;
    w.text("spectrum.svg", &plot_spectrum(&s))?;
    w.json(
        "spectrum.json",
        &json!({
            "omega": cfg.omega,
            "grid": s.grid,
            "eigenvalues": s.pairs.len(),
            "labels": label_counts(&s),
            "max_residual": s.max_residual(),
            "zero_cluster": zero,
            "unstable_points": unstable,
            "two_omega": two,
            "symmetry": sym,
        }),
    )
}

fn evans(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let wave = wave(cfg)?;
    let c = &cfg.contour;
    let contour = Contour::rectangle(c.re0, c.re1, c.im0, c.im1);
    let scan = winding(&contour, &wave, evans_opts(cfg), scan_opts(cfg))?;
    w.text("evans.csv", &scan_csv(&scan))?;
    w.text("evans.svg", &plot_evans(&scan.values, scan.winding))?;
    w.json(
        "evans.json",
        &json!({
            "omega": cfg.omega,
            "contour": scan.contour,
            "winding": scan.winding,
            "sector_winding": scan.sector_winding,
            "converged": scan.converged,
            "samples": scan.lambdas.len(),
            "refinements": scan.refinements,
            "largest_jump": scan.largest_jump,
        }),
    )
}

fn run_sweep(cfg: &RunConfig, w: &mut Writer) -> Result<()> {
    let grid = if cfg.grid.auto_rescale {
        GridPolicy::Rescaled { c_l: cfg.grid.c_l, points: cfg.grid.points }
    } else {
        GridPolicy::Fixed { half_length: cfg.grid.half_length, points: cfg.grid.points }
    };
    let sc = SweepConfig {
        m: cfg.m,
        nonlinearity: Nonlinearity::power(cfg.k),
        grid,
        newton: newton(cfg),
        eigen: eigen_opts(cfg),
        classify: classify_opts(cfg),
        seeded: false,
        exec: exec(cfg),
    };
    let sw = sweep(&cfg.omegas, &sc)?;
    let topts = TrackOptions {
        matching_radius: cfg.tolerances.matching_radius,
        cluster_radius: cfg.tolerances.delta0,
        ..TrackOptions::default()
    };
    let branches = track(&sw.spectra, &topts);
    w.text("branches.csv", &branches_csv(&branches))?;
    w.text("branches_im.svg", &plot_branches(&branches, false))?;
    w.text("branches_re.svg", &plot_branches(&branches, true))?;

    let nls_grid = Grid1D::new(cfg.grid.c_l, cfg.grid.points)?;
    let reference = nls_reference(cfg.k, cfg.m, &nls_grid, &sc.eigen, &sc.classify, cfg.tolerances.delta0)?;
    let limits: Vec<Value> = branches
        .iter()
        .map(|b| match rescaled_limit(b, cfg.m) {
            Ok(r) => json!({
                "branch": b.id,
                "limit": r,
                "nls": compare_nls(r.lambda_b, &reference, 1e-4),
            }),
            Err(e) => json!({ "branch": b.id, "error": e.kind(), "message": e.to_string() }),
        })
        .collect();
    let vk = vk_monitor(&sw, cfg.tolerances.delta0, cfg.tolerances.tol_eig).ok();
    let verdicts = if cfg.stability {
        let so = StabilityOptions {
            tol: cfg.tolerances.tol_eig,
            re0: cfg.contour.re0,
            re1: cfg.contour.re1,
            im: cfg.contour.im1.abs().max(cfg.contour.im0.abs()),
            ..StabilityOptions::default()
        };
        Some(stability_report(&sw, evans_opts(cfg), scan_opts(cfg), &so)?)
    } else {
        None
    };
    w.json(
        "sweep.json",
        &json!({
            "omegas": cfg.omegas,
            "branches": branches.iter().map(|b| json!({
                "id": b.id,
                "born": b.born(),
                "died_after": b.died_after,
                "points": b.points.len(),
            })).collect::<Vec<_>>(),
            "rescaled_limits": limits,
            "nls_reference": {
                "kernel_cluster": reference.kernel_cluster,
                "nonzero_points": reference.nonzero_points,
                "l_minus_points": reference.l_minus_points,
            },
            "vk": vk,
            "stability": verdicts,
        }),
    )
}

fn verify(cfg: &RunConfig, suite: Suite, w: &mut Writer) -> Result<()> {
    let ex = exec(cfg);
    let name = format!("verify_{}.json", suite.as_str());
    match suite {
        Suite::Derrick => {
            let report = derrick_demo(DerrickParams::default(), Grid1D::new(20.0, 256)?)?;
            w.json(if cfg.command == Command::Derrick { "derrick.json" } else { &name }, &report)
        }
        Suite::Hardy => {
            let samples = SampleFamily::new(0.05, 20.0, 1).draw(cfg.seed, 100);
            let weights = [Weight::power(1.0), Weight::inverse_power(1.0), Weight::power(3.0), Weight::exponential(1.0)];
            let reports = weights.iter().map(|wt| hardy_sample(wt, &samples, ex)).collect::<Result<Vec<_>>>()?;
            let saturation = hardy_saturation(&Weight::power(1.0), &[2.0, 8.0, 32.0, 128.0])?;
            w.json(&name, &json!({ "reports": reports, "saturation_w_x": saturation }))
        }
        Suite::Matexp => {
            let xs: Vec<f64> = (0..=400).map(|i| -50.0 + 0.25 * i as f64).collect();
            let lambdas = [1.1, 1.5, 2.0, 5.0, 100.0, -2.0, 1.0, -1.0].map(|l| l * cfg.m);
            let report = matrix_exp_bound(&lambdas, cfg.m, &default_rep_1d(), &xs, ex)?;
            w.json(&name, &report)
        }
        Suite::Carleman => {
            let opts = CarlemanOptions { m: cfg.m, seed: cfg.seed, exec: ex, ..CarlemanOptions::default() };
            let rep = default_rep_1d();
            let samples = carleman_samples(&opts, rep.dim);
            let report = carleman_sample(&rep, &opts, &samples)?;
            w.json(&name, &json!({ "options": opts, "report": report }))
        }
    }
}
