//! Frequency sweeps toward the nonrelativistic limit: branch tracking,
//! rescaled limits `λ/(m² − ω²)`, comparison with the NLS linearization and
//! per-frequency stability verdicts.

mod track;

pub use track::{track, BranchPoint, BranchTrace, TrackOptions};

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evans::{locate_zeros, winding, Contour, EvansOptions, EvansScan, ScanOptions, ZeroCluster};
use crate::exec::{map_slice, Execution};
use crate::grid::Grid1D;
use crate::linearize::{assemble_nls_linearization, nls_essential_bands};
use crate::profiles::{nls_ground_state, scaled_grid, solve_family, vk_derivative, Nonlinearity, NewtonOptions, VkReport, WaveFamily};
use crate::spectra::{classify, eigensolve, spectrum_of_wave, ClassifyOptions, EigenOptions, Label, SpectrumResult};

/// How each frequency's grid is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridPolicy {
    /// `L = c_l/ε` with a fixed node count.
    Rescaled { c_l: f64, points: usize },
    Fixed { half_length: f64, points: usize },
}

impl GridPolicy {
    pub fn grid(&self, omega: f64, m: f64) -> Result<Grid1D> {
        match *self {
            GridPolicy::Rescaled { c_l, points } => scaled_grid(omega, m, c_l, points),
            GridPolicy::Fixed { half_length, points } => Grid1D::new(half_length, points),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub m: f64,
    pub nonlinearity: Nonlinearity,
    pub grid: GridPolicy,
    pub newton: NewtonOptions,
    pub eigen: EigenOptions,
    pub classify: ClassifyOptions,
    /// Seed each profile from the previous one (sequential).
    pub seeded: bool,
    pub exec: Execution,
}

impl SweepConfig {
    pub fn cubic(m: f64, points: usize) -> Self {
        Self {
            m,
            nonlinearity: Nonlinearity::power(1),
            grid: GridPolicy::Rescaled { c_l: 40.0, points },
            newton: NewtonOptions::default(),
            eigen: EigenOptions::default(),
            classify: ClassifyOptions::default(),
            seeded: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub family: WaveFamily,
    pub spectra: Vec<SpectrumResult>,
}

/// Solves the profiles and classified spectra at every frequency.
pub fn sweep(omegas: &[f64], cfg: &SweepConfig) -> Result<Sweep> {
    if omegas.is_empty() {
        return Err(Error::InvalidInput("empty frequency list".into()));
    }
    let family = solve_family(omegas, cfg.m, &cfg.nonlinearity, |w| cfg.grid.grid(w, cfg.m), &cfg.newton, cfg.seeded, cfg.exec)?;
    let exec = if cfg.seeded { Execution::Sequential } else { cfg.exec };
    let spectra = map_slice(exec, &family.waves, |w| spectrum_of_wave(w, &cfg.eigen, &cfg.classify)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Sweep { family, spectra })
}

/// Extrapolated `Λ_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledLimit {
    pub lambda_b: C64,
    /// Difference between the quadratic and linear extrapolants.
    pub error: f64,
    /// `(m² − ω², Λ)` samples used.
    pub samples: Vec<(f64, C64)>,
    /// Largest `|λ_max|/(m² − ω²)` over the whole branch (cluster members included).
    pub max_abs_rescaled: f64,
}

/// Polynomial extrapolation to `x = 0` through `(x_i, y_i)` (Neville).
fn extrapolate_to_zero(xs: &[f64], ys: &[C64]) -> C64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i] * xs[i + k] - p[i + 1] * xs[i]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

/// Richardson extrapolation of `Λ(ω)` in `ε² = m² − ω²` over the last three samples.
pub fn rescaled_limit(branch: &BranchTrace, m: f64) -> Result<RescaledLimit> {
    let pts = &branch.points;
    if pts.len() < 3 {
        return Err(Error::InsufficientFamily { len: pts.len() });
    }
    let eps2: Vec<f64> = pts.iter().map(|p| m * m - p.omega * p.omega).collect();
    let big: Vec<f64> = pts.iter().zip(&eps2).map(|(p, e)| p.lambda_max.norm() / e).collect();
    // Growth check: slope of log|Λ| against log ε² over the branch.
    let usable: Vec<(f64, f64)> = eps2.iter().zip(&big).filter(|(_, b)| **b > 0.0).map(|(e, b)| (e.ln(), b.ln())).collect();
    if usable.len() >= 2 && big.last().copied().unwrap_or(0.0) > 1e-2 {
        let n = usable.len() as f64;
        let (mx, my) = (usable.iter().map(|u| u.0).sum::<f64>() / n, usable.iter().map(|u| u.1).sum::<f64>() / n);
        let sxx: f64 = usable.iter().map(|u| (u.0 - mx).powi(2)).sum();
        let sxy: f64 = usable.iter().map(|u| (u.0 - mx) * (u.1 - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        if slope < -0.5 {
            return Err(Error::NotSmallBranch { slope });
        }
    }
    let tail = pts.len() - 3;
    let xs: Vec<f64> = eps2[tail..].to_vec();
    let ys: Vec<C64> = pts[tail..].iter().map(|p| p.rescaled).collect();
    let quad = extrapolate_to_zero(&xs, &ys);
    let lin = extrapolate_to_zero(&xs[1..], &ys[1..]);
    Ok(RescaledLimit {
        lambda_b: quad,
        error: (quad - lin).norm(),
        samples: xs.into_iter().zip(ys).collect(),
        max_abs_rescaled: big.iter().copied().fold(0.0, f64::max),
    })
}

/// Point spectra of the NLS linearization `𝕛𝕝` and of `l₋`.
#[derive(Clone, Debug)]
pub struct NlsReference {
    pub k: u32,
    pub m: f64,
    pub spectrum: SpectrumResult,
    /// Eigenvalues with `|λ| < kernel_radius`.
    pub kernel_cluster: usize,
    pub kernel_radius: f64,
    /// Point-labeled eigenvalues of `𝕛𝕝` outside the kernel cluster.
    pub nonzero_points: Vec<C64>,
    /// Eigenvalues of `l₋` below its continuum `1/(2m)` with localized eigenvectors.
    pub l_minus_points: Vec<f64>,
}

pub fn nls_reference(k: u32, m: f64, grid: &Grid1D, eig: &EigenOptions, cls: &ClassifyOptions, kernel_radius: f64) -> Result<NlsReference> {
    let profile = nls_ground_state(1, k, m, grid.half_length, grid.points)?;
    let lin = assemble_nls_linearization(&profile, m, k, grid)?;
    let spectrum = classify(eigensolve(&lin.jl, eig)?, nls_essential_bands(m), cls);
    let kernel_cluster = spectrum.zero_cluster(kernel_radius).len();
    let nonzero_points = spectrum.with_label(Label::Point).map(|p| p.lambda).filter(|l| l.norm() >= kernel_radius).collect();
    let lm = eigensolve(&lin.l_minus, eig)?;
    let edge = 0.5 / m;
    let l_minus_points =
        lm.pairs.iter().filter(|p| p.rho < cls.rho_loc && p.lambda.re < edge - cls.tol_band).map(|p| p.lambda.re).collect();
    Ok(NlsReference { k, m, spectrum, kernel_cluster, kernel_radius, nonzero_points, l_minus_points })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NlsVerdict {
    InNlsSpectrum,
    InLMinusSpectrum,
    Violation,
}

/// Locates `Λ_b` in the point spectra of the reference (kernel included).
pub fn compare_nls(lambda_b: C64, reference: &NlsReference, tol: f64) -> NlsVerdict {
    let in_jl = lambda_b.norm() <= tol.max(reference.kernel_radius) && reference.kernel_cluster > 0
        || reference.nonzero_points.iter().any(|p| (p - lambda_b).norm() <= tol);
    if in_jl {
        return NlsVerdict::InNlsSpectrum;
    }
    if reference.l_minus_points.iter().any(|&p| (C64::new(p, 0.0) - lambda_b).norm() <= tol) {
        return NlsVerdict::InLMinusSpectrum;
    }
    NlsVerdict::Violation
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    /// `Re λ` above which a point eigenvalue counts as unstable.
    pub tol: f64,
    /// Right half-plane rectangle `[re0, re1] × [−im, im]`.
    pub re0: f64,
    pub re1: f64,
    pub im: f64,
    /// Radius of the Evans confirmation circles around grid eigenvalues.
    pub confirm_radius: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self { tol: 1e-6, re0: 1e-3, re1: 3.0, im: 3.0, confirm_radius: 1e-2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub omega: f64,
    pub verdict: Verdict,
    /// Point-labeled grid eigenvalues with `Re λ > tol`.
    pub grid_unstable: Vec<C64>,
    /// Right half-plane zero count of the Evans function.
    pub evans_winding: i64,
    pub evans_converged: bool,
    /// Evans zeros located around each grid eigenvalue inside the rectangle.
    pub evans_confirmations: Vec<ZeroCluster>,
    pub reason: String,
}

/// Combines grid and Evans evidence for one frequency.
pub fn stability_verdict(spectrum: &SpectrumResult, scan: &EvansScan, confirmations: Vec<ZeroCluster>, opts: &StabilityOptions) -> StabilityVerdict {
    let omega = spectrum.omega.unwrap_or(0.0);
    let grid_unstable: Vec<C64> = spectrum.unstable(opts.tol).iter().map(|p| p.lambda).collect();
    let inside = grid_unstable.iter().filter(|l| l.re > opts.re0 && l.re < opts.re1 && l.im.abs() < opts.im).count() as i64;
    let (verdict, reason) = if !scan.converged {
        (Verdict::Inconclusive, "Evans scan did not meet its argument-step bound".to_string())
    } else if grid_unstable.is_empty() && scan.winding == 0 {
        (Verdict::Stable, "no unstable grid eigenvalue; Evans winding 0".to_string())
    } else if !grid_unstable.is_empty() && inside == scan.winding && confirmations.iter().all(|z| z.count >= 1) {
        (Verdict::Unstable, format!("{} unstable eigenvalues on the grid, Evans winding {}", grid_unstable.len(), scan.winding))
    } else {
        (
            Verdict::Inconclusive,
            format!("grid reports {} unstable eigenvalues ({inside} inside the contour), Evans winding {}", grid_unstable.len(), scan.winding),
        )
    };
    StabilityVerdict {
        omega,
        verdict,
        grid_unstable,
        evans_winding: scan.winding,
        evans_converged: scan.converged,
        evans_confirmations: confirmations,
        reason,
    }
}

/// Runs the Evans scan and confirmations for every member of a sweep.
pub fn stability_report(sw: &Sweep, evans: EvansOptions, scan: ScanOptions, opts: &StabilityOptions) -> Result<Vec<StabilityVerdict>> {
    let rect = Contour::rectangle(opts.re0, opts.re1, -opts.im, opts.im);
    sw.family
        .waves
        .iter()
        .zip(&sw.spectra)
        .map(|(wave, s)| {
            let sc = winding(&rect, wave, evans, scan)?;
            let confirmations = s
                .unstable(opts.tol)
                .iter()
                .filter(|p| p.lambda.re > opts.re0 + opts.confirm_radius)
                .map(|p| locate_zeros(p.lambda, opts.confirm_radius, wave, evans, scan))
                .collect::<Result<Vec<_>>>()?;
            Ok(stability_verdict(s, &sc, confirmations, opts))
        })
        .collect()
}

/// Sign of `∂_ω Q` along the family and whether any zero cluster split off the axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VkMonitor {
    pub report: VkReport,
    pub sign: i8,
    /// Frequencies at which the zero cluster contains an eigenvalue with `|Re λ| > tol`.
    pub real_splitting: Vec<f64>,
}

pub fn vk_monitor(sw: &Sweep, cluster_radius: f64, tol: f64) -> Result<VkMonitor> {
    let report = vk_derivative(&sw.family)?;
    let real_splitting = sw
        .spectra
        .iter()
        .filter(|s| s.zero_cluster(cluster_radius).iter().any(|p| p.lambda.re.abs() > tol))
        .map(|s| s.omega.unwrap_or(0.0))
        .collect();
    Ok(VkMonitor { sign: report.sign(), report, real_splitting })
}

/// `branch,omega,...` rows, one per branch point.
pub fn branches_csv(branches: &[BranchTrace]) -> String {
    let mut out = String::from(
        "branch,omega[1/time],re_lambda[1/time],im_lambda[1/time],re_Lambda[dimensionless],im_Lambda[dimensionless],multiplicity,spread[1/time],label,matched\n",
    );
    for b in branches {
        for p in &b.points {
            let _ = writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{},{}",
                b.id,
                p.omega,
                p.lambda.re,
                p.lambda.im,
                p.rescaled.re,
                p.rescaled.im,
                p.multiplicity,
                p.spread,
                p.label.as_str(),
                p.matched
            );
        }
    }
    out
}
