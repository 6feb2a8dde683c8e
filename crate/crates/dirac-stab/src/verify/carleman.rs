//! Sampled Carleman inequality for `D_m = -iα∂ + mβ` with `φ = τ|x|`, and
//! the Dirac-Hardy ratio recording.

use faer::Side;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{CMatrix, DiracRep};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};

use super::{linspace, loglog_slope, trapezoid, Envelope, InequalityReport, Sample, SampleFamily};

const NODES: usize = 8001;

/// Margin of the radial hypothesis for `φ = τr` (so `φ'' = 0`) in
/// dimension `n`: `τ²/2 - (n-1)²τ/r - 3n/(8r) - m/(8rτ)`.
pub fn rrrr_margin(r: f64, tau: f64, m: f64, n: usize) -> f64 {
    let n1 = (n as f64 - 1.0).powi(2);
    0.5 * tau * tau - n1 * tau / r - 3.0 * n as f64 / (8.0 * r) - m / (8.0 * r * tau)
}

/// `(D_m - λ)v = -iα v' + (mβ - λ)v`.
fn apply_dirac(alpha: &CMatrix, beta: &CMatrix, m: f64, lambda: f64, v: &[C64], dv: &[C64]) -> Vec<C64> {
    let d = v.len();
    (0..d)
        .map(|i| {
            let mut acc = -lambda * v[i];
            for j in 0..d {
                acc += C64::new(0.0, -1.0) * alpha[(i, j)] * dv[j] + m * beta[(i, j)] * v[j];
            }
            acc
        })
        .collect()
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanOptions {
    pub lambda: f64,
    pub m: f64,
    /// Values of `τ` checked for the inequality itself.
    pub taus: Vec<f64>,
    /// Values of `τ` used for the `RHS/LHS ~ τ^{1/2}` fit.
    pub slope_taus: Vec<f64>,
    /// Samples live in `R < |x| < R + support`.
    pub radius: f64,
    pub support: f64,
    pub samples: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for CarlemanOptions {
    fn default() -> Self {
        Self {
            lambda: 1.5,
            m: 1.0,
            taus: vec![1.0, 2.0, 4.0],
            slope_taus: vec![32.0, 64.0, 128.0, 256.0, 512.0],
            radius: 1.0,
            support: 4.0,
            samples: 100,
            seed: 7,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanReport {
    pub inequality: InequalityReport,
    /// `(τ, median RHS/LHS)` over the samples.
    pub gain: Vec<(f64, f64)>,
    /// Log-log slope of the median `RHS/LHS` against `τ`.
    pub tau_slope: f64,
}

/// Both sides of the inequality for one sample at one `τ`.
fn carleman_sides(rep: &DiracRep, lambda: f64, m: f64, tau: f64, s: &Sample) -> (f64, f64) {
    let (a, b) = s.support();
    let shift = tau * a.abs().max(b.abs());
    let xs = linspace(a, b, NODES);
    let coef_l = lambda * lambda - m * m + 0.5 * tau * tau;
    let mut lhs = Vec::with_capacity(NODES);
    let mut rhs = Vec::with_capacity(NODES);
    for &x in &xs {
        let r = x.abs();
        let w = (2.0 * (tau * r - shift)).exp();
        let (v, dv) = s.eval(x);
        let dv_l = apply_dirac(&rep.alpha[0], &rep.beta, m, lambda, &v, &dv);
        lhs.push(coef_l * w * norm_sqr(&v));
        let coef_r = 0.25 + 2.0 * lambda * lambda * r / tau + 2.0 * r * tau;
        rhs.push(coef_r * w * norm_sqr(&dv_l));
    }
    (trapezoid(&xs, &lhs).sqrt(), trapezoid(&xs, &rhs).sqrt())
}

fn check_hypothesis(lambda: f64, m: f64, tau: f64, s: &Sample) -> Result<()> {
    let (a, b) = s.support();
    let r_min = if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) };
    if lambda * lambda - m * m + 0.5 * tau * tau <= 0.0 {
        return Err(Error::HypothesisFails { r: r_min, reason: format!("lambda^2 - m^2 + tau^2/2 <= 0 at tau = {tau}") });
    }
    if r_min <= 0.0 || rrrr_margin(r_min, tau, m, 1) < 0.0 {
        return Err(Error::HypothesisFails {
            r: r_min,
            reason: format!("radial condition violated at tau = {tau} (margin {:e})", rrrr_margin(r_min, tau, m, 1)),
        });
    }
    Ok(())
}

/// Draws bump samples in `R < |x| < R + support`, mirrored to `x < 0` for
/// every other sample.
pub fn carleman_samples(opts: &CarlemanOptions, dim: usize) -> Vec<Sample> {
    let mut fam = SampleFamily::new(opts.radius, opts.radius + opts.support, dim);
    fam.gaussian_fraction = 0.0;
    let mut out = fam.draw(opts.seed, opts.samples);
    for s in out.iter_mut().skip(1).step_by(2) {
        for (env, _) in s.terms.iter_mut() {
            if let Envelope::Bump { center, width } = *env {
                *env = Envelope::Bump { center: -center, width };
            }
        }
    }
    out
}

/// Checks the Carleman inequality over `samples × taus` and fits the gain
/// exponent over `slope_taus`.
pub fn carleman_sample(rep: &DiracRep, opts: &CarlemanOptions, samples: &[Sample]) -> Result<CarlemanReport> {
    if rep.n != 1 {
        return Err(Error::InvalidInput("carleman suite is one-dimensional".into()));
    }
    for s in samples {
        for &tau in opts.taus.iter().chain(&opts.slope_taus) {
            check_hypothesis(opts.lambda, opts.m, tau, s)?;
        }
    }
    let jobs: Vec<(usize, f64)> = (0..samples.len())
        .flat_map(|i| opts.taus.iter().map(move |&t| (i, t)))
        .collect();
    let ratios = map_slice(opts.exec, &jobs, |&(i, tau)| {
        let (l, r) = carleman_sides(rep, opts.lambda, opts.m, tau, &samples[i]);
        (l / r, format!("tau={tau}, sample={}", samples[i].describe()))
    });
    let inequality = InequalityReport::from_ratios(
        &format!("carleman[lambda={}, m={}]", opts.lambda, opts.m),
        1.0,
        &ratios,
    );

    let gain_jobs: Vec<(usize, f64)> = opts
        .slope_taus
        .iter()
        .flat_map(|&t| (0..samples.len()).map(move |i| (i, t)))
        .collect();
    let gain_ratios = map_slice(opts.exec, &gain_jobs, |&(i, tau)| {
        let (l, r) = carleman_sides(rep, opts.lambda, opts.m, tau, &samples[i]);
        r / l
    });
    let gain: Vec<(f64, f64)> = opts
        .slope_taus
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let mut v = gain_ratios[k * samples.len()..(k + 1) * samples.len()].to_vec();
            v.sort_by(f64::total_cmp);
            (tau, v[v.len() / 2])
        })
        .collect();
    let tau_slope = if gain.len() >= 2 {
        loglog_slope(&gain.iter().map(|g| g.0).collect::<Vec<_>>(), &gain.iter().map(|g| g.1).collect::<Vec<_>>())
    } else {
        f64::NAN
    };
    Ok(CarlemanReport { inequality, gain, tau_slope })
}

/// Empirical `‖⟨x⟩^s u‖_{H¹} / ‖⟨x⟩^{s+1}(D_m - λ)u‖` over a rescaled family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracHardyReport {
    pub lambda: f64,
    pub s: f64,
    pub m: f64,
    /// Carrier wavenumber `√(λ² - m²)` (0 inside the gap).
    pub xi: f64,
    pub sigmas: Vec<f64>,
    /// Largest ratio over the family at each `σ`.
    pub worst_by_sigma: Vec<f64>,
    /// `max / min` of `worst_by_sigma`.
    pub variation: f64,
}

/// Samples are envelopes `χ(x/σ)` times the plane wave `e^{iξx} w` with
/// `(αξ + mβ)w = λw` when `|λ| > m`, so `(D_m - λ)u` only sees `χ'`.
pub fn dirac_hardy_ratio(
    lambda: f64,
    s: f64,
    m: f64,
    rep: &DiracRep,
    sigmas: &[f64],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<DiracHardyReport> {
    if (lambda.abs() - m).abs() <= 1e-12 * m.max(1.0) {
        return Err(Error::ThresholdLambda { lambda });
    }
    if s <= -0.5 {
        return Err(Error::InvalidInput(format!("weight exponent s = {s} must exceed -1/2")));
    }
    let dim = rep.dim;
    let alpha = &rep.alpha[0];
    let xi = if lambda.abs() > m { (lambda * lambda - m * m).sqrt() } else { 0.0 };
    let carrier: Vec<C64> = if lambda.abs() > m {
        let symbol = CMatrix::from_fn(dim, dim, |i, j| alpha[(i, j)] * xi + rep.beta[(i, j)] * m);
        let eig = symbol
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergenceQR { index: 0 })?;
        let k = (0..dim)
            .min_by(|&a, &b| (eig.S()[a].re - lambda).abs().total_cmp(&(eig.S()[b].re - lambda).abs()))
            .unwrap();
        (0..dim).map(|i| eig.U()[(i, k)]).collect()
    } else {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = C64::new(1.0, 0.0);
        v
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family: Vec<Sample> = SampleFamily::new(-5.0, 5.0, 1)
        .draw(rng.gen(), samples)
        .into_iter()
        .map(|smp| Sample {
            terms: smp
                .terms
                .into_iter()
                .map(|(env, c)| (env, carrier.iter().map(|w| w * c[0]).collect()))
                .collect(),
        })
        .collect();

    let jobs: Vec<(usize, f64)> = sigmas.iter().flat_map(|&sg| (0..family.len()).map(move |i| (i, sg))).collect();
    let ratios = map_slice(exec, &jobs, |&(i, sigma)| {
        let smp = Sample {
            terms: family[i].terms.iter().map(|(e, c)| (e.rescaled(sigma), c.clone())).collect(),
        };
        let (a, b) = smp.support();
        let xs = linspace(a, b, NODES);
        let mut num = Vec::with_capacity(NODES);
        let mut den = Vec::with_capacity(NODES);
        for &x in &xs {
            let (env, denv) = smp.eval(x);
            let phase = C64::new(0.0, xi * x).exp();
            let u: Vec<C64> = env.iter().map(|e| e * phase).collect();
            let du: Vec<C64> = env
                .iter()
                .zip(&denv)
                .map(|(e, de)| (de + C64::new(0.0, xi) * e) * phase)
                .collect();
            let jx = (1.0 + x * x).sqrt();
            let ws = jx.powf(s);
            let dws = s * x * jx.powf(s - 2.0);
            let f: f64 = ws * ws * norm_sqr(&u);
            let df: f64 = u.iter().zip(&du).map(|(u, du)| (dws * u + ws * du).norm_sqr()).sum();
            num.push(f + df);
            let lu = apply_dirac(alpha, &rep.beta, m, lambda, &u, &du);
            den.push(jx.powf(2.0 * (s + 1.0)) * norm_sqr(&lu));
        }
        (trapezoid(&xs, &num) / trapezoid(&xs, &den)).sqrt()
    });
    let worst_by_sigma: Vec<f64> = (0..sigmas.len())
        .map(|k| ratios[k * family.len()..(k + 1) * family.len()].iter().copied().fold(0.0, f64::max))
        .collect();
    let hi = worst_by_sigma.iter().copied().fold(0.0, f64::max);
    let lo = worst_by_sigma.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DiracHardyReport { lambda, s, m, xi, sigmas: sigmas.to_vec(), worst_by_sigma, variation: hi / lo })
}
