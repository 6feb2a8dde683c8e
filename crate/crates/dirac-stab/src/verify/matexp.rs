//! Operator-norm bound for `e^{M x}`, `M = iα(mβ - λ)`.
//!
//! For `|λ| > m` the bound is `C₁(λ) = √((|λ|+m)/(|λ|-m))`; at `|λ| = m`
//! the norm grows linearly and the fitted growth constant is reported.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::{identity, CMatrix, DiracRep};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};

use super::InequalityReport;

/// Matrix exponential by scaling and squaring with a degree-24 Taylor core.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.25 { (norm1 / 0.25).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let scaled = Mat::<C64>::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=24 {
        term = &term * &scaled;
        let inv = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] * inv);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn spectral_norm(a: &CMatrix) -> f64 {
    a.singular_values()
        .map(|s| s.into_iter().fold(0.0, f64::max))
        .unwrap_or(f64::NAN)
}

/// `M(λ) = iα(mβ - λ)` built from the first spatial Dirac matrix.
pub fn generator(rep: &DiracRep, lambda: f64, m: f64) -> CMatrix {
    let n = rep.dim;
    let alpha = &rep.alpha[0];
    let shifted = Mat::<C64>::from_fn(n, n, |i, j| {
        rep.beta[(i, j)] * m - if i == j { C64::new(lambda, 0.0) } else { C64::new(0.0, 0.0) }
    });
    let prod = alpha * &shifted;
    Mat::from_fn(n, n, |i, j| prod[(i, j)] * C64::new(0.0, 1.0))
}

/// Linear-growth fit at a threshold `|λ| = m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrowth {
    pub lambda: f64,
    /// `sup_x ‖e^{Mx}‖ / ⟨x⟩` over the samples.
    pub kappa: f64,
    /// Least-squares slope of `‖e^{Mx}‖` against `|x|` for `|x| ≥ 1`.
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatExpReport {
    pub inequality: InequalityReport,
    pub thresholds: Vec<ThresholdGrowth>,
    /// `(λ, sup_x ‖e^{Mx}‖)` for every non-threshold `λ`.
    pub sup_norms: Vec<(f64, f64)>,
}

/// Checks `sup_x ‖e^{M(λ)x}‖ ≤ C₁(λ)` for each `|λ| > m`; thresholds
/// `|λ| = m` get a [`ThresholdGrowth`] fit instead.
pub fn matrix_exp_bound(lambdas: &[f64], m: f64, rep: &DiracRep, xs: &[f64], exec: Execution) -> Result<MatExpReport> {
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!("mass {m} must be positive")));
    }
    for &l in lambdas {
        if l.abs() < m && (m - l.abs()) > 1e-12 * m {
            return Err(Error::InvalidInput(format!("|lambda| = {} is below m = {m}", l.abs())));
        }
    }
    let jobs: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| xs.iter().map(move |&x| (l, x))).collect();
    let norms = map_slice(exec, &jobs, |&(l, x)| {
        let g = generator(rep, l, m);
        let scaled = Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * x);
        spectral_norm(&expm(&scaled))
    });
    let mut ratios = Vec::new();
    let mut thresholds = Vec::new();
    let mut sup_norms = Vec::new();
    for (li, &l) in lambdas.iter().enumerate() {
        let block = &norms[li * xs.len()..(li + 1) * xs.len()];
        if (l.abs() - m).abs() <= 1e-12 * m {
            let kappa = xs
                .iter()
                .zip(block)
                .map(|(x, n)| n / (1.0 + x * x).sqrt())
                .fold(0.0, f64::max);
            let pts: Vec<(f64, f64)> = xs.iter().zip(block).filter(|(x, _)| x.abs() >= 1.0).map(|(x, n)| (x.abs(), *n)).collect();
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            thresholds.push(ThresholdGrowth { lambda: l, kappa, slope: sxy / sxx });
            continue;
        }
        let c1 = ((l.abs() + m) / (l.abs() - m)).sqrt();
        sup_norms.push((l, block.iter().copied().fold(0.0, f64::max)));
        for (x, n) in xs.iter().zip(block) {
            ratios.push((n / c1, format!("lambda={l}, x={x}, norm={n:.15e}, C1={c1:.15e}")));
        }
    }
    Ok(MatExpReport {
        inequality: InequalityReport::from_ratios(&format!("matrix_exp[m={m}]"), 1.0, &ratios),
        thresholds,
        sup_norms,
    })
}
