//! Derrick instability of the 1D wave-equation pulse.
//!
//! Stationary equation `θ'' = g(θ)` with `g(θ) = aθ - bθ³`, pulse
//! `θ = √(2a/b) sech(√a x)`, linearization `𝔩 = -∂² + g'(θ)`.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_kernel, Grid1D};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerrickParams {
    pub a: f64,
    pub b: f64,
}

impl Default for DerrickParams {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0 }
    }
}

impl DerrickParams {
    pub fn g(&self, t: f64) -> f64 {
        self.a * t - self.b * t.powi(3)
    }

    pub fn g_prime(&self, t: f64) -> f64 {
        self.a - 3.0 * self.b * t * t
    }

    /// Primitive `G` with `G(0) = 0`.
    pub fn g_primitive(&self, t: f64) -> f64 {
        0.5 * self.a * t * t - 0.25 * self.b * t.powi(4)
    }

    pub fn pulse(&self, x: f64) -> f64 {
        (2.0 * self.a / self.b).sqrt() / (self.a.sqrt() * x).cosh()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerrickReport {
    pub params: DerrickParams,
    pub grid: Grid1D,
    /// `T = ½∫θ'²`.
    pub kinetic: f64,
    /// `V = ∫G(θ)`.
    pub potential: f64,
    /// `(n-2)T + nV` at `n = 1`.
    pub dilation_residual: f64,
    /// Lowest eigenvalues of `𝔩`, ascending.
    pub lowest_eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    /// `√(-min_eigenvalue)`.
    pub growth_rate: f64,
    /// Largest real eigenvalue of `[[0, 1], [-𝔩, 0]]`.
    pub growth_rate_block: f64,
    /// `‖𝔩θ'‖ / ‖θ'‖`.
    pub translation_residual: f64,
    /// `max |θ'' - g(θ)|` on the grid.
    pub profile_residual: f64,
}

pub fn derrick_demo(params: DerrickParams, grid: Grid1D) -> Result<DerrickReport> {
    if !(params.a > 0.0 && params.b > 0.0) {
        return Err(Error::InvalidInput(format!("derrick needs a, b > 0, got {params:?}")));
    }
    let n = grid.points;
    let xs = grid.nodes();
    let theta: Vec<f64> = xs.iter().map(|&x| params.pulse(x)).collect();
    let d1 = grid.d1_kernel();
    let d2 = grid.d2_kernel();
    let dtheta = apply_kernel(&d1, &theta);
    let ddtheta = apply_kernel(&d2, &theta);

    let kinetic = 0.5 * grid.integrate(&dtheta.iter().map(|v| v * v).collect::<Vec<_>>());
    let potential = grid.integrate(&theta.iter().map(|&t| params.g_primitive(t)).collect::<Vec<_>>());
    let dilation_residual = -kinetic + potential;
    let profile_residual = ddtheta
        .iter()
        .zip(&theta)
        .map(|(dd, &t)| (dd - params.g(t)).abs())
        .fold(0.0, f64::max);

    let pot: Vec<f64> = theta.iter().map(|&t| params.g_prime(t)).collect();
    let mut ell = grid.diff2();
    for i in 0..n {
        for j in 0..n {
            ell[(i, j)] = -ell[(i, j)];
        }
        ell[(i, i)] += pot[i];
    }
    let eig = ell
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergenceQR { index: 0 })?;
    let min_eigenvalue = eig[0];
    let lowest_eigenvalues = eig.iter().take(4).copied().collect();

    let l_dtheta = apply_kernel(&d2, &dtheta);
    let res: f64 = l_dtheta
        .iter()
        .zip(&dtheta)
        .zip(&pot)
        .map(|((ld, d), p)| (-ld + p * d).powi(2))
        .sum();
    let norm: f64 = dtheta.iter().map(|d| d * d).sum();
    let translation_residual = (res / norm).sqrt();

    let mut block = Mat::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        block[(i, n + i)] = 1.0;
        for j in 0..n {
            block[(n + i, j)] = -ell[(i, j)];
        }
    }
    let evs = block
        .eigenvalues()
        .map_err(|_| Error::NoConvergenceQR { index: 1 })?;
    let growth_rate_block = evs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);

    Ok(DerrickReport {
        params,
        grid,
        kinetic,
        potential,
        dilation_residual,
        lowest_eigenvalues,
        min_eigenvalue,
        growth_rate: (-min_eigenvalue).max(0.0).sqrt(),
        growth_rate_block,
        translation_residual,
        profile_residual,
    })
}
