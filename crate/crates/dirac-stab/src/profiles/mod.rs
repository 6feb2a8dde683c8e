//! Solitary-wave profiles: NLS ground states, NLD waves, charges and decay.

mod decay;
mod nld;
mod nls;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::{DiracRep, Embedding};
use crate::grid::Grid1D;

pub use decay::{charge, charge_of_samples, decay_rate, decay_rate_of_vector, vk_derivative, vk_derivative_samples, DecayFit, VkReport};
pub use nld::{nld_solitary_wave, nld_solitary_wave_seeded, scaled_grid, solve_family, NewtonOptions};
pub use nls::{nls_ground_state, nls_ground_state_1d_exact, RadialProfile};

/// Scalar nonlinearity `f(s)` of the self-interaction `f(φ*βφ)βφ`, given by
/// value and derivative callbacks. The default is the pure power `s^k`.
#[derive(Clone)]
pub struct Nonlinearity {
    pub k: u32,
    pub label: String,
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Nonlinearity {
    pub fn power(k: u32) -> Self {
        assert!(k >= 1, "power must be positive");
        Self {
            k,
            label: format!("s^{k}"),
            value: Arc::new(move |s: f64| s.powi(k as i32)),
            derivative: Arc::new(move |s: f64| k as f64 * s.powi(k as i32 - 1)),
        }
    }

    /// Arbitrary `f` with leading power `k` (only `k` enters the asymptotic ansatz).
    pub fn custom<F, D>(k: u32, label: impl Into<String>, value: F, derivative: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { k, label: label.into(), value: Arc::new(value), derivative: Arc::new(derivative) }
    }

    /// Same `f`, but the derivative entering the linearization is multiplied
    /// by `gain`. With `gain != 1` the linearization no longer matches the
    /// nonlinear problem; used to plant instabilities in tests.
    pub fn with_derivative_gain(&self, gain: f64) -> Self {
        let d = self.derivative.clone();
        Self {
            k: self.k,
            label: format!("{} (f' x {gain})", self.label),
            value: self.value.clone(),
            derivative: Arc::new(move |s| gain * d(s)),
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        (self.value)(s)
    }

    pub fn df(&self, s: f64) -> f64 {
        (self.derivative)(s)
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonlinearity({})", self.label)
    }
}

/// Profile `φ_ω` sampled on a periodic grid, node-major (`samples[i*N + c]`).
#[derive(Clone, Debug)]
pub struct SolitaryWave {
    pub omega: f64,
    pub m: f64,
    pub nonlinearity: Nonlinearity,
    pub grid: Grid1D,
    pub rep: DiracRep,
    pub samples: Vec<C64>,
    pub residual_norm: f64,
    /// Residual sup-norm after each accepted Newton step.
    pub residual_history: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SolitaryWave {
    pub fn dim(&self) -> usize {
        self.rep.dim
    }

    pub fn k(&self) -> u32 {
        self.nonlinearity.k
    }

    pub fn eps(&self) -> f64 {
        (self.m * self.m - self.omega * self.omega).sqrt()
    }

    pub fn spinor(&self, i: usize) -> &[C64] {
        let d = self.dim();
        &self.samples[i * d..(i + 1) * d]
    }

    /// `(Re φ, Im φ)` at node `i`.
    pub fn realified(&self, i: usize) -> Vec<f64> {
        let s = self.spinor(i);
        s.iter().map(|z| z.re).chain(s.iter().map(|z| z.im)).collect()
    }

    fn beta_split(&self, sign: f64) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); self.samples.len()];
        for i in 0..self.grid.points {
            for a in 0..d {
                let mut bv = C64::new(0.0, 0.0);
                for b in 0..d {
                    bv += self.rep.beta[(a, b)] * self.samples[i * d + b];
                }
                out[i * d + a] = 0.5 * (self.samples[i * d + a] + sign * bv);
            }
        }
        out
    }

    /// `φ_P = ½(1 + β)φ`.
    pub fn particle(&self) -> Vec<C64> {
        self.beta_split(1.0)
    }

    /// `φ_A = ½(1 − β)φ`.
    pub fn antiparticle(&self) -> Vec<C64> {
        self.beta_split(-1.0)
    }

    /// Pointwise `|φ(x_i)|`.
    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.grid.points).map(|i| self.spinor(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }

    /// The same wave written in a larger representation through `E`.
    pub fn embed(&self, e: &Embedding) -> SolitaryWave {
        let (d, dd) = (self.dim(), e.big.dim);
        let mut samples = vec![C64::new(0.0, 0.0); self.grid.points * dd];
        for i in 0..self.grid.points {
            for a in 0..dd {
                samples[i * dd + a] = (0..d).map(|b| e.isometry[(a, b)] * self.samples[i * d + b]).sum();
            }
        }
        SolitaryWave { rep: e.big.clone(), samples, ..self.clone() }
    }

    /// The same wave with every sample scaled by `s` (no longer a solution for `s != 1`).
    pub fn scaled(&self, s: f64) -> SolitaryWave {
        SolitaryWave { samples: self.samples.iter().map(|z| z * s).collect(), ..self.clone() }
    }

    pub fn metadata(&self) -> WaveMetadata {
        WaveMetadata {
            omega: self.omega,
            m: self.m,
            k: self.k(),
            eps: self.eps(),
            nonlinearity: self.nonlinearity.label.clone(),
            representation: self.rep.label.clone(),
            grid: self.grid,
            residual_norm: self.residual_norm,
            newton_steps: self.residual_history.len(),
            charge: charge(self),
            warnings: self.warnings.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaveMetadata {
    pub omega: f64,
    pub m: f64,
    pub k: u32,
    pub eps: f64,
    pub nonlinearity: String,
    pub representation: String,
    pub grid: Grid1D,
    pub residual_norm: f64,
    pub newton_steps: usize,
    pub charge: f64,
    pub warnings: Vec<String>,
}

/// Waves at increasing `ω` sharing `m` and the nonlinearity.
#[derive(Clone, Debug, Default)]
pub struct WaveFamily {
    pub waves: Vec<SolitaryWave>,
}

impl WaveFamily {
    pub fn omegas(&self) -> Vec<f64> {
        self.waves.iter().map(|w| w.omega).collect()
    }

    pub fn charges(&self) -> Vec<f64> {
        self.waves.iter().map(charge).collect()
    }

    /// Largest relative charge jump between neighbours.
    pub fn max_charge_jump(&self) -> f64 {
        let q = self.charges();
        q.windows(2).map(|w| (w[1] - w[0]).abs() / w[0].abs().max(w[1].abs())).fold(0.0, f64::max)
    }
}
