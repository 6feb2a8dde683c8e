//! Constant-coefficient limit of the first-order system `ζ' = A(x, λ)ζ`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::RealifiedRep;
use crate::error::{Error, Result};

/// Eigenvalues of `A_∞(λ)` with multiplicity, split by the sign of their real part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRates {
    pub lambda: C64,
    pub omega: f64,
    pub m: f64,
    /// `2N` rates: `±κ₊` then `±κ₋`, each repeated `N/2` times.
    pub rates: Vec<C64>,
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
}

impl AsymptoticRates {
    /// Decaying directions at `+∞` equal growing ones at `−∞`, with no neutral rates.
    pub fn is_hyperbolic(&self) -> bool {
        self.n_zero == 0 && self.n_minus == self.n_plus
    }
}

pub const RATE_TOL: f64 = 1e-12;

/// `κ_c(λ) = √(m² − (ω − cλ)²)` on the `𝕁 = c` eigenspace, principal branch (`Re κ ≥ 0`).
pub fn kappa(lambda: C64, omega: f64, m: f64, c: C64) -> C64 {
    let z = omega - c * lambda;
    ((m - z) * (m + z)).sqrt()
}

/// Closed-form rates `±√(m² − (ω ∓ iλ)²)` for a spinor dimension `dim`.
///
/// A rate counts as neutral when `|Re μ| ≤ 1e-12` or when `|μ²|` is below
/// `1e-12·max(m², |ω ∓ iλ|²)`; the second test catches thresholds, where
/// rounding in `μ²` alone would leave `|μ| ≈ 1e-8`.
pub fn asymptotic_rates(lambda: C64, omega: f64, m: f64, dim: usize) -> AsymptoticRates {
    let half = dim / 2;
    let mut rates = Vec::with_capacity(2 * dim);
    let (mut n_minus, mut n_zero, mut n_plus) = (0, 0, 0);
    for c in [C64::i(), -C64::i()] {
        let z = omega - c * lambda;
        let k2 = (m - z) * (m + z);
        let k = k2.sqrt();
        let degenerate = k2.norm() <= RATE_TOL * (m * m).max(z.norm_sqr());
        for sign in [1.0, -1.0] {
            let mu = k * sign;
            for _ in 0..half {
                rates.push(mu);
                if degenerate || mu.re.abs() <= RATE_TOL {
                    n_zero += 1;
                } else if mu.re < 0.0 {
                    n_minus += 1;
                } else {
                    n_plus += 1;
                }
            }
        }
    }
    AsymptoticRates { lambda, omega, m, rates, n_minus, n_zero, n_plus }
}

/// One sample of the threshold certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSample {
    /// `λ = i·im_lambda`.
    pub im_lambda: f64,
    pub n_minus: usize,
    pub n_zero: usize,
    pub n_plus: usize,
    /// No rate decays at `+∞`, so no solution is square integrable.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCertificate {
    pub omega: f64,
    pub m: f64,
    /// `m + |ω|`.
    pub threshold: f64,
    pub lambda_max: f64,
    pub samples: Vec<CertificateSample>,
    pub holds: bool,
    /// The threshold itself has a neutral double rate and is never certified.
    pub threshold_degenerate: bool,
}

/// Samples `λ ∈ i(m+|ω|, Λ_max]` at `samples` equispaced points (the threshold
/// excluded) and checks that every rate is purely oscillatory.
pub fn threshold_certificate(omega: f64, m: f64, lambda_max: f64, samples: usize, dim: usize) -> Result<ThresholdCertificate> {
    let threshold = m + omega.abs();
    if !(lambda_max > threshold) || samples == 0 {
        return Err(Error::InvalidInput(format!("need lambda_max > m + |omega| = {threshold} and samples > 0")));
    }
    let out: Vec<CertificateSample> = (1..=samples)
        .map(|j| {
            let s = threshold + (lambda_max - threshold) * j as f64 / samples as f64;
            let r = asymptotic_rates(C64::new(0.0, s), omega, m, dim);
            CertificateSample { im_lambda: s, n_minus: r.n_minus, n_zero: r.n_zero, n_plus: r.n_plus, certified: r.n_minus == 0 }
        })
        .collect();
    let at = asymptotic_rates(C64::new(0.0, threshold), omega, m, dim);
    Ok(ThresholdCertificate {
        omega,
        m,
        threshold,
        lambda_max,
        holds: out.iter().all(|s| s.certified),
        samples: out,
        threshold_degenerate: at.n_zero > 0,
    })
}

/// `A_∞(λ) = dcoef·(m𝛃 − ω + λ𝕁)`, row-major complex.
pub fn a_infinity(rep: &RealifiedRep, lambda: C64, omega: f64, m: f64) -> Vec<C64> {
    let d = 2 * rep.dim;
    let dc = &rep.dcoef[0];
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    for a in 0..d {
        for b in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..d {
                let inner = m * rep.bbeta[(c, b)] - if c == b { omega } else { 0.0 };
                acc += dc[(a, c)] * (lambda * rep.j[(c, b)] + inner);
            }
            out[a * d + b] = acc;
        }
    }
    out
}
