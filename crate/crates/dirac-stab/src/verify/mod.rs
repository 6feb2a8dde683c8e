//! Standalone numerical checks of the supporting analysis: the Derrick
//! instability demo and sampled inequality suites (Hardy, matrix exponential,
//! Carleman, Dirac-Hardy).
//!
//! Every suite draws its samples from a seeded [`ChaCha8Rng`], evaluates them
//! through [`crate::exec::map_slice`] and reduces to an [`InequalityReport`].

mod carleman;
mod derrick;
mod hardy;
mod matexp;

pub use carleman::{carleman_sample, carleman_samples, dirac_hardy_ratio, rrrr_margin, CarlemanOptions, CarlemanReport, DiracHardyReport};
pub use derrick::{derrick_demo, DerrickParams, DerrickReport};
pub use hardy::{hardy_sample, hardy_saturation, Weight};
pub use matexp::{expm, matrix_exp_bound, MatExpReport, ThresholdGrowth};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Slack allowed on a ratio before an inequality is declared violated.
pub const TOL_INEQ: f64 = 1e-8;

/// Outcome of a sampled inequality `LHS <= constant * RHS`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub samples: usize,
    /// `max LHS / (constant * RHS)` over all samples.
    pub worst_ratio: f64,
    pub pass: bool,
    pub constant: f64,
    pub tol: f64,
    /// Description of the sample attaining `worst_ratio`.
    pub worst_sample: Option<String>,
}

impl InequalityReport {
    /// Reduces per-sample ratios; `pass` is exactly `worst_ratio <= 1 + TOL_INEQ`.
    pub fn from_ratios(id: &str, constant: f64, ratios: &[(f64, String)]) -> Self {
        let worst = ratios
            .iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .cloned();
        let worst_ratio = worst.as_ref().map_or(0.0, |w| w.0);
        Self {
            id: id.to_string(),
            samples: ratios.len(),
            worst_ratio,
            pass: worst_ratio <= 1.0 + TOL_INEQ,
            constant,
            tol: TOL_INEQ,
            worst_sample: worst.map(|w| w.1),
        }
    }
}

/// Weight used by [`WeightedNorm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormWeight {
    /// `⟨x⟩^s`.
    Japanese { s: f64 },
    /// `e^{τ|x| - shift}`; the shift keeps large exponents finite.
    Exponential { tau: f64, shift: f64 },
}

impl NormWeight {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            NormWeight::Japanese { s } => (1.0 + x * x).powf(0.5 * s),
            NormWeight::Exponential { tau, shift } => (tau * x.abs() - shift).exp(),
        }
    }
}

/// Weighted `L²` norm of a sampled vector field by trapezoid quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub weight: NormWeight,
    pub nodes: usize,
    pub value: f64,
}

impl WeightedNorm {
    /// `values[i]` holds the components at `xs[i]`; `xs` must be uniform.
    pub fn compute(weight: NormWeight, xs: &[f64], values: &[Vec<C64>]) -> Self {
        let integrand: Vec<f64> = xs
            .iter()
            .zip(values)
            .map(|(&x, v)| weight.at(x).powi(2) * v.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .collect();
        Self { weight, nodes: xs.len(), value: trapezoid(xs, &integrand).sqrt() }
    }
}

/// Trapezoid rule on uniform nodes.
pub(crate) fn trapezoid(xs: &[f64], f: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    h * (inner + 0.5 * (f[0] + f[f.len() - 1]))
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + i as f64 * h).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Compactly supported (bump) or rapidly decaying (Gaussian) profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// `exp(-1/(1-t²))`, `t = (x - center)/width`.
    Bump { center: f64, width: f64 },
    /// `exp(-t²/2)`, `t = (x - center)/width`.
    Gaussian { center: f64, width: f64 },
}

/// Gaussians are treated as supported on `center ± GAUSS_CUT * width`.
pub const GAUSS_CUT: f64 = 9.0;

impl Envelope {
    /// Value and first derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Envelope::Bump { center, width } => {
                let t = (x - center) / width;
                if t.abs() >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - t * t;
                let b = (-1.0 / q).exp();
                (b, b * (-2.0 * t / (q * q)) / width)
            }
            Envelope::Gaussian { center, width } => {
                let t = (x - center) / width;
                let g = (-0.5 * t * t).exp();
                (g, -t * g / width)
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            Envelope::Bump { center, width } => (center - width, center + width),
            Envelope::Gaussian { center, width } => (center - GAUSS_CUT * width, center + GAUSS_CUT * width),
        }
    }

    pub fn rescaled(&self, sigma: f64) -> Self {
        match *self {
            Envelope::Bump { center, width } => Envelope::Bump { center: center * sigma, width: width * sigma },
            Envelope::Gaussian { center, width } => Envelope::Gaussian { center: center * sigma, width: width * sigma },
        }
    }
}

/// Finite sum `Σ envelope_j(x) c_j` with `c_j ∈ ℂ^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub terms: Vec<(Envelope, Vec<C64>)>,
}

impl Sample {
    pub fn dim(&self) -> usize {
        self.terms.first().map_or(0, |t| t.1.len())
    }

    pub fn support(&self) -> (f64, f64) {
        self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (e, _)| {
            let (a, b) = e.support();
            (acc.0.min(a), acc.1.max(b))
        })
    }

    /// Value and derivative at `x`.
    pub fn eval(&self, x: f64) -> (Vec<C64>, Vec<C64>) {
        let d = self.dim();
        let mut v = vec![C64::new(0.0, 0.0); d];
        let mut dv = vec![C64::new(0.0, 0.0); d];
        for (env, c) in &self.terms {
            let (e, de) = env.eval(x);
            for k in 0..d {
                v[k] += c[k] * e;
                dv[k] += c[k] * de;
            }
        }
        (v, dv)
    }

    pub fn describe(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

/// Recipe for random samples supported in `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFamily {
    pub lo: f64,
    pub hi: f64,
    pub dim: usize,
    pub max_terms: usize,
    /// Probability that a term is a Gaussian rather than a bump.
    pub gaussian_fraction: f64,
    /// Term widths lie in `[min_width, max_width] * (hi - lo)`.
    pub min_width: f64,
    pub max_width: f64,
}

impl SampleFamily {
    pub fn new(lo: f64, hi: f64, dim: usize) -> Self {
        Self { lo, hi, dim, max_terms: 3, gaussian_fraction: 0.3, min_width: 0.05, max_width: 0.5 }
    }

    /// Draws `count` samples from a ChaCha stream seeded by `seed`.
    pub fn draw(&self, seed: u64, count: usize) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = self.hi - self.lo;
        (0..count)
            .map(|_| {
                let terms = rng.gen_range(1..=self.max_terms.max(1));
                let terms = (0..terms)
                    .map(|_| {
                        let half = 0.5 * span * rng.gen_range(self.min_width..=self.max_width);
                        let gaussian = rng.gen_bool(self.gaussian_fraction);
                        let (reach, width) = if gaussian { (half, half / GAUSS_CUT) } else { (half, half) };
                        let center = rng.gen_range(self.lo + reach..=self.hi - reach);
                        let env = if gaussian {
                            Envelope::Gaussian { center, width }
                        } else {
                            Envelope::Bump { center, width }
                        };
                        let coef = (0..self.dim)
                            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                            .collect();
                        (env, coef)
                    })
                    .collect();
                Sample { terms }
            })
            .collect()
    }
}
