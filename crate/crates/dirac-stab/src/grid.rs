//! Periodic Fourier grid, spectral differentiation, parity bases and
//! trigonometric interpolation.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated periodic grid on `[-L, L)` with nodes `x_i = -L + i h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub half_length: f64,
    pub points: usize,
}

impl Grid1D {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidInput(format!("grid half length {half_length} must be positive")));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::InvalidInput(format!("grid point count {points} must be even and >= 4")));
        }
        Ok(Self { half_length, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Index of the node at `-x_i` (mod the period).
    pub fn mirror(&self, i: usize) -> usize {
        (self.points - i) % self.points
    }

    /// Index of `x = 0`.
    pub fn origin(&self) -> usize {
        self.points / 2
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let scale = PI / self.half_length;
        (0..n)
            .map(|j| {
                let jj = if j <= n / 2 { j } else { j - n };
                jj as f64 * scale
            })
            .collect()
    }

    /// First-derivative kernel by offset: `D[i][j] = d1[(i - j) mod N]`.
    pub fn d1_kernel(&self) -> Vec<f64> {
        let n = self.points;
        let scale = PI / self.half_length;
        let half: Vec<f64> = (0..=n / 2)
            .map(|k| {
                if k == 0 || k == n / 2 {
                    0.0
                } else {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    0.5 * sign / (k as f64 * PI / n as f64).tan() * scale
                }
            })
            .collect();
        // Mirror so that skew-symmetry is exact in floating point.
        (0..n).map(|k| if k <= n / 2 { half[k] } else { -half[n - k] }).collect()
    }

    /// Second-derivative kernel by offset (exact symbol `-xi^2`, including Nyquist).
    pub fn d2_kernel(&self) -> Vec<f64> {
        let n = self.points;
        let nf = n as f64;
        let scale = (PI / self.half_length).powi(2);
        let half: Vec<f64> = (0..=n / 2)
            .map(|k| {
                if k == 0 {
                    -(nf * nf / 12.0 + 1.0 / 6.0) * scale
                } else {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let s = (k as f64 * PI / nf).sin();
                    -sign / (2.0 * s * s) * scale
                }
            })
            .collect();
        (0..n).map(|k| if k <= n / 2 { half[k] } else { half[n - k] }).collect()
    }

    /// Dense first-derivative (Fourier) matrix; exactly skew-symmetric.
    pub fn diff1(&self) -> Mat<f64> {
        circulant(&self.d1_kernel())
    }

    /// Dense second-derivative matrix; exactly symmetric.
    pub fn diff2(&self) -> Mat<f64> {
        circulant(&self.d2_kernel())
    }

    /// Periodic trapezoid (spectrally accurate) integral of `values`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.spacing()
    }

    /// Recommended resolution for a wave of width `1/eps` on top of the unit
    /// Compton scale: `h <= 0.1` and `L eps >= 10`.
    pub fn resolves(&self, eps: f64) -> bool {
        self.spacing() <= 0.1 && self.half_length * eps >= 10.0
    }
}

fn circulant(kernel: &[f64]) -> Mat<f64> {
    let n = kernel.len();
    Mat::from_fn(n, n, |i, j| kernel[(i + n - j) % n])
}

/// Applies a circulant kernel to a vector.
pub fn apply_kernel(kernel: &[f64], v: &[f64]) -> Vec<f64> {
    let n = kernel.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (j, vj) in v.iter().enumerate() {
                s += kernel[(i + n - j) % n] * vj;
            }
            s
        })
        .collect()
}

/// One basis function of a parity sector: a single node or a symmetric/antisymmetric node pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisFn {
    pub nodes: [usize; 2],
    pub coefs: [f64; 2],
    pub len: usize,
}

impl BasisFn {
    fn single(i: usize) -> Self {
        Self { nodes: [i, i], coefs: [1.0, 0.0], len: 1 }
    }

    fn pair(i: usize, j: usize, sign: f64) -> Self {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        Self { nodes: [i, j], coefs: [c, sign * c], len: 2 }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(move |t| (self.nodes[t], self.coefs[t]))
    }

    /// The node with `x >= 0` (or `x = -L` for the wrap node).
    pub fn primary(&self) -> usize {
        self.nodes[0]
    }
}

/// Orthonormal basis of even (`parity = 1`), odd (`-1`) or all (`0`) grid functions.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityBasis {
    pub parity: i8,
    pub funcs: Vec<BasisFn>,
}

impl ParityBasis {
    /// Even functions ordered by increasing `x >= 0`; the wrap node `x = -L` comes last.
    pub fn even(grid: &Grid1D) -> Self {
        let n = grid.points;
        let h = n / 2;
        let mut funcs = vec![BasisFn::single(h)];
        funcs.extend((h + 1..n).map(|j| BasisFn::pair(j, n - j, 1.0)));
        funcs.push(BasisFn::single(0));
        Self { parity: 1, funcs }
    }

    pub fn odd(grid: &Grid1D) -> Self {
        let n = grid.points;
        let h = n / 2;
        Self { parity: -1, funcs: (h + 1..n).map(|j| BasisFn::pair(j, n - j, -1.0)).collect() }
    }

    pub fn full(grid: &Grid1D) -> Self {
        Self { parity: 0, funcs: (0..grid.points).map(BasisFn::single).collect() }
    }

    pub fn with_parity(grid: &Grid1D, parity: i8) -> Self {
        match parity {
            1 => Self::even(grid),
            -1 => Self::odd(grid),
            _ => Self::full(grid),
        }
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    /// Coefficients of a grid function in this basis (exact for functions of matching parity).
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        self.funcs
            .iter()
            .map(|b| b.entries().map(|(i, c)| c * values[i]).sum())
            .collect()
    }

    /// Grid function with the given coefficients.
    pub fn expand(&self, coefs: &[f64], points: usize) -> Vec<f64> {
        let mut out = vec![0.0; points];
        for (b, &a) in self.funcs.iter().zip(coefs) {
            for (i, c) in b.entries() {
                out[i] += c * a;
            }
        }
        out
    }
}

/// Restriction `Rᵀ K R` of a circulant kernel to a pair of parity bases.
pub fn reduce_kernel(kernel: &[f64], rows: &ParityBasis, cols: &ParityBasis) -> Mat<f64> {
    let n = kernel.len();
    Mat::from_fn(rows.len(), cols.len(), |a, b| {
        let mut s = 0.0;
        for (i, ci) in rows.funcs[a].entries() {
            for (j, cj) in cols.funcs[b].entries() {
                s += ci * cj * kernel[(i + n - j) % n];
            }
        }
        s
    })
}

/// Band-limited interpolant of periodic complex samples.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    grid: Grid1D,
    /// Fourier coefficients in FFT order, normalised so that `f(x_i) = sum_j c_j e^{i k_j (x_i + L)}`.
    coefs: Vec<C64>,
}

impl TrigInterpolant {
    pub fn new(grid: &Grid1D, samples: &[C64]) -> Self {
        let n = grid.points;
        assert_eq!(samples.len(), n);
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let inv = 1.0 / n as f64;
        for c in &mut buf {
            *c *= inv;
        }
        Self { grid: *grid, coefs: buf }
    }

    pub fn from_real(grid: &Grid1D, samples: &[f64]) -> Self {
        let c: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::new(grid, &c)
    }

    /// Direct evaluation, O(N) per point.
    pub fn eval(&self, x: f64) -> C64 {
        let n = self.grid.points;
        let k0 = PI / self.grid.half_length;
        let t = x + self.grid.half_length;
        let mut s = C64::new(0.0, 0.0);
        for j in 0..n {
            let jj = if j < n / 2 {
                j as f64
            } else if j == n / 2 {
                // Nyquist term split symmetrically.
                s += self.coefs[j] * (j as f64 * k0 * t).cos();
                continue;
            } else {
                j as f64 - n as f64
            };
            s += self.coefs[j] * C64::from_polar(1.0, jj * k0 * t);
        }
        s
    }

    /// Samples of the interpolant on a grid refined by `factor` (zero padding).
    pub fn refine(&self, factor: usize) -> Vec<C64> {
        let n = self.grid.points;
        let m = n * factor;
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            if j < n / 2 {
                buf[j] = self.coefs[j];
            } else if j == n / 2 {
                buf[j] += 0.5 * self.coefs[j];
                buf[m - n / 2] += 0.5 * self.coefs[j];
            } else {
                buf[m - (n - j)] = self.coefs[j];
            }
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf
    }
}

/// Fast evaluation of periodic multi-component data via a refined grid and
/// local Lagrange interpolation.
#[derive(Clone, Debug)]
pub struct FineSampler {
    x0: f64,
    h: f64,
    period: f64,
    /// `values[node][component]`
    values: Vec<Vec<C64>>,
}

const LAGRANGE_POINTS: usize = 8;

impl FineSampler {
    pub fn new(grid: &Grid1D, components: &[Vec<C64>], factor: usize) -> Self {
        let fine: Vec<Vec<C64>> = components
            .iter()
            .map(|c| TrigInterpolant::new(grid, c).refine(factor))
            .collect();
        let m = grid.points * factor;
        let values = (0..m).map(|i| fine.iter().map(|c| c[i]).collect()).collect();
        Self {
            x0: -grid.half_length,
            h: grid.spacing() / factor as f64,
            period: 2.0 * grid.half_length,
            values,
        }
    }

    pub fn components(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    /// Writes all components at `x` into `out`.
    pub fn eval_into(&self, x: f64, out: &mut [C64]) {
        let m = self.values.len() as i64;
        let t = (x - self.x0).rem_euclid(self.period) / self.h;
        let base = t.floor() as i64 - (LAGRANGE_POINTS as i64 / 2 - 1);
        let mut w = [0.0; LAGRANGE_POINTS];
        for (a, wa) in w.iter_mut().enumerate() {
            let ta = (base + a as i64) as f64;
            let mut p = 1.0;
            for b in 0..LAGRANGE_POINTS {
                if b != a {
                    let tb = (base + b as i64) as f64;
                    p *= (t - tb) / (ta - tb);
                }
            }
            *wa = p;
        }
        for o in out.iter_mut() {
            *o = C64::new(0.0, 0.0);
        }
        for (a, wa) in w.iter().enumerate() {
            let idx = (base + a as i64).rem_euclid(m) as usize;
            for (o, v) in out.iter_mut().zip(&self.values[idx]) {
                *o += *v * *wa;
            }
        }
    }
}
