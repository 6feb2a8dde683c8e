//! Charges, Vakhitov–Kolokolov derivative and exponential tail fits.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{SolitaryWave, WaveFamily};
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// `‖φ‖²_{L²}` by the periodic trapezoid rule.
pub fn charge(wave: &SolitaryWave) -> f64 {
    charge_of_samples(&wave.grid, &wave.samples)
}

/// Charge of node-major samples with any number of components.
pub fn charge_of_samples(grid: &Grid1D, samples: &[C64]) -> f64 {
    samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing()
}

/// Least-squares fit `log|φ(x)| ≈ a − μ|x|` on the tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub mu: f64,
    /// `|x|` range of the fit window.
    pub window: (f64, f64),
    pub points: usize,
    pub r_squared: f64,
    /// RMS deviation of `log|φ|` from the fitted line.
    pub rms_log_residual: f64,
}

pub fn decay_rate(wave: &SolitaryWave) -> Result<DecayFit> {
    decay_rate_of_vector(&wave.grid, &wave.magnitudes())
}

/// Tail fit of pointwise magnitudes `|ζ(x_i)|`. The window on each side starts
/// where the magnitude first drops below `1e-2·max` and ends at the earlier of
/// `0.75 L` and the last node above `1e2·eps·max`.
pub fn decay_rate_of_vector(grid: &Grid1D, magnitudes: &[f64]) -> Result<DecayFit> {
    let max = magnitudes.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::TailUnderflow { points: 0 });
    }
    let floor = 1e2 * f64::EPSILON * max;
    let o = grid.origin();
    let n = grid.points;
    let x_cap = 0.75 * grid.half_length;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut window = (f64::INFINITY, 0.0_f64);
    let sides: [Vec<usize>; 2] = [(o..n).collect(), (1..=o).rev().collect()];
    for side in sides {
        let Some(start) = side.iter().position(|&i| magnitudes[i] <= 1e-2 * max) else { continue };
        let Some(end) = side.iter().rposition(|&i| magnitudes[i] > floor) else { continue };
        for &i in &side[start..=end.max(start)] {
            let r = grid.node(i).abs();
            if r > x_cap || magnitudes[i] <= floor {
                continue;
            }
            xs.push(r);
            ys.push(magnitudes[i].ln());
            window = (window.0.min(r), window.1.max(r));
        }
    }
    if xs.len() < 10 {
        return Err(Error::TailUnderflow { points: xs.len() });
    }
    let nf = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / nf, ys.iter().sum::<f64>() / nf);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok(DecayFit {
        mu: -slope,
        window,
        points: xs.len(),
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
        rms_log_residual: (ss_res / nf).sqrt(),
    })
}

/// Sampled `∂_ω Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VkReport {
    pub omega: Vec<f64>,
    pub charge: Vec<f64>,
    pub dq_domega: Vec<f64>,
    /// Largest neighbour spacing entering each stencil.
    pub step: Vec<f64>,
    /// Indices `i` with `dq[i]` and `dq[i+1]` of opposite sign.
    pub sign_changes: Vec<usize>,
}

impl VkReport {
    /// Common sign of all samples, or 0 when it changes.
    pub fn sign(&self) -> i8 {
        if self.dq_domega.iter().all(|&d| d < 0.0) {
            -1
        } else if self.dq_domega.iter().all(|&d| d > 0.0) {
            1
        } else {
            0
        }
    }
}

pub fn vk_derivative(family: &WaveFamily) -> Result<VkReport> {
    vk_derivative_samples(&family.omegas(), &family.charges())
}

/// Second-order differences on a possibly nonuniform `ω` grid (centered inside,
/// one-sided at the ends).
pub fn vk_derivative_samples(omega: &[f64], q: &[f64]) -> Result<VkReport> {
    let n = omega.len();
    if n < 3 || q.len() != n {
        return Err(Error::InsufficientFamily { len: n.min(q.len()) });
    }
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("frequencies must be strictly increasing".into()));
    }
    let mut dq = vec![0.0; n];
    let mut step = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (h1, h2) = (omega[b] - omega[a], omega[c] - omega[b]);
        // Derivative of the quadratic through (a, b, c) evaluated at omega[i].
        let x = omega[i];
        let wa = (2.0 * x - omega[b] - omega[c]) / (h1 * (h1 + h2));
        let wb = -(2.0 * x - omega[a] - omega[c]) / (h1 * h2);
        let wc = (2.0 * x - omega[a] - omega[b]) / (h2 * (h1 + h2));
        dq[i] = wa * q[a] + wb * q[b] + wc * q[c];
        step[i] = h1.max(h2);
    }
    let sign_changes = (0..n - 1).filter(|&i| dq[i] * dq[i + 1] < 0.0).collect();
    Ok(VkReport { omega: omega.to_vec(), charge: q.to_vec(), dq_domega: dq, step, sign_changes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_rate() {
        let g = Grid1D::new(200.0, 4000).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| (-0.3 * x.abs()).exp()).collect();
        let fit = decay_rate_of_vector(&g, &v).unwrap();
        assert!((fit.mu - 0.3).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn compact_support_underflows() {
        let g = Grid1D::new(20.0, 400).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| if x.abs() < 1.0 { 1.0 - x * x } else { 0.0 }).collect();
        assert!(matches!(decay_rate_of_vector(&g, &v), Err(Error::TailUnderflow { .. })));
        assert!(matches!(decay_rate_of_vector(&g, &vec![0.0; 400]), Err(Error::TailUnderflow { .. })));
    }

    #[test]
    fn vk_simple_families() {
        let r = vk_derivative_samples(&[0.1, 0.2, 0.3], &[1.0, 1.0, 1.0]).unwrap();
        assert!(r.dq_domega[1].abs() < 1e-12);
        let w: Vec<f64> = vec![0.1, 0.15, 0.3, 0.32, 0.5];
        let r = vk_derivative_samples(&w, &w).unwrap();
        assert!(r.dq_domega.iter().all(|d| (d - 1.0).abs() < 1e-12));
        let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
        let r = vk_derivative_samples(&w, &sq).unwrap();
        assert!(r.dq_domega.iter().zip(&w).all(|(d, x)| (d - 2.0 * x).abs() < 1e-12));
        assert!(matches!(vk_derivative_samples(&[0.1, 0.2], &[1.0, 2.0]), Err(Error::InsufficientFamily { len: 2 })));
    }

    #[test]
    fn charge_is_quadratic() {
        let g = Grid1D::new(5.0, 10).unwrap();
        let s: Vec<C64> = (0..20).map(|i| C64::new(i as f64, 1.0)).collect();
        let s2: Vec<C64> = s.iter().map(|z| z * 2.0).collect();
        assert!((charge_of_samples(&g, &s2) - 4.0 * charge_of_samples(&g, &s)).abs() < 1e-10);
        assert_eq!(charge_of_samples(&g, &vec![C64::new(0.0, 0.0); 20]), 0.0);
    }
}
