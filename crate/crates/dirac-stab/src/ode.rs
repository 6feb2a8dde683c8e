//! Adaptive Dormand–Prince 5(4) integrator for real first-order systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest permitted |step|; `f64::INFINITY` for none.
    pub h_max: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 200_000, h_max: f64::INFINITY }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Error weights: fifth-order minus embedded fourth-order solution.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Outcome of an integration.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub x: f64,
    pub y: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    /// True when the observer stopped the integration early.
    pub stopped: bool,
}

impl Dopri5 {
    /// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction). After
    /// every accepted step `observer(x, y)` is called; returning `false` stops.
    pub fn integrate<F, O>(&self, mut f: F, x0: f64, y0: &[f64], x1: f64, mut observer: O) -> Result<OdeSolution>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(f64, &[f64]) -> bool,
    {
        let n = y0.len();
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let span = (x1 - x0).abs();
        let mut x = x0;
        let mut y = y0.to_vec();
        if span == 0.0 {
            return Ok(OdeSolution { x, y, steps: 0, rejected: 0, stopped: false });
        }
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut yt = vec![0.0; n];
        let mut ynew = vec![0.0; n];
        f(x, &y, &mut k1);

        let scale = |y: &[f64], yn: &[f64], i: usize| self.atol + self.rtol * y[i].abs().max(yn[i].abs());
        // Initial step (Hairer–Wanner heuristic).
        let d0 = (y.iter().enumerate().map(|(i, v)| (v / scale(&y, &y, i)).powi(2)).sum::<f64>() / n as f64).sqrt();
        let d1 = (k1.iter().enumerate().map(|(i, v)| (v / scale(&y, &y, i)).powi(2)).sum::<f64>() / n as f64).sqrt();
        let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h = h.min(span).min(self.h_max);

        let (mut steps, mut rejected) = (0usize, 0usize);
        let mut fac_old = 1e-4_f64;
        loop {
            if steps + rejected > self.max_steps {
                return Err(Error::IntegrationFailure { x, reason: format!("step budget {} exhausted", self.max_steps) });
            }
            let remaining = (x1 - x) * dir;
            if remaining <= span * 1e-14 {
                break;
            }
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            let hs = h * dir;
            for i in 0..n {
                yt[i] = y[i] + hs * A21 * k1[i];
            }
            f(x + C2 * hs, &yt, &mut k2);
            for i in 0..n {
                yt[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            f(x + C3 * hs, &yt, &mut k3);
            for i in 0..n {
                yt[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(x + C4 * hs, &yt, &mut k4);
            for i in 0..n {
                yt[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(x + C5 * hs, &yt, &mut k5);
            for i in 0..n {
                yt[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(x + hs, &yt, &mut k6);
            for i in 0..n {
                ynew[i] = y[i] + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            f(x + hs, &ynew, &mut k7);
            let mut err = 0.0;
            for i in 0..n {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                err += (e / scale(&y, &ynew, i)).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::IntegrationFailure { x, reason: "non-finite state".into() });
            }
            if err <= 1.0 {
                // PI controller (Gustafsson).
                let fac = (0.9 * err.max(1e-10).powf(-0.17) * fac_old.powf(0.04)).clamp(0.2, 10.0);
                fac_old = err.max(1e-4);
                x = if last { x1 } else { x + hs };
                std::mem::swap(&mut y, &mut ynew);
                std::mem::swap(&mut k1, &mut k7);
                steps += 1;
                if !observer(x, &y) {
                    return Ok(OdeSolution { x, y, steps, rejected, stopped: true });
                }
                if last {
                    break;
                }
                h = (h * fac).min(self.h_max);
            } else {
                rejected += 1;
                h *= (0.9 * err.powf(-0.2)).max(0.2);
            }
            if h < span * 1e-15 {
                return Err(Error::IntegrationFailure { x, reason: "step size underflow".into() });
            }
        }
        Ok(OdeSolution { x, y, steps, rejected, stopped: false })
    }
}
