//! Weighted Hardy inequality `∫ w'|f|² ≤ 4 ∫ (w²/w') |f'|²` on `(0, ∞)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};

use super::{linspace, trapezoid, InequalityReport, Sample};

type WeightFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Weight `w` on `(0, ∞)` with its derivative.
#[derive(Clone)]
pub struct Weight {
    pub name: String,
    eval: WeightFn,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight").field("name", &self.name).finish()
    }
}

impl Weight {
    pub fn custom(name: &str, eval: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Self { name: name.to_string(), eval: Arc::new(eval) }
    }

    /// `w = x^p`, `p > 0`.
    pub fn power(p: f64) -> Self {
        Self::custom(&format!("x^{p}"), move |x| (x.powf(p), p * x.powf(p - 1.0)))
    }

    /// `w = -x^{-q}`, `q > 0`; `q = 1` is the classical `∫|f|²/x² ≤ 4∫|f'|²`.
    pub fn inverse_power(q: f64) -> Self {
        Self::custom(&format!("-x^-{q}"), move |x| (-x.powf(-q), q * x.powf(-q - 1.0)))
    }

    /// `w = e^{a x}`, `a > 0`.
    pub fn exponential(a: f64) -> Self {
        Self::custom(&format!("exp({a}x)"), move |x| ((a * x).exp(), a * (a * x).exp()))
    }

    /// `(w(x), w'(x))`.
    pub fn at(&self, x: f64) -> (f64, f64) {
        (self.eval)(x)
    }
}

/// Quadrature nodes per sample.
const NODES: usize = 8001;

/// Worst `∫w'|f|² / (4∫(w²/w')|f'|²)` over `samples` (first component used).
pub fn hardy_sample(weight: &Weight, samples: &[Sample], exec: Execution) -> Result<InequalityReport> {
    for s in samples {
        let (a, b) = s.support();
        if a <= 0.0 {
            return Err(Error::InvalidInput(format!("hardy sample support starts at {a}; need (0, inf)")));
        }
        for x in linspace(a, b, 257) {
            if weight.at(x).1 <= 0.0 {
                return Err(Error::NonmonotoneWeight { x });
            }
        }
    }
    let ratios = map_slice(exec, samples, |s| {
        let (a, b) = s.support();
        let xs = linspace(a, b, NODES);
        let mut lhs = Vec::with_capacity(NODES);
        let mut rhs = Vec::with_capacity(NODES);
        for &x in &xs {
            let (w, dw) = weight.at(x);
            let (v, dv) = s.eval(x);
            lhs.push(dw * v[0].norm_sqr());
            rhs.push(w * w / dw * dv[0].norm_sqr());
        }
        let ratio = trapezoid(&xs, &lhs) / (4.0 * trapezoid(&xs, &rhs));
        (ratio, s.describe())
    });
    for (i, (r, _)) in ratios.iter().enumerate() {
        if !r.is_finite() {
            return Err(Error::InvalidInput(format!("hardy sample {i} has a non-finite ratio")));
        }
    }
    Ok(InequalityReport::from_ratios(&format!("hardy[w={}]", weight.name), 4.0, &ratios))
}

fn psi(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else {
        let p = (-1.0 / t).exp();
        (p, p / (t * t))
    }
}

/// Smooth step from 0 (t ≤ 0) to 1 (t ≥ 1) and its derivative.
fn smooth_step(t: f64) -> (f64, f64) {
    let (a, da) = psi(t);
    let (b, db) = psi(1.0 - t);
    let s = a + b;
    (a / s, (da * b + a * db) / (s * s))
}

/// Ratios for the near-extremal family `f = |w|^{-1/2} χ(ln|w|)`, where `χ`
/// is 1 on a window of length `span` in `t = ln|w|`, with ramps of length
/// `max(1, span/4)`.
/// Returns `(span, ratio)` pairs; ratios increase toward 1 from below.
pub fn hardy_saturation(weight: &Weight, spans: &[f64]) -> Result<Vec<(f64, f64)>> {
    let t_of = |x: f64| weight.at(x).0.abs().ln();
    let (lo, hi) = (1e-150_f64, 1e150_f64);
    let (ta, tb) = (t_of(lo), t_of(hi));
    if ta == tb || ta.is_nan() || tb.is_nan() {
        return Err(Error::InvalidInput(format!("weight {} has constant ln|w|", weight.name)));
    }
    let increasing = tb > ta;
    let (t_lo, t_hi) = if increasing { (ta, tb) } else { (tb, ta) };
    let center = t_of(1.0);
    let invert = |t: f64| {
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if (t_of(mid.exp()) < t) == increasing {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    spans
        .iter()
        .map(|&span| {
            let ramp = (0.25 * span).max(1.0);
            let width = span + 2.0 * ramp;
            let start = (center - 0.5 * width).max(t_lo + 1.0);
            let end = (start + width).min(t_hi - 1.0);
            let start = end - width;
            if start < t_lo {
                return Err(Error::InvalidInput(format!("span {span} exceeds the weight's log range")));
            }
            let chi = |t: f64| {
                let (up, dup) = smooth_step((t - start) / ramp);
                let (down, ddown) = smooth_step((end - t) / ramp);
                (up * down, (dup * down - up * ddown) / ramp)
            };
            let (ya, yb) = (invert(start), invert(end));
            let ys = linspace(ya.min(yb), ya.max(yb), 40001);
            let mut lhs = Vec::with_capacity(ys.len());
            let mut rhs = Vec::with_capacity(ys.len());
            for &y in &ys {
                let x = y.exp();
                let (w, dw) = weight.at(x);
                let (c, dc) = chi(w.abs().ln());
                let f = w.abs().powf(-0.5) * c;
                let df = w.abs().powf(-0.5) * (dw / w) * (dc - 0.5 * c);
                lhs.push(dw * f * f * x);
                rhs.push(w * w / dw * df * df * x);
            }
            Ok((span, trapezoid(&ys, &lhs) / (4.0 * trapezoid(&ys, &rhs))))
        })
        .collect()
}
