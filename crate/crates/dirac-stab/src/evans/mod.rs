//! Evans functions of one-dimensional linearizations: asymptotic rates, Jost
//! frames, winding numbers along contours and the embedded-threshold
//! certificate.

mod jost;
mod rates;

pub use jost::{EvansMethod, EvansOptions, EvansValue, JostSystem};
pub use rates::{a_infinity, asymptotic_rates, kappa, threshold_certificate, AsymptoticRates, CertificateSample, ThresholdCertificate};

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::profiles::SolitaryWave;

/// `E(λ)` at one point.
pub fn evans_value(lambda: C64, wave: &SolitaryWave, opts: EvansOptions) -> Result<EvansValue> {
    JostSystem::new(wave, opts)?.evaluate(lambda)
}

/// Closed, positively oriented contour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Contour {
    Polygon { vertices: Vec<C64> },
    Circle { center: C64, radius: f64 },
}

impl Contour {
    /// `[re0, re1] × [im0, im1]`, counterclockwise.
    pub fn rectangle(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        Contour::Polygon {
            vertices: vec![C64::new(re0, im0), C64::new(re1, im0), C64::new(re1, im1), C64::new(re0, im1)],
        }
    }

    pub fn circle(center: C64, radius: f64) -> Self {
        Contour::Circle { center, radius }
    }

    /// Point at parameter `t ∈ [0, 1)`, uniform in arc length.
    pub fn point(&self, t: f64) -> C64 {
        match self {
            Contour::Circle { center, radius } => center + C64::from_polar(*radius, 2.0 * PI * t),
            Contour::Polygon { vertices } => {
                let n = vertices.len();
                let lens: Vec<f64> = (0..n).map(|i| (vertices[(i + 1) % n] - vertices[i]).norm()).collect();
                let total: f64 = lens.iter().sum();
                let mut s = t.rem_euclid(1.0) * total;
                for i in 0..n {
                    if s <= lens[i] || i == n - 1 {
                        let f = if lens[i] > 0.0 { (s / lens[i]).min(1.0) } else { 0.0 };
                        return vertices[i] + (vertices[(i + 1) % n] - vertices[i]) * f;
                    }
                    s -= lens[i];
                }
                unreachable!()
            }
        }
    }

    /// Distance from the contour to `i(ℝ ∖ (−g, g))`.
    pub fn distance_to_bands(&self, gap_edge: f64) -> f64 {
        let point_dist = |z: C64| if z.im.abs() >= gap_edge { z.re.abs() } else { C64::new(z.re, z.im.abs() - gap_edge).norm() };
        match self {
            Contour::Circle { center, radius } => {
                // Nearest band point is either the closest axis point or a band edge.
                let axis = C64::new(0.0, center.im.clamp(-f64::MAX, f64::MAX));
                let mut best = f64::INFINITY;
                for b in [axis, C64::new(0.0, gap_edge), C64::new(0.0, -gap_edge)] {
                    if b.im.abs() >= gap_edge {
                        best = best.min(((b - center).norm() - radius).abs());
                    }
                }
                best
            }
            Contour::Polygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    // Segment vs. the two rays; a fine search suffices for a guard.
                    if a.re.signum() != b.re.signum() || a.re == 0.0 || b.re == 0.0 {
                        let f = if a.re == b.re { 0.0 } else { a.re / (a.re - b.re) };
                        let z = a + (b - a) * f;
                        if z.im.abs() >= gap_edge {
                            return 0.0;
                        }
                    }
                    for j in 0..=1000 {
                        best = best.min(point_dist(a + (b - a) * (j as f64 / 1000.0)));
                    }
                }
                best
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub samples: usize,
    /// Refine until every step changes `arg E` by less than this.
    pub max_jump: f64,
    /// Refine until `|ln|E_{i+1}/E_i||` is below this.
    pub max_log_modulus: f64,
    /// Before any evaluation, steps are shortened to this fraction of the
    /// distance to the origin and to the band edges and embedded thresholds,
    /// where `E` varies fastest.
    pub resolution: f64,
    pub max_samples: usize,
    pub band_margin: f64,
    pub exec: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            samples: 128,
            max_jump: PI / 4.0,
            max_log_modulus: 1.0,
            resolution: 0.25,
            max_samples: 20_000,
            band_margin: 1e-6,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvansScan {
    pub contour: Contour,
    pub lambdas: Vec<C64>,
    pub values: Vec<C64>,
    /// Unwrapped `arg E` relative to the first sample.
    pub cumulative_arg: Vec<f64>,
    pub winding: i64,
    /// Even and odd windings for a parity split.
    pub sector_winding: Option<(i64, i64)>,
    pub largest_jump: f64,
    pub refinements: usize,
    /// False when the sample budget ran out before the jump bound held.
    pub converged: bool,
}

fn arg_step(a: C64, b: C64) -> f64 {
    (b / a).arg()
}

/// Number of zeros of `E` inside `contour`, by summed argument increments.
pub fn winding(contour: &Contour, wave: &SolitaryWave, evans: EvansOptions, scan: ScanOptions) -> Result<EvansScan> {
    let dist = contour.distance_to_bands(wave.m - wave.omega.abs());
    if dist <= scan.band_margin {
        return Err(Error::ContourTouchesEssential { distance: dist, margin: scan.band_margin });
    }
    let sys = JostSystem::new(wave, evans)?;
    let eval = |t: &f64| sys.evaluate(contour.point(*t));
    let n0 = scan.samples.max(8);
    let (g, t) = (wave.m - wave.omega.abs(), wave.m + wave.omega.abs());
    let special = [C64::new(0.0, 0.0), C64::new(0.0, g), C64::new(0.0, -g), C64::new(0.0, t), C64::new(0.0, -t)];
    let mut ts = geometric_nodes(contour, n0, &special, scan.resolution, scan.max_samples);
    let mut vals: Vec<EvansValue> = map_slice(scan.exec, &ts, eval).into_iter().collect::<Result<_>>()?;
    let jump = |a: &EvansValue, b: &EvansValue| -> f64 {
        match (a.sectors, b.sectors) {
            (Some((a1, a2)), Some((b1, b2))) => arg_step(a1, b1).abs().max(arg_step(a2, b2).abs()),
            _ => arg_step(a.value, b.value).abs(),
        }
    };
    let too_coarse = |a: &EvansValue, b: &EvansValue| {
        jump(a, b) >= scan.max_jump || (b.value.norm() / a.value.norm()).ln().abs() >= scan.max_log_modulus
    };
    let mut refinements = 0;
    let converged = loop {
        let n = ts.len();
        let bad: Vec<usize> = (0..n).filter(|&i| too_coarse(&vals[i], &vals[(i + 1) % n])).collect();
        if bad.is_empty() {
            break true;
        }
        if n + bad.len() > scan.max_samples {
            break false;
        }
        let mids: Vec<f64> = bad.iter().map(|&i| if i + 1 < n { 0.5 * (ts[i] + ts[i + 1]) } else { 0.5 * (ts[i] + 1.0) }).collect();
        let new: Vec<EvansValue> = map_slice(scan.exec, &mids, eval).into_iter().collect::<Result<_>>()?;
        let mut merged: Vec<(f64, EvansValue)> = ts.into_iter().zip(vals).chain(mids.into_iter().zip(new)).collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        (ts, vals) = merged.into_iter().unzip();
        refinements += 1;
    };
    let n = ts.len();
    let mut cumulative = vec![0.0; n];
    let mut total = 0.0;
    let (mut s_even, mut s_odd) = (0.0, 0.0);
    let mut largest: f64 = 0.0;
    for i in 0..n {
        let (a, b) = (&vals[i], &vals[(i + 1) % n]);
        let step = arg_step(a.value, b.value);
        largest = largest.max(jump(a, b));
        total += step;
        if let (Some((a1, a2)), Some((b1, b2))) = (a.sectors, b.sectors) {
            s_even += arg_step(a1, b1);
            s_odd += arg_step(a2, b2);
        }
        if i + 1 < n {
            cumulative[i + 1] = total;
        }
    }
    let round = |x: f64| (x / (2.0 * PI)).round() as i64;
    let sector_winding = sys.uses_parity_split().then(|| (round(s_even), round(s_odd)));
    let winding = match sector_winding {
        Some((a, b)) => a + b,
        None => round(total),
    };
    Ok(EvansScan {
        contour: contour.clone(),
        lambdas: ts.iter().map(|&t| contour.point(t)).collect(),
        values: vals.iter().map(|v| v.value).collect(),
        cumulative_arg: cumulative,
        winding,
        sector_winding,
        largest_jump: largest,
        refinements,
        converged,
    })
}

/// Parameter nodes with step `≤ resolution·distance` to every special point.
fn geometric_nodes(contour: &Contour, n0: usize, special: &[C64], resolution: f64, max: usize) -> Vec<f64> {
    let dist = |z: C64| special.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
    let mut ts: Vec<f64> = (0..n0).map(|i| i as f64 / n0 as f64).collect();
    loop {
        let n = ts.len();
        let mut out = Vec::with_capacity(2 * n);
        let mut split = false;
        for i in 0..n {
            let (ta, tb) = (ts[i], if i + 1 < n { ts[i + 1] } else { 1.0 });
            let (a, b) = (contour.point(ta), contour.point(tb));
            let len = (b - a).norm();
            let d = dist(a).min(dist(b)).min(dist(0.5 * (a + b)));
            out.push(ta);
            if len > resolution * d && len > 1e-9 && n + out.len() < max {
                out.push(0.5 * (ta + tb));
                split = true;
            }
        }
        ts = out;
        if !split {
            return ts;
        }
    }
}

/// Zero count and centroid inside a circle: `(1/2πi)∮ λ E'/E dλ` by the
/// trapezoid rule on `samples` points (refined as in [`winding`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCluster {
    pub center: C64,
    pub radius: f64,
    pub count: i64,
    /// Mean location of the enclosed zeros; `None` when `count == 0`.
    pub centroid: Option<C64>,
}

pub fn locate_zeros(center: C64, radius: f64, wave: &SolitaryWave, evans: EvansOptions, scan: ScanOptions) -> Result<ZeroCluster> {
    let contour = Contour::circle(center, radius);
    let s = winding(&contour, wave, evans, scan)?;
    let n = s.lambdas.len();
    // ∮ λ dlog E = Σ over steps of λ_mid · Δlog E (complex log, unwrapped).
    let mut moment = C64::new(0.0, 0.0);
    for i in 0..n {
        let (za, zb) = (s.lambdas[i], s.lambdas[(i + 1) % n]);
        let (ea, eb) = (s.values[i], s.values[(i + 1) % n]);
        let dlog = C64::new((eb.norm() / ea.norm()).ln(), arg_step(ea, eb));
        moment += 0.5 * (za + zb) * dlog;
    }
    let count = s.winding;
    let centroid = (count != 0).then(|| moment / (C64::new(0.0, 2.0 * PI) * count as f64));
    Ok(ZeroCluster { center, radius, count, centroid })
}

/// `re_lambda,im_lambda,re_E,im_E,cumulative_arg` rows.
pub fn scan_csv(scan: &EvansScan) -> String {
    let mut out = String::from("re_lambda[1/time],im_lambda[1/time],re_E[dimensionless],im_E[dimensionless],cumulative_arg[rad]\n");
    for ((l, e), a) in scan.lambdas.iter().zip(&scan.values).zip(&scan.cumulative_arg) {
        let _ = writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", l.re, l.im, e.re, e.im, a);
    }
    out
}
