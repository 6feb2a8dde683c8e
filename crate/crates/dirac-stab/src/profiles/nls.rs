//! Ground state `u_k` of `u'' + (n−1)u'/r = u − 2m u^{2k+1}`.

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, ParityBasis, TrigInterpolant};
use crate::ode::Dopri5;

/// Positive, radially decreasing ground state on `r ∈ [0, r_max]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub k: u32,
    pub m: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub amplitude: f64,
    pub residual_norm: f64,
    /// Reported slack in `u(r) <= u(0) e^{-(1-δ) r}`.
    pub decay_delta: f64,
    /// Radius beyond which that bound holds on the resolved range.
    pub decay_onset: f64,
    /// Even full-line grid the profile was refined on.
    pub grid: Grid1D,
}

/// Closed-form 1D ground state `[(k+1)/(2m)]^{1/(2k)} sech^{1/k}(k x)`.
pub fn nls_ground_state_1d_exact(k: u32, m: f64, x: f64) -> f64 {
    let k = k as f64;
    ((k + 1.0) / (2.0 * m)).powf(0.5 / k) * (1.0 / (k * x).cosh()).powf(1.0 / k)
}

fn check_pair(n: usize, k: u32) -> Result<()> {
    if !(1..=3).contains(&n) || k == 0 || (n == 3 && k != 1) {
        return Err(Error::InadmissiblePair { n, k });
    }
    Ok(())
}

#[derive(Debug, PartialEq)]
enum Shot {
    /// `u` crossed zero: initial value too large.
    Over,
    /// `u'` turned positive while `u > 0`: initial value too small.
    Under,
    /// Neither happened before `r_max`.
    Undecided,
}

fn rhs(n: usize, k: u32, m: f64) -> impl Fn(f64, &[f64], &mut [f64]) {
    move |r, y, d| {
        d[0] = y[1];
        let damp = if r > 0.0 { (n as f64 - 1.0) * y[1] / r } else { 0.0 };
        d[1] = y[0] - 2.0 * m * y[0].powi(2 * k as i32 + 1) - damp;
    }
}

/// Series start `u(r0) ≈ a + c r0²`, `c = (a − 2m a^{2k+1}) / (2n)`.
fn start(n: usize, k: u32, m: f64, a: f64, r0: f64) -> [f64; 2] {
    let c = (a - 2.0 * m * a.powi(2 * k as i32 + 1)) / (2.0 * n as f64);
    [a + c * r0 * r0, 2.0 * c * r0]
}

fn shoot(n: usize, k: u32, m: f64, a: f64, r_max: f64, record: Option<&mut Vec<(f64, f64)>>) -> Shot {
    let r0 = 1e-6;
    let y0 = start(n, k, m, a, r0);
    let mut outcome = Shot::Undecided;
    let mut rec = record;
    if let Some(rr) = rec.as_deref_mut() {
        rr.push((0.0, a));
    }
    let solver = Dopri5 { rtol: 1e-12, atol: 1e-14, max_steps: 1_000_000, h_max: 0.05 };
    let _ = solver.integrate(rhs(n, k, m), r0, &y0, r_max, |r, y| {
        if y[0] < 0.0 {
            outcome = Shot::Over;
            return false;
        }
        if y[1] > 0.0 {
            outcome = Shot::Under;
            return false;
        }
        if let Some(rr) = rec.as_deref_mut() {
            rr.push((r, y[0]));
        }
        true
    });
    outcome
}

/// Shooting-plus-bisection on `u(0)`, refined by Newton on an even Fourier grid
/// of `2 n_r` points over `[−r_max, r_max]`. Radial nodes are `r_j = j h`,
/// `j = 0..=n_r`.
pub fn nls_ground_state(n: usize, k: u32, m: f64, r_max: f64, n_r: usize) -> Result<RadialProfile> {
    check_pair(n, k)?;
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!("mass {m} must be positive")));
    }
    let grid = Grid1D::new(r_max, 2 * n_r)?;

    // Bracket: small amplitudes undershoot, large ones overshoot.
    let shoot_len = r_max.min(40.0);
    let mut lo = 1e-3 * (1.0 / (2.0 * m)).powf(0.5 / k as f64);
    if shoot(n, k, m, lo, shoot_len, None) != Shot::Under {
        return Err(Error::NoConvergence { stage: "shooting bracket (lower)".into(), residual: lo });
    }
    let mut hi = 2.0 * lo;
    let mut tries = 0;
    while shoot(n, k, m, hi, shoot_len, None) != Shot::Over {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoConvergence { stage: "shooting bracket (upper)".into(), residual: hi });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(n, k, m, mid, shoot_len, None) {
            Shot::Over => hi = mid,
            _ => lo = mid,
        }
    }
    let a = 0.5 * (lo + hi);
    let mut path = Vec::new();
    shoot(n, k, m, a, shoot_len, Some(&mut path));

    // Initial guess on the radial nodes: shooting path while trustworthy,
    // exponential continuation afterwards.
    let h = grid.spacing();
    let trust = path.iter().position(|&(_, u)| u < 1e-6 * a).unwrap_or(path.len().saturating_sub(1)).max(1);
    let (rc, uc) = path[trust.min(path.len() - 1)];
    let guess: Vec<f64> = (0..=n_r)
        .map(|j| {
            let r = j as f64 * h;
            if r <= rc {
                interp_path(&path, r)
            } else {
                uc * (-(r - rc)).exp() * (rc / r).powf(0.5 * (n as f64 - 1.0))
            }
        })
        .collect();

    let (u, residual) = newton_radial(n, k, m, &grid, guess)?;
    let r: Vec<f64> = (0..=n_r).map(|j| j as f64 * h).collect();
    let amplitude = u[0];
    let delta = 0.25;
    let floor = 1e-10 * amplitude;
    let onset = r
        .iter()
        .zip(&u)
        .rev()
        .filter(|(_, &v)| v > floor)
        .take_while(|(&rr, &v)| v <= amplitude * (-(1.0 - delta) * rr).exp())
        .last()
        .map_or(0.0, |(&rr, _)| rr);
    Ok(RadialProfile { n, k, m, r, u, amplitude, residual_norm: residual, decay_delta: delta, decay_onset: onset, grid })
}

fn interp_path(path: &[(f64, f64)], r: f64) -> f64 {
    let idx = path.partition_point(|&(x, _)| x < r);
    if idx == 0 {
        return path[0].1;
    }
    if idx >= path.len() {
        return path[path.len() - 1].1;
    }
    let (x0, y0) = path[idx - 1];
    let (x1, y1) = path[idx];
    y0 + (y1 - y0) * (r - x0) / (x1 - x0)
}

/// Residual `u'' + (n−1)u'/r − u + 2m u^{2k+1}` at the radial nodes.
fn radial_residual(n: usize, k: u32, m: f64, grid: &Grid1D, even: &ParityBasis, u: &[f64], d1: &[f64], d2: &[f64]) -> Vec<f64> {
    let full = expand_even(even, u, grid);
    let h = grid.spacing();
    let np = grid.points;
    let at = |ker: &[f64], i: usize| -> f64 { (0..np).map(|j| ker[(i + np - j) % np] * full[j]).sum() };
    even.funcs
        .iter()
        .enumerate()
        .map(|(jj, bf)| {
            let i = bf.primary();
            let r = jj as f64 * h;
            let uxx = at(d2, i);
            let radial = if n == 1 {
                0.0
            } else if jj == 0 {
                (n as f64 - 1.0) * uxx
            } else {
                (n as f64 - 1.0) * at(d1, i) / r
            };
            uxx + radial - u[jj] + 2.0 * m * u[jj].powi(2 * k as i32 + 1)
        })
        .collect()
}

/// Node values (not orthonormal coefficients) on `x >= 0` to a full grid function.
fn expand_even(even: &ParityBasis, u: &[f64], grid: &Grid1D) -> Vec<f64> {
    let mut full = vec![0.0; grid.points];
    for (bf, &v) in even.funcs.iter().zip(u) {
        for t in 0..bf.len {
            full[bf.nodes[t]] = v;
        }
    }
    full
}

fn newton_radial(n: usize, k: u32, m: f64, grid: &Grid1D, mut u: Vec<f64>) -> Result<(Vec<f64>, f64)> {
    let even = ParityBasis::even(grid);
    let d1 = grid.d1_kernel();
    let d2 = grid.d2_kernel();
    let np = grid.points;
    let h = grid.spacing();
    let nr = even.len();
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let mut res = radial_residual(n, k, m, grid, &even, &u, &d1, &d2);
    let mut best = sup(&res);
    for _ in 0..60 {
        if best < 1e-13 {
            break;
        }
        // Jacobian in node-value coordinates: column l sums the kernel over both mirror nodes.
        let jac = Mat::<f64>::from_fn(nr, nr, |jj, l| {
            let i = even.funcs[jj].primary();
            let bl = &even.funcs[l];
            let mut s = 0.0;
            for t in 0..bl.len {
                let j = bl.nodes[t];
                let k2 = d2[(i + np - j) % np];
                let k1 = d1[(i + np - j) % np];
                s += k2;
                if n > 1 {
                    s += if jj == 0 { (n as f64 - 1.0) * k2 } else { (n as f64 - 1.0) * k1 / (jj as f64 * h) };
                }
            }
            if jj == l {
                s += -1.0 + 2.0 * m * (2 * k + 1) as f64 * u[jj].powi(2 * k as i32);
            }
            s
        });
        let mut rhs = Mat::<f64>::from_fn(nr, 1, |i, _| -res[i]);
        jac.partial_piv_lu().solve_in_place(&mut rhs);
        let mut t = 1.0;
        let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let r0 = norm2(&res);
        loop {
            let trial: Vec<f64> = (0..nr).map(|i| u[i] + t * rhs[(i, 0)]).collect();
            let rt = radial_residual(n, k, m, grid, &even, &trial, &d1, &d2);
            if norm2(&rt) <= (1.0 - 1e-4 * t) * r0 || (t == 1.0 && sup(&rt) < 1e-12) {
                u = trial;
                res = rt;
                break;
            }
            t *= 0.5;
            if t < 2f64.powi(-20) {
                if best < 1e-10 {
                    return Ok((u, best));
                }
                return Err(Error::NoConvergence { stage: "ground-state Newton".into(), residual: best });
            }
        }
        let now = sup(&res);
        if now >= best * 0.9 && now < 1e-10 {
            best = now;
            break;
        }
        best = now;
    }
    if best < 1e-10 {
        Ok((u, best))
    } else {
        Err(Error::NoConvergence { stage: "ground-state Newton".into(), residual: best })
    }
}

impl RadialProfile {
    /// Band-limited evaluation of the even extension at `x` (`|x| <= r_max`).
    pub fn interpolant(&self) -> TrigInterpolant {
        let even = ParityBasis::even(&self.grid);
        TrigInterpolant::from_real(&self.grid, &expand_even(&even, &self.u, &self.grid))
    }

    /// Samples `u(|x|)` on another grid (zero beyond `r_max`).
    pub fn sample_on(&self, grid: &Grid1D) -> Vec<f64> {
        let interp = self.interpolant();
        let r_max = self.grid.half_length;
        grid.nodes()
            .iter()
            .map(|&x| if x.abs() <= r_max { interp.eval(x.abs()).re } else { 0.0 })
            .collect()
    }

    /// Full-line samples on the native grid.
    pub fn full_line(&self) -> Vec<f64> {
        expand_even(&ParityBasis::even(&self.grid), &self.u, &self.grid)
    }

    /// Positivity and monotone decrease on the resolved range `u > 1e-10 u(0)`.
    pub fn shape_ok(&self) -> bool {
        let floor = 1e-10 * self.amplitude;
        let resolved: Vec<f64> = self.u.iter().copied().take_while(|&v| v > floor).collect();
        resolved.iter().all(|&v| v > 0.0) && resolved.windows(2).all(|w| w[1] < w[0])
    }
}
