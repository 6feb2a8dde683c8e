//! Newton solver for NLD solitary waves in the real even/odd sector.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{nls_ground_state_1d_exact, Nonlinearity, SolitaryWave, WaveFamily};
use crate::clifford::{default_rep_1d, realify, DiracRep, RealifiedRep};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::grid::{apply_kernel, Grid1D, ParityBasis, TrigInterpolant};
use crate::linearize::{assemble_from_nodes, lminus_block, SectorBasis, SpinorMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Target sup-norm of the residual.
    pub tol: f64,
    /// Residual accepted when the line search stalls before `tol`.
    pub accept: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub min_step: f64,
    /// Retry through a chain of seeded solves when the direct ansatz fails.
    pub ladder: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, accept: 5e-11, max_iter: 60, armijo: 1e-4, min_step: 2f64.powi(-20), ladder: true }
    }
}

/// Grid `[−c_L/ε, c_L/ε)` with `points` nodes.
pub fn scaled_grid(omega: f64, m: f64, c_l: f64, points: usize) -> Result<Grid1D> {
    if omega.abs() >= m {
        return Err(Error::OutsideGap { omega, m });
    }
    Grid1D::new(c_l / (m * m - omega * omega).sqrt(), points)
}

struct Problem<'a> {
    grid: Grid1D,
    rep: DiracRep,
    real: RealifiedRep,
    nl: &'a Nonlinearity,
    omega: f64,
    m: f64,
    sector: SectorBasis,
    d1: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(omega: f64, m: f64, nl: &'a Nonlinearity, grid: &Grid1D) -> Self {
        let rep = default_rep_1d();
        let real = realify(&rep);
        // Real part only; component c has parity sign(β_cc).
        let dd = 2 * rep.dim;
        let modes = (0..rep.dim)
            .map(|c| SpinorMode {
                spinor: (0..dd).map(|t| (t == c) as u8 as f64).collect(),
                grid: ParityBasis::with_parity(grid, if real.bbeta[(c, c)] > 0.0 { 1 } else { -1 }),
            })
            .collect();
        Self { grid: *grid, rep, real, nl, omega, m, sector: SectorBasis::new(modes), d1: grid.d1_kernel() }
    }

    fn dd(&self) -> usize {
        2 * self.rep.dim
    }

    /// Residual `𝕃₋(𝛗)𝛗` at the nodes and in sector coordinates.
    fn residual(&self, coefs: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let dd = self.dd();
        let n = self.grid.points;
        let phi = self.sector.expand_real(coefs, &self.grid);
        let mut dphi = vec![0.0; dd * n];
        for c in 0..dd {
            let col: Vec<f64> = (0..n).map(|i| phi[i * dd + c]).collect();
            if col.iter().all(|&v| v == 0.0) {
                continue;
            }
            for (i, v) in apply_kernel(&self.d1, &col).into_iter().enumerate() {
                dphi[i * dd + c] = v;
            }
        }
        let dc = &self.real.dcoef[0];
        let mut f = vec![0.0; dd * n];
        for i in 0..n {
            let p = &phi[i * dd..(i + 1) * dd];
            let loc = lminus_block(&self.real, self.nl, self.omega, self.m, p);
            for a in 0..dd {
                let mut s = 0.0;
                for b in 0..dd {
                    s += dc[(a, b)] * dphi[i * dd + b] + loc[(a, b)] * p[b];
                }
                f[i * dd + a] = s;
            }
        }
        let red = self.sector.project_real(&f);
        (phi, f, red)
    }

    fn jacobian(&self, phi: &[f64]) -> Result<Mat<f64>> {
        let lin = assemble_from_nodes(&self.grid, &self.real, self.nl, self.omega, self.m, phi, &self.rep.label)?;
        Ok(lin.l.reduce(&self.sector, &self.sector))
    }

    /// Sector coefficients of node-value components `(v, u)`.
    fn coefs_from_components(&self, comps: &[Vec<f64>]) -> Vec<f64> {
        let dd = self.dd();
        let n = self.grid.points;
        let mut full = vec![0.0; dd * n];
        for (c, vals) in comps.iter().enumerate() {
            for i in 0..n {
                full[i * dd + c] = vals[i];
            }
        }
        self.sector.project_real(&full)
    }

    fn wave(&self, phi: &[f64], residual: f64, history: Vec<f64>, warnings: Vec<String>) -> SolitaryWave {
        let d = self.rep.dim;
        let dd = self.dd();
        let samples = (0..self.grid.points)
            .flat_map(|i| (0..d).map(move |c| C64::new(phi[i * dd + c], phi[i * dd + d + c])))
            .collect();
        SolitaryWave {
            omega: self.omega,
            m: self.m,
            nonlinearity: self.nl.clone(),
            grid: self.grid,
            rep: self.rep.clone(),
            samples,
            residual_norm: residual,
            residual_history: history,
            warnings,
        }
    }

    fn newton(&self, mut coefs: Vec<f64>, opts: &NewtonOptions, expected_amp: f64) -> Result<SolitaryWave> {
        let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let (mut phi, mut f, mut red) = self.residual(&coefs);
        let mut history = vec![sq(&red).sqrt()];
        for _ in 0..opts.max_iter {
            let mut stalled = false;
            if sup(&f) <= opts.tol {
                break;
            }
            let jac = self.jacobian(&phi)?;
            let mut step = Mat::<f64>::from_fn(red.len(), 1, |i, _| -red[i]);
            jac.partial_piv_lu().solve_in_place(&mut step);
            if !(0..red.len()).all(|i| step[(i, 0)].is_finite()) {
                break;
            }
            let r0 = sq(&red);
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = coefs.iter().enumerate().map(|(i, c)| c + t * step[(i, 0)]).collect();
                let (tp, tf, tr) = self.residual(&trial);
                if sq(&tr) <= (1.0 - 2.0 * opts.armijo * t) * r0 {
                    coefs = trial;
                    phi = tp;
                    f = tf;
                    red = tr;
                    history.push(sq(&red).sqrt());
                    break;
                }
                t *= 0.5;
                if t < opts.min_step {
                    stalled = true;
                    break;
                }
            }
            if stalled {
                break;
            }
        }
        let res = sup(&f);
        if res > opts.tol && res > opts.accept {
            return Err(Error::NoConvergence { stage: "solitary-wave Newton".into(), residual: res });
        }
        let dd = self.dd();
        let amp = (0..self.grid.points).map(|i| phi[i * dd..(i + 1) * dd].iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        if amp < 1e-3 * expected_amp {
            return Err(Error::NoConvergence { stage: "solitary-wave Newton (collapsed to zero)".into(), residual: amp });
        }
        // Gauge: particle part positive at the origin.
        let o = self.grid.origin();
        if phi[o * dd] < 0.0 {
            phi.iter_mut().for_each(|x| *x = -*x);
        }
        let mut warnings = Vec::new();
        let eps = (self.m * self.m - self.omega * self.omega).sqrt();
        if !self.grid.resolves(eps) {
            warnings.push(format!(
                "grid h = {:.4}, L = {:.2} does not meet h <= 0.1 and L >= 10/eps = {:.2}",
                self.grid.spacing(),
                self.grid.half_length,
                10.0 / eps
            ));
        }
        Ok(self.wave(&phi, res, history, warnings))
    }
}

fn check_gap(omega: f64, m: f64) -> Result<()> {
    if !(m > 0.0) {
        return Err(Error::InvalidInput(format!("mass {m} must be positive")));
    }
    if !(omega.abs() < m) {
        return Err(Error::OutsideGap { omega, m });
    }
    Ok(())
}

fn expected_amplitude(omega: f64, m: f64, k: u32) -> f64 {
    let eps = (m * m - omega * omega).sqrt();
    eps.powf(1.0 / k as f64) * nls_ground_state_1d_exact(k, m, 0.0)
}

/// Nonrelativistic ansatz `v = ε^{1/k} U(εx)`, `u = ε^{1+1/k} U′(εx)/2m`.
fn ansatz(p: &Problem, k: u32) -> Vec<f64> {
    let eps = (p.m * p.m - p.omega * p.omega).sqrt();
    let kf = k as f64;
    let nodes = p.grid.nodes();
    let v: Vec<f64> = nodes.iter().map(|&x| eps.powf(1.0 / kf) * nls_ground_state_1d_exact(k, p.m, eps * x)).collect();
    let u: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let y = eps * x;
            -eps.powf(1.0 + 1.0 / kf) * nls_ground_state_1d_exact(k, p.m, y) * (kf * y).tanh() / (2.0 * p.m)
        })
        .collect();
    p.coefs_from_components(&[v, u])
}

/// Seed on a new `(ω, grid)` from a converged wave by `ε`-rescaling.
fn rescaled_seed(p: &Problem, from: &SolitaryWave) -> Vec<f64> {
    let d = from.dim();
    let kf = from.k() as f64;
    let r = (p.m * p.m - p.omega * p.omega).sqrt() / from.eps();
    let l_old = from.grid.half_length;
    let comps: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let vals: Vec<f64> = (0..from.grid.points).map(|i| from.samples[i * d + c].re).collect();
            let interp = TrigInterpolant::from_real(&from.grid, &vals);
            let amp = if c == 0 { r.powf(1.0 / kf) } else { r.powf(1.0 + 1.0 / kf) };
            p.grid
                .nodes()
                .iter()
                .map(|&x| if (r * x).abs() < l_old { amp * interp.eval(r * x).re } else { 0.0 })
                .collect()
        })
        .collect();
    p.coefs_from_components(&comps)
}

/// Solitary wave `φ_ω` of the 1D NLD equation in the default representation.
pub fn nld_solitary_wave(omega: f64, m: f64, nl: &Nonlinearity, grid: &Grid1D, opts: &NewtonOptions) -> Result<SolitaryWave> {
    check_gap(omega, m)?;
    let p = Problem::new(omega, m, nl, grid);
    let amp = expected_amplitude(omega, m, nl.k);
    let direct = p.newton(ansatz(&p, nl.k), opts, amp);
    if direct.is_ok() || !opts.ladder {
        return direct;
    }
    let first_err = direct.unwrap_err();
    match ladder_solve(omega, m, nl, grid, opts) {
        Ok(w) => Ok(w),
        Err(_) => Err(first_err),
    }
}

/// Frequencies visited when the direct ansatz fails: start at `0.95m`, then move
/// towards the target (by `0.05m` downwards, by `ε`-ratio `0.7` upwards).
fn ladder_path(omega: f64, m: f64) -> Vec<f64> {
    let start = 0.95 * m;
    let mut path = vec![start];
    if omega < start {
        let mut w = start - 0.05 * m;
        while w > omega + 1e-9 * m {
            path.push(w);
            w -= 0.05 * m;
        }
    } else {
        let eps_t = (m * m - omega * omega).sqrt();
        let mut e = (m * m - start * start).sqrt() * 0.7;
        while e > eps_t * (1.0 + 1e-9) {
            path.push((m * m - e * e).sqrt());
            e *= 0.7;
        }
    }
    if (path.last().copied().unwrap() - omega).abs() > 1e-12 * m {
        path.push(omega);
    }
    path
}

fn ladder_solve(omega: f64, m: f64, nl: &Nonlinearity, grid: &Grid1D, opts: &NewtonOptions) -> Result<SolitaryWave> {
    let eps_t = (m * m - omega * omega).sqrt();
    let path = ladder_path(omega, m);
    let mut prev: Option<SolitaryWave> = None;
    for (j, &w) in path.iter().enumerate() {
        let g = if j + 1 == path.len() {
            *grid
        } else {
            let eps = (m * m - w * w).sqrt();
            Grid1D::new(grid.half_length * (eps_t / eps).max(1.0), grid.points)?
        };
        let p = Problem::new(w, m, nl, &g);
        let seed = match &prev {
            None => ansatz(&p, nl.k),
            Some(prev) => rescaled_seed(&p, prev),
        };
        prev = Some(p.newton(seed, opts, expected_amplitude(w, m, nl.k))?);
    }
    let mut wave = prev.expect("ladder path is never empty");
    wave.warnings.push(format!("reached through the seeded chain {path:?}"));
    Ok(wave)
}

/// Solve at `(ω, grid)` starting from the rescaled `seed`.
pub fn nld_solitary_wave_seeded(
    omega: f64,
    m: f64,
    nl: &Nonlinearity,
    grid: &Grid1D,
    seed: &SolitaryWave,
    opts: &NewtonOptions,
) -> Result<SolitaryWave> {
    check_gap(omega, m)?;
    if seed.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("seed has {} components, expected 2", seed.dim())));
    }
    let p = Problem::new(omega, m, nl, grid);
    let seeded = p.newton(rescaled_seed(&p, seed), opts, expected_amplitude(omega, m, nl.k));
    match seeded {
        Ok(w) => Ok(w),
        Err(e) => nld_solitary_wave(omega, m, nl, grid, opts).map_err(|_| e),
    }
}

/// Family at increasing `omegas`. With `seeded`, each wave starts from the
/// previous one (sequential); otherwise the solves are independent.
pub fn solve_family<G>(
    omegas: &[f64],
    m: f64,
    nl: &Nonlinearity,
    grid_for: G,
    opts: &NewtonOptions,
    seeded: bool,
    exec: Execution,
) -> Result<WaveFamily>
where
    G: Fn(f64) -> Result<Grid1D> + Sync,
{
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("frequencies must be strictly increasing".into()));
    }
    for &w in omegas {
        check_gap(w, m)?;
    }
    if !seeded {
        let waves = map_slice(exec, omegas, |&w| nld_solitary_wave(w, m, nl, &grid_for(w)?, opts));
        return Ok(WaveFamily { waves: waves.into_iter().collect::<Result<Vec<_>>>()? });
    }
    let mut waves: Vec<SolitaryWave> = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let g = grid_for(w)?;
        let wave = match waves.last() {
            None => nld_solitary_wave(w, m, nl, &g, opts)?,
            Some(prev) => nld_solitary_wave_seeded(w, m, nl, &g, prev, opts)?,
        };
        waves.push(wave);
    }
    Ok(WaveFamily { waves })
}
