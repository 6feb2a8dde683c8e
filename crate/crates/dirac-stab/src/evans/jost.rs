//! Jost frames by continuous orthonormalization and the Evans determinant.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::rates::{asymptotic_rates, kappa};
use crate::clifford::{realify, RealifiedRep};
use crate::error::{Error, Result};
use crate::grid::FineSampler;
use crate::ode::Dopri5;
use crate::profiles::{Nonlinearity, SolitaryWave};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvansMethod {
    /// Parity split when the wave is parity symmetric, two-sided otherwise.
    Auto,
    /// `E = E₊·E₋` from one half-line frame matched against the parity subspaces at 0.
    ParitySplit,
    /// Frames from both ends matched at `x_match`.
    TwoSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvansOptions {
    pub method: EvansMethod,
    pub x_match: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Frames start where the pointwise potential drops below this.
    pub tail_tol: f64,
    /// Refinement of the profile grid for off-node evaluation.
    pub refine: usize,
    /// Re-orthonormalization interval in `x`.
    pub chunk: f64,
}

impl Default for EvansOptions {
    fn default() -> Self {
        Self { method: EvansMethod::Auto, x_match: 0.0, rtol: 1e-10, atol: 1e-12, tail_tol: 1e-14, refine: 8, chunk: 2.0 }
    }
}

/// `E(λ)` and, for the parity split, its even and odd factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvansValue {
    pub lambda: C64,
    pub value: C64,
    /// `(E₊, E₋)`.
    pub sectors: Option<(C64, C64)>,
    pub steps: usize,
}

/// Everything needed to evaluate `E(λ)` for one wave.
pub struct JostSystem {
    rep: RealifiedRep,
    nl: Nonlinearity,
    omega: f64,
    m: f64,
    sampler: FineSampler,
    /// Frames start at `±x_far`.
    pub x_far: f64,
    pub opts: EvansOptions,
    parity: bool,
    d: usize,
    /// `dcoef·𝛃`, `dcoef`, `dcoef·𝕁` (row-major).
    d_beta: Vec<f64>,
    d_plain: Vec<f64>,
    d_j: Vec<f64>,
    /// `β = −1` vectors projected onto each `𝕁` eigenspace.
    seeds: Vec<(C64, Vec<Vec<C64>>)>,
    /// Orthonormal bases of `ker(𝛃 ∓ 1)`.
    parity_bases: [Vec<Vec<C64>>; 2],
}

fn gram_schmidt(candidates: impl IntoIterator<Item = Vec<C64>>, want: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for mut v in candidates {
        for q in &out {
            let p: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= p * qi;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            out.push(v.into_iter().map(|z| z / n).collect());
        }
        if out.len() == want {
            break;
        }
    }
    out
}

fn matmul_real(a: &crate::clifford::RMatrix, b: &crate::clifford::RMatrix) -> Vec<f64> {
    let d = a.nrows();
    let p = a * b;
    (0..d * d).map(|i| p[(i / d, i % d)]).collect()
}

impl JostSystem {
    pub fn new(wave: &SolitaryWave, opts: EvansOptions) -> Result<Self> {
        let rep = realify(&wave.rep);
        if rep.n != 1 {
            return Err(Error::DimensionMismatch(format!("Evans functions are one-dimensional, got n = {}", rep.n)));
        }
        let d = 2 * rep.dim;
        let nn = rep.dim;
        let g = &wave.grid;
        let comps: Vec<Vec<C64>> = (0..nn).map(|c| (0..g.points).map(|i| wave.samples[i * nn + c]).collect()).collect();
        let sampler = FineSampler::new(g, &comps, opts.refine.max(1));

        // Start frames beyond the last node with a non-negligible potential.
        let nl = wave.nonlinearity.clone();
        let mut x_far: f64 = 1.0;
        let mut parity_defect: f64 = 0.0;
        let scale = wave.sup_norm().max(f64::MIN_POSITIVE);
        for i in 0..g.points {
            let p = wave.realified(i);
            let s = crate::linearize::beta_density(&rep, &p);
            let pot = nl.f(s).abs() + 2.0 * nl.df(s).abs() * p.iter().map(|v| v * v).sum::<f64>();
            if pot > opts.tail_tol {
                x_far = x_far.max(g.node(i).abs() + g.spacing());
            }
            let q = wave.realified(g.mirror(i));
            for a in 0..d {
                let bq: f64 = (0..d).map(|b| rep.bbeta[(a, b)] * q[b]).sum();
                parity_defect = parity_defect.max((p[a] - bq).abs());
            }
        }
        x_far = x_far.min(0.9 * g.half_length);
        let symmetric = parity_defect <= 1e-10 * scale;
        let parity = match opts.method {
            EvansMethod::Auto => symmetric && opts.x_match == 0.0,
            EvansMethod::ParitySplit => {
                if !symmetric || opts.x_match != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "parity split needs a symmetric wave matched at 0 (defect {parity_defect:.2e}, x_match {})",
                        opts.x_match
                    )));
                }
                true
            }
            EvansMethod::TwoSided => false,
        };
        if opts.x_match.abs() >= x_far {
            return Err(Error::InvalidInput(format!("x_match = {} outside (-{x_far}, {x_far})", opts.x_match)));
        }

        let dc = &rep.dcoef[0];
        let d_beta = matmul_real(dc, &rep.bbeta);
        let d_plain: Vec<f64> = (0..d * d).map(|i| dc[(i / d, i % d)]).collect();
        let d_j = matmul_real(dc, &rep.j);

        let minus_beta: Vec<Vec<C64>> = (0..d)
            .map(|k| (0..d).map(|i| C64::new(0.5 * ((i == k) as u8 as f64 - rep.bbeta[(i, k)]), 0.0)).collect())
            .collect();
        let seeds = [C64::i(), -C64::i()]
            .into_iter()
            .map(|c| {
                let proj = minus_beta.iter().map(|r| {
                    (0..d).map(|i| 0.5 * (r[i] - c * (0..d).map(|k| rep.j[(i, k)] * r[k]).sum::<C64>())).collect()
                });
                (c, gram_schmidt(proj, nn / 2))
            })
            .collect();
        let parity_bases = [1.0, -1.0].map(|p| {
            gram_schmidt(
                (0..d).map(|k| (0..d).map(|i| C64::new(0.5 * ((i == k) as u8 as f64 + p * rep.bbeta[(i, k)]), 0.0)).collect()),
                nn,
            )
        });
        Ok(Self {
            rep,
            nl,
            omega: wave.omega,
            m: wave.m,
            sampler,
            x_far,
            opts,
            parity,
            d,
            d_beta,
            d_plain,
            d_j,
            seeds,
            parity_bases,
        })
    }

    pub fn uses_parity_split(&self) -> bool {
        self.parity
    }

    /// `A(x, λ)` row-major.
    fn a_matrix(&self, x: f64, lambda: C64, phi_c: &mut [C64], out: &mut [C64]) {
        let d = self.d;
        let nn = d / 2;
        self.sampler.eval_into(x, phi_c);
        let mut phi = [0.0f64; 16];
        for c in 0..nn {
            phi[c] = phi_c[c].re;
            phi[c + nn] = phi_c[c].im;
        }
        let mut bp = [0.0f64; 16];
        let mut s = 0.0;
        for a in 0..d {
            bp[a] = (0..d).map(|b| self.rep.bbeta[(a, b)] * phi[b]).sum();
            s += phi[a] * bp[a];
        }
        let (fs, dfs) = (self.nl.f(s), self.nl.df(s));
        // dcoef·(𝛃𝛗)
        let mut dbp = [0.0f64; 16];
        for a in 0..d {
            dbp[a] = (0..d).map(|b| self.d_plain[a * d + b] * bp[b]).sum();
        }
        for a in 0..d {
            for b in 0..d {
                let re = (self.m - fs) * self.d_beta[a * d + b] - self.omega * self.d_plain[a * d + b] - 2.0 * dfs * dbp[a] * bp[b];
                out[a * d + b] = C64::new(re, 0.0) + lambda * self.d_j[a * d + b];
            }
        }
    }

    /// Analytic, nowhere-vanishing basis of the decaying (`sign = −1`, `x → +∞`)
    /// or growing (`sign = +1`, `x → −∞`) subspace of `A_∞(λ)`, as
    /// `(κ_c ∓ A_∞)w` with `w` in the `β = −1` part of each `𝕁` eigenspace;
    /// also returns the sum of the corresponding rates.
    fn asymptotic_basis(&self, lambda: C64, sign: f64) -> (Vec<Vec<C64>>, C64) {
        let d = self.d;
        let a = super::rates::a_infinity(&self.rep, lambda, self.omega, self.m);
        let mut cols = Vec::new();
        let mut trace = ZERO;
        for (c, ws) in &self.seeds {
            let k = kappa(lambda, self.omega, self.m, *c);
            for w in ws {
                let v: Vec<C64> = (0..d).map(|i| k * w[i] + sign * (0..d).map(|j| a[i * d + j] * w[j]).sum::<C64>()).collect();
                cols.push(v);
                trace += sign * k;
            }
        }
        (cols, trace)
    }

    /// Integrates the frame spanned by `cols` at `x0` to `x1`; returns the
    /// orthonormal frame and `log` of its Jost-normalized volume.
    fn transport(&self, lambda: C64, cols: Vec<Vec<C64>>, rate_sum: C64, x0: f64, x1: f64) -> Result<(Vec<Vec<C64>>, C64, usize)> {
        let d = self.d;
        let k = cols.len();
        let (mut q, mut log_vol) = orthonormalize(cols);
        let solver = Dopri5 { rtol: self.opts.rtol, atol: self.opts.atol, ..Dopri5::default() };
        let chunks = ((x1 - x0).abs() / self.opts.chunk).ceil().max(1.0) as usize;
        let mut steps = 0;
        let mut phi_c = vec![ZERO; d / 2];
        let mut a = vec![ZERO; d * d];
        let mut aq = vec![ZERO; d * k];
        for ci in 0..chunks {
            let xa = x0 + (x1 - x0) * ci as f64 / chunks as f64;
            let xb = if ci + 1 == chunks { x1 } else { x0 + (x1 - x0) * (ci + 1) as f64 / chunks as f64 };
            let mut y = vec![0.0; 2 * d * k + 2];
            for (j, col) in q.iter().enumerate() {
                for i in 0..d {
                    y[2 * (i * k + j)] = col[i].re;
                    y[2 * (i * k + j) + 1] = col[i].im;
                }
            }
            let rhs = |x: f64, y: &[f64], dy: &mut [f64]| {
                self.a_matrix(x, lambda, &mut phi_c, &mut a);
                let qv = |i: usize, j: usize| C64::new(y[2 * (i * k + j)], y[2 * (i * k + j) + 1]);
                for i in 0..d {
                    for j in 0..k {
                        aq[i * k + j] = (0..d).map(|l| a[i * d + l] * qv(l, j)).sum();
                    }
                }
                let mut g = [[ZERO; 8]; 8];
                let mut tr = ZERO;
                for r in 0..k {
                    for s in 0..k {
                        g[r][s] = (0..d).map(|i| qv(i, r).conj() * aq[i * k + s]).sum();
                    }
                    tr += g[r][r];
                }
                for i in 0..d {
                    for j in 0..k {
                        let v = aq[i * k + j] - (0..k).map(|r| qv(i, r) * g[r][j]).sum::<C64>();
                        dy[2 * (i * k + j)] = v.re;
                        dy[2 * (i * k + j) + 1] = v.im;
                    }
                }
                // Volume relative to the asymptotic growth e^{(Σμ)x}.
                let dv = tr - rate_sum;
                dy[2 * d * k] = dv.re;
                dy[2 * d * k + 1] = dv.im;
            };
            let sol = solver.integrate(rhs, xa, &y, xb, |_, _| true)?;
            steps += sol.steps;
            if sol.y.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationFailure { x: sol.x, reason: "non-finite frame".into() });
            }
            let cols: Vec<Vec<C64>> =
                (0..k).map(|j| (0..d).map(|i| C64::new(sol.y[2 * (i * k + j)], sol.y[2 * (i * k + j) + 1])).collect()).collect();
            log_vol += C64::new(sol.y[2 * d * k], sol.y[2 * d * k + 1]);
            let (qn, lv) = orthonormalize(cols);
            q = qn;
            log_vol += lv;
        }
        Ok((q, log_vol, steps))
    }

    pub fn evaluate(&self, lambda: C64) -> Result<EvansValue> {
        let r = asymptotic_rates(lambda, self.omega, self.m, self.d / 2);
        if !r.is_hyperbolic() {
            return Err(Error::NotHyperbolic { re: lambda.re, im: lambda.im, n_minus: r.n_minus, n_zero: r.n_zero, n_plus: r.n_plus });
        }
        let (stable, tr_s) = self.asymptotic_basis(lambda, -1.0);
        let (qp, lp, sp) = self.transport(lambda, stable, tr_s, self.x_far, self.opts.x_match)?;
        if self.parity {
            let mut sectors = [ZERO; 2];
            for (s, basis) in sectors.iter_mut().zip(&self.parity_bases) {
                let cols: Vec<Vec<C64>> = qp.iter().chain(basis.iter()).cloned().collect();
                *s = det(&cols) * lp.exp();
            }
            return Ok(EvansValue { lambda, value: sectors[0] * sectors[1], sectors: Some((sectors[0], sectors[1])), steps: sp });
        }
        let (unstable, tr_u) = self.asymptotic_basis(lambda, 1.0);
        let (qm, lm, sm) = self.transport(lambda, unstable, tr_u, -self.x_far, self.opts.x_match)?;
        let cols: Vec<Vec<C64>> = qm.iter().chain(qp.iter()).cloned().collect();
        Ok(EvansValue { lambda, value: det(&cols) * (lm + lp).exp(), sectors: None, steps: sp + sm })
    }
}

/// Modified Gram–Schmidt; returns the orthonormal columns and `Σ log R_jj`.
fn orthonormalize(mut cols: Vec<Vec<C64>>) -> (Vec<Vec<C64>>, C64) {
    let mut log_vol = ZERO;
    for j in 0..cols.len() {
        for i in 0..j {
            let p: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
            let qi = cols[i].clone();
            for (v, q) in cols[j].iter_mut().zip(&qi) {
                *v -= p * q;
            }
        }
        let n = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        log_vol += C64::new(n.ln(), 0.0);
        for v in cols[j].iter_mut() {
            *v /= n;
        }
    }
    (cols, log_vol)
}

/// Determinant of the square matrix with the given columns (partial pivoting).
pub(crate) fn det(cols: &[Vec<C64>]) -> C64 {
    let n = cols.len();
    let mut a: Vec<Vec<C64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let mut out = C64::new(1.0, 0.0);
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm())).unwrap();
        if a[p][c].norm() == 0.0 {
            return ZERO;
        }
        if p != c {
            a.swap(p, c);
            out = -out;
        }
        out *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] -= f * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_small() {
        let c = |re: f64, im: f64| C64::new(re, im);
        let cols = vec![vec![c(1.0, 0.0), c(3.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 1.0)]];
        assert!((det(&cols) - c(-2.0, 1.0)).norm() < 1e-15);
        let (q, lv) = orthonormalize(cols.clone());
        assert!((det(&q) * lv.exp() - det(&cols)).norm() < 1e-14);
    }
}
