//! Dense eigensolver on symmetry sectors.
//!
//! The operator is split, in this order, into groups of spinor components that
//! never couple, into parity sectors of `P = S ⊗ (x ↦ −x)` when `S` is a
//! diagonal involution commuting with the operator, and finally into the
//! `±1` eigenspaces of `K = diag(I, −I)` when `K` anticommutes with it. In the
//! last case the sector matrix is `[[0, B], [C, 0]]`, and the eigenvalues are
//! `±√μ` for the eigenvalues `μ` of `BC`, with eigenvectors `(a, Ca/λ)`.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Eigenpair, SpectrumResult};
use crate::clifford::RMatrix;
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::grid::ParityBasis;
use crate::linearize::{RealBlockOperator, SectorBasis, SpinorMode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KeepVectors {
    All,
    /// Keep eigenvectors with localization score below the bound.
    Localized(f64),
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub keep: KeepVectors,
    /// Localization window is `|x| > outer_fraction · L`.
    pub outer_fraction: f64,
    /// Allow the parity and `K` reductions (disable to force one dense solve).
    pub use_symmetry: bool,
    pub exec: Execution,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { keep: KeepVectors::Localized(1e-3), outer_fraction: 0.5, use_symmetry: true, exec: Execution::default() }
    }
}

/// Which reduced problem produced an eigenpair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorTag {
    pub group: usize,
    /// `±1`, or `0` when no parity was used.
    pub parity: i8,
    pub hamiltonian: bool,
}

struct Sector {
    tag: SectorTag,
    /// `(re, im)` halves for the Hamiltonian route, or one basis.
    re: SectorBasis,
    im: Option<SectorBasis>,
}

fn coupling_groups(op: &RealBlockOperator) -> Vec<Vec<usize>> {
    let d = op.block_dim;
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let join = |a: usize, b: usize, p: &mut Vec<usize>| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra.max(rb)] = ra.min(rb);
        }
    };
    let mats = op.terms.iter().map(|t| &t.coef).chain(op.local.iter());
    for mtx in mats {
        for a in 0..d {
            for b in 0..d {
                if mtx[(a, b)] != 0.0 {
                    join(a, b, &mut parent);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; d];
    for c in 0..d {
        let r = find(&mut parent, c);
        match root_of[r] {
            Some(g) => groups[g].push(c),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![c]);
            }
        }
    }
    groups
}

fn diagonal_involution(s: &RMatrix) -> Option<Vec<i8>> {
    let d = s.nrows();
    let mut signs = Vec::with_capacity(d);
    for a in 0..d {
        for b in 0..d {
            if a != b && s[(a, b)] != 0.0 {
                return None;
            }
        }
        match s[(a, a)] {
            x if x == 1.0 => signs.push(1),
            x if x == -1.0 => signs.push(-1),
            _ => return None,
        }
    }
    Some(signs)
}

fn unit(d: usize, c: usize) -> Vec<f64> {
    (0..d).map(|t| (t == c) as u8 as f64).collect()
}

fn sectors(op: &RealBlockOperator, use_symmetry: bool) -> Vec<Sector> {
    let d = op.block_dim;
    let grid = &op.grid;
    let groups = if use_symmetry { coupling_groups(op) } else { vec![(0..d).collect()] };
    let parity = op
        .parity_spinor
        .as_ref()
        .filter(|_| use_symmetry)
        .and_then(|s| diagonal_involution(s).filter(|_| op.has_parity(s, 1e-12)));
    let kc = use_symmetry && d % 2 == 0 && op.j_factor.is_some() && {
        let k = Mat::from_fn(d, d, |a, b| if a != b { 0.0 } else if a < d / 2 { 1.0 } else { -1.0 });
        op.anticommutes_with(&k, 1e-12)
    };
    let mut out = Vec::new();
    for (gi, group) in groups.iter().enumerate() {
        let parities: Vec<i8> = if parity.is_some() { vec![1, -1] } else { vec![0] };
        for &p in &parities {
            let mode = |c: usize| SpinorMode {
                spinor: unit(d, c),
                grid: match &parity {
                    Some(signs) => ParityBasis::with_parity(grid, signs[c] * p),
                    None => ParityBasis::full(grid),
                },
            };
            let tag = SectorTag { group: gi, parity: p, hamiltonian: false };
            if kc {
                let re: Vec<SpinorMode> = group.iter().filter(|&&c| c < d / 2).map(|&c| mode(c)).collect();
                let im: Vec<SpinorMode> = group.iter().filter(|&&c| c >= d / 2).map(|&c| mode(c)).collect();
                let (re, im) = (SectorBasis::new(re), SectorBasis::new(im));
                if re.len() == im.len() && !re.is_empty() {
                    out.push(Sector { tag: SectorTag { hamiltonian: true, ..tag }, re, im: Some(im) });
                    continue;
                }
            }
            let basis = SectorBasis::new(group.iter().map(|&c| mode(c)).collect());
            if !basis.is_empty() {
                out.push(Sector { tag, re: basis, im: None });
            }
        }
    }
    out
}

fn split(a: &Mat<C64>) -> (Mat<f64>, Mat<f64>) {
    (Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].re), Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].im))
}

/// `R · A` for real `R` and complex `A`.
fn rmul(r: &Mat<f64>, re: &Mat<f64>, im: &Mat<f64>) -> Mat<C64> {
    let (x, y) = (r * re, r * im);
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| C64::new(x[(i, j)], y[(i, j)]))
}

fn col(m: &Mat<C64>, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

struct Ctx<'a> {
    op: &'a RealBlockOperator,
    op_norm: f64,
    opts: &'a EigenOptions,
}

impl Ctx<'_> {
    /// Diagnostics of one eigenpair given sector coefficients of `ζ` and `Aζ`.
    fn pair(&self, basis: &SectorBasis, j_action: Option<&[(usize, usize, f64)]>, lambda: C64, z: Vec<C64>, az: &[C64], residual_abs: f64, tag: SectorTag) -> Eigenpair {
        let nz = norm(&z);
        let mask = basis.outer_mask(&self.op.grid, self.opts.outer_fraction * self.op.grid.half_length);
        let outer: f64 = z.iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| v.norm_sqr()).sum();
        let (krein_l, krein_j) = match j_action {
            Some(ja) => {
                // 𝕃 = −𝕁 (𝕁𝕃) since 𝕁² = −I.
                let l_z: Vec<C64> = basis.apply_spinor(ja, az).into_iter().map(|v| -v).collect();
                let j_z = basis.apply_spinor(ja, &z);
                let n2 = nz * nz;
                (dot(&z, &l_z) / n2, dot(&z, &j_z) / n2)
            }
            None => (C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0)),
        };
        let keep = match self.opts.keep {
            KeepVectors::All => true,
            KeepVectors::Localized(r) => (outer.sqrt() / nz) < r,
            KeepVectors::None => false,
        };
        let vector = keep.then(|| {
            let scale = 1.0 / nz;
            basis.expand(&z.iter().map(|v| v * scale).collect::<Vec<_>>(), &self.op.grid)
        });
        Eigenpair {
            lambda,
            residual: residual_abs / (self.op_norm.max(f64::MIN_POSITIVE) * nz),
            rho: outer.sqrt() / nz,
            krein_l,
            krein_j,
            sector: tag,
            label: None,
            vector,
        }
    }

    fn hamiltonian(&self, s: &Sector, index: usize) -> Result<Vec<Eigenpair>> {
        let im = s.im.as_ref().expect("hamiltonian sector has two halves");
        let b = self.op.reduce(&s.re, im);
        let c = self.op.reduce(im, &s.re);
        let m = &b * &c;
        let evd = m.eigen().map_err(|_| Error::NoConvergenceQR { index })?;
        let n = m.nrows();
        let u = evd.U().to_owned();
        let mu: Vec<C64> = (0..n).map(|j| evd.S()[j]).collect();
        let (ure, uim) = split(&u);
        let cu = rmul(&c, &ure, &uim);
        let mu_u = rmul(&m, &ure, &uim);
        let combined = SectorBasis::new(s.re.modes.iter().chain(&im.modes).cloned().collect());
        let j_action = self.op.j_factor.as_ref().map(|j| combined.spinor_action(j));
        let zero = C64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(2 * n);
        for jx in 0..n {
            let a = col(&u, jx);
            let ca = col(&cu, jx);
            let ma = col(&mu_u, jx);
            let r_m = norm(&ma.iter().zip(&a).map(|(x, y)| x - mu[jx] * y).collect::<Vec<_>>());
            let root = mu[jx].sqrt();
            for sign in [1.0, -1.0] {
                let lambda = root * sign;
                // Near a Jordan block (λ ≈ 0) the vectors (a, 0) or (0, Ca) can be far
                // better approximate eigenvectors than (a, Ca/λ); keep the best one.
                let (na, nca, nma, ln) = (norm(&a), norm(&ca), norm(&ma), lambda.norm());
                let mut best = (f64::INFINITY, 0usize);
                let mut consider = |rel: f64, k: usize| {
                    if rel.is_finite() && rel < best.0 {
                        best = (rel, k);
                    }
                };
                if ln > 0.0 {
                    consider((r_m / ln) / (na * na + nca * nca / (ln * ln)).sqrt(), 0);
                }
                if na > 0.0 {
                    consider((ln * ln * na * na + nca * nca).sqrt() / na, 1);
                }
                if nca > 0.0 {
                    consider((nma * nma + ln * ln * nca * nca).sqrt() / nca, 2);
                }
                let (z, az, res): (Vec<C64>, Vec<C64>, f64) = match best.1 {
                    0 => {
                        let inv = 1.0 / lambda;
                        (
                            a.iter().copied().chain(ca.iter().map(|v| v * inv)).collect(),
                            ma.iter().map(|v| v * inv).chain(ca.iter().copied()).collect(),
                            r_m / ln,
                        )
                    }
                    1 => (
                        a.iter().copied().chain(vec![zero; n]).collect(),
                        vec![zero; n].into_iter().chain(ca.iter().copied()).collect(),
                        (ln * ln * na * na + nca * nca).sqrt(),
                    ),
                    _ => (
                        vec![zero; n].into_iter().chain(ca.iter().copied()).collect(),
                        ma.iter().copied().chain(vec![zero; n]).collect(),
                        (nma * nma + ln * ln * nca * nca).sqrt(),
                    ),
                };
                out.push(self.pair(&combined, j_action.as_deref(), lambda, z, &az, res, s.tag));
            }
        }
        Ok(out)
    }

    fn generic(&self, s: &Sector, index: usize) -> Result<Vec<Eigenpair>> {
        let h = self.op.reduce(&s.re, &s.re);
        let evd = h.eigen().map_err(|_| Error::NoConvergenceQR { index })?;
        let n = h.nrows();
        let u = evd.U().to_owned();
        let (ure, uim) = split(&u);
        let hu = rmul(&h, &ure, &uim);
        let j_action = self.op.j_factor.as_ref().map(|j| s.re.spinor_action(j));
        Ok((0..n)
            .map(|jx| {
                let lambda = evd.S()[jx];
                let z = col(&u, jx);
                let hz = col(&hu, jx);
                let res = norm(&hz.iter().zip(&z).map(|(x, y)| x - lambda * y).collect::<Vec<_>>());
                self.pair(&s.re, j_action.as_deref(), lambda, z, &hz, res, s.tag)
            })
            .collect())
    }
}

/// Full eigendecomposition of `op`, unclassified, sorted by `(Re λ, Im λ)`.
pub fn eigensolve(op: &RealBlockOperator, opts: &EigenOptions) -> Result<SpectrumResult> {
    if op.local.iter().any(|p| (0..p.nrows()).any(|i| (0..p.ncols()).any(|j| !p[(i, j)].is_finite())))
        || op.terms.iter().any(|t| t.coef.norm_max().is_nan())
    {
        return Err(Error::InvalidInput("operator has non-finite entries".into()));
    }
    let secs = sectors(op, opts.use_symmetry);
    let ctx = Ctx { op, op_norm: op.norm_inf(), opts };
    let parts = map_slice(opts.exec, &secs.iter().enumerate().collect::<Vec<_>>(), |(i, s)| {
        if s.im.is_some() {
            ctx.hamiltonian(s, *i)
        } else {
            ctx.generic(s, *i)
        }
    });
    let mut pairs = Vec::with_capacity(op.dim());
    for p in parts {
        pairs.extend(p?);
    }
    pairs.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    Ok(SpectrumResult {
        kind: op.kind,
        grid: op.grid,
        block_dim: op.block_dim,
        op_norm: ctx.op_norm,
        omega: op.meta.omega,
        m: op.meta.m,
        pairs,
        bands: None,
    })
}

/// Eigenvalues of a dense real matrix (no vectors), sorted by `(Re, Im)`.
pub fn dense_eigenvalues(a: &Mat<f64>) -> Result<Vec<C64>> {
    let mut ev = a.eigenvalues().map_err(|_| Error::NoConvergenceQR { index: 0 })?;
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ev)
}
