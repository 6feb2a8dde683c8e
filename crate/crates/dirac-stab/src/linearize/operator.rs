//! Block operators `Σ_p K_p ⊗ ∂^p + diag(P_i)` on a periodic grid.
//!
//! Matrices are kept in this factored form: a handful of `d×d` derivative
//! coefficients, one `d×d` pointwise block per node, and the circulant Fourier
//! kernels. Dense materialisation (node-major index `i·d + c`) is available on
//! demand, but the eigensolver works on reduced sector matrices built directly
//! from the factors.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::RMatrix;
use crate::error::{Error, Result};
use crate::grid::{reduce_kernel, Grid1D, ParityBasis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "JL")]
    JL,
    #[serde(rename = "L")]
    L,
    #[serde(rename = "L_minus")]
    LMinus,
    #[serde(rename = "V")]
    V,
    #[serde(rename = "jl")]
    NlsJl,
    #[serde(rename = "l_plus")]
    NlsLPlus,
    #[serde(rename = "l_minus")]
    NlsLMinus,
}

impl OperatorKind {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, OperatorKind::JL | OperatorKind::NlsJl)
    }

    pub fn label(self) -> &'static str {
        match self {
            OperatorKind::JL => "JL",
            OperatorKind::L => "L",
            OperatorKind::LMinus => "L_minus",
            OperatorKind::V => "V",
            OperatorKind::NlsJl => "jl",
            OperatorKind::NlsLPlus => "l_plus",
            OperatorKind::NlsLMinus => "l_minus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub omega: Option<f64>,
    pub m: f64,
    pub k: u32,
    pub rep_label: String,
}

/// `K ⊗ ∂^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivTerm {
    pub order: u8,
    pub coef: RMatrix,
}

#[derive(Clone, Debug)]
pub struct RealBlockOperator {
    pub kind: OperatorKind,
    pub grid: Grid1D,
    pub block_dim: usize,
    pub terms: Vec<DerivTerm>,
    pub local: Vec<RMatrix>,
    pub meta: OperatorMeta,
    /// For `JL`/`jl`: the constant skew factor `J` with `op = (J ⊗ I) · L`.
    pub j_factor: Option<RMatrix>,
    /// Spinor part `S` of the candidate parity `P = S ⊗ (x ↦ −x)`.
    pub parity_spinor: Option<RMatrix>,
}

fn kernel(grid: &Grid1D, order: u8) -> Vec<f64> {
    match order {
        1 => grid.d1_kernel(),
        2 => grid.d2_kernel(),
        _ => panic!("derivative order {order} unsupported"),
    }
}

fn bilinear(u: &[f64], m: &RMatrix, v: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, ua) in u.iter().enumerate() {
        if *ua == 0.0 {
            continue;
        }
        for (b, vb) in v.iter().enumerate() {
            s += ua * m[(a, b)] * vb;
        }
    }
    s
}

/// One spinor direction tensored with a parity basis of grid functions.
#[derive(Clone, Debug)]
pub struct SpinorMode {
    pub spinor: Vec<f64>,
    pub grid: ParityBasis,
}

/// Orthonormal basis of a symmetry sector (or of the whole space).
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub modes: Vec<SpinorMode>,
    offsets: Vec<usize>,
}

impl SectorBasis {
    pub fn new(modes: Vec<SpinorMode>) -> Self {
        let mut offsets = Vec::with_capacity(modes.len() + 1);
        let mut o = 0;
        for m in &modes {
            offsets.push(o);
            o += m.grid.len();
        }
        offsets.push(o);
        Self { modes, offsets }
    }

    /// Standard basis of `ℝ^{d N_g}`, spinor-major.
    pub fn full(grid: &Grid1D, d: usize) -> Self {
        Self::new(
            (0..d)
                .map(|c| SpinorMode { spinor: (0..d).map(|t| (t == c) as u8 as f64).collect(), grid: ParityBasis::full(grid) })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offset(&self, mode: usize) -> usize {
        self.offsets[mode]
    }

    /// Real node-major vector with the given sector coefficients.
    pub fn expand_real(&self, coefs: &[f64], grid: &Grid1D) -> Vec<f64> {
        let d = self.modes.first().map_or(0, |m| m.spinor.len());
        let mut out = vec![0.0; d * grid.points];
        for (mi, mode) in self.modes.iter().enumerate() {
            let base = self.offsets[mi];
            for (g, bf) in mode.grid.funcs.iter().enumerate() {
                let a = coefs[base + g];
                if a == 0.0 {
                    continue;
                }
                for (i, c) in bf.entries() {
                    for (comp, w) in mode.spinor.iter().enumerate() {
                        out[i * d + comp] += a * c * w;
                    }
                }
            }
        }
        out
    }

    /// Complex node-major vector with the given sector coefficients.
    pub fn expand(&self, coefs: &[C64], grid: &Grid1D) -> Vec<C64> {
        let d = self.modes.first().map_or(0, |m| m.spinor.len());
        let mut out = vec![C64::new(0.0, 0.0); d * grid.points];
        for (mi, mode) in self.modes.iter().enumerate() {
            let base = self.offsets[mi];
            for (g, bf) in mode.grid.funcs.iter().enumerate() {
                let a = coefs[base + g];
                for (i, c) in bf.entries() {
                    for (comp, w) in mode.spinor.iter().enumerate() {
                        if *w != 0.0 {
                            out[i * d + comp] += a * (c * w);
                        }
                    }
                }
            }
        }
        out
    }

    /// Sector coefficients of a node-major real vector (orthogonal projection).
    pub fn project_real(&self, v: &[f64]) -> Vec<f64> {
        let d = self.modes.first().map_or(0, |m| m.spinor.len());
        let mut out = vec![0.0; self.len()];
        for (mi, mode) in self.modes.iter().enumerate() {
            let base = self.offsets[mi];
            for (g, bf) in mode.grid.funcs.iter().enumerate() {
                let mut s = 0.0;
                for (i, c) in bf.entries() {
                    for (comp, w) in mode.spinor.iter().enumerate() {
                        s += c * w * v[i * d + comp];
                    }
                }
                out[base + g] = s;
            }
        }
        out
    }

    /// Squared weight of each coefficient on `|x| > cut` (for localisation scores).
    pub fn outer_mask(&self, grid: &Grid1D, cut: f64) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.len());
        for mode in &self.modes {
            for bf in &mode.grid.funcs {
                out.push(grid.node(bf.primary()).abs() > cut);
            }
        }
        out
    }

    /// `(Wᵀ M W)` restricted to pairs of modes with identical grid parity, as a
    /// map on sector coefficients. Valid for node-independent spinor matrices `M`.
    pub fn spinor_action(&self, m: &RMatrix) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, ma) in self.modes.iter().enumerate() {
            for (b, mb) in self.modes.iter().enumerate() {
                if ma.grid.parity != mb.grid.parity {
                    continue;
                }
                let v = bilinear(&ma.spinor, m, &mb.spinor);
                if v != 0.0 {
                    out.push((a, b, v));
                }
            }
        }
        out
    }

    /// Applies a node-independent spinor matrix to complex sector coefficients.
    pub fn apply_spinor(&self, action: &[(usize, usize, f64)], x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        for &(a, b, v) in action {
            let (oa, ob) = (self.offsets[a], self.offsets[b]);
            let len = self.modes[a].grid.len();
            for g in 0..len {
                out[oa + g] += x[ob + g] * v;
            }
        }
        out
    }
}

impl RealBlockOperator {
    pub fn dim(&self) -> usize {
        self.block_dim * self.grid.points
    }

    /// Dense node-major matrix.
    pub fn dense(&self) -> Mat<f64> {
        let d = self.block_dim;
        let n = self.grid.points;
        let kernels: Vec<Vec<f64>> = self.terms.iter().map(|t| kernel(&self.grid, t.order)).collect();
        Mat::from_fn(n * d, n * d, |r, c| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (c / d, c % d);
            let k = (i + n - j) % n;
            let mut s = 0.0;
            for (t, ker) in self.terms.iter().zip(&kernels) {
                s += t.coef[(a, b)] * ker[k];
            }
            if i == j {
                s += self.local[i][(a, b)];
            }
            s
        })
    }

    /// Matrix–vector product on a node-major complex vector.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let d = self.block_dim;
        let n = self.grid.points;
        assert_eq!(x.len(), n * d);
        let mut out = vec![C64::new(0.0, 0.0); n * d];
        for i in 0..n {
            for a in 0..d {
                let mut s = C64::new(0.0, 0.0);
                for b in 0..d {
                    s += x[i * d + b] * self.local[i][(a, b)];
                }
                out[i * d + a] = s;
            }
        }
        for t in &self.terms {
            let ker = kernel(&self.grid, t.order);
            // y_b = ∂^p x_b, then out_a += Σ_b K_ab y_b
            for b in 0..d {
                let col: Vec<C64> = (0..n).map(|j| x[j * d + b]).collect();
                if col.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                for i in 0..n {
                    let mut y = C64::new(0.0, 0.0);
                    for (j, cj) in col.iter().enumerate() {
                        y += cj * ker[(i + n - j) % n];
                    }
                    for a in 0..d {
                        let kab = t.coef[(a, b)];
                        if kab != 0.0 {
                            out[i * d + a] += y * kab;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let c: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.apply(&c).into_iter().map(|z| z.re).collect()
    }

    /// `(‖A − Aᵀ‖_F, ‖A‖_F)`, computed from the factors.
    pub fn symmetry_defect(&self) -> (f64, f64) {
        let d = self.block_dim;
        let n = self.grid.points;
        let kernels: Vec<Vec<f64>> = self.terms.iter().map(|t| kernel(&self.grid, t.order)).collect();
        let entry = |k: usize, a: usize, b: usize| -> f64 {
            self.terms.iter().zip(&kernels).map(|(t, ker)| t.coef[(a, b)] * ker[k]).sum()
        };
        let (mut diff, mut norm) = (0.0, 0.0);
        for k in 1..n {
            for a in 0..d {
                for b in 0..d {
                    let e = entry(k, a, b);
                    let et = entry(n - k, b, a);
                    diff += n as f64 * (e - et).powi(2);
                    norm += n as f64 * e * e;
                }
            }
        }
        for i in 0..n {
            for a in 0..d {
                for b in 0..d {
                    let e = entry(0, a, b) + self.local[i][(a, b)];
                    let et = entry(0, b, a) + self.local[i][(b, a)];
                    diff += (e - et).powi(2);
                    norm += e * e;
                }
            }
        }
        (diff.sqrt(), norm.sqrt())
    }

    /// Relative Frobenius hermiticity residual.
    pub fn hermiticity_residual(&self) -> f64 {
        let (d, n) = self.symmetry_defect();
        if n == 0.0 {
            0.0
        } else {
            d / n
        }
    }

    /// Exact infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let d = self.block_dim;
        let n = self.grid.points;
        let kernels: Vec<Vec<f64>> = self.terms.iter().map(|t| kernel(&self.grid, t.order)).collect();
        let mut best = 0.0_f64;
        let off: Vec<f64> = (0..d)
            .map(|a| {
                let mut s = 0.0;
                for k in 1..n {
                    for b in 0..d {
                        let e: f64 = self.terms.iter().zip(&kernels).map(|(t, ker)| t.coef[(a, b)] * ker[k]).sum();
                        s += e.abs();
                    }
                }
                s
            })
            .collect();
        for i in 0..n {
            for a in 0..d {
                let mut s = off[a];
                for b in 0..d {
                    let e: f64 = self.terms.iter().zip(&kernels).map(|(t, ker)| t.coef[(a, b)] * ker[0]).sum::<f64>() + self.local[i][(a, b)];
                    s += e.abs();
                }
                best = best.max(s);
            }
        }
        best
    }

    /// Replaces each factor by its (skew-)symmetric part so that the assembled
    /// matrix is exactly symmetric.
    pub fn symmetrize(&mut self) {
        let d = self.block_dim;
        for t in &mut self.terms {
            let sign = if t.order % 2 == 0 { 1.0 } else { -1.0 };
            let c = t.coef.clone();
            t.coef = Mat::from_fn(d, d, |a, b| 0.5 * (c[(a, b)] + sign * c[(b, a)]));
        }
        for p in &mut self.local {
            let c = p.clone();
            *p = Mat::from_fn(d, d, |a, b| 0.5 * (c[(a, b)] + c[(b, a)]));
        }
    }

    /// Checks `P = S ⊗ R` commutes with the operator (`S K_p S = (−1)^p K_p`,
    /// `P_{−x} = S P_x S`) to relative tolerance `tol`.
    pub fn has_parity(&self, s: &RMatrix, tol: f64) -> bool {
        let scale = self.local.iter().map(|p| p.norm_max()).fold(0.0, f64::max).max(1.0);
        for t in &self.terms {
            let sign = if t.order % 2 == 0 { 1.0 } else { -1.0 };
            let conj = s * &t.coef * s;
            if (&conj - &t.coef * sign).norm_max() > tol * t.coef.norm_max().max(1.0) {
                return false;
            }
        }
        (0..self.grid.points).all(|i| {
            let j = self.grid.mirror(i);
            (&(s * &self.local[i] * s) - &self.local[j]).norm_max() <= tol * scale
        })
    }

    /// Checks that `K` anticommutes with every factor.
    pub fn anticommutes_with(&self, k: &RMatrix, tol: f64) -> bool {
        let scale = self.local.iter().map(|p| p.norm_max()).fold(0.0, f64::max).max(1.0);
        self.terms.iter().all(|t| (&(k * &t.coef * k) + &t.coef).norm_max() <= tol * t.coef.norm_max().max(1.0))
            && self.local.iter().all(|p| (&(k * p * k) + p).norm_max() <= tol * scale)
    }

    /// Matrix of the operator between two sector bases: `Rᵀ A C`.
    pub fn reduce(&self, rows: &SectorBasis, cols: &SectorBasis) -> Mat<f64> {
        let n = self.grid.points;
        let mut kernels: HashMap<(u8, i8, i8), Mat<f64>> = HashMap::new();
        let mut out = Mat::<f64>::zeros(rows.len(), cols.len());
        for (ri, rm) in rows.modes.iter().enumerate() {
            for (ci, cm) in cols.modes.iter().enumerate() {
                let (r0, c0) = (rows.offset(ri), cols.offset(ci));
                for t in &self.terms {
                    let w = bilinear(&rm.spinor, &t.coef, &cm.spinor);
                    if w == 0.0 {
                        continue;
                    }
                    let key = (t.order, rm.grid.parity, cm.grid.parity);
                    let red = kernels
                        .entry(key)
                        .or_insert_with(|| reduce_kernel(&kernel(&self.grid, t.order), &rm.grid, &cm.grid));
                    for a in 0..rm.grid.len() {
                        for b in 0..cm.grid.len() {
                            out[(r0 + a, c0 + b)] += w * red[(a, b)];
                        }
                    }
                }
                // Pointwise part: basis functions overlap only on shared nodes.
                let mut at_node: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
                for (b, bf) in cm.grid.funcs.iter().enumerate() {
                    for (i, c) in bf.entries() {
                        at_node[i].push((b, c));
                    }
                }
                for (a, af) in rm.grid.funcs.iter().enumerate() {
                    for (i, ca) in af.entries() {
                        if at_node[i].is_empty() {
                            continue;
                        }
                        let w = bilinear(&rm.spinor, &self.local[i], &cm.spinor);
                        if w == 0.0 {
                            continue;
                        }
                        for &(b, cb) in &at_node[i] {
                            out[(r0 + a, c0 + b)] += ca * cb * w;
                        }
                    }
                }
            }
        }
        out
    }

    /// Writes the dense matrix as row-major little-endian `(re, im)` f64 pairs
    /// plus a JSON sidecar `<path>.json`.
    pub fn export_binary(&self, path: &Path) -> Result<()> {
        let dense = self.dense();
        let n = dense.nrows();
        let mut buf = Vec::with_capacity(n * n * 16);
        for i in 0..n {
            for j in 0..n {
                buf.extend_from_slice(&dense[(i, j)].to_le_bytes());
                buf.extend_from_slice(&0.0f64.to_le_bytes());
            }
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        let sidecar = serde_json::json!({
            "kind": self.kind.label(),
            "rows": n,
            "cols": n,
            "layout": "row-major, little-endian f64 (re, im) pairs, node-major index i*block_dim + component",
            "block_dim": self.block_dim,
            "grid": self.grid,
            "meta": self.meta,
        });
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        std::fs::write(side, serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Io(e.to_string()))?)?;
        Ok(())
    }
}

/// Reads a matrix written by [`RealBlockOperator::export_binary`].
pub fn import_binary(path: &Path, n: usize) -> Result<Mat<C64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() != n * n * 16 {
        return Err(Error::DimensionMismatch(format!("expected {} bytes, found {}", n * n * 16, bytes.len())));
    }
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    Ok(Mat::from_fn(n, n, |i, j| {
        let o = (i * n + j) * 16;
        C64::new(f(o), f(o + 8))
    }))
}
