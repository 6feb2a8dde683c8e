//! Discretized linearizations at a solitary wave and their essential bands.

mod operator;

pub use operator::{import_binary, DerivTerm, OperatorKind, OperatorMeta, RealBlockOperator, SectorBasis, SpinorMode};

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::{rmat_identity, RMatrix, RealifiedRep};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::profiles::{Nonlinearity, RadialProfile, SolitaryWave};

/// Fourier first-derivative matrix (skew-symmetric, exact up to Nyquist).
pub fn differentiation_matrix(grid: &Grid1D) -> Mat<f64> {
    grid.diff1()
}

/// `s = 𝛗ᵀ𝛃𝛗`.
pub fn beta_density(rep: &RealifiedRep, phi: &[f64]) -> f64 {
    let d = 2 * rep.dim;
    let mut s = 0.0;
    for a in 0..d {
        for b in 0..d {
            s += phi[a] * rep.bbeta[(a, b)] * phi[b];
        }
    }
    s
}

/// Pointwise part of `𝕍 = −f(s)𝛃 − 2f′(s)(𝛃𝛗)(𝛃𝛗)ᵀ` at a realified spinor value.
pub fn potential_block(rep: &RealifiedRep, nl: &Nonlinearity, phi: &[f64]) -> RMatrix {
    let s = beta_density(rep, phi);
    let (fs, dfs) = (nl.f(s), nl.df(s));
    let bp = &rep.bbeta * Mat::from_fn(phi.len(), 1, |i, _| phi[i]);
    Mat::from_fn(phi.len(), phi.len(), |a, b| -fs * rep.bbeta[(a, b)] - 2.0 * dfs * bp[(a, 0)] * bp[(b, 0)])
}

/// Pointwise part of `𝕃₋ = 𝔻_m − ω − f(s)𝛃` (derivative term excluded).
pub fn lminus_block(rep: &RealifiedRep, nl: &Nonlinearity, omega: f64, m: f64, phi: &[f64]) -> RMatrix {
    let s = beta_density(rep, phi);
    let fs = nl.f(s);
    let d = phi.len();
    Mat::from_fn(d, d, |a, b| (m - fs) * rep.bbeta[(a, b)] - if a == b { omega } else { 0.0 })
}

/// `𝕁𝕃` together with its factors.
#[derive(Clone, Debug)]
pub struct NldLinearization {
    pub jl: RealBlockOperator,
    pub l: RealBlockOperator,
    pub l_minus: RealBlockOperator,
    pub v: RealBlockOperator,
}

fn mul_j(j: &RMatrix, op: &RealBlockOperator) -> RealBlockOperator {
    RealBlockOperator {
        kind: OperatorKind::JL,
        terms: op.terms.iter().map(|t| DerivTerm { order: t.order, coef: j * &t.coef }).collect(),
        local: op.local.iter().map(|p| j * p).collect(),
        j_factor: Some(j.clone()),
        ..op.clone()
    }
}

/// Assembles the linearization from realified node values (node-major, `2N` per node).
pub fn assemble_from_nodes(
    grid: &Grid1D,
    rep: &RealifiedRep,
    nl: &Nonlinearity,
    omega: f64,
    m: f64,
    phi: &[f64],
    rep_label: &str,
) -> Result<NldLinearization> {
    if rep.n != 1 {
        return Err(Error::DimensionMismatch(format!("only 1D linearizations are assembled, got n = {}", rep.n)));
    }
    let d = 2 * rep.dim;
    if phi.len() != d * grid.points {
        return Err(Error::DimensionMismatch(format!(
            "profile has {} real values, expected {} = {} x {}",
            phi.len(),
            d * grid.points,
            d,
            grid.points
        )));
    }
    let meta = OperatorMeta { omega: Some(omega), m, k: nl.k, rep_label: rep_label.to_string() };
    let mut v_local = Vec::with_capacity(grid.points);
    let mut lm_local = Vec::with_capacity(grid.points);
    let mut l_local = Vec::with_capacity(grid.points);
    for i in 0..grid.points {
        let p = &phi[i * d..(i + 1) * d];
        let v = potential_block(rep, nl, p);
        let free = Mat::from_fn(d, d, |a, b| m * rep.bbeta[(a, b)] - if a == b { omega } else { 0.0 });
        l_local.push(&free + &v);
        lm_local.push(lminus_block(rep, nl, omega, m, p));
        v_local.push(v);
    }
    let terms = vec![DerivTerm { order: 1, coef: rep.dcoef[0].clone() }];
    let base = |kind, terms: Vec<DerivTerm>, local| RealBlockOperator {
        kind,
        grid: *grid,
        block_dim: d,
        terms,
        local,
        meta: meta.clone(),
        j_factor: None,
        parity_spinor: Some(rep.bbeta.clone()),
    };
    let mut l = base(OperatorKind::L, terms.clone(), l_local);
    let mut l_minus = base(OperatorKind::LMinus, terms, lm_local);
    let mut v = base(OperatorKind::V, Vec::new(), v_local);
    l.symmetrize();
    l_minus.symmetrize();
    v.symmetrize();
    let jl = mul_j(&rep.j, &l);
    Ok(NldLinearization { jl, l, l_minus, v })
}

/// `𝕁𝕃(ω)` and its factors at `wave`.
pub fn assemble_nld_linearization(wave: &SolitaryWave, rep: &RealifiedRep) -> Result<NldLinearization> {
    if wave.dim() != rep.dim {
        return Err(Error::DimensionMismatch(format!("wave has {} components, representation {}", wave.dim(), rep.dim)));
    }
    let phi: Vec<f64> = (0..wave.grid.points).flat_map(|i| wave.realified(i)).collect();
    assemble_from_nodes(&wave.grid, rep, &wave.nonlinearity, wave.omega, wave.m, &phi, &wave.rep.label)
}

/// `𝕁(𝔻_m − ω)`.
pub fn free_operator(grid: &Grid1D, rep: &RealifiedRep, omega: f64, m: f64) -> Result<RealBlockOperator> {
    let phi = vec![0.0; 2 * rep.dim * grid.points];
    Ok(assemble_from_nodes(grid, rep, &Nonlinearity::power(1), omega, m, &phi, "free")?.jl)
}

/// `l₋`, `l₊` and `𝕛𝕝 = [[0, l₋], [−l₊, 0]]`.
#[derive(Clone, Debug)]
pub struct NlsLinearization {
    pub jl: RealBlockOperator,
    pub l_plus: RealBlockOperator,
    pub l_minus: RealBlockOperator,
}

/// NLS linearization at `u_k` sampled on `grid` by even reflection.
pub fn assemble_nls_linearization(profile: &RadialProfile, m: f64, k: u32, grid: &Grid1D) -> Result<NlsLinearization> {
    if profile.n != 1 {
        return Err(Error::DimensionMismatch(format!("NLS linearization needs a 1D profile, got n = {}", profile.n)));
    }
    let u = if *grid == profile.grid { profile.full_line() } else { profile.sample_on(grid) };
    Ok(assemble_nls_from_samples(&u, m, k, grid))
}

/// Same as [`assemble_nls_linearization`] from grid samples of `u`.
pub fn assemble_nls_from_samples(u: &[f64], m: f64, k: u32, grid: &Grid1D) -> NlsLinearization {
    let c = 0.5 / m;
    let meta = OperatorMeta { omega: None, m, k, rep_label: "scalar".into() };
    let lm: Vec<f64> = u.iter().map(|&v| c - v.powi(2 * k as i32)).collect();
    let lp: Vec<f64> = u.iter().zip(&lm).map(|(&v, &l)| l - 2.0 * k as f64 * v.powi(2 * k as i32)).collect();
    let scalar = |kind, vals: &[f64]| RealBlockOperator {
        kind,
        grid: *grid,
        block_dim: 1,
        terms: vec![DerivTerm { order: 2, coef: Mat::from_fn(1, 1, |_, _| -c) }],
        local: vals.iter().map(|&v| Mat::from_fn(1, 1, |_, _| v)).collect(),
        meta: meta.clone(),
        j_factor: None,
        parity_spinor: Some(rmat_identity(1)),
    };
    let j = Mat::from_fn(2, 2, |a, b| match (a, b) {
        (0, 1) => 1.0,
        (1, 0) => -1.0,
        _ => 0.0,
    });
    let diag = RealBlockOperator {
        kind: OperatorKind::NlsJl,
        grid: *grid,
        block_dim: 2,
        terms: vec![DerivTerm { order: 2, coef: Mat::from_fn(2, 2, |a, b| if a == b { -c } else { 0.0 }) }],
        local: lp.iter().zip(&lm).map(|(&p, &q)| Mat::from_fn(2, 2, |a, b| if a != b { 0.0 } else if a == 0 { p } else { q })).collect(),
        meta: meta.clone(),
        j_factor: None,
        parity_spinor: Some(rmat_identity(2)),
    };
    let mut jl = mul_j(&j, &diag);
    jl.kind = OperatorKind::NlsJl;
    NlsLinearization { jl, l_plus: scalar(OperatorKind::NlsLPlus, &lp), l_minus: scalar(OperatorKind::NlsLMinus, &lm) }
}

/// Essential spectrum `i(ℝ ∖ (−g, g))` with gap edge `g` and embedded threshold `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialBands {
    pub omega: f64,
    pub m: f64,
    pub gap_edge: f64,
    pub threshold: f64,
}

impl EssentialBands {
    /// Distance from `λ` to the essential spectrum.
    pub fn distance(&self, lambda: C64) -> f64 {
        let y = lambda.im.abs();
        if y >= self.gap_edge {
            lambda.re.abs()
        } else {
            lambda.re.hypot(self.gap_edge - y)
        }
    }

    /// Distance to the nearest of `±i g`, `±i t`.
    pub fn threshold_distance(&self, lambda: C64) -> f64 {
        self.thresholds().iter().map(|t| (lambda - t).norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn thresholds(&self) -> [C64; 4] {
        let (g, t) = (self.gap_edge, self.threshold);
        [C64::new(0.0, g), C64::new(0.0, -g), C64::new(0.0, t), C64::new(0.0, -t)]
    }

    /// True when `λ` lies on the imaginary axis inside the gap.
    pub fn in_gap(&self, lambda: C64) -> bool {
        lambda.im.abs() < self.gap_edge
    }
}

/// Bands of `𝕁𝕃(ω)`: gap edge `m − |ω|`, threshold `m + |ω|`.
pub fn essential_bands(omega: f64, m: f64) -> Result<EssentialBands> {
    if omega.abs() > m {
        return Err(Error::OutsideGap { omega, m });
    }
    Ok(EssentialBands { omega, m, gap_edge: m - omega.abs(), threshold: m + omega.abs() })
}

/// Bands of `𝕛𝕝`: both edges at `1/2m`.
pub fn nls_essential_bands(m: f64) -> EssentialBands {
    let e = 0.5 / m;
    EssentialBands { omega: 0.0, m, gap_edge: e, threshold: e }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{default_rep_1d, realify};

    #[test]
    fn bands() {
        let b = essential_bands(0.95, 1.0).unwrap();
        assert!((b.gap_edge - 0.05).abs() < 1e-15 && (b.threshold - 1.95).abs() < 1e-15);
        let z = essential_bands(0.0, 1.0).unwrap();
        assert_eq!(z.gap_edge, z.threshold);
        assert_eq!(essential_bands(1.0, 1.0).unwrap().gap_edge, 0.0);
        assert!(essential_bands(1.2, 1.0).is_err());
        assert!((b.distance(C64::new(0.0, 0.02)) - 0.03).abs() < 1e-15);
        assert_eq!(b.distance(C64::new(0.1, 1.0)), 0.1);
    }

    #[test]
    fn free_operator_is_j_times_free_dirac() {
        let grid = Grid1D::new(5.0, 16).unwrap();
        let r = realify(&default_rep_1d());
        let op = free_operator(&grid, &r, 0.3, 1.0).unwrap();
        assert!(op.local.iter().all(|p| p.norm_max() <= 1.3));
        let l = assemble_from_nodes(&grid, &r, &Nonlinearity::power(1), 0.3, 1.0, &vec![0.0; 4 * 16], "t").unwrap();
        assert_eq!(l.v.local.iter().map(|p| p.norm_max()).fold(0.0, f64::max), 0.0);
        assert!(l.l.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn differentiation_matrix_properties() {
        let g = Grid1D::new(3.0, 32).unwrap();
        let d = differentiation_matrix(&g);
        let skew = (&d + d.transpose()).norm_max();
        assert!(skew < 1e-12);
        let ones = Mat::<f64>::from_fn(32, 1, |_, _| 1.0);
        assert!((&d * &ones).norm_max() < 1e-12);
    }
}
