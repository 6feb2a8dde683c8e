//! Dirac matrices from fermionic creation/annihilation operators and their
//! realification.
//!
//! With `d` fermionic modes the Jordan–Wigner strings
//!
//! ```text
//! e_j = Z ⊗ … ⊗ Z ⊗ X ⊗ I ⊗ … ⊗ I      f_j = Z ⊗ … ⊗ Z ⊗ Y ⊗ I ⊗ … ⊗ I
//! ```
//!
//! (`j - 1` leading `Z` factors) together with the chirality `Z^{⊗d}` give
//! `2d + 1` pairwise anticommuting hermitian involutions on `ℂ^{2^d}`.
//! `β` is the chirality, `α^j` are taken from `f_1, e_1, f_2, e_2, …`, and
//! the auxiliary `α⁰`, `Γ` are the next unused generators. All entries are in
//! `{0, ±1, ±i}`, so products are exact in floating point.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = Mat<C64>;
pub type RMatrix = Mat<f64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn pauli(which: char) -> CMatrix {
    let m: [[C64; 2]; 2] = match which {
        'I' => [[ONE, ZERO], [ZERO, ONE]],
        'X' => [[ZERO, ONE], [ONE, ZERO]],
        'Y' => [[ZERO, -I], [I, ZERO]],
        'Z' => [[ONE, ZERO], [ZERO, -ONE]],
        _ => unreachable!(),
    };
    Mat::from_fn(2, 2, |i, j| m[i][j])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn string(ops: &[char]) -> CMatrix {
    let mut out = pauli(ops[0]);
    for &o in &ops[1..] {
        out = kron(&out, &pauli(o));
    }
    out
}

pub fn identity(n: usize) -> CMatrix {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn rmat_identity(n: usize) -> RMatrix {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

/// Anticommuting generators `[f_1, e_1, …, f_d, e_d, Z^{⊗d}]`.
fn generators(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(2 * d + 1);
    for j in 0..d {
        for head in ['Y', 'X'] {
            let ops: Vec<char> = (0..d)
                .map(|t| match t.cmp(&j) {
                    std::cmp::Ordering::Less => 'Z',
                    std::cmp::Ordering::Equal => head,
                    std::cmp::Ordering::Greater => 'I',
                })
                .collect();
            out.push(string(&ops));
        }
    }
    out.push(string(&vec!['Z'; d]));
    out
}

/// Hermitian `N×N` Dirac matrices for spatial dimension `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracRep {
    pub n: usize,
    pub dim: usize,
    pub alpha: Vec<CMatrix>,
    pub beta: CMatrix,
    pub alpha0: Option<CMatrix>,
    pub gamma: Option<CMatrix>,
    /// Unit spinor with `Γ v = v`.
    pub gamma_fixed: Option<Vec<C64>>,
    /// Human-readable provenance recorded in output metadata.
    pub label: String,
}

/// Builds `α¹..αⁿ, β` (and optionally `α⁰`, `Γ`) on the smallest `ℂ^{2^d}`
/// that holds enough anticommuting generators.
pub fn build_dirac_rep(n: usize, want_alpha0: bool, want_gamma: bool) -> Result<DiracRep> {
    if n == 0 {
        return Err(Error::InvalidInput("spatial dimension must be >= 1".into()));
    }
    let needed = n + 1 + want_alpha0 as usize + want_gamma as usize;
    let d = (1..).find(|d| 2 * d + 1 >= needed).unwrap();
    let gens = generators(d);
    let beta = gens[2 * d].clone();
    let alpha: Vec<CMatrix> = gens[..n].to_vec();
    let mut next = n;
    let alpha0 = want_alpha0.then(|| {
        next += 1;
        gens[next - 1].clone()
    });
    let gamma = want_gamma.then(|| gens[next].clone());
    let gamma_fixed = gamma.as_ref().map(plus_one_eigenvector);
    Ok(DiracRep {
        n,
        dim: 1 << d,
        alpha,
        beta,
        alpha0,
        gamma,
        gamma_fixed,
        label: format!("jordan-wigner d={d}: beta=Z^{d}, alpha from [f1,e1,f2,e2,...]"),
    })
}

/// The 1D representation `α = σ₂, β = σ₃, α⁰ = σ₁` used for all profiles.
pub fn default_rep_1d() -> DiracRep {
    build_dirac_rep(1, true, false).expect("n = 1 is valid")
}

/// Alternative 1D representation `α = σ₁, β = σ₃, α⁰ = σ₂`.
pub fn alternate_rep_1d() -> DiracRep {
    DiracRep {
        n: 1,
        dim: 2,
        alpha: vec![pauli('X')],
        beta: pauli('Z'),
        alpha0: Some(pauli('Y')),
        gamma: None,
        gamma_fixed: None,
        label: "alpha=sigma1, beta=sigma3".into(),
    }
}

/// Unit eigenvector of a hermitian involution for eigenvalue +1, from
/// `(I + G) e_k` with the first nonzero column.
fn plus_one_eigenvector(g: &CMatrix) -> Vec<C64> {
    let n = g.nrows();
    for k in 0..n {
        let v: Vec<C64> = (0..n).map(|i| g[(i, k)] + if i == k { ONE } else { ZERO }).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
    unreachable!("an involution G != -I has a +1 eigenvector")
}

/// Realification of a ℂ-linear map: `[[Re M, −Im M], [Im M, Re M]]`
/// acting on `(Re v, Im v)`.
pub fn realify_matrix(m: &CMatrix) -> RMatrix {
    let n = m.nrows();
    Mat::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Realified data of a representation.
#[derive(Clone, Debug, PartialEq)]
pub struct RealifiedRep {
    pub n: usize,
    pub dim: usize,
    /// `𝛂ʲ = [[i Im α, i Re α], [−i Re α, i Im α]]` (purely imaginary).
    pub balpha: Vec<CMatrix>,
    /// Real derivative coefficients `−i𝛂ʲ`, so that `𝔻_m = Σ_j dcoef_j ∂_j + m𝛃`.
    pub dcoef: Vec<RMatrix>,
    pub bbeta: RMatrix,
    pub j: RMatrix,
    /// Realified `α⁰`, when present.
    pub balpha0: Option<RMatrix>,
}

pub fn realify(rep: &DiracRep) -> RealifiedRep {
    let n = rep.dim;
    let dcoef: Vec<RMatrix> = rep.alpha.iter().map(|a| realify_matrix(&Mat::from_fn(n, n, |i, j| -I * a[(i, j)]))).collect();
    let balpha = dcoef.iter().map(|d| Mat::from_fn(2 * n, 2 * n, |i, j| C64::new(0.0, d[(i, j)]))).collect();
    RealifiedRep {
        n: rep.n,
        dim: n,
        balpha,
        dcoef,
        bbeta: realify_matrix(&rep.beta),
        j: realify_matrix(&Mat::from_fn(n, n, |i, k| if i == k { -I } else { ZERO })),
        balpha0: rep.alpha0.as_ref().map(realify_matrix),
    }
}

fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b
}

fn c_is(a: &CMatrix, f: impl Fn(usize, usize) -> C64) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| a[(i, j)] == f(i, j)))
}

fn c_is_scalar(a: &CMatrix, s: C64) -> bool {
    c_is(a, |i, j| if i == j { s } else { ZERO })
}

fn is_hermitian(a: &CMatrix) -> bool {
    c_is(a, |i, j| a[(j, i)].conj())
}

/// Exact check of the Clifford relations. Empty output means all hold.
pub fn check_relations(rep: &DiracRep) -> Vec<String> {
    let mut bad = Vec::new();
    if !rep.dim.is_power_of_two() {
        bad.push(format!("N = {} is not a power of two", rep.dim));
    }
    let mut named: Vec<(String, &CMatrix)> = rep.alpha.iter().enumerate().map(|(j, a)| (format!("alpha{}", j + 1), a)).collect();
    named.push(("beta".into(), &rep.beta));
    if let Some(a0) = &rep.alpha0 {
        named.push(("alpha0".into(), a0));
    }
    if let Some(g) = &rep.gamma {
        named.push(("gamma".into(), g));
    }
    for (name, m) in &named {
        if m.nrows() != rep.dim || m.ncols() != rep.dim {
            bad.push(format!("{name} has shape {}x{}", m.nrows(), m.ncols()));
            return bad;
        }
        if !is_hermitian(m) {
            bad.push(format!("{name} is not hermitian"));
        }
        if !c_is_scalar(&cmul(m, m), ONE) {
            bad.push(format!("{name}^2 != I"));
        }
    }
    for a in 0..named.len() {
        for b in a + 1..named.len() {
            let ac = cmul(named[a].1, named[b].1) + cmul(named[b].1, named[a].1);
            if !c_is_scalar(&ac, ZERO) {
                bad.push(format!("{{{}, {}}} != 0", named[a].0, named[b].0));
            }
        }
    }
    if let (Some(g), Some(v)) = (&rep.gamma, &rep.gamma_fixed) {
        let gv: Vec<C64> = (0..rep.dim).map(|i| (0..rep.dim).map(|k| g[(i, k)] * v[k]).sum()).collect();
        if gv.iter().zip(v).any(|(a, b)| (a - b).norm() > 1e-15) {
            bad.push("gamma does not fix its designated spinor".into());
        }
    }
    bad
}

fn r_is(a: &RMatrix, f: impl Fn(usize, usize) -> f64) -> bool {
    (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| a[(i, j)] == f(i, j)))
}

fn block_j(n: usize) -> impl Fn(usize, usize) -> f64 {
    move |i, j| {
        if i < n && j == i + n {
            1.0
        } else if i >= n && j + n == i {
            -1.0
        } else {
            0.0
        }
    }
}

/// Exact check of the realified identities.
pub fn check_realified(r: &RealifiedRep) -> Vec<String> {
    let mut bad = Vec::new();
    let n2 = 2 * r.dim;
    let ident = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let neg_ident = |i: usize, j: usize| if i == j { -1.0 } else { 0.0 };
    if !r_is(&r.j, block_j(r.dim)) {
        bad.push("J != [[0, I], [-I, 0]]".into());
    }
    if !r_is(&r.j, |i, j| -r.j[(j, i)]) {
        bad.push("J is not skew-symmetric".into());
    }
    if !r_is(&(&r.j * &r.j), neg_ident) {
        bad.push("J^2 != -I".into());
    }
    if !r_is(&r.bbeta, |i, j| r.bbeta[(j, i)]) {
        bad.push("bbeta is not symmetric".into());
    }
    if !r_is(&(&r.bbeta * &r.bbeta), ident) {
        bad.push("bbeta^2 != I".into());
    }
    let commutes = |a: &RMatrix, b: &RMatrix| r_is(&(a * b), |i, j| (b * a)[(i, j)]);
    if !commutes(&r.j, &r.bbeta) {
        bad.push("J does not commute with bbeta".into());
    }
    for (k, ba) in r.balpha.iter().enumerate() {
        let sq = cmul(ba, ba);
        if !c_is_scalar(&sq, ONE) {
            bad.push(format!("balpha{}^2 != I", k + 1));
        }
        if !c_is(ba, |i, j| ba[(j, i)].conj()) {
            bad.push(format!("balpha{} is not hermitian", k + 1));
        }
        let bb: CMatrix = Mat::from_fn(n2, n2, |i, j| C64::new(r.bbeta[(i, j)], 0.0));
        let jj: CMatrix = Mat::from_fn(n2, n2, |i, j| C64::new(r.j[(i, j)], 0.0));
        if !c_is_scalar(&(cmul(ba, &bb) + cmul(&bb, ba)), ZERO) {
            bad.push(format!("{{balpha{}, bbeta}} != 0", k + 1));
        }
        if !c_is_scalar(&(cmul(ba, &jj) - cmul(&jj, ba)), ZERO) {
            bad.push(format!("J does not commute with balpha{}", k + 1));
        }
        for (l, bl) in r.balpha.iter().enumerate().skip(k + 1) {
            if !c_is_scalar(&(cmul(ba, bl) + cmul(bl, ba)), ZERO) {
                bad.push(format!("{{balpha{}, balpha{}}} != 0", k + 1, l + 1));
            }
        }
    }
    bad
}

/// A larger representation together with an isometric copy of a smaller one.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub small: DiracRep,
    pub big: DiracRep,
    /// Orthogonal projector onto the embedded copy.
    pub projector: CMatrix,
    /// Isometry `E: ℂ^N → ℂ^{N'}` with `α̃E = Eα`, `β̃E = Eβ`.
    pub isometry: CMatrix,
}

fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    Mat::from_fn(n + m, n + m, |i, j| {
        if i < n && j < n {
            a[(i, j)]
        } else if i >= n && j >= n {
            b[(i - n, j - n)]
        } else {
            ZERO
        }
    })
}

impl Embedding {
    /// Direct sum `small ⊕ other`, with `small` sitting in the first block.
    pub fn doubled(small: &DiracRep, other: &DiracRep) -> Result<Self> {
        if small.n != other.n {
            return Err(Error::NotAnEmbedding("spatial dimensions differ".into()));
        }
        let alpha0 = match (&small.alpha0, &other.alpha0) {
            (Some(a), Some(b)) => Some(block_diag(a, b)),
            _ => None,
        };
        let big = DiracRep {
            n: small.n,
            dim: small.dim + other.dim,
            alpha: small.alpha.iter().zip(&other.alpha).map(|(a, b)| block_diag(a, b)).collect(),
            beta: block_diag(&small.beta, &other.beta),
            alpha0,
            gamma: None,
            gamma_fixed: None,
            label: format!("({}) + ({})", small.label, other.label),
        };
        let n = small.dim;
        let projector = block_diag(&identity(n), &Mat::zeros(other.dim, other.dim));
        let isometry = Mat::from_fn(big.dim, n, |i, j| if i == j { ONE } else { ZERO });
        Ok(Self { small: small.clone(), big, projector, isometry })
    }

    /// Verifies projector, isometry and intertwining identities.
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-13;
        let close = |a: &CMatrix, b: &CMatrix| {
            a.nrows() == b.nrows() && a.ncols() == b.ncols() && (a - b).norm_max() <= tol
        };
        let p = &self.projector;
        let e = &self.isometry;
        let adj = |m: &CMatrix| m.adjoint().to_owned();
        if !close(&(p * p), p) || !close(&adj(p), p) {
            return Err(Error::NotAnEmbedding("P is not an orthogonal projector".into()));
        }
        let mut big: Vec<&CMatrix> = self.big.alpha.iter().collect();
        big.push(&self.big.beta);
        let mut small: Vec<&CMatrix> = self.small.alpha.iter().collect();
        small.push(&self.small.beta);
        for (k, m) in big.iter().enumerate() {
            if !close(&(p * *m), &(*m * p)) {
                return Err(Error::NotAnEmbedding(format!("P does not commute with matrix {k}")));
            }
        }
        if !close(&(adj(e) * e), &identity(self.small.dim)) || !close(&(e * adj(e)), p) {
            return Err(Error::NotAnEmbedding("E is not an isometry onto range(P)".into()));
        }
        for (k, (mb, ms)) in big.iter().zip(&small).enumerate() {
            if !close(&(*mb * e), &(e * *ms)) {
                return Err(Error::NotAnEmbedding(format!("E does not intertwine matrix {k}")));
            }
        }
        Ok(())
    }
}

/// JSON form: matrices as row-major arrays of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepDocument {
    pub n: usize,
    pub dim: usize,
    pub label: String,
    pub alpha: Vec<Vec<Vec<[f64; 2]>>>,
    pub beta: Vec<Vec<[f64; 2]>>,
    pub alpha0: Option<Vec<Vec<[f64; 2]>>>,
    pub gamma: Option<Vec<Vec<[f64; 2]>>>,
}

fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn from_rows(r: &[Vec<[f64; 2]>]) -> CMatrix {
    Mat::from_fn(r.len(), r.first().map_or(0, |x| x.len()), |i, j| C64::new(r[i][j][0], r[i][j][1]))
}

impl DiracRep {
    pub fn to_document(&self) -> RepDocument {
        RepDocument {
            n: self.n,
            dim: self.dim,
            label: self.label.clone(),
            alpha: self.alpha.iter().map(rows).collect(),
            beta: rows(&self.beta),
            alpha0: self.alpha0.as_ref().map(rows),
            gamma: self.gamma.as_ref().map(rows),
        }
    }

    pub fn from_document(doc: &RepDocument) -> Self {
        let gamma = doc.gamma.as_deref().map(from_rows);
        DiracRep {
            n: doc.n,
            dim: doc.dim,
            alpha: doc.alpha.iter().map(|a| from_rows(a)).collect(),
            beta: from_rows(&doc.beta),
            alpha0: doc.alpha0.as_deref().map(from_rows),
            gamma_fixed: gamma.as_ref().map(plus_one_eigenvector),
            gamma,
            label: doc.label.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_default_is_pauli() {
        let r = build_dirac_rep(1, false, false).unwrap();
        assert_eq!(r.dim, 2);
        assert_eq!(r.alpha[0], pauli('Y'));
        assert_eq!(r.beta, pauli('Z'));
        assert!(check_relations(&r).is_empty());
        assert_eq!(default_rep_1d().alpha0.unwrap(), pauli('X'));
    }

    #[test]
    fn dimensions_follow_generator_count() {
        for (n, a0, g, dim) in [(1, false, false, 2), (2, false, false, 2), (3, false, false, 4), (4, false, false, 4), (2, true, false, 4), (1, true, true, 4), (3, true, true, 8)] {
            let r = build_dirac_rep(n, a0, g).unwrap();
            assert_eq!(r.dim, dim, "n={n}");
            assert!(check_relations(&r).is_empty(), "n={n}: {:?}", check_relations(&r));
        }
    }

    #[test]
    fn three_dimensional_alpha0_is_the_product() {
        let r = build_dirac_rep(3, true, false).unwrap();
        let prod = &(&(&r.alpha[0] * &r.alpha[1]) * &r.alpha[2]) * &r.beta;
        assert_eq!(r.alpha0.unwrap(), prod);
    }

    #[test]
    fn broken_beta_is_reported() {
        let mut r = build_dirac_rep(2, false, false).unwrap();
        r.beta = identity(2);
        let bad = check_relations(&r);
        assert!(bad.iter().any(|s| s.contains("alpha1, beta")), "{bad:?}");
    }

    #[test]
    fn realified_identities() {
        for n in 1..=3 {
            let r = realify(&build_dirac_rep(n, true, false).unwrap());
            assert!(check_realified(&r).is_empty(), "{:?}", check_realified(&r));
        }
        let mut r = realify(&default_rep_1d());
        r.j[(0, 2)] = 2.0;
        assert!(check_realified(&r).iter().any(|s| s.contains("J^2")));
    }

    #[test]
    fn realified_beta_is_block_diagonal() {
        let r = realify(&default_rep_1d());
        assert!(r_is(&r.bbeta, |i, j| if i == j { [1.0, -1.0, 1.0, -1.0][i] } else { 0.0 }));
    }

    #[test]
    fn realify_matches_complex_action() {
        let rep = build_dirac_rep(2, false, false).unwrap();
        let v = [C64::new(0.3, -1.2), C64::new(2.0, 0.7)];
        let rv = [v[0].re, v[1].re, v[0].im, v[1].im];
        let b = realify_matrix(&rep.alpha[0]);
        let cv: Vec<C64> = (0..2).map(|i| (0..2).map(|k| rep.alpha[0][(i, k)] * v[k]).sum()).collect();
        for i in 0..2 {
            let re: f64 = (0..4).map(|k| b[(i, k)] * rv[k]).sum();
            let im: f64 = (0..4).map(|k| b[(i + 2, k)] * rv[k]).sum();
            assert!((re - cv[i].re).abs() < 1e-15 && (im - cv[i].im).abs() < 1e-15);
        }
    }

    #[test]
    fn embedding_validates_and_rejects() {
        let e = Embedding::doubled(&default_rep_1d(), &alternate_rep_1d()).unwrap();
        e.validate().unwrap();
        let mut bad = e.clone();
        bad.projector[(0, 2)] = ONE;
        assert!(matches!(bad.validate(), Err(Error::NotAnEmbedding(_))));
    }

    #[test]
    fn document_round_trip() {
        let r = build_dirac_rep(1, true, true).unwrap();
        let s = serde_json::to_string(&r.to_document()).unwrap();
        let back = DiracRep::from_document(&serde_json::from_str(&s).unwrap());
        assert_eq!(back, r);
    }
}
