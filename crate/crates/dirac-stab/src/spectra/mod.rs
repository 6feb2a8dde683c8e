//! Eigenvalues of discretized linearizations, their classification, Krein
//! quantities and the structural checks (quadruplets, `±2ωi`, embeddings).

mod io;
mod solve;

pub use io::{spectrum_csv, write_spectrum_csv};
pub use solve::{dense_eigenvalues, eigensolve, EigenOptions, KeepVectors, SectorTag};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::{realify, DiracRep, Embedding};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::linearize::{assemble_nld_linearization, essential_bands, EssentialBands, OperatorKind, RealBlockOperator};
use crate::profiles::SolitaryWave;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Point,
    EssentialArtifact,
    EmbeddedCandidate,
    Threshold,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Point => "point",
            Label::EssentialArtifact => "essential-artifact",
            Label::EmbeddedCandidate => "embedded-candidate",
            Label::Threshold => "threshold",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub lambda: C64,
    /// `‖𝕁𝕃ζ − λζ‖ / (‖𝕁𝕃‖_∞ ‖ζ‖)`.
    pub residual: f64,
    /// `‖ζ‖_{|x| > L/2} / ‖ζ‖`.
    pub rho: f64,
    /// `⟨ζ, 𝕃ζ⟩ / ‖ζ‖²` (NaN when the operator carries no `𝕁` factor).
    pub krein_l: C64,
    /// `⟨ζ, 𝕁ζ⟩ / ‖ζ‖²`.
    pub krein_j: C64,
    pub sector: SectorTag,
    pub label: Option<Label>,
    /// Node-major eigenvector with unit Euclidean norm, when retained.
    pub vector: Option<Vec<C64>>,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub kind: OperatorKind,
    pub grid: Grid1D,
    pub block_dim: usize,
    pub op_norm: f64,
    pub omega: Option<f64>,
    pub m: f64,
    pub pairs: Vec<Eigenpair>,
    pub bands: Option<EssentialBands>,
}

impl SpectrumResult {
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn labels(&self) -> Vec<Option<Label>> {
        self.pairs.iter().map(|p| p.label).collect()
    }

    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &Eigenpair> {
        self.pairs.iter().filter(move |p| p.label == Some(label))
    }

    /// Largest relative eigenpair residual.
    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// Eigenpairs with `|λ| < radius`.
    pub fn zero_cluster(&self, radius: f64) -> Vec<&Eigenpair> {
        self.pairs.iter().filter(|p| p.lambda.norm() < radius).collect()
    }

    /// Point or embedded-candidate eigenvalue closest to `target`.
    pub fn nearest(&self, target: C64) -> Option<&Eigenpair> {
        self.pairs.iter().min_by(|a, b| (a.lambda - target).norm().total_cmp(&(b.lambda - target).norm()))
    }

    /// Point-labeled eigenvalues with `Re λ > tol`.
    pub fn unstable(&self, tol: f64) -> Vec<&Eigenpair> {
        self.pairs.iter().filter(|p| p.label == Some(Label::Point) && p.lambda.re > tol).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Localization threshold `ρ_loc`.
    pub rho_loc: f64,
    /// Distance to the bands below which a localized eigenvalue is embedded.
    pub tol_band: f64,
    /// Distance to `±i(m ∓ |ω|)` below which a delocalized eigenvalue is threshold-adjacent.
    pub tol_thr: f64,
    /// The threshold window widens to this fraction of the gap half-width
    /// `m − |ω|`, which bounds the potential-induced shift of the lowest box mode.
    pub tol_thr_gap: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { rho_loc: 1e-6, tol_band: 1e-6, tol_thr: 1e-2, tol_thr_gap: 0.25 }
    }
}

/// Assigns labels from the localization score and the distance to `bands`.
pub fn classify(mut raw: SpectrumResult, bands: EssentialBands, opts: &ClassifyOptions) -> SpectrumResult {
    let tol_thr = opts.tol_thr.max(opts.tol_thr_gap * bands.gap_edge);
    for p in &mut raw.pairs {
        let label = if p.rho < opts.rho_loc {
            if bands.distance(p.lambda) > opts.tol_band {
                Label::Point
            } else {
                Label::EmbeddedCandidate
            }
        } else if bands.threshold_distance(p.lambda) < tol_thr {
            Label::Threshold
        } else {
            Label::EssentialArtifact
        };
        p.label = Some(label);
    }
    raw.bands = Some(bands);
    raw
}

/// Essential-band statistics of the delocalized eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub delocalized: usize,
    pub on_bands: usize,
    pub fraction: f64,
    /// Delocalized eigenvalues off the bands that carry the threshold label.
    pub off_band_threshold: usize,
    /// Delocalized eigenvalues off the bands without it.
    pub off_band_unexplained: usize,
    pub worst_distance: f64,
}

pub fn band_report(s: &SpectrumResult, rho_loc: f64, tol: f64) -> Option<BandReport> {
    let bands = s.bands?;
    let deloc: Vec<&Eigenpair> = s.pairs.iter().filter(|p| p.rho >= rho_loc).collect();
    let on = deloc.iter().filter(|p| bands.distance(p.lambda) <= tol).count();
    let off: Vec<&&Eigenpair> = deloc.iter().filter(|p| bands.distance(p.lambda) > tol).collect();
    let thr = off.iter().filter(|p| p.label == Some(Label::Threshold)).count();
    Some(BandReport {
        delocalized: deloc.len(),
        on_bands: on,
        fraction: if deloc.is_empty() { 1.0 } else { on as f64 / deloc.len() as f64 },
        off_band_threshold: thr,
        off_band_unexplained: off.len() - thr,
        worst_distance: deloc.iter().map(|p| bands.distance(p.lambda)).fold(0.0, f64::max),
    })
}

/// Quadrature inner products `(⟨ζ, 𝕃ζ⟩, ⟨ζ, 𝕁ζ⟩)` for a node-major vector.
pub fn krein(zeta: &[C64], l_op: &RealBlockOperator, j: &crate::clifford::RMatrix) -> (C64, C64) {
    let h = l_op.grid.spacing();
    let d = l_op.block_dim;
    let lz = l_op.apply(zeta);
    let mut jz = vec![C64::new(0.0, 0.0); zeta.len()];
    for i in 0..l_op.grid.points {
        for a in 0..d {
            jz[i * d + a] = (0..d).map(|b| zeta[i * d + b] * j[(a, b)]).sum();
        }
    }
    let ip = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>() * h };
    (ip(zeta, &lz), ip(zeta, &jz))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoOmegaReport {
    pub omega: f64,
    /// `‖𝕃(α⁰φ) + 2ω α⁰φ‖_∞`.
    pub identity_residual: f64,
    pub target: C64,
    pub nearest: Option<C64>,
    pub distance: f64,
    pub rho: f64,
    pub label: Option<Label>,
    pub in_gap: bool,
}

impl TwoOmegaReport {
    pub fn passes(&self, tol_identity: f64, tol_2omega: f64, rho_loc: f64) -> bool {
        self.identity_residual <= tol_identity && self.distance <= tol_2omega && self.rho < rho_loc
    }
}

/// Checks `𝕃(α⁰φ) = −2ω α⁰φ` directly and locates `2ωi` in `spectrum`.
pub fn verify_2omega(wave: &SolitaryWave, rep: &DiracRep, spectrum: &SpectrumResult) -> Result<TwoOmegaReport> {
    let alpha0 = rep.alpha0.as_ref().ok_or(Error::MissingAlpha0)?;
    let real = realify(rep);
    let lin = assemble_nld_linearization(wave, &real)?;
    let d = rep.dim;
    let psi: Vec<C64> = (0..wave.grid.points)
        .flat_map(|i| {
            let s = wave.spinor(i);
            let v: Vec<C64> = (0..d).map(|a| (0..d).map(|b| alpha0[(a, b)] * s[b]).sum()).collect();
            v.iter().map(|z| C64::new(z.re, 0.0)).chain(v.iter().map(|z| C64::new(z.im, 0.0))).collect::<Vec<_>>()
        })
        .collect();
    let lpsi = lin.l.apply(&psi);
    let identity_residual = lpsi.iter().zip(&psi).map(|(a, b)| (a + 2.0 * wave.omega * b).norm()).fold(0.0, f64::max);
    let target = C64::new(0.0, 2.0 * wave.omega);
    let near = spectrum.nearest(target);
    let bands = essential_bands(wave.omega, wave.m)?;
    Ok(TwoOmegaReport {
        omega: wave.omega,
        identity_residual,
        target,
        nearest: near.map(|p| p.lambda),
        distance: near.map_or(f64::INFINITY, |p| (p.lambda - target).norm()),
        rho: near.map_or(f64::INFINITY, |p| p.rho),
        label: near.and_then(|p| p.label),
        in_gap: bands.in_gap(target),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub tol: f64,
    /// Off-axis eigenvalues missing one of `−λ, λ̄, −λ̄`.
    pub unpaired: Vec<C64>,
    /// `max_λ max(dist(−λ, σ), dist(λ̄, σ))` over the whole spectrum.
    pub max_defect: f64,
}

fn nearest_distance(sorted: &[C64], z: C64) -> f64 {
    // `sorted` is ordered by real part; scan outwards from the insertion point.
    let i = sorted.partition_point(|w| w.re < z.re);
    let mut best = f64::INFINITY;
    for j in (0..i).rev() {
        if z.re - sorted[j].re > best {
            break;
        }
        best = best.min((sorted[j] - z).norm());
    }
    for w in &sorted[i..] {
        if w.re - z.re > best {
            break;
        }
        best = best.min((w - z).norm());
    }
    best
}

/// Quadruplet pairing `λ ↦ −λ, λ̄, −λ̄`.
pub fn check_symmetry(eigenvalues: &[C64], tol: f64) -> SymmetryReport {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut unpaired = Vec::new();
    let mut max_defect: f64 = 0.0;
    for &l in &sorted {
        let dn = nearest_distance(&sorted, -l);
        let dc = nearest_distance(&sorted, l.conj());
        max_defect = max_defect.max(dn).max(dc);
        if l.re.abs() > tol && l.im.abs() > tol {
            let dnc = nearest_distance(&sorted, -l.conj());
            if dn > tol || dc > tol || dnc > tol {
                unpaired.push(l);
            }
        }
    }
    SymmetryReport { tol, unpaired, max_defect }
}

/// Hausdorff distance between two finite point sets (0 for two empty sets).
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => {
            let d = |x: &[C64], y: &[C64]| x.iter().map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
            d(a, b).max(d(b, a))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub small_dim: usize,
    pub big_dim: usize,
    pub off_axis_small: Vec<C64>,
    pub off_axis_big: Vec<C64>,
    pub hausdorff: f64,
}

/// Off-axis spectra of the linearization in `emb.small` and in `emb.big`.
pub fn embedding_invariance(wave: &SolitaryWave, emb: &Embedding, tol_axis: f64, opts: &EigenOptions) -> Result<EmbeddingReport> {
    emb.validate()?;
    if wave.dim() != emb.small.dim {
        return Err(Error::DimensionMismatch(format!("wave has {} components, embedding source {}", wave.dim(), emb.small.dim)));
    }
    let small = WaveOnRep { wave: wave.clone(), rep: emb.small.clone() };
    let big = WaveOnRep { wave: wave.embed(emb), rep: emb.big.clone() };
    let off = |w: &WaveOnRep| -> Result<Vec<C64>> {
        let lin = assemble_nld_linearization(&w.wave, &realify(&w.rep))?;
        let opts = EigenOptions { keep: KeepVectors::None, ..*opts };
        let s = eigensolve(&lin.jl, &opts)?;
        Ok(s.eigenvalues().into_iter().filter(|l| l.re.abs() > tol_axis).collect())
    };
    let a = off(&small)?;
    let b = off(&big)?;
    Ok(EmbeddingReport { small_dim: emb.small.dim, big_dim: emb.big.dim, hausdorff: hausdorff(&a, &b), off_axis_small: a, off_axis_big: b })
}

struct WaveOnRep {
    wave: SolitaryWave,
    rep: DiracRep,
}

/// Assemble, solve and classify the linearization at `wave` in its own representation.
pub fn spectrum_of_wave(wave: &SolitaryWave, eig: &EigenOptions, cls: &ClassifyOptions) -> Result<SpectrumResult> {
    let lin = assemble_nld_linearization(wave, &realify(&wave.rep))?;
    let raw = eigensolve(&lin.jl, eig)?;
    Ok(classify(raw, essential_bands(wave.omega, wave.m)?, cls))
}
