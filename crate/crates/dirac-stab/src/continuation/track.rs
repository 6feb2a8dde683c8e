//! Nearest-neighbour threading of eigenvalue clusters across a sweep.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::spectra::{Label, SpectrumResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Fixed matching radius. When `None`, a branch with two or more points
    /// is extrapolated linearly and matched within `relative·|Δω|·|dλ/dω|`;
    /// a one-point branch within `|Δω|·initial_slope`. Both at least `floor`.
    pub matching_radius: Option<f64>,
    pub relative: f64,
    pub floor: f64,
    /// Slope used before a branch has two points.
    pub initial_slope: f64,
    /// Eigenvalues closer than this are merged into one cluster.
    pub cluster_radius: f64,
    /// `|Re λ|` above which Krein values are monitored.
    pub krein_re_tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { matching_radius: None, relative: 0.1, floor: 1e-4, initial_slope: 4.0, cluster_radius: 1e-4, krein_re_tol: 1e-6 }
    }
}

/// One cluster of a branch at one frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub omega: f64,
    /// Cluster centroid.
    pub lambda: C64,
    /// Member of largest modulus (ties broken toward larger `Re`, then `Im`).
    pub lambda_max: C64,
    /// `max |member − centroid|`.
    pub spread: f64,
    pub multiplicity: usize,
    /// `λ_max/(m² − ω²)`.
    pub rescaled: C64,
    pub label: Label,
    /// False at a birth.
    pub matched: bool,
    /// Largest `|⟨ζ,𝕃ζ⟩|`, `|⟨ζ,𝕁ζ⟩|` over members with `|Re λ| > krein_re_tol`.
    pub krein_max: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchTrace {
    pub id: usize,
    pub points: Vec<BranchPoint>,
    /// Frequency after which no continuation was found.
    pub died_after: Option<f64>,
}

impl BranchTrace {
    pub fn born(&self) -> bool {
        !self.points[0].matched
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    pub fn lambdas(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    /// Largest Krein magnitude over the branch, if any member left the axis.
    pub fn krein_max(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.krein_max.map(|(a, b)| a.max(b))).reduce(f64::max)
    }
}

fn clusters(s: &SpectrumResult, opts: &TrackOptions) -> Vec<BranchPoint> {
    let omega = s.omega.unwrap_or(0.0);
    let eps2 = s.m * s.m - omega * omega;
    let pts: Vec<_> = s.pairs.iter().filter(|p| matches!(p.label, Some(Label::Point) | Some(Label::EmbeddedCandidate))).collect();
    // Single-linkage grouping, in spectrum order.
    let mut group: Vec<usize> = (0..pts.len()).collect();
    fn root(g: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while g[r] != r {
            r = g[r];
        }
        g[i] = r;
        r
    }
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if (pts[i].lambda - pts[j].lambda).norm() < opts.cluster_radius {
                let (a, b) = (root(&mut group, i), root(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out = Vec::new();
    for r in 0..pts.len() {
        let members: Vec<_> = (0..pts.len()).filter(|&i| root(&mut group, i) == r).map(|i| pts[i]).collect();
        if members.is_empty() {
            continue;
        }
        let n = members.len() as f64;
        let centroid = members.iter().map(|p| p.lambda).sum::<C64>() / n;
        let lambda_max = members
            .iter()
            .map(|p| p.lambda)
            .max_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)))
            .unwrap();
        let krein: Vec<(f64, f64)> =
            members.iter().filter(|p| p.lambda.re.abs() > opts.krein_re_tol).map(|p| (p.krein_l.norm(), p.krein_j.norm())).collect();
        out.push(BranchPoint {
            omega,
            lambda: centroid,
            lambda_max,
            spread: members.iter().map(|p| (p.lambda - centroid).norm()).fold(0.0, f64::max),
            multiplicity: members.len(),
            rescaled: lambda_max / eps2,
            label: if members.iter().any(|p| p.label == Some(Label::Point)) { Label::Point } else { Label::EmbeddedCandidate },
            matched: true,
            krein_max: krein.into_iter().reduce(|a, b| (a.0.max(b.0), a.1.max(b.1))),
        });
    }
    out
}

/// Threads point and embedded-candidate clusters through consecutive spectra.
pub fn track(spectra: &[SpectrumResult], opts: &TrackOptions) -> Vec<BranchTrace> {
    let mut branches: Vec<BranchTrace> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for (step, s) in spectra.iter().enumerate() {
        let mut current = clusters(s, opts);
        if step == 0 {
            for mut p in current {
                p.matched = true;
                open.push(branches.len());
                branches.push(BranchTrace { id: branches.len(), points: vec![p], died_after: None });
            }
            continue;
        }
        let omega = s.omega.unwrap_or(0.0);
        // Candidate pairs (open branch, cluster) within the branch's radius.
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        for (oi, &b) in open.iter().enumerate() {
            let pts = &branches[b].points;
            let last = pts.last().unwrap();
            let dw = (omega - last.omega).abs();
            let (pred, radius) = if pts.len() >= 2 {
                let prev = &pts[pts.len() - 2];
                let d = (last.lambda - prev.lambda) / (last.omega - prev.omega);
                (last.lambda + d * (omega - last.omega), (opts.relative * dw * d.norm()).max(opts.floor))
            } else {
                (last.lambda, (dw * opts.initial_slope).max(opts.floor))
            };
            let radius = opts.matching_radius.unwrap_or(radius);
            for (ci, c) in current.iter().enumerate() {
                let d = (c.lambda - pred).norm();
                if d <= radius {
                    cands.push((d, oi, ci));
                }
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut used_o = vec![false; open.len()];
        let mut used_c = vec![false; current.len()];
        let mut next_open = Vec::new();
        for (_, oi, ci) in cands {
            if used_o[oi] || used_c[ci] {
                continue;
            }
            used_o[oi] = true;
            used_c[ci] = true;
            branches[open[oi]].points.push(current[ci].clone());
            next_open.push(open[oi]);
        }
        let prev_omega = spectra[step - 1].omega.unwrap_or(0.0);
        for (oi, &b) in open.iter().enumerate() {
            if !used_o[oi] {
                branches[b].died_after = Some(prev_omega);
            }
        }
        for (ci, c) in current.iter_mut().enumerate() {
            if !used_c[ci] {
                c.matched = false;
                next_open.push(branches.len());
                branches.push(BranchTrace { id: branches.len(), points: vec![c.clone()], died_after: None });
            }
        }
        next_open.sort_unstable();
        open = next_open;
    }
    branches
}
