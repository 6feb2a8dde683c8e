//! Self-contained SVG 1.1 plots.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use dirac_stab::continuation::BranchTrace;
use dirac_stab::spectra::{Label, SpectrumResult};

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 56.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    body: String,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 1.0, x0 + 1.0) };
        let (y0, y1) = if y1 > y0 { (y0, y1) } else { (y0 - 1.0, y0 + 1.0) };
        Self { x0, x1, y0, y1, body: String::new() }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }

    fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, fill: &str) {
        let (a, b) = (self.px(x0.max(self.x0)), self.px(x1.min(self.x1)));
        let (c, d) = (self.py(y1.min(self.y1)), self.py(y0.max(self.y0)));
        if b > a && d > c {
            let _ = writeln!(
                self.body,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" fill-opacity="0.35"/>"#,
                fmt(a),
                fmt(c),
                fmt(b - a),
                fmt(d - c)
            );
        }
    }

    fn hline(&mut self, y: f64, stroke: &str) {
        if y >= self.y0 && y <= self.y1 {
            let py = self.py(y);
            let _ = writeln!(
                self.body,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-dasharray="4 3"/>"#,
                fmt(PAD),
                fmt(py),
                fmt(W - PAD),
                fmt(py)
            );
        }
    }

    fn dot(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{}" cy="{}" r="{r}" fill="{fill}"/>"#, fmt(self.px(x)), fmt(self.py(y)));
    }

    fn ring(&mut self, x: f64, y: f64, r: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{r}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            fmt(self.px(x)),
            fmt(self.py(y))
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{},{}", fmt(self.px(x)), fmt(self.py(y)))).collect();
        let _ = writeln!(self.body, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#, coords.join(" "));
    }

    fn finish(self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x0 + t * (self.x1 - self.x0);
            let yv = self.y0 + t * (self.y1 - self.y0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, fmt(px), fmt(H - PAD + 16.0), tick(xv));
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, fmt(PAD - 4.0), fmt(py + 4.0), tick(yv));
        }
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn label_color(label: Option<Label>) -> &'static str {
    match label {
        Some(Label::Point) => "#d62728",
        Some(Label::EmbeddedCandidate) => "#9467bd",
        Some(Label::Threshold) => "#ff7f0e",
        Some(Label::EssentialArtifact) => "#7f7f7f",
        None => "#1f77b4",
    }
}

/// Eigenvalue scatter with the essential bands shaded and thresholds dashed.
/// Point eigenvalues are drawn last; `±2ωi` gets a ring.
pub fn plot_spectrum(s: &SpectrumResult) -> String {
    let lambdas = s.eigenvalues();
    let re_max = lambdas.iter().map(|l| l.re.abs()).fold(0.0, f64::max).max(0.1) * 1.2;
    let mut im_max = lambdas.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    if let Some(b) = &s.bands {
        im_max = im_max.max(b.threshold);
    }
    let im_max = im_max.max(1.0) * 1.1;
    let mut f = Frame::new(-re_max, re_max, -im_max, im_max);
    if let Some(b) = &s.bands {
        let strip = 0.015 * re_max;
        f.rect(-strip, strip, b.gap_edge, im_max, "#9ecae1");
        f.rect(-strip, strip, -im_max, -b.gap_edge, "#9ecae1");
        for y in [b.gap_edge, -b.gap_edge] {
            f.hline(y, "#3182bd");
        }
        for y in [b.threshold, -b.threshold] {
            f.hline(y, "#e6550d");
        }
    }
    let mut order: Vec<&_> = s.pairs.iter().collect();
    order.sort_by_key(|p| matches!(p.label, Some(Label::Point)));
    for p in order {
        let r = if matches!(p.label, Some(Label::Point)) { 3.0 } else { 1.5 };
        f.dot(p.lambda.re, p.lambda.im, r, label_color(p.label));
    }
    if let Some(w) = s.omega {
        for y in [2.0 * w, -2.0 * w] {
            f.ring(0.0, y, 6.0, "black");
        }
    }
    let title = match s.omega {
        Some(w) => format!("spectrum, omega = {w}, N = {}", s.grid.points),
        None => format!("spectrum, N = {}", s.grid.points),
    };
    f.finish(&title, "Re lambda [1/time]", "Im lambda [1/time]")
}

/// One polyline per branch: `Im λ` (or `Re λ` when `real` is set) against `ω`.
pub fn plot_branches(branches: &[BranchTrace], real: bool) -> String {
    let part = |l: C64| if real { l.re } else { l.im };
    let pts: Vec<(f64, f64)> = branches.iter().flat_map(|b| b.points.iter().map(|p| (p.omega, part(p.lambda)))).collect();
    let (x0, x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (y0, y1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    let (x0, x1, y0, y1) = if pts.is_empty() { (0.0, 1.0, -1.0, 1.0) } else { (x0, x1, y0, y1) };
    let pad = 0.05 * (y1 - y0).max(1e-3);
    let mut f = Frame::new(x0, x1, y0 - pad, y1 + pad);
    const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
    for b in branches {
        let color = PALETTE[b.id % PALETTE.len()];
        let line: Vec<(f64, f64)> = b.points.iter().map(|p| (p.omega, part(p.lambda))).collect();
        f.polyline(&line, color);
        for &(x, y) in &line {
            f.dot(x, y, 2.5, color);
        }
    }
    let ylabel = if real { "Re lambda [1/time]" } else { "Im lambda [1/time]" };
    f.finish("eigenvalue branches", "omega [1/time]", ylabel)
}

/// Image of the contour under `E` drawn as a spiral: argument of `E`, radius
/// growing with the contour parameter, so each winding shows as one turn.
pub fn plot_evans(values: &[C64], winding: i64) -> String {
    let mut f = Frame::new(-1.1, 1.1, -1.1, 1.1);
    let n = values.len().max(2) as f64;
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(i, v)| {
            let r = 0.3 + 0.7 * i as f64 / (n - 1.0);
            let u = v / v.norm() * r;
            (u.re, u.im)
        })
        .collect();
    f.polyline(&pts, "#1f77b4");
    f.dot(0.0, 0.0, 3.0, "black");
    f.finish(&format!("arg E along the contour, winding {winding}"), "Re", "Im")
}
