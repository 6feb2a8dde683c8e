//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dirac_stab::clifford::{build_dirac_rep, check_realified, check_relations, default_rep_1d, realify, Embedding};
use dirac_stab::continuation::{
    branches_csv, compare_nls, nls_reference, rescaled_limit, stability_report, sweep, track, NlsVerdict, StabilityOptions, Sweep, SweepConfig,
    TrackOptions, Verdict,
};
use dirac_stab::evans::{scan_csv, threshold_certificate, winding, Contour, EvansOptions, ScanOptions};
use dirac_stab::exec::Execution;
use dirac_stab::grid::Grid1D;
use dirac_stab::profiles::{
    decay_rate, nld_solitary_wave, nls_ground_state, nls_ground_state_1d_exact, scaled_grid, NewtonOptions, Nonlinearity, SolitaryWave,
};
use dirac_stab::spectra::{
    band_report, check_symmetry, embedding_invariance, spectrum_csv, spectrum_of_wave, verify_2omega, ClassifyOptions, EigenOptions, Label,
};
use dirac_stab::verify::{
    carleman_sample, carleman_samples, derrick_demo, hardy_sample, matrix_exp_bound, CarlemanOptions, DerrickParams, SampleFamily, Weight,
    TOL_INEQ,
};

const M: f64 = 1.0;
const HEADLINE_OMEGAS: [f64; 3] = [0.9, 0.95, 0.99];
const HEADLINE_POINTS: usize = 2048;

type Outcome = (bool, String);

fn cubic_wave(omega: f64, points: usize) -> SolitaryWave {
    let grid = scaled_grid(omega, M, 40.0, points).unwrap();
    nld_solitary_wave(omega, M, &Nonlinearity::power(1), &grid, &NewtonOptions::default()).unwrap()
}

/// Wave whose linearization carries a planted real eigenvalue pair.
fn planted_wave(omega: f64, points: usize) -> SolitaryWave {
    let mut w = cubic_wave(omega, points);
    w.nonlinearity = Nonlinearity::power(1).with_derivative_gain(2.0);
    w
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.2}s/{}s", e.as_secs_f64(), limit.as_secs()))
}

fn c1_clifford() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for n in 1..=3 {
        for (a0, g) in [(false, false), (true, false), (false, true), (true, true)] {
            let rep = build_dirac_rep(n, a0, g).unwrap();
            bad.extend(check_relations(&rep));
            bad.extend(check_realified(&realify(&rep)));
        }
    }
    let (fast, time) = within(t, Duration::from_secs(1));
    (bad.is_empty() && fast, format!("violations {} time {time}", bad.len()))
}

fn c2_nls_oracle() -> Outcome {
    let t = Instant::now();
    let p = nls_ground_state(1, 1, M, 40.0, 2048).unwrap();
    let grid = Grid1D::new(40.0, 2048).unwrap();
    let u = p.sample_on(&grid);
    let err = grid.nodes().iter().zip(&u).map(|(x, u)| (u - nls_ground_state_1d_exact(1, M, *x)).abs()).fold(0.0, f64::max);
    let (fast, time) = within(t, Duration::from_secs(5));
    (err < 1e-8 && fast, format!("sup error {err:.2e} time {time}"))
}

fn c3_profiles() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for w in HEADLINE_OMEGAS {
        let wave = cubic_wave(w, 1024);
        let fit = decay_rate(&wave).unwrap();
        let rel = (fit.mu - wave.eps()).abs() / wave.eps();
        ok &= wave.residual_norm < 1e-10 && rel < 0.05;
        detail.push(format!("w={w}: res {:.1e} rate err {:.2}%", wave.residual_norm, 100.0 * rel));
    }
    // Particle component against the rescaled NLS ground state.
    let remainder = |eps: f64| {
        let omega = (M * M - eps * eps).sqrt();
        let wave = cubic_wave(omega, 1024);
        let p = wave.particle();
        let d = wave.dim();
        (0..wave.grid.points)
            .map(|i| {
                let x = wave.grid.node(i);
                let v: f64 = (0..d).map(|a| p[i * d + a].norm_sqr()).sum::<f64>().sqrt();
                (v - eps * nls_ground_state_1d_exact(1, M, eps * x)).abs()
            })
            .fold(0.0, f64::max)
            / eps
    };
    let eps = [0.4, 0.2, 0.1];
    let r: Vec<f64> = eps.iter().map(|&e| remainder(e)).collect();
    let factors = [r[0] / r[1], r[1] / r[2]];
    ok &= factors.iter().all(|f| *f >= 3.0);
    detail.push(format!("remainder/eps {:.2e},{:.2e},{:.2e} factors {:.2},{:.2}", r[0], r[1], r[2], factors[0], factors[1]));
    let (fast, time) = within(t, Duration::from_secs(60));
    (ok && fast, format!("{} time {time}", detail.join("; ")))
}

fn c4_bands(sw: &Sweep) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for s in &sw.spectra {
        let b = band_report(s, 1e-6, 1e-6).unwrap();
        ok &= b.fraction >= 0.99 && b.off_band_unexplained == 0;
        detail.push(format!("w={}: {:.4} on bands, {} off flagged, {} unexplained", s.omega.unwrap(), b.fraction, b.off_band_threshold, b.off_band_unexplained));
    }
    (ok, detail.join("; "))
}

fn c5_two_omega() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for w in [0.25, 0.5, 0.95] {
        let wave = cubic_wave(w, 512);
        let s = spectrum_of_wave(&wave, &EigenOptions::default(), &ClassifyOptions::default()).unwrap();
        let r = verify_2omega(&wave, &wave.rep, &s).unwrap();
        ok &= r.distance < 1e-6 && r.identity_residual < 1e-8;
        detail.push(format!("w={w}: dist {:.1e} identity {:.1e}", r.distance, r.identity_residual));
    }
    (ok, detail.join("; "))
}

fn c6_symmetry() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, wave) in [("cubic", cubic_wave(0.95, 512)), ("planted", planted_wave(0.9, 512))] {
        let s = spectrum_of_wave(&wave, &EigenOptions::default(), &ClassifyOptions::default()).unwrap();
        let sym = check_symmetry(&s.eigenvalues(), 1e-7);
        ok &= sym.max_defect <= 1e-7 && sym.unpaired.is_empty();
        detail.push(format!("{name}: defect {:.1e}", sym.max_defect));
    }
    let wave = planted_wave(0.9, 512);
    let emb = Embedding::doubled(&wave.rep, &wave.rep).unwrap();
    let e = embedding_invariance(&wave, &emb, 1e-6, &EigenOptions::default()).unwrap();
    ok &= !e.off_axis_small.is_empty() && e.hausdorff < 1e-6;
    detail.push(format!("embedding N=2->4: {} off-axis, hausdorff {:.1e}", e.off_axis_small.len(), e.hausdorff));
    (ok, detail.join("; "))
}

fn c7_krein() -> Outcome {
    let wave = planted_wave(0.9, 512);
    let s = spectrum_of_wave(&wave, &EigenOptions::default(), &ClassifyOptions::default()).unwrap();
    let off: Vec<_> = s.pairs.iter().filter(|p| p.lambda.re.abs() > 1e-6).collect();
    let worst = off.iter().map(|p| p.krein_l.norm().max(p.krein_j.norm())).fold(0.0, f64::max);
    (!off.is_empty() && worst < 1e-6, format!("{} off-axis pairs, worst |<z,Lz>|,|<z,Jz>| {worst:.1e}", off.len()))
}

fn headline_run() -> (Sweep, Vec<String>) {
    let sw = sweep(&HEADLINE_OMEGAS, &SweepConfig::cubic(M, HEADLINE_POINTS)).unwrap();
    let branches = track(&sw.spectra, &TrackOptions::default());
    let mut csvs: Vec<String> = sw.spectra.iter().map(spectrum_csv).collect();
    csvs.push(branches_csv(&branches));
    let scan = winding(&Contour::rectangle(1e-3, 3.0, -3.0, 3.0), &sw.family.waves[1], EvansOptions::default(), ScanOptions::default()).unwrap();
    csvs.push(scan_csv(&scan));
    (sw, csvs)
}

fn c8_headline(sw: &Sweep, sweep_time: Duration) -> Outcome {
    let t = Instant::now();
    let verdicts = stability_report(sw, EvansOptions::default(), ScanOptions::default(), &StabilityOptions::default()).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (s, v) in sw.spectra.iter().zip(&verdicts) {
        let unstable = s.unstable(1e-6).into_iter().filter(|p| p.label == Some(Label::Point)).count();
        let zero = s.zero_cluster(1e-4).len();
        ok &= unstable == 0 && v.evans_winding == 0 && v.evans_converged && zero == 4 && v.verdict == Verdict::Stable;
        detail.push(format!("w={}: unstable {unstable} winding {} zero cluster {zero}", v.omega, v.evans_winding));
    }
    let total = sweep_time + t.elapsed();
    ok &= total < Duration::from_secs(600);
    (ok, format!("{} time {:.1}s/600s", detail.join("; "), total.as_secs_f64()))
}

fn c9_threshold() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    for w in [0.5, 0.95] {
        let c = threshold_certificate(w, M, 5.0, 100, 2).unwrap();
        ok &= c.holds && c.samples.len() == 100 && c.samples.iter().all(|s| s.n_minus == 0);
    }
    let (fast, time) = within(t, Duration::from_secs(1));
    (ok && fast, format!("100 samples at w=0.5,0.95 time {time}"))
}

fn c10_rescaled(sw: &Sweep) -> Outcome {
    let branches = track(&sw.spectra, &TrackOptions::default());
    let Some(zero) = branches.iter().find(|b| b.points.len() == sw.spectra.len() && b.points.iter().all(|p| p.lambda.norm() < 1e-4)) else {
        return (false, "no zero-cluster branch".into());
    };
    let max_rescaled = zero.points.iter().map(|p| p.rescaled.norm()).fold(0.0, f64::max);
    let lim = rescaled_limit(zero, M).unwrap();
    let reference = nls_reference(1, M, &Grid1D::new(40.0, 512).unwrap(), &EigenOptions::default(), &ClassifyOptions::default(), 1e-4).unwrap();
    let verdict = compare_nls(lim.lambda_b, &reference, 1e-4);
    let ok = max_rescaled < 1e-3 && lim.lambda_b.norm() < 1e-4 && verdict == NlsVerdict::InNlsSpectrum && reference.nonzero_points.is_empty();
    (
        ok,
        format!(
            "max |Lambda| {max_rescaled:.1e}, |Lambda_b| {:.1e}, verdict {verdict:?}, nls nonzero points {}",
            lim.lambda_b.norm(),
            reference.nonzero_points.len()
        ),
    )
}

fn c11_derrick() -> Outcome {
    let t = Instant::now();
    let d = derrick_demo(DerrickParams::default(), Grid1D::new(20.0, 256).unwrap()).unwrap();
    let ok = (d.min_eigenvalue + 3.0).abs() < 1e-4 && (d.growth_rate - 3f64.sqrt()).abs() < 1e-4 && d.dilation_residual.abs() < 1e-8;
    let (fast, time) = within(t, Duration::from_secs(5));
    (ok && fast, format!("min eig {:.10}, rate {:.10}, dilation {:.1e}, time {time}", d.min_eigenvalue, d.growth_rate, d.dilation_residual))
}

fn c12_inequalities() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    let family = SampleFamily::new(0.05, 20.0, 1).draw(11, 100);
    for w in [Weight::inverse_power(1.0), Weight::power(1.0), Weight::power(3.0), Weight::exponential(1.0)] {
        let r = hardy_sample(&w, &family, Execution::Parallel).unwrap();
        ok &= r.pass && r.samples >= 100 && r.worst_ratio <= 1.0 + TOL_INEQ;
        detail.push(format!("{} {:.4}", r.id, r.worst_ratio));
    }
    let rep = default_rep_1d();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let lambdas: Vec<f64> = (0..100)
        .map(|_| {
            let l = M + rng.gen_range(1e-3..20.0);
            if rng.gen_bool(0.5) {
                -l
            } else {
                l
            }
        })
        .collect();
    let xs: Vec<f64> = (0..=400).map(|i| -50.0 + 0.25 * i as f64).collect();
    let me = matrix_exp_bound(&lambdas, M, &rep, &xs, Execution::Parallel).unwrap();
    ok &= me.inequality.pass && me.inequality.samples >= 100;
    detail.push(format!("{} {:.7}", me.inequality.id, me.inequality.worst_ratio));
    let opts = CarlemanOptions::default();
    let samples = carleman_samples(&opts, rep.dim);
    let c = carleman_sample(&rep, &opts, &samples).unwrap();
    ok &= c.inequality.pass && c.inequality.samples >= 100 && (c.tau_slope - 0.5).abs() <= 0.1;
    detail.push(format!("{} {:.4} tau slope {:.3}", c.inequality.id, c.inequality.worst_ratio, c.tau_slope));
    (ok, detail.join("; "))
}

fn c13_determinism(first: &[String]) -> Outcome {
    let (_, second) = headline_run();
    let same = first.len() == second.len() && first.iter().zip(&second).all(|(a, b)| a.as_bytes() == b.as_bytes());
    let bytes: usize = first.iter().map(String::len).sum();
    (same, format!("{} CSVs, {bytes} bytes, identical {same}", first.len()))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, o: Outcome| {
        println!("criterion {id:>2} {:<4} {name}: {}", if o.0 { "PASS" } else { "FAIL" }, o.1);
        results.push((id, name, o));
    };
    record(1, "clifford exactness", guarded(c1_clifford));
    record(2, "nls ground state oracle", guarded(c2_nls_oracle));
    record(3, "nld profiles", guarded(c3_profiles));

    let t = Instant::now();
    let headline = catch_unwind(headline_run).ok();
    let sweep_time = t.elapsed();
    match &headline {
        Some((sw, _)) => record(4, "essential bands", guarded(|| c4_bands(sw))),
        None => record(4, "essential bands", (false, "headline sweep failed".into())),
    }
    record(5, "2 omega eigenvalue", guarded(c5_two_omega));
    record(6, "spectral symmetry", guarded(c6_symmetry));
    record(7, "krein identity", guarded(c7_krein));
    match &headline {
        Some((sw, _)) => {
            record(8, "headline stability", guarded(|| c8_headline(sw, sweep_time)));
        }
        None => record(8, "headline stability", (false, "headline sweep failed".into())),
    }
    record(9, "embedded threshold certificate", guarded(c9_threshold));
    match &headline {
        Some((sw, _)) => record(10, "rescaled limit", guarded(|| c10_rescaled(sw))),
        None => record(10, "rescaled limit", (false, "headline sweep failed".into())),
    }
    record(11, "derrick demo", guarded(c11_derrick));
    record(12, "inequality suites", guarded(c12_inequalities));
    match &headline {
        Some((_, csvs)) => record(13, "determinism", guarded(|| c13_determinism(csvs))),
        None => record(13, "determinism", (false, "headline sweep failed".into())),
    }

    let failed: Vec<u32> = results.iter().filter(|r| !r.2 .0).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
