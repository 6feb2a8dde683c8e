use faer::Mat;
use proptest::prelude::*;

use dirac_stab::clifford::{default_rep_1d, realify};
use dirac_stab::evans::{
    a_infinity, asymptotic_rates, kappa, locate_zeros, threshold_certificate, winding, Contour, EvansMethod, EvansOptions, JostSystem, ScanOptions,
};
use dirac_stab::exec::Execution;
use dirac_stab::profiles::{nld_solitary_wave, scaled_grid, NewtonOptions, Nonlinearity, SolitaryWave};
use dirac_stab::spectra::{spectrum_of_wave, ClassifyOptions, EigenOptions};
use dirac_stab::{Error, C64};

fn cubic(omega: f64, points: usize) -> SolitaryWave {
    let g = scaled_grid(omega, 1.0, 40.0, points).unwrap();
    nld_solitary_wave(omega, 1.0, &Nonlinearity::power(1), &g, &NewtonOptions::default()).unwrap()
}

fn planted(omega: f64, points: usize) -> SolitaryWave {
    let mut w = cubic(omega, points);
    w.nonlinearity = Nonlinearity::power(1).with_derivative_gain(2.0);
    w
}

fn nearest_distance(a: &[C64], z: C64) -> f64 {
    a.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
}

#[test]
fn threshold_certificate_holds_above_the_embedded_threshold() {
    for w in [0.5, 0.95] {
        let c = threshold_certificate(w, 1.0, 5.0, 100, 2).unwrap();
        assert!(c.holds);
        assert!(c.threshold_degenerate);
        assert_eq!(c.samples.len(), 100);
        assert!(c.samples.iter().all(|s| s.im_lambda > 1.0 + w && s.im_lambda <= 5.0));
    }
    assert!(matches!(threshold_certificate(0.5, 1.0, 1.5, 10, 2), Err(Error::InvalidInput(_))));
}

#[test]
fn rates_inside_the_gap_split_evenly() {
    let r = asymptotic_rates(C64::new(0.0, 0.05), 0.9, 1.0, 2);
    assert!(r.is_hyperbolic());
    assert_eq!((r.n_minus, r.n_plus), (2, 2));
    // Between the gap edge and the embedded threshold one J-sector oscillates.
    let r = asymptotic_rates(C64::new(0.0, 1.0), 0.9, 1.0, 2);
    assert_eq!((r.n_minus, r.n_zero, r.n_plus), (1, 2, 1));
}

#[test]
fn evans_function_is_analytic() {
    let wave = cubic(0.9, 512);
    let sys = JostSystem::new(&wave, EvansOptions::default()).unwrap();
    for z in [C64::new(0.3, 0.5), C64::new(1.0, -2.0), C64::new(0.05, 0.02)] {
        let h = 1e-4;
        let e = |l: C64| sys.evaluate(l).unwrap().value;
        let dx = (e(z + h) - e(z - h)) / (2.0 * h);
        let dy = (e(z + C64::new(0.0, h)) - e(z - C64::new(0.0, h))) / C64::new(0.0, 2.0 * h);
        let rel = (dx - dy).norm() / dx.norm().max(dy.norm());
        assert!(rel < 1e-5, "z={z}: {dx} vs {dy}");
    }
}

#[test]
fn evaluation_on_the_bands_is_refused() {
    let wave = cubic(0.9, 256);
    let sys = JostSystem::new(&wave, EvansOptions::default()).unwrap();
    assert!(matches!(sys.evaluate(C64::new(0.0, 1.5)), Err(Error::NotHyperbolic { .. })));
    let c = Contour::rectangle(1e-9, 1.0, -1.0, 1.0);
    assert!(matches!(winding(&c, &wave, EvansOptions::default(), ScanOptions::default()), Err(Error::ContourTouchesEssential { .. })));
}

#[test]
fn stable_cubic_wave_has_no_unstable_zeros() {
    let wave = cubic(0.9, 512);
    let scan = winding(&Contour::rectangle(1e-3, 3.0, -3.0, 3.0), &wave, EvansOptions::default(), ScanOptions::default()).unwrap();
    assert!(scan.converged);
    assert_eq!(scan.winding, 0);
    assert_eq!(scan.sector_winding, Some((0, 0)));
    assert!(scan.largest_jump <= std::f64::consts::PI / 4.0);
}

#[test]
fn evans_zeros_match_grid_eigenvalues() {
    let wave = planted(0.9, 512);
    let s = spectrum_of_wave(&wave, &EigenOptions::default(), &ClassifyOptions::default()).unwrap();
    let grid_unstable: Vec<C64> = s.unstable(1e-6).iter().map(|p| p.lambda).collect();
    assert!(!grid_unstable.is_empty());
    let scan = winding(&Contour::rectangle(1e-3, 3.0, -3.0, 3.0), &wave, EvansOptions::default(), ScanOptions::default()).unwrap();
    assert_eq!(scan.winding as usize, grid_unstable.len());
    for &l in &grid_unstable {
        let z = locate_zeros(l, 0.01, &wave, EvansOptions::default(), ScanOptions::default()).unwrap();
        assert_eq!(z.count, 1);
        let c = z.centroid.unwrap();
        assert!((c - l).norm() < 1e-6, "evans {c} grid {l}");
    }
}

#[test]
fn parity_split_agrees_with_two_sided_frames() {
    let wave = planted(0.9, 512);
    let split = JostSystem::new(&wave, EvansOptions { method: EvansMethod::ParitySplit, ..Default::default() }).unwrap();
    let two = JostSystem::new(&wave, EvansOptions { method: EvansMethod::TwoSided, ..Default::default() }).unwrap();
    assert!(split.uses_parity_split() && !two.uses_parity_split());
    // Same zeros: both vanish at a grid eigenvalue and neither vanishes nearby.
    let s = spectrum_of_wave(&wave, &EigenOptions::default(), &ClassifyOptions::default()).unwrap();
    let l = s.unstable(1e-6)[0].lambda;
    for sys in [&split, &two] {
        let at = sys.evaluate(l).unwrap().value.norm();
        let away = sys.evaluate(l + 0.05).unwrap().value.norm();
        assert!(at < 1e-5 * away, "{at} vs {away}");
    }
}

#[test]
fn winding_is_identical_across_execution_modes() {
    let wave = cubic(0.95, 256);
    let c = Contour::circle(C64::new(0.5, 0.0), 0.3);
    let par = winding(&c, &wave, EvansOptions::default(), ScanOptions { exec: Execution::Parallel, ..Default::default() }).unwrap();
    let seq = winding(&c, &wave, EvansOptions::default(), ScanOptions { exec: Execution::Sequential, ..Default::default() }).unwrap();
    assert_eq!(par.values, seq.values);
    assert_eq!(par.winding, 0);
}

fn complex_eigenvalues(a: &[C64], d: usize) -> Vec<C64> {
    let m: Mat<C64> = Mat::from_fn(d, d, |i, j| a[i * d + j]);
    m.eigenvalues().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kappa_squares_to_the_dispersion_relation(re in -3.0..3.0f64, im in -3.0..3.0f64, omega in -0.99..0.99f64, m in 0.5..2.0f64) {
        let l = C64::new(re, im);
        for c in [C64::i(), -C64::i()] {
            let k = kappa(l, omega, m, c);
            let z = omega - c * l;
            prop_assert!((k * k - (m * m - z * z)).norm() < 1e-12 * (1.0 + z.norm_sqr()));
            prop_assert!(k.re >= 0.0);
        }
    }

    #[test]
    fn a_infinity_eigenvalues_are_the_closed_form_rates(re in 0.01..3.0f64, im in -3.0..3.0f64, omega in 0.0..0.99f64) {
        let rep = realify(&default_rep_1d());
        let l = C64::new(re, im);
        let a = a_infinity(&rep, l, omega, 1.0);
        let ev = complex_eigenvalues(&a, 4);
        let rates = asymptotic_rates(l, omega, 1.0, 2);
        for r in &rates.rates {
            prop_assert!(nearest_distance(&ev, *r) < 1e-9 * (1.0 + r.norm()), "{r} not in {ev:?}");
        }
        // Off the imaginary axis the system is hyperbolic with equal splitting.
        prop_assert!(rates.is_hyperbolic());
        prop_assert_eq!(rates.n_minus, 2);
    }

    #[test]
    fn rates_are_closed_under_negation(re in -3.0..3.0f64, im in -3.0..3.0f64, omega in -0.99..0.99f64) {
        let r = asymptotic_rates(C64::new(re, im), omega, 1.0, 4);
        prop_assert_eq!(r.rates.len(), 8);
        prop_assert_eq!(r.n_minus + r.n_zero + r.n_plus, 8);
        prop_assert_eq!(r.n_minus, r.n_plus);
        for z in &r.rates {
            prop_assert!(nearest_distance(&r.rates, -z) < 1e-14);
        }
    }
}
