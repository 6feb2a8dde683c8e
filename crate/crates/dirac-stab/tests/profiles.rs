use proptest::prelude::*;

use dirac_stab::exec::Execution;
use dirac_stab::grid::Grid1D;
use dirac_stab::profiles::{
    charge, decay_rate, decay_rate_of_vector, nld_solitary_wave, nls_ground_state, nls_ground_state_1d_exact, scaled_grid, solve_family, vk_derivative,
    vk_derivative_samples, NewtonOptions, Nonlinearity, SolitaryWave,
};
use dirac_stab::Error;

fn cubic(omega: f64, points: usize) -> SolitaryWave {
    let g = scaled_grid(omega, 1.0, 30.0, points).unwrap();
    nld_solitary_wave(omega, 1.0, &Nonlinearity::power(1), &g, &NewtonOptions::default()).unwrap()
}

#[test]
fn nls_quintic_matches_closed_form() {
    let p = nls_ground_state(1, 2, 1.0, 30.0, 512).unwrap();
    let err = p.r.iter().zip(&p.u).map(|(r, u)| (u - nls_ground_state_1d_exact(2, 1.0, *r)).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "err {err}");
}

#[test]
fn nls_mass_scaling_follows_closed_form() {
    for m in [0.5, 2.0] {
        let p = nls_ground_state(1, 1, m, 40.0, 512).unwrap();
        assert!((p.amplitude - nls_ground_state_1d_exact(1, m, 0.0)).abs() < 1e-9);
    }
}

#[test]
fn nls_higher_dimensions_are_positive_and_decreasing() {
    for (n, k) in [(2, 1), (3, 1), (2, 2)] {
        let p = nls_ground_state(n, k, 1.0, 30.0, 512).unwrap();
        assert!(p.shape_ok(), "n={n} k={k}");
        assert!(p.residual_norm < 1e-8, "n={n} k={k} residual {}", p.residual_norm);
        // Monotone until the tail reaches rounding level.
        let floor = 1e-10 * p.amplitude;
        assert!(p.u.windows(2).filter(|w| w[0] > floor).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn inadmissible_nls_pairs_are_refused() {
    assert_eq!(nls_ground_state(3, 2, 1.0, 20.0, 128).unwrap_err(), Error::InadmissiblePair { n: 3, k: 2 });
    assert_eq!(nls_ground_state(4, 1, 1.0, 20.0, 128).unwrap_err(), Error::InadmissiblePair { n: 4, k: 1 });
}

#[test]
fn nld_profile_converges_and_decays_at_gap_rate() {
    for w in [0.5, 0.8, 0.95] {
        let wave = cubic(w, 512);
        assert!(wave.residual_norm < 1e-10, "w={w}: {}", wave.residual_norm);
        let fit = decay_rate(&wave).unwrap();
        let eps = (1.0 - w * w).sqrt();
        assert!((fit.mu - eps).abs() < 0.05 * eps, "w={w}: mu {} eps {eps}", fit.mu);
        assert!(fit.r_squared > 0.999);
    }
}

#[test]
fn particle_and_antiparticle_split_the_wave() {
    let wave = cubic(0.9, 256);
    let (p, a) = (wave.particle(), wave.antiparticle());
    for i in 0..wave.samples.len() {
        assert!((p[i] + a[i] - wave.samples[i]).norm() < 1e-15);
    }
    // Near the nonrelativistic limit the antiparticle part is O(ε) smaller.
    let sup = |v: &[_]| v.iter().map(|z: &dirac_stab::C64| z.norm()).fold(0.0, f64::max);
    assert!(sup(&a) < 0.5 * sup(&p));
}

#[test]
fn generic_nonlinearity_converges() {
    let nl = Nonlinearity::custom(1, "s + s^2/10", |s| s + 0.1 * s * s, |s| 1.0 + 0.2 * s);
    let g = scaled_grid(0.9, 1.0, 30.0, 256).unwrap();
    let wave = nld_solitary_wave(0.9, 1.0, &nl, &g, &NewtonOptions::default()).unwrap();
    assert!(wave.residual_norm < 1e-10);
}

#[test]
fn outside_gap_is_refused() {
    let g = Grid1D::new(10.0, 64).unwrap();
    for w in [1.0, -1.5] {
        let e = nld_solitary_wave(w, 1.0, &Nonlinearity::power(1), &g, &NewtonOptions::default()).unwrap_err();
        assert_eq!(e, Error::OutsideGap { omega: w, m: 1.0 });
    }
    assert!(matches!(scaled_grid(1.0, 1.0, 30.0, 64), Err(Error::OutsideGap { .. })));
}

#[test]
fn family_is_independent_of_seeding_and_execution() {
    let omegas = [0.85, 0.9, 0.95];
    let nl = Nonlinearity::power(1);
    let grid = |w: f64| scaled_grid(w, 1.0, 30.0, 256);
    let opts = NewtonOptions::default();
    let par = solve_family(&omegas, 1.0, &nl, grid, &opts, false, Execution::Parallel).unwrap();
    let seq = solve_family(&omegas, 1.0, &nl, grid, &opts, false, Execution::Sequential).unwrap();
    let seeded = solve_family(&omegas, 1.0, &nl, grid, &opts, true, Execution::Sequential).unwrap();
    for ((a, b), c) in par.waves.iter().zip(&seq.waves).zip(&seeded.waves) {
        assert_eq!(a.samples, b.samples);
        let diff = a.samples.iter().zip(&c.samples).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "seeded differs by {diff}");
    }
    assert!(par.max_charge_jump() < 0.5);
    // Cubic 1D: the charge grows as ω decreases.
    assert_eq!(vk_derivative(&par).unwrap().sign(), -1);
    assert!(matches!(
        solve_family(&[0.9, 0.85], 1.0, &nl, grid, &opts, false, Execution::Sequential),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn vk_derivative_is_exact_on_quadratics() {
    let omega = [0.1, 0.25, 0.3, 0.5, 0.9];
    let q: Vec<f64> = omega.iter().map(|w| 2.0 - 3.0 * w + 0.5 * w * w).collect();
    let r = vk_derivative_samples(&omega, &q).unwrap();
    for (w, d) in omega.iter().zip(&r.dq_domega) {
        assert!((d - (-3.0 + w)).abs() < 1e-12);
    }
    assert_eq!(r.sign(), -1);
    assert!(r.sign_changes.is_empty());
    assert_eq!(vk_derivative_samples(&omega[..2], &q[..2]).unwrap_err(), Error::InsufficientFamily { len: 2 });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn charge_is_quadratic_in_amplitude(s in 0.1..5.0f64) {
        let wave = cubic(0.9, 128);
        let q = charge(&wave);
        prop_assert!((charge(&wave.scaled(s)) - s * s * q).abs() < 1e-12 * q.max(1.0) * s * s);
    }

    #[test]
    fn tail_fit_recovers_exponential_rate(mu in 0.2..2.0f64, a in 0.1..10.0f64) {
        let g = Grid1D::new(40.0 / mu, 512).unwrap();
        let mags: Vec<f64> = g.nodes().iter().map(|x| a * (-mu * x.abs()).exp()).collect();
        let fit = decay_rate_of_vector(&g, &mags).unwrap();
        prop_assert!((fit.mu - mu).abs() < 1e-9 * mu);
    }

    #[test]
    fn nls_exact_profile_solves_the_ode(k in 1u32..=3, m in 0.5..2.0f64, x in -5.0..5.0f64) {
        // -u''/(2m) + u/(2m) = u^{2k+1}
        let h = 1e-3;
        let u = |x: f64| nls_ground_state_1d_exact(k, m, x);
        let upp = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
        let residual = -upp / (2.0 * m) + u(x) / (2.0 * m) - u(x).powi(2 * k as i32 + 1);
        prop_assert!(residual.abs() < 1e-5, "residual {residual}");
    }
}
