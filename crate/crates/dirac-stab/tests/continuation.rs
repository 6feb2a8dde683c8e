use proptest::prelude::*;

use dirac_stab::continuation::{
    branches_csv, compare_nls, nls_reference, rescaled_limit, stability_report, stability_verdict, sweep, track, vk_monitor, BranchPoint, BranchTrace,
    NlsVerdict, StabilityOptions, Sweep, SweepConfig, TrackOptions, Verdict,
};
use dirac_stab::evans::{Contour, EvansOptions, EvansScan, ScanOptions};
use dirac_stab::exec::Execution;
use dirac_stab::grid::Grid1D;
use dirac_stab::profiles::{Nonlinearity, WaveFamily};
use dirac_stab::spectra::{spectrum_of_wave, ClassifyOptions, EigenOptions, Label};
use dirac_stab::{Error, C64};

fn point(omega: f64, rescaled: C64, m: f64) -> BranchPoint {
    let eps2 = m * m - omega * omega;
    BranchPoint {
        omega,
        lambda: rescaled * eps2,
        lambda_max: rescaled * eps2,
        spread: 0.0,
        multiplicity: 1,
        rescaled,
        label: Label::Point,
        matched: true,
        krein_max: None,
    }
}

fn branch(omegas: &[f64], f: impl Fn(f64) -> C64) -> BranchTrace {
    BranchTrace { id: 0, points: omegas.iter().map(|&w| point(w, f(1.0 - w * w), 1.0)).collect(), died_after: None }
}

fn scan(winding: i64, converged: bool) -> EvansScan {
    EvansScan {
        contour: Contour::rectangle(1e-3, 3.0, -3.0, 3.0),
        lambdas: vec![],
        values: vec![],
        cumulative_arg: vec![],
        winding,
        sector_winding: None,
        largest_jump: 0.0,
        refinements: 0,
        converged,
    }
}

#[test]
fn short_branches_cannot_be_extrapolated() {
    let b = branch(&[0.9, 0.95], |_| C64::new(0.1, 0.0));
    assert_eq!(rescaled_limit(&b, 1.0).unwrap_err(), Error::InsufficientFamily { len: 2 });
}

#[test]
fn branches_that_stay_away_from_zero_are_not_small() {
    // λ fixed, so Λ = λ/ε² blows up.
    let omegas = [0.9, 0.95, 0.99];
    let b = BranchTrace { id: 0, points: omegas.iter().map(|&w| point(w, C64::new(0.5 / (1.0 - w * w), 0.0), 1.0)).collect(), died_after: None };
    assert!(matches!(rescaled_limit(&b, 1.0), Err(Error::NotSmallBranch { .. })));
}

#[test]
fn cubic_sweep_tracks_a_small_zero_branch() {
    let omegas = [0.9, 0.95, 0.99];
    let sw = sweep(&omegas, &SweepConfig::cubic(1.0, 512)).unwrap();
    let branches = track(&sw.spectra, &TrackOptions::default());
    let zero = branches.iter().find(|b| b.points.iter().all(|p| p.lambda.norm() < 1e-4)).expect("zero branch");
    assert_eq!(zero.points.len(), 3);
    assert!(zero.points.iter().all(|p| p.multiplicity == 4));
    let lim = rescaled_limit(zero, 1.0).unwrap();
    assert!(lim.lambda_b.norm() < 1e-4);
    let reference = nls_reference(1, 1.0, &Grid1D::new(40.0, 512).unwrap(), &EigenOptions::default(), &ClassifyOptions::default(), 1e-4).unwrap();
    assert!(reference.kernel_cluster > 0);
    assert!(reference.nonzero_points.is_empty());
    assert_eq!(compare_nls(lim.lambda_b, &reference, 1e-4), NlsVerdict::InNlsSpectrum);
    assert_eq!(compare_nls(C64::new(3.0, 1.0), &reference, 1e-4), NlsVerdict::Violation);
    // Cubic 1D: dQ/dω < 0 and no real splitting.
    let vk = vk_monitor(&sw, 1e-4, 1e-6).unwrap();
    assert_eq!(vk.sign, -1);
    assert!(vk.real_splitting.is_empty());
    let csv = branches_csv(&branches);
    assert_eq!(csv.lines().count() - 1, branches.iter().map(|b| b.points.len()).sum::<usize>());
}

#[test]
fn sweep_output_does_not_depend_on_execution_mode() {
    let omegas = [0.9, 0.93];
    let par = sweep(&omegas, &SweepConfig { exec: Execution::Parallel, ..SweepConfig::cubic(1.0, 128) }).unwrap();
    let seq = sweep(&omegas, &SweepConfig { exec: Execution::Sequential, ..SweepConfig::cubic(1.0, 128) }).unwrap();
    let csv = |s: &Sweep| branches_csv(&track(&s.spectra, &TrackOptions::default()));
    assert_eq!(csv(&par), csv(&seq));
    assert!(matches!(sweep(&[], &SweepConfig::cubic(1.0, 64)), Err(Error::InvalidInput(_))));
}

#[test]
fn planted_instability_is_reported_unstable() {
    let mut sw = sweep(&[0.9], &SweepConfig::cubic(1.0, 512)).unwrap();
    let mut wave = sw.family.waves[0].clone();
    wave.nonlinearity = Nonlinearity::power(1).with_derivative_gain(2.0);
    let spectrum = spectrum_of_wave(&wave, &EigenOptions::default(), &ClassifyOptions::default()).unwrap();
    sw = Sweep { family: WaveFamily { waves: vec![wave] }, spectra: vec![spectrum] };
    let v = stability_report(&sw, EvansOptions::default(), ScanOptions::default(), &StabilityOptions::default()).unwrap();
    assert_eq!(v[0].verdict, Verdict::Unstable, "{}", v[0].reason);
    assert_eq!(v[0].evans_winding as usize, v[0].grid_unstable.len());
    assert!(v[0].evans_confirmations.iter().all(|z| z.count == 1));
}

#[test]
fn verdict_logic() {
    let sw = sweep(&[0.9], &SweepConfig::cubic(1.0, 256)).unwrap();
    let s = &sw.spectra[0];
    let opts = StabilityOptions::default();
    assert_eq!(stability_verdict(s, &scan(0, true), vec![], &opts).verdict, Verdict::Stable);
    assert_eq!(stability_verdict(s, &scan(0, false), vec![], &opts).verdict, Verdict::Inconclusive);
    // Evans sees a zero the grid does not: disagreement.
    assert_eq!(stability_verdict(s, &scan(1, true), vec![], &opts).verdict, Verdict::Inconclusive);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn richardson_is_exact_on_quadratics_in_eps2(a in -1e-3..1e-3f64, b in -1e-2..1e-2f64, c in -1e-2..1e-2f64, ai in -1e-3..1e-3f64) {
        let omegas = [0.9, 0.95, 0.99];
        let br = branch(&omegas, |e2| C64::new(a + b * e2 + c * e2 * e2, ai));
        let lim = rescaled_limit(&br, 1.0).unwrap();
        prop_assert!((lim.lambda_b - C64::new(a, ai)).norm() < 1e-12);
        prop_assert_eq!(lim.samples.len(), 3);
    }

    #[test]
    fn richardson_error_estimate_vanishes_on_linear_data(a in -1e-3..1e-3f64, b in -1e-2..1e-2f64) {
        let br = branch(&[0.8, 0.9, 0.95, 0.99], |e2| C64::new(a + b * e2, 0.0));
        let lim = rescaled_limit(&br, 1.0).unwrap();
        prop_assert!(lim.error < 1e-12);
        prop_assert!((lim.lambda_b.re - a).abs() < 1e-12);
    }
}
