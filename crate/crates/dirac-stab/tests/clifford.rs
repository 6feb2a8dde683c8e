use faer::Mat;
use proptest::prelude::*;

use dirac_stab::clifford::{
    alternate_rep_1d, build_dirac_rep, check_realified, check_relations, default_rep_1d, kron, realify, realify_matrix, CMatrix, DiracRep, Embedding,
};
use dirac_stab::{Error, C64};

fn cmat(n: usize, entries: &[(f64, f64)]) -> CMatrix {
    Mat::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        C64::new(re, im)
    })
}

#[test]
fn all_requested_generators_anticommute() {
    for n in 1..=3 {
        for a0 in [false, true] {
            for g in [false, true] {
                let rep = build_dirac_rep(n, a0, g).unwrap();
                assert!(check_relations(&rep).is_empty(), "n={n} a0={a0} g={g}: {:?}", check_relations(&rep));
                assert!(check_realified(&realify(&rep)).is_empty());
                assert_eq!(rep.alpha.len(), n);
                assert_eq!(rep.alpha0.is_some(), a0);
                assert_eq!(rep.gamma.is_some(), g);
            }
        }
    }
}

#[test]
fn dimensions_are_minimal() {
    // 2d + 1 generators fit on C^{2^d}.
    assert_eq!(build_dirac_rep(1, false, false).unwrap().dim, 2);
    assert_eq!(build_dirac_rep(1, true, false).unwrap().dim, 2);
    assert_eq!(build_dirac_rep(2, false, false).unwrap().dim, 2);
    assert_eq!(build_dirac_rep(2, true, false).unwrap().dim, 4);
    assert_eq!(build_dirac_rep(3, false, false).unwrap().dim, 4);
    assert_eq!(build_dirac_rep(3, true, true).unwrap().dim, 8);
    assert!(matches!(build_dirac_rep(0, false, false), Err(Error::InvalidInput(_))));
}

#[test]
fn default_1d_rep_is_sigma2_sigma3_sigma1() {
    let rep = default_rep_1d();
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    let s1 = Mat::from_fn(2, 2, |a, b| if a != b { one } else { z });
    let s2 = Mat::from_fn(2, 2, |a, b| match (a, b) {
        (0, 1) => -i,
        (1, 0) => i,
        _ => z,
    });
    let s3 = Mat::from_fn(2, 2, |a, b| if a == b { if a == 0 { one } else { -one } } else { z });
    assert_eq!(rep.alpha[0], s2);
    assert_eq!(rep.beta, s3);
    assert_eq!(rep.alpha0.unwrap(), s1);
}

#[test]
fn alternate_rep_is_valid_and_distinct() {
    let alt = alternate_rep_1d();
    assert!(check_relations(&alt).is_empty());
    assert_ne!(alt.alpha[0], default_rep_1d().alpha[0]);
}

#[test]
fn realified_symbol_squares_to_mass_shell() {
    // (Σ ξ_j dcoef_j i + m bbeta)² acting on a plane wave is (|ξ|² + m²) I.
    let rep = build_dirac_rep(3, false, false).unwrap();
    let r = realify(&rep);
    let xi = [0.3, -1.2, 0.7];
    let m = 1.5;
    let d = 2 * r.dim;
    let h: CMatrix = Mat::from_fn(d, d, |a, b| {
        let mut z = C64::new(m * r.bbeta[(a, b)], 0.0);
        for j in 0..3 {
            z += xi[j] * r.balpha[j][(a, b)];
        }
        z
    });
    let h2 = &h * &h;
    let e = xi.iter().map(|x| x * x).sum::<f64>() + m * m;
    for a in 0..d {
        for b in 0..d {
            let want = if a == b { e } else { 0.0 };
            assert!((h2[(a, b)] - C64::new(want, 0.0)).norm() < 1e-13);
        }
    }
}

#[test]
fn doubled_embedding_validates() {
    let small = default_rep_1d();
    let emb = Embedding::doubled(&small, &alternate_rep_1d()).unwrap();
    emb.validate().unwrap();
    assert_eq!(emb.big.dim, 4);
    assert!(check_relations(&emb.big).is_empty());
    let two_d = build_dirac_rep(2, false, false).unwrap();
    assert!(matches!(Embedding::doubled(&small, &two_d), Err(Error::NotAnEmbedding(_))));
}

#[test]
fn corrupted_embedding_is_rejected() {
    let small = default_rep_1d();
    let mut emb = Embedding::doubled(&small, &small).unwrap();
    emb.isometry[(0, 0)] = C64::new(0.0, 0.0);
    emb.isometry[(1, 0)] = C64::new(1.0, 0.0);
    emb.isometry[(1, 1)] = C64::new(0.0, 0.0);
    emb.isometry[(0, 1)] = C64::new(1.0, 0.0);
    assert!(matches!(emb.validate(), Err(Error::NotAnEmbedding(_))));
}

#[test]
fn document_round_trip() {
    for rep in [default_rep_1d(), build_dirac_rep(3, true, true).unwrap()] {
        let json = serde_json::to_string(&rep.to_document()).unwrap();
        let back = DiracRep::from_document(&serde_json::from_str(&json).unwrap());
        assert_eq!(back, rep);
    }
}

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n * n)
}

proptest! {
    #[test]
    fn realify_is_a_ring_homomorphism(a in entries(3), b in entries(3)) {
        let (a, b) = (cmat(3, &a), cmat(3, &b));
        let lhs = realify_matrix(&(&a * &b));
        let rhs = &realify_matrix(&a) * &realify_matrix(&b);
        prop_assert!((&lhs - &rhs).norm_max() < 1e-12);
        let sum = realify_matrix(&(&a + &b));
        prop_assert!((&sum - &(&realify_matrix(&a) + &realify_matrix(&b))).norm_max() < 1e-14);
    }

    #[test]
    fn realify_acts_on_re_im_pairs(a in entries(2), v in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 2)) {
        let a = cmat(2, &a);
        let v: Vec<C64> = v.into_iter().map(|(r, i)| C64::new(r, i)).collect();
        let av: Vec<C64> = (0..2).map(|i| (0..2).map(|j| a[(i, j)] * v[j]).sum()).collect();
        let rv: Vec<f64> = v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)).collect();
        let ra = realify_matrix(&a);
        for i in 0..4 {
            let got: f64 = (0..4).map(|j| ra[(i, j)] * rv[j]).sum();
            let want = if i < 2 { av[i].re } else { av[i - 2].im };
            prop_assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn kron_mixed_product(a in entries(2), b in entries(2), c in entries(2), d in entries(2)) {
        let (a, b, c, d) = (cmat(2, &a), cmat(2, &b), cmat(2, &c), cmat(2, &d));
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!((&lhs - &rhs).norm_max() < 1e-11);
    }

    #[test]
    fn generated_reps_are_exact(n in 1usize..=3, a0 in any::<bool>(), g in any::<bool>()) {
        let rep = build_dirac_rep(n, a0, g).unwrap();
        prop_assert!(check_relations(&rep).is_empty());
        if let (Some(gm), Some(v)) = (&rep.gamma, &rep.gamma_fixed) {
            for i in 0..rep.dim {
                let gv: C64 = (0..rep.dim).map(|j| gm[(i, j)] * v[j]).sum();
                prop_assert!((gv - v[i]).norm() < 1e-14);
            }
        }
    }
}
