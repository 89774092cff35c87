mod common;

use common::{rand_mixture, rng};
use unital::channel::{choi_to_kraus, kraus_to_choi, KrausChannel};
use unital::extremal::{
    exceptional_channel, exceptional_choi, exceptional_coefficients,
    exceptional_x_matrix, extremality_test, ExtremalityReport,
};
use unital::linalg::{c, eigh, haar_unitary, CMatrix};
use unital::Error;

// the structural caps on the Kraus number implied by each criterion
fn check_bounds(report: &ExtremalityReport, d: usize) {
    if report.extremal_in_all {
        assert!(report.n_kraus <= d);
    }
    if report.extremal_in_unital {
        let cap = (2.0_f64).sqrt() * d as f64;
        assert!((report.n_kraus as f64) <= cap);
    }
}

#[test]
fn unitary_conjugations_are_extremal_everywhere() {
    let mut r = rng(90);
    for trial in 0..100 {
        let d = 2 + trial % 3;
        let ch = KrausChannel::new(d, vec![haar_unitary(d, &mut r)]).unwrap();
        let report = extremality_test(&ch, 1e-8).unwrap();
        assert!(report.extremal_in_all, "trial {trial}");
        assert!(report.extremal_in_unital, "trial {trial}");
        assert_eq!((report.rank_full, report.rank_unital), (1, 1));
        check_bounds(&report, d);
    }
}

#[test]
fn two_unitary_mixtures_are_never_extremal_among_all_channels() {
    let mut r = rng(91);
    for trial in 0..20 {
        let d = 2 + trial % 2;
        let ch = rand_mixture(d, 2, &mut r).to_kraus();
        let report = extremality_test(&ch, 1e-8).unwrap();
        assert!(!report.extremal_in_all, "trial {trial}");
        check_bounds(&report, d);
    }
}

#[test]
fn pinching_mixture_is_extremal_nowhere() {
    // equal mixture of identity and sigma_z conjugations: A1^dag A2 and
    // A2^dag A1 coincide, and so do their doubled versions
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a1 = CMatrix::identity(2).scale(c(s, 0.0));
    let mut a2 = CMatrix::zeros(2, 2);
    a2[(0, 0)] = c(s, 0.0);
    a2[(1, 1)] = c(-s, 0.0);
    let ch = KrausChannel::new(2, vec![a1, a2]).unwrap();
    let report = extremality_test(&ch, 1e-8).unwrap();
    assert!(!report.extremal_in_all);
    assert!(!report.extremal_in_unital);
    assert!(report.rank_full < 4 && report.rank_unital < 4);
}

#[test]
fn exceptional_channel_separates_the_two_notions() {
    let ch = exceptional_channel();
    assert_eq!(ch.d(), 3);
    assert_eq!(ch.n_kraus(), 4);
    assert!(ch.tp_defect() < 1e-10);
    assert!(ch.unital_defect() < 1e-10);

    let report = extremality_test(&ch, 1e-8).unwrap();
    // four operators in dimension three exceed the cap for the full set,
    // but the doubled family has full rank 16
    assert!(!report.extremal_in_all);
    assert!(report.extremal_in_unital);
    assert_eq!(report.rank_unital, 16);
    assert!(
        report.min_gram_unital > 1e-6,
        "independence margin {:.3e}",
        report.min_gram_unital
    );
    check_bounds(&report, 3);
}

#[test]
fn exceptional_dual_state_is_doubly_normalized_rank_four() {
    let rho = exceptional_choi();
    assert!(rho.tp_defect() < 1e-10);
    assert!(rho.unital_defect() < 1e-10);
    assert!(rho.is_cp(1e-12));
    let values = eigh(rho.rho()).unwrap().values;
    let above: Vec<f64> =
        values.iter().copied().filter(|v| *v > 1e-8).collect();
    assert_eq!(above.len(), 4, "rank of the dual state");
    for v in &values[..5] {
        assert!(v.abs() < 1e-12, "kernel eigenvalue {v:.3e}");
    }
}

#[test]
fn x_eigenvalues_match_the_algebraic_form() {
    let x = exceptional_x_matrix(exceptional_coefficients());
    let got = eigh(&x).unwrap().values;

    // alpha is the designated root of its own cubic; the nonzero spectrum is
    // {1/3, 1/3, (1 +- sqrt(alpha))/6}
    let alpha = {
        let p = |a: f64| {
            6561.0 * a.powi(3) - 78003.0 * a.powi(2) + 163107.0 * a - 25957.0
        };
        let (mut lo, mut hi) = (0.1, 0.2);
        assert!(p(lo) < 0.0 && p(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let third = 1.0 / 3.0;
    let mut want = vec![
        0.0,
        0.0,
        (1.0 - alpha.sqrt()) / 6.0,
        (1.0 + alpha.sqrt()) / 6.0,
        third,
        third,
    ];
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-10, "eigenvalue {g} vs algebraic {w}");
    }

    // and the printed decimal expansions hold at display accuracy
    let mut decimals = vec![0.0, 0.0, 0.097285, 0.23604, third, third];
    decimals.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&decimals) {
        assert!((g - w).abs() < 1e-4, "eigenvalue {g} vs printed {w}");
    }
}

#[test]
fn dual_state_round_trip_repairs_degenerate_kraus_sets() {
    let mut r = rng(92);
    let u = haar_unitary(3, &mut r);
    let v = haar_unitary(3, &mut r);
    let w1 = (0.3_f64).sqrt();
    let w3 = (0.4_f64).sqrt();
    let degenerate = KrausChannel::new(
        3,
        vec![
            u.scale(c(w1, 0.0)),
            u.scale(c(w1, 0.0)),
            v.scale(c(w3, 0.0)),
        ],
    )
    .unwrap();
    assert!(matches!(
        extremality_test(&degenerate, 1e-8),
        Err(Error::Unsupported(_))
    ));

    let reduced = choi_to_kraus(&kraus_to_choi(&degenerate), 1e-10).unwrap();
    assert_eq!(reduced.n_kraus(), 2);
    let report = extremality_test(&reduced, 1e-8).unwrap();
    assert!(!report.extremal_in_all);
}
