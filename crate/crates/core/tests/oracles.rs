//! Independent reference computations checked against the library.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, SQRT_2, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use qcorr::entangle::{self, cross_term_weight, premeasure, premeasure_with_overlap, MeasurementSetup};
use qcorr::nonlocal::{bell_1964, bell_scan, chsh, chsh_local_max, degree_of_correlation, joint_probs, RtoConfig};
use qcorr::optics::{mzi_probabilities, MziConfig};
use qcorr::qcore::*;

use common::labels;

fn random_state(rng: &mut ChaCha20Rng, na: usize, nb: usize) -> BipartiteState {
    let m = CMatrix::from_fn(na, nb, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    BipartiteState::new(labels("a", na), labels("b", nb), m).unwrap()
}

/// Singular values of a 2x2 matrix from its invariants:
/// `s² = (F ± sqrt(F² - 4|det|²)) / 2`, `F = ‖M‖_F²`.
fn schmidt_2x2(m: &CMatrix) -> (f64, f64) {
    let f: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
    let disc = (f * f - 4.0 * det * det).max(0.0).sqrt();
    (((f + disc) / 2.0).sqrt(), ((f - disc) / 2.0).max(0.0).sqrt())
}

#[test]
fn schmidt_matches_closed_form_two_by_two() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for _ in 0..200 {
        let s = random_state(&mut rng, 2, 2);
        let (hi, lo) = schmidt_2x2(s.amplitudes());
        let sv = schmidt(&s);
        assert!((sv[0] - hi).abs() < 1e-12);
        if lo >= SCHMIDT_CUTOFF {
            assert!((sv[1] - lo).abs() < 1e-12);
        }
    }

    // named cases
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let m = CMatrix::from_row_slice(2, 2, &[h, z, z, h]);
    assert_eq!(schmidt_2x2(&m), (FRAC_1_SQRT_2, FRAC_1_SQRT_2));
    let m = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), z, z, c(0.0, 0.8)]);
    let (hi, lo) = schmidt_2x2(&m);
    assert!((hi - 0.8).abs() < 1e-15 && (lo - 0.6).abs() < 1e-15);
}

/// `rho_A = Ψ Ψ†`, `rho_B = Ψ^T Ψ^*` straight from the amplitude matrix.
#[test]
fn partial_trace_matches_amplitude_products() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for (na, nb) in [(2, 2), (2, 3), (3, 2), (4, 2), (2, 4)] {
        for _ in 0..20 {
            let s = random_state(&mut rng, na, nb);
            let psi = s.amplitudes();
            let ra = psi * psi.adjoint();
            let rb = psi.transpose() * psi.conjugate();
            let got_a = partial_trace(&s, Side::A).unwrap();
            let got_b = partial_trace(&s, Side::B).unwrap();
            assert!((got_a.matrix() - ra).iter().all(|z| z.norm() < 1e-12));
            assert!((got_b.matrix() - rb).iter().all(|z| z.norm() < 1e-12));
        }
    }
}

#[test]
fn reduced_mixture_purity_by_hand() {
    // diag(1/2, 1/2)^2 = diag(1/4, 1/4), trace 1/2
    let plus = normalize(entangle::system_basis(), vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    let m = premeasure(&plus, &MeasurementSetup::default()).unwrap();
    for side in [Side::A, Side::B] {
        assert!((purity(&partial_trace(&m, side).unwrap()) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn non_orthogonal_pointer_coherence() {
    // rho_A offdiagonal = a b* <d2|d1>, so the weight is 2|a||b| s
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..50 {
        let a: f64 = rng.random_range(0.05..1.0);
        let b: f64 = rng.random_range(0.05..1.0);
        let overlap: f64 = rng.random_range(0.0..1.0);
        let k = normalize(entangle::system_basis(), vec![c(a, 0.0), c(0.0, b)]).unwrap();
        let n = (a * a + b * b).sqrt();
        let expected = 2.0 * (a / n) * (b / n) * overlap;
        let s = premeasure_with_overlap(&k, overlap).unwrap();
        assert!((cross_term_weight(&s, Side::A).unwrap() - expected).abs() < 1e-12);
    }
    let plus = normalize(entangle::system_basis(), vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    let s = premeasure_with_overlap(&plus, 0.5).unwrap();
    assert!((cross_term_weight(&s, Side::A).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn interferometer_follows_cosine_on_full_grid() {
    for i in 0..360 {
        let d = TAU * i as f64 / 360.0;
        let (p1, p2) = mzi_probabilities(&MziConfig::new(d, 0.0, true));
        assert!((p1 - (1.0 + d.cos()) / 2.0).abs() < 1e-12);
        assert!((p2 - (1.0 - d.cos()) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn joint_probabilities_follow_closed_forms() {
    for i in 0..720 {
        let d = TAU * i as f64 / 720.0;
        let s = joint_probs(&RtoConfig::new(0.3, 0.3 + d));
        assert!((s.p_corr - 0.5 * (1.0 + d.cos())).abs() < 1e-12);
        assert!((s.p_anti - 0.5 * (1.0 - d.cos())).abs() < 1e-12);
        assert!((s.e - d.cos()).abs() < 1e-12);
    }
    let e = degree_of_correlation(&RtoConfig::new(FRAC_PI_4, FRAC_PI_2));
    assert!((e - FRAC_1_SQRT_2).abs() < 1e-12);
}

/// All 16 deterministic strategies as 4-bit masks, independent of the
/// library's enumeration.
fn brute_force_chsh_bound() -> f64 {
    (0u8..16)
        .map(|mask| {
            let bit = |k: u8| -> f64 {
                if mask & (1 << k) != 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            let (a, a2, b, b2) = (bit(0), bit(1), bit(2), bit(3));
            (a * b - a * b2 + a2 * b + a2 * b2).abs()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn local_bound_is_two() {
    assert_eq!(brute_force_chsh_bound(), 2.0);
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for _ in 0..100 {
        let s: [f64; 4] = std::array::from_fn(|_| rng.random_range(-PI..PI));
        assert_eq!(chsh_local_max(s[0], s[1], s[2], s[3]), brute_force_chsh_bound());
    }
}

#[test]
fn chsh_ladder_is_cubic_in_cosine() {
    // S(Δ) = 3 cos Δ - cos 3Δ = 6c - 4c³
    for i in 0..=200 {
        let d = PI * i as f64 / 200.0;
        let c = d.cos();
        let r = chsh(0.0, 2.0 * d, d, 3.0 * d);
        assert!((r.value - (6.0 * c - 4.0 * c * c * c)).abs() < 1e-12);
    }
    let c = FRAC_PI_4.cos();
    let rows = bell_scan(&[FRAC_PI_4]).unwrap();
    assert!((rows[0].chsh_margin - ((6.0 * c - 4.0 * c.powi(3)).abs() - 2.0)).abs() < 1e-12);
    assert!((rows[0].chsh_margin - (2.0 * SQRT_2 - 2.0)).abs() < 1e-12);
}

#[test]
fn three_setting_ladder_margin() {
    // |c - cos 2Δ| - (1 - c) = 2c(1 - c) for c in (-1/2, 1)
    for i in 1..100 {
        let d = FRAC_PI_2 * i as f64 / 100.0;
        let c = d.cos();
        let r = bell_1964(0.0, d, 2.0 * d);
        assert!((r.margin - 2.0 * c * (1.0 - c)).abs() < 1e-12);
    }
    let r = bell_1964(0.0, FRAC_PI_4, FRAC_PI_2);
    assert!((r.margin - 0.41421356237309503).abs() < 1e-12);
}
