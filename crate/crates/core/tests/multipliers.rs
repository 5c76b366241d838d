mod common;

use proptest::prelude::*;
use stratified_sparse::group::{build_group, GroupModel, ModelKind};
use stratified_sparse::kernel_ops::NormPair;
use stratified_sparse::multipliers::dispersive::dispersive_apply;
use stratified_sparse::multipliers::riesz::{riesz_first_order, riesz_mean_apply, riesz_multiplier};
use stratified_sparse::multipliers::spatial::{piece_decay_report, spatial_pieces};
use stratified_sparse::multipliers::{class_membership_report, oscillating_multiplier, MultiplierSpec};
use stratified_sparse::spectral::{assemble_sublaplacian, spectral_decompose, SpectralDecomposition};
use stratified_sparse::C64;

fn setup(kind: ModelKind, s0: f64) -> (GroupModel, SpectralDecomposition) {
    let g = build_group(kind, 4096).unwrap();
    let dec = spectral_decompose(&assemble_sublaplacian(&g, s0).unwrap()).unwrap();
    (g, dec)
}

const CLASSES: [(f64, f64); 3] = [(1.0, 2.0), (2.0, 3.0), (-1.0, 2.0)];

#[test]
fn oscillating_multiplier_values() {
    // m(l) = l^{-theta beta / 2} exp(i l^theta) on l^theta >= 1
    let m = oscillating_multiplier(2.0, 3.0).unwrap();
    let l: f64 = 1.7;
    let expected = C64::from_polar(l.powf(-3.0), l * l);
    assert!((m.eval(l) - expected).norm() < 1e-15);
}

#[test]
fn class_conditions_stay_bounded() {
    for (theta, beta) in CLASSES {
        let spec = oscillating_multiplier(theta, beta).unwrap();
        let range = if theta > 0.0 { (0, 8 / theta as i32) } else { (-8, 0) };
        let rep = class_membership_report(&spec, range, 2).unwrap();
        assert!(rep.bounded, "theta {theta}: {:?} {:?}", rep.cond1_spread, rep.cond2_spread);
    }
}

#[test]
fn a_multiplier_outside_the_class_is_flagged() {
    // exp(i l^2) without decay violates the sup condition for beta = 2
    let spec = MultiplierSpec::custom("undamped", 2.0, 2.0, 2.0, |l: f64| C64::from_polar(1.0, l * l)).unwrap();
    let rep = class_membership_report(&spec, (0, 6), 1).unwrap();
    assert!(!rep.bounded);
}

#[test]
fn spatial_pieces_sum_to_the_frequency_piece() {
    let (g, dec) = setup(ModelKind::Heisenberg { n: 6 }, 4.0);
    let f = common::random_function(g.size(), 5);
    for (theta, beta) in CLASSES {
        let spec = oscillating_multiplier(theta, beta).unwrap();
        let js: Vec<i32> = if theta > 0.0 { (0..5).collect() } else { (-3..=0).collect() };
        for j in js {
            let sp = spatial_pieces(&g, &dec, &spec, j).unwrap();
            let whole = common::naive_convolve(&g, &f, &sp.full);
            let mut sum = vec![C64::new(0.0, 0.0); g.size()];
            for p in &sp.pieces {
                for (s, v) in sum.iter_mut().zip(g.convolve(&f, &p.kernel)) {
                    *s += v;
                }
            }
            assert!(common::l2_diff(&sum, &whole) <= 1e-10 * common::l2(&whole).max(1e-300), "j = {j}");
        }
    }
}

#[test]
fn two_norm_of_a_piece_is_its_spectral_sup() {
    let (g, dec) = setup(ModelKind::Torus { d: 1, n: 128 }, 8.0);
    let spec = oscillating_multiplier(1.0, 2.0).unwrap();
    let rep = piece_decay_report(&g, &dec, &spec, &(0..8).collect::<Vec<_>>(), &[NormPair::TwoTwo]).unwrap();
    for r in &rep.rows {
        assert!((r.total - r.spectral_sup).abs() <= 1e-8 * r.spectral_sup, "j = {}", r.j);
    }
}

#[test]
fn riesz_first_order_agrees_with_closed_form() {
    for lam in [0.0, 1e-6, 0.3, 2.0, 17.5, 63.0] {
        for alpha in [0.5, 1.0, 2.0] {
            let q = riesz_multiplier(1.0, alpha, 1.0, lam).unwrap();
            let c = riesz_first_order(alpha, 1.0, lam);
            assert!((q - c).norm() <= 1e-10 * c.norm(), "lam {lam} alpha {alpha}");
        }
    }
}

#[test]
fn riesz_second_order_by_hand() {
    // k = 2: 2 int_0^1 (1 - s) e^{i s mu} ds = 2 (e^{i mu} - 1 - i mu) / (i mu)^2
    let mu: f64 = 3.0;
    let i = C64::new(0.0, 1.0);
    let expected = 2.0 * ((i * mu).exp() - 1.0 - i * mu) / (i * mu).powi(2);
    let q = riesz_multiplier(2.0, 1.0, 1.0, mu).unwrap();
    assert!((q - expected).norm() < 1e-12);
}

#[test]
fn riesz_mean_of_a_constant_is_the_constant() {
    let (g, dec) = setup(ModelKind::Torus { d: 1, n: 16 }, 2.0);
    let f = vec![C64::new(2.5, -1.0); g.size()];
    let out = riesz_mean_apply(&dec, 1.5, 1.0, 1.0, &f).unwrap();
    assert!(common::l2_diff(&out, &f) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalar_pieces_telescope(log_lam in -8.0f64..10.0, which in 0usize..3) {
        let (theta, beta) = CLASSES[which];
        let spec = oscillating_multiplier(theta, beta).unwrap();
        let lam = 2f64.powf(log_lam);
        prop_assert!((spec.piece_sum(lam) - spec.eval(lam)).norm() <= 1e-10);
    }

    #[test]
    fn dispersive_flow_is_unitary_and_a_group(s in 0.0f64..3.0, t in 0.0f64..3.0, alpha in 0.5f64..2.5, seed in 0u64..500) {
        let (g, dec) = setup(ModelKind::Heisenberg { n: 4 }, 2.0);
        let f = common::random_function(g.size(), seed);
        let us = dispersive_apply(&dec, alpha, s, &f).unwrap();
        prop_assert!((common::l2(&us) - common::l2(&f)).abs() <= 1e-10 * common::l2(&f));
        let composed = dispersive_apply(&dec, alpha, t, &us).unwrap();
        let direct = dispersive_apply(&dec, alpha, s + t, &f).unwrap();
        prop_assert!(common::l2_diff(&composed, &direct) <= 1e-9 * common::l2(&f));
        prop_assert_eq!(dispersive_apply(&dec, alpha, 0.0, &f).unwrap(), f);
    }
}
