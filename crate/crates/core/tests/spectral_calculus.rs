mod common;

use proptest::prelude::*;
use stratified_sparse::group::{build_group, GroupModel, ModelKind};
use stratified_sparse::spectral::{
    assemble_sublaplacian, gaussian_decay_report, spectral_decompose, SpectralDecomposition,
};
use stratified_sparse::C64;

fn setup(kind: ModelKind, s0: f64) -> (GroupModel, SpectralDecomposition) {
    let g = build_group(kind, 4096).unwrap();
    let dec = spectral_decompose(&assemble_sublaplacian(&g, s0).unwrap()).unwrap();
    (g, dec)
}

#[test]
fn matrix_matches_coordinate_construction() {
    for kind in [ModelKind::Torus { d: 2, n: 5 }, ModelKind::Heisenberg { n: 4 }] {
        let g = build_group(kind, 4096).unwrap();
        let l = assemble_sublaplacian(&g, 3.0).unwrap();
        let oracle = common::laplacian_from_coordinates(&g, 3.0);
        for x in 0..g.size() {
            for y in 0..g.size() {
                assert_eq!(l.entry(x, y), oracle[(x, y)]);
            }
        }
    }
}

#[test]
fn torus_eigenvalues_in_closed_form() {
    let (n, s0) = (24usize, 4.0);
    let (_, dec) = setup(ModelKind::Torus { d: 1, n }, s0);
    let mut expected: Vec<f64> =
        (0..n).map(|k| s0 * s0 * (2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())).collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in dec.eigenvalues().iter().zip(&expected) {
        assert!((a - b).abs() < 1e-10 * s0 * s0, "{a} vs {b}");
    }
}

#[test]
fn heat_semigroup_matches_matrix_exponential() {
    for kind in [ModelKind::Torus { d: 1, n: 32 }, ModelKind::Heisenberg { n: 5 }] {
        let (g, dec) = setup(kind, 4.0);
        let t = 0.05;
        let l = common::laplacian_from_coordinates(&g, 4.0);
        let e = common::expm(&(&l * faer::Scale(-t)));
        let f = common::random_function(g.size(), 11);
        let oracle = common::mat_apply(&e, &f);
        let calc = dec.apply_multiplier(|lam| C64::new((-t * lam * lam).exp(), 0.0), &f).unwrap();
        assert!(common::l2_diff(&calc, &oracle) <= 1e-10 * common::l2(&oracle), "{kind}");
    }
}

#[test]
fn heat_kernel_is_a_probability_density() {
    let (_, dec) = setup(ModelKind::Heisenberg { n: 6 }, 4.0);
    let p = dec.heat_kernel(0.02).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&v| v > -1e-14));
}

#[test]
fn heat_kernel_has_gaussian_decay_on_the_torus() {
    let (g, dec) = setup(ModelKind::Torus { d: 1, n: 64 }, 1.0);
    let p = dec.heat_kernel(0.05).unwrap();
    let peak = p.iter().copied().fold(f64::MIN, f64::max);
    assert_eq!(p[g.identity()], peak);
    let fit = gaussian_decay_report(&g, &dec, &p, 0.05).unwrap();
    assert!(fit.exponent < 0.0 && fit.r_squared >= 0.9, "{fit:?}");
}

#[test]
fn plancherel_for_a_generic_multiplier() {
    let (_, dec) = setup(ModelKind::Heisenberg { n: 5 }, 2.0);
    let err = dec.plancherel_check(|lam| C64::new(lam.sin(), (1.0 + lam).recip())).unwrap();
    assert!(err < 1e-12);
}

#[test]
fn invalid_multiplier_is_rejected() {
    let (_, dec) = setup(ModelKind::Torus { d: 1, n: 8 }, 1.0);
    assert!(dec.multiplier_values(|lam| C64::new(1.0 / lam, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functional_calculus_is_multiplicative(a in -2.0f64..2.0, b in 0.1f64..3.0, seed in 0u64..1000) {
        let (g, dec) = setup(ModelKind::Heisenberg { n: 4 }, 2.0);
        let f = common::random_function(g.size(), seed);
        let m1 = move |l: f64| C64::from_polar(1.0, a * l);
        let m2 = move |l: f64| C64::new((-b * l).exp(), 0.0);
        let composed = dec.apply_multiplier(m1, &dec.apply_multiplier(m2, &f).unwrap()).unwrap();
        let product = dec.apply_multiplier(move |l| m1(l) * m2(l), &f).unwrap();
        prop_assert!(common::l2_diff(&composed, &product) <= 1e-12 * common::l2(&f));
    }

    #[test]
    fn multipliers_commute_with_left_translation(shift in 0usize..64, seed in 0u64..1000) {
        let (g, dec) = setup(ModelKind::Heisenberg { n: 4 }, 2.0);
        let f = common::random_function(g.size(), seed);
        let m = |l: f64| C64::new((-0.3 * l * l).exp(), l.cos());
        let lhs = g.left_translate(shift, &dec.apply_multiplier(m, &f).unwrap());
        let rhs = dec.apply_multiplier(m, &g.left_translate(shift, &f)).unwrap();
        prop_assert!(common::l2_diff(&lhs, &rhs) <= 1e-12 * common::l2(&f));
    }

    #[test]
    fn real_multipliers_are_self_adjoint(seed in 0u64..1000) {
        let (g, dec) = setup(ModelKind::Torus { d: 2, n: 6 }, 3.0);
        let f = common::random_function(g.size(), seed);
        let h = common::random_function(g.size(), seed + 7);
        let m = |l: f64| C64::new((1.0 + l).powf(-1.5), 0.0);
        let lhs = stratified_sparse::linalg::inner(&dec.apply_multiplier(m, &f).unwrap(), &h);
        let rhs = stratified_sparse::linalg::inner(&f, &dec.apply_multiplier(m, &h).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}
