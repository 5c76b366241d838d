mod common;

use std::collections::HashSet;

use num_rational::Ratio;
use proptest::prelude::*;
use stratified_sparse::dyadic::domination::{domination_experiment, domination_setup};
use stratified_sparse::dyadic::grid::{build_dyadic_grids, build_grid, covering_level, set_diameter};
use stratified_sparse::dyadic::sparse::{admissible_region, sparse_form, sparsify_sets, Region};
use stratified_sparse::group::{build_group, GroupModel, ModelKind};
use stratified_sparse::multipliers::oscillating_multiplier;
use stratified_sparse::spectral::{assemble_sublaplacian, spectral_decompose};
use stratified_sparse::C64;

fn model(kind: ModelKind) -> GroupModel {
    build_group(kind, 4096).unwrap()
}

#[test]
fn grid_levels_partition_and_nest() {
    for kind in [ModelKind::Torus { d: 1, n: 40 }, ModelKind::Torus { d: 2, n: 8 }, ModelKind::Heisenberg { n: 5 }] {
        let g = model(kind);
        for seed in 1..=3 {
            let grid = build_grid(&g, 0.5, g.identity(), seed).unwrap();
            let mut previous: Option<Vec<HashSet<usize>>> = None;
            for (k, cubes) in grid.levels() {
                let sets: Vec<HashSet<usize>> = cubes.iter().map(|c| c.points.iter().copied().collect()).collect();
                let total: usize = sets.iter().map(|s| s.len()).sum();
                let union: HashSet<usize> = sets.iter().flatten().copied().collect();
                assert_eq!((total, union.len()), (g.size(), g.size()), "{kind} level {k}");
                if let Some(parents) = &previous {
                    for s in &sets {
                        assert_eq!(parents.iter().filter(|p| s.is_subset(p)).count(), 1, "{kind} level {k}");
                    }
                }
                // sandwich with the grid's own constants
                let scale = 0.5f64.powi(k);
                for c in cubes {
                    for x in 0..g.size() {
                        let d = g.dist(c.center, x);
                        if d < grid.c_inner() * scale {
                            assert!(c.points.contains(&x));
                        }
                        if c.points.contains(&x) {
                            assert!(d < grid.c_outer() * scale);
                        }
                    }
                }
                previous = Some(sets);
            }
        }
    }
}

#[test]
fn family_covers_every_small_ball() {
    let g = model(ModelKind::Heisenberg { n: 5 });
    let family = build_dyadic_grids(&g, 0.5, 2).unwrap();
    assert!(family.uncovered.is_empty());
    for z in 0..g.size() {
        for &r in g.distinct_norms().iter().filter(|&&r| r >= g.min_positive_norm() && r <= g.diameter() / 4.0) {
            let ball: Vec<usize> = (0..g.size()).filter(|&x| g.dist(z, x) <= r).collect();
            let k = covering_level(r, 0.5);
            let hit = family.grids.iter().any(|grid| {
                let kk = k.clamp(grid.k_min(), grid.k_max());
                let cell = grid.cell_of(kk, ball[0]);
                let cube = &grid.level(kk)[cell];
                ball.iter().all(|x| cube.points.contains(x))
                    && set_diameter(&g, &cube.points) <= family.covering_constant * r * (1.0 + 1e-12)
            });
            assert!(hit, "ball ({z}, {r})");
        }
    }
}

#[test]
fn sparse_form_by_hand() {
    let g = model(ModelKind::Torus { d: 1, n: 8 });
    let sets = vec![((0..8).collect::<Vec<_>>(), 1.0)];
    let fam = sparsify_sets(g.size(), &sets, 0.5, 0.5).unwrap();
    let f: Vec<C64> = (0..8).map(|i| C64::new(i as f64, 0.0)).collect();
    let h = vec![C64::new(2.0, 0.0); 8];
    // |G| * <|f|>_1 * <|h|^2>^{1/2} = 8 * 3.5 * 2
    assert!((sparse_form(&fam, &f, &h, 1.0, 2.0).unwrap() - 56.0).abs() < 1e-12);
}

fn oracle(q: i64, beta: i64, inv1: Ratio<i64>, inv2: Ratio<i64>) -> Region {
    let one = Ratio::from_integer(1);
    let half = Ratio::new(1, 2);
    let bound = Ratio::new(beta, 2 * q);
    let in1 = inv1 <= one && inv2 <= inv1 && inv2 >= half && inv1 - half < bound;
    let in2 = inv1 <= one && inv1 >= half && inv2 <= half && inv2 >= one - inv1 && inv1 - inv2 < bound;
    if in1 {
        Region::Sparse1
    } else if in2 {
        Region::Sparse2
    } else {
        Region::Inadmissible
    }
}

#[test]
fn admissibility_examples() {
    assert_eq!(admissible_region(1.0, 1.0, 4.0 / 3.0, 2.0).unwrap().region(), Region::Sparse1);
    assert_eq!(admissible_region(4.0, 2.0, 1.0, 2.0).unwrap().region(), Region::Inadmissible);
    assert_eq!(admissible_region(4.0, 8.0, 1.0, 2.0).unwrap().region(), Region::Sparse1);
    assert!(admissible_region(4.0, 2.0, 0.5, 2.0).is_err());
}

proptest! {
    #[test]
    fn admissibility_agrees_with_rational_oracle(q in 1i64..6, beta in 1i64..12, a in 0i64..64, b in 0i64..64) {
        // r1 = 1 + a/32, r2 = 1 + b/8 are exact binary fractions
        let r1 = Ratio::new(32 + a, 32);
        let r2 = Ratio::new(8 + b, 8);
        let got = admissible_region(q as f64, beta as f64, (32 + a) as f64 / 32.0, (8 + b) as f64 / 8.0).unwrap();
        let expected = oracle(q, beta, r1.recip(), r2.recip());
        prop_assert!(got.region() == expected || (expected == Region::Sparse1 && got.sparse1));
    }

    #[test]
    fn sparsified_families_are_sparse(seed in 0u64..200, count in 1usize..40) {
        use rand::{Rng, SeedableRng};
        let g = model(ModelKind::Torus { d: 1, n: 64 });
        let grid = build_grid(&g, 0.5, g.identity(), seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let levels: Vec<(i32, usize)> = grid.level_counts();
        let sets: Vec<(Vec<usize>, f64)> = (0..count)
            .map(|_| {
                let (k, len) = levels[rng.random_range(0..levels.len())];
                (grid.level(k)[rng.random_range(0..len)].points.clone(), rng.random_range(0.1..2.0))
            })
            .collect();
        let fam = sparsify_sets(g.size(), &sets, 0.5, 0.5).unwrap();
        let mut seen = HashSet::new();
        for m in &fam.members {
            prop_assert!(2 * m.exclusive.len() >= m.points.len());
            let pts: HashSet<usize> = m.points.iter().copied().collect();
            for &x in &m.exclusive {
                prop_assert!(pts.contains(&x));
                prop_assert!(seen.insert(x));
            }
        }
        // every input set is kept or absorbed into a kept superset
        for (s, _) in &sets {
            let s: HashSet<usize> = s.iter().copied().collect();
            prop_assert!(fam.members.iter().any(|m| s.iter().all(|x| m.points.contains(x))));
        }
    }
}

#[test]
fn every_emitted_family_is_sparse_on_both_models() {
    for (kind, s0) in [(ModelKind::Torus { d: 1, n: 64 }, 4.0), (ModelKind::Heisenberg { n: 6 }, 1.0)] {
        let g = model(kind);
        let dec = spectral_decompose(&assemble_sublaplacian(&g, s0).unwrap()).unwrap();
        let family = build_dyadic_grids(&g, 0.5, 1).unwrap();
        for (theta, beta) in [(1.0, 2.0), (2.0, 3.0), (-1.0, 2.0)] {
            let spec = oscillating_multiplier(theta, beta).unwrap();
            let setup = domination_setup(&g, &dec, &spec, &family, 1.0, 2.0)
                .unwrap_or_else(|e| panic!("{kind} theta {theta}: {e}"));
            for fam in &setup.families {
                let check = fam.verify(g.size());
                assert!(check.passed(0.5), "{kind} theta {theta}: {check:?}");
            }
        }
    }
}

#[test]
fn domination_ratios_are_finite_and_reproducible() {
    let g = model(ModelKind::Torus { d: 1, n: 64 });
    let dec = spectral_decompose(&assemble_sublaplacian(&g, 4.0).unwrap()).unwrap();
    let family = build_dyadic_grids(&g, 0.5, 1).unwrap();
    let spec = oscillating_multiplier(1.0, 2.0).unwrap();
    let a = domination_experiment(&g, &dec, &spec, &family, 1.0, 2.0, 20, 9).unwrap();
    let b = domination_experiment(&g, &dec, &spec, &family, 1.0, 2.0, 20, 9).unwrap();
    assert!(a.max_ratio.is_finite() && a.max_ratio > 0.0);
    assert_eq!(a.max_ratio, b.max_ratio);
    assert!(a.dual_gap <= 1e-12);
}
