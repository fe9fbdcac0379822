//! Randomized structural properties: ball monotonicity, maximal operator
//! sublinearity and exact dyadic homogeneity, radius-grid refinement,
//! distribution-function monotonicity, stopping-family nesting, forest
//! determinism, seminorm invariances and Vitali disjointness.
//!
//! Exact assertions lean on dyadic arithmetic: the builtin grids carry
//! power-of-two weights, so integer-valued functions keep every average
//! exactly representable.

use std::sync::OnceLock;

use proptest::prelude::*;

use lochom::builtin::{instantiate, Builtin};
use lochom::bmo::bmo_seminorm;
use lochom::covering::{family_seeded, vitali_cover};
use lochom::cz::cz_decompose;
use lochom::dyadic::build_forest;
use lochom::maximal::{local_maximal, weak_type_check, RadiusGrid};
use lochom::num::ulp_distance;
use lochom::{SampledFunction, Space};

fn grid128() -> &'static Space {
    static SPACE: OnceLock<Space> = OnceLock::new();
    SPACE.get_or_init(|| {
        instantiate(&Builtin::Grid1d { n: 128 })
            .unwrap()
            .with_dense_cache()
    })
}

fn grid256() -> &'static Space {
    static SPACE: OnceLock<Space> = OnceLock::new();
    SPACE.get_or_init(|| {
        instantiate(&Builtin::Grid1d { n: 256 })
            .unwrap()
            .with_dense_cache()
    })
}

fn int_function(n: usize) -> impl Strategy<Value = SampledFunction> {
    proptest::collection::vec(-8i32..=8, n)
        .prop_map(|v| SampledFunction::from_values(v.into_iter().map(f64::from).collect()).unwrap())
}

proptest! {
    #[test]
    fn balls_grow_with_the_radius(
        center in 0usize..128,
        a in 1u32..=200,
        b in 1u32..=200,
    ) {
        let sp = grid128();
        let eps = sp.level(4).unwrap().eps;
        let (lo, hi) = (a.min(b), a.max(b));
        let small = sp.ball(center, 2.0 * eps * f64::from(lo) / 200.0).unwrap();
        let large = sp.ball(center, 2.0 * eps * f64::from(hi) / 200.0).unwrap();
        prop_assert!(small.is_subset(&large));
        prop_assert!(small.contains(center));
    }

    #[test]
    fn maximal_is_subadditive_and_exactly_homogeneous(
        f in int_function(128),
        g in int_function(128),
        k in -3i32..=6,
    ) {
        let sp = grid128();
        let mf = local_maximal(sp, &f, 1, &RadiusGrid::Lossless).unwrap().values;
        let mg = local_maximal(sp, &g, 1, &RadiusGrid::Lossless).unwrap().values;
        let sum = f.plus(&g);
        let msum = local_maximal(sp, &sum, 1, &RadiusGrid::Lossless).unwrap().values;
        for x in sp.level(1).unwrap().members.iter() {
            let lhs = msum.value(x);
            let rhs = mf.value(x) + mg.value(x);
            prop_assert!(
                lhs <= rhs || ulp_distance(lhs, rhs) <= 8,
                "point {x}: {lhs} vs {rhs}"
            );
        }
        // scaling by a power of two commutes with every f64 operation here
        let c = f64::powi(2.0, k);
        let mscaled = local_maximal(sp, &f.scaled(c), 1, &RadiusGrid::Lossless).unwrap().values;
        for x in sp.level(1).unwrap().members.iter() {
            prop_assert_eq!(mscaled.value(x), c * mf.value(x));
        }
    }

    #[test]
    fn radius_grids_refine_monotonically(
        f in int_function(128),
        picks in proptest::collection::btree_set(1u32..=100, 1..8),
    ) {
        let sp = grid128();
        let cap = lochom::maximal::radius_cap(sp, 1).unwrap();
        let coarse: Vec<f64> = picks.iter().map(|&i| cap * f64::from(i) / 100.0).collect();
        let mut fine = coarse.clone();
        fine.push(cap);
        let m_coarse = local_maximal(sp, &f, 1, &RadiusGrid::Explicit(coarse)).unwrap().values;
        let m_fine = local_maximal(sp, &f, 1, &RadiusGrid::Explicit(fine)).unwrap().values;
        let m_full = local_maximal(sp, &f, 1, &RadiusGrid::Lossless).unwrap().values;
        for x in sp.level(1).unwrap().members.iter() {
            prop_assert!(m_coarse.value(x) <= m_fine.value(x));
            prop_assert!(m_fine.value(x) <= m_full.value(x));
        }
    }

    #[test]
    fn superlevel_masses_fall_as_the_threshold_rises(
        f in int_function(128),
        t0 in 0.01f64..2.0,
    ) {
        let sp = grid128();
        let grid: Vec<f64> = (0..12).map(|i| t0 * 1.5f64.powi(i)).collect();
        let rep = weak_type_check(sp, &f, 1, &grid, None).unwrap();
        for w in rep.entries.windows(2) {
            prop_assert!(w[1].level_set_measure <= w[0].level_set_measure);
        }
    }

    #[test]
    fn stopping_families_nest_across_thresholds(
        f in int_function(256),
        bump in 0.0f64..3.0,
        gap in 0.1f64..2.0,
    ) {
        let sp = grid256();
        let forest = build_forest(sp, 1, 0.25, 4).unwrap();
        let root = forest.roots()[0];
        let absf = SampledFunction::from_fn(256, |id| f.value(id).abs());
        let a = sp.average(&absf, &forest.cubes[root].members).unwrap();
        let l1 = a + bump;
        let l2 = l1 + gap;
        let fam1 = cz_decompose(sp, &forest, &absf, root, l1).unwrap();
        let fam2 = cz_decompose(sp, &forest, &absf, root, l2).unwrap();
        for &q2 in &fam2.cubes {
            prop_assert!(
                fam1.cubes.iter().any(|&q1| forest.cubes[q2]
                    .members
                    .is_subset(&forest.cubes[q1].members)),
                "cube {q2} at {l2} not inside any cube at {l1}"
            );
        }
    }

    #[test]
    fn forest_construction_is_deterministic(
        delta_pct in prop::sample::select(vec![20u32, 25, 30, 50]),
        depth in 1usize..=4,
    ) {
        let sp = grid128();
        let delta = f64::from(delta_pct) / 100.0;
        let a = build_forest(sp, 1, delta, depth).unwrap();
        let b = build_forest(sp, 1, delta, depth).unwrap();
        prop_assert_eq!(a.to_dot(), b.to_dot());
        prop_assert_eq!(a.cubes.len(), b.cubes.len());
    }

    #[test]
    fn seminorm_ignores_translation_and_scales_exactly(
        f in int_function(256),
        shift in -16i32..=16,
        k in -2i32..=8,
    ) {
        // ball means divide by non-dyadic ball masses, so translation
        // invariance holds only up to final rounding; scaling by a power of
        // two commutes with every operation and is exact
        let sp = grid256();
        let base = bmo_seminorm(sp, &f, 1).unwrap().value;
        let shifted = SampledFunction::from_fn(256, |id| f.value(id) + f64::from(shift));
        let moved = bmo_seminorm(sp, &shifted, 1).unwrap().value;
        prop_assert!(
            ulp_distance(moved, base) <= 8,
            "translation moved the seminorm: {moved} vs {base}"
        );
        let c = f64::powi(2.0, k);
        prop_assert_eq!(bmo_seminorm(sp, &f.scaled(c), 1).unwrap().value, c * base);
    }

    #[test]
    fn vitali_keeps_disjoint_balls_and_covers_for_any_seed(
        seed in 0u64..1_000_000,
        count in 1usize..=64,
    ) {
        let sp = grid128();
        let family = family_seeded(sp, 1, count, seed).unwrap();
        let rep = vitali_cover(sp, 1, &family).unwrap();
        prop_assert!(rep.disjoint);
        prop_assert!(rep.covered);
        prop_assert!(rep.pass);
    }
}
