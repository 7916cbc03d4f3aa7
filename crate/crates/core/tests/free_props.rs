//! Norm axioms, duality, oracle agreement, and the zero-extension bound for
//! the free-norm engine.

mod support;

use proptest::prelude::*;
use rand::Rng;

use lipfree::free::{
    brute_force_norm, dual_witness, free_space_norm, zero_extension_norm, SignedMeasure,
};
use lipfree::metric::{restrict, SubsetMask};
use support::{assert_close, random_based_mask, random_measure, random_space, rng};

#[test]
fn isometric_embedding_exhaustive() {
    let mut r = rng(0xF00D);
    let m = random_space(&mut r, 30);
    for x in 0..30 {
        for y in 0..30 {
            let mu = SignedMeasure::dirac_difference(&m, x, y).unwrap();
            let (norm, _) = free_space_norm(&m, &mu).unwrap();
            assert_close(norm, m.dist(x, y), 1e-9, "delta difference");
        }
    }
}

#[test]
fn strong_duality_on_random_instances() {
    let mut r = rng(0xD0A1);
    for _ in 0..200 {
        let n = r.gen_range(2..30);
        let m = random_space(&mut r, n);
        let support = r.gen_range(2..=n.min(12));
        let mu = random_measure(&mut r, &m, support);
        let (norm, plan) = free_space_norm(&m, &mu).unwrap();
        let w = dual_witness(&m, &mu, &plan).unwrap();
        assert!(w.f.lip() <= 1.0 + 1e-9, "witness lip {}", w.f.lip());
        let gap = norm - w.pairing;
        assert!(gap >= -1e-9 && gap <= 1e-7, "gap {gap}");
    }
}

#[test]
fn brute_force_agreement_small_supports() {
    let mut r = rng(0x0B57);
    for _ in 0..120 {
        let n = r.gen_range(4..14);
        let m = random_space(&mut r, n);
        let support = r.gen_range(2..=8);
        let mu = random_measure(&mut r, &m, support);
        let (engine, _) = free_space_norm(&m, &mu).unwrap();
        let oracle = brute_force_norm(&m, &mu).unwrap();
        assert_close(engine, oracle, 1e-9, "engine vs vertex enumeration");
    }
}

#[test]
fn restriction_monotonicity() {
    // A measure supported on A has the same norm in (A, d|A^2) and in (M, d).
    let mut r = rng(0x5EED);
    for _ in 0..40 {
        let n = r.gen_range(6..20);
        let m = random_space(&mut r, n);
        let a = random_based_mask(&mut r, &m, n - 1);
        if a.len() < 2 {
            continue;
        }
        let sub = restrict(&m, &a).unwrap();
        let mu_sub = random_measure(&mut r, &sub, a.len().min(6));
        let mut full_weights = vec![0.0; n];
        for (pos, &amb) in a.members().iter().enumerate() {
            full_weights[amb] = mu_sub.weights()[pos];
        }
        let mu_full = SignedMeasure::new(&m, full_weights).unwrap();
        let (norm_sub, _) = free_space_norm(&sub, &mu_sub).unwrap();
        let (norm_full, _) = free_space_norm(&m, &mu_full).unwrap();
        assert_close(norm_sub, norm_full, 1e-7, "restriction monotonicity");
    }
}

#[test]
fn norm_ignores_base_point_choice() {
    let mut r = rng(0xBA5E);
    let m = random_space(&mut r, 12);
    let mu = random_measure(&mut r, &m, 6);
    let (norm0, _) = free_space_norm(&m, &mu).unwrap();
    let moved = m.clone().with_base_point(7).unwrap();
    let (norm7, _) = free_space_norm(&moved, &mu).unwrap();
    assert_eq!(norm0, norm7);
}

#[test]
fn zero_extension_bound_and_scale_invariance() {
    let mut r = rng(0x2E20);
    for _ in 0..120 {
        let n = r.gen_range(3..16);
        let m = random_space(&mut r, n);
        let a = random_based_mask(&mut r, &m, n - 1);
        let z = zero_extension_norm(&m, &a).unwrap();
        assert!(
            z.exact <= z.separation_bound + 1e-9,
            "exact {} > bound {}",
            z.exact,
            z.separation_bound
        );
        // Uniform scaling of the metric leaves both ratios unchanged.
        let scaled_dist: Vec<f64> = m.dist_slice().iter().map(|&d| 3.25 * d).collect();
        let scaled = lipfree::metric::FiniteMetricSpace::new(
            m.labels().to_vec(),
            scaled_dist,
            m.base_point(),
        )
        .unwrap();
        let a2 = SubsetMask::new(&scaled, a.members().iter().copied()).unwrap();
        let z2 = zero_extension_norm(&scaled, &a2).unwrap();
        assert_close(z2.exact, z.exact, 1e-9, "scale invariance (exact)");
        assert_close(
            z2.separation_bound,
            z.separation_bound,
            1e-9,
            "scale invariance (bound)",
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Homogeneity and the triangle inequality of the norm.
    #[test]
    fn norm_axioms(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let n = r.gen_range(3..12);
        let m = random_space(&mut r, n);
        let mu = random_measure(&mut r, &m, n.min(6));
        let nu = random_measure(&mut r, &m, n.min(6));
        let alpha: f64 = r.gen_range(0.1..4.0);

        let (norm_mu, _) = free_space_norm(&m, &mu).unwrap();
        let (norm_nu, _) = free_space_norm(&m, &nu).unwrap();
        let (norm_scaled, _) = free_space_norm(&m, &mu.scaled(alpha)).unwrap();
        let (norm_sum, _) = free_space_norm(&m, &mu.plus(&nu).unwrap()).unwrap();

        prop_assert!((norm_scaled - alpha * norm_mu).abs() <= 1e-7 * (1.0 + alpha * norm_mu));
        prop_assert!(norm_sum <= norm_mu + norm_nu + 1e-7);

        // Zero norm only for the zero measure.
        if mu.weights().iter().any(|w| *w != 0.0) {
            prop_assert!(norm_mu > 0.0);
        }
    }
}
