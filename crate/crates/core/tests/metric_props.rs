//! Properties of the core metric operations, checked against independent
//! exhaustive scans and random instances.

mod support;

use proptest::prelude::*;
use rand::Rng;

use lipfree::metric::{
    check_proportional, default_labels, diameter, restrict, rho_distance, set_distance,
    sup_distance, validate_metric, FiniteMetricSpace, Proportionality, SubsetMask,
};
use support::{random_space, rng};

#[test]
fn shortest_path_closure_is_always_valid() {
    let mut r = rng(0xA11CE);
    for n in [3, 6, 10, 20] {
        let m = random_space(&mut r, n);
        let report = validate_metric(&m);
        assert!(report.is_metric(), "n = {n}: {}", report.summary());
    }
}

#[test]
fn validator_flags_exactly_the_violating_triples() {
    // Raw random symmetric positive matrices, no closure: violations likely.
    let mut r = rng(0xBEEF);
    for _ in 0..20 {
        let n = r.gen_range(3..8);
        let mut dist = vec![0.0f64; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = r.gen_range(0.1..2.0);
                dist[i * n + j] = w;
                dist[j * n + i] = w;
            }
        }
        let m = FiniteMetricSpace::new(default_labels(n), dist, 0).unwrap();
        let report = validate_metric(&m);
        // Independent scan.
        let mut expected = Vec::new();
        for from in 0..n {
            for to in 0..n {
                for via in 0..n {
                    if from != to && via != from && via != to {
                        let excess = m.dist(from, to) - m.dist(from, via) - m.dist(via, to);
                        if excess > 1e-9 {
                            expected.push((from, to, via));
                        }
                    }
                }
            }
        }
        let got: Vec<(usize, usize, usize)> = report
            .triangle_violations
            .iter()
            .map(|v| (v.from, v.to, v.via))
            .collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn set_distances_match_exhaustive_enumeration() {
    let mut r = rng(0xD15C0);
    let m = random_space(&mut r, 20);
    for _ in 0..25 {
        let size_a = r.gen_range(1..8);
        let size_b = r.gen_range(1..8);
        let a = SubsetMask::new(&m, (0..size_a).map(|_| r.gen_range(0..20))).unwrap();
        let b = SubsetMask::new(&m, (0..size_b).map(|_| r.gen_range(0..20))).unwrap();
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for &x in a.members() {
            for &y in b.members() {
                min = min.min(m.dist(x, y));
                max = max.max(m.dist(x, y));
            }
        }
        assert_eq!(set_distance(&m, &a, &b).unwrap(), min);
        assert_eq!(sup_distance(&m, &a, &b).unwrap(), max);
    }
}

#[test]
fn diameter_grows_under_union() {
    let mut r = rng(7);
    let m = random_space(&mut r, 15);
    for _ in 0..20 {
        let a = SubsetMask::new(&m, (0..r.gen_range(1..6)).map(|_| r.gen_range(0..15))).unwrap();
        let b = SubsetMask::new(&m, (0..r.gen_range(1..6)).map(|_| r.gen_range(0..15))).unwrap();
        let union = SubsetMask::new(
            &m,
            a.members().iter().chain(b.members()).copied(),
        )
        .unwrap();
        let du = diameter(&m, &union).unwrap();
        assert!(du >= diameter(&m, &a).unwrap());
        assert!(du >= diameter(&m, &b).unwrap());
    }
}

#[test]
fn restrict_composes_as_intersection() {
    let mut r = rng(42);
    let m = random_space(&mut r, 12);
    let outer = SubsetMask::new(&m, [0, 2, 3, 5, 7, 8, 10]).unwrap();
    let restricted = restrict(&m, &outer).unwrap();
    // Inner mask in restricted coordinates picks {2, 5, 8, 10} of the parent.
    let inner = SubsetMask::new(&restricted, [1, 3, 5, 6]).unwrap();
    let twice = restrict(&restricted, &inner).unwrap();
    let direct_mask = SubsetMask::new(&m, [2, 5, 8, 10]).unwrap();
    let direct = restrict(&m, &direct_mask).unwrap();
    assert_eq!(twice.labels(), direct.labels());
    assert_eq!(twice.dist_slice(), direct.dist_slice());
}

#[test]
fn restrict_preserves_validity() {
    let mut r = rng(43);
    let m = random_space(&mut r, 14);
    for _ in 0..10 {
        let a = SubsetMask::new(&m, (0..r.gen_range(2..10)).map(|_| r.gen_range(0..14))).unwrap();
        assert!(validate_metric(&restrict(&m, &a).unwrap()).is_metric());
    }
}

#[test]
fn rho_distance_from_constructed_gap() {
    let mut r = rng(44);
    let m1 = random_space(&mut r, 8);
    // Perturb every pair by at most 0.3 with the max attained exactly once.
    let n = m1.len();
    let mut dist = m1.dist_slice().to_vec();
    let mut sup = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let delta = if (i, j) == (0, 1) { 0.3 } else { r.gen_range(0.0..0.2) };
            sup = sup.max(delta);
            dist[i * n + j] += delta;
            dist[j * n + i] += delta;
        }
    }
    let m2 = FiniteMetricSpace::new(m1.labels().to_vec(), dist, 0).unwrap();
    let rho = rho_distance(&m1, &m2).unwrap().value();
    assert!((rho - sup).abs() < 1e-12);
    assert!((rho - 0.3).abs() < 1e-12);
}

#[test]
fn proportional_random_scaled_copy() {
    let mut r = rng(45);
    for _ in 0..10 {
        let m = random_space(&mut r, 9);
        let c: f64 = r.gen_range(0.2..5.0);
        let scaled_dist: Vec<f64> = m.dist_slice().iter().map(|&d| c * d).collect();
        let scaled = FiniteMetricSpace::new(m.labels().to_vec(), scaled_dist, 0).unwrap();
        match check_proportional(&scaled, &m).unwrap() {
            Proportionality::Proportional { scale } => {
                assert!((scale - c).abs() < 1e-9 * c.max(1.0))
            }
            other => panic!("expected proportional: {other:?}"),
        }
    }
}

#[test]
fn single_precision_instantiation_works() {
    let m: lipfree::Space32 = FiniteMetricSpace::from_rows(
        default_labels(3),
        vec![
            vec![0.0f32, 1.0, 1.5],
            vec![1.0, 0.0, 0.75],
            vec![1.5, 0.75, 0.0],
        ],
    )
    .unwrap();
    assert!(validate_metric(&m).is_metric());
    let mu = lipfree::Measure32::dirac_difference(&m, 0, 2).unwrap();
    let (norm, _) = lipfree::free::free_space_norm(&m, &mu).unwrap();
    assert!((norm - 1.5f32).abs() < 1e-6);
    assert_eq!(rho_distance(&m, &m).unwrap().value(), 0.0f32);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// rho is a metric on matrices over a fixed point set.
    #[test]
    fn rho_is_a_metric(seed in 0u64..1000) {
        let mut r = rng(seed);
        let n = 6;
        let spaces: Vec<FiniteMetricSpace<f64>> =
            (0..3).map(|_| random_space(&mut r, n)).collect();
        let d01 = rho_distance(&spaces[0], &spaces[1]).unwrap().value();
        let d10 = rho_distance(&spaces[1], &spaces[0]).unwrap().value();
        let d02 = rho_distance(&spaces[0], &spaces[2]).unwrap().value();
        let d12 = rho_distance(&spaces[1], &spaces[2]).unwrap().value();
        let d00 = rho_distance(&spaces[0], &spaces[0]).unwrap().value();
        prop_assert_eq!(d01, d10);
        prop_assert_eq!(d00, 0.0);
        prop_assert!(d01 <= 1.0);
        prop_assert!(d02 <= d01 + d12 + 1e-12);
    }

    /// Restriction keeps entries bit-identical.
    #[test]
    fn restriction_entries_are_bit_identical(seed in 0u64..1000) {
        let mut r = rng(seed);
        let m = random_space(&mut r, 10);
        let members: Vec<usize> = (0..10).filter(|_| r.gen_bool(0.6)).collect();
        prop_assume!(!members.is_empty());
        let mask = SubsetMask::new(&m, members.iter().copied()).unwrap();
        let sub = restrict(&m, &mask).unwrap();
        for (pi, &i) in mask.members().iter().enumerate() {
            for (pj, &j) in mask.members().iter().enumerate() {
                prop_assert_eq!(sub.dist(pi, pj), m.dist(i, j));
            }
        }
    }
}
