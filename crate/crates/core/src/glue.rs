//! Gluing stage: carve the subset `C` out of the ambient space, define the
//! four-case metric on it (partition metric inside `K`, ambient metric
//! outside, sup-distance plus `eps/2` across), and certify closeness and
//! separation.

use serde::{Deserialize, Serialize};

use crate::cantor::{certify_partition_metric, Partition, PartitionedCantorMetric};
use crate::error::{Error, Result};
use crate::metric::{
    point_to_set_distance, restrict, rho_distance, validate_metric, FiniteMetricSpace, SubsetMask,
};
use crate::report::{CertificateEntry, CertificateReport};
use crate::scalar::Scalar;

/// The glued metric on `C = K ∪ {x : d(x, K) >= eps}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GluedMetric<S> {
    /// Members of `C` as ambient indices.
    pub c_mask: SubsetMask,
    /// The metric `d_C` on `C`, points in ambient order.
    pub space: FiniteMetricSpace<S>,
    /// Members of `K` as ambient indices.
    pub k_mask: SubsetMask,
    /// Partition of `K` (indices relative to `K`'s restriction order).
    pub partition: Partition,
    pub eps: S,
}

impl<S: Scalar> GluedMetric<S> {
    /// Positions of the `K` points within `C`'s ordering.
    pub fn k_positions_in_c(&self) -> Vec<usize> {
        self.k_mask
            .members()
            .iter()
            .map(|&k| self.c_mask.position_of(k).expect("K is a subset of C"))
            .collect()
    }
}

/// `C = K ∪ {x : d(x, K) >= eps}`; every ambient point ends up within `eps`
/// of `C`.
pub fn carve_c<S: Scalar>(
    ambient: &FiniteMetricSpace<S>,
    k: &SubsetMask,
    eps: S,
) -> Result<SubsetMask> {
    if !eps.is_finite() || eps <= S::zero() {
        return Err(Error::EpsOutOfRange {
            requirement: "eps > 0".to_string(),
            value: eps.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut members = Vec::new();
    for x in 0..ambient.len() {
        if k.contains(x) || point_to_set_distance(ambient, x, k)? >= eps {
            members.push(x);
        }
    }
    let c = SubsetMask::new(ambient, members)?;
    // Points left out are exactly those with d(x, K) < eps, so d(x, C) < eps.
    debug_assert!((0..ambient.len())
        .all(|x| point_to_set_distance(ambient, x, &c).unwrap() <= eps));
    Ok(c)
}

/// Build `d_C` from a certified partition metric. Refuses uncertified input
/// and re-validates the result exhaustively.
pub fn build_dc<S: Scalar>(
    ambient: &FiniteMetricSpace<S>,
    k: &SubsetMask,
    dk: &PartitionedCantorMetric<S>,
    eps: S,
) -> Result<GluedMetric<S>> {
    let reference = restrict(ambient, k)?;
    if dk.space.len() != k.len() {
        return Err(Error::SizeMismatch {
            left: dk.space.len(),
            right: k.len(),
        });
    }
    let dk_report = certify_partition_metric(dk, &reference, eps)?;
    if !dk_report.verdict {
        let failure = dk_report.first_failure().expect("non-verdict has failure");
        return Err(Error::NotCertified {
            check: failure.check.clone(),
            detail: failure
                .detail
                .clone()
                .unwrap_or_else(|| format!("measured {}", failure.measured)),
        });
    }

    let c_mask = carve_c(ambient, k, eps)?;
    let c_members = c_mask.members().to_vec();
    let nc = c_members.len();
    let half_eps = eps / S::of(2.0);

    // Block ownership of each K point, in ambient index terms.
    let owner_in_k = dk.partition.block_of();

    // Sup-distance from an ambient point to a block, measured in the ambient
    // metric over the block's ambient members.
    let blocks_ambient: Vec<Vec<usize>> = dk
        .partition
        .blocks()
        .iter()
        .map(|block| block.iter().map(|&pos| k.members()[pos]).collect())
        .collect();
    let sup_to_block = |x: usize, b: usize| -> S {
        blocks_ambient[b]
            .iter()
            .map(|&y| ambient.dist(x, y))
            .fold(S::zero(), |acc, d| acc.max(d))
    };

    let mut dist = vec![S::zero(); nc * nc];
    for (ci, &x) in c_members.iter().enumerate() {
        for (cj, &y) in c_members.iter().enumerate() {
            if ci == cj {
                continue;
            }
            let kx = k.position_of(x);
            let ky = k.position_of(y);
            let value = match (kx, ky) {
                (Some(px), Some(py)) => dk.space.dist(px, py),
                (None, None) => ambient.dist(x, y),
                (None, Some(py)) => {
                    let b = owner_in_k[py];
                    sup_to_block(x, b) + half_eps
                }
                (Some(px), None) => {
                    let b = owner_in_k[px];
                    sup_to_block(y, b) + half_eps
                }
            };
            dist[ci * nc + cj] = value;
        }
    }

    let labels: Vec<String> = c_members
        .iter()
        .map(|&x| ambient.label(x).to_string())
        .collect();
    let base = c_mask.position_of(ambient.base_point()).unwrap_or(0);
    let space = FiniteMetricSpace::new(labels, dist, base)?;

    let report = validate_metric(&space);
    if !report.is_metric() {
        return Err(Error::ConstructionInvalid {
            detail: format!("glued metric failed validation: {}", report.summary()),
        });
    }

    Ok(GluedMetric {
        c_mask,
        space,
        k_mask: k.clone(),
        partition: dk.partition.clone(),
        eps,
    })
}

/// Independent re-measurement of the glued metric's certificates.
pub fn certify_dc<S: Scalar>(
    g: &GluedMetric<S>,
    ambient: &FiniteMetricSpace<S>,
) -> Result<CertificateReport<S>> {
    let tol = S::tol_metric();
    let eps = g.eps;
    let mut entries = Vec::new();

    // (a) metric axioms
    let report = validate_metric(&g.space);
    let axiom_failures = report.triangle_violations.len()
        + usize::from(!report.symmetry_ok)
        + usize::from(!report.diagonal_ok)
        + usize::from(!report.positivity_ok);
    entries.push(
        CertificateEntry::exact_zero(
            "glue.metric_axioms",
            "d_C passes the exhaustive axiom scan",
            S::from_usize(axiom_failures).unwrap_or_else(S::one),
        )
        .with_detail(report.summary()),
    );

    // (b) rho(d_C, d restricted to C^2) <= eps
    let ambient_on_c = restrict(ambient, &g.c_mask)?;
    let rho = rho_distance(&g.space, &ambient_on_c)?.value();
    entries.push(CertificateEntry::at_most(
        "glue.rho_restriction",
        "rho(d_C, d|C^2) <= eps",
        rho,
        eps,
        S::zero(),
    ));

    // (c) separation d_C(K, C \ K) >= eps / 2, and (d) the per-pair bound
    // |d_C - d| <= D(K_i) + eps/2 on mixed pairs.
    let k_in_c = g.k_positions_in_c();
    let in_k: std::collections::HashSet<usize> = k_in_c.iter().copied().collect();
    let owner = g.partition.block_of();
    let pos_in_k: std::collections::HashMap<usize, usize> = k_in_c
        .iter()
        .enumerate()
        .map(|(kpos, &cpos)| (cpos, kpos))
        .collect();

    // Block diameters measured in the ambient metric.
    let blocks_ambient: Vec<Vec<usize>> = g
        .partition
        .blocks()
        .iter()
        .map(|block| block.iter().map(|&pos| g.k_mask.members()[pos]).collect())
        .collect();
    let block_diam: Vec<S> = blocks_ambient
        .iter()
        .map(|members| {
            let mut d = S::zero();
            for (ai, &x) in members.iter().enumerate() {
                for &y in members.iter().skip(ai + 1) {
                    d = d.max(ambient.dist(x, y));
                }
            }
            d
        })
        .collect();

    let nc = g.space.len();
    let mut min_mixed = S::infinity();
    let mut mixed_excess = S::zero();
    let mut any_mixed = false;
    for ci in 0..nc {
        for cj in 0..nc {
            if ci == cj {
                continue;
            }
            let (ki, kj) = (in_k.contains(&ci), in_k.contains(&cj));
            if ki == kj {
                continue;
            }
            any_mixed = true;
            let d_c = g.space.dist(ci, cj);
            if d_c < min_mixed {
                min_mixed = d_c;
            }
            let kpos = if ki { pos_in_k[&ci] } else { pos_in_k[&cj] };
            let block = owner[kpos];
            let x_amb = g.c_mask.members()[ci];
            let y_amb = g.c_mask.members()[cj];
            let bound = block_diam[block] + eps / S::of(2.0);
            let dev = (d_c - ambient.dist(x_amb, y_amb)).abs();
            let excess = dev - bound;
            if excess > mixed_excess {
                mixed_excess = excess;
            }
        }
    }
    if any_mixed {
        entries.push(CertificateEntry::at_least(
            "glue.separation",
            "d_C(K, C \\ K) >= eps / 2",
            min_mixed,
            eps / S::of(2.0),
            S::zero(),
        ));
        entries.push(CertificateEntry::at_most(
            "glue.mixed_deviation",
            "|d_C - d| <= D(K_i) + eps/2 on mixed pairs",
            mixed_excess,
            S::zero(),
            tol,
        ));
        let worst_block_diam = block_diam
            .iter()
            .fold(S::zero(), |acc, &d| acc.max(d));
        entries.push(CertificateEntry::less_than(
            "glue.mixed_budget",
            "D(K_i) + eps/2 < eps for every block",
            worst_block_diam + eps / S::of(2.0),
            eps,
        ));
    } else {
        entries.push(CertificateEntry::vacuous(
            "glue.separation",
            "d_C(K, C \\ K) >= eps / 2",
            "no mixed pairs (C = K)",
        ));
        entries.push(CertificateEntry::vacuous(
            "glue.mixed_deviation",
            "|d_C - d| <= D(K_i) + eps/2 on mixed pairs",
            "no mixed pairs (C = K)",
        ));
        entries.push(CertificateEntry::vacuous(
            "glue.mixed_budget",
            "D(K_i) + eps/2 < eps for every block",
            "no mixed pairs (C = K)",
        ));
    }

    Ok(CertificateReport::from_entries(entries))
}

/// Which of the four defining cases a pair of `C` indices falls in.
/// Used by tests to assert the cases partition `C x C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairCase {
    BothInK,
    MixedFirstOutside,
    MixedSecondOutside,
    BothOutside,
}

pub fn classify_pair<S: Scalar>(g: &GluedMetric<S>, ci: usize, cj: usize) -> PairCase {
    let x = g.c_mask.members()[ci];
    let y = g.c_mask.members()[cj];
    match (g.k_mask.contains(x), g.k_mask.contains(y)) {
        (true, true) => PairCase::BothInK,
        (false, true) => PairCase::MixedFirstOutside,
        (true, false) => PairCase::MixedSecondOutside,
        (false, false) => PairCase::BothOutside,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{build_cantor_model, build_dk, partition_by_diameter};
    use crate::metric::default_labels;

    /// Line composite: grid on [0, 1], a scaled Cantor copy past a gap, plus
    /// two near points strictly inside the carving distance.
    fn line_instance(eps: f64) -> (FiniteMetricSpace<f64>, SubsetMask) {
        let model = build_cantor_model::<f64>(3).unwrap();
        let scale = 4.0 * eps;
        let offset = 2.0;
        let mut coords: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
        let k_start = coords.len();
        coords.extend(model.coords().iter().map(|&c| offset + scale * c));
        let k_end = coords.len();
        coords.push(offset - 0.4 * eps); // dropped by carving
        coords.push(offset + scale * model.coords()[7] + 0.6 * eps); // dropped
        let labels = default_labels(coords.len());
        let ambient = FiniteMetricSpace::from_line_coords(labels, &coords).unwrap();
        let k = SubsetMask::new(&ambient, k_start..k_end).unwrap();
        (ambient, k)
    }

    fn glued_instance(eps: f64) -> (FiniteMetricSpace<f64>, SubsetMask, GluedMetric<f64>) {
        let (ambient, k) = line_instance(eps);
        let reference = restrict(&ambient, &k).unwrap();
        let partition = partition_by_diameter(&reference, eps).unwrap();
        let seed = build_cantor_model::<f64>(3).unwrap();
        let dk = build_dk(&reference, &partition, seed.space(), eps).unwrap();
        let g = build_dc(&ambient, &k, &dk, eps).unwrap();
        (ambient, k, g)
    }

    #[test]
    fn carve_large_eps_keeps_only_k() {
        let (ambient, k) = line_instance(0.05);
        let big = 2.0 * ambient.max_dist() + 1.0;
        let c = carve_c(&ambient, &k, big).unwrap();
        assert_eq!(c.members(), k.members());
    }

    #[test]
    fn carve_small_eps_keeps_everything() {
        let (ambient, k) = line_instance(0.05);
        let c = carve_c(&ambient, &k, 1e-12).unwrap();
        assert!(c.is_full());
    }

    #[test]
    fn carve_matches_pointwise_definition() {
        let (ambient, k) = line_instance(0.05);
        let eps = 0.05;
        let c = carve_c(&ambient, &k, eps).unwrap();
        for x in 0..ambient.len() {
            let expected =
                k.contains(x) || point_to_set_distance(&ambient, x, &k).unwrap() >= eps;
            assert_eq!(c.contains(x), expected, "point {x}");
        }
    }

    #[test]
    fn glued_metric_certifies() {
        let eps = 0.05;
        let (ambient, k, g) = glued_instance(eps);
        // The two near points are dropped, grid and K remain.
        assert_eq!(g.c_mask.len(), ambient.len() - 2);
        let report = certify_dc(&g, &ambient).unwrap();
        assert!(report.verdict, "{:#?}", report.first_failure());

        // Restrictions are bit-exact.
        let k_in_c = g.k_positions_in_c();
        let reference = restrict(&ambient, &k).unwrap();
        let partition = partition_by_diameter(&reference, eps).unwrap();
        let seed = build_cantor_model::<f64>(3).unwrap();
        let dk = build_dk(&reference, &partition, seed.space(), eps).unwrap();
        for (pi, &ci) in k_in_c.iter().enumerate() {
            for (pj, &cj) in k_in_c.iter().enumerate() {
                assert_eq!(g.space.dist(ci, cj), dk.space.dist(pi, pj));
            }
        }
        for ci in 0..g.space.len() {
            for cj in 0..g.space.len() {
                if classify_pair(&g, ci, cj) == PairCase::BothOutside {
                    let x = g.c_mask.members()[ci];
                    let y = g.c_mask.members()[cj];
                    assert_eq!(g.space.dist(ci, cj), ambient.dist(x, y));
                }
            }
        }
    }

    #[test]
    fn mixed_pairs_follow_the_formula() {
        let eps = 0.05;
        let (ambient, _k, g) = glued_instance(eps);
        let owner = g.partition.block_of();
        let k_in_c = g.k_positions_in_c();
        let pos_in_k: std::collections::HashMap<usize, usize> = k_in_c
            .iter()
            .enumerate()
            .map(|(kpos, &cpos)| (cpos, kpos))
            .collect();
        for ci in 0..g.space.len() {
            for cj in 0..g.space.len() {
                if ci == cj || classify_pair(&g, ci, cj) != PairCase::MixedFirstOutside {
                    continue;
                }
                let x = g.c_mask.members()[ci];
                let kpos = pos_in_k[&cj];
                let block = owner[kpos];
                let sup: f64 = g.partition.blocks()[block]
                    .iter()
                    .map(|&p| ambient.dist(x, g.k_mask.members()[p]))
                    .fold(0.0, f64::max);
                assert_eq!(g.space.dist(ci, cj), sup + eps / 2.0);
            }
        }
    }

    #[test]
    fn uncertified_dk_is_refused() {
        let eps = 0.05;
        let (ambient, k) = line_instance(eps);
        let reference = restrict(&ambient, &k).unwrap();
        let partition = partition_by_diameter(&reference, eps).unwrap();
        let seed = build_cantor_model::<f64>(3).unwrap();
        let mut dk = build_dk(&reference, &partition, seed.space(), eps).unwrap();
        // Corrupt a cross entry so certification fails.
        let n = dk.space.len();
        let owner = dk.partition.block_of();
        let mut dist = dk.space.dist_slice().to_vec();
        'outer: for x in 0..n {
            for y in 0..n {
                if owner[x] != owner[y] {
                    dist[x * n + y] += 1e-5;
                    dist[y * n + x] += 1e-5;
                    break 'outer;
                }
            }
        }
        dk.space = FiniteMetricSpace::new(dk.space.labels().to_vec(), dist, 0).unwrap();
        assert!(matches!(
            build_dc(&ambient, &k, &dk, eps),
            Err(Error::NotCertified { .. })
        ));
    }
}
