//! Extension stage: cover of the complement by small balls, partition of
//! unity, linear extension of based Lipschitz functions through anchors, the
//! dual-ball pseudometric computed with the free-norm engine, the vanishing
//! quotient pseudometric, and their sum — a metric extending the subset
//! metric whose distance to the ambient metric is certified.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free::{free_space_norm, SignedMeasure};
use crate::metric::{
    restrict, rho_distance, validate_metric, FiniteMetricSpace, LipschitzFunction, SquareMatrix,
    SubsetMask,
};
use crate::report::{CertificateEntry, CertificateReport};
use crate::scalar::Scalar;

/// Upper bound for the admissible closeness parameter: strictly below 1/13.
pub fn eps_upper_bound<S: Scalar>() -> S {
    S::one() / S::of(13.0)
}

/// Cover-and-weights system over the complement of a subset.
///
/// Every point outside the subset is a ball center with radius a third of its
/// distance to the subset; anchors are exact nearest subset points; the
/// weight of ball `i` at `x` is the distance from `x` to the ball's
/// complement, normalized to sum to one over all balls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct DugundjiSystem<S> {
    pub ambient: FiniteMetricSpace<S>,
    pub subset: SubsetMask,
    /// Ambient indices of the ball centers: every point outside the subset.
    pub centers: Vec<usize>,
    pub radii: Vec<S>,
    /// Nearest subset point of each center (lowest index on ties).
    pub anchors: Vec<usize>,
    /// Row-major `|centers| x |centers|` weight matrix: row `r` holds the
    /// weights of all balls at the point `centers[r]`.
    weights: Vec<S>,
    pub eps: S,
}

impl<S: Scalar> DugundjiSystem<S> {
    /// No points to extend over (subset equals the whole space).
    pub fn is_degenerate(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn center_position(&self, ambient_index: usize) -> Option<usize> {
        self.centers.binary_search(&ambient_index).ok()
    }

    /// Weights of all balls at the non-subset point `centers[row]`.
    pub fn weight_row(&self, row: usize) -> &[S] {
        let k = self.centers.len();
        &self.weights[row * k..(row + 1) * k]
    }
}

/// Build the system; refuses when some point is farther than `eps` from the
/// subset or `eps` lies outside `(0, 1/13)`.
pub fn build_dugundji_system<S: Scalar>(
    ambient: &FiniteMetricSpace<S>,
    subset: &SubsetMask,
    eps: S,
) -> Result<DugundjiSystem<S>> {
    if subset.parent_len() != ambient.len() {
        return Err(Error::PointSetMismatch {
            detail: "mask belongs to another space".to_string(),
        });
    }
    if !eps.is_finite() || eps <= S::zero() || eps >= eps_upper_bound() {
        return Err(Error::EpsOutOfRange {
            requirement: "eps in (0, 1/13)".to_string(),
            value: eps.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = ambient.len();
    for x in 0..n {
        let d = crate::metric::point_to_set_distance(ambient, x, subset)?;
        if d > eps {
            return Err(Error::HypothesisViolated {
                requirement: format!("d(x, subset) <= eps = {eps}"),
                witness: format!("point {x} at distance {d}"),
            });
        }
    }

    let centers: Vec<usize> = (0..n).filter(|x| !subset.contains(*x)).collect();
    let k = centers.len();
    let three = S::of(3.0);
    let mut radii = Vec::with_capacity(k);
    let mut anchors = Vec::with_capacity(k);
    for &c in &centers {
        let mut best = S::infinity();
        let mut anchor = 0;
        for &a in subset.members() {
            let d = ambient.dist(c, a);
            if d < best {
                best = d;
                anchor = a;
            }
        }
        radii.push(best / three);
        anchors.push(anchor);
    }

    // d(x, complement of ball i), computed literally as the minimum distance
    // from x to the points outside the ball; zero whenever x itself is
    // outside.
    let mut weights = vec![S::zero(); k * k];
    for (row, &x) in centers.iter().enumerate() {
        let mut denom = S::zero();
        for (i, &center) in centers.iter().enumerate() {
            let r = radii[i];
            let inside = ambient.dist(x, center) < r;
            let dcomp = if inside {
                let mut best = S::infinity();
                for y in 0..n {
                    if ambient.dist(center, y) >= r {
                        best = best.min(ambient.dist(x, y));
                    }
                }
                debug_assert!(best.is_finite(), "subset points lie outside every ball");
                best
            } else {
                S::zero()
            };
            weights[row * k + i] = dcomp;
            denom = denom + dcomp;
        }
        if denom <= S::zero() {
            return Err(Error::ConstructionInvalid {
                detail: format!("point {x} is covered by no ball"),
            });
        }
        for i in 0..k {
            weights[row * k + i] = weights[row * k + i] / denom;
        }
    }

    Ok(DugundjiSystem {
        ambient: ambient.clone(),
        subset: subset.clone(),
        centers,
        radii,
        anchors,
        weights,
        eps,
    })
}

/// Linear extension: values copy on the subset, anchor averages outside.
/// The input is indexed by the subset's restriction order; the output lives
/// on the ambient space (Lipschitz constant cached against the ambient
/// metric).
pub fn extend_function<S: Scalar>(
    sys: &DugundjiSystem<S>,
    f: &LipschitzFunction<S>,
) -> Result<LipschitzFunction<S>> {
    let a_len = sys.subset.len();
    if f.values().len() != a_len {
        return Err(Error::SizeMismatch {
            left: f.values().len(),
            right: a_len,
        });
    }
    let base_in_subset = sys.subset.position_of(sys.ambient.base_point());
    if let Some(pos) = base_in_subset {
        if f.value(pos) != S::zero() {
            return Err(Error::Degenerate(
                "function must vanish at the base point".to_string(),
            ));
        }
    }
    let n = sys.ambient.len();
    let k = sys.centers.len();
    let mut values = vec![S::zero(); n];
    for x in 0..n {
        if let Some(pos) = sys.subset.position_of(x) {
            values[x] = f.value(pos);
        } else {
            let row = sys.center_position(x).expect("non-subset point is a center");
            let w = sys.weight_row(row);
            let mut acc = S::zero();
            for i in 0..k {
                if w[i] > S::zero() {
                    let anchor_pos = sys
                        .subset
                        .position_of(sys.anchors[i])
                        .expect("anchor lies in the subset");
                    acc = acc + w[i] * f.value(anchor_pos);
                }
            }
            values[x] = acc;
        }
    }
    LipschitzFunction::based(&sys.ambient, values)
}

/// The probability vector a point pairs with under extension: a point mass
/// inside the subset, the anchor mixture outside. Indexed over the subset
/// space; only differences of two such vectors are zero-sum measures.
fn point_weight_vector<S: Scalar>(sys: &DugundjiSystem<S>, subset_len: usize, x: usize) -> Vec<S> {
    let mut weights = vec![S::zero(); subset_len];
    if let Some(pos) = sys.subset.position_of(x) {
        weights[pos] = S::one();
    } else {
        let row = sys.center_position(x).expect("non-subset point is a center");
        let w = sys.weight_row(row);
        for (i, &wi) in w.iter().enumerate() {
            if wi > S::zero() {
                let anchor_pos = sys
                    .subset
                    .position_of(sys.anchors[i])
                    .expect("anchor in subset");
                weights[anchor_pos] = weights[anchor_pos] + wi;
            }
        }
    }
    weights
}

/// The dual-ball pseudometric: the free norm (over the subset metric) of the
/// difference of the two points' measures. Restricted to the subset it
/// reproduces `d_A` bit-exactly.
pub fn hat_metric<S: Scalar>(
    sys: &DugundjiSystem<S>,
    d_a: &FiniteMetricSpace<S>,
) -> Result<SquareMatrix<S>> {
    check_subset_metric(sys, d_a)?;
    let n = sys.ambient.len();
    let a_len = d_a.len();
    let mut hat = SquareMatrix::zero(n);
    let vectors: Vec<Vec<S>> = (0..n)
        .map(|x| point_weight_vector(sys, a_len, x))
        .collect();
    for x in 0..n {
        for y in (x + 1)..n {
            let diff: Vec<S> = vectors[x]
                .iter()
                .zip(&vectors[y])
                .map(|(&a, &b)| a - b)
                .collect();
            let mu = SignedMeasure::new(d_a, diff)?;
            let (norm, _) = free_space_norm(d_a, &mu)?;
            hat.set_sym(x, y, norm);
        }
    }
    Ok(hat)
}

/// `min(d(x, y), d(x, A) + d(y, A))`: the largest separation achievable by a
/// Lipschitz-1 function vanishing on the subset.
pub fn quotient_pseudometric<S: Scalar>(
    ambient: &FiniteMetricSpace<S>,
    subset: &SubsetMask,
) -> Result<SquareMatrix<S>> {
    if subset.parent_len() != ambient.len() {
        return Err(Error::PointSetMismatch {
            detail: "mask belongs to another space".to_string(),
        });
    }
    let n = ambient.len();
    let to_subset: Vec<S> = (0..n)
        .map(|x| crate::metric::point_to_set_distance(ambient, x, subset).expect("checked"))
        .collect();
    let mut q = SquareMatrix::zero(n);
    for x in 0..n {
        for y in (x + 1)..n {
            let v = ambient.dist(x, y).min(to_subset[x] + to_subset[y]);
            q.set_sym(x, y, v);
        }
    }
    Ok(q)
}

/// The extension bundle: both pseudometrics, their sum as a metric space,
/// and the certificates that were re-measured after construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ExtensionResult<S> {
    pub hat: SquareMatrix<S>,
    pub quotient: SquareMatrix<S>,
    pub extended: FiniteMetricSpace<S>,
    pub certificates: CertificateReport<S>,
}

fn check_subset_metric<S: Scalar>(
    sys: &DugundjiSystem<S>,
    d_a: &FiniteMetricSpace<S>,
) -> Result<()> {
    let restricted = restrict(&sys.ambient, &sys.subset)?;
    if d_a.labels() != restricted.labels() {
        return Err(Error::PointSetMismatch {
            detail: "subset metric points differ from the restriction".to_string(),
        });
    }
    let rho = rho_distance(d_a, &restricted)?.value();
    if rho > sys.eps + S::tol_metric() {
        return Err(Error::HypothesisViolated {
            requirement: format!("rho(d_A, d|A^2) <= eps = {}", sys.eps),
            witness: format!("rho = {rho}"),
        });
    }
    Ok(())
}

/// Build the extended metric `hat + quotient` and certify: exact restriction,
/// metric axioms, closeness to the ambient metric, and the interior bounds on
/// both summands. A failed certificate aborts with its witness.
pub fn build_extended_metric<S: Scalar>(
    sys: &DugundjiSystem<S>,
    d_a: &FiniteMetricSpace<S>,
) -> Result<ExtensionResult<S>> {
    let hat = hat_metric(sys, d_a)?;
    let quotient = quotient_pseudometric(&sys.ambient, &sys.subset)?;
    let extended = hat.add_into_space(
        &quotient,
        sys.ambient.labels().to_vec(),
        sys.ambient.base_point(),
    )?;

    let eps = sys.eps;
    let tol = S::tol_metric();
    let mut entries = Vec::new();

    // (a) the extension restricts to d_A bit-exactly
    let mut restriction_dev = S::zero();
    for (pa, &x) in sys.subset.members().iter().enumerate() {
        for (pb, &y) in sys.subset.members().iter().enumerate() {
            let dev = (extended.dist(x, y) - d_a.dist(pa, pb)).abs();
            if dev > restriction_dev {
                restriction_dev = dev;
            }
        }
    }
    entries.push(CertificateEntry::exact_zero(
        "extension.restriction_exact",
        "extended metric restricted to A^2 equals d_A bit-exactly",
        restriction_dev,
    ));

    // (b) metric axioms, including strict positivity off the diagonal
    let report = validate_metric(&extended);
    let axiom_failures = report.triangle_violations.len()
        + usize::from(!report.symmetry_ok)
        + usize::from(!report.diagonal_ok)
        + usize::from(!report.positivity_ok);
    entries.push(
        CertificateEntry::exact_zero(
            "extension.metric_axioms",
            "extended metric passes the exhaustive axiom scan",
            S::from_usize(axiom_failures).unwrap_or_else(S::one),
        )
        .with_detail(report.summary()),
    );

    // (c) rho(extended, d) <= 13 eps
    let rho = rho_distance(&extended, &sys.ambient)?.value();
    entries.push(CertificateEntry::at_most(
        "extension.rho_ambient",
        "rho(extended, d) <= 13 eps",
        rho,
        S::of(13.0) * eps,
        tol,
    ));

    // (d) |hat - d| <= 11 eps pairwise
    let n = sys.ambient.len();
    let mut hat_dev = S::zero();
    let mut hat_pair = (0, 0);
    for x in 0..n {
        for y in 0..n {
            let dev = (hat.get(x, y) - sys.ambient.dist(x, y)).abs();
            if dev > hat_dev {
                hat_dev = dev;
                hat_pair = (x, y);
            }
        }
    }
    entries.push(
        CertificateEntry::at_most(
            "extension.hat_deviation",
            "|hat - d| <= 11 eps pairwise",
            hat_dev,
            S::of(11.0) * eps,
            tol,
        )
        .with_detail(format!("worst pair ({}, {})", hat_pair.0, hat_pair.1)),
    );

    // (e) sup of the quotient pseudometric <= 2 eps
    entries.push(CertificateEntry::at_most(
        "extension.quotient_sup",
        "sup quotient <= 2 eps",
        quotient.max_abs(),
        S::of(2.0) * eps,
        tol,
    ));

    let certificates = CertificateReport::from_entries(entries);
    if !certificates.verdict {
        let failure = certificates.first_failure().expect("failed verdict");
        return Err(Error::CertificateFailed {
            check: failure.check.clone(),
            detail: failure
                .detail
                .clone()
                .unwrap_or_else(|| format!("measured {} vs bound {}", failure.measured, failure.bound)),
        });
    }

    Ok(ExtensionResult {
        hat,
        quotient,
        extended,
        certificates,
    })
}

/// Cover-level invariants re-measured as certificate entries: weight rows sum
/// to one, weights stay in `[0, 1]` and vanish exactly off their ball, and
/// anchors obey the proximity chain.
pub fn certify_cover<S: Scalar>(sys: &DugundjiSystem<S>) -> CertificateReport<S> {
    let tol = S::tol_metric();
    let mut entries = Vec::new();
    if sys.is_degenerate() {
        entries.push(CertificateEntry::vacuous(
            "cover.partition_of_unity",
            "weights at every outside point sum to 1",
            "subset equals the whole space",
        ));
        entries.push(CertificateEntry::vacuous(
            "cover.weight_support",
            "weight positive exactly inside the ball",
            "subset equals the whole space",
        ));
        entries.push(CertificateEntry::vacuous(
            "cover.anchor_proximity",
            "d(x, anchor_i) <= 4/3 eps whenever x lies in ball i",
            "subset equals the whole space",
        ));
        return CertificateReport::from_entries(entries);
    }

    let k = sys.centers.len();
    let mut sum_dev = S::zero();
    let mut range_breach = S::zero();
    let mut support_mismatches = 0usize;
    let mut anchor_worst = S::zero();
    for (row, &x) in sys.centers.iter().enumerate() {
        let w = sys.weight_row(row);
        let total: S = w.iter().copied().sum();
        sum_dev = sum_dev.max((total - S::one()).abs());
        for i in 0..k {
            let inside = sys.ambient.dist(x, sys.centers[i]) < sys.radii[i];
            if (w[i] > S::zero()) != inside {
                support_mismatches += 1;
            }
            if w[i] < S::zero() {
                range_breach = range_breach.max(-w[i]);
            }
            if w[i] > S::one() {
                range_breach = range_breach.max(w[i] - S::one());
            }
            if inside {
                anchor_worst = anchor_worst.max(sys.ambient.dist(x, sys.anchors[i]));
            }
        }
    }
    entries.push(CertificateEntry::at_most(
        "cover.partition_of_unity",
        "weights at every outside point sum to 1",
        sum_dev,
        S::zero(),
        tol,
    ));
    entries.push(
        CertificateEntry::exact_zero(
            "cover.weight_support",
            "weight positive exactly inside the ball, all weights in [0, 1]",
            S::from_usize(support_mismatches).unwrap_or_else(S::one) + range_breach,
        )
        .with_detail(format!("{support_mismatches} support mismatches")),
    );
    entries.push(CertificateEntry::at_most(
        "cover.anchor_proximity",
        "d(x, anchor_i) <= 4/3 eps whenever x lies in ball i",
        anchor_worst,
        S::of(4.0 / 3.0) * sys.eps,
        tol,
    ));
    CertificateReport::from_entries(entries)
}

/// Deterministic vertex of the based Lipschitz unit ball: visit points in a
/// random order and pin each value to a random endpoint of its feasible
/// interval. Every output has `n - 1` tight constraints, i.e. is a polytope
/// vertex.
pub fn sample_lipschitz_vertex<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    rng: &mut impl Rng,
) -> LipschitzFunction<S> {
    let n = space.len();
    let base = space.base_point();
    let mut order: Vec<usize> = (0..n).filter(|&i| i != base).collect();
    // Fisher-Yates with the caller's generator.
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut values = vec![S::zero(); n];
    let mut assigned = vec![false; n];
    assigned[base] = true;
    for &p in &order {
        let mut lo = S::neg_infinity();
        let mut hi = S::infinity();
        for q in 0..n {
            if assigned[q] {
                let d = space.dist(p, q);
                lo = lo.max(values[q] - d);
                hi = hi.min(values[q] + d);
            }
        }
        values[p] = if rng.gen_bool(0.5) { hi } else { lo };
        assigned[p] = true;
    }
    LipschitzFunction::based(space, values).expect("vertex construction is based")
}

/// Sampled operator norm of the extension: the max over a family of unit-ball
/// functions of the Lipschitz constant of the extension (in the extended
/// metric) over the Lipschitz constant of the input (in the subset metric).
///
/// The family is every single-source distance function on the subset plus
/// `samples` random polytope vertices; identically zero inputs are skipped.
pub fn extension_operator_norm<S: Scalar>(
    result: &ExtensionResult<S>,
    sys: &DugundjiSystem<S>,
    d_a: &FiniteMetricSpace<S>,
    samples: usize,
    seed: u64,
) -> Result<S> {
    check_subset_metric(sys, d_a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut family: Vec<LipschitzFunction<S>> = Vec::with_capacity(d_a.len() + samples);
    for a in 0..d_a.len() {
        family.push(LipschitzFunction::single_source(d_a, a)?);
    }
    for _ in 0..samples {
        family.push(sample_lipschitz_vertex(d_a, &mut rng));
    }

    let mut worst = S::zero();
    for g in &family {
        let lip_in = g.lip();
        if lip_in <= S::zero() {
            continue; // 0/0 guard: the zero function carries no ratio
        }
        let extended_fn = extend_function(sys, g)?;
        let lip_out = extended_fn.lip_on(&result.extended)?;
        let ratio = lip_out / lip_in;
        if ratio > worst {
            worst = ratio;
        }
    }
    Ok(worst)
}
