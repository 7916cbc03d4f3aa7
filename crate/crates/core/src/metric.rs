//! Finite metric spaces: representation, axiom validation, set distances,
//! restriction, proportionality, and the capped sup-distance between two
//! metrics on the same point set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite metric space: labeled points plus an `n x n` distance matrix.
///
/// Construction only checks structure (square, finite, non-empty); whether
/// the matrix actually satisfies the metric axioms is the job of
/// [`validate_metric`], so invalid matrices can be represented, inspected,
/// and reported on. Deserialization funnels through the same constructor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", try_from = "SpaceWire<S>")]
pub struct FiniteMetricSpace<S> {
    points: Vec<String>,
    /// Row-major `n x n` distances.
    dist: Vec<S>,
    base_point: usize,
}

#[derive(Deserialize)]
#[serde(bound = "S: Scalar")]
struct SpaceWire<S> {
    points: Vec<String>,
    dist: Vec<S>,
    #[serde(default)]
    base_point: usize,
}

impl<S: Scalar> TryFrom<SpaceWire<S>> for FiniteMetricSpace<S> {
    type Error = Error;

    fn try_from(wire: SpaceWire<S>) -> Result<Self> {
        FiniteMetricSpace::new(wire.points, wire.dist, wire.base_point)
    }
}

impl<S: Scalar> FiniteMetricSpace<S> {
    pub fn new(points: Vec<String>, dist: Vec<S>, base_point: usize) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if dist.len() != n * n {
            return Err(Error::NonSquare {
                n,
                rows: dist.len() / n.max(1),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if !dist[i * n + j].is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
            }
        }
        if base_point >= n {
            return Err(Error::IndexOutOfRange {
                index: base_point,
                n,
            });
        }
        Ok(FiniteMetricSpace {
            points,
            dist,
            base_point,
        })
    }

    pub fn from_rows(points: Vec<String>, rows: Vec<Vec<S>>) -> Result<Self> {
        let n = points.len();
        if rows.len() != n {
            return Err(Error::NonSquare { n, rows: rows.len() });
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::NonSquare { n, rows: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::new(points, flat, 0)
    }

    /// Points on a line with the absolute-value metric.
    pub fn from_line_coords(points: Vec<String>, coords: &[S]) -> Result<Self> {
        let n = points.len();
        if coords.len() != n {
            return Err(Error::SizeMismatch {
                left: n,
                right: coords.len(),
            });
        }
        let mut dist = vec![S::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (coords[i] - coords[j]).abs();
            }
        }
        Self::new(points, dist, 0)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // one point minimum, enforced at construction
    }

    pub fn label(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.points
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> S {
        self.dist[i * self.points.len() + j]
    }

    pub fn dist_slice(&self) -> &[S] {
        &self.dist
    }

    pub fn base_point(&self) -> usize {
        self.base_point
    }

    pub fn with_base_point(mut self, base: usize) -> Result<Self> {
        if base >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: base,
                n: self.len(),
            });
        }
        self.base_point = base;
        Ok(self)
    }

    /// Largest entry of the matrix (diameter when the matrix is a metric).
    pub fn max_dist(&self) -> S {
        self.dist
            .iter()
            .copied()
            .fold(S::zero(), |acc, v| acc.max(v))
    }
}

/// Index labels "0", "1", ... used when a format carries no labels.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// A plain square matrix of pairwise values (used for pseudometrics, which
/// may vanish off the diagonal and so do not qualify as metric spaces).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> SquareMatrix<S> {
    pub fn zero(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.n + j] = v;
    }

    /// Set both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: S) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn max_abs(&self) -> S {
        self.data
            .iter()
            .fold(S::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Entrywise sum, promoted to a metric space with the given labels.
    pub fn add_into_space(
        &self,
        other: &SquareMatrix<S>,
        points: Vec<String>,
        base_point: usize,
    ) -> Result<FiniteMetricSpace<S>> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let data: Vec<S> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        FiniteMetricSpace::new(points, data, base_point)
    }
}

/// A non-empty subset of a space's points, kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MaskWire")]
pub struct SubsetMask {
    parent_len: usize,
    members: Vec<usize>,
}

#[derive(Deserialize)]
struct MaskWire {
    parent_len: usize,
    members: Vec<usize>,
}

impl TryFrom<MaskWire> for SubsetMask {
    type Error = Error;

    fn try_from(wire: MaskWire) -> Result<Self> {
        let mut members = wire.members;
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::EmptyMask);
        }
        if let Some(&bad) = members.iter().find(|&&i| i >= wire.parent_len) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n: wire.parent_len,
            });
        }
        Ok(SubsetMask {
            parent_len: wire.parent_len,
            members,
        })
    }
}

impl SubsetMask {
    pub fn new<S: Scalar>(
        space: &FiniteMetricSpace<S>,
        members: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::EmptyMask);
        }
        let n = space.len();
        if let Some(&bad) = members.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(SubsetMask {
            parent_len: n,
            members,
        })
    }

    pub fn full<S: Scalar>(space: &FiniteMetricSpace<S>) -> Self {
        SubsetMask {
            parent_len: space.len(),
            members: (0..space.len()).collect(),
        }
    }

    pub fn singleton<S: Scalar>(space: &FiniteMetricSpace<S>, index: usize) -> Result<Self> {
        Self::new(space, [index])
    }

    pub fn parent_len(&self) -> usize {
        self.parent_len
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // non-empty by construction
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.parent_len
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    /// Position of an ambient index inside the sorted member list, i.e. the
    /// index the point gets after [`restrict`].
    pub fn position_of(&self, index: usize) -> Option<usize> {
        self.members.binary_search(&index).ok()
    }

    /// Complement within the parent space; errors when the mask is full.
    pub fn complement<S: Scalar>(&self, space: &FiniteMetricSpace<S>) -> Result<SubsetMask> {
        let members: Vec<usize> = (0..space.len()).filter(|i| !self.contains(*i)).collect();
        if members.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(SubsetMask {
            parent_len: space.len(),
            members,
        })
    }

    fn check_parent<S: Scalar>(&self, space: &FiniteMetricSpace<S>) -> Result<()> {
        if self.parent_len != space.len() {
            return Err(Error::PointSetMismatch {
                detail: format!(
                    "mask built over {} points, space has {}",
                    self.parent_len,
                    space.len()
                ),
            });
        }
        Ok(())
    }
}

/// A single triangle-inequality failure: `d(from, to) > d(from, via) + d(via, to)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleViolation<S> {
    pub from: usize,
    pub to: usize,
    pub via: usize,
    pub excess: S,
}

/// Outcome of the exhaustive axiom scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport<S> {
    pub symmetry_ok: bool,
    pub diagonal_ok: bool,
    pub positivity_ok: bool,
    pub triangle_violations: Vec<TriangleViolation<S>>,
}

impl<S: Scalar> ValidationReport<S> {
    pub fn is_metric(&self) -> bool {
        self.symmetry_ok
            && self.diagonal_ok
            && self.positivity_ok
            && self.triangle_violations.is_empty()
    }

    /// Largest triangle excess, zero when none.
    pub fn worst_excess(&self) -> S {
        self.triangle_violations
            .iter()
            .fold(S::zero(), |acc, v| acc.max(v.excess))
    }

    pub fn summary(&self) -> String {
        if self.is_metric() {
            "valid metric".to_string()
        } else {
            format!(
                "symmetry={} diagonal={} positivity={} triangle_violations={}",
                self.symmetry_ok,
                self.diagonal_ok,
                self.positivity_ok,
                self.triangle_violations.len()
            )
        }
    }
}

/// Exhaustive metric-axiom scan: symmetry, zero diagonal, off-diagonal
/// positivity, and the full `O(n^3)` triangle check with tolerance
/// [`Scalar::tol_metric`].
pub fn validate_metric<S: Scalar>(m: &FiniteMetricSpace<S>) -> ValidationReport<S> {
    let n = m.len();
    let tol = S::tol_metric();

    let mut symmetry_ok = true;
    let mut diagonal_ok = true;
    let mut positivity_ok = true;
    for i in 0..n {
        if m.dist(i, i).abs() > tol {
            diagonal_ok = false;
        }
        for j in 0..n {
            if i != j {
                if (m.dist(i, j) - m.dist(j, i)).abs() > tol {
                    symmetry_ok = false;
                }
                if m.dist(i, j) <= S::zero() {
                    positivity_ok = false;
                }
            }
        }
    }

    let mut triangle_violations = Vec::new();
    for from in 0..n {
        for to in 0..n {
            if to == from {
                continue;
            }
            let direct = m.dist(from, to);
            for via in 0..n {
                if via == from || via == to {
                    continue;
                }
                let detour = m.dist(from, via) + m.dist(via, to);
                if direct > detour + tol {
                    triangle_violations.push(TriangleViolation {
                        from,
                        to,
                        via,
                        excess: direct - detour,
                    });
                }
            }
        }
    }

    ValidationReport {
        symmetry_ok,
        diagonal_ok,
        positivity_ok,
        triangle_violations,
    }
}

/// Capped sup-distance between two metrics on the same point set, in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDistanceValue<S>(S);

impl<S: Scalar> MetricDistanceValue<S> {
    pub fn value(&self) -> S {
        self.0
    }
}

/// `sup over pairs of min(1, |d1(x,y) - d2(x,y)|)`.
///
/// Requires identical point sets in identical order.
pub fn rho_distance<S: Scalar>(
    m1: &FiniteMetricSpace<S>,
    m2: &FiniteMetricSpace<S>,
) -> Result<MetricDistanceValue<S>> {
    if m1.labels() != m2.labels() {
        return Err(Error::PointSetMismatch {
            detail: "labels differ".to_string(),
        });
    }
    let n = m1.len();
    let one = S::one();
    let mut sup = S::zero();
    for i in 0..n {
        for j in 0..n {
            let gap = (m1.dist(i, j) - m2.dist(i, j)).abs().min(one);
            if gap > sup {
                sup = gap;
            }
        }
    }
    Ok(MetricDistanceValue(sup))
}

/// `min over x in A, y in B of d(x, y)`.
pub fn set_distance<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    a: &SubsetMask,
    b: &SubsetMask,
) -> Result<S> {
    a.check_parent(m)?;
    b.check_parent(m)?;
    let mut best = S::infinity();
    for &x in a.members() {
        for &y in b.members() {
            let d = m.dist(x, y);
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// `max over x in A, y in B of d(x, y)`.
pub fn sup_distance<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    a: &SubsetMask,
    b: &SubsetMask,
) -> Result<S> {
    a.check_parent(m)?;
    b.check_parent(m)?;
    let mut worst = S::zero();
    for &x in a.members() {
        for &y in b.members() {
            let d = m.dist(x, y);
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// `sup_distance(m, A, A)`.
pub fn diameter<S: Scalar>(m: &FiniteMetricSpace<S>, a: &SubsetMask) -> Result<S> {
    sup_distance(m, a, a)
}

/// Distance from a single point to a subset.
pub fn point_to_set_distance<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    x: usize,
    a: &SubsetMask,
) -> Result<S> {
    a.check_parent(m)?;
    if x >= m.len() {
        return Err(Error::IndexOutOfRange {
            index: x,
            n: m.len(),
        });
    }
    let mut best = S::infinity();
    for &y in a.members() {
        let d = m.dist(x, y);
        if d < best {
            best = d;
        }
    }
    Ok(best)
}

/// Sup-distance from a single point to a subset.
pub fn point_to_set_sup<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    x: usize,
    a: &SubsetMask,
) -> Result<S> {
    a.check_parent(m)?;
    let mut worst = S::zero();
    for &y in a.members() {
        let d = m.dist(x, y);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Restriction to a subset: the `A x A` submatrix with bit-identical entries.
///
/// The base point follows the parent when it lies in `A`; otherwise the
/// lowest member becomes the base.
pub fn restrict<S: Scalar>(m: &FiniteMetricSpace<S>, a: &SubsetMask) -> Result<FiniteMetricSpace<S>> {
    a.check_parent(m)?;
    let members = a.members();
    let k = members.len();
    let mut points = Vec::with_capacity(k);
    let mut dist = Vec::with_capacity(k * k);
    for &i in members {
        points.push(m.label(i).to_string());
    }
    for &i in members {
        for &j in members {
            dist.push(m.dist(i, j));
        }
    }
    let base = a.position_of(m.base_point()).unwrap_or(0);
    FiniteMetricSpace::new(points, dist, base)
}

/// Outcome of a proportionality check between two equal-size spaces matched
/// by point order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Proportionality<S> {
    /// `dA = scale * dB` entrywise within tolerance.
    Proportional { scale: S },
    /// Best scale tried, plus the worst-deviating pair.
    Mismatch {
        scale: S,
        from: usize,
        to: usize,
        deviation: S,
    },
}

impl<S: Scalar> Proportionality<S> {
    pub fn scale(&self) -> S {
        match self {
            Proportionality::Proportional { scale } => *scale,
            Proportionality::Mismatch { scale, .. } => *scale,
        }
    }

    pub fn is_proportional(&self) -> bool {
        matches!(self, Proportionality::Proportional { .. })
    }
}

/// Check whether `dA = c * dB` entrywise (points matched by position),
/// returning the scale or the worst-deviating pair.
///
/// The candidate scale is the median of entrywise ratios, so a single
/// perturbed entry is reported rather than skewing the fit.
pub fn check_proportional<S: Scalar>(
    ma: &FiniteMetricSpace<S>,
    mb: &FiniteMetricSpace<S>,
) -> Result<Proportionality<S>> {
    let n = ma.len();
    if n != mb.len() {
        return Err(Error::SizeMismatch {
            left: n,
            right: mb.len(),
        });
    }
    if n == 1 {
        return Ok(Proportionality::Proportional { scale: S::one() });
    }

    let mut ratios = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if mb.dist(i, j) > S::zero() {
                ratios.push(ma.dist(i, j) / mb.dist(i, j));
            }
        }
    }
    let scale = if ratios.is_empty() {
        S::one()
    } else {
        ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
        ratios[ratios.len() / 2]
    };

    let mut worst = S::zero();
    let mut worst_pair = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dev = (ma.dist(i, j) - scale * mb.dist(i, j)).abs();
            if dev > worst {
                worst = dev;
                worst_pair = (i, j);
            }
        }
    }
    if worst <= S::tol_metric() {
        Ok(Proportionality::Proportional { scale })
    } else {
        Ok(Proportionality::Mismatch {
            scale,
            from: worst_pair.0,
            to: worst_pair.1,
            deviation: worst,
        })
    }
}

/// A real-valued function on a space's points with a cached Lipschitz
/// constant; the value at the base point is pinned to exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFunction<S> {
    values: Vec<S>,
    base: usize,
    lip: S,
}

impl<S: Scalar> LipschitzFunction<S> {
    /// Build from raw values, shifting so the base-point value is exactly 0,
    /// and cache the Lipschitz constant with respect to `space`.
    pub fn based(space: &FiniteMetricSpace<S>, mut values: Vec<S>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::SizeMismatch {
                left: values.len(),
                right: space.len(),
            });
        }
        let base = space.base_point();
        let shift = values[base];
        for v in values.iter_mut() {
            *v = *v - shift;
        }
        values[base] = S::zero();
        let lip = lipschitz_constant(space, &values);
        Ok(LipschitzFunction { values, base, lip })
    }

    /// The distance function `d(., a) - d(x0, a)`, a canonical norm-one
    /// element of the based Lipschitz ball (when the space has >= 2 points).
    pub fn single_source(space: &FiniteMetricSpace<S>, a: usize) -> Result<Self> {
        if a >= space.len() {
            return Err(Error::IndexOutOfRange {
                index: a,
                n: space.len(),
            });
        }
        let values: Vec<S> = (0..space.len()).map(|i| space.dist(i, a)).collect();
        Self::based(space, values)
    }

    pub fn value(&self, i: usize) -> S {
        self.values[i]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// The cached constant (with respect to the space passed at construction).
    pub fn lip(&self) -> S {
        self.lip
    }

    /// Recompute the Lipschitz constant against another metric on the same
    /// point set.
    pub fn lip_on(&self, space: &FiniteMetricSpace<S>) -> Result<S> {
        if space.len() != self.values.len() {
            return Err(Error::SizeMismatch {
                left: space.len(),
                right: self.values.len(),
            });
        }
        Ok(lipschitz_constant(space, &self.values))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == S::zero())
    }
}

/// Max difference quotient over all pairs; zero distances are skipped (they
/// cannot constrain a function that is constant on such pairs anyway, and the
/// caller's validation catches genuine metric defects).
pub fn lipschitz_constant<S: Scalar>(space: &FiniteMetricSpace<S>, values: &[S]) -> S {
    let n = space.len();
    let mut lip = S::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.dist(i, j);
            if d > S::zero() {
                let q = (values[i] - values[j]).abs() / d;
                if q > lip {
                    lip = q;
                }
            }
        }
    }
    lip
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(rows: Vec<Vec<f64>>) -> FiniteMetricSpace<f64> {
        let labels = default_labels(rows.len());
        FiniteMetricSpace::from_rows(labels, rows).unwrap()
    }

    #[test]
    fn two_point_space_is_valid() {
        let m = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let report = validate_metric(&m);
        assert!(report.is_metric());
        assert!(report.triangle_violations.is_empty());
    }

    #[test]
    fn triangle_violation_is_located() {
        // d(a,b) = d(b,c) = 1, d(a,c) = 3: triple (a, c, via b) exceeds by 1.
        let m = space(vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ]);
        let report = validate_metric(&m);
        assert!(!report.is_metric());
        let v = report
            .triangle_violations
            .iter()
            .find(|v| v.from == 0 && v.to == 2 && v.via == 1)
            .expect("violation (a, c, b)");
        assert!((v.excess - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_point_space_is_structural_error() {
        assert!(matches!(
            FiniteMetricSpace::<f64>::new(vec![], vec![], 0),
            Err(Error::EmptySpace)
        ));
    }

    #[test]
    fn non_finite_entry_is_structural_error() {
        let r = FiniteMetricSpace::new(
            default_labels(2),
            vec![0.0, f64::NAN, f64::NAN, 0.0],
            0,
        );
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn rho_identical_metrics_is_zero() {
        let m = space(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert_eq!(rho_distance(&m, &m).unwrap().value(), 0.0);
    }

    #[test]
    fn rho_caps_at_one() {
        let m1 = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let m2 = space(vec![vec![0.0, 6.0], vec![6.0, 0.0]]);
        assert_eq!(rho_distance(&m1, &m2).unwrap().value(), 1.0);
    }

    #[test]
    fn rho_equals_sup_below_cap() {
        let m1 = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let m2 = space(vec![vec![0.0, 1.3], vec![1.3, 0.0]]);
        assert!((rho_distance(&m1, &m2).unwrap().value() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rho_rejects_mismatched_point_sets() {
        let m1 = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let m2 = FiniteMetricSpace::from_rows(
            vec!["x".into(), "y".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        assert!(rho_distance(&m1, &m2).is_err());
    }

    #[test]
    fn set_distances_and_diameter() {
        // d(a,b) = 1, d(a,c) = 4, d(b,c) = 3.5
        let m = space(vec![
            vec![0.0, 1.0, 4.0],
            vec![1.0, 0.0, 3.5],
            vec![4.0, 3.5, 0.0],
        ]);
        let a = SubsetMask::new(&m, [0]).unwrap();
        let bc = SubsetMask::new(&m, [1, 2]).unwrap();
        assert_eq!(set_distance(&m, &a, &bc).unwrap(), 1.0);
        assert_eq!(sup_distance(&m, &a, &bc).unwrap(), 4.0);
        assert_eq!(diameter(&m, &a).unwrap(), 0.0);
        let overlap = SubsetMask::new(&m, [0, 1]).unwrap();
        assert_eq!(set_distance(&m, &overlap, &a).unwrap(), 0.0);
    }

    #[test]
    fn empty_mask_is_rejected() {
        let m = space(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(
            SubsetMask::new(&m, std::iter::empty()),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn restrict_full_is_identity() {
        let m = space(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ]);
        let full = SubsetMask::full(&m);
        assert_eq!(restrict(&m, &full).unwrap(), m);
    }

    #[test]
    fn restrict_singleton_and_base_rule() {
        let m = space(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ]);
        let only_c = SubsetMask::new(&m, [2]).unwrap();
        let r = restrict(&m, &only_c).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.base_point(), 0); // base 0 not in mask: lowest member

        let with_base = SubsetMask::new(&m, [0, 2]).unwrap();
        let r = restrict(&m, &with_base).unwrap();
        assert_eq!(r.base_point(), 0);
        assert_eq!(r.dist(0, 1), 2.0);
    }

    #[test]
    fn proportional_identity_and_scaling() {
        let m = space(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let doubled = space(vec![vec![0.0, 4.0], vec![4.0, 0.0]]);
        match check_proportional(&m, &m).unwrap() {
            Proportionality::Proportional { scale } => assert_eq!(scale, 1.0),
            other => panic!("expected proportional, got {other:?}"),
        }
        // dA = c * dB with dB doubled means c = 1/2.
        match check_proportional(&m, &doubled).unwrap() {
            Proportionality::Proportional { scale } => assert!((scale - 0.5).abs() < 1e-12),
            other => panic!("expected proportional, got {other:?}"),
        }
    }

    #[test]
    fn proportional_perturbed_entry_reports_pair() {
        let base = space(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ]);
        let mut rows = vec![
            vec![0.0, 3.0, 6.0],
            vec![3.0, 0.0, 4.5],
            vec![6.0, 4.5, 0.0],
        ];
        rows[1][2] += 2e-9 * 3.0; // perturb one entry beyond tolerance at scale 3
        rows[2][1] = rows[1][2];
        let scaled = space(rows);
        match check_proportional(&scaled, &base).unwrap() {
            Proportionality::Mismatch { from, to, scale, .. } => {
                assert!((scale - 3.0).abs() < 1e-9);
                assert!((from, to) == (1, 2) || (from, to) == (2, 1));
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn lipschitz_function_is_based() {
        let m = space(vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let f = LipschitzFunction::based(&m, vec![5.0, 6.0]).unwrap();
        assert_eq!(f.value(0), 0.0);
        assert_eq!(f.value(1), 1.0);
        assert!((f.lip() - 0.5).abs() < 1e-12);
        let g = LipschitzFunction::single_source(&m, 1).unwrap();
        assert_eq!(g.value(0), 0.0);
        assert_eq!(g.value(1), -2.0);
        assert!((g.lip() - 1.0).abs() < 1e-12);
    }
}
