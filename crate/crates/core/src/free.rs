//! Lipschitz-free norm engine: the norm of a finitely supported zero-sum
//! measure is the minimum cost of transporting its positive part onto its
//! negative part, and the dual optimum over the based Lipschitz unit ball
//! agrees with it. Both sides are produced: a transport plan as the primal
//! witness and a Lipschitz-1 function as the dual witness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, LipschitzFunction, SubsetMask};
use crate::scalar::Scalar;
use crate::transport::solve_transport;

/// A finitely supported zero-sum weight assignment over a space's points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasure<S> {
    weights: Vec<S>,
}

impl<S: Scalar> SignedMeasure<S> {
    /// Build from dense weights; rejects totals beyond the metric tolerance.
    pub fn new(space: &FiniteMetricSpace<S>, weights: Vec<S>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::SizeMismatch {
                left: weights.len(),
                right: space.len(),
            });
        }
        let total: S = weights.iter().copied().sum();
        if total.abs() > S::tol_metric() {
            return Err(Error::UnbalancedMeasure {
                total: total.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(SignedMeasure { weights })
    }

    pub fn zero(space: &FiniteMetricSpace<S>) -> Self {
        SignedMeasure {
            weights: vec![S::zero(); space.len()],
        }
    }

    /// `delta_x - delta_y`.
    pub fn dirac_difference(space: &FiniteMetricSpace<S>, x: usize, y: usize) -> Result<Self> {
        let n = space.len();
        for &idx in [x, y].iter() {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, n });
            }
        }
        let mut weights = vec![S::zero(); n];
        weights[x] = weights[x] + S::one();
        weights[y] = weights[y] - S::one();
        Ok(SignedMeasure { weights })
    }

    /// Build from sparse `(label, weight)` pairs; unknown labels are errors.
    pub fn from_sparse(space: &FiniteMetricSpace<S>, pairs: &[(String, S)]) -> Result<Self> {
        let mut weights = vec![S::zero(); space.len()];
        for (label, w) in pairs {
            let idx = space
                .labels()
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::PointSetMismatch {
                    detail: format!("unknown point label `{label}`"),
                })?;
            weights[idx] = weights[idx] + *w;
        }
        Self::new(space, weights)
    }

    pub fn to_sparse(&self, space: &FiniteMetricSpace<S>) -> Vec<(String, S)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != S::zero())
            .map(|(i, w)| (space.label(i).to_string(), *w))
            .collect()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != S::zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn scaled(&self, factor: S) -> Self {
        SignedMeasure {
            weights: self.weights.iter().map(|w| *w * factor).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.weights.len() != other.weights.len() {
            return Err(Error::SizeMismatch {
                left: self.weights.len(),
                right: other.weights.len(),
            });
        }
        Ok(SignedMeasure {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| *a + *b)
                .collect(),
        })
    }

    /// Pairing `sum_x mu(x) f(x)`.
    pub fn pair(&self, f: &LipschitzFunction<S>) -> S {
        self.weights
            .iter()
            .zip(f.values())
            .map(|(w, v)| *w * *v)
            .sum()
    }

    fn split(&self) -> (SideMasses<S>, SideMasses<S>) {
        let mut sources = Vec::new();
        let mut sinks = Vec::new();
        for (i, &w) in self.weights.iter().enumerate() {
            if w > S::zero() {
                sources.push((i, w));
            } else if w < S::zero() {
                sinks.push((i, -w));
            }
        }
        (sources, sinks)
    }
}

/// Point indices with the (positive) mass they carry on one side.
type SideMasses<S> = Vec<(usize, S)>;

/// One arc of a transport plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportFlow<S> {
    pub from: usize,
    pub to: usize,
    pub mass: S,
}

/// Primal witness for a free-norm value, with the dual potentials that
/// certified its optimality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan<S> {
    pub flows: Vec<TransportFlow<S>>,
    pub cost: S,
    /// `(point, potential)` for each source of the positive part.
    pub source_potentials: Vec<(usize, S)>,
    /// `(point, potential)` for each sink of the negative part.
    pub sink_potentials: Vec<(usize, S)>,
}

impl<S: Scalar> TransportPlan<S> {
    pub fn empty() -> Self {
        TransportPlan {
            flows: Vec::new(),
            cost: S::zero(),
            source_potentials: Vec::new(),
            sink_potentials: Vec::new(),
        }
    }
}

/// Free-space norm of a zero-sum measure: minimum transport cost from the
/// positive to the negative part, with the optimal plan as witness.
pub fn free_space_norm<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    mu: &SignedMeasure<S>,
) -> Result<(S, TransportPlan<S>)> {
    if mu.weights().len() != m.len() {
        return Err(Error::SizeMismatch {
            left: mu.weights().len(),
            right: m.len(),
        });
    }
    let (sources, sinks) = mu.split();
    if sources.is_empty() && sinks.is_empty() {
        return Ok((S::zero(), TransportPlan::empty()));
    }
    if sources.is_empty() || sinks.is_empty() {
        // Zero-sum within tolerance but strictly one-sided mass cannot be
        // transported anywhere; treat dust below tolerance as zero.
        let residual: S = sources
            .iter()
            .chain(sinks.iter())
            .map(|(_, w)| *w)
            .sum();
        if residual <= S::tol_metric() {
            return Ok((S::zero(), TransportPlan::empty()));
        }
        return Err(Error::UnbalancedMeasure {
            total: residual.to_f64().unwrap_or(f64::NAN),
        });
    }

    let supplies: Vec<S> = sources.iter().map(|(_, w)| *w).collect();
    let mut demands: Vec<S> = sinks.iter().map(|(_, w)| *w).collect();
    // Absorb the (tolerance-scale) imbalance into the last demand so the
    // tableau is exactly balanced.
    let total_s: S = supplies.iter().copied().sum();
    let total_d: S = demands.iter().copied().sum();
    let last = demands.len() - 1;
    demands[last] = (demands[last] + (total_s - total_d)).max(S::zero());

    let sol = solve_transport(&supplies, &demands, |i, j| {
        m.dist(sources[i].0, sinks[j].0)
    })?;

    let plan = TransportPlan {
        flows: sol
            .flows
            .iter()
            .map(|&(i, j, f)| TransportFlow {
                from: sources[i].0,
                to: sinks[j].0,
                mass: f,
            })
            .collect(),
        cost: sol.cost,
        source_potentials: sources
            .iter()
            .zip(&sol.u)
            .map(|(&(idx, _), &u)| (idx, u))
            .collect(),
        sink_potentials: sinks
            .iter()
            .zip(&sol.v)
            .map(|(&(idx, _), &v)| (idx, v))
            .collect(),
    };
    Ok((sol.cost, plan))
}

/// Dual witness: a Lipschitz-1 based function whose pairing with the measure
/// matches the primal cost.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualWitness<S> {
    pub f: LipschitzFunction<S>,
    pub pairing: S,
}

/// Reconstruct a globally Lipschitz-1 function from the plan's sink
/// potentials by taking the lower envelope of the cones `d(., t) - v_t`
/// (the tight extension of the dual solution), based at the space's base
/// point.
pub fn dual_witness<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    mu: &SignedMeasure<S>,
    plan: &TransportPlan<S>,
) -> Result<DualWitness<S>> {
    let n = m.len();
    let values: Vec<S> = if plan.sink_potentials.is_empty() {
        vec![S::zero(); n]
    } else {
        (0..n)
            .map(|z| {
                plan.sink_potentials
                    .iter()
                    .map(|&(t, v)| m.dist(z, t) - v)
                    .fold(S::infinity(), |acc, c| acc.min(c))
            })
            .collect()
    };
    let f = LipschitzFunction::based(m, values)?;
    let pairing = mu.pair(&f);
    Ok(DualWitness { f, pairing })
}

/// Result of the zero-extension operator norm computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroExtensionNorm<S> {
    /// `sup` over the based unit ball of `A` of the Lipschitz constant of the
    /// extension-by-zero.
    pub exact: S,
    /// `max(1, D(A) / d(A, M \ A))`.
    pub separation_bound: S,
    /// True when `A` is the base point alone, where only the zero function is
    /// representable and the exact norm is reported as 0.
    pub degenerate: bool,
}

/// Norm of the extension-by-zero operator from based Lipschitz functions on
/// `A` to the whole space, together with the diameter/separation bound it
/// never exceeds.
pub fn zero_extension_norm<S: Scalar>(
    m: &FiniteMetricSpace<S>,
    a: &SubsetMask,
) -> Result<ZeroExtensionNorm<S>> {
    if a.parent_len() != m.len() {
        return Err(Error::PointSetMismatch {
            detail: "mask belongs to another space".to_string(),
        });
    }
    if !a.contains(m.base_point()) {
        return Err(Error::Degenerate(
            "base point must lie inside the subset".to_string(),
        ));
    }
    if a.is_full() {
        return Err(Error::Degenerate(
            "subset equals the whole space; nothing to extend by zero".to_string(),
        ));
    }
    let outside = a.complement(m)?;
    let sep = crate::metric::set_distance(m, a, &outside)?;
    if sep <= S::zero() {
        return Err(Error::Degenerate(
            "subset touches its complement (zero separation)".to_string(),
        ));
    }
    let diam_a = crate::metric::diameter(m, a)?;
    let separation_bound = S::one().max(diam_a / sep);

    if a.len() == 1 {
        return Ok(ZeroExtensionNorm {
            exact: S::zero(),
            separation_bound,
            degenerate: true,
        });
    }

    // sup over the unit ball of |f(x)| is d(x, base) inside A; the cross-pair
    // quotient maximum plus the isometric interior part give the exact norm.
    let base = m.base_point();
    let mut cross = S::zero();
    for &x in a.members() {
        let radius = m.dist(x, base);
        for &y in outside.members() {
            let q = radius / m.dist(x, y);
            if q > cross {
                cross = q;
            }
        }
    }
    Ok(ZeroExtensionNorm {
        exact: S::one().max(cross),
        separation_bound,
        degenerate: false,
    })
}

/// Brute-force free norm for supports of size at most [`BRUTE_FORCE_LIMIT`]:
/// enumerate every spanning-tree vertex of the transportation polytope and
/// take the cheapest feasible one. Test oracle; independent of the simplex
/// path.
pub const BRUTE_FORCE_LIMIT: usize = 8;

pub fn brute_force_norm<S: Scalar>(m: &FiniteMetricSpace<S>, mu: &SignedMeasure<S>) -> Result<S> {
    if mu.weights().len() != m.len() {
        return Err(Error::SizeMismatch {
            left: mu.weights().len(),
            right: m.len(),
        });
    }
    let support = mu.support().len();
    if support > BRUTE_FORCE_LIMIT {
        return Err(Error::SupportTooLarge {
            support,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let (sources, sinks) = mu.split();
    if sources.is_empty() || sinks.is_empty() {
        return Ok(S::zero());
    }
    let p = sources.len();
    let q = sinks.len();
    let supplies: Vec<S> = sources.iter().map(|(_, w)| *w).collect();
    let mut demands: Vec<S> = sinks.iter().map(|(_, w)| *w).collect();
    let total_s: S = supplies.iter().copied().sum();
    let total_d: S = demands.iter().copied().sum();
    let last = q - 1;
    demands[last] = (demands[last] + (total_s - total_d)).max(S::zero());

    let cells = p * q;
    let tree_edges = p + q - 1;
    let feas_tol = -S::tol_pivot() * total_s.max(S::one());
    let mut best = S::infinity();

    // Subsets of cells with exactly p + q - 1 members; cells <= 16 because
    // p + q <= 8 bounds p * q by 16.
    debug_assert!(cells <= 16);
    for mask in 0u32..(1u32 << cells) {
        if mask.count_ones() as usize != tree_edges {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells)
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| (k / q, k % q))
            .collect();
        if !spans(p, q, &chosen) {
            continue;
        }
        if let Some(cost) = tree_cost(p, q, &chosen, &supplies, &demands, feas_tol, |i, j| {
            m.dist(sources[i].0, sinks[j].0)
        }) {
            if cost < best {
                best = cost;
            }
        }
    }
    debug_assert!(best.is_finite(), "transportation polytope is non-empty");
    Ok(best)
}

/// Connectivity check: `p + q - 1` edges spanning all `p + q` nodes.
fn spans(p: usize, q: usize, cells: &[(usize, usize)]) -> bool {
    let n = p + q;
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(node) = stack.pop() {
        for &(i, j) in cells {
            let (a, b) = (i, p + j);
            let next = if a == node {
                b
            } else if b == node {
                a
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                count += 1;
                stack.push(next);
            }
        }
    }
    count == n
}

/// Solve the unique flows of a spanning tree by leaf peeling; `None` when a
/// flow turns negative (infeasible vertex).
fn tree_cost<S: Scalar>(
    p: usize,
    q: usize,
    cells: &[(usize, usize)],
    supplies: &[S],
    demands: &[S],
    feas_tol: S,
    cost: impl Fn(usize, usize) -> S,
) -> Option<S> {
    let n = p + q;
    let mut balance: Vec<S> = supplies
        .iter()
        .copied()
        .chain(demands.iter().copied())
        .collect();
    let mut degree = vec![0usize; n];
    let mut alive = vec![true; cells.len()];
    for &(i, j) in cells {
        degree[i] += 1;
        degree[p + j] += 1;
    }
    let mut total = S::zero();
    for _ in 0..cells.len() {
        // Find a leaf node with an incident alive cell.
        let mut picked = None;
        'outer: for node in 0..n {
            if degree[node] == 1 {
                for (idx, &(i, j)) in cells.iter().enumerate() {
                    if alive[idx] && (i == node || p + j == node) {
                        picked = Some((node, idx));
                        break 'outer;
                    }
                }
            }
        }
        let (node, idx) = picked?;
        let (i, j) = cells[idx];
        let flow = balance[node];
        if flow < feas_tol {
            return None;
        }
        let flow = flow.max(S::zero());
        total = total + flow * cost(i, j);
        let other = if i == node { p + j } else { i };
        balance[other] = balance[other] - flow;
        balance[node] = S::zero();
        alive[idx] = false;
        degree[node] -= 1;
        degree[other] -= 1;
    }
    Some(total)
}
