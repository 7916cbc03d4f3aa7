//! Shared test oracles, independent of the library's solution paths:
//! a dense tableau simplex for linear programs over the Lipschitz polytope,
//! a shortest-path solver for the vanishing-difference LP, and random
//! instance generators.

#![allow(dead_code)] // each integration test binary uses a subset

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lipfree::metric::{FiniteMetricSpace, SubsetMask};
use lipfree::pipeline::generate_random_closure;
use lipfree::Measure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid metric: shortest-path closure of random positive weights.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace<f64> {
    generate_random_closure(n, 0.5, 3.0, rng).unwrap()
}

/// Random non-full mask containing the base point.
pub fn random_based_mask(
    rng: &mut ChaCha8Rng,
    space: &FiniteMetricSpace<f64>,
    max_size: usize,
) -> SubsetMask {
    let n = space.len();
    assert!(n >= 2);
    let size = rng.gen_range(1..=max_size.min(n - 1));
    let mut members = vec![space.base_point()];
    while members.len() < size {
        let candidate = rng.gen_range(0..n);
        if !members.contains(&candidate) {
            members.push(candidate);
        }
    }
    SubsetMask::new(space, members).unwrap()
}

/// Random zero-sum measure with support at most `support` (exactly zero-sum:
/// the last support point absorbs the remainder).
pub fn random_measure(
    rng: &mut ChaCha8Rng,
    space: &FiniteMetricSpace<f64>,
    support: usize,
) -> Measure {
    let n = space.len();
    let support = support.min(n).max(2);
    let mut indices: Vec<usize> = (0..n).collect();
    for i in (1..indices.len()).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    indices.truncate(support);
    let mut weights = vec![0.0; n];
    let mut total = 0.0;
    for &i in indices.iter().take(support - 1) {
        let w = rng.gen_range(-2.0..2.0);
        weights[i] = w;
        total += w;
    }
    weights[indices[support - 1]] = -total;
    Measure::new(space, weights).unwrap()
}

/// Dense tableau simplex: maximize `c . x` subject to `A x <= b`, `x >= 0`,
/// with `b >= 0` so the slack basis starts feasible. Panics on unbounded
/// problems (the polytopes used here are bounded).
pub fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let m = a.len();
    let n = c.len();
    let cols = n + m + 1;
    let mut t = vec![vec![0.0f64; cols]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][cols - 1] = b[i];
        assert!(b[i] >= 0.0, "rhs must be nonnegative");
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let tol = 1e-10;
    let bland_after = 20_000;
    for iter in 0..200_000 {
        // entering column
        let mut entering = None;
        if iter < bland_after {
            let mut best = -tol;
            for j in 0..n + m {
                if t[m][j] < best {
                    best = t[m][j];
                    entering = Some(j);
                }
            }
        } else {
            entering = (0..n + m).find(|&j| t[m][j] < -tol);
        }
        let Some(e) = entering else {
            return t[m][cols - 1];
        };
        // ratio test, ties by smallest basis variable
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][e] > tol {
                let ratio = t[i][cols - 1] / t[i][e];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12
                            || ((ratio - lr).abs() <= 1e-12 && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (l, _) = leave.expect("bounded polytope");
        // pivot
        let pivot = t[l][e];
        for v in t[l].iter_mut() {
            *v /= pivot;
        }
        for i in 0..=m {
            if i != l {
                let factor = t[i][e];
                if factor != 0.0 {
                    for j in 0..cols {
                        t[i][j] -= factor * t[l][j];
                    }
                }
            }
        }
        basis[l] = e;
    }
    panic!("simplex did not terminate");
}

/// Maximize `sum_p objective[p] * f(p)` over the based Lipschitz unit ball
/// of the given metric: `|f(p) - f(q)| <= d(p, q)` and `f(base) = 0`.
/// Free variables are split into positive parts for the simplex.
pub fn lipschitz_polytope_max(
    space: &FiniteMetricSpace<f64>,
    objective: &[f64],
) -> f64 {
    let n = space.len();
    let base = space.base_point();
    let vars: Vec<usize> = (0..n).filter(|&p| p != base).collect();
    let index_of = |p: usize| vars.iter().position(|&v| v == p);
    let width = 2 * vars.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            let mut row = vec![0.0; width];
            if let Some(ip) = index_of(p) {
                row[2 * ip] += 1.0;
                row[2 * ip + 1] -= 1.0;
            }
            if let Some(iq) = index_of(q) {
                row[2 * iq] -= 1.0;
                row[2 * iq + 1] += 1.0;
            }
            a.push(row);
            b.push(space.dist(p, q));
        }
    }
    let mut c = vec![0.0; width];
    for (i, &p) in vars.iter().enumerate() {
        c[2 * i] = objective[p];
        c[2 * i + 1] = -objective[p];
    }
    simplex_max(&a, &b, &c)
}

/// Exact solution of `max f(x) - f(y)` over 1-Lipschitz functions vanishing
/// on `A`: the dual of this difference-constraint program is a shortest path
/// from `y` to `x` through the complete graph with a zero-cost hub joining
/// the `A` points.
pub fn vanishing_lipschitz_max_gap(
    space: &FiniteMetricSpace<f64>,
    a: &SubsetMask,
    x: usize,
    y: usize,
) -> f64 {
    let n = space.len();
    let hub = n;
    let mut dist = vec![f64::INFINITY; n + 1];
    let mut done = vec![false; n + 1];
    dist[y] = 0.0;
    loop {
        let mut u = None;
        let mut best = f64::INFINITY;
        for v in 0..=n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        if u == hub {
            for &p in a.members() {
                if dist[u] < dist[p] {
                    dist[p] = dist[u];
                }
            }
        } else {
            for v in 0..n {
                if v != u {
                    let cand = dist[u] + space.dist(u, v);
                    if cand < dist[v] {
                        dist[v] = cand;
                    }
                }
            }
            if a.contains(u) && dist[u] < dist[hub] {
                dist[hub] = dist[u];
            }
        }
    }
    dist[x]
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: {actual} vs {expected} (tol {tol})"
    );
}
