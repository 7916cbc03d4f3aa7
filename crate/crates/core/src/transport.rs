//! Balanced transportation problem solved by network simplex on the
//! bipartite tableau.
//!
//! Pivoting uses the most-negative reduced cost, falling back to Bland's
//! rule after a fixed number of iterations so degenerate instances cannot
//! cycle. Optimal node potentials are returned alongside the flow; they are
//! the raw material for dual witnesses.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub(crate) struct TransportSolution<S> {
    /// Basic cells with strictly positive flow, sorted by (source, sink).
    pub flows: Vec<(usize, usize, S)>,
    pub cost: S,
    /// Source potentials `u`, sink potentials `v`, with `u_i + v_j <= c_ij`
    /// within pivot tolerance and equality on basic cells.
    pub u: Vec<S>,
    pub v: Vec<S>,
}

pub(crate) fn solve_transport<S: Scalar>(
    supplies: &[S],
    demands: &[S],
    cost: impl Fn(usize, usize) -> S,
) -> Result<TransportSolution<S>> {
    let p = supplies.len();
    let q = demands.len();
    assert!(p > 0 && q > 0, "caller must handle empty sides");

    let c: Vec<S> = (0..p * q).map(|k| cost(k / q, k % q)).collect();
    let mut flow = vec![S::zero(); p * q];
    let mut basic = vec![false; p * q];

    // Northwest-corner initial basis: exactly p + q - 1 basic cells,
    // degenerate zeros included.
    {
        let mut ra: Vec<S> = supplies.to_vec();
        let mut rb: Vec<S> = demands.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        for _ in 0..(p + q - 1) {
            let t = ra[i].min(rb[j]).max(S::zero());
            flow[i * q + j] = t;
            basic[i * q + j] = true;
            ra[i] = ra[i] - t;
            rb[j] = rb[j] - t;
            if i == p - 1 {
                j = (j + 1).min(q - 1);
            } else if j == q - 1 || ra[i] <= rb[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let mut row_adj: Vec<Vec<usize>> = vec![Vec::new(); p];
    let mut col_adj: Vec<Vec<usize>> = vec![Vec::new(); q];
    for i in 0..p {
        for j in 0..q {
            if basic[i * q + j] {
                row_adj[i].push(j);
                col_adj[j].push(i);
            }
        }
    }

    let tol = S::tol_pivot();
    let bland_after = 2 * p * q + 100;
    let max_iters = 200 * p * q + 20_000;
    let mut u = vec![S::zero(); p];
    let mut v = vec![S::zero(); q];

    for iter in 0..=max_iters {
        if iter == max_iters {
            return Err(Error::SolverStall { iterations: iter });
        }

        compute_potentials(p, q, &row_adj, &col_adj, &c, &mut u, &mut v);

        // Entering cell.
        let mut entering: Option<(usize, usize)> = None;
        if iter < bland_after {
            let mut best = -tol;
            for i in 0..p {
                for j in 0..q {
                    if !basic[i * q + j] {
                        let rc = c[i * q + j] - u[i] - v[j];
                        if rc < best {
                            best = rc;
                            entering = Some((i, j));
                        }
                    }
                }
            }
        } else {
            'scan: for i in 0..p {
                for j in 0..q {
                    if !basic[i * q + j] && c[i * q + j] - u[i] - v[j] < -tol {
                        entering = Some((i, j));
                        break 'scan;
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else { break };

        // Unique tree path from col node ej back to row node ei; the cycle is
        // the entering cell plus that path, with alternating signs.
        let path = tree_path(p, q, &row_adj, &col_adj, ei, ej);

        // Minimum flow over the minus-signed cells (odd positions on the path,
        // counting the cell incident to ej as position 0 => minus).
        let mut theta = S::infinity();
        let mut leaving: Option<(usize, usize)> = None;
        for (pos, &(i, j)) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let f = flow[i * q + j];
                let better = f < theta
                    || (f == theta
                        && leaving.is_none_or(|(li, lj)| (i, j) < (li, lj)));
                if better {
                    theta = f;
                    leaving = Some((i, j));
                }
            }
        }
        let (li, lj) = leaving.expect("cycle has at least one minus cell");

        flow[ei * q + ej] = flow[ei * q + ej] + theta;
        for (pos, &(i, j)) in path.iter().enumerate() {
            if pos % 2 == 0 {
                flow[i * q + j] = (flow[i * q + j] - theta).max(S::zero());
            } else {
                flow[i * q + j] = flow[i * q + j] + theta;
            }
        }

        basic[li * q + lj] = false;
        row_adj[li].retain(|&j| j != lj);
        col_adj[lj].retain(|&i| i != li);
        basic[ei * q + ej] = true;
        row_adj[ei].push(ej);
        col_adj[ej].push(ei);
    }

    compute_potentials(p, q, &row_adj, &col_adj, &c, &mut u, &mut v);

    let mut flows = Vec::new();
    let mut total = S::zero();
    for i in 0..p {
        for j in 0..q {
            if basic[i * q + j] && flow[i * q + j] > S::zero() {
                flows.push((i, j, flow[i * q + j]));
                total = total + flow[i * q + j] * c[i * q + j];
            }
        }
    }

    Ok(TransportSolution {
        flows,
        cost: total,
        u,
        v,
    })
}

/// Solve `u_i + v_j = c_ij` over the basis tree, rooted at row 0.
fn compute_potentials<S: Scalar>(
    p: usize,
    q: usize,
    row_adj: &[Vec<usize>],
    col_adj: &[Vec<usize>],
    c: &[S],
    u: &mut [S],
    v: &mut [S],
) {
    let mut u_set = vec![false; p];
    let mut v_set = vec![false; q];
    u[0] = S::zero();
    u_set[0] = true;
    // Nodes: rows are 0..p, cols are p..p+q.
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        if node < p {
            let i = node;
            for &j in &row_adj[i] {
                if !v_set[j] {
                    v[j] = c[i * q + j] - u[i];
                    v_set[j] = true;
                    stack.push(p + j);
                }
            }
        } else {
            let j = node - p;
            for &i in &col_adj[j] {
                if !u_set[i] {
                    u[i] = c[i * q + j] - v[j];
                    u_set[i] = true;
                    stack.push(i);
                }
            }
        }
    }
    debug_assert!(u_set.iter().all(|&s| s) && v_set.iter().all(|&s| s));
}

/// Cells of the unique basis-tree path from col node `ej` to row node `ei`,
/// in walking order starting at the cell incident to `ej`.
fn tree_path(
    p: usize,
    q: usize,
    row_adj: &[Vec<usize>],
    col_adj: &[Vec<usize>],
    ei: usize,
    ej: usize,
) -> Vec<(usize, usize)> {
    let n = p + q;
    let start = p + ej;
    let target = ei;
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        if node < p {
            for &j in &row_adj[node] {
                if !seen[p + j] {
                    seen[p + j] = true;
                    parent[p + j] = Some(node);
                    queue.push_back(p + j);
                }
            }
        } else {
            for &i in &col_adj[node - p] {
                if !seen[i] {
                    seen[i] = true;
                    parent[i] = Some(node);
                    queue.push_back(i);
                }
            }
        }
    }
    debug_assert!(seen[target], "basis must be a spanning tree");

    // Walk back from the target (row ei) to the start (col ej), collecting
    // cells, then reverse so the first cell touches col ej.
    let mut cells = Vec::new();
    let mut node = target;
    while let Some(prev) = parent[node] {
        let (i, j) = if node < p {
            (node, prev - p)
        } else {
            (prev, node - p)
        };
        cells.push((i, j));
        node = prev;
    }
    cells.reverse();
    cells
}
