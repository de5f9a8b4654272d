//! Network simplex on the complete bipartite transportation graph.
//!
//! Sources are nodes `0..m`, targets are nodes `m..m+n`, and edge `i * n + j`
//! joins source `i` to target `j`. A basis is a spanning tree of `m + n - 1`
//! edges (degenerate zero-flow edges included). Pivoting follows Bland's
//! rule in edge-index order for both the entering and the leaving edge, so
//! runs are deterministic and cannot cycle in exact arithmetic.

use std::cmp::Ordering;
use std::collections::VecDeque;

use super::scalar::{CostValue, Scalar};
use crate::error::{Error, Result};

pub(crate) struct Problem<'a, S, C> {
    pub supply: &'a [S],
    pub demand: &'a [S],
    pub cost: &'a [C],
    /// Zero band for reduced costs; 0 in exact arithmetic.
    pub tol: f64,
}

impl<S, C> Problem<'_, S, C> {
    pub fn m(&self) -> usize {
        self.supply.len()
    }
    pub fn n(&self) -> usize {
        self.demand.len()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Basis<S> {
    pub flow: Vec<S>,
    pub in_basis: Vec<bool>,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution<S, C> {
    pub basis: Basis<S>,
    pub u: Vec<C>,
    pub v: Vec<C>,
    pub pivots: usize,
}

impl<S, C: CostValue> Solution<S, C> {
    pub fn reduced_cost(&self, cost: &[C], e: usize) -> C {
        let n = self.v.len();
        cost[e].sub(&self.u[e / n]).sub(&self.v[e % n])
    }
}

/// Matrix-minimum starting basis: cells are filled in increasing cost order
/// (ties by edge index), each allocation retiring exactly one row or column
/// until the final cell retires the last row and column together.
pub(crate) fn initial_basis<S: Scalar, C: CostValue>(p: &Problem<'_, S, C>) -> Basis<S> {
    let (m, n) = (p.m(), p.n());
    let mut order: Vec<usize> = (0..m * n).collect();
    order.sort_by(|&a, &b| match p.cost[a].sub(&p.cost[b]).sign(0.0) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let mut rem_s = p.supply.to_vec();
    let mut rem_d = p.demand.to_vec();
    let mut row_done = vec![false; m];
    let mut col_done = vec![false; n];
    let (mut rows_left, mut cols_left) = (m, n);
    let mut flow = vec![S::zero(); m * n];
    let mut in_basis = vec![false; m * n];
    let mut edges = Vec::with_capacity(m + n - 1);
    for e in order {
        let (i, j) = (e / n, e % n);
        if row_done[i] || col_done[j] {
            continue;
        }
        let x = if rem_s[i] <= rem_d[j] { rem_s[i].clone() } else { rem_d[j].clone() };
        let row_first = rem_s[i] <= rem_d[j];
        rem_s[i] = rem_s[i].sub(&x);
        rem_d[j] = rem_d[j].sub(&x);
        flow[e] = x;
        in_basis[e] = true;
        edges.push(e);
        if rows_left == 1 && cols_left == 1 {
            break;
        }
        if (row_first && rows_left > 1) || cols_left == 1 {
            row_done[i] = true;
            rows_left -= 1;
        } else {
            col_done[j] = true;
            cols_left -= 1;
        }
    }
    debug_assert_eq!(edges.len(), m + n - 1);
    Basis { flow, in_basis, edges }
}

struct Tree {
    adj: Vec<Vec<(usize, usize)>>,
}

impl Tree {
    fn new(m: usize, n: usize, edges: &[usize]) -> Self {
        let mut adj = vec![Vec::new(); m + n];
        for &e in edges {
            let (i, j) = (e / n, m + e % n);
            adj[i].push((j, e));
            adj[j].push((i, e));
        }
        Tree { adj }
    }

    /// Parent edge of every node in the tree rooted at `root`.
    fn parents(&self, root: usize) -> Vec<Option<(usize, usize)>> {
        let mut parent = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(node) = queue.pop_front() {
            for &(next, e) in &self.adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, e));
                    queue.push_back(next);
                }
            }
        }
        parent
    }
}

fn potentials<C: CostValue>(tree: &Tree, m: usize, n: usize, cost: &[C]) -> (Vec<C>, Vec<C>) {
    let mut u = vec![C::zero(); m];
    let mut v = vec![C::zero(); n];
    let mut seen = vec![false; m + n];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        for &(next, e) in &tree.adj[node] {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            if node < m {
                v[next - m] = cost[e].sub(&u[node]);
            } else {
                u[next] = cost[e].sub(&v[node - m]);
            }
            queue.push_back(next);
        }
    }
    (u, v)
}

/// Relative slack of the floating-point pricing screen. Potentials along a
/// tree path accumulate at most `(m + n)^2` roundings, far below this.
const SCREEN_RTOL: f64 = 1e-7;

fn pivot_limit(m: usize, n: usize) -> usize {
    1000 + 50 * m * n * (m + n)
}

/// Runs primal network simplex from a feasible basis to optimality.
pub(crate) fn optimize<S: Scalar, C: CostValue>(p: &Problem<'_, S, C>, mut basis: Basis<S>) -> Result<Solution<S, C>> {
    let (m, n) = (p.m(), p.n());
    let limit = pivot_limit(m, n);
    let mut pivots = 0usize;
    // Edges whose approximate reduced cost clearly exceeds zero cannot enter,
    // so the exact test runs only on the remaining candidates, in index order.
    let approx_cost: Vec<f64> = p.cost.iter().map(CostValue::approx).collect();
    let screen = SCREEN_RTOL * approx_cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    loop {
        let tree = Tree::new(m, n, &basis.edges);
        let (u, v) = potentials(&tree, m, n, p.cost);
        let (uf, vf) = potentials(&tree, m, n, &approx_cost);
        let entering = (0..m * n).find(|&e| {
            !basis.in_basis[e]
                && approx_cost[e] - uf[e / n] - vf[e % n] <= screen
                && p.cost[e].sub(&u[e / n]).sub(&v[e % n]).sign(p.tol) == Ordering::Less
        });
        let Some(entering) = entering else {
            return Ok(Solution { basis, u, v, pivots });
        };
        if pivots >= limit {
            return Err(Error::PivotLimit(limit));
        }
        pivots += 1;

        // Cycle: entering edge source i -> target j, then the tree path j -> i.
        // Walking from j, tree edges alternately lose and gain flow.
        let (src, dst) = (entering / n, m + entering % n);
        let parent = tree.parents(src);
        let mut path = Vec::new();
        let mut node = dst;
        while node != src {
            let (up, e) = parent[node].expect("basis is a spanning tree");
            path.push(e);
            node = up;
        }
        let mut theta: Option<S> = None;
        let mut leaving = usize::MAX;
        for &e in path.iter().step_by(2) {
            let f = &basis.flow[e];
            let better = match &theta {
                None => true,
                Some(t) => match f.sub(t).sign(0.0) {
                    Ordering::Less => true,
                    Ordering::Equal => e < leaving,
                    Ordering::Greater => false,
                },
            };
            if better {
                theta = Some(f.clone());
                leaving = e;
            }
        }
        let theta = theta.expect("cycle has a decreasing edge");
        for (k, &e) in path.iter().enumerate() {
            basis.flow[e] = if k % 2 == 0 { basis.flow[e].sub(&theta) } else { basis.flow[e].add(&theta) };
        }
        basis.flow[entering] = basis.flow[entering].add(&theta);
        basis.flow[leaving] = S::zero();
        basis.in_basis[leaving] = false;
        basis.in_basis[entering] = true;
        let slot = basis.edges.iter().position(|&e| e == leaving).expect("leaving edge is basic");
        basis.edges[slot] = entering;
    }
}

pub(crate) fn solve<S: Scalar, C: CostValue>(p: &Problem<'_, S, C>) -> Result<Solution<S, C>> {
    optimize(p, initial_basis(p))
}
