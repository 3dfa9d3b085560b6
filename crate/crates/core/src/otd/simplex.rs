//! Transportation simplex for balanced discrete transport problems.
//!
//! Starts from the north-west corner basis and pivots with the
//! modified-distribution (u-v) method. Pricing is Dantzig's most negative
//! reduced cost; after a run of degenerate pivots it switches to Bland's
//! smallest-index rule, which cannot cycle.

use crate::error::{Error, Result};

/// Optimal basic solution of a transportation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSolution {
    /// Dense `n × m` flows, row-major.
    pub flows: Vec<f64>,
    /// Row potentials `u`.
    pub u: Vec<f64>,
    /// Column potentials `v`; `c_ij − u_i − v_j ≥ 0` at optimality.
    pub v: Vec<f64>,
    pub pivots: usize,
}

struct Tree {
    parent: Vec<usize>,
    parent_cell: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
}

const NONE: usize = usize::MAX;

/// Solves `min Σ c_ij x_ij` over couplings of `supply` and `demand`.
///
/// `cost` is row-major `supply.len() × demand.len()`. Both marginals must be
/// nonnegative with equal totals.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<SimplexSolution> {
    let (n, m) = (supply.len(), demand.len());
    if n == 0 || m == 0 || cost.len() != n * m {
        return Err(Error::InvalidInput(format!("transport problem of shape {n}×{m} with {} costs", cost.len())));
    }
    let scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let eps = 1e-12 * scale;

    let mut flows = vec![0.0; n * m];
    let mut is_basic = vec![false; n * m];
    let mut basis: Vec<usize> = Vec::with_capacity(n + m - 1);

    // North-west corner: n + m − 1 cells, zero-flow cells included when a
    // row and a column run out together.
    {
        let (mut a, mut b) = (supply.to_vec(), demand.to_vec());
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]).max(0.0);
            let cell = i * m + j;
            flows[cell] = x;
            is_basic[cell] = true;
            basis.push(cell);
            a[i] -= x;
            b[j] -= x;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if j == m - 1 || (i < n - 1 && a[i] <= b[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    let max_pivots = 50 * n * m + 1000;
    let degenerate_limit = 2 * (n + m);
    let mut degenerate_run = 0;
    let mut bland = false;
    let mut pivots = 0;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n + m];

    loop {
        let tree = build_tree(n, m, &basis, cost, &mut adjacency);
        let (u, v) = tree.potential.split_at(n);

        let mut entering = NONE;
        let mut best = -eps;
        'pricing: for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                let cell = i * m + j;
                if is_basic[cell] {
                    continue;
                }
                let d = cost[cell] - ui - vj;
                if d < best {
                    entering = cell;
                    if bland {
                        break 'pricing;
                    }
                    best = d;
                }
            }
        }
        if entering == NONE {
            return Ok(SimplexSolution { flows, u: u.to_vec(), v: v.to_vec(), pivots });
        }
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::InvalidInput(format!("transport simplex exceeded {max_pivots} pivots")));
        }

        // Cycle: entering cell plus the tree path from row i to column j.
        // Along that path, cells alternate −, +, −, …, starting and ending with −.
        let (ei, ej) = (entering / m, entering % m);
        let path = tree_path(&tree, ei, n + ej);
        let mut theta = f64::INFINITY;
        let mut leaving = NONE;
        for &cell in path.iter().step_by(2) {
            let f = flows[cell];
            if f < theta || (f == theta && cell < leaving) {
                theta = f;
                leaving = cell;
            }
        }
        theta = theta.max(0.0);
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                flows[cell] = (flows[cell] - theta).max(0.0);
            } else {
                flows[cell] += theta;
            }
        }
        flows[leaving] = 0.0;
        flows[entering] = theta;
        is_basic[leaving] = false;
        is_basic[entering] = true;
        let slot = basis.iter().position(|&c| c == leaving).expect("leaving cell is basic");
        basis[slot] = entering;

        if theta == 0.0 {
            degenerate_run += 1;
            if degenerate_run > degenerate_limit {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }
}

/// Spanning tree of the basis rooted at row 0, with potentials `u₀ = 0`.
/// Nodes `0..n` are rows and `n..n+m` columns.
fn build_tree(n: usize, m: usize, basis: &[usize], cost: &[f64], adjacency: &mut [Vec<usize>]) -> Tree {
    for a in adjacency.iter_mut() {
        a.clear();
    }
    for &cell in basis {
        let (i, j) = (cell / m, cell % m);
        adjacency[i].push(cell);
        adjacency[n + j].push(cell);
    }
    let total = n + m;
    let mut tree = Tree {
        parent: vec![NONE; total],
        parent_cell: vec![NONE; total],
        depth: vec![0; total],
        potential: vec![0.0; total],
    };
    let mut visited = vec![false; total];
    let mut stack = vec![0usize];
    visited[0] = true;
    while let Some(node) = stack.pop() {
        for &cell in &adjacency[node] {
            let (i, j) = (cell / m, cell % m);
            let other = if node < n { n + j } else { i };
            if visited[other] {
                continue;
            }
            visited[other] = true;
            tree.parent[other] = node;
            tree.parent_cell[other] = cell;
            tree.depth[other] = tree.depth[node] + 1;
            tree.potential[other] = cost[cell] - tree.potential[node];
            stack.push(other);
        }
    }
    debug_assert!(visited.iter().all(|v| *v), "basis must span all rows and columns");
    tree
}

/// Cells on the tree path from node `from` to node `to`, in order.
fn tree_path(tree: &Tree, from: usize, to: usize) -> Vec<usize> {
    let (mut a, mut b) = (from, to);
    let mut head = Vec::new();
    let mut tail = Vec::new();
    while tree.depth[a] > tree.depth[b] {
        head.push(tree.parent_cell[a]);
        a = tree.parent[a];
    }
    while tree.depth[b] > tree.depth[a] {
        tail.push(tree.parent_cell[b]);
        b = tree.parent[b];
    }
    while a != b {
        head.push(tree.parent_cell[a]);
        a = tree.parent[a];
        tail.push(tree.parent_cell[b]);
        b = tree.parent[b];
    }
    head.extend(tail.into_iter().rev());
    head
}
