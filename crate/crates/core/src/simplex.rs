//! Transportation simplex (MODI / stepping-stone) for balanced problems.
//!
//! Solves `min sum_ij T_ij C_ij` subject to `sum_j T_ij = supply_i`,
//! `sum_i T_ij = demand_j`, `T >= 0`. The basis is kept as a spanning tree of
//! `m + n - 1` cells over the bipartite row/column graph; degenerate basic
//! cells carry zero flow.

use std::collections::VecDeque;

use crate::transport::{CostMatrix, FlowMatrix};
use crate::{Error, Result};

/// Consecutive zero-step pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 32;

/// Optimal plan and objective of a transportation problem.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub cost: f64,
    pub flow: FlowMatrix,
    pub pivots: usize,
}

pub fn solve(supply: &[f64], demand: &[f64], cost: &CostMatrix) -> Result<TransportPlan> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return Err(Error::BadMasses("no sources or no sinks".into()));
    }
    if cost.rows() != m || cost.cols() != n {
        return Err(Error::BadMasses(format!(
            "cost matrix is {}x{}, masses are {m}x{n}",
            cost.rows(),
            cost.cols()
        )));
    }
    if let Some(x) = supply
        .iter()
        .chain(demand)
        .find(|x| !(x.is_finite() && **x > 0.0))
    {
        return Err(Error::BadMasses(format!("mass {x} is not positive")));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    let mass_tol = 1e-12 * total_s.max(total_d);
    if (total_s - total_d).abs() > 1e3 * mass_tol {
        return Err(Error::BadMasses(format!(
            "unbalanced: supply {total_s} vs demand {total_d}"
        )));
    }

    let mut state = Basis::northwest_corner(supply, demand, mass_tol);
    let max_c = cost.data().iter().fold(0.0f64, |a, &b| a.max(b));
    let cost_tol = 1e-12 * (1.0 + max_c);
    let limit = 50 * (m + n) * (m + n) + 1000;

    let mut pivots = 0;
    let mut degenerate_run = 0;
    loop {
        let (u, v) = state.potentials(cost);
        let entering = if degenerate_run < DEGENERATE_RUN {
            most_negative(cost, &u, &v, &state, cost_tol)
        } else {
            first_negative(cost, &u, &v, &state, cost_tol)
        };
        let Some((p, q)) = entering else { break };
        if pivots == limit {
            return Err(Error::NoConvergence(limit));
        }
        let step = state.pivot(p, q, mass_tol);
        pivots += 1;
        if step == 0.0 {
            degenerate_run += 1;
        } else {
            degenerate_run = 0;
        }
    }

    let mut flow = vec![0.0; m * n];
    let mut total = 0.0;
    for &(i, j) in &state.cells {
        let f = state.flow[i * n + j];
        flow[i * n + j] = f;
        total += f * cost.get(i, j);
    }
    Ok(TransportPlan {
        cost: total,
        flow: FlowMatrix::from_raw(m, n, flow),
        pivots,
    })
}

fn most_negative(
    cost: &CostMatrix,
    u: &[f64],
    v: &[f64],
    basis: &Basis,
    tol: f64,
) -> Option<(usize, usize)> {
    let mut best = None;
    let mut best_r = -tol;
    for (i, &ui) in u.iter().enumerate().take(basis.m) {
        for (j, &vj) in v.iter().enumerate().take(basis.n) {
            if basis.is_basic[i * basis.n + j] {
                continue;
            }
            let r = cost.get(i, j) - ui - vj;
            if r < best_r {
                best_r = r;
                best = Some((i, j));
            }
        }
    }
    best
}

fn first_negative(
    cost: &CostMatrix,
    u: &[f64],
    v: &[f64],
    basis: &Basis,
    tol: f64,
) -> Option<(usize, usize)> {
    (0..basis.m)
        .flat_map(|i| (0..basis.n).map(move |j| (i, j)))
        .find(|&(i, j)| !basis.is_basic[i * basis.n + j] && cost.get(i, j) - u[i] - v[j] < -tol)
}

struct Basis {
    m: usize,
    n: usize,
    flow: Vec<f64>,
    is_basic: Vec<bool>,
    cells: Vec<(usize, usize)>,
}

impl Basis {
    fn northwest_corner(supply: &[f64], demand: &[f64], tol: f64) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut flow = vec![0.0; m * n];
        let mut is_basic = vec![false; m * n];
        let mut cells = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = s[i].min(d[j]).max(0.0);
            flow[i * n + j] = x;
            is_basic[i * n + j] = true;
            cells.push((i, j));
            s[i] -= x;
            d[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            // advance exactly one index per cell so the basis has m + n - 1 cells
            let row_done = s[i] <= tol;
            if (row_done && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(cells.len(), m + n - 1);
        Self {
            m,
            n,
            flow,
            is_basic,
            cells,
        }
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        // nodes 0..m are rows, m..m+n are columns; edge payload is the cell
        let mut adj = vec![Vec::new(); self.m + self.n];
        for &(i, j) in &self.cells {
            adj[i].push((self.m + j, i * self.n + j));
            adj[self.m + j].push((i, i * self.n + j));
        }
        adj
    }

    fn potentials(&self, cost: &CostMatrix) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let total = self.m + self.n;
        let mut pot = vec![f64::NAN; total];
        let mut queue = VecDeque::new();
        pot[0] = 0.0;
        queue.push_back(0);
        while let Some(node) = queue.pop_front() {
            for &(next, cell) in &adj[node] {
                if pot[next].is_nan() {
                    let c = cost.data()[cell];
                    // u_i + v_j = c_ij
                    pot[next] = c - pot[node];
                    queue.push_back(next);
                }
            }
        }
        debug_assert!(pot.iter().all(|p| !p.is_nan()), "basis is not spanning");
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Brings `(p, q)` into the basis; returns the flow shifted around the cycle.
    fn pivot(&mut self, p: usize, q: usize, tol: f64) -> f64 {
        let n = self.n;
        let path = self.tree_path(self.m + q, p);
        // path runs from column q to row p; cells alternate -, +, -, ...
        let mut theta = f64::INFINITY;
        for &cell in path.iter().step_by(2) {
            theta = theta.min(self.flow[cell]);
        }
        let mut leaving = usize::MAX;
        for &cell in path.iter().step_by(2) {
            if self.flow[cell] - theta <= tol && cell < leaving {
                leaving = cell;
            }
        }
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                self.flow[cell] = (self.flow[cell] - theta).max(0.0);
            } else {
                self.flow[cell] += theta;
            }
        }
        self.flow[leaving] = 0.0;
        self.flow[p * n + q] = theta;
        self.is_basic[leaving] = false;
        self.is_basic[p * n + q] = true;
        let pos = self
            .cells
            .iter()
            .position(|&(i, j)| i * n + j == leaving)
            .expect("leaving cell is basic");
        self.cells[pos] = (p, q);
        theta
    }

    /// Cells on the unique tree path between two nodes.
    fn tree_path(&self, from: usize, to: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut visited = vec![false; self.m + self.n];
        let mut queue = VecDeque::from([from]);
        visited[from] = true;
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &(next, cell) in &adj[node] {
                if !visited[next] {
                    visited[next] = true;
                    parent[next] = Some((node, cell));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = to;
        while let Some((prev, cell)) = parent[node] {
            path.push(cell);
            node = prev;
        }
        path.reverse();
        path
    }
}
