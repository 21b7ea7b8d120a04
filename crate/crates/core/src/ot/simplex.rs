//! Transportation simplex (MODI) on the `m × n` transportation polytope.
//!
//! A basis is a spanning tree of the bipartite graph on `m` row nodes and
//! `n` column nodes, i.e. `m + n − 1` basic cells. Node `i < m` is row `i`,
//! node `m + j` is column `j`.
//!
//! Supplies are perturbed by `ε` each and the last demand by `mε`, which keeps
//! every basis nondegenerate in exact arithmetic. Pricing is Dantzig's rule;
//! whenever a pivot is degenerate anyway (rounding), the engine switches to
//! Bland's rule (lowest-index entering and leaving cells) until the next
//! nondegenerate pivot. Final flows are recomputed on the optimal tree with
//! the unperturbed weights.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Supply perturbation per row.
pub(crate) const PERTURBATION: f64 = 1e-12;
/// Reduced-cost threshold for entering cells, relative to `max(1, max |c|)`.
pub(crate) const OPTIMALITY_TOL: f64 = 1e-9;
const NO_CELL: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    supply: Vec<f64>,
    demand: Vec<f64>,
    /// Basic cells (row-major index) and their flows.
    basis: Vec<usize>,
    flow: Vec<f64>,
    /// `position[cell]` is the slot of `cell` in `basis`, or `NO_CELL`.
    position: Vec<usize>,
    pub(crate) u: Vec<f64>,
    pub(crate) v: Vec<f64>,
    // Scratch space for tree walks.
    adjacency: Vec<Vec<(usize, usize)>>,
    parent: Vec<(usize, usize)>,
}

impl Simplex {
    /// Northwest-corner basis for the perturbed weights.
    pub(crate) fn new(supply: &[f64], demand: &[f64]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut supply: Vec<f64> = supply.iter().map(|a| a + PERTURBATION).collect();
        let mut demand = demand.to_vec();
        demand[n - 1] += m as f64 * PERTURBATION;
        // Absorb the residual imbalance of the inputs into the last column.
        let imbalance = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
        demand[n - 1] += imbalance;
        if demand[n - 1] < 0.0 {
            supply[m - 1] -= demand[n - 1];
            demand[n - 1] = 0.0;
        }

        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        let (mut rows_total, mut cols_total) = (supply[0], demand[0]);
        loop {
            basis.push(i * n + j);
            if i == m - 1 && j == n - 1 {
                break;
            }
            // Row i is exhausted no later than column j.
            let row_done = j == n - 1 || (i < m - 1 && rows_total <= cols_total);
            if row_done {
                i += 1;
                rows_total += supply[i];
            } else {
                j += 1;
                cols_total += demand[j];
            }
        }
        let mut position = vec![NO_CELL; m * n];
        for (slot, &cell) in basis.iter().enumerate() {
            position[cell] = slot;
        }
        let mut s = Self {
            m,
            n,
            supply,
            demand,
            flow: vec![0.0; basis.len()],
            basis,
            position,
            u: vec![0.0; m],
            v: vec![0.0; n],
            adjacency: vec![Vec::new(); m + n],
            parent: vec![(NO_CELL, NO_CELL); m + n],
        };
        let (supply, demand) = (s.supply.clone(), s.demand.clone());
        s.flow = s.tree_flows(&supply, &demand);
        s
    }

    pub(crate) fn basis(&self) -> &[usize] {
        &self.basis
    }

    fn build_adjacency(&mut self) {
        for list in self.adjacency.iter_mut() {
            list.clear();
        }
        for (slot, &cell) in self.basis.iter().enumerate() {
            let (i, j) = (cell / self.n, cell % self.n);
            self.adjacency[i].push((self.m + j, slot));
            self.adjacency[self.m + j].push((i, slot));
        }
    }

    /// Flows on the current tree that meet the given margins exactly
    /// (up to the last node, which absorbs any imbalance).
    pub(crate) fn tree_flows(&mut self, supply: &[f64], demand: &[f64]) -> Vec<f64> {
        self.build_adjacency();
        let nodes = self.m + self.n;
        let mut remaining: Vec<f64> = supply.iter().chain(demand).copied().collect();
        let mut degree: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        let mut used = vec![false; self.basis.len()];
        let mut flow = vec![0.0; self.basis.len()];
        let mut leaves: VecDeque<usize> = (0..nodes).filter(|&k| degree[k] == 1).collect();
        while let Some(leaf) = leaves.pop_front() {
            if degree[leaf] != 1 {
                continue;
            }
            let Some(&(other, slot)) = self.adjacency[leaf].iter().find(|(_, s)| !used[*s]) else {
                continue;
            };
            used[slot] = true;
            flow[slot] = remaining[leaf];
            remaining[other] -= remaining[leaf];
            remaining[leaf] = 0.0;
            degree[leaf] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                leaves.push_back(other);
            }
        }
        flow
    }

    /// Potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
    fn compute_potentials(&mut self, cost: &[f64]) {
        self.build_adjacency();
        let nodes = self.m + self.n;
        let mut seen = vec![false; nodes];
        let mut stack = vec![0usize];
        seen[0] = true;
        self.u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for k in 0..self.adjacency[node].len() {
                let (other, slot) = self.adjacency[node][k];
                if seen[other] {
                    continue;
                }
                seen[other] = true;
                let c = cost[self.basis[slot]];
                if other >= self.m {
                    self.v[other - self.m] = c - self.u[node];
                } else {
                    self.u[other] = c - self.v[node - self.m];
                }
                stack.push(other);
            }
        }
    }

    /// Basic cells on the tree path from column node of `col` to row `row`,
    /// in order starting at the column end.
    fn tree_path(&mut self, row: usize, col: usize) -> Vec<usize> {
        for p in self.parent.iter_mut() {
            *p = (NO_CELL, NO_CELL);
        }
        self.parent[row] = (row, NO_CELL);
        let mut queue = VecDeque::from([row]);
        let target = self.m + col;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &(other, slot) in &self.adjacency[node] {
                if self.parent[other].0 == NO_CELL {
                    self.parent[other] = (node, slot);
                    queue.push_back(other);
                }
            }
        }
        debug_assert!(self.parent[target].0 != NO_CELL);
        let mut path = Vec::new();
        let mut node = target;
        while node != row {
            let (prev, slot) = self.parent[node];
            path.push(slot);
            node = prev;
        }
        path
    }

    /// Runs primal simplex pivots until no allowed cell has a negative reduced cost.
    ///
    /// `allowed`, when given, restricts which nonbasic cells may enter; every
    /// basic cell must already be allowed.
    pub(crate) fn optimize(&mut self, cost: &[f64], allowed: Option<&[bool]>) -> Result<()> {
        let scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let tol = OPTIMALITY_TOL * scale;
        let max_pivots = 50 * (self.m * self.n) + 1000;
        let mut bland = false;
        for _ in 0..max_pivots {
            self.compute_potentials(cost);
            let Some(entering) = self.price(cost, allowed, tol, bland) else {
                return Ok(());
            };
            let (row, col) = (entering / self.n, entering % self.n);
            let path = self.tree_path(row, col);
            // Path cells alternate −, +, −, ... starting at the column end.
            let mut leaving_k = NO_CELL;
            let mut theta = f64::INFINITY;
            for (k, &slot) in path.iter().enumerate().step_by(2) {
                let f = self.flow[slot];
                let better =
                    f < theta || (f == theta && self.basis[slot] < self.basis[path[leaving_k]]);
                if better {
                    theta = f;
                    leaving_k = k;
                }
            }
            let theta = theta.max(0.0);
            for (k, &slot) in path.iter().enumerate() {
                if k % 2 == 0 {
                    self.flow[slot] -= theta;
                } else {
                    self.flow[slot] += theta;
                }
            }
            let slot = path[leaving_k];
            let leaving = self.basis[slot];
            self.position[leaving] = NO_CELL;
            self.basis[slot] = entering;
            self.flow[slot] = theta;
            self.position[entering] = slot;
            bland = theta <= PERTURBATION * 1e-3;
        }
        Err(Error::NonConvergence(format!(
            "transportation simplex exceeded {max_pivots} pivots on a {}x{} problem",
            self.m, self.n
        )))
    }

    fn price(
        &self,
        cost: &[f64],
        allowed: Option<&[bool]>,
        tol: f64,
        bland: bool,
    ) -> Option<usize> {
        let mut best = None;
        let mut best_rc = -tol;
        for i in 0..self.m {
            let base = i * self.n;
            for j in 0..self.n {
                let cell = base + j;
                if self.position[cell] != NO_CELL {
                    continue;
                }
                if let Some(mask) = allowed {
                    if !mask[cell] {
                        continue;
                    }
                }
                let rc = cost[cell] - self.u[i] - self.v[j];
                if rc < best_rc {
                    if bland {
                        return Some(cell);
                    }
                    best_rc = rc;
                    best = Some(cell);
                }
            }
        }
        best
    }

    /// Reduced costs `c_ij − u_i − v_j` for the potentials of the last
    /// `optimize` call.
    pub(crate) fn reduced_costs(&mut self, cost: &[f64]) -> Vec<f64> {
        self.compute_potentials(cost);
        let mut rc = vec![0.0; self.m * self.n];
        for i in 0..self.m {
            for j in 0..self.n {
                let cell = i * self.n + j;
                rc[cell] = cost[cell] - self.u[i] - self.v[j];
            }
        }
        rc
    }

    /// Dense plan on the current basis for the unperturbed margins.
    pub(crate) fn dense_plan(&mut self, supply: &[f64], demand: &[f64]) -> Vec<f64> {
        let flows = self.tree_flows(supply, demand);
        let mut mass = vec![0.0; self.m * self.n];
        for (&cell, &f) in self.basis.iter().zip(&flows) {
            mass[cell] = f.max(0.0);
        }
        mass
    }

    pub(crate) fn potentials(&mut self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.compute_potentials(cost);
        (self.u.clone(), self.v.clone())
    }
}
