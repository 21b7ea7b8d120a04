//! Exact discrete optimal transport.
//!
//! Solves `min { Σ π_ij C_ij : π ≥ 0, π 1 = a, πᵀ 1 = b }` with the
//! transportation simplex and returns the optimal basic plan together with
//! dual potentials `(α, β)` satisfying `α_i + β_j ≤ C_ij`, with equality on
//! the support of the plan.

mod simplex;

use alloc::vec::Vec;

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, NORMALIZATION_TOL};
use simplex::{Simplex, OPTIMALITY_TOL};

/// Row/column-sum accuracy of returned plans.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// A dense `rows × cols` matrix of finite costs (or payoffs), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("cost matrix"));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("cost matrix"));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, entries)
    }

    /// `C_ij = c(x_i, y_j)` for atoms `x_i` of `mu` and `y_j` of `nu`.
    pub fn from_measures(
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        spec: CostSpec,
    ) -> Result<Self> {
        spec.validate()?;
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                found: nu.dim(),
            });
        }
        Self::from_fn(mu.len(), nu.len(), |i, j| {
            spec.eval_unchecked(mu.point(i), nu.point(j))
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.rows * self.cols)
            .map(|k| self.get(k % self.rows, k / self.rows))
            .collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|c| -c).collect(),
        }
    }
}

/// An optimal coupling with its objective value and dual certificate.
///
/// For plans returned by [`solve_ot`], `α_i + β_j ≤ C_ij`; for
/// [`solve_ot_max`] the inequality is reversed (`α_i + β_j ≥ payoff_ij`).
/// In both cases `Σ a_i α_i + Σ b_j β_j` equals `value`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    pub mass: Vec<f64>,
    pub value: f64,
    pub dual_alpha: Vec<f64>,
    pub dual_beta: Vec<f64>,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mass
            .chunks_exact(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.cols];
        for row in self.mass.chunks_exact(self.cols) {
            for (s, m) in sums.iter_mut().zip(row) {
                *s += m;
            }
        }
        sums
    }

    /// `Σ a_i α_i + Σ b_j β_j`.
    pub fn dual_value(&self, a: &[f64], b: &[f64]) -> f64 {
        let alpha: f64 = a.iter().zip(&self.dual_alpha).map(|(w, p)| w * p).sum();
        let beta: f64 = b.iter().zip(&self.dual_beta).map(|(w, p)| w * p).sum();
        alpha + beta
    }

    /// `E_π[M] = Σ π_ij M_ij`.
    pub fn expectation(&self, matrix: &CostMatrix) -> f64 {
        dot(&self.mass, matrix.entries())
    }

    /// Cells carrying more than `threshold` mass, as `(i, j, mass)`.
    pub fn support(&self, threshold: f64) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.cols;
        self.mass
            .iter()
            .enumerate()
            .filter(move |(_, &m)| m > threshold)
            .map(move |(k, &m)| (k / cols, k % cols, m))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_weights(w: &[f64], what: &'static str) -> Result<()> {
    if w.is_empty() {
        return Err(Error::Empty(what));
    }
    let mut sum = 0.0;
    for (index, &weight) in w.iter().enumerate() {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidWeight { index, weight });
        }
        sum += weight;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Unnormalized { sum });
    }
    Ok(())
}

fn check_shapes(a: &[f64], b: &[f64], cost: &CostMatrix) -> Result<()> {
    check_weights(a, "source weights")?;
    check_weights(b, "target weights")?;
    if cost.rows != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: cost.rows,
        });
    }
    if cost.cols != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            found: cost.cols,
        });
    }
    Ok(())
}

fn finish(mut simplex: Simplex, a: &[f64], b: &[f64], cost: &CostMatrix) -> TransportPlan {
    let mass = simplex.dense_plan(a, b);
    let (dual_alpha, dual_beta) = simplex.potentials(cost.entries());
    TransportPlan {
        rows: a.len(),
        cols: b.len(),
        value: dot(&mass, cost.entries()),
        mass,
        dual_alpha,
        dual_beta,
    }
}

/// Minimum-cost coupling of two weight vectors.
pub fn solve_ot_weights(a: &[f64], b: &[f64], cost: &CostMatrix) -> Result<TransportPlan> {
    check_shapes(a, b, cost)?;
    let mut simplex = Simplex::new(a, b);
    simplex.optimize(cost.entries(), None)?;
    Ok(finish(simplex, a, b, cost))
}

/// `min_{π ∈ Π(μ, ν)} Σ π_ij C_ij`.
pub fn solve_ot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostMatrix,
) -> Result<TransportPlan> {
    solve_ot_weights(mu.weights(), nu.weights(), cost)
}

/// `max_{π ∈ Π(μ, ν)} Σ π_ij P_ij`, solved as the minimum of `−P`.
pub fn solve_ot_max(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    payoff: &CostMatrix,
) -> Result<TransportPlan> {
    solve_ot_max_weights(mu.weights(), nu.weights(), payoff)
}

pub fn solve_ot_max_weights(a: &[f64], b: &[f64], payoff: &CostMatrix) -> Result<TransportPlan> {
    let mut plan = solve_ot_weights(a, b, &payoff.negated())?;
    negate_plan(&mut plan);
    Ok(plan)
}

fn negate_plan(plan: &mut TransportPlan) {
    plan.value = -plan.value;
    plan.dual_alpha.iter_mut().for_each(|x| *x = -*x);
    plan.dual_beta.iter_mut().for_each(|x| *x = -*x);
}

/// Which end of the range of a secondary functional to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

/// Result of [`optimal_plan_set_range`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSetRange {
    /// One optimal plan of the primary maximization.
    pub plan: TransportPlan,
    /// `min_{π ∈ Π*} E_π[lower]`.
    pub min: f64,
    /// `max_{π ∈ Π*} E_π[upper]`.
    pub max: f64,
}

/// Over the set `Π*` of payoff-maximizing plans, the minimum of `E_π[lower]`
/// and the maximum of `E_π[upper]`.
///
/// `Π*` is the face of the transportation polytope on which every plan is
/// supported by cells with zero reduced cost under an optimal dual. The
/// secondary problems are re-solved from the optimal basis with entering
/// cells restricted to that support, which is a lexicographic re-optimization.
pub fn optimal_plan_set_range_weights(
    a: &[f64],
    b: &[f64],
    payoff: &CostMatrix,
    lower: &CostMatrix,
    upper: &CostMatrix,
) -> Result<PlanSetRange> {
    check_shapes(a, b, payoff)?;
    for m in [lower, upper] {
        if m.rows != payoff.rows || m.cols != payoff.cols {
            return Err(Error::DimensionMismatch {
                expected: payoff.entries.len(),
                found: m.entries.len(),
            });
        }
    }
    let neg = payoff.negated();
    let mut simplex = Simplex::new(a, b);
    simplex.optimize(neg.entries(), None)?;

    let scale = neg.entries().iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
    let tol = OPTIMALITY_TOL * scale;
    let mut allowed: Vec<bool> = simplex
        .reduced_costs(neg.entries())
        .iter()
        .map(|&rc| rc <= tol)
        .collect();
    for &cell in simplex.basis() {
        allowed[cell] = true;
    }

    let mut low = simplex.clone();
    low.optimize(lower.entries(), Some(&allowed))?;
    let min = dot(&low.dense_plan(a, b), lower.entries());

    let mut high = simplex.clone();
    high.optimize(upper.negated().entries(), Some(&allowed))?;
    let max = dot(&high.dense_plan(a, b), upper.entries());

    let mut plan = finish(simplex, a, b, &neg);
    negate_plan(&mut plan);
    Ok(PlanSetRange { plan, min, max })
}

pub fn optimal_plan_set_range(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    payoff: &CostMatrix,
    lower: &CostMatrix,
    upper: &CostMatrix,
) -> Result<PlanSetRange> {
    optimal_plan_set_range_weights(mu.weights(), nu.weights(), payoff, lower, upper)
}

/// The min or max of `E_π[direction]` over the payoff-maximizing plans.
pub fn optimal_plan_set_extremes(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    payoff: &CostMatrix,
    direction: &CostMatrix,
    extreme: Extreme,
) -> Result<f64> {
    let range = optimal_plan_set_range(mu, nu, payoff, direction, direction)?;
    Ok(match extreme {
        Extreme::Min => range.min,
        Extreme::Max => range.max,
    })
}
