//! The relaxed transport cost
//! `G_δ(μ₀, ν) = min { D_c̃(μ, ν) : D_c(μ₀, μ) ≤ δ }`.
//!
//! Computed through the convex scalar dual
//! `g(λ) = λδ + max_π E_π[h(W, Y, λ)]`, `G_δ = −min_{λ ≥ 0} g(λ)`.
//! One-sided derivatives of `g` are `δ + min/max_{π ∈ Π*(λ)} E_π[∂h/∂λ]`,
//! where `Π*(λ)` is the set of payoff-maximizing couplings; the generic
//! solver bisects on their sign.

use alloc::format;
use alloc::vec::Vec;

use crate::cost::{CostPair, CostSpec};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::ot::{optimal_plan_set_range, solve_ot, CostMatrix, TransportPlan};

/// Default width of the final λ bracket.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Cap on `g` evaluations in the generic solver.
pub const MAX_ITERATIONS: usize = 200;
/// Plan entries at or below this mass are not mapped.
pub const MAP_MASS_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedProblem {
    pub mu0: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub delta: f64,
    /// Cost between the relaxed measure and `ν`.
    pub ctilde: CostSpec,
    /// Cost defining the ball around `μ₀`.
    pub c: CostSpec,
}

impl RelaxedProblem {
    pub fn new(
        mu0: DiscreteMeasure,
        nu: DiscreteMeasure,
        delta: f64,
        ctilde: CostSpec,
        c: CostSpec,
    ) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite and nonnegative, got {delta}"
            )));
        }
        if mu0.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu0.dim(),
                found: nu.dim(),
            });
        }
        ctilde.validate()?;
        c.validate()?;
        Ok(Self {
            mu0,
            nu,
            delta,
            ctilde,
            c,
        })
    }

    /// Both costs equal to `spec`.
    pub fn symmetric(
        mu0: DiscreteMeasure,
        nu: DiscreteMeasure,
        delta: f64,
        spec: CostSpec,
    ) -> Result<Self> {
        Self::new(mu0, nu, delta, spec, spec)
    }

    pub fn pair(&self) -> Result<CostPair> {
        CostPair::from_specs(self.ctilde, self.c)
    }

    fn plain_cost(&self) -> Result<CostMatrix> {
        CostMatrix::from_measures(&self.mu0, &self.nu, self.ctilde)
    }
}

/// `g` and its one-sided derivatives at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GEvaluation {
    pub lambda: f64,
    pub g_value: f64,
    /// Left derivative `δ + min_{Π*} E[∂⁻h/∂λ]`.
    pub deriv_lo: f64,
    /// Right derivative `δ + max_{Π*} E[∂⁺h/∂λ]`.
    pub deriv_hi: f64,
    /// A payoff-maximizing coupling of `μ₀` (rows) and `ν` (columns).
    pub plan: TransportPlan,
}

impl GEvaluation {
    fn brackets_zero(&self) -> bool {
        self.deriv_lo <= 0.0 && self.deriv_hi >= 0.0
    }
}

/// One transported unit of the relaxed map: `ν`-atom `y_idx` is matched to
/// `μ₀`-atom `w_idx` and lands at `xstar`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapEntry {
    pub y_idx: usize,
    pub w_idx: usize,
    pub xstar: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    /// `G_δ(μ₀, ν) ≥ 0`.
    pub value: f64,
    /// Optimal multiplier. Infinite when `δ = 0` (the ball is `{μ₀}`).
    pub lambda_star: f64,
    /// Unrelaxed cost `G₀(μ₀, ν) = D_c̃(μ₀, ν)`.
    pub g0: f64,
    /// `π_{λ*}` between `μ₀` (rows) and `ν` (columns).
    pub plan: TransportPlan,
    pub map_points: Vec<MapEntry>,
    pub g_left_deriv: f64,
    pub g_right_deriv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed form when the cost pair has one, λ-search otherwise.
    #[default]
    Auto,
    Generic,
    Closed,
}

struct PairMatrices {
    payoff: CostMatrix,
    left: CostMatrix,
    right: CostMatrix,
}

fn pair_matrices(problem: &RelaxedProblem, pair: CostPair, lambda: f64) -> Result<PairMatrices> {
    let (m, n) = (problem.mu0.len(), problem.nu.len());
    let mut payoff = Vec::with_capacity(m * n);
    let mut left = Vec::with_capacity(m * n);
    let mut right = Vec::with_capacity(m * n);
    for w in problem.mu0.points() {
        for y in problem.nu.points() {
            let h = pair.h(w, y, lambda);
            payoff.push(h.value);
            left.push(h.dvalue_left);
            right.push(h.dvalue_dlambda);
        }
    }
    Ok(PairMatrices {
        payoff: CostMatrix::new(m, n, payoff)?,
        left: CostMatrix::new(m, n, left)?,
        right: CostMatrix::new(m, n, right)?,
    })
}

/// Evaluates `g(λ) = λδ + max_π E_π[h(W, Y, λ)]` and its one-sided derivatives.
pub fn eval_g(problem: &RelaxedProblem, lambda: f64) -> Result<GEvaluation> {
    let pair = problem.pair()?;
    eval_g_pair(problem, pair, lambda)
}

fn eval_g_pair(problem: &RelaxedProblem, pair: CostPair, lambda: f64) -> Result<GEvaluation> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let mats = pair_matrices(problem, pair, lambda)?;
    let range = optimal_plan_set_range(
        &problem.mu0,
        &problem.nu,
        &mats.payoff,
        &mats.left,
        &mats.right,
    )?;
    let delta = problem.delta;
    Ok(GEvaluation {
        lambda,
        g_value: lambda * delta + range.plan.value,
        deriv_lo: delta + range.min,
        deriv_hi: delta + range.max,
        plan: range.plan,
    })
}

/// `δ = 0`: the ball is `{μ₀}` and `G₀` is plain transport under `c̃`.
fn solve_plain(problem: &RelaxedProblem) -> Result<RelaxedSolution> {
    let plan = solve_ot(&problem.mu0, &problem.nu, &problem.plain_cost()?)?;
    let value = plan.value.max(0.0);
    let mut solution = RelaxedSolution {
        value,
        lambda_star: f64::INFINITY,
        g0: value,
        plan,
        map_points: Vec::new(),
        g_left_deriv: 0.0,
        g_right_deriv: 0.0,
    };
    solution.map_points = recover_map(&solution, problem)?;
    Ok(solution)
}

/// Minimizes `g` over `λ ≥ 0` by bisection on the sign of its derivative bracket.
///
/// The upper end starts at 1 and doubles until the left derivative is
/// nonnegative; bisection then stops once the bracket is narrower than `tol`
/// or a midpoint has `0 ∈ [g'₋, g'₊]`.
pub fn solve_relaxed_generic(problem: &RelaxedProblem, tol: f64) -> Result<RelaxedSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    if problem.delta == 0.0 {
        return solve_plain(problem);
    }
    let pair = problem.pair()?;
    let g0 = solve_ot(&problem.mu0, &problem.nu, &problem.plain_cost()?)?.value;
    let mut evaluations = 0usize;
    let mut eval = |lambda: f64| -> Result<GEvaluation> {
        evaluations += 1;
        if evaluations > MAX_ITERATIONS {
            return Err(Error::NonConvergence(format!(
                "lambda search exceeded {MAX_ITERATIONS} evaluations"
            )));
        }
        eval_g_pair(problem, pair, lambda)
    };

    let at_zero = eval(0.0)?;
    let best = if at_zero.deriv_hi >= 0.0 {
        at_zero
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut found = None;
        loop {
            let e = eval(hi)?;
            if e.brackets_zero() {
                found = Some(e);
                break;
            }
            if e.deriv_lo > 0.0 {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        while found.is_none() && hi - lo >= tol {
            let mid = 0.5 * (lo + hi);
            let e = eval(mid)?;
            if e.deriv_lo > 0.0 {
                hi = mid;
            } else if e.deriv_hi < 0.0 {
                lo = mid;
            } else {
                found = Some(e);
            }
        }
        match found {
            Some(e) => e,
            None => eval(0.5 * (lo + hi))?,
        }
    };

    let mut solution = RelaxedSolution {
        value: (-best.g_value).max(0.0),
        lambda_star: best.lambda,
        g0,
        plan: best.plan,
        map_points: Vec::new(),
        g_left_deriv: best.deriv_lo,
        g_right_deriv: best.deriv_hi,
    };
    solution.map_points = recover_map(&solution, problem)?;
    Ok(solution)
}

/// Order-1 costs: `G_δ = max(G₀ − δ, 0)`, with `λ* = 1` when `G₀ > δ` and 0 otherwise.
pub fn solve_relaxed_order1(problem: &RelaxedProblem) -> Result<RelaxedSolution> {
    if problem.pair()? != CostPair::Order1 {
        return Err(Error::NoClosedForm);
    }
    let plan = solve_ot(&problem.mu0, &problem.nu, &problem.plain_cost()?)?;
    let (g0, delta) = (plan.value.max(0.0), problem.delta);
    let (lambda_star, left, right) = if g0 > delta {
        (1.0, delta - g0, delta)
    } else {
        (0.0, delta - g0, delta - g0)
    };
    let mut solution = RelaxedSolution {
        value: (g0 - delta).max(0.0),
        lambda_star,
        g0,
        plan,
        map_points: Vec::new(),
        g_left_deriv: left,
        g_right_deriv: right,
    };
    solution.map_points = recover_map(&solution, problem)?;
    Ok(solution)
}

/// Quadratic costs: with `H₀ = min_π E‖W − Y‖²`, `λ* = (√(H₀/δ) − 1)⁺` and
/// `G_δ = (√H₀ − √δ)²` when `H₀ > δ`, else 0.
pub fn solve_relaxed_quadratic(problem: &RelaxedProblem) -> Result<RelaxedSolution> {
    if problem.pair()? != CostPair::Quadratic {
        return Err(Error::NoClosedForm);
    }
    if problem.delta == 0.0 {
        return solve_plain(problem);
    }
    let plan = solve_ot(&problem.mu0, &problem.nu, &problem.plain_cost()?)?;
    let (h0, delta) = (plan.value.max(0.0), problem.delta);
    let lambda_star = (libm::sqrt(h0 / delta) - 1.0).max(0.0);
    let value = quadratic_value(h0, delta);
    let slope = delta - h0 / ((1.0 + lambda_star) * (1.0 + lambda_star));
    let mut solution = RelaxedSolution {
        value,
        lambda_star,
        g0: h0,
        plan,
        map_points: Vec::new(),
        g_left_deriv: slope,
        g_right_deriv: slope,
    };
    solution.map_points = recover_map(&solution, problem)?;
    Ok(solution)
}

/// `(√H₀ − √δ)²₊`.
pub fn quadratic_value(h0: f64, delta: f64) -> f64 {
    if h0 > delta {
        let d = libm::sqrt(h0) - libm::sqrt(delta);
        d * d
    } else {
        0.0
    }
}

/// Dispatches to a closed form or the λ-search.
pub fn solve_relaxed(problem: &RelaxedProblem, method: Method) -> Result<RelaxedSolution> {
    let closed = |pair: CostPair| match pair {
        CostPair::Quadratic => solve_relaxed_quadratic(problem),
        CostPair::Order1 => solve_relaxed_order1(problem),
        CostPair::MetricPower { .. } => Err(Error::NoClosedForm),
    };
    match method {
        Method::Generic => solve_relaxed_generic(problem, DEFAULT_TOL),
        Method::Closed => match problem.pair() {
            Ok(pair) => closed(pair),
            Err(_) => Err(Error::NoClosedForm),
        },
        Method::Auto => {
            if problem.delta == 0.0 {
                return solve_plain(problem);
            }
            let pair = problem.pair()?;
            if pair.has_closed_form() {
                closed(pair)
            } else {
                solve_relaxed_generic(problem, DEFAULT_TOL)
            }
        }
    }
}

/// Two-step map recovery: each `ν`-atom `y` is matched to `w` through
/// `π_{λ*}`, then moved to `x*(w, y, λ*)`.
///
/// With `λ* = ∞` (`δ = 0`) the map is the identity on `μ₀`'s atoms.
pub fn recover_map(solution: &RelaxedSolution, problem: &RelaxedProblem) -> Result<Vec<MapEntry>> {
    let lambda = solution.lambda_star;
    let pair = if lambda.is_finite() {
        Some(problem.pair()?)
    } else {
        None
    };
    Ok(solution
        .plan
        .support(MAP_MASS_THRESHOLD)
        .map(|(i, j, mass)| {
            let w = problem.mu0.point(i);
            let xstar = match pair {
                Some(pair) => pair.h(w, problem.nu.point(j), lambda).xstar,
                None => w.to_vec(),
            };
            MapEntry {
                y_idx: j,
                w_idx: i,
                xstar,
                mass,
            }
        })
        .collect())
}

/// The relaxed measure `μ*`: mass of each map entry placed at its `x*`.
pub fn pushforward(map: &[MapEntry], dim: usize) -> Result<DiscreteMeasure> {
    let points = map.iter().flat_map(|e| e.xstar.iter().copied()).collect();
    let weights = map.iter().map(|e| e.mass).collect();
    DiscreteMeasure::new(dim, points, weights)
}
