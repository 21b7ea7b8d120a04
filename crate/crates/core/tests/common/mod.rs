//! Independent oracles shared by the integration tests. Nothing here calls
//! the simplex engine.

#![allow(dead_code)]

use otrelax::ot::{CostMatrix, TransportPlan};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let drift = 1.0 - w.iter().sum::<f64>();
    w[n - 1] += drift;
    w
}

pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize, spread: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| rng.random_range(-spread..spread))
                .collect()
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Birkhoff: for uniform n×n marginals the optimum is attained at a
/// permutation matrix scaled by 1/n.
pub fn permutation_oracle(cost: &CostMatrix) -> f64 {
    let n = cost.rows();
    assert_eq!(n, cost.cols());
    permutations(n)
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(i, &j)| cost.get(i, j))
                .sum::<f64>()
                / n as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        let pivot_row = a[col].clone();
        for r in col + 1..n {
            let f = a[r][col] / pivot_row[col];
            if f != 0.0 {
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

/// Minimum of the transportation LP by enumerating all basic feasible
/// solutions: every choice of m+n−1 cells whose constraint columns are
/// independent, solved densely, kept if nonnegative.
pub fn vertex_enumeration_oracle(a: &[f64], b: &[f64], cost: &CostMatrix) -> f64 {
    let (m, n) = (a.len(), b.len());
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    for cells in combinations(m * n, k) {
        // Constraints: all m row sums and the first n−1 column sums.
        let mut mat = vec![vec![0.0; k]; k];
        let mut rhs = vec![0.0; k];
        rhs[..m].copy_from_slice(a);
        rhs[m..m + n - 1].copy_from_slice(&b[..n - 1]);
        for (col, &cell) in cells.iter().enumerate() {
            let (i, j) = (cell / n, cell % n);
            mat[i][col] = 1.0;
            if j < n - 1 {
                mat[m + j][col] = 1.0;
            }
        }
        let Some(x) = solve_dense(mat, rhs) else {
            continue;
        };
        if x.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let value: f64 = cells
            .iter()
            .zip(&x)
            .map(|(&cell, &v)| v * cost.get(cell / n, cell % n))
            .sum();
        best = best.min(value);
    }
    best
}

/// Primal feasibility, dual feasibility, complementary slackness and strong duality.
pub fn assert_certificate(plan: &TransportPlan, a: &[f64], b: &[f64], cost: &CostMatrix) {
    for (s, w) in plan.row_sums().iter().zip(a) {
        assert!((s - w).abs() <= 1e-8, "row sum {s} vs {w}");
    }
    for (s, w) in plan.col_sums().iter().zip(b) {
        assert!((s - w).abs() <= 1e-8, "column sum {s} vs {w}");
    }
    for i in 0..a.len() {
        for j in 0..b.len() {
            let gap = cost.get(i, j) - plan.dual_alpha[i] - plan.dual_beta[j];
            assert!(gap >= -1e-7, "dual infeasible at ({i},{j}): {gap}");
            if plan.mass(i, j) > 1e-12 {
                assert!(gap.abs() <= 1e-7, "slackness at ({i},{j}): {gap}");
            }
        }
    }
    let dual = plan.dual_value(a, b);
    assert!(
        (dual - plan.value).abs() <= 1e-7,
        "duality gap {}",
        dual - plan.value
    );
}

pub fn random_measure(
    rng: &mut impl Rng,
    n: usize,
    dim: usize,
    spread: f64,
) -> otrelax::DiscreteMeasure {
    let points = random_points(rng, n, dim, spread);
    otrelax::DiscreteMeasure::from_points(&points, random_weights(rng, n)).unwrap()
}

/// A random instance with 1..=`max_atoms` atoms per side in 1..=3 dimensions.
pub fn random_problem(
    rng: &mut impl Rng,
    max_atoms: usize,
    delta: f64,
    spec: otrelax::CostSpec,
) -> otrelax::RelaxedProblem {
    let dim = rng.random_range(1..=3);
    let m = rng.random_range(1..=max_atoms);
    let n = rng.random_range(1..=max_atoms);
    let mu0 = random_measure(rng, m, dim, 2.0);
    let nu = random_measure(rng, n, dim, 2.0);
    otrelax::RelaxedProblem::symmetric(mu0, nu, delta, spec).unwrap()
}

/// Kahan-summed composite trapezoid rule on a uniform grid.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let (mut sum, mut carry) = (0.5 * (f(a) + f(b)), 0.0);
    for i in 1..cells {
        let y = f(a + i as f64 * h) - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum * h
}

fn cover(d: u32, xi: f64) -> f64 {
    let m = ((d as f64).sqrt() / (2.0 * xi)).ceil() + 1.0;
    m.powi(d as i32)
}

/// `ε` on `[0, 1]^d` by a 3·10⁷-cell trapezoid rule.
pub fn epsilon_oracle(d: u32, n: u64, rho: f64, zeta: f64, k: f64, refined: bool) -> f64 {
    let diam = (d as f64).sqrt();
    let log_factor = |xi: f64| (2.0 * (2.0 * diam / xi).ceil() + 1.0).ln();
    let integral = if refined {
        trapezoid(
            |xi| (cover(d, xi / 2.0) * 2f64.ln() + log_factor(xi)).sqrt(),
            zeta / 4.0,
            2.0 * diam,
            30_000_000,
        )
    } else {
        trapezoid(
            |xi| (cover(d, xi / 4.0) * log_factor(xi)).sqrt(),
            zeta / 4.0,
            4.0 * diam,
            30_000_000,
        )
    };
    let n = n as f64;
    ((1.0 / rho).ln() / (2.0 * n)).sqrt()
        + 4.0 * zeta * k
        + 8.0 * 2f64.sqrt() * k / n.sqrt() * integral
}
