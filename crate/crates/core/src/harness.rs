//! Estimation experiment on the Gaussian factor model.
//!
//! Per replication, `ν` is an empirical standard normal and `μ₀` an
//! empirical factor-model measure, both with `base_samples` atoms. For each
//! `n`, `μ̂_n` resamples `μ₀` and the experiment records `G₀(μ̂_n, ν)`,
//! `G_{δ_n}(μ̂_n, ν)` with `δ_n = n^{−delta_exponent}`, and `G₀(μ₀, ν)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::cost::{CostPair, CostSpec};
use crate::error::{Error, Result};
use crate::measure::{
    derive_seed, resample, sample_factor_model, sample_standard_normal, FactorModelParams,
};
use crate::ot::{solve_ot, CostMatrix};
use crate::otr::{quadratic_value, solve_relaxed, Method, RelaxedProblem};
use crate::DiscreteMeasure;

const ROLE_NU: u64 = 0;
const ROLE_MU0: u64 = 1;
const ROLE_RESAMPLE: u64 = 2;

pub const ROWS_HEADER: &str = "n,rep,delta_n,g0_emp,gdelta_emp,g0_ref";
pub const SUMMARY_HEADER: &str =
    "n,count,delta_n,g0_emp_mean,g0_emp_sd,gdelta_emp_mean,gdelta_emp_sd,g0_ref_mean,g0_ref_sd,closer_fraction";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub base_samples: usize,
    /// Factor-model loading.
    pub rho: f64,
    /// Strictly increasing sample sizes.
    pub n_grid: Vec<usize>,
    pub delta_exponent: f64,
    pub replications: usize,
    pub seed: u64,
    /// Used for both `c` and `c̃`.
    pub cost: CostSpec,
    /// When false, `μ̂_n` is `μ₀` itself and `n` only sets `δ_n`.
    pub resample: bool,
}

impl ExperimentConfig {
    /// Small enough to run in seconds.
    pub fn desk() -> Self {
        Self {
            dim: 3,
            base_samples: 50,
            rho: 0.8,
            n_grid: alloc::vec![10, 20, 40, 80],
            delta_exponent: 0.45,
            replications: 50,
            seed: 7,
            cost: CostSpec::SquaredEuclidean,
            resample: true,
        }
    }

    /// Full-size setting: 20 dimensions, 300 atoms.
    pub fn paper() -> Self {
        Self {
            dim: 20,
            base_samples: 300,
            n_grid: alloc::vec![10, 20, 50, 100, 200, 300],
            replications: 20,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.dim == 0 || self.base_samples == 0 {
            return bad("dim and base_samples must be positive".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return bad("n_grid must be nonempty with positive entries".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "n_grid must be strictly increasing, got {:?}",
                self.n_grid
            ));
        }
        if !self.delta_exponent.is_finite() {
            return bad("delta_exponent must be finite".into());
        }
        CostPair::from_specs(self.cost, self.cost)?;
        FactorModelParams {
            dim: self.dim,
            rho: self.rho,
            n_samples: self.base_samples,
            seed: 0,
        }
        .validate()
    }

    pub fn delta_n(&self, n: usize) -> f64 {
        libm::pow(n as f64, -self.delta_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub replication: usize,
    /// `G₀(μ̂_n, ν)`.
    pub g0_empirical: f64,
    /// `G_{δ_n}(μ̂_n, ν)`.
    pub g_delta_empirical: f64,
    /// `G₀(μ₀, ν)`.
    pub g0_reference: f64,
    pub delta_n: f64,
}

fn relaxed_value(
    config: &ExperimentConfig,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    g0: f64,
    delta: f64,
) -> Result<f64> {
    if CostPair::from_specs(config.cost, config.cost)? == CostPair::Quadratic {
        return Ok(quadratic_value(g0, delta));
    }
    let problem = RelaxedProblem::symmetric(mu.clone(), nu.clone(), delta, config.cost)?;
    Ok(solve_relaxed(&problem, Method::Auto)?.value)
}

/// All rows of one replication, in `n_grid` order.
pub fn run_replication(
    config: &ExperimentConfig,
    replication: usize,
) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let rep = replication as u64;
    let nu = sample_standard_normal(
        config.dim,
        config.base_samples,
        derive_seed(config.seed, &[rep, ROLE_NU]),
    )?;
    let mu0 = sample_factor_model(&FactorModelParams {
        dim: config.dim,
        rho: config.rho,
        n_samples: config.base_samples,
        seed: derive_seed(config.seed, &[rep, ROLE_MU0]),
    })?;
    let g0_reference = solve_ot(
        &mu0,
        &nu,
        &CostMatrix::from_measures(&mu0, &nu, config.cost)?,
    )?
    .value;

    config
        .n_grid
        .iter()
        .map(|&n| {
            let delta_n = config.delta_n(n);
            let (g0_empirical, g_delta_empirical) = if config.resample {
                let mu_n = resample(
                    &mu0,
                    n,
                    derive_seed(config.seed, &[rep, ROLE_RESAMPLE, n as u64]),
                )?;
                let g0 = solve_ot(
                    &mu_n,
                    &nu,
                    &CostMatrix::from_measures(&mu_n, &nu, config.cost)?,
                )?
                .value;
                (g0, relaxed_value(config, &mu_n, &nu, g0, delta_n)?)
            } else {
                (
                    g0_reference,
                    relaxed_value(config, &mu0, &nu, g0_reference, delta_n)?,
                )
            };
            Ok(ExperimentRow {
                n,
                replication,
                g0_empirical,
                g_delta_empirical,
                g0_reference,
                delta_n,
            })
        })
        .collect()
}

/// Orders rows by `(replication, n)`.
pub fn sort_rows(rows: &mut [ExperimentRow]) {
    rows.sort_by_key(|r| (r.replication, r.n));
}

/// Runs every replication sequentially.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.replications * config.n_grid.len());
    for rep in 0..config.replications {
        rows.extend(run_replication(config, rep)?);
    }
    sort_rows(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
}

impl MeanSd {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let count = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / count;
        let sd = if count > 1.0 {
            libm::sqrt(values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0))
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub count: usize,
    pub delta_n: f64,
    pub g0_empirical: MeanSd,
    pub g_delta_empirical: MeanSd,
    pub g0_reference: MeanSd,
    /// Share of replications where `G_δ` lands closer to the reference than `G₀` does.
    pub closer_fraction: f64,
}

/// Per-`n` statistics, ordered by `n`.
pub fn summarize(rows: &[ExperimentRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Empty("experiment rows"));
    }
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    Ok(ns
        .into_iter()
        .map(|n| {
            let group = rows.iter().filter(move |r| r.n == n);
            let count = group.clone().count();
            let closer = group
                .clone()
                .filter(|r| {
                    libm::fabs(r.g_delta_empirical - r.g0_reference)
                        < libm::fabs(r.g0_empirical - r.g0_reference)
                })
                .count();
            SummaryRow {
                n,
                count,
                delta_n: group.clone().next().map_or(0.0, |r| r.delta_n),
                g0_empirical: MeanSd::of(group.clone().map(|r| r.g0_empirical)),
                g_delta_empirical: MeanSd::of(group.clone().map(|r| r.g_delta_empirical)),
                g0_reference: MeanSd::of(group.map(|r| r.g0_reference)),
                closer_fraction: closer as f64 / count as f64,
            }
        })
        .collect())
}

/// CSV with header [`ROWS_HEADER`]; floats use shortest round-trip formatting.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(ROWS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n, r.replication, r.delta_n, r.g0_empirical, r.g_delta_empirical, r.g0_reference
        );
    }
    out
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.n,
            s.count,
            s.delta_n,
            s.g0_empirical.mean,
            s.g0_empirical.sd,
            s.g_delta_empirical.mean,
            s.g_delta_empirical.sd,
            s.g0_reference.mean,
            s.g0_reference.sd,
            s.closer_fraction
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            dim: 2,
            base_samples: 12,
            n_grid: vec![4, 8, 16],
            replications: 3,
            ..ExperimentConfig::desk()
        }
    }

    #[test]
    fn identity_resampling_reproduces_reference() {
        let config = ExperimentConfig {
            n_grid: vec![12],
            replications: 1,
            resample: false,
            ..small()
        };
        let rows = run_experiment(&config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].g0_empirical, rows[0].g0_reference);
    }

    #[test]
    fn rows_respect_relaxation_order_and_closed_form() {
        for r in run_experiment(&small()).unwrap() {
            assert!(r.g_delta_empirical <= r.g0_empirical);
            let closed = quadratic_value(r.g0_empirical, r.delta_n);
            assert!((r.g_delta_empirical - closed).abs() <= 1e-9);
        }
    }

    #[test]
    fn order1_cost_uses_threshold() {
        let config = ExperimentConfig {
            cost: CostSpec::EUCLIDEAN,
            ..small()
        };
        for r in run_experiment(&config).unwrap() {
            assert!((r.g_delta_empirical - (r.g0_empirical - r.delta_n).max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn adding_grid_points_keeps_rows() {
        let a = run_experiment(&small()).unwrap();
        let b = run_experiment(&ExperimentConfig {
            n_grid: vec![4, 6, 8, 16],
            ..small()
        })
        .unwrap();
        for r in &a {
            assert!(b.contains(r));
        }
    }

    #[test]
    fn deterministic_csv() {
        let a = rows_to_csv(&run_experiment(&small()).unwrap());
        let b = rows_to_csv(&run_experiment(&small()).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with(ROWS_HEADER));
        assert_eq!(a.lines().count(), 1 + 9);
    }

    #[test]
    fn invalid_configs() {
        for config in [
            ExperimentConfig {
                n_grid: vec![],
                ..small()
            },
            ExperimentConfig {
                n_grid: vec![8, 4],
                ..small()
            },
            ExperimentConfig {
                replications: 0,
                ..small()
            },
            ExperimentConfig {
                rho: 1.5,
                ..small()
            },
            ExperimentConfig {
                cost: CostSpec::EuclideanPower(3.0),
                ..small()
            },
        ] {
            assert!(run_experiment(&config).is_err());
        }
    }

    fn row(n: usize, g0: f64, gd: f64, reference: f64) -> ExperimentRow {
        ExperimentRow {
            n,
            replication: 0,
            g0_empirical: g0,
            g_delta_empirical: gd,
            g0_reference: reference,
            delta_n: 0.1,
        }
    }

    #[test]
    fn summary_single_and_identical_rows() {
        let s = summarize(&[row(5, 2.0, 1.0, 1.5)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].g0_empirical, MeanSd { mean: 2.0, sd: 0.0 });
        assert_eq!(s[0].g_delta_empirical.mean, 1.0);
        assert_eq!(s[0].closer_fraction, 0.0);

        let same = vec![row(5, 2.0, 1.8, 1.5); 4];
        let s = summarize(&same).unwrap();
        assert_eq!(s[0].g0_empirical.sd, 0.0);
        assert_eq!(s[0].closer_fraction, 1.0);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summary_groups_by_n() {
        let rows = [
            row(10, 1.0, 0.5, 0.7),
            row(5, 3.0, 2.0, 1.0),
            row(10, 3.0, 2.5, 0.7),
        ];
        let s = summarize(&rows).unwrap();
        assert_eq!(s.iter().map(|r| r.n).collect::<Vec<_>>(), vec![5, 10]);
        assert_eq!(s[1].count, 2);
        assert_eq!(s[1].g0_empirical.mean, 2.0);
        assert!((s[1].g0_empirical.sd - libm::sqrt(2.0)).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&s[1].closer_fraction));
        let csv = summary_to_csv(&s);
        assert_eq!(csv.lines().count(), 3);
    }
}
