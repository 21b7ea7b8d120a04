//! Discrete probability measures on `R^d`.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Allowed deviation of the total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A weighted point cloud `Σ w_i δ_{x_i}` in `R^dim`.
///
/// Atoms are stored row-major in one flat buffer. Duplicate atoms are kept
/// as separate entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from a flat coordinate buffer of `weights.len() * dim` values.
    ///
    /// Weights are validated, never renormalized.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::Empty("measure has no atoms"));
        }
        if points.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * dim,
                found: points.len(),
            });
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("atom coordinates"));
        }
        let mut sum = 0.0;
        for (index, &weight) in weights.iter().enumerate() {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidWeight { index, weight });
            }
            sum += weight;
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { sum });
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    /// Builds a measure from one vector per atom.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P], weights: Vec<f64>) -> Result<Self> {
        let dim = uniform_dim(points)?;
        let flat = points
            .iter()
            .flat_map(|p| p.as_ref().iter().copied())
            .collect();
        Self::new(dim, flat, weights)
    }

    /// The single-atom measure `δ_x`.
    pub fn dirac(x: &[f64]) -> Result<Self> {
        Self::new(x.len(), x.to_vec(), alloc::vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// Flat row-major coordinates.
    pub fn coordinates(&self) -> &[f64] {
        &self.points
    }

    /// Shifts every atom by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: offset.len(),
            });
        }
        let points = self
            .points
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        Ok(Self {
            dim: self.dim,
            points,
            weights: self.weights.clone(),
        })
    }
}

fn uniform_dim<P: AsRef<[f64]>>(points: &[P]) -> Result<usize> {
    let first = points.first().ok_or(Error::Empty("no samples"))?;
    let dim = first.as_ref().len();
    for p in points {
        if p.as_ref().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.as_ref().len(),
            });
        }
    }
    Ok(dim)
}

/// The empirical measure `n⁻¹ Σ δ_{X_i}`, atoms kept in input order.
pub fn empirical_from_samples<P: AsRef<[f64]>>(samples: &[P]) -> Result<DiscreteMeasure> {
    uniform_dim(samples)?;
    let n = samples.len();
    DiscreteMeasure::from_points(samples, uniform_weights(n))
}

fn uniform_weights(n: usize) -> Vec<f64> {
    alloc::vec![1.0 / n as f64; n]
}

/// Parameters of the correlated Gaussian factor model
/// `X_i = ρ R_i + (1 − ρ²)^{1/2} T`, with `R_1..R_dim, T` i.i.d. `N(0, 1)`.
///
/// Distinct components have correlation `1 − ρ²`: `ρ = 0` makes all
/// components equal, `ρ = 1` makes them independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorModelParams {
    pub dim: usize,
    pub rho: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl FactorModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.n_samples == 0 {
            return Err(Error::InvalidParameter(
                "dim and n_samples must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(alloc::format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Draws `n_samples` atoms from the factor model, with uniform weights.
pub fn sample_factor_model(params: &FactorModelParams) -> Result<DiscreteMeasure> {
    params.validate()?;
    let FactorModelParams {
        dim,
        rho,
        n_samples,
        seed,
    } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared_scale = libm::sqrt(1.0 - rho * rho);
    let mut points = Vec::with_capacity(dim * n_samples);
    let mut r = alloc::vec![0.0; dim];
    for _ in 0..n_samples {
        for ri in r.iter_mut() {
            *ri = StandardNormal.sample(&mut rng);
        }
        let t: f64 = StandardNormal.sample(&mut rng);
        points.extend(r.iter().map(|ri| rho * ri + shared_scale * t));
    }
    DiscreteMeasure::new(dim, points, uniform_weights(n_samples))
}

/// Empirical measure of `n_samples` draws from `N(0, I_dim)`.
pub fn sample_standard_normal(dim: usize, n_samples: usize, seed: u64) -> Result<DiscreteMeasure> {
    if dim == 0 || n_samples == 0 {
        return Err(Error::InvalidParameter(
            "dim and n_samples must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..dim * n_samples)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    DiscreteMeasure::new(dim, points, uniform_weights(n_samples))
}

/// Empirical measure of `n` i.i.d. draws (with replacement) from the atoms of `mu`.
pub fn resample(mu: &DiscreteMeasure, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "resample size must be positive".into(),
        ));
    }
    let index = WeightedIndex::new(mu.weights())
        .map_err(|e| Error::InvalidParameter(alloc::format!("{e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n * mu.dim());
    for _ in 0..n {
        points.extend_from_slice(mu.point(index.sample(&mut rng)));
    }
    DiscreteMeasure::new(mu.dim(), points, uniform_weights(n))
}

/// Derives an independent seed for a sub-stream identified by `path`.
///
/// Each component is absorbed through a SplitMix64 finalizer, so seeds for
/// distinct paths are decorrelated and adding new paths never changes
/// existing ones.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut state = mix64(base ^ 0x243f_6a88_85a3_08d3);
    for &part in path {
        state = mix64(
            state
                .wrapping_add(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(mix64(part)),
        );
    }
    state
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
