//! Concentration bounds for choosing `δ` from samples.
//!
//! With `μ_n` the empirical measure of `n` samples, `G₀(μ_∞, ν)` lies,
//! with probability at least `1 − 2ρ`, within `ε(n, ρ, ζ, K_λ) + q_k` of
//! `G_δ(μ_n, ν)`, where
//!
//! ```text
//! ε = √(log(1/ρ)/2n) + 4ζK_λ
//!     + (8√2 K_λ/√n) ∫_{ζ/4}^{4 diam} √( N(ξ/4) · log(2⌈2 diam/ξ⌉ + 1) ) dξ
//! q_k = λδ                              (k = 1, λ > L(c̃))
//!     = (2 L(c̃)^{k/(k−1)} + 1) δ^{1/k}  (k > 1, λ = δ^{−(k−1)/k})
//! ```
//!
//! and `N(ξ)` is a `ξ`-covering number of the sample space. Every value
//! here is an upper bound; nothing claims tightness.

mod quadrature;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, SQRT_2};

use crate::cost::{lipschitz_k, CostSpec};
use crate::error::{Error, Result};
use quadrature::integrate_piecewise;

/// Relative accuracy of the chaining integrals.
pub const INTEGRAL_REL_TOL: f64 = 1e-8;

/// A covering-number bound `ξ ↦ N(S, d, ξ)`.
pub trait CoveringNumber {
    fn covering(&self, xi: f64) -> f64;

    /// Appends the points of `(lo, hi)` where `covering` may jump.
    fn jumps(&self, _lo: f64, _hi: f64, _out: &mut Vec<f64>) {}
}

impl<F: Fn(f64) -> f64> CoveringNumber for F {
    fn covering(&self, xi: f64) -> f64 {
        self(xi)
    }
}

/// The cube `[0, 1]^dim` under the Euclidean metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitCube {
    pub dim: u32,
}

impl UnitCube {
    pub fn diameter(self) -> f64 {
        libm::sqrt(self.dim as f64)
    }

    /// A constant `H` with `covering(ξ) ≤ H / ξ^d` for every `ξ ≤ diameter`.
    ///
    /// From `⌈√d/(2ξ)⌉ + 1 ≤ √d/(2ξ) + 2 ≤ (5√d/2)/ξ`.
    pub fn h_constant(self) -> f64 {
        libm::pow(2.5 * self.diameter(), self.dim as f64)
    }
}

impl CoveringNumber for UnitCube {
    fn covering(&self, xi: f64) -> f64 {
        covering_unit_cube(self.dim, xi)
    }

    fn jumps(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        // ⌈√d/(2ξ)⌉ changes where √d/(2ξ) is an integer j.
        let half = 0.5 * self.diameter();
        if lo <= 0.0 {
            return;
        }
        let first = libm::ceil(half / hi).max(1.0) as u64;
        let last = libm::floor(half / lo) as u64;
        out.extend((first..=last).map(|j| half / j as f64));
    }
}

/// `(⌈√d/(2ξ)⌉ + 1)^d`: balls of radius `ξ` centered on a grid of cubes of
/// side `2ξ/√d` cover `[0, 1]^d`.
pub fn covering_unit_cube(dim: u32, xi: f64) -> f64 {
    let per_axis = libm::ceil(libm::sqrt(dim as f64) / (2.0 * xi)) + 1.0;
    libm::pow(per_axis, dim as f64)
}

/// Inputs of the bound for `c = d^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs<C> {
    pub n: u64,
    /// Failure probability.
    pub rho: f64,
    /// Chaining cut-off.
    pub zeta: f64,
    /// Metric power of `c`.
    pub k: f64,
    pub delta: f64,
    /// The multiplier the bound is evaluated at.
    pub lambda: f64,
    pub k_lambda: f64,
    /// `L(c̃)`.
    pub l_ctilde: f64,
    pub diameter: f64,
    pub covering: C,
}

impl BoundInputs<UnitCube> {
    /// Inputs on `[0, 1]^dim` with `c = d^k`, `c̃ = d` (so `L(c̃) = 1`).
    ///
    /// For `k > 1`, `λ = δ^{−(k−1)/k}`. For `k = 1`, `lambda` must be
    /// supplied and exceed `L(c̃)`.
    pub fn unit_cube(
        dim: u32,
        n: u64,
        rho: f64,
        zeta: f64,
        k: f64,
        delta: f64,
        lambda: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be positive".into()));
        }
        let cube = UnitCube { dim };
        let ctilde = CostSpec::EUCLIDEAN;
        let l_ctilde = ctilde.lipschitz(cube.diameter())?;
        let lambda = if k > 1.0 {
            if !(delta > 0.0) {
                return Err(Error::InvalidParameter(
                    "k > 1 needs delta > 0 (lambda = delta^(-(k-1)/k))".into(),
                ));
            }
            lambda_for_power(k, delta)
        } else {
            lambda
                .ok_or_else(|| Error::InvalidParameter("k = 1 needs an explicit lambda".into()))?
        };
        let k_lambda = lipschitz_k(CostSpec::EuclideanPower(k), ctilde, lambda, cube.diameter())?;
        let inputs = Self {
            n,
            rho,
            zeta,
            k,
            delta,
            lambda,
            k_lambda,
            l_ctilde,
            diameter: cube.diameter(),
            covering: cube,
        };
        inputs.validate()?;
        Ok(inputs)
    }
}

/// `λ = δ^{−(k−1)/k}`.
pub fn lambda_for_power(k: f64, delta: f64) -> f64 {
    libm::pow(delta, -(k - 1.0) / k)
}

impl<C: CoveringNumber> BoundInputs<C> {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return bad("zeta must be positive");
        }
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return bad("diameter must be positive and finite");
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return bad("k must be at least 1");
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad("delta must be nonnegative");
        }
        if !(self.k_lambda >= 0.0 && self.k_lambda.is_finite()) {
            return bad("K_lambda must be nonnegative and finite");
        }
        Ok(())
    }

    fn log_factor_jumps(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        // ⌈2 diam/ξ⌉ changes where 2 diam/ξ is an integer j.
        let span = 2.0 * self.diameter;
        let first = libm::ceil(span / hi).max(1.0) as u64;
        let last = libm::floor(span / lo) as u64;
        out.extend((first..=last).map(|j| span / j as f64));
    }

    fn breakpoints(&self, lo: f64, hi: f64, scale: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.log_factor_jumps(lo, hi, &mut out);
        let start = out.len();
        self.covering.jumps(lo / scale, hi / scale, &mut out);
        for x in &mut out[start..] {
            *x *= scale;
        }
        out
    }

    fn log_factor(&self, xi: f64) -> f64 {
        libm::log(2.0 * libm::ceil(2.0 * self.diameter / xi) + 1.0)
    }

    /// `∫_{ζ/4}^{4 diam} √( N(ξ/4) · log(2⌈2 diam/ξ⌉ + 1) ) dξ`.
    pub fn entropy_integral(&self) -> f64 {
        let (lo, hi) = (self.zeta / 4.0, 4.0 * self.diameter);
        if lo >= hi {
            return 0.0;
        }
        let f = |xi: f64| libm::sqrt(self.covering.covering(xi / 4.0) * self.log_factor(xi));
        integrate_piecewise(
            &f,
            lo,
            hi,
            &mut self.breakpoints(lo, hi, 4.0),
            INTEGRAL_REL_TOL,
        )
    }

    /// `∫_{ζ/4}^{2 diam} √( N(ξ/2) · log 2 + log(2⌈2 diam/ξ⌉ + 1) ) dξ`.
    pub fn entropy_integral_refined(&self) -> f64 {
        let (lo, hi) = (self.zeta / 4.0, 2.0 * self.diameter);
        if lo >= hi {
            return 0.0;
        }
        let f = |xi: f64| libm::sqrt(self.covering.covering(xi / 2.0) * LN_2 + self.log_factor(xi));
        integrate_piecewise(
            &f,
            lo,
            hi,
            &mut self.breakpoints(lo, hi, 2.0),
            INTEGRAL_REL_TOL,
        )
    }

    fn terms(&self, integral: f64) -> EpsilonTerms {
        let n = self.n as f64;
        EpsilonTerms {
            concentration: libm::sqrt(libm::log(1.0 / self.rho) / (2.0 * n)),
            truncation: 4.0 * self.zeta * self.k_lambda,
            chaining: 8.0 * SQRT_2 * self.k_lambda / libm::sqrt(n) * integral,
        }
    }
}

/// The three summands of `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonTerms {
    /// `√(log(1/ρ)/2n)`.
    pub concentration: f64,
    /// `4ζK_λ`.
    pub truncation: f64,
    /// `(8√2 K_λ/√n) · integral`; zero when the integration range is empty.
    pub chaining: f64,
}

impl EpsilonTerms {
    pub fn total(&self) -> f64 {
        self.concentration + self.truncation + self.chaining
    }
}

pub fn epsilon_terms<C: CoveringNumber>(inputs: &BoundInputs<C>) -> Result<EpsilonTerms> {
    inputs.validate()?;
    Ok(inputs.terms(inputs.entropy_integral()))
}

pub fn epsilon_terms_refined<C: CoveringNumber>(inputs: &BoundInputs<C>) -> Result<EpsilonTerms> {
    inputs.validate()?;
    Ok(inputs.terms(inputs.entropy_integral_refined()))
}

/// `ε(n, ρ, ζ, K_λ)`.
///
/// When `ζ/4 ≥ 4 diam` the integral is empty and only the first two terms remain.
pub fn epsilon_bound<C: CoveringNumber>(inputs: &BoundInputs<C>) -> Result<f64> {
    Ok(epsilon_terms(inputs)?.total())
}

/// The tighter `ε` for connected, centered sample spaces: integral up to
/// `2 diam`, covering at `ξ/2`, and the log terms split.
pub fn epsilon_bound_refined<C: CoveringNumber>(inputs: &BoundInputs<C>) -> Result<f64> {
    Ok(epsilon_terms_refined(inputs)?.total())
}

/// The bias `q_k` of the relaxation.
pub fn q_term(k: f64, delta: f64, lambda: f64, l_ctilde: f64) -> Result<f64> {
    if !(k >= 1.0 && k.is_finite()) || !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need k >= 1 and delta >= 0, got k = {k}, delta = {delta}"
        )));
    }
    if k == 1.0 {
        if !(lambda > l_ctilde) {
            return Err(Error::InvalidParameter(format!(
                "k = 1 needs lambda > L(c~) = {l_ctilde}, got {lambda}"
            )));
        }
        Ok(lambda * delta)
    } else {
        let lead = 2.0 * libm::pow(l_ctilde, k / (k - 1.0)) + 1.0;
        Ok(lead * libm::pow(delta, 1.0 / k))
    }
}

/// A confidence-interval radius around `G_δ(μ_n, ν)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub epsilon: f64,
    pub q_k: f64,
    /// `ε + q_k`.
    pub radius: f64,
    pub lambda_used: f64,
    pub k_lambda: f64,
    /// `1 − 2ρ`.
    pub coverage: f64,
}

fn report<C: CoveringNumber>(inputs: &BoundInputs<C>, epsilon: f64) -> Result<BoundReport> {
    let q_k = q_term(inputs.k, inputs.delta, inputs.lambda, inputs.l_ctilde)?;
    Ok(BoundReport {
        epsilon,
        q_k,
        radius: epsilon + q_k,
        lambda_used: inputs.lambda,
        k_lambda: inputs.k_lambda,
        coverage: 1.0 - 2.0 * inputs.rho,
    })
}

pub fn confidence_radius<C: CoveringNumber>(inputs: &BoundInputs<C>) -> Result<BoundReport> {
    report(inputs, epsilon_bound(inputs)?)
}

pub fn confidence_radius_refined<C: CoveringNumber>(
    inputs: &BoundInputs<C>,
) -> Result<BoundReport> {
    report(inputs, epsilon_bound_refined(inputs)?)
}

/// The power-law form of `ε` for a space with `N(ξ) ≤ H/ξ^d`, `d > 2`:
///
/// ```text
/// √(log(1/ρ)/n) + 4ζK + (8√2K/√n)(2^{d/2}√(H log 2)(ζ/4)^{1−d/2}/(d/2 − 1) + 10 diam)
/// ```
pub fn epsilon_power_law(
    n: u64,
    rho: f64,
    zeta: f64,
    dim: u32,
    k_lambda: f64,
    diameter: f64,
    h: f64,
) -> Result<f64> {
    check_power_law(n, rho, dim, k_lambda, diameter, h)?;
    let (n, d) = (n as f64, dim as f64);
    let tail =
        libm::pow(2.0, d / 2.0) * libm::sqrt(h * LN_2) * libm::pow(zeta / 4.0, 1.0 - d / 2.0)
            / (d / 2.0 - 1.0);
    Ok(libm::sqrt(libm::log(1.0 / rho) / n)
        + 4.0 * zeta * k_lambda
        + 8.0 * SQRT_2 * k_lambda / libm::sqrt(n) * (tail + 10.0 * diameter))
}

fn check_power_law(n: u64, rho: f64, dim: u32, k_lambda: f64, diameter: f64, h: f64) -> Result<()> {
    if dim <= 2 {
        return Err(Error::InvalidParameter(format!(
            "the optimized-zeta bound needs d > 2, got {dim}"
        )));
    }
    if n == 0 || !(rho > 0.0 && rho < 1.0) || !(k_lambda >= 0.0) || !(diameter > 0.0) || !(h > 0.0)
    {
        return Err(Error::InvalidParameter(
            "need n >= 1, 0 < rho < 1, K >= 0, diameter > 0, H > 0".into(),
        ));
    }
    Ok(())
}

/// `ζ = 8 (8 log 2 · H / n)^{1/d}`, the cut-off at which
/// [`optimized_zeta_bound`] equals [`epsilon_power_law`].
pub fn optimized_zeta(n: u64, dim: u32, h: f64) -> f64 {
    8.0 * libm::pow(8.0 * LN_2 * h / n as f64, 1.0 / dim as f64)
}

/// Summands of [`optimized_zeta_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedTerms {
    /// `√(log(1/ρ)/n)`.
    pub concentration: f64,
    /// The two `n^{−1/d}` terms.
    pub rate: f64,
    /// `80√2 diam K/√n`.
    pub diameter: f64,
}

impl OptimizedTerms {
    pub fn total(&self) -> f64 {
        self.concentration + self.rate + self.diameter
    }
}

pub fn optimized_zeta_terms(
    n: u64,
    rho: f64,
    dim: u32,
    k_lambda: f64,
    diameter: f64,
    h: f64,
) -> Result<OptimizedTerms> {
    check_power_law(n, rho, dim, k_lambda, diameter, h)?;
    let (nf, d) = (n as f64, dim as f64);
    let base = 8.0 * LN_2 * h;
    let rate = 32.0 * k_lambda * libm::pow(base / nf, 1.0 / d)
        + 8.0 * k_lambda * libm::pow(base, 1.0 / d) / ((d / 2.0 - 1.0) * libm::pow(nf, 1.0 / d));
    Ok(OptimizedTerms {
        concentration: libm::sqrt(libm::log(1.0 / rho) / nf),
        rate,
        diameter: 80.0 * SQRT_2 * diameter * k_lambda / libm::sqrt(nf),
    })
}

/// `ε` with the cut-off chosen to balance the `ζ` terms, exhibiting the `n^{−1/d}` rate:
///
/// ```text
/// √(log(1/ρ)/n) + 32K(8 log 2 · H/n)^{1/d}
///   + 8K(8 log 2 · H)^{1/d}/((d/2 − 1) n^{1/d}) + 80√2 diam K/√n
/// ```
pub fn optimized_zeta_bound(
    n: u64,
    rho: f64,
    dim: u32,
    k_lambda: f64,
    diameter: f64,
    h: f64,
) -> Result<f64> {
    Ok(optimized_zeta_terms(n, rho, dim, k_lambda, diameter, h)?.total())
}
