//! Ground costs `d^k` and closed forms of the per-pair payoff
//! `h(w, y, λ) = sup_x { −c̃(x, y) − λ c(x, w) }`.
//!
//! Three cost pairs admit a closed-form inner supremum:
//!
//! | pair                      | `c̃`      | `c`      |
//! |---------------------------|----------|----------|
//! | [`CostPair::Quadratic`]   | `‖·‖²`   | `‖·‖²`   |
//! | [`CostPair::Order1`]      | `‖·‖`    | `‖·‖`    |
//! | [`CostPair::MetricPower`] | `‖·‖`    | `‖·‖^k`  |
//!
//! No general-purpose inner optimizer is provided.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// A Euclidean ground cost raised to a power `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostSpec {
    EuclideanPower(f64),
    /// Same numbers as `EuclideanPower(2.0)`.
    SquaredEuclidean,
}

impl CostSpec {
    pub const EUCLIDEAN: CostSpec = CostSpec::EuclideanPower(1.0);

    pub fn power(self) -> f64 {
        match self {
            CostSpec::EuclideanPower(k) => k,
            CostSpec::SquaredEuclidean => 2.0,
        }
    }

    pub fn validate(self) -> Result<()> {
        let k = self.power();
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cost power must be a finite k >= 1, got {k}"
            )));
        }
        Ok(())
    }

    /// `‖x − y‖₂^k`.
    pub fn eval(self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(self, x: &[f64], y: &[f64]) -> f64 {
        let sq = squared_distance(x, y);
        let k = self.power();
        if k == 2.0 {
            sq
        } else if k == 1.0 {
            libm::sqrt(sq)
        } else {
            libm::pow(libm::sqrt(sq), k)
        }
    }

    /// Lipschitz constant of `d^k` on a set of the given diameter: `k · diam^{k−1}`.
    pub fn lipschitz(self, diameter: f64) -> Result<f64> {
        self.validate()?;
        let k = self.power();
        if k == 1.0 {
            return Ok(1.0);
        }
        if !diameter.is_finite() || diameter < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "d^{k} is Lipschitz only on bounded sets; diameter {diameter} given"
            )));
        }
        Ok(k * libm::pow(diameter, k - 1.0))
    }
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CostSpec::SquaredEuclidean => f.write_str("sqeuclid"),
            CostSpec::EuclideanPower(1.0) => f.write_str("euclid"),
            CostSpec::EuclideanPower(k) => write!(f, "power:{k}"),
        }
    }
}

/// Parses `euclid`, `sqeuclid` or `power:K`.
impl FromStr for CostSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = match s {
            "euclid" => CostSpec::EUCLIDEAN,
            "sqeuclid" => CostSpec::SquaredEuclidean,
            other => {
                let k = other
                    .strip_prefix("power:")
                    .and_then(|k| k.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown cost '{other}' (expected euclid, sqeuclid or power:K)"
                        ))
                    })?;
                CostSpec::EuclideanPower(k)
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `eval_cost(spec, x, y) = ‖x − y‖^k`.
pub fn eval_cost(spec: CostSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.eval(x, y)
}

pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// The inner supremum at one `(w, y, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HValue {
    /// `h(w, y, λ) = −c̃(x*, y) − λ c(x*, w)`.
    pub value: f64,
    /// Right derivative `∂⁺h/∂λ = −c(x*, w)`; always `≤ 0`.
    pub dvalue_dlambda: f64,
    /// Left derivative `∂⁻h/∂λ`. Differs from the right one only where the
    /// maximizer jumps (order-1 costs at `λ = 1`).
    pub dvalue_left: f64,
    /// The maximizer `x*(w, y, λ)`.
    pub xstar: Vec<f64>,
}

/// Quadratic pair: `h = −λ/(1+λ) ‖w − y‖²`, `x* = (y + λw)/(1+λ)`.
pub fn h_quadratic(w: &[f64], y: &[f64], lambda: f64) -> HValue {
    let scale = 1.0 / (1.0 + lambda);
    let xstar: Vec<f64> = w
        .iter()
        .zip(y)
        .map(|(wi, yi)| (yi + lambda * wi) * scale)
        .collect();
    let sq = squared_distance(w, y);
    let d = -sq * scale * scale;
    HValue {
        value: -lambda * scale * sq,
        dvalue_dlambda: d,
        dvalue_left: d,
        xstar,
    }
}

/// Order-1 pair: `h = −min(1, λ) ‖w − y‖`. At `λ = 1` the maximizer is taken to be `w`.
pub fn h_order1(w: &[f64], y: &[f64], lambda: f64) -> HValue {
    let dist = libm::sqrt(squared_distance(w, y));
    if lambda >= 1.0 {
        HValue {
            value: -dist,
            dvalue_dlambda: 0.0,
            dvalue_left: if lambda == 1.0 { -dist } else { 0.0 },
            xstar: w.to_vec(),
        }
    } else {
        HValue {
            value: -lambda * dist,
            dvalue_dlambda: -dist,
            dvalue_left: -dist,
            xstar: y.to_vec(),
        }
    }
}

/// Metric/power pair: `c̃ = ‖·‖`, `c = ‖·‖^k` with `k > 1`.
///
/// The maximizer lies on the segment `[w, y]`. With `D = ‖w − y‖` and
/// `t = ‖x − w‖` the problem is `min_{t ∈ [0, D]} (D − t) + λ t^k`, whose
/// stationary point is `t* = (λk)^{−1/(k−1)}`.
pub fn h_metric_power(w: &[f64], y: &[f64], lambda: f64, k: f64) -> Result<HValue> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "metric power needs k > 1, got {k}"
        )));
    }
    let dist = libm::sqrt(squared_distance(w, y));
    let objective = |t: f64| (dist - t) + lambda * libm::pow(t, k);
    let stationary = if lambda > 0.0 {
        libm::pow(lambda * k, -1.0 / (k - 1.0))
    } else {
        f64::INFINITY
    };
    let mut t_opt = stationary.min(dist);
    for candidate in [0.0, dist] {
        if objective(candidate) < objective(t_opt) {
            t_opt = candidate;
        }
    }
    let xstar = if dist > 0.0 {
        let frac = t_opt / dist;
        w.iter()
            .zip(y)
            .map(|(wi, yi)| wi + frac * (yi - wi))
            .collect()
    } else {
        w.to_vec()
    };
    let d = -libm::pow(t_opt, k);
    Ok(HValue {
        value: -objective(t_opt),
        dvalue_dlambda: d,
        dvalue_left: d,
        xstar,
    })
}

/// `K_λ = λ L(c) + L(c̃)`: a Lipschitz constant of `h(·, ·, λ)` in `(w, y)`.
///
/// This sums the per-argument constants, which dominates `max(λ L(c), L(c̃))`.
pub fn lipschitz_k(c: CostSpec, ctilde: CostSpec, lambda: f64, diameter: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let lc = c.lipschitz(diameter)?;
    let lct = ctilde.lipschitz(diameter)?;
    Ok(lambda * lc + lct)
}

/// A `(c̃, c)` combination with a closed-form `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostPair {
    Quadratic,
    Order1,
    MetricPower { k: f64 },
}

impl CostPair {
    pub fn from_specs(ctilde: CostSpec, c: CostSpec) -> Result<Self> {
        ctilde.validate()?;
        c.validate()?;
        match (ctilde.power(), c.power()) {
            (a, b) if a == 2.0 && b == 2.0 => Ok(CostPair::Quadratic),
            (a, b) if a == 1.0 && b == 1.0 => Ok(CostPair::Order1),
            (a, k) if a == 1.0 && k > 1.0 => Ok(CostPair::MetricPower { k }),
            _ => Err(Error::UnsupportedCostPair(format!(
                "c~ = {ctilde}, c = {c}"
            ))),
        }
    }

    pub fn ctilde(self) -> CostSpec {
        match self {
            CostPair::Quadratic => CostSpec::SquaredEuclidean,
            _ => CostSpec::EUCLIDEAN,
        }
    }

    pub fn c(self) -> CostSpec {
        match self {
            CostPair::Quadratic => CostSpec::SquaredEuclidean,
            CostPair::Order1 => CostSpec::EUCLIDEAN,
            CostPair::MetricPower { k } => CostSpec::EuclideanPower(k),
        }
    }

    pub fn h(self, w: &[f64], y: &[f64], lambda: f64) -> HValue {
        match self {
            CostPair::Quadratic => h_quadratic(w, y, lambda),
            CostPair::Order1 => h_order1(w, y, lambda),
            // k > 1 is established by from_specs.
            CostPair::MetricPower { k } => h_metric_power(w, y, lambda, k)
                .unwrap_or_else(|e| unreachable!("{}", e.to_string())),
        }
    }

    /// Whether `G_δ` has a closed form for this pair.
    pub fn has_closed_form(self) -> bool {
        !matches!(self, CostPair::MetricPower { .. })
    }
}

#[cfg(test)]
mod tests {
    extern crate std;

    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn objective(pair: CostPair, x: &[f64], w: &[f64], y: &[f64], lambda: f64) -> f64 {
        -pair.ctilde().eval(x, y).unwrap() - lambda * pair.c().eval(x, w).unwrap()
    }

    const PAIRS: [CostPair; 4] = [
        CostPair::Quadratic,
        CostPair::Order1,
        CostPair::MetricPower { k: 2.0 },
        CostPair::MetricPower { k: 3.0 },
    ];

    #[test]
    fn eval_cost_examples() {
        let o = [0.0, 0.0];
        let p = [3.0, 4.0];
        assert_eq!(eval_cost(CostSpec::EUCLIDEAN, &o, &p).unwrap(), 5.0);
        assert_eq!(
            eval_cost(CostSpec::EuclideanPower(2.0), &o, &p).unwrap(),
            25.0
        );
        assert_eq!(eval_cost(CostSpec::SquaredEuclidean, &o, &p).unwrap(), 25.0);
        for spec in [
            CostSpec::EUCLIDEAN,
            CostSpec::SquaredEuclidean,
            CostSpec::EuclideanPower(3.5),
        ] {
            assert_eq!(spec.eval(&p, &p).unwrap(), 0.0);
        }
        assert!(eval_cost(CostSpec::EUCLIDEAN, &[0.0], &o).is_err());
    }

    #[test]
    fn parse_and_display() {
        for s in ["euclid", "sqeuclid", "power:3"] {
            assert_eq!(s.parse::<CostSpec>().unwrap().to_string(), s);
        }
        assert_eq!("power:1".parse::<CostSpec>().unwrap(), CostSpec::EUCLIDEAN);
        assert!("power:0.5".parse::<CostSpec>().is_err());
        assert!("manhattan".parse::<CostSpec>().is_err());
    }

    #[test]
    fn quadratic_examples() {
        let h = h_quadratic(&[1.0, 2.0], &[1.0, 2.0], 3.0);
        assert_eq!(h.value, 0.0);
        let h = h_quadratic(&[0.0], &[5.0], 0.0);
        assert_eq!(h.value, 0.0);
        assert_eq!(h.xstar, vec![5.0]);
        // sup_x −(x−2)² − x²: maximizer x = 1, value −2, derivative −1.
        let h = h_quadratic(&[0.0], &[2.0], 1.0);
        assert_eq!(h.value, -2.0);
        assert_eq!(h.xstar, vec![1.0]);
        assert_eq!(h.dvalue_dlambda, -1.0);
    }

    #[test]
    fn quadratic_example_against_grid() {
        let best = (0..=10_000)
            .map(|i| -5.0 + i as f64 * 1e-3)
            .map(|x| -(x - 2.0) * (x - 2.0) - x * x)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best - (-2.0)).abs() < 1e-9);
    }

    #[test]
    fn order1_examples() {
        let (w, y) = ([0.0], [3.0]);
        assert_eq!(h_order1(&w, &y, 2.0).value, -3.0);
        assert_eq!(h_order1(&w, &y, 0.5).value, -1.5);
        let tie = h_order1(&w, &y, 1.0);
        assert_eq!(tie.value, -3.0);
        assert_eq!(tie.xstar, vec![0.0]);
        assert_eq!(tie.dvalue_dlambda, 0.0);
        assert_eq!(tie.dvalue_left, -3.0);
    }

    #[test]
    fn metric_power_examples() {
        let h = h_metric_power(&[1.0, 1.0], &[1.0, 1.0], 0.7, 2.5).unwrap();
        assert_eq!(h.value, 0.0);
        let h = h_metric_power(&[0.0], &[1.0], 1.0, 2.0).unwrap();
        assert!((h.value + 0.75).abs() < 1e-15);
        assert!((h.xstar[0] - 0.5).abs() < 1e-15);
        let far = h_metric_power(&[0.0], &[2.0], 1e9, 2.0).unwrap();
        assert!((far.value + 2.0).abs() < 1e-8);
        assert!(h_metric_power(&[0.0], &[1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn metric_power_example_against_t_grid() {
        // min_{t∈[0,1]} (1 − t) + t²
        let best = (0..=1_000_000)
            .map(|i| i as f64 * 1e-6)
            .map(|t| (1.0 - t) + t * t)
            .fold(f64::INFINITY, f64::min);
        let h = h_metric_power(&[0.0], &[1.0], 1.0, 2.0).unwrap();
        assert!((h.value + best).abs() < 1e-10);
    }

    #[test]
    fn lipschitz_examples() {
        let k = lipschitz_k(CostSpec::EUCLIDEAN, CostSpec::EUCLIDEAN, 3.0, 17.0).unwrap();
        assert_eq!(k, 4.0);
        let k = lipschitz_k(CostSpec::SquaredEuclidean, CostSpec::EUCLIDEAN, 0.0, 2.0).unwrap();
        assert_eq!(k, 1.0);
        let k = lipschitz_k(
            CostSpec::SquaredEuclidean,
            CostSpec::SquaredEuclidean,
            1.0,
            2.0,
        )
        .unwrap();
        assert_eq!(k, 8.0);
        assert!(lipschitz_k(
            CostSpec::SquaredEuclidean,
            CostSpec::EUCLIDEAN,
            1.0,
            f64::INFINITY
        )
        .is_err());
        assert!(lipschitz_k(CostSpec::EUCLIDEAN, CostSpec::EUCLIDEAN, 1.0, f64::INFINITY).is_ok());
    }

    #[test]
    fn order1_lipschitz_by_finite_difference_slopes() {
        // Largest observed |Δh| / ‖Δw‖ approaches λ L(c) = 3 when y is far.
        let lambda = 3.0;
        let y = [10.0];
        let mut max_slope: f64 = 0.0;
        for i in 0..200 {
            let w1 = [i as f64 * 0.01];
            let w2 = [w1[0] + 1e-4];
            let dh = h_order1(&w1, &y, lambda).value - h_order1(&w2, &y, lambda).value;
            max_slope = max_slope.max(dh.abs() / 1e-4);
        }
        let k = lipschitz_k(CostSpec::EUCLIDEAN, CostSpec::EUCLIDEAN, lambda, 20.0).unwrap();
        assert!(max_slope <= k + 1e-9);
        assert!(max_slope >= 1.0 - 1e-6);
    }

    #[test]
    fn closed_forms_match_one_dimensional_grid() {
        // x ranges over [−5, 5] at resolution 1e-3; (w, y) sit on the lattice.
        let grid: std::vec::Vec<f64> = (0..=10_000).map(|i| -5.0 + i as f64 * 1e-3).collect();
        let mut state = 0x1234_5678_u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..100 {
            let pair = PAIRS[trial % PAIRS.len()];
            let w = [((next() * 6.0 - 3.0) * 1e3).round() * 1e-3];
            let y = [((next() * 6.0 - 3.0) * 1e3).round() * 1e-3];
            let lambda = next() * 4.0;
            let h = pair.h(&w, &y, lambda);
            let best = grid
                .iter()
                .map(|&x| objective(pair, &[x], &w, &y, lambda))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (h.value - best).abs() < 1e-4,
                "{pair:?} w={w:?} y={y:?} λ={lambda}: {} vs {best}",
                h.value
            );
        }
    }

    proptest! {
        #[test]
        fn closed_form_is_a_supremum_in_the_plane(
            pair_ix in 0usize..4,
            w in prop::array::uniform2(-2.0f64..2.0),
            y in prop::array::uniform2(-2.0f64..2.0),
            lambda in 0.0f64..5.0,
            xs in prop::collection::vec(prop::array::uniform2(-3.0f64..3.0), 64),
        ) {
            let pair = PAIRS[pair_ix];
            let h = pair.h(&w, &y, lambda);
            let attained = objective(pair, &h.xstar, &w, &y, lambda);
            prop_assert!((attained - h.value).abs() < 1e-12);
            for x in &xs {
                prop_assert!(objective(pair, x, &w, &y, lambda) <= h.value + 1e-12);
            }
            // Points on the segment never beat the closed form either.
            for i in 0..=200 {
                let s = i as f64 / 200.0;
                let x = [w[0] + s * (y[0] - w[0]), w[1] + s * (y[1] - w[1])];
                prop_assert!(objective(pair, &x, &w, &y, lambda) <= h.value + 1e-12);
            }
        }

        #[test]
        fn h_is_convex_and_nonincreasing_in_lambda(
            pair_ix in 0usize..4,
            w in prop::array::uniform2(-2.0f64..2.0),
            y in prop::array::uniform2(-2.0f64..2.0),
            l1 in 0.0f64..5.0,
            l2 in 0.0f64..5.0,
        ) {
            let pair = PAIRS[pair_ix];
            let a = pair.h(&w, &y, l1).value;
            let b = pair.h(&w, &y, l2).value;
            let mid = pair.h(&w, &y, 0.5 * (l1 + l2)).value;
            prop_assert!(mid <= 0.5 * (a + b) + 1e-12);
            let (lo, hi) = if l1 <= l2 { (a, b) } else { (b, a) };
            prop_assert!(hi <= lo + 1e-12);
            prop_assert!(pair.h(&w, &y, l1).dvalue_dlambda <= 0.0);
        }

        #[test]
        fn derivative_matches_central_differences(
            pair_ix in 0usize..4,
            w in prop::array::uniform2(-2.0f64..2.0),
            y in prop::array::uniform2(-2.0f64..2.0),
            lambda in 0.01f64..5.0,
        ) {
            let pair = PAIRS[pair_ix];
            prop_assume!(pair != CostPair::Order1 || (lambda - 1.0).abs() > 1e-3);
            let step = 1e-6;
            let fd = (pair.h(&w, &y, lambda + step).value - pair.h(&w, &y, lambda - step).value)
                / (2.0 * step);
            let h = pair.h(&w, &y, lambda);
            prop_assert!((fd - h.dvalue_dlambda).abs() < 1e-6, "fd {} vs {}", fd, h.dvalue_dlambda);
        }

        #[test]
        fn h_is_lipschitz_with_k_lambda(
            pair_ix in 0usize..4,
            w1 in prop::array::uniform2(0.0f64..1.0),
            w2 in prop::array::uniform2(0.0f64..1.0),
            y1 in prop::array::uniform2(0.0f64..1.0),
            y2 in prop::array::uniform2(0.0f64..1.0),
            lambda in 0.0f64..4.0,
        ) {
            let pair = PAIRS[pair_ix];
            let diameter = 2f64.sqrt();
            let k = lipschitz_k(pair.c(), pair.ctilde(), lambda, diameter).unwrap();
            let dw = squared_distance(&w1, &w2).sqrt();
            let dy = squared_distance(&y1, &y2).sqrt();
            let dh = (pair.h(&w1, &y1, lambda).value - pair.h(&w2, &y2, lambda).value).abs();
            prop_assert!(dh <= k * dw.max(dy) + 1e-12);
        }
    }

    #[test]
    fn cost_pairs() {
        use CostSpec::*;
        assert_eq!(
            CostPair::from_specs(SquaredEuclidean, EuclideanPower(2.0)).unwrap(),
            CostPair::Quadratic
        );
        assert_eq!(
            CostPair::from_specs(CostSpec::EUCLIDEAN, CostSpec::EUCLIDEAN).unwrap(),
            CostPair::Order1
        );
        assert_eq!(
            CostPair::from_specs(CostSpec::EUCLIDEAN, SquaredEuclidean).unwrap(),
            CostPair::MetricPower { k: 2.0 }
        );
        assert!(matches!(
            CostPair::from_specs(SquaredEuclidean, CostSpec::EUCLIDEAN),
            Err(Error::UnsupportedCostPair(_))
        ));
    }
}
