//! Optimal transport between discrete measures and its δ-relaxation.
//!
//! The relaxed cost `G_δ(μ₀, ν)` is the smallest transport cost from any
//! measure within transport distance `δ` of `μ₀` to `ν`. It is computed
//! through a convex one-dimensional dual in the multiplier `λ`:
//!
//! ```text
//! G_δ(μ₀, ν) = −min_{λ ≥ 0} { λδ + max_{π ∈ Π(μ₀, ν)} E_π[h(W, Y, λ)] }
//! h(w, y, λ) = sup_x { −c̃(x, y) − λ c(x, w) }
//! ```
//!
//! Modules:
//!
//! * [`measure`]: weighted point clouds, synthetic generators, resampling.
//! * [`cost`]: ground costs and closed forms of `h` and `∂h/∂λ`.
//! * [`ot`]: exact transportation simplex with dual potentials.
//! * [`otr`]: the λ-search, closed-form fast paths and map recovery.
//! * [`stats`]: concentration bounds for choosing `δ`.
//! * [`harness`]: the synthetic estimation experiment.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the
//! command-line front end live in `otrelax-cli`.

#![no_std]
// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cost;
mod error;
pub mod harness;
pub mod measure;
pub mod ot;
pub mod otr;
pub mod stats;

pub use crate::cost::{CostPair, CostSpec, HValue};
pub use crate::error::{Error, Result};
pub use crate::measure::{DiscreteMeasure, FactorModelParams};
pub use crate::ot::{CostMatrix, TransportPlan};
pub use crate::otr::{GEvaluation, Method, RelaxedProblem, RelaxedSolution};
