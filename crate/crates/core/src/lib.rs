//! Numerical laboratory for mean values of |ζ(σ+it)|^ω over the
//! disconnected sets built from the theta grid θ(t_ν(τ)) = πν + τ.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cache;
pub mod dd;
pub mod divisor;
pub mod error;
pub mod grid;
pub mod meanvalue;
pub mod par;
pub mod quadrature;
pub mod special_fn;

pub use error::{Error, Result};
