//! Scalar building blocks: θ(t), θ′(t), ζ(σ+it) and Hardy's Z(t).

mod batch;
mod gamma;
mod theta;
mod zeta;

pub use batch::{ZetaEvaluator, BLOCK_WIDTH, MAX_BATCH_HEIGHT};
pub use gamma::{digamma, ln_gamma};
pub use theta::{theta, theta_deriv, theta_dd, theta_dd_at, ASYMPTOTIC_THRESHOLD};
pub use zeta::{
    escalate, hardy_z, zeta, zeta_em, ComplexPoint, EvalPrecision, CUTOFF_PER_HEIGHT,
    LADDER_STEPS, MAX_BERNOULLI_TERMS,
};

pub(crate) use theta::theta_deriv_unchecked;
