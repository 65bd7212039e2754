//! The Riemann–Siegel theta function and its derivative.
//!
//! Below [`ASYMPTOTIC_THRESHOLD`] theta is evaluated from the complex
//! log-gamma function; above it from the Stirling expansion
//!
//! θ(t) = (t/2) ln(t/2π) − t/2 − π/8 + Σ_j c_j / t^(2j−1),
//! c_j = (1 − 2^(1−2j)) |B_2j| / (4j(2j−1)),
//!
//! with the leading part carried in double-double so the phase stays
//! accurate to well below one unit in the last place of `t`.

use num_complex::Complex64;

use super::gamma::{bernoulli_2j, digamma, ln_gamma};
use crate::dd::{self, Dd};
use crate::error::{domain, Result};

/// Crossover height between the log-gamma and asymptotic evaluations.
pub const ASYMPTOTIC_THRESHOLD: f64 = 50.0;

const SERIES_TERMS: usize = 7;

fn series_coeff(j: usize) -> f64 {
    let jf = j as f64;
    (1.0 - 2f64.powi(1 - 2 * j as i32)) * bernoulli_2j(j).abs() / (4.0 * jf * (2.0 * jf - 1.0))
}

/// Σ_j c_j / t^(2j−1)
fn asymptotic_tail(t: f64) -> f64 {
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut sum = 0.0;
    for j in 1..=SERIES_TERMS {
        sum += series_coeff(j) * pow;
        pow *= inv2;
    }
    sum
}

fn theta_from_gamma(t: f64) -> f64 {
    let lg = ln_gamma(Complex64::new(0.25, 0.5 * t));
    lg.im - 0.5 * t * std::f64::consts::PI.ln()
}

fn theta_asymptotic_dd(t: f64) -> Dd {
    let log_part = Dd::ln(t) - dd::LN_2PI - Dd::ONE;
    log_part.mul_f64(t).ldexp(-1) - dd::PI_OVER_8 + Dd::from_f64(asymptotic_tail(t))
}

/// θ at a double-double argument `t.hi + t.lo`, for locating roots of
/// θ(t) = c below one unit in the last place of `t`.
pub fn theta_dd_at(t: Dd) -> Result<Dd> {
    if !(t.hi > 0.0) || !t.hi.is_finite() {
        return Err(domain("theta", format!("t must be positive and finite, got {}", t.hi)));
    }
    Ok(if t.hi >= ASYMPTOTIC_THRESHOLD {
        // ln(hi + lo) = ln hi + lo/hi + O((lo/hi)²)
        let log_part = Dd::ln(t.hi).add_f64(t.lo / t.hi) - dd::LN_2PI - Dd::ONE;
        (log_part * t).ldexp(-1) - dd::PI_OVER_8 + Dd::from_f64(asymptotic_tail(t.hi))
    } else {
        Dd::from_f64(theta_from_gamma(t.hi)).add_f64(theta_deriv_unchecked(t.hi) * t.lo)
    })
}

/// θ(t) in double-double. Only the asymptotic branch carries the extra
/// precision; below the threshold the value is an `f64` lifted to `Dd`.
pub fn theta_dd(t: f64) -> Result<Dd> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("theta", format!("t must be positive and finite, got {t}")));
    }
    Ok(if t >= ASYMPTOTIC_THRESHOLD {
        theta_asymptotic_dd(t)
    } else {
        Dd::from_f64(theta_from_gamma(t))
    })
}

/// The Riemann–Siegel theta function θ(t) = −(t/2) ln π + Im ln Γ(1/4 + it/2).
pub fn theta(t: f64) -> Result<f64> {
    theta_dd(t).map(Dd::to_f64)
}

/// θ′(t), defined here for `t > 10` where θ is increasing.
pub fn theta_deriv(t: f64) -> Result<f64> {
    if !(t > 10.0) || !t.is_finite() {
        return Err(domain("theta_deriv", format!("t must exceed 10, got {t}")));
    }
    Ok(theta_deriv_unchecked(t))
}

pub(crate) fn theta_deriv_unchecked(t: f64) -> f64 {
    if t >= ASYMPTOTIC_THRESHOLD {
        let inv2 = 1.0 / (t * t);
        let mut pow = inv2;
        let mut sum = 0.0;
        for j in 1..=SERIES_TERMS {
            sum += series_coeff(j) * (2 * j - 1) as f64 * pow;
            pow *= inv2;
        }
        0.5 * (t.ln() - dd::LN_2PI.hi) - sum
    } else {
        0.5 * digamma(Complex64::new(0.25, 0.5 * t)).re - 0.5 * std::f64::consts::PI.ln()
    }
}
