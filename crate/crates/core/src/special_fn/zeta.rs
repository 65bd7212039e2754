//! ζ(s) by Euler–Maclaurin summation.
//!
//! ζ(s) = Σ_{n<N} n^−s + N^−s/2 + N^(1−s)/(s−1)
//!        + Σ_{j=1}^{R} B_2j/(2j)! · s(s+1)…(s+2j−2) · N^(−s−2j+1) + E_R,
//!
//! |E_R| ≤ |T_{R+1}| · |s+2R+1| / (σ+2R+1), T_{R+1} the first omitted term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::{bernoulli_2j, BERNOULLI_EVEN};
use super::theta::theta;
use crate::error::{domain, Error, Result};

/// Direct terms per unit height in the default cutoff ladder.
pub const CUTOFF_PER_HEIGHT: f64 = 0.6;
/// Largest number of Bernoulli corrections the tables support.
pub const MAX_BERNOULLI_TERMS: usize = BERNOULLI_EVEN.len() - 1;
/// Escalation steps before giving up on a tolerance.
pub const LADDER_STEPS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        ComplexPoint { sigma, t }
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPrecision {
    pub target_abs_tol: f64,
    /// Floor on the number of direct terms; the working cutoff is
    /// `max(floor, ⌈0.6|t|⌉)`.
    pub euler_maclaurin_cutoff: usize,
    pub bernoulli_terms: usize,
}

impl Default for EvalPrecision {
    fn default() -> Self {
        EvalPrecision { target_abs_tol: 1e-10, euler_maclaurin_cutoff: 10, bernoulli_terms: 8 }
    }
}

impl EvalPrecision {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_abs_tol > 0.0) {
            return Err(Error::InvalidParams("target_abs_tol must be positive".into()));
        }
        if self.euler_maclaurin_cutoff < 1 {
            return Err(Error::InvalidParams("euler_maclaurin_cutoff must be >= 1".into()));
        }
        if !(1..=12).contains(&self.bernoulli_terms) {
            return Err(Error::InvalidParams("bernoulli_terms must lie in 1..=12".into()));
        }
        Ok(())
    }

    /// Starting `(N, R)` for height `t`.
    pub fn initial_ladder(&self, t: f64) -> (usize, usize) {
        let n = (CUTOFF_PER_HEIGHT * t.abs()).ceil() as usize;
        (n.max(self.euler_maclaurin_cutoff).max(10), self.bernoulli_terms)
    }
}

/// One rung up the ladder. More Bernoulli terms cost nothing per direct
/// term, so R is doubled (up to the table size) before N is.
pub fn escalate(n: usize, r: usize) -> (usize, usize) {
    if r < MAX_BERNOULLI_TERMS {
        (n, (2 * r).min(MAX_BERNOULLI_TERMS))
    } else {
        (2 * n, r)
    }
}

/// The part of the Euler–Maclaurin formula that does not involve the
/// direct sum, plus the remainder bound.
pub(crate) fn em_correction(s: Complex64, n: usize, r: usize) -> (Complex64, f64) {
    assert!(r <= MAX_BERNOULLI_TERMS, "at most {MAX_BERNOULLI_TERMS} Bernoulli terms");
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow_s = (-s * ln_n).exp(); // N^-s
    let mut total = n_pow_s * 0.5 + n_pow_s * nf / (s - 1.0);
    // rising = s(s+1)…(s+2j−2), npow = N^(−s−2j+1), fact = (2j)!
    let mut rising = s;
    let mut npow = n_pow_s / nf;
    let mut fact = 2.0;
    for j in 1..=r {
        total += rising * npow * (bernoulli_2j(j) / fact);
        let k = (2 * j) as f64;
        rising = rising * (s + (k - 1.0)) * (s + k);
        npow /= nf * nf;
        fact *= (k + 1.0) * (k + 2.0);
    }
    // rising now holds s(s+1)…(s+2R), fact = (2R+2)!
    let next_term = rising.norm() * bernoulli_2j(r + 1).abs() / fact * npow.norm();
    let k = (2 * r + 1) as f64;
    let bound = next_term * (s + k).norm() / (s.re + k);
    (total, bound)
}

/// Σ_{n<N} n^−s, summed in increasing n.
fn direct_sum(s: Complex64, n: usize) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 1..n {
        let l = (k as f64).ln();
        let a = (-s.re * l).exp();
        let (sin, cos) = (s.im * l).sin_cos();
        re += a * cos;
        im -= a * sin;
    }
    Complex64::new(re, im)
}

/// Euler–Maclaurin with explicit `(N, R)`: returns the value and the
/// remainder bound.
pub fn zeta_em(s: Complex64, n: usize, r: usize) -> (Complex64, f64) {
    let (corr, bound) = em_correction(s, n, r);
    (direct_sum(s, n) + corr, bound)
}

fn check_point(p: &ComplexPoint) -> Result<()> {
    if !(p.sigma > 0.0) || !p.t.is_finite() {
        return Err(domain("zeta", format!("need sigma > 0 and finite t, got {} + {}i", p.sigma, p.t)));
    }
    if p.sigma == 1.0 && p.t == 0.0 {
        return Err(Error::Pole);
    }
    Ok(())
}

/// Smallest ladder rung whose remainder bound meets the tolerance.
pub(crate) fn ladder_for(p: &ComplexPoint, prec: &EvalPrecision) -> Result<(usize, usize)> {
    let s = p.s();
    let (mut n, mut r) = prec.initial_ladder(p.t);
    let mut best = f64::INFINITY;
    for _ in 0..=LADDER_STEPS {
        let (_, bound) = em_correction(s, n, r);
        if bound <= prec.target_abs_tol {
            return Ok((n, r));
        }
        best = best.min(bound);
        (n, r) = escalate(n, r);
    }
    Err(Error::PrecisionUnreachable { sigma: p.sigma, t: p.t, tol: prec.target_abs_tol, best })
}

/// ζ(σ + it) for σ > 0, s ≠ 1, with Euler–Maclaurin remainder at most
/// `prec.target_abs_tol`. Rounding in the direct sum is not part of
/// that bound; it grows roughly like `|t| · 1e-16`.
pub fn zeta(p: ComplexPoint, prec: &EvalPrecision) -> Result<Complex64> {
    prec.validate()?;
    check_point(&p)?;
    let (n, r) = ladder_for(&p, prec)?;
    Ok(zeta_em(p.s(), n, r).0)
}

/// Hardy's Z(t) = e^{iθ(t)} ζ(1/2 + it).
pub fn hardy_z(t: f64, prec: &EvalPrecision) -> Result<f64> {
    if !(t > 10.0) {
        return Err(domain("hardy_z", format!("t must exceed 10, got {t}")));
    }
    let z = zeta(ComplexPoint::new(0.5, t), prec)?;
    let prod = Complex64::from_polar(1.0, theta(t)?) * z;
    let defect = prod.im.abs();
    if defect > 1e-8_f64.max(10.0 * prec.target_abs_tol) {
        return Err(Error::PrecisionUnreachable { sigma: 0.5, t, tol: 1e-8, best: defect });
    }
    Ok(prod.re)
}
