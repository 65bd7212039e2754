//! Generalized divisor functions and the series F(σ, ω) = Σ d_ω(n)² n^−2σ.
//!
//! d_ω is the coefficient system of ζ(s)^ω: multiplicative, with
//! d_ω(p^a) = ω(ω+1)…(ω+a−1)/a!. Integer orders can also be built by
//! iterated Dirichlet convolution of the all-ones function, which is what
//! [`sieve_dk`] does and what the tests use as an independent oracle.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{zeta, ComplexPoint, EvalPrecision};

/// Largest table (number of entries) any constructor will allocate.
pub const TABLE_BUDGET: usize = 1 << 26;
/// Largest n that [`d_omega`] will factor by trial division.
pub const FACTOR_BUDGET: u64 = 1 << 50;
/// Largest prime bound [`f_series`] will sieve to.
pub const PRIME_BOUND_BUDGET: usize = 200_000_000;

/// `values[n]` for `1 <= n <= limit`; `values[0]` is unused and zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorTable {
    pub order: f64,
    pub limit: usize,
    pub values: Vec<f64>,
}

impl DivisorTable {
    pub fn get(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.limit {
            return Err(Error::TableTooSmall { limit: self.limit, needed: n });
        }
        Ok(self.values[n])
    }

    /// Dirichlet convolution; the result has order `self.order + other.order`
    /// and the smaller of the two limits.
    pub fn convolve(&self, other: &DivisorTable) -> DivisorTable {
        let limit = self.limit.min(other.limit);
        let mut values = vec![0.0; limit + 1];
        for d in 1..=limit {
            let a = self.values[d];
            for (m, e) in (1..=limit / d).zip(&other.values[1..]) {
                values[d * m] += a * e;
            }
        }
        DivisorTable { order: self.order + other.order, limit, values }
    }

    /// max_{n<=limit} values[n] / n^η
    pub fn max_growth_ratio(&self, eta: f64) -> f64 {
        (1..=self.limit).map(|n| self.values[n] / (n as f64).powf(eta)).fold(0.0, f64::max)
    }

    /// Writes `n,d` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,d")?;
        for n in 1..=self.limit {
            writeln!(w, "{n},{}", self.values[n])?;
        }
        Ok(())
    }
}

fn check_budget(limit: usize) -> Result<()> {
    if limit == 0 {
        return Err(Error::InvalidParams("table limit must be >= 1".into()));
    }
    if limit > TABLE_BUDGET {
        return Err(Error::Resource { limit, budget: TABLE_BUDGET });
    }
    Ok(())
}

/// d_k(n) for n <= limit by k−1 convolutions with the all-ones function.
pub fn sieve_dk(k: u32, limit: usize) -> Result<DivisorTable> {
    if k == 0 {
        return Err(Error::InvalidParams("divisor order k must be >= 1".into()));
    }
    check_budget(limit)?;
    let mut values = vec![1.0; limit + 1];
    values[0] = 0.0;
    for _ in 1..k {
        let mut next = vec![0.0; limit + 1];
        for d in 1..=limit {
            let a = values[d];
            let mut m = d;
            while m <= limit {
                next[m] += a;
                m += d;
            }
        }
        values = next;
    }
    Ok(DivisorTable { order: k as f64, limit, values })
}

/// d_ω(p^a) = ω(ω+1)…(ω+a−1)/a!
pub fn prime_power_coeff(omega: f64, a: u32) -> f64 {
    (0..a).fold(1.0, |c, j| c * (omega + j as f64) / (j + 1) as f64)
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParams(format!("divisor order must be positive, got {omega}")));
    }
    Ok(())
}

/// d_ω(n) for n <= limit from smallest-prime-factor sieving.
pub fn sieve_omega(omega: f64, limit: usize) -> Result<DivisorTable> {
    check_omega(omega)?;
    check_budget(limit)?;
    let spf = smallest_prime_factors(limit);
    let mut values = vec![0.0; limit + 1];
    values[1] = 1.0;
    for n in 2..=limit {
        let p = spf[n] as usize;
        let (mut m, mut a) = (n, 0);
        while m % p == 0 {
            m /= p;
            a += 1;
        }
        values[n] = values[m] * prime_power_coeff(omega, a);
    }
    Ok(DivisorTable { order: omega, limit, values })
}

fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for n in 2..=limit {
        if spf[n] == 0 {
            let mut m = n;
            while m <= limit {
                if spf[m] == 0 {
                    spf[m] = n as u32;
                }
                m += n;
            }
        }
    }
    spf
}

/// Primes below `bound` from an odd-only sieve of Eratosthenes.
pub fn primes_below(bound: usize) -> Vec<u64> {
    if bound <= 2 {
        return Vec::new();
    }
    // composite[i] marks 2i+1
    let half = bound / 2;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) < bound {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2];
    primes.extend((1..half).filter(|&i| !composite[i]).map(|i| (2 * i + 1) as u64));
    primes
}

/// Coefficient of n^−s in ζ(s)^ω, by trial-division factorization.
pub fn d_omega(omega: f64, n: u64) -> Result<f64> {
    check_omega(omega)?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    if n > FACTOR_BUDGET {
        return Err(Error::FactorizationBudget { n, bound: (FACTOR_BUDGET as f64).sqrt() as u64 });
    }
    let mut m = n;
    let mut value = 1.0;
    let mut p = 2u64;
    while p * p <= m {
        let mut a = 0;
        while m % p == 0 {
            m /= p;
            a += 1;
        }
        if a > 0 {
            value *= prime_power_coeff(omega, a);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        value *= omega;
    }
    Ok(value)
}

/// Truncated value of F(σ, ω) with an explicit uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub sigma: f64,
    pub order: f64,
    /// Prime bound P of the truncated Euler product.
    pub truncation: usize,
    /// ζ(2σ)^ω² · Π_{p<P} L_p, the reported value.
    pub partial_sum: f64,
    /// Bound on |F − partial_sum|.
    pub tail_bound: f64,
}

/// Coefficients ℓ_a of L(x) = (1−x)^ω² Σ_a d_ω(p^a)² x^a; ℓ_0 = 1, ℓ_1 = 0.
fn local_coeffs(omega: f64, count: usize) -> Vec<f64> {
    let w2 = omega * omega;
    let c2: Vec<f64> = (0..count as u32).map(|a| prime_power_coeff(omega, a).powi(2)).collect();
    // (1−x)^ω² = Σ_j e_j x^j, e_j = (−1)^j C(ω², j)
    let mut e = vec![1.0; count];
    for j in 1..count {
        e[j] = -e[j - 1] * (w2 - (j - 1) as f64) / j as f64;
    }
    (0..count).map(|a| (0..=a).map(|j| e[j] * c2[a - j]).sum()).collect()
}

const SMALL_X: f64 = 1e-2;
const SERIES_COEFFS: usize = 12;

/// ln L(x) for 0 < x < 1.
fn ln_local(omega: f64, x: f64, coeffs: &[f64]) -> f64 {
    if x < SMALL_X {
        ln_local_series(x, coeffs)
    } else {
        ln_local_direct(omega, x)
    }
}

/// ln(1 + Σ_{a>=2} ℓ_a x^a); beyond a = 11 the terms are below 1e-20
/// relative for x < 1e-2.
fn ln_local_series(x: f64, coeffs: &[f64]) -> f64 {
    let mut pow = x * x;
    let mut s = 0.0;
    for &l in &coeffs[2..] {
        s += l * pow;
        pow *= x;
    }
    s.ln_1p()
}

/// ω² ln(1−x) + ln Σ_a d_ω(p^a)² x^a; the two logarithms cancel to
/// O(x²), so this loses about log10(1/x) digits.
fn ln_local_direct(omega: f64, x: f64) -> f64 {
    let mut c = omega;
    let mut pow = x;
    let mut sum = 0.0; // Σ_{a>=1}
    for a in 1u32.. {
        let term = c * c * pow;
        sum += term;
        if a > 4 && term < 1e-18 * sum {
            break;
        }
        c *= (omega + a as f64) / (a + 1) as f64;
        pow *= x;
    }
    omega * omega * (-x).ln_1p() + sum.ln_1p()
}

/// Bound on Σ_{p>P} |ln L_p|.
fn log_tail_bound(sigma: f64, omega: f64, p: usize, coeffs: &[f64]) -> f64 {
    let pf = p as f64;
    let x = pf.powf(-2.0 * sigma);
    let local = ln_local(omega, x, coeffs).abs() / (x * x);
    let a = coeffs[2].abs().max(local);
    // Σ_{p>P} p^−4σ ≤ 2 ∫_P^∞ du / (u^4σ ln u) ≤ 2 P^(1−4σ) / ((4σ−1) ln P)
    2.0 * a * pf.powf(1.0 - 4.0 * sigma) / ((4.0 * sigma - 1.0) * pf.ln())
}

/// Relative accuracy requested from the ζ(2σ) evaluation.
const ZETA_REL_TOL: f64 = 1e-14;

/// F(σ, ω) = ζ(2σ)^ω² Π_p L_p(p^−2σ), the product taken over p < P with
/// P the smallest power-of-two multiple of 1000 whose tail bound meets
/// `rel_tol`.
pub fn f_series(sigma: f64, omega: f64, rel_tol: f64) -> Result<SeriesValue> {
    if !(sigma > 0.5 && sigma <= 1.0) {
        return Err(Error::InvalidParams(format!("f_series needs 1/2 < sigma <= 1, got {sigma}")));
    }
    check_omega(omega)?;
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParams("rel_tol must be positive".into()));
    }
    let coeffs = local_coeffs(omega, SERIES_COEFFS);
    let zeta_err = ZETA_REL_TOL * omega * omega;
    let mut p_bound = 1000;
    let mut log_tail = log_tail_bound(sigma, omega, p_bound, &coeffs);
    while log_tail.exp_m1() + zeta_err > rel_tol {
        if p_bound > PRIME_BOUND_BUDGET / 2 {
            return Err(Error::ConvergenceBudget {
                rel_tol,
                budget: PRIME_BOUND_BUDGET,
                best: log_tail.exp_m1() + zeta_err,
            });
        }
        p_bound *= 2;
        log_tail = log_tail_bound(sigma, omega, p_bound, &coeffs);
    }
    let prec = EvalPrecision { target_abs_tol: ZETA_REL_TOL, ..Default::default() };
    let z = zeta(ComplexPoint::new(2.0 * sigma, 0.0), &prec)?.re;
    let mut ln_f = omega * omega * z.ln();
    // largest primes first so the small terms accumulate before the big ones
    for &p in primes_below(p_bound).iter().rev() {
        ln_f += ln_local(omega, (p as f64).powf(-2.0 * sigma), &coeffs);
    }
    let value = ln_f.exp();
    Ok(SeriesValue {
        sigma,
        order: omega,
        truncation: p_bound,
        partial_sum: value,
        tail_bound: value * (log_tail.exp_m1() + zeta_err),
    })
}

/// Σ_{n<cutoff} d(n)² n^−2σ from a table.
pub fn f_partial(table: &DivisorTable, sigma: f64, cutoff: usize) -> Result<f64> {
    if cutoff == 0 || cutoff - 1 > table.limit {
        return Err(Error::TableTooSmall { limit: table.limit, needed: cutoff.saturating_sub(1) });
    }
    Ok((1..cutoff).map(|n| table.values[n].powi(2) * (n as f64).powf(-2.0 * sigma)).sum())
}

/// The integral-comparison tail estimate for Σ_{n>N} d(n)² n^−2σ: fit
/// d(n)² ≤ C n^2η on the last decade of the table, then integrate
/// C ∫_N^∞ x^(2η−2σ) dx. Only meaningful when 2σ − 2η > 1.
pub fn integral_tail_estimate(table: &DivisorTable, sigma: f64, eta: f64) -> Result<f64> {
    let exponent = 2.0 * sigma - 2.0 * eta - 1.0;
    if !(exponent > 0.0) {
        return Err(Error::Regime(format!("integral tail diverges: 2σ − 2η − 1 = {exponent}")));
    }
    let n = table.limit;
    let c = (n / 10 + 1..=n)
        .map(|m| table.values[m].powi(2) / (m as f64).powf(2.0 * eta))
        .fold(0.0, f64::max);
    Ok(c * (n as f64).powf(-exponent) / exponent)
}
