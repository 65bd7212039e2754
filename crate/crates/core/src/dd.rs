//! Double-double arithmetic.
//!
//! Only the handful of operations needed to evaluate the theta phase at
//! heights where `f64` alone loses the last few units in the last place:
//! addition, multiplication, `exp` and `ln` of an `f64`.

use std::ops::{Add, Mul, Neg, Sub};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
pub const LN_2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
/// ln(2π)
pub const LN_2PI: Dd = Dd { hi: 1.8378770664093456, lo: -7.756588316134483e-17 };
/// π/8
pub const PI_OVER_8: Dd = Dd { hi: std::f64::consts::FRAC_PI_8, lo: 1.5308084989341915e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let rem = self - Dd::from_f64(b).mul_f64(q1);
        let q2 = rem.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Scales by a power of two (exact).
    #[inline]
    pub fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    /// `exp` to roughly 1e-30 relative accuracy for `|self| < 700`.
    pub fn exp(self) -> Self {
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2.mul_f64(k);
        // e^r = (e^(r/256))^256, tracked as expm1 to keep the small part exact.
        let r = r.ldexp(-8);
        let mut term = r;
        let mut sum = r;
        for i in 2..=12 {
            term = (term * r).div_f64(i as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        for _ in 0..8 {
            // (1+s)^2 - 1 = 2s + s^2
            sum = sum.ldexp(1) + sum * sum;
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }

    /// Natural logarithm of a positive `f64`, correct to roughly 1e-30
    /// relative: one Newton step on `exp` from the libm estimate.
    pub fn ln(x: f64) -> Self {
        debug_assert!(x > 0.0);
        let y = Dd::from_f64(x.ln());
        let e = y.exp();
        let corr = (Dd::from_f64(x) - e).to_f64() / e.hi;
        y.add_f64(corr)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_one_matches_e() {
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let e = Dd::ONE.exp();
        assert_eq!(e.hi, std::f64::consts::E);
        assert!((e.lo - 1.4456468917292502e-16).abs() < 1e-30, "{e:?}");
    }

    #[test]
    fn ln_inverts_exp() {
        for &x in &[0.5, 2.0, 17.0, 1.0e6, 3.3e7, 123456.789] {
            let l = Dd::ln(x);
            let back = l.exp();
            let rel = ((back - Dd::from_f64(x)).to_f64() / x).abs();
            assert!(rel < 1e-29, "x={x} rel={rel}");
        }
    }

    #[test]
    fn ln_2pi_constant() {
        let l = Dd::ln(2.0) + Dd::ln(std::f64::consts::PI) + Dd::from_f64(PI.lo / PI.hi);
        assert!((l - LN_2PI).to_f64().abs() < 1e-30);
    }

    #[test]
    fn product_is_exact_for_representable_operands() {
        let a = Dd::from_f64(1.0 + f64::EPSILON);
        let p = a * a;
        assert_eq!(p.hi, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(p.lo, f64::EPSILON * f64::EPSILON);
    }
}
