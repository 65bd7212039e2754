//! Complex log-gamma and digamma by upward shift plus Stirling series.

use num_complex::Complex64;

/// Even-index Bernoulli numbers `B_2, B_4, ..., B_40`.
pub(crate) const BERNOULLI_EVEN: [f64; 20] = [
    0.16666666666666666,
    -0.03333333333333333,
    0.023809523809523808,
    -0.03333333333333333,
    0.07575757575757576,
    -0.2531135531135531,
    1.1666666666666667,
    -7.092156862745098,
    54.971177944862156,
    -529.1242424242424,
    6192.123188405797,
    -86580.25311355312,
    1425517.1666666667,
    -27298231.067816094,
    601580873.9006424,
    -15116315767.092157,
    429614643061.1667,
    -13711655205088.332,
    488332318973593.2,
    -1.9296579341940068e+16,
];

/// `B_{2j}` for `j >= 1`.
#[inline]
pub(crate) fn bernoulli_2j(j: usize) -> f64 {
    BERNOULLI_EVEN[j - 1]
}

const SHIFT_RADIUS: f64 = 16.0;
const STIRLING_TERMS: usize = 9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn shift_count(z: Complex64) -> usize {
    if z.norm() >= SHIFT_RADIUS {
        0
    } else {
        (SHIFT_RADIUS - z.re).ceil().max(0.0) as usize
    }
}

/// Continuous branch of ln Γ(z) for `Re z > 0`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0);
    let m = shift_count(z);
    let mut shift = Complex64::new(0.0, 0.0);
    for j in 0..m {
        shift += (z + j as f64).ln();
    }
    let w = z + m as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for j in 1..=STIRLING_TERMS {
        let k = (2 * j) as f64;
        corr += pow * (bernoulli_2j(j) / (k * (k - 1.0)));
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + corr - shift
}

/// ψ(z) = Γ'(z)/Γ(z) for `Re z > 0`.
pub fn digamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0);
    let m = shift_count(z);
    let mut shift = Complex64::new(0.0, 0.0);
    for j in 0..m {
        shift += (z + j as f64).inv();
    }
    let w = z + m as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for j in 1..=STIRLING_TERMS {
        corr += pow * (bernoulli_2j(j) / (2 * j) as f64);
        pow *= inv2;
    }
    w.ln() - inv * 0.5 - corr - shift
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_real_values() {
        // ln Γ(1/2) = ln √π
        let v = ln_gamma(Complex64::new(0.5, 0.0));
        assert!((v.re - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        // ln Γ(10) = ln 362880
        let v = ln_gamma(Complex64::new(10.0, 0.0));
        assert!((v.re - 362880f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_recurrence_off_axis() {
        let z = Complex64::new(0.25, 7.3);
        let lhs = ln_gamma(z + 1.0);
        let rhs = ln_gamma(z) + z.ln();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn digamma_matches_difference_quotient() {
        let z = Complex64::new(0.25, 11.0);
        let h = 1e-5;
        let fd = (ln_gamma(z + h) - ln_gamma(z - h)) / (2.0 * h);
        assert!((fd - digamma(z)).norm() < 1e-8);
        // ψ(1) = -γ
        let g = digamma(Complex64::new(1.0, 0.0));
        assert!((g.re + 0.577_215_664_901_532_9).abs() < 1e-14);
    }
}
