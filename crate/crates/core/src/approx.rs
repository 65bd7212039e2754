//! Dirichlet polynomials Σ_{n<N} d_k(n) n^−s standing in for ζ(s)^k, their
//! real/imaginary split U_k + iV_k, and measured residuals against the
//! Euler–Maclaurin evaluator.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisor::{sieve_dk, DivisorTable};
use crate::error::{Error, Result};
use crate::grid::GridParams;
use crate::par::{self, Exec};
use crate::special_fn::ZetaEvaluator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletApprox {
    pub k: u32,
    pub sigma: f64,
    pub t: f64,
    /// Exclusive: terms n < cutoff.
    pub cutoff: usize,
    pub value: Complex64,
    pub u: f64,
    pub v: f64,
}

/// Precomputed coefficients d_k(n) n^−σ and logarithms for 2 ≤ n < cutoff,
/// so that many heights can share one setup.
#[derive(Clone, Debug)]
pub struct DirichletPoly {
    pub k: u32,
    pub sigma: f64,
    pub cutoff: usize,
    coeff: Vec<f64>,
    ln: Vec<f64>,
}

impl DirichletPoly {
    pub fn new(table: &DivisorTable, k: u32, sigma: f64, cutoff: usize) -> Result<Self> {
        if table.order != k as f64 {
            return Err(Error::TableOrder { have: table.order, want: k as f64 });
        }
        if cutoff == 0 {
            return Err(Error::InvalidParams("cutoff must be >= 1".into()));
        }
        if cutoff - 1 > table.limit {
            return Err(Error::TableTooSmall { limit: table.limit, needed: cutoff - 1 });
        }
        let range = 2..cutoff.max(2);
        let coeff = range.clone().map(|n| table.values[n] * (n as f64).powf(-sigma)).collect();
        let ln = range.map(|n| (n as f64).ln()).collect();
        Ok(DirichletPoly { k, sigma, cutoff, coeff, ln })
    }

    /// Sieves its own table.
    pub fn for_params(params: &GridParams) -> Result<Self> {
        let cutoff = params.cutoff();
        let table = sieve_dk(params.k, cutoff.max(2))?;
        Self::new(&table, params.k, params.sigma, cutoff)
    }

    /// (S₁(t), S₂(t)) = Σ_{2≤n<N} d_k(n) n^−σ (cos, sin)(t ln n).
    pub fn oscillatory(&self, t: f64) -> (f64, f64) {
        let (mut c, mut s) = (0.0, 0.0);
        for (a, l) in self.coeff.iter().zip(&self.ln) {
            let (sn, cs) = (t * l).sin_cos();
            c += a * cs;
            s += a * sn;
        }
        (c, s)
    }

    pub fn eval(&self, t: f64) -> DirichletApprox {
        let (s1, s2) = self.oscillatory(t);
        let (u, v) = (1.0 + s1, -s2);
        DirichletApprox { k: self.k, sigma: self.sigma, t, cutoff: self.cutoff, value: Complex64::new(u, v), u, v }
    }

    /// Coefficients a_n = d_k(n) n^−σ for n = 2, 3, …
    pub fn coefficients(&self) -> &[f64] {
        &self.coeff
    }

    pub fn logs(&self) -> &[f64] {
        &self.ln
    }
}

/// Σ_{n<cutoff} d_k(n) n^−(σ+it), with the n = 1 term always present.
pub fn dirichlet_partial(k: u32, sigma: f64, t: f64, cutoff: usize, table: &DivisorTable) -> Result<DirichletApprox> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
    }
    Ok(DirichletPoly::new(table, k, sigma, cutoff)?.eval(t))
}

/// Residuals |ζ(s)^k − Σ_{n<T^δ} d_k(n) n^−s| on one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualWindow {
    #[serde(rename = "T")]
    pub t0: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub cutoff: usize,
    /// (t, residual)
    pub samples: Vec<(f64, f64)>,
    pub rms: f64,
    pub median: f64,
    /// Worst-case contribution of the ζ evaluator's own error, k|ζ|^(k−1)·tol.
    pub reference_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    pub k: u32,
    pub sigma: f64,
    pub delta: f64,
    pub windows: Vec<ResidualWindow>,
    /// −slope of ln(rms) against ln T; positive means the residual decays.
    pub fitted_exponent: f64,
}

impl ResidualDiagnostics {
    /// Writes `T,t,residual` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "T,t,residual")?;
        for win in &self.windows {
            for (t, r) in &win.samples {
                writeln!(w, "{:.15e},{:.15e},{:.15e}", win.t0, t, r)?;
            }
        }
        Ok(())
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Evenly spaced sample heights T + (j + ½)H/count.
pub fn sample_heights(params: &GridParams, count: usize) -> Vec<f64> {
    (0..count).map(|j| params.t0 + (j as f64 + 0.5) * params.h / count as f64).collect()
}

pub fn residual_window(params: &GridParams, sample_count: usize, zeta: &ZetaEvaluator, exec: Exec) -> Result<ResidualWindow> {
    if sample_count < 10 {
        return Err(Error::InvalidParams(format!("sample_count must be >= 10, got {sample_count}")));
    }
    let poly = DirichletPoly::for_params(params)?;
    let ts = sample_heights(params, sample_count);
    let z = zeta.eval(params.sigma, &ts)?;
    let k = params.k as i32;
    let tol = zeta.precision().target_abs_tol;
    let rows = par::map_slice(exec, &ts.iter().copied().zip(z).collect::<Vec<_>>(), |&(t, z)| {
        let r = (z.powi(k) - poly.eval(t).value).norm();
        (t, r, k as f64 * z.norm().powi(k - 1) * tol)
    });
    let samples: Vec<(f64, f64)> = rows.iter().map(|&(t, r, _)| (t, r)).collect();
    let res: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    Ok(ResidualWindow {
        t0: params.t0,
        h: params.h,
        cutoff: poly.cutoff,
        samples,
        rms,
        median: median(&res),
        reference_error: rows.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs [`residual_window`] at every T of `ladder` (keeping ε, δ, σ, k
/// from `params`) and fits the decay exponent of the RMS residual.
pub fn residual_scan(
    params: &GridParams,
    ladder: &[f64],
    sample_count: usize,
    zeta: &ZetaEvaluator,
    exec: Exec,
) -> Result<ResidualDiagnostics> {
    if ladder.len() < 2 {
        return Err(Error::InvalidParams("residual scan needs at least two values of T".into()));
    }
    let mut windows = Vec::with_capacity(ladder.len());
    for &t0 in ladder {
        let p = GridParams::new(t0, params.epsilon, params.delta, params.sigma, params.k, params.x, params.eta)?;
        windows.push(residual_window(&p, sample_count, zeta, exec)?);
    }
    let x: Vec<f64> = windows.iter().map(|w| w.t0.ln()).collect();
    let y: Vec<f64> = windows.iter().map(|w| w.rms.ln()).collect();
    Ok(ResidualDiagnostics {
        k: params.k,
        sigma: params.sigma,
        delta: params.delta,
        fitted_exponent: -fit_slope(&x, &y),
        windows,
    })
}

/// T^−λ₁, the size attributed to the discarded range T^δ ≤ n ≤ t^δ.
pub fn tail_term_bound(params: &GridParams) -> Result<f64> {
    let l1 = params.lambda1();
    if !(l1 > 0.0) {
        return Err(Error::Regime(format!("lambda_1 = {l1} is not positive")));
    }
    Ok(params.t0.powf(-l1))
}

/// |Σ_{T^δ ≤ n ≤ t^δ} d_k(n) n^−s|, the part dropped when the cutoff is
/// frozen at the window start.
pub fn discarded_sum(params: &GridParams, table: &DivisorTable, t: f64) -> Result<f64> {
    let lo = params.t0.powf(params.delta).ceil() as usize;
    let hi = t.powf(params.delta).floor() as usize;
    if hi > table.limit {
        return Err(Error::TableTooSmall { limit: table.limit, needed: hi });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in lo.max(1)..=hi {
        let l = (n as f64).ln();
        acc += table.values[n] * (-params.sigma * l).exp() * Complex64::from_polar(1.0, -t * l);
    }
    Ok(acc.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::EvalPrecision;
    use std::f64::consts::FRAC_PI_2;

    fn evaluator() -> ZetaEvaluator {
        ZetaEvaluator::new(EvalPrecision::default()).unwrap()
    }

    #[test]
    fn trivial_cutoff() {
        let table = sieve_dk(2, 10).unwrap();
        let a = dirichlet_partial(2, 0.75, 123.0, 1, &table).unwrap();
        assert_eq!(a.value, Complex64::new(1.0, 0.0));
        assert_eq!((a.u, a.v), (1.0, 0.0));
    }

    #[test]
    fn split_is_exact() {
        let table = sieve_dk(3, 500).unwrap();
        for t in [50.0, 1234.5, 9.9e5] {
            let a = dirichlet_partial(3, 0.8, t, 400, &table).unwrap();
            assert_eq!(a.u, a.value.re);
            assert_eq!(a.v, a.value.im);
            let direct: Complex64 = (1..400)
                .map(|n| table.values[n] * Complex64::new(0.8, t).scale(-(n as f64).ln()).exp())
                .sum();
            assert!((a.value - direct).norm() < 1e-10);
            assert!((a.u * a.u + a.v * a.v - a.value.norm_sqr()).abs() <= 1e-12 * a.value.norm_sqr());
        }
    }

    #[test]
    fn errors() {
        let t2 = sieve_dk(2, 100).unwrap();
        assert!(matches!(dirichlet_partial(2, 0.75, 10.0, 200, &t2), Err(Error::TableTooSmall { .. })));
        assert!(matches!(dirichlet_partial(3, 0.75, 10.0, 50, &t2), Err(Error::TableOrder { .. })));
        assert!(dirichlet_partial(2, 0.75, 10.0, 0, &t2).is_err());
        assert!(dirichlet_partial(2, 0.75, -1.0, 10, &t2).is_err());
    }

    #[test]
    fn long_polynomial_tracks_zeta() {
        let table = sieve_dk(1, 10_000).unwrap();
        let a = dirichlet_partial(1, 0.75, 1.0e4, 10_000, &table).unwrap();
        let z = evaluator().eval(0.75, &[1.0e4]).unwrap()[0];
        assert!((a.value - z).norm() <= 0.05, "{}", (a.value - z).norm());
    }

    #[test]
    fn k1_residual_is_the_dirichlet_tail() {
        // ζ(s) − Σ_{n<N} n^−s = Σ_{n≥N} n^−s, summed directly out to n ~ t
        // with the Euler–Maclaurin remainder beyond.
        let (sigma, t, n) = (0.75, 1.0e4, 100usize);
        let table = sieve_dk(1, n).unwrap();
        let z = evaluator().eval(sigma, &[t]).unwrap()[0];
        let r = (z - dirichlet_partial(1, sigma, t, n, &table).unwrap().value).norm();
        let s = Complex64::new(sigma, t);
        let m = 40_000usize;
        let mut tail: Complex64 = (n..m).map(|k| (-s * (k as f64).ln()).exp()).sum();
        let mf = m as f64;
        tail += (-s * mf.ln()).exp() * (mf / (s - 1.0) + 0.5 + s / (12.0 * mf));
        assert!((r - tail.norm()).abs() < 1e-6, "{r} vs {}", tail.norm());
        assert!(r <= 10.0 * (n as f64).powf(-sigma));
    }

    #[test]
    fn square_of_k1_polynomial_is_k2_polynomial() {
        let n = 1000;
        let (d1, d2) = (sieve_dk(1, n).unwrap(), sieve_dk(2, n).unwrap());
        for t in [100.0, 777.7, 3.3e4] {
            let p2 = dirichlet_partial(2, 0.7, t, n, &d2).unwrap().value;
            // Cauchy square keeping only products ab < n
            let mut sq = Complex64::new(0.0, 0.0);
            for a in 1..n {
                for b in 1..=(n - 1) / a {
                    sq += d1.values[a] * d1.values[b] * Complex64::new(0.7, t).scale(-((a * b) as f64).ln()).exp();
                }
            }
            assert!((p2 - sq).norm() < 1e-10 * sq.norm().max(1.0));
        }
    }

    #[test]
    fn squared_k1_defect_comparable_to_k2_defect() {
        let (n, t) = (100, 1.0e3);
        let (d1, d2) = (sieve_dk(1, n).unwrap(), sieve_dk(2, n).unwrap());
        let z = evaluator().eval(0.75, &[t]).unwrap()[0];
        let p1 = dirichlet_partial(1, 0.75, t, n, &d1).unwrap().value;
        let p2 = dirichlet_partial(2, 0.75, t, n, &d2).unwrap().value;
        let (e2, esq) = ((z * z - p2).norm(), (z * z - p1 * p1).norm());
        let ratio = e2 / esq;
        assert!((0.5..=2.0).contains(&ratio), "defects {e2} vs {esq}");
    }

    #[test]
    fn tail_term_bound_arithmetic() {
        let p = GridParams::new(1.0e6, 0.43, 0.15, 0.75, 1, FRAC_PI_2, 0.1).unwrap();
        assert!((p.lambda1() - 0.5175).abs() < 1e-12);
        let b = tail_term_bound(&p).unwrap();
        assert!((b.log10() + 3.105).abs() < 1e-12);
        let q = GridParams { epsilon: 0.5, h: 1.0e3, ..p };
        assert!(tail_term_bound(&q).unwrap() > b);
        let bad = GridParams::new(1.0e6, 0.95, 0.5, 0.75, 1, FRAC_PI_2, 0.1).unwrap();
        assert!(matches!(tail_term_bound(&bad), Err(Error::Regime(_))));

        let table = sieve_dk(1, 200).unwrap();
        for t in sample_heights(&p, 50) {
            assert!(discarded_sum(&p, &table, t).unwrap() <= 10.0 * b);
        }
        // a window wide enough to actually discard terms
        let wide = GridParams::new(1.0e4, 0.9, 0.5, 0.75, 1, FRAC_PI_2, 0.1).unwrap();
        let big = discarded_sum(&wide, &table, wide.t_end()).unwrap();
        assert!(big > 0.0);
    }

    #[test]
    fn residual_decays_on_a_short_ladder() {
        let p = GridParams::new(1.0e4, 0.4, 0.3, 0.75, 1, FRAC_PI_2, 0.1).unwrap();
        let d = residual_scan(&p, &[1.0e4, 1.0e5, 1.0e6], 48, &evaluator(), Exec::Parallel).unwrap();
        assert_eq!(d.windows.len(), 3);
        assert!(d.windows.iter().all(|w| w.samples.iter().all(|s| s.1 >= 0.0)));
        assert!(d.fitted_exponent > 0.0, "{d:?}");
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 48);
    }

    #[test]
    fn fit_slope_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 0.25 * v).collect();
        assert!((fit_slope(&x, &y) + 0.25).abs() < 1e-15);
    }
}
