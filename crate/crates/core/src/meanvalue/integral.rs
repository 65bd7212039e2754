//! Integrals over G(x) by composite Gauss–Legendre quadrature, and the
//! bracketing report for the normalized mean of |ζ|^(2k−1).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::report::{Band, Check, ClaimId, MeanValueReport};
use crate::approx::DirichletPoly;
use crate::divisor::f_series;
use crate::error::{Error, Result};
use crate::grid::{measure, DisconnectedSet, GridParams};
use crate::par::{self, Exec};
use crate::quadrature::{integrate_doubling, Integral};
use crate::special_fn::ZetaEvaluator;

use super::discrete::F_REL_TOL;

/// Minimum Gauss–Legendre order per interval.
pub const MIN_QUAD_ORDER: usize = 8;
/// Slack for inequalities that hold exactly in real arithmetic.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    /// U_k from the Dirichlet polynomial
    Uk,
    /// |U_k| from the Dirichlet polynomial
    AbsUk,
    /// |ζ(σ+it)|^p
    AbsZetaPow(u32),
    /// Re ζ(σ+it)^p
    ReZetaPow(u32),
    ConstOne,
}

/// Evaluates an integrand at a batch of heights.
pub struct Integrands<'a> {
    pub params: &'a GridParams,
    pub poly: &'a DirichletPoly,
    pub zeta: &'a ZetaEvaluator,
    pub exec: Exec,
}

impl Integrands<'_> {
    pub fn values(&self, which: Integrand, ts: &[f64]) -> Result<Vec<f64>> {
        Ok(match which {
            Integrand::Uk => par::map_slice(self.exec, ts, |&t| self.poly.eval(t).u),
            Integrand::AbsUk => par::map_slice(self.exec, ts, |&t| self.poly.eval(t).u.abs()),
            Integrand::ConstOne => vec![1.0; ts.len()],
            Integrand::AbsZetaPow(p) => self.zeta(ts)?.iter().map(|z| z.norm().powi(p as i32)).collect(),
            Integrand::ReZetaPow(p) => self.zeta(ts)?.iter().map(|z| z.powi(p as i32).re).collect(),
        })
    }

    fn zeta(&self, ts: &[f64]) -> Result<Vec<Complex64>> {
        self.zeta.eval(self.params.sigma, ts)
    }

    pub fn integrate(&self, set: &DisconnectedSet, which: Integrand, order: usize) -> Result<Integral> {
        if order < MIN_QUAD_ORDER {
            return Err(Error::InvalidParams(format!("quad_order must be >= {MIN_QUAD_ORDER}, got {order}")));
        }
        let pieces: Vec<(f64, f64)> = set.intervals.iter().map(|i| (i.lo, i.hi)).collect();
        if which == Integrand::AbsUk {
            // |U_k| has kinks at the zeros of U_k; integrate ±U_k between them
            let (pieces, signs) = self.sign_pieces(&pieces);
            return integrate_doubling(&pieces, order, |ts| {
                let q = ts.len() / pieces.len();
                let u = self.values(Integrand::Uk, ts)?;
                Ok(u.iter().enumerate().map(|(i, v)| signs[i / q] * v).collect())
            });
        }
        integrate_doubling(&pieces, order, |ts| self.values(which, ts))
    }

    /// Splits each interval at the sign changes of U_k, located on a
    /// 64-point scan and refined by bisection.
    fn sign_pieces(&self, intervals: &[(f64, f64)]) -> (Vec<(f64, f64)>, Vec<f64>) {
        const SCAN: usize = 64;
        let u = |t: f64| self.poly.eval(t).u;
        let split = par::map_slice(self.exec, intervals, |&(a, b)| {
            let mut out = Vec::new();
            let mut start = a;
            let mut prev = (a, u(a));
            for j in 1..=SCAN {
                let x = if j == SCAN { b } else { a + (b - a) * j as f64 / SCAN as f64 };
                let ux = u(x);
                if prev.1 * ux < 0.0 {
                    let (mut lo, mut hi) = (prev.0, x);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if (u(mid) < 0.0) == (prev.1 < 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let root = 0.5 * (lo + hi);
                    out.push((start, root, prev.1.signum()));
                    start = root;
                }
                prev = (x, ux);
            }
            out.push((start, b, if prev.1 < 0.0 { -1.0 } else { 1.0 }));
            out
        });
        split.into_iter().flatten().map(|(a, b, s)| ((a, b), s)).unzip()
    }
}

/// ∫_{G(x)} of `integrand` against its main term:
///
/// * U_k, |U_k|: (2x/π)H
/// * |ζ|^2k: (2x/π)F(σ,k)H
/// * |ζ|^(2k−1): (2x/π)H √F(σ,2k−1), the upper anchor
/// * Re ζ^p: (2x/π)H
/// * 1: m{G(x)}
pub fn integrate_over_set(set: &DisconnectedSet, integrand: Integrand, ctx: &Integrands<'_>, quad_order: usize) -> Result<MeanValueReport> {
    let params = ctx.params;
    let k = params.k;
    let base = 2.0 * params.x / PI * params.h;
    let (claim, main) = match integrand {
        Integrand::Uk => (ClaimId::Thm1, base),
        Integrand::AbsUk => (ClaimId::Cor2, base),
        Integrand::ConstOne => (ClaimId::Spacing, measure(set)),
        Integrand::ReZetaPow(_) => (ClaimId::Cor3, base),
        Integrand::AbsZetaPow(p) if p == 2 * k => (ClaimId::Thm2, base * f_series(params.sigma, k as f64, F_REL_TOL)?.partial_sum),
        Integrand::AbsZetaPow(p) if p + 1 == 2 * k => {
            (ClaimId::Cor4, base * f_series(params.sigma, p as f64, F_REL_TOL)?.partial_sum.sqrt())
        }
        Integrand::AbsZetaPow(_) => (ClaimId::Cor3, base),
    };
    let i = ctx.integrate(set, integrand, quad_order)?;
    let mut r = MeanValueReport::new(claim, i.value, main, params.x * params.h / params.t0.ln(), params);
    r.diag("quadrature_rel_change", i.rel_change);
    r.diag("quadrature_order", i.order as f64);
    r.diag("measure", measure(set));
    r.diag("intervals", set.intervals.len() as f64);
    Ok(r)
}

/// Everything the bracketing inequality and its two mechanisms need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub measure: f64,
    /// ∫|ζ|^(2k−1)
    pub odd_moment: f64,
    /// ∫|ζ|^(4k−2)
    pub doubled_moment: f64,
    /// ∫ Re ζ^(2k−1)
    pub re_moment: f64,
    /// (1/m) ∫|ζ|^(2k−1)
    pub mean: f64,
    pub f_odd: f64,
    pub pointwise_violations: usize,
    pub nodes: usize,
    pub quadrature_rel_change: f64,
}

pub fn bracket(set: &DisconnectedSet, ctx: &Integrands<'_>, quad_order: usize) -> Result<Bracket> {
    let p = 2 * ctx.params.k - 1;
    let odd = ctx.integrate(set, Integrand::AbsZetaPow(p), quad_order)?;
    let doubled = ctx.integrate(set, Integrand::AbsZetaPow(2 * p), quad_order)?;
    let re = ctx.integrate(set, Integrand::ReZetaPow(p), quad_order)?;
    // pointwise |ζ^p| ≥ |Re ζ^p| at every node used
    let mut violations = 0;
    let mut nodes = 0;
    for order in [quad_order, 2 * quad_order] {
        let rule = crate::quadrature::GaussLegendre::new(order)?;
        let ts: Vec<f64> = set.intervals.iter().flat_map(|i| rule.map(i.lo, i.hi).collect::<Vec<_>>()).collect();
        let z = ctx.zeta(&ts)?;
        nodes += ts.len();
        violations += z.iter().filter(|z| {
            let w = z.powi(p as i32);
            w.re.abs() > w.norm() * (1.0 + ROUNDING_SLACK)
        }).count();
    }
    let m = measure(set);
    Ok(Bracket {
        measure: m,
        odd_moment: odd.value,
        doubled_moment: doubled.value,
        re_moment: re.value,
        mean: odd.value / m,
        f_odd: f_series(ctx.params.sigma, p as f64, F_REL_TOL)?.partial_sum,
        pointwise_violations: violations,
        nodes,
        quadrature_rel_change: odd.rel_change.max(doubled.rel_change).max(re.rel_change),
    })
}

impl Bracket {
    /// (1/m)∫|ζ|^(2k−1) with the band (lower, √F(σ,2k−1) + upper_slack),
    /// plus the unconditional Cauchy–Schwarz and |U_(2k−1)| checks.
    pub fn report(&self, params: &GridParams, band: Band) -> MeanValueReport {
        let mut r = MeanValueReport::new(ClaimId::Main, self.mean, 1.0, 1.0 / params.t0.ln(), params).with_band(Some(band));
        let cs = self.measure.sqrt() * self.doubled_moment.sqrt();
        r.check(Check::at_most("cauchy_schwarz", self.odd_moment, cs * (1.0 + ROUNDING_SLACK)));
        r.check(Check::at_least("abs_u_chain", self.odd_moment * (1.0 + ROUNDING_SLACK), self.re_moment.abs()));
        r.check(Check::at_most("pointwise_violations", self.pointwise_violations as f64, 0.0));
        r.check(Check::at_least("measure_positive", self.measure, f64::MIN_POSITIVE));
        r.diag("upper_anchor", self.f_odd.sqrt());
        r.diag("f_odd", self.f_odd);
        r.diag("measure", self.measure);
        r.diag("odd_moment", self.odd_moment);
        r.diag("doubled_moment", self.doubled_moment);
        r.diag("re_moment", self.re_moment);
        r.diag("cauchy_schwarz_bound", cs);
        r.diag("nodes", self.nodes as f64);
        r.diag("quadrature_rel_change", self.quadrature_rel_change);
        r
    }
}

/// Default band of the bracketing report: (0.9, √F(σ,2k−1) + slack) with
/// slack 0.1 for k = 1 and 0.15 otherwise.
pub fn default_bracket_band(k: u32, f_odd: f64) -> Band {
    Band::new(0.9, f_odd.sqrt() + if k == 1 { 0.1 } else { 0.15 })
}

pub fn bracket_report(set: &DisconnectedSet, ctx: &Integrands<'_>, quad_order: usize, band: Option<Band>) -> Result<MeanValueReport> {
    let b = bracket(set, ctx, quad_order)?;
    let band = band.unwrap_or_else(|| default_bracket_band(ctx.params.k, b.f_odd));
    Ok(b.report(ctx.params, band))
}
