//! Sums over one grid {t_ν(τ) : T ≤ t_ν ≤ T + H} of the Dirichlet-polynomial
//! quantities U_k, U_k², V_k², S₁, w₂ = S₁², w₃ = S₂², and of |ζ|^2k.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::report::{ClaimId, MeanValueReport};
use crate::approx::DirichletPoly;
use crate::divisor::{f_partial, f_series, sieve_dk, SeriesValue};
use crate::error::{domain, Error, Result};
use crate::grid::{enumerate_grid_with, GridParams, GridPoint};
use crate::par::{self, Exec};
use crate::special_fn::ZetaEvaluator;

/// Relative tolerance for the F(σ, ω) values that enter main terms.
pub const F_REL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Uk,
    UkSq,
    VkSq,
    S1,
    W2,
    W3,
    AbsZeta2k,
}

impl Quantity {
    pub fn claim(self) -> ClaimId {
        match self {
            Quantity::Uk => ClaimId::Lemma2,
            Quantity::W2 => ClaimId::Lemma3,
            Quantity::UkSq | Quantity::S1 => ClaimId::Lemma4,
            Quantity::W3 => ClaimId::Lemma5,
            Quantity::VkSq => ClaimId::Lemma6,
            Quantity::AbsZeta2k => ClaimId::Lemma7,
        }
    }
}

/// F(σ, k) in full and its diagonal truncated at the Dirichlet cutoff,
/// Σ_{n<T^δ} d_k(n)² n^−2σ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FTerms {
    pub k: u32,
    pub sigma: f64,
    pub cutoff: usize,
    pub full: SeriesValue,
    pub truncated: f64,
}

impl FTerms {
    pub fn new(params: &GridParams) -> Result<Self> {
        let cutoff = params.cutoff();
        let table = sieve_dk(params.k, cutoff.max(2))?;
        Ok(FTerms {
            k: params.k,
            sigma: params.sigma,
            cutoff,
            full: f_series(params.sigma, params.k as f64, F_REL_TOL)?,
            truncated: f_partial(&table, params.sigma, cutoff)?,
        })
    }

    pub fn value(&self) -> f64 {
        self.full.partial_sum
    }

    /// Σ_{n≥cutoff} d_k(n)² n^−2σ, with the uncertainty of F folded in.
    pub fn diagonal_tail(&self) -> f64 {
        self.full.partial_sum - self.truncated + self.full.tail_bound
    }
}

/// (S₁, S₂) at every grid point, in grid order.
pub fn oscillatory_samples(grid: &[GridPoint], poly: &DirichletPoly, exec: Exec) -> Vec<(f64, f64)> {
    par::map_slice(exec, grid, |p| poly.oscillatory(p.t))
}

fn check_poly(params: &GridParams, poly: &DirichletPoly) -> Result<()> {
    if poly.k != params.k || poly.sigma != params.sigma || poly.cutoff != params.cutoff() {
        return Err(Error::InvalidParams("Dirichlet polynomial does not match the grid parameters".into()));
    }
    Ok(())
}

/// Σ over `grid` of `quantity`, reported against its main term with
/// L = H ln(T/2π):
///
/// * U_k: L/2π
/// * w₂, w₃, V_k²: {F_N − 1} L/4π, F_N the diagonal truncated at the cutoff
/// * U_k² = 1 + 2S₁ + w₂: L/2π + {F_N − 1} L/4π (the doubled diagonal
///   {F − 1} L/2π, without the constant term, is kept as a diagnostic)
/// * S₁: the count, so the ratio is the mean of S₁
/// * |ζ|^2k: F(σ, k) L/2π with the untruncated F
pub fn discrete_mean(
    grid: &[GridPoint],
    quantity: Quantity,
    params: &GridParams,
    poly: &DirichletPoly,
    f: &FTerms,
    zeta: Option<&ZetaEvaluator>,
    exec: Exec,
) -> Result<MeanValueReport> {
    check_poly(params, poly)?;
    let l = params.h * params.log_factor();
    let count = grid.len() as f64;
    let diag_main = (f.truncated - 1.0) * l / (4.0 * PI);
    let full_diag_main = (f.value() - 1.0) * l / (4.0 * PI);
    let (computed, main) = if quantity == Quantity::AbsZeta2k {
        let zeta = zeta.ok_or_else(|| Error::InvalidParams("|zeta|^2k needs a zeta evaluator".into()))?;
        if !(params.sigma > 0.5) {
            return Err(domain("abs_zeta_2k", format!("needs sigma > 1/2, got {}", params.sigma)));
        }
        let ts: Vec<f64> = grid.iter().map(|p| p.t).collect();
        let z = zeta.eval(params.sigma, &ts)?;
        let s: f64 = z.iter().map(|v| v.norm_sqr().powi(params.k as i32)).sum();
        (s, f.value() * l / (2.0 * PI))
    } else {
        let xs = oscillatory_samples(grid, poly, exec);
        let term = |&(s1, s2): &(f64, f64)| match quantity {
            Quantity::Uk => 1.0 + s1,
            Quantity::UkSq => (1.0 + s1).powi(2),
            Quantity::VkSq => s2 * s2,
            Quantity::S1 => s1,
            Quantity::W2 => s1 * s1,
            Quantity::W3 => s2 * s2,
            Quantity::AbsZeta2k => unreachable!(),
        };
        let s: f64 = xs.iter().map(term).sum();
        let main = match quantity {
            Quantity::Uk => l / (2.0 * PI),
            Quantity::UkSq => l / (2.0 * PI) + diag_main,
            Quantity::S1 => count,
            _ => diag_main,
        };
        (s, main)
    };
    let tau = grid.first().map_or(0.0, |p| p.tau);
    let mut r = MeanValueReport::new(quantity.claim(), computed, main, params.h, params).with_tau(tau);
    r.diag("count", count);
    r.diag("count_main_term", params.count_main_term());
    r.diag("cutoff", f.cutoff as f64);
    r.diag("f_full", f.value());
    r.diag("f_truncated", f.truncated);
    match quantity {
        Quantity::W2 | Quantity::W3 | Quantity::VkSq => {
            r.diag("main_term_full_f", full_diag_main);
        }
        Quantity::UkSq => {
            r.diag("main_term_full_f", l / (2.0 * PI) + full_diag_main);
            r.diag("main_term_doubled_diagonal", 2.0 * diag_main);
            r.diag("main_term_doubled_diagonal_full_f", 2.0 * full_diag_main);
        }
        _ => {}
    }
    // the same sum with U_k, V_k taken from ζ^k itself rather than its
    // Dirichlet polynomial, against the untruncated F
    if let (Some(zeta), Quantity::Uk | Quantity::UkSq | Quantity::VkSq) = (zeta, quantity) {
        let ts: Vec<f64> = grid.iter().map(|p| p.t).collect();
        let zk: Vec<_> = zeta.eval(params.sigma, &ts)?.into_iter().map(|z| z.powi(params.k as i32)).collect();
        let (s, main): (f64, f64) = match quantity {
            Quantity::Uk => (zk.iter().map(|z| z.re).sum(), l / (2.0 * PI)),
            Quantity::UkSq => (zk.iter().map(|z| z.re * z.re).sum(), l / (2.0 * PI) + full_diag_main),
            _ => (zk.iter().map(|z| z.im * z.im).sum(), full_diag_main),
        };
        r.diag("computed_from_zeta", s);
        r.diag("ratio_from_zeta", s / main);
    }
    Ok(r)
}

/// Grid sums of the three parts of w₂ and of w₃: the product-frequency,
/// ratio-frequency and diagonal terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub w21: f64,
    pub w22: f64,
    pub w23: f64,
    pub w31: f64,
    pub w32: f64,
    pub w33: f64,
    pub w2: f64,
    pub w3: f64,
    pub count: usize,
    /// count · (Σ|a_n|)², the size of every term in the split
    pub scale: f64,
}

impl Decomposition {
    /// Largest of |w₂₁+w₂₂+w₂₃ − w₂| and |w₃₁+w₃₂+w₃₃ − w₃| over
    /// [`Decomposition::scale`]. Phase rounding of t·ln(mn) limits this to
    /// roughly t·ε.
    pub fn partition_error(&self) -> f64 {
        let e2 = (self.w21 + self.w22 + self.w23 - self.w2).abs();
        let e3 = (self.w31 + self.w32 + self.w33 - self.w3).abs();
        e2.max(e3) / self.scale.max(f64::MIN_POSITIVE)
    }
}

pub fn diagonal_decomposition(grid: &[GridPoint], params: &GridParams, poly: &DirichletPoly, exec: Exec) -> Result<Decomposition> {
    check_poly(params, poly)?;
    let (a, ln) = (poly.coefficients(), poly.logs());
    let parts = par::map_slice(exec, grid, |p| {
        let t = p.t;
        let (mut prod, mut ratio, mut diag) = (0.0, 0.0, 0.0);
        for i in 0..a.len() {
            diag += a[i] * a[i];
            for j in 0..a.len() {
                prod += a[i] * a[j] * (t * (ln[i] + ln[j])).cos();
                if j < i {
                    ratio += a[i] * a[j] * (t * (ln[i] - ln[j])).cos();
                }
            }
        }
        let (s1, s2) = poly.oscillatory(t);
        [0.5 * prod, ratio, 0.5 * diag, -0.5 * prod, ratio, 0.5 * diag, s1 * s1, s2 * s2]
    });
    let mut acc = [0.0; 8];
    for part in parts {
        for (x, y) in acc.iter_mut().zip(part) {
            *x += y;
        }
    }
    let [w21, w22, w23, w31, w32, w33, w2, w3] = acc;
    let scale = grid.len() as f64 * a.iter().map(|x| x.abs()).sum::<f64>().powi(2);
    Ok(Decomposition { w21, w22, w23, w31, w32, w33, w2, w3, count: grid.len(), scale })
}

/// Lemma 2's report at `tau_samples` equally spaced τ ∈ [−π, π].
pub fn tau_uniformity_scan(params: &GridParams, tau_samples: usize, poly: &DirichletPoly, f: &FTerms, exec: Exec) -> Result<Vec<MeanValueReport>> {
    if tau_samples < 3 {
        return Err(Error::InvalidParams(format!("tau_samples must be >= 3, got {tau_samples}")));
    }
    (0..tau_samples)
        .map(|j| {
            let tau = -PI + 2.0 * PI * j as f64 / (tau_samples - 1) as f64;
            let grid = enumerate_grid_with(params, tau, exec)?;
            discrete_mean(&grid, Quantity::Uk, params, poly, f, None, exec)
        })
        .collect()
}

/// max − min of the reports' ratios.
pub fn ratio_spread(reports: &[MeanValueReport]) -> f64 {
    let max = reports.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    max - min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{enumerate_grid, Preset};
    use crate::special_fn::EvalPrecision;

    fn setup(k: u32) -> (GridParams, DirichletPoly, FTerms, Vec<GridPoint>) {
        let p = GridParams { k, ..GridParams::preset(Preset::T1e6) };
        let poly = DirichletPoly::for_params(&p).unwrap();
        let f = FTerms::new(&p).unwrap();
        let g = enumerate_grid(&p, 0.0).unwrap();
        (p, poly, f, g)
    }

    #[test]
    fn f_terms() {
        let (p, _, f, _) = setup(2);
        assert_eq!(f.cutoff, 8);
        let direct: f64 = [1.0, 2.0, 2.0, 3.0, 2.0, 4.0, 2.0]
            .iter()
            .enumerate()
            .map(|(i, d)| d * d * ((i + 1) as f64).powf(-1.5))
            .sum();
        assert!((f.truncated - direct).abs() < 1e-13);
        assert!((f.value() - 38.74514414390132).abs() < 1e-6);
        assert!(f.diagonal_tail() > 0.0);
        assert_eq!(p.k, 2);
    }

    #[test]
    fn lemma2_ratio_at_one_million() {
        for k in [1, 2] {
            let (p, poly, f, g) = setup(k);
            let r = discrete_mean(&g, Quantity::Uk, &p, &poly, &f, None, Exec::Parallel).unwrap();
            assert!((0.8..=1.2).contains(&r.ratio), "k = {k}: {}", r.ratio);
        }
    }

    #[test]
    fn squares_are_consistent() {
        let (p, poly, f, g) = setup(2);
        let e = Exec::Sequential;
        let m = |q| discrete_mean(&g, q, &p, &poly, &f, None, e).unwrap().computed;
        let (u2, s1, w2, w3, v2) = (m(Quantity::UkSq), m(Quantity::S1), m(Quantity::W2), m(Quantity::W3), m(Quantity::VkSq));
        assert!((u2 - (g.len() as f64 + 2.0 * s1 + w2)).abs() < 1e-9 * u2);
        assert_eq!(w3, v2);
        // U² + V² = |P|² pointwise
        for pt in &g {
            let a = poly.eval(pt.t);
            assert!((a.u * a.u + a.v * a.v - a.value.norm_sqr()).abs() <= 1e-12 * a.value.norm_sqr());
        }
        let r = discrete_mean(&g, Quantity::UkSq, &p, &poly, &f, None, e).unwrap();
        assert!(r.diagnostics.contains_key("main_term_doubled_diagonal"));
    }

    #[test]
    fn w2_and_w3_share_the_diagonal() {
        let (p, poly, f, g) = setup(2);
        let a = discrete_mean(&g, Quantity::W2, &p, &poly, &f, None, Exec::Parallel).unwrap();
        let b = discrete_mean(&g, Quantity::W3, &p, &poly, &f, None, Exec::Parallel).unwrap();
        assert_eq!(a.main_term, b.main_term);
        assert!((a.computed - b.computed).abs() <= 0.2 * a.main_term);
    }

    #[test]
    fn decomposition_partitions() {
        let (p, poly, f, g) = setup(2);
        let d = diagonal_decomposition(&g, &p, &poly, Exec::Parallel).unwrap();
        assert!(d.partition_error() < 1e-9, "{}", d.partition_error());
        assert_eq!(d.w23, d.w33);
        assert_eq!(d.w21, -d.w31);
        assert!(d.w21.abs() + d.w22.abs() <= 0.3 * d.w23);
        let per_point = d.w23 / d.count as f64;
        assert!((per_point - 0.5 * (f.truncated - 1.0)).abs() < 1e-12);
        assert!((per_point - 0.5 * (f.value() - 1.0)).abs() <= 0.05 * 0.5 * (f.value() - 1.0) + 0.5 * f.diagonal_tail());
    }

    #[test]
    fn decomposition_with_long_polynomial() {
        // a polynomial long enough that the diagonal approaches ½{F − 1}
        let p = GridParams::from_window(1.0e6, 10.0, 0.5, 0.75, 2, std::f64::consts::FRAC_PI_2, 0.1).unwrap();
        let poly = DirichletPoly::for_params(&p).unwrap();
        assert!(poly.cutoff >= 1000);
        let f = FTerms::new(&p).unwrap();
        let g = enumerate_grid(&p, 0.0).unwrap();
        let d = diagonal_decomposition(&g, &p, &poly, Exec::Parallel).unwrap();
        let per_point = d.w23 / d.count as f64;
        let target = 0.5 * (f.value() - 1.0);
        assert!((per_point - target).abs() <= 0.05 * target + 0.5 * f.diagonal_tail());
        assert!(d.partition_error() < 1e-9, "{}", d.partition_error());
    }

    #[test]
    fn abs_zeta_needs_an_evaluator() {
        let (p, poly, f, g) = setup(1);
        assert!(discrete_mean(&g, Quantity::AbsZeta2k, &p, &poly, &f, None, Exec::Parallel).is_err());
        let z = ZetaEvaluator::new(EvalPrecision::default()).unwrap();
        let r = discrete_mean(&g, Quantity::AbsZeta2k, &p, &poly, &f, Some(&z), Exec::Parallel).unwrap();
        assert!((r.main_term / (p.count_main_term() * 2.612375348685488) - 1.0).abs() < 1e-8);
        assert!((0.7..=1.3).contains(&r.ratio), "{}", r.ratio);
    }

    #[test]
    fn tau_scan() {
        let (p, poly, f, _) = setup(2);
        let reps = tau_uniformity_scan(&p, 5, &poly, &f, Exec::Parallel).unwrap();
        assert_eq!(reps.len(), 5);
        assert!(reps.windows(2).all(|w| w[0].main_term == w[1].main_term));
        assert!(ratio_spread(&reps) <= 0.2);
        let again = tau_uniformity_scan(&p, 5, &poly, &f, Exec::Sequential).unwrap();
        assert_eq!(reps, again);
        assert!(tau_uniformity_scan(&p, 2, &poly, &f, Exec::Parallel).is_err());
    }
}
