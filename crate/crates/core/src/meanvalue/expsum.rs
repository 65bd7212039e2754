//! Cosine sums Σ_ν cos(t_ν(τ) λ) over one grid, for the frequencies
//! λ = ln n, ln mn and ln(m/n).

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::report::fmt15;
use crate::error::{Error, Result};
use crate::grid::{GridParams, GridPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpSumMode {
    Single,
    Product,
    Ratio,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSumResult {
    pub mode: ExpSumMode,
    /// Unused (0) in single mode.
    pub m: u64,
    pub n: u64,
    pub tau: f64,
    pub value: f64,
    /// ln T / ln(frequency)
    pub bound_scale: f64,
}

impl ExpSumResult {
    /// |value| / bound scale: the constant the O-estimate would need.
    pub fn envelope(&self) -> f64 {
        self.value.abs() / self.bound_scale
    }
}

/// Σ cos(t_ν ln a), using the double-double root t + t_lo.
pub fn cosine_sum(grid: &[GridPoint], freq: f64) -> f64 {
    grid.iter().map(|p| (p.t * freq + p.t_lo * freq).cos()).sum()
}

pub fn exp_sum(grid: &[GridPoint], params: &GridParams, mode: ExpSumMode, m: u64, n: u64) -> Result<ExpSumResult> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("exp_sum needs n >= 2, got {n}")));
    }
    let freq = match mode {
        ExpSumMode::Single => (n as f64).ln(),
        ExpSumMode::Product => {
            if m < 2 {
                return Err(Error::InvalidParams(format!("product mode needs m >= 2, got {m}")));
            }
            (m as f64).ln() + (n as f64).ln()
        }
        ExpSumMode::Ratio => {
            if m <= n {
                return Err(Error::ArgumentOrder { m, n });
            }
            (m as f64).ln() - (n as f64).ln()
        }
    };
    let tau = grid.first().map_or(0.0, |p| p.tau);
    Ok(ExpSumResult {
        mode,
        m: if mode == ExpSumMode::Single { 0 } else { m },
        n,
        tau,
        value: cosine_sum(grid, freq),
        bound_scale: params.t0.ln() / freq,
    })
}

/// Every single, product and ratio sum with 2 ≤ m, n < T^δ.
pub fn exp_sum_scan(grid: &[GridPoint], params: &GridParams) -> Result<Vec<ExpSumResult>> {
    let top = params.cutoff() as u64;
    let mut out = Vec::new();
    for n in 2..top {
        out.push(exp_sum(grid, params, ExpSumMode::Single, 0, n)?);
    }
    for m in 2..top {
        for n in 2..top {
            if n <= m {
                out.push(exp_sum(grid, params, ExpSumMode::Product, m, n)?);
            }
            if n < m {
                out.push(exp_sum(grid, params, ExpSumMode::Ratio, m, n)?);
            }
        }
    }
    Ok(out)
}

/// max |value| / scale, optionally restricted to one mode.
pub fn envelope(rows: &[ExpSumResult], mode: Option<ExpSumMode>) -> f64 {
    rows.iter().filter(|r| mode.is_none_or(|m| r.mode == m)).map(ExpSumResult::envelope).fold(0.0, f64::max)
}

/// Writes `mode,tau,m,n,value,bound_scale` rows.
pub fn write_csv<W: Write>(rows: &[ExpSumResult], mut w: W) -> io::Result<()> {
    writeln!(w, "mode,tau,m,n,value,bound_scale")?;
    for r in rows {
        let mode = match r.mode {
            ExpSumMode::Single => "single",
            ExpSumMode::Product => "product",
            ExpSumMode::Ratio => "ratio",
        };
        writeln!(w, "{mode},{},{},{},{},{}", fmt15(r.tau), r.m, r.n, fmt15(r.value), fmt15(r.bound_scale))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{enumerate_grid, GridParams, Preset};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn empty_grid_sums_to_zero() {
        let p = GridParams::preset(Preset::T1e6);
        assert_eq!(exp_sum(&[], &p, ExpSumMode::Single, 0, 3).unwrap().value, 0.0);
    }

    #[test]
    fn argument_checks() {
        let p = GridParams::preset(Preset::T1e6);
        assert!(matches!(exp_sum(&[], &p, ExpSumMode::Ratio, 2, 4), Err(Error::ArgumentOrder { m: 2, n: 4 })));
        assert!(matches!(exp_sum(&[], &p, ExpSumMode::Ratio, 3, 3), Err(Error::ArgumentOrder { .. })));
        assert!(exp_sum(&[], &p, ExpSumMode::Single, 0, 1).is_err());
    }

    #[test]
    fn sums_match_direct_cosines() {
        let p = GridParams::from_window(1.0e6, 1.0e3, 0.15, 0.75, 1, FRAC_PI_2, 0.1).unwrap();
        let g = enumerate_grid(&p, 0.5).unwrap();
        let r = exp_sum(&g, &p, ExpSumMode::Ratio, 4, 2).unwrap();
        let direct: f64 = g.iter().map(|q| (q.t * 2f64.ln()).cos()).sum();
        assert!((r.value - direct).abs() < 1e-6);
        assert_eq!(r.tau, 0.5);
        assert!((r.bound_scale - 1.0e6f64.ln() / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn envelope_at_one_million() {
        let p = GridParams::from_window(1.0e6, 1.0e3, 0.15, 0.75, 1, FRAC_PI_2, 0.1).unwrap();
        for tau in [-FRAC_PI_2, 0.0, FRAC_PI_2] {
            let g = enumerate_grid(&p, tau).unwrap();
            let rows = exp_sum_scan(&g, &p).unwrap();
            assert!(envelope(&rows, Some(ExpSumMode::Single)) <= 5.0);
            let ratio42 = rows.iter().find(|r| r.mode == ExpSumMode::Ratio && r.m == 4 && r.n == 2).unwrap();
            assert!(ratio42.value.abs() <= 5.0 * p.t0.ln() / 2f64.ln());
        }
    }

    #[test]
    fn csv_rows() {
        let p = GridParams::preset(Preset::T1e6);
        let g = enumerate_grid(&p, 0.0).unwrap();
        let rows = exp_sum_scan(&g, &p).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), rows.len() + 1);
    }
}
