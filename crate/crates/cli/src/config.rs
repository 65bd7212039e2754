//! Experiment configuration: one JSON file, validated in full before any
//! output is written.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use zetagrid::grid::{GridParams, Preset};
use zetagrid::meanvalue::{Band, ClaimId};
use zetagrid::special_fn::EvalPrecision;

/// Grid parameters as written in the file. Anything left out comes from
/// `preset` (if given) and then from the defaults σ = 0.75, k = 1,
/// x = π/2, η = 0.1. Give at most one of `epsilon` and `H`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    #[serde(rename = "T")]
    pub t0: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub k: Option<u32>,
    pub x: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualSpec {
    pub ladder: Vec<f64>,
    pub samples: usize,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        ResidualSpec { ladder: vec![1.0e4, 1.0e5, 1.0e6, 1.0e7], samples: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub params: ParamSpec,
    /// Runs every claim once per k; overrides `params.k`.
    #[serde(default)]
    pub k_values: Vec<u32>,
    #[serde(default = "default_taus")]
    pub tau_list: Vec<f64>,
    pub claims: Vec<ClaimId>,
    #[serde(default)]
    pub precision: EvalPrecision,
    #[serde(default)]
    pub bands: BTreeMap<ClaimId, [f64; 2]>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cache_path: Option<PathBuf>,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default)]
    pub residual: ResidualSpec,
    #[serde(default = "default_tau_samples")]
    pub tau_samples: usize,
}

fn default_taus() -> Vec<f64> {
    vec![-FRAC_PI_2, 0.0, FRAC_PI_2]
}

fn default_quad_order() -> usize {
    8
}

fn default_tau_samples() -> usize {
    9
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Every claim on every k ∈ {1, 2} at a shipped preset.
    pub fn for_preset(preset: Preset) -> Self {
        ExperimentConfig {
            preset: Some(preset),
            params: ParamSpec::default(),
            k_values: vec![1, 2],
            tau_list: default_taus(),
            claims: ClaimId::ALL.to_vec(),
            precision: EvalPrecision::default(),
            bands: BTreeMap::new(),
            output_dir: PathBuf::from(format!("reports/{preset}")),
            cache_path: None,
            quad_order: default_quad_order(),
            residual: ResidualSpec::default(),
            tau_samples: default_tau_samples(),
        }
    }

    /// Grid parameters for one k, after presets and defaults are applied.
    pub fn grid_params(&self, k: u32) -> Result<GridParams> {
        let p = &self.params;
        let (pt, pe, pd) = match self.preset {
            Some(pr) => {
                let (t, e, d) = pr.exponents();
                (Some(t), Some(e), Some(d))
            }
            None => (None, None, None),
        };
        let t0 = p.t0.or(pt).context("params.T is required without a preset")?;
        let delta = p.delta.or(pd).context("params.delta is required without a preset")?;
        let sigma = p.sigma.unwrap_or(0.75);
        let x = p.x.unwrap_or(FRAC_PI_2);
        let eta = p.eta.unwrap_or(0.1);
        let params = match (p.epsilon, p.h) {
            (Some(_), Some(_)) => bail!("give at most one of params.epsilon and params.H"),
            (None, Some(h)) => GridParams::from_window(t0, h, delta, sigma, k, x, eta)?,
            (e, None) => {
                let eps = e.or(pe).context("params.epsilon or params.H is required without a preset")?;
                GridParams::new(t0, eps, delta, sigma, k, x, eta)?
            }
        };
        Ok(params)
    }

    pub fn ks(&self) -> Vec<u32> {
        if self.k_values.is_empty() {
            vec![self.params.k.unwrap_or(1)]
        } else {
            self.k_values.clone()
        }
    }

    pub fn band_overrides(&self) -> BTreeMap<ClaimId, Band> {
        self.bands.iter().map(|(c, [lo, hi])| (*c, Band::new(*lo, *hi))).collect()
    }

    /// Everything that can be checked without evaluating a claim.
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.claims.is_empty(), "claims must not be empty");
        let ks = self.ks();
        ensure!(ks.iter().all(|&k| k >= 1), "k values must be >= 1");
        for &k in &ks {
            self.grid_params(k)?;
        }
        ensure!(!self.tau_list.is_empty(), "tau_list must not be empty");
        for &tau in &self.tau_list {
            ensure!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&tau), "tau {tau} lies outside [-pi, pi]");
        }
        self.precision.validate()?;
        for (c, [lo, hi]) in &self.bands {
            ensure!(lo.is_finite() && hi.is_finite() && lo < hi, "band for {c} must have finite lo < hi, got [{lo}, {hi}]");
        }
        ensure!(self.quad_order >= zetagrid::meanvalue::integral::MIN_QUAD_ORDER, "quad_order must be >= 8");
        ensure!(self.residual.ladder.len() >= 2, "residual.ladder needs at least two heights");
        ensure!(self.residual.samples >= 10, "residual.samples must be >= 10");
        ensure!(self.tau_samples >= 2, "tau_samples must be >= 2");
        ensure!(!self.output_dir.as_os_str().is_empty(), "output_dir must not be empty");
        Ok(())
    }
}
