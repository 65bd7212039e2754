use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::grid::GridParams;

/// Every claim the runner knows how to verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    Count,
    Spacing,
    Lemma1,
    Lemma2,
    Lemma3,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma7,
    Thm1,
    Thm2,
    Cor1,
    Cor2,
    Cor3,
    Cor4,
    Main,
    ResidualScan,
    TauScan,
    Identities,
}

impl ClaimId {
    pub const ALL: [ClaimId; 19] = [
        ClaimId::Count,
        ClaimId::Spacing,
        ClaimId::Lemma1,
        ClaimId::Lemma2,
        ClaimId::Lemma3,
        ClaimId::Lemma4,
        ClaimId::Lemma5,
        ClaimId::Lemma6,
        ClaimId::Lemma7,
        ClaimId::Thm1,
        ClaimId::Thm2,
        ClaimId::Cor1,
        ClaimId::Cor2,
        ClaimId::Cor3,
        ClaimId::Cor4,
        ClaimId::Main,
        ClaimId::ResidualScan,
        ClaimId::TauScan,
        ClaimId::Identities,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::Count => "count",
            ClaimId::Spacing => "spacing",
            ClaimId::Lemma1 => "lemma1",
            ClaimId::Lemma2 => "lemma2",
            ClaimId::Lemma3 => "lemma3",
            ClaimId::Lemma4 => "lemma4",
            ClaimId::Lemma5 => "lemma5",
            ClaimId::Lemma6 => "lemma6",
            ClaimId::Lemma7 => "lemma7",
            ClaimId::Thm1 => "thm1",
            ClaimId::Thm2 => "thm2",
            ClaimId::Cor1 => "cor1",
            ClaimId::Cor2 => "cor2",
            ClaimId::Cor3 => "cor3",
            ClaimId::Cor4 => "cor4",
            ClaimId::Main => "main",
            ClaimId::ResidualScan => "residual_scan",
            ClaimId::TauScan => "tau_scan",
            ClaimId::Identities => "identities",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown claim {s:?}")))
    }
}

/// Closed acceptance interval for a report's ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Band { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl FromStr for Band {
    type Err = Error;
    /// `lo,hi`
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidParams(format!("band must be lo,hi with lo <= hi, got {s:?}"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let lo: f64 = a.trim().parse().map_err(|_| bad())?;
        let hi: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(lo <= hi) {
            return Err(bad());
        }
        Ok(Band { lo, hi })
    }
}

/// An unconditional or structural check attached to a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), passed: value <= limit, value, limit }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), passed: value >= limit, value, limit }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanValueReport {
    pub claim_id: ClaimId,
    pub computed: f64,
    pub main_term: f64,
    pub ratio: f64,
    pub error_observed: f64,
    pub error_scale_predicted: f64,
    pub params: GridParams,
    pub tau: Option<f64>,
    pub band: Option<Band>,
    pub checks: Vec<Check>,
    pub diagnostics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl MeanValueReport {
    pub fn new(claim_id: ClaimId, computed: f64, main_term: f64, error_scale_predicted: f64, params: &GridParams) -> Self {
        let mut r = MeanValueReport {
            claim_id,
            computed,
            main_term,
            ratio: computed / main_term,
            error_observed: (computed - main_term).abs(),
            error_scale_predicted,
            params: *params,
            tau: None,
            band: None,
            checks: Vec::new(),
            diagnostics: BTreeMap::new(),
            warnings: params.warnings(),
            passed: true,
        };
        r.evaluate();
        r
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn with_band(mut self, band: Option<Band>) -> Self {
        self.band = band;
        self.evaluate();
        self
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
        self.evaluate();
    }

    pub fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    /// Recomputes `passed`: ratio finite and inside the band, every check passing.
    pub fn evaluate(&mut self) {
        let in_band = self.band.is_none_or(|b| b.contains(self.ratio));
        self.passed = self.ratio.is_finite() && in_band && self.checks.iter().all(|c| c.passed);
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    /// JSON with every number rounded to 15 significant digits.
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        round_json(&mut v);
        v
    }

    pub const CSV_HEADER: &'static str =
        "claim_id,T,H,sigma,k,x,tau,computed,main_term,ratio,error_observed,error_scale_predicted,band_lo,band_hi,passed";

    pub fn csv_row(&self) -> String {
        let f = |x: f64| fmt15(x);
        let opt = |x: Option<f64>| x.map(fmt15).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.claim_id,
            f(self.params.t0),
            f(self.params.h),
            f(self.params.sigma),
            self.params.k,
            f(self.params.x),
            opt(self.tau),
            f(self.computed),
            f(self.main_term),
            f(self.ratio),
            f(self.error_observed),
            f(self.error_scale_predicted),
            opt(self.band.map(|b| b.lo)),
            opt(self.band.map(|b| b.hi)),
            self.passed
        )
    }
}

/// x rounded to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Shortest decimal text of [`round15`]`(x)`.
pub fn fmt15(x: f64) -> String {
    let r = round15(x);
    if r.is_finite() {
        format!("{r}")
    } else {
        format!("{x}")
    }
}

/// Rounds every floating-point number inside `v` to 15 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round15).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}
