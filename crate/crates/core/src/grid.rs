//! The theta grid θ(t_ν(τ)) = πν + τ and the disconnected sets
//! G(x) = ∪ (t_ν(−x), t_ν(x)) over the ν with T ≤ t_ν(0) ≤ T + H.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dd::{self, Dd};
use crate::error::{domain, Error, Result};
use crate::par::{self, Exec};
use crate::special_fn::{theta, theta_dd_at, theta_deriv_unchecked};

/// Largest residual |θ(t) − (πν + τ)| a solved point may carry.
pub const RESIDUAL_TOL: f64 = 1e-9;
const NEWTON_CAP: usize = 60;
const BISECTION_CAP: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(rename = "T")]
    pub t0: f64,
    pub epsilon: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub delta: f64,
    pub sigma: f64,
    pub k: u32,
    pub x: f64,
    pub eta: f64,
}

/// Shipped parameter sets. The strict exponent chain 2δη + 2δ < ε is
/// asymptotic; these favour enough grid points over satisfying it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    T1e5,
    T1e6,
    T1e7,
    T1e8,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::T1e5, Preset::T1e6, Preset::T1e7, Preset::T1e8];

    /// (T, ε, δ)
    pub fn exponents(self) -> (f64, f64, f64) {
        match self {
            Preset::T1e5 => (1.0e5, 0.52, 0.18),
            Preset::T1e6 => (1.0e6, 0.43, 0.15),
            Preset::T1e7 => (1.0e7, 0.40, 0.12),
            Preset::T1e8 => (1.0e8, 0.35, 0.10),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Preset> {
        match s {
            "T1e5" => Ok(Preset::T1e5),
            "T1e6" => Ok(Preset::T1e6),
            "T1e7" => Ok(Preset::T1e7),
            "T1e8" => Ok(Preset::T1e8),
            _ => Err(Error::InvalidParams(format!("unknown preset {s:?} (expected T1e5..T1e8)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl GridParams {
    pub fn new(t0: f64, epsilon: f64, delta: f64, sigma: f64, k: u32, x: f64, eta: f64) -> Result<Self> {
        let p = GridParams { t0, epsilon, h: t0.powf(epsilon), delta, sigma, k, x, eta };
        p.validate()?;
        Ok(p)
    }

    /// Window [T, T+H] given directly; ε is recovered as ln H / ln T.
    pub fn from_window(t0: f64, h: f64, delta: f64, sigma: f64, k: u32, x: f64, eta: f64) -> Result<Self> {
        let p = GridParams { t0, epsilon: h.ln() / t0.ln(), h, delta, sigma, k, x, eta };
        p.validate()?;
        Ok(p)
    }

    /// Preset exponents with σ = 3/4, k = 1, x = π/2, η = 0.1.
    pub fn preset(p: Preset) -> Self {
        let (t0, eps, delta) = p.exponents();
        GridParams::new(t0, eps, delta, 0.75, 1, FRAC_PI_2, 0.1).expect("presets are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(self.t0 >= 1.0e3) || !self.t0.is_finite() {
            return bad("T must be finite and >= 1e3");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if !(self.h > 0.0) || (self.h - self.t0.powf(self.epsilon)).abs() > 1e-9 * self.h {
            return bad("H must equal T^epsilon");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta must lie in (0, 1)");
        }
        if !(self.sigma > 0.5 && self.sigma < 1.0) {
            return bad("sigma must lie in (1/2, 1)");
        }
        if self.k == 0 {
            return bad("k must be >= 1");
        }
        if !(self.x > 0.0 && self.x <= FRAC_PI_2) {
            return bad("x must lie in (0, pi/2]");
        }
        if !(self.eta > 0.0) {
            return bad("eta must be positive");
        }
        Ok(())
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }

    /// ln(T/2π)
    pub fn log_factor(&self) -> f64 {
        (self.t0 / (2.0 * PI)).ln()
    }

    /// (1/2π) H ln(T/2π), the grid-count main term.
    pub fn count_main_term(&self) -> f64 {
        self.h * self.log_factor() / (2.0 * PI)
    }

    /// λ₁ = 1 − δ − ε + δσ − δη
    pub fn lambda1(&self) -> f64 {
        1.0 - self.delta - self.epsilon + self.delta * self.sigma - self.delta * self.eta
    }

    /// Exclusive Dirichlet cutoff: the polynomial runs over n < T^δ.
    pub fn cutoff(&self) -> usize {
        self.t0.powf(self.delta).ceil() as usize
    }

    /// Asymptotic side conditions that fail at these parameters.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let chain = 2.0 * self.delta * self.eta + 2.0 * self.delta;
        if chain >= self.epsilon {
            w.push(format!("2δη + 2δ = {chain:.4} is not below ε = {:.4}", self.epsilon));
        }
        if self.lambda1() <= 0.0 {
            w.push(format!("λ₁ = {:.4} is not positive", self.lambda1()));
        }
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub nu: i64,
    pub tau: f64,
    /// The root rounded to f64.
    pub t: f64,
    /// Remainder: the root is `t + t_lo` with |t_lo| ≤ ulp(t)/2.
    pub t_lo: f64,
    pub residual: f64,
}

impl GridPoint {
    fn root(&self) -> Dd {
        Dd { hi: self.t, lo: self.t_lo }
    }
}

fn target(nu: i64, tau: f64) -> Dd {
    dd::PI.mul_f64(nu as f64).add_f64(tau)
}

/// Inverts the leading term (t/2) ln(t/2π) − t/2 − π/8 = c by fixed-point
/// iteration.
fn seed(c: f64) -> f64 {
    let mut t = c.max(30.0);
    for _ in 0..3 {
        t = 2.0 * (c + 0.5 * t + PI / 8.0) / (t / (2.0 * PI)).ln();
    }
    t
}

fn newton(mut t: Dd, goal: Dd) -> Option<Dd> {
    for _ in 0..NEWTON_CAP {
        if !(t.hi > 10.0) || !t.hi.is_finite() {
            return None;
        }
        let r = (theta_dd_at(t).ok()? - goal).to_f64();
        let step = r / theta_deriv_unchecked(t.hi);
        t = t.add_f64(-step);
        if step.abs() <= 1e-30 * t.hi {
            return Some(t);
        }
    }
    let r = (theta_dd_at(t).ok()? - goal).to_f64();
    (r.abs() <= RESIDUAL_TOL).then_some(t)
}

fn bisect(goal: Dd, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match theta_dd_at(Dd::from_f64(mid)) {
            Ok(v) if v < goal => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

/// Root of θ(t) = πν + τ, found by Newton iteration in double-double from
/// an inverted-asymptotic seed, with bisection on [t₀/2, 2t₀] as fallback.
pub fn solve_grid_point(nu: i64, tau: f64) -> Result<GridPoint> {
    if !(-PI..=PI).contains(&tau) {
        return Err(domain("solve_grid_point", format!("tau must lie in [-pi, pi], got {tau}")));
    }
    let goal = target(nu, tau);
    if goal.to_f64() < theta(10.0)? {
        return Err(domain("solve_grid_point", format!("pi*nu + tau = {} has no root above 10", goal.to_f64())));
    }
    let t0 = seed(goal.to_f64());
    let root = newton(Dd::from_f64(t0), goal).or_else(|| {
        let b = bisect(goal, (0.5 * t0).max(10.0), 2.0 * t0);
        newton(Dd::from_f64(b), goal)
    });
    let fail = |residual| Error::NoConvergence { nu, tau, residual };
    let root = root.ok_or_else(|| fail(f64::NAN))?;
    let residual = (theta_dd_at(root)? - goal).to_f64().abs();
    if !(residual <= RESIDUAL_TOL) || !(root.hi > 10.0) {
        return Err(fail(residual));
    }
    Ok(GridPoint { nu, tau, t: root.hi, t_lo: root.lo, residual })
}

/// Indices ν whose anchor t_ν(0) lies in [T, T+H].
pub fn grid_indices(params: &GridParams) -> Result<(i64, i64)> {
    let first_at_or_above = |t: f64| -> Result<i64> {
        let mut nu = (theta(t)? / PI).ceil() as i64;
        // the estimate can be off by one when θ(t)/π is within rounding of an integer
        while solve_grid_point(nu - 1, 0.0)?.t >= t {
            nu -= 1;
        }
        while solve_grid_point(nu, 0.0)?.t < t {
            nu += 1;
        }
        Ok(nu)
    };
    let lo = first_at_or_above(params.t0)?;
    let mut hi = first_at_or_above(params.t_end())?;
    if solve_grid_point(hi, 0.0)?.t > params.t_end() {
        hi -= 1;
    }
    Ok((lo, hi))
}

/// Grid points t_ν(τ) for every ν with T ≤ t_ν(0) ≤ T + H, in order of ν.
pub fn enumerate_grid(params: &GridParams, tau: f64) -> Result<Vec<GridPoint>> {
    enumerate_grid_with(params, tau, par::default_exec())
}

pub fn enumerate_grid_with(params: &GridParams, tau: f64, exec: Exec) -> Result<Vec<GridPoint>> {
    params.validate()?;
    let (lo, hi) = grid_indices(params)?;
    if hi < lo {
        return Ok(Vec::new());
    }
    par::try_map_range(exec, 0, (hi - lo + 1) as usize, |i| solve_grid_point(lo + i as i64, tau))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub nu: i64,
    pub lo: f64,
    pub hi: f64,
    /// t_ν(x) − t_ν(−x) computed from the double-double roots.
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisconnectedSet {
    pub intervals: Vec<Interval>,
    pub params: GridParams,
}

/// Overlap allowed before two intervals are declared intersecting; the
/// sets at x = π/2 abut exactly and may differ by rounding.
const ABUT_ULPS: f64 = 4.0;

impl DisconnectedSet {
    /// How far the first and last intervals stick out of [T, T+H].
    pub fn protrusion(&self) -> (f64, f64) {
        match (self.intervals.first(), self.intervals.last()) {
            (Some(a), Some(b)) => ((self.params.t0 - a.lo).max(0.0), (b.hi - self.params.t_end()).max(0.0)),
            _ => (0.0, 0.0),
        }
    }

    /// Gaps between consecutive intervals (zero when they abut).
    pub fn gaps(&self) -> Vec<f64> {
        self.intervals.windows(2).map(|w| (w[1].lo - w[0].hi).max(0.0)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "nu,lo,hi")?;
        for iv in &self.intervals {
            writeln!(w, "{},{:?},{:?}", iv.nu, iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

/// G(x) with one interval (t_ν(−x), t_ν(x)) per anchored ν.
pub fn build_g_set(params: &GridParams) -> Result<DisconnectedSet> {
    build_g_set_with(params, par::default_exec())
}

pub fn build_g_set_with(params: &GridParams, exec: Exec) -> Result<DisconnectedSet> {
    params.validate()?;
    let (lo, hi) = grid_indices(params)?;
    let count = if hi < lo { 0 } else { (hi - lo + 1) as usize };
    let x = params.x;
    let intervals = par::try_map_range(exec, 0, count, |i| {
        let nu = lo + i as i64;
        let a = solve_grid_point(nu, -x)?;
        let b = solve_grid_point(nu, x)?;
        Ok(Interval { nu, lo: a.t, hi: b.t, length: (b.root() - a.root()).to_f64() })
    })?;
    for (i, w) in intervals.windows(2).enumerate() {
        let overlap = w[0].hi - w[1].lo;
        if overlap > ABUT_ULPS * f64::EPSILON * w[0].hi {
            return Err(Error::Overlap { index: i, next: i + 1, overlap });
        }
    }
    Ok(DisconnectedSet { intervals, params: *params })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub measure: f64,
    /// (2x/π) H
    pub main_term: f64,
    pub deviation: f64,
}

/// Total length of the set.
pub fn measure(set: &DisconnectedSet) -> f64 {
    set.intervals.iter().map(|iv| iv.length).sum()
}

pub fn measure_report(set: &DisconnectedSet) -> MeasureReport {
    let m = measure(set);
    let main_term = 2.0 * set.params.x / PI * set.params.h;
    MeasureReport { measure: m, main_term, deviation: m - main_term }
}

pub fn write_grid_csv<W: Write>(points: &[GridPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "nu,tau,t,residual")?;
    for p in points {
        writeln!(w, "{},{:?},{:?},{:?}", p.nu, p.tau, p.t, p.residual)?;
    }
    Ok(())
}
