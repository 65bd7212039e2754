//! Gauss–Legendre rules and composite integration over unions of intervals.
//!
//! Integrands are evaluated in one batch per rule so that ζ can be computed
//! block-wise by the batch evaluator instead of point by point.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest relative change tolerated when the order is doubled.
pub const DOUBLING_TOL: f64 = 1e-6;

/// Nodes and weights on [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParams("quadrature order must be >= 1".into()));
        }
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes mapped onto [a, b], in order.
    pub fn map(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().map(move |x| mid + half * x)
    }
}

/// (P_n(x), P_n′(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One composite Gauss–Legendre sum. `f` receives every node of every
/// interval at once (intervals in order, nodes in order) and returns one
/// value per node.
pub fn composite<F>(intervals: &[(f64, f64)], rule: &GaussLegendre, f: F) -> Result<f64>
where
    F: FnOnce(&[f64]) -> Result<Vec<f64>>,
{
    let nodes: Vec<f64> = intervals.iter().flat_map(|&(a, b)| rule.map(a, b)).collect();
    let values = f(&nodes)?;
    let q = rule.order();
    let mut total = 0.0;
    for (i, &(a, b)) in intervals.iter().enumerate() {
        let s: f64 = rule.weights.iter().zip(&values[i * q..(i + 1) * q]).map(|(w, v)| w * v).sum();
        total += 0.5 * (b - a) * s;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    /// The higher-order value.
    pub value: f64,
    /// |I_2q − I_q| / |I_2q|
    pub rel_change: f64,
    pub order: usize,
}

/// Order doublings tried before giving up.
pub const MAX_DOUBLINGS: usize = 3;

/// Integrates at orders q, 2q, 4q, … until two successive orders agree to
/// [`DOUBLING_TOL`] relative; fails after [`MAX_DOUBLINGS`] doublings.
pub fn integrate_doubling<F>(intervals: &[(f64, f64)], order: usize, mut f: F) -> Result<Integral>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut q = order;
    let mut coarse = composite(intervals, &GaussLegendre::new(q)?, &mut f)?;
    let mut rel_change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        q *= 2;
        let fine = composite(intervals, &GaussLegendre::new(q)?, &mut f)?;
        rel_change = if fine == 0.0 { (fine - coarse).abs() } else { ((fine - coarse) / fine).abs() };
        if rel_change <= DOUBLING_TOL {
            return Ok(Integral { value: fine, rel_change, order: q });
        }
        coarse = fine;
    }
    Err(Error::Quadrature { rel_change })
}
