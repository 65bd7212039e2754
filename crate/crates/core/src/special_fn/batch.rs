//! Batched, cached ζ evaluation.
//!
//! Heights are grouped into blocks of width [`BLOCK_WIDTH`]. Inside a block
//! centred at `c` the direct part of the Euler–Maclaurin sum,
//!
//! F(c+u) = Σ_{n<N} b_n e^{−iu ln n},   b_n = n^−σ e^{−ic ln n},
//!
//! is a sum of exponentials with non-uniform frequencies `ln n`. It is
//! evaluated by Gaussian gridding: each `b_n` is spread onto a uniform
//! frequency grid with a Gaussian of width `s`, and the transform of the
//! gridded sequence equals F(u)·ĝ(u) up to aliasing. One pass over `n`
//! serves every point of the block, at O(N) rather than O(N·points) cost.
//!
//! The grid, the Gaussian and `(N, R)` depend only on `(σ, block,
//! precision)`, so a point's value is a pure function of `(σ, t,
//! precision)` whatever else it was batched with.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use super::zeta::{em_correction, ladder_for, ComplexPoint, EvalPrecision};
use crate::cache::{CacheEntry, ZetaCache};
use crate::dd::Dd;
use crate::error::{domain, Error, Result};
use crate::par::{self, Exec};

/// Width of the height blocks sharing one gridded transform.
pub const BLOCK_WIDTH: f64 = 128.0;
/// Largest |t| the batch evaluator accepts; the exact phase reduction
/// relies on block centres having at most 21 significant bits.
pub const MAX_BATCH_HEIGHT: f64 = 134_217_728.0;

const OVERSAMPLE: f64 = 2.0;
const CHUNK: usize = 1 << 16;
const RESYNC: usize = 32;

// 2π = P1 + P2 + P3 with P1, P2 carrying 24 significant bits each.
const TWO_PI_1: f64 = 6.283185005187988;
const TWO_PI_2: f64 = 3.0199157663446385e-07;
const TWO_PI_3: f64 = 2.1561211432632476e-14;

/// `ln n` in double-double for `1 <= n < len`, shared by all evaluators.
struct LnTable {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl LnTable {
    /// Primes get a full double-double logarithm; composites add the
    /// logarithms of their smallest prime factor and cofactor.
    fn build(len: usize) -> LnTable {
        let len = len.max(2);
        let mut spf = vec![0u32; len];
        let mut hi = vec![0.0; len];
        let mut lo = vec![0.0; len];
        for n in 2..len {
            if spf[n] == 0 {
                spf[n] = n as u32;
                let mut m = n * n;
                while m < len {
                    if spf[m] == 0 {
                        spf[m] = n as u32;
                    }
                    m += n;
                }
            }
            let p = spf[n] as usize;
            let d = if p == n {
                Dd::ln(n as f64)
            } else {
                let q = n / p;
                Dd { hi: hi[p], lo: lo[p] } + Dd { hi: hi[q], lo: lo[q] }
            };
            hi[n] = d.hi;
            lo[n] = d.lo;
        }
        LnTable { hi, lo }
    }

    fn len(&self) -> usize {
        self.hi.len()
    }
}

fn ln_table(len: usize) -> Arc<LnTable> {
    static TABLE: OnceLock<Mutex<Arc<LnTable>>> = OnceLock::new();
    let slot = TABLE.get_or_init(|| Mutex::new(Arc::new(LnTable::build(2))));
    let mut cur = slot.lock().unwrap();
    if cur.len() < len {
        // grow geometrically so a slowly rising height does not rebuild often
        *cur = Arc::new(LnTable::build(len.max(cur.len() + cur.len() / 2)));
    }
    cur.clone()
}

/// `c · ln n` reduced mod 2π, accurate to a few 1e-16 absolute. `c` must be
/// a multiple of 64 with at most 21 significant bits.
#[inline]
fn reduced_phase(c: f64, l_hi: f64, l_lo: f64) -> f64 {
    let l1 = f64::from_bits(l_hi.to_bits() & !((1u64 << 21) - 1));
    let l2 = l_hi - l1;
    let q = (c * l_hi * (0.5 / PI)).round();
    // c·l1, q·P1 and q·P2 are exact, and so are the two differences.
    ((c * l1 - q * TWO_PI_1) - q * TWO_PI_2) + (c * l2 - q * TWO_PI_3 + c * l_lo)
}

/// Upper bound for Σ_{n<N} n^−σ.
fn amplitude_sum_bound(sigma: f64, n: usize) -> f64 {
    let nf = n as f64;
    if (sigma - 1.0).abs() < 1e-12 {
        1.0 + nf.ln()
    } else if sigma < 1.0 {
        1.0 + (nf.powf(1.0 - sigma) - 1.0) / (1.0 - sigma)
    } else {
        sigma / (sigma - 1.0)
    }
}

/// Everything about a block that is fixed before any point is evaluated.
#[derive(Clone, Copy, Debug)]
struct BlockPlan {
    center: f64,
    n: usize,
    r: usize,
    /// Gaussian width in frequency, g(ω) = exp(−ω²/2s²)
    s: f64,
    /// frequency grid step
    step: f64,
    /// spreading half-width in grid points
    half: usize,
    k_lo: i64,
    k_len: usize,
}

impl BlockPlan {
    fn new(sigma: f64, index: i64, prec: &EvalPrecision) -> Result<BlockPlan> {
        let center = (index as f64 + 0.5) * BLOCK_WIDTH;
        let worst = ComplexPoint::new(sigma, (index + 1) as f64 * BLOCK_WIDTH);
        let (n, r) = ladder_for(&worst, prec)?;
        // Aliasing costs exp(−a²·R(R−1)/2) and truncating the Gaussian at
        // w·s costs exp(−w²/2 + a²/8), both relative to Σ n^−σ.
        let log_err = (100.0 * amplitude_sum_bound(sigma, n) / prec.target_abs_tol).ln().max(20.0);
        let a = (2.0 * log_err / (OVERSAMPLE * (OVERSAMPLE - 1.0))).sqrt();
        let w = (2.0 * (log_err + a * a / 8.0)).sqrt();
        let s = a / BLOCK_WIDTH;
        let step = 2.0 * PI / (OVERSAMPLE * BLOCK_WIDTH);
        let half = (w * s / step).ceil() as usize;
        let k_lo = -(half as i64) - 1;
        let k_hi = ((n as f64).ln() / step).ceil() as i64 + half as i64 + 1;
        Ok(BlockPlan { center, n, r, s, step, half, k_lo, k_len: (k_hi - k_lo + 1) as usize })
    }

    /// Spreads n in `[start, end)` onto the frequency grid.
    fn spread(&self, sigma: f64, ln: &LnTable, start: usize, end: usize) -> Vec<Complex64> {
        let mut grid = vec![Complex64::new(0.0, 0.0); self.k_len];
        let inv_2s2 = 0.5 / (self.s * self.s);
        let shape: Vec<f64> =
            (0..=self.half).map(|j| (-(j as f64 * self.step).powi(2) * inv_2s2).exp()).collect();
        let half = self.half as i64;
        for n in start..end {
            let (l_hi, l_lo) = (ln.hi[n], ln.lo[n]);
            let (sin, cos) = reduced_phase(self.center, l_hi, l_lo).sin_cos();
            let amp = (-sigma * l_hi).exp();
            let b = Complex64::new(amp * cos, -amp * sin);
            let k0 = (l_hi / self.step).round();
            let d = l_hi - k0 * self.step;
            // g(jΔ − d) = e^{−d²/2s²} · (e^{Δd/s²})^j · e^{−j²Δ²/2s²}
            let e0 = (-d * d * inv_2s2).exp();
            let e1 = (self.step * d * 2.0 * inv_2s2).exp();
            let base = (k0 as i64 - self.k_lo) as usize;
            let mut up = e0;
            let mut down = e0;
            let inv_e1 = 1.0 / e1;
            grid[base] += b * (e0 * shape[0]);
            for j in 1..=self.half {
                up *= e1;
                down *= inv_e1;
                grid[base + j] += b * (up * shape[j]);
                grid[base - j] += b * (down * shape[j]);
            }
            debug_assert!(base as i64 >= half);
        }
        grid
    }

    /// F(center + u) from the gridded sequence.
    fn transform(&self, grid: &[Complex64], u: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, -u * self.step);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut z = Complex64::new(0.0, 0.0);
        for (i, g) in grid.iter().enumerate() {
            if i % RESYNC == 0 {
                z = Complex64::from_polar(1.0, -u * (self.k_lo + i as i64) as f64 * self.step);
            } else {
                z *= rot;
            }
            acc += g * z;
        }
        let g_hat = self.s * (2.0 * PI).sqrt() * (-0.5 * (self.s * u).powi(2)).exp();
        acc * (self.step / g_hat)
    }
}

fn block_index(t: f64) -> i64 {
    (t / BLOCK_WIDTH).floor() as i64
}

/// Evaluates ζ at many points of one abscissa, with an in-memory cache
/// that can be persisted through [`ZetaCache::store`].
pub struct ZetaEvaluator {
    prec: EvalPrecision,
    cache: Arc<ZetaCache>,
    fresh: AtomicU64,
    exec: Exec,
}

impl ZetaEvaluator {
    pub fn new(prec: EvalPrecision) -> Result<Self> {
        Self::with_cache(prec, Arc::new(ZetaCache::new()))
    }

    pub fn with_cache(prec: EvalPrecision, cache: Arc<ZetaCache>) -> Result<Self> {
        prec.validate()?;
        Ok(ZetaEvaluator { prec, cache, fresh: AtomicU64::new(0), exec: par::default_exec() })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn precision(&self) -> &EvalPrecision {
        &self.prec
    }

    pub fn cache(&self) -> &Arc<ZetaCache> {
        &self.cache
    }

    /// Number of ζ values computed (not served from cache) so far.
    pub fn fresh_evaluations(&self) -> u64 {
        self.fresh.load(Ordering::Relaxed)
    }

    fn eval_block(&self, sigma: f64, plan: &BlockPlan, heights: &[f64]) -> Vec<Complex64> {
        let ln = ln_table(plan.n);
        let chunks = plan.n.div_ceil(CHUNK);
        let partial = par::map_range(self.exec, 0, chunks, |c| {
            let start = (c * CHUNK).max(1);
            let end = ((c + 1) * CHUNK).min(plan.n);
            plan.spread(sigma, &ln, start, end)
        });
        let mut grid = vec![Complex64::new(0.0, 0.0); plan.k_len];
        for part in partial {
            for (g, p) in grid.iter_mut().zip(part) {
                *g += p;
            }
        }
        par::map_slice(self.exec, heights, |&t| {
            let (corr, _) = em_correction(Complex64::new(sigma, t), plan.n, plan.r);
            plan.transform(&grid, t - plan.center) + corr
        })
    }

    /// ζ(σ + it) for every `t`, in input order.
    pub fn eval(&self, sigma: f64, ts: &[f64]) -> Result<Vec<Complex64>> {
        if !(sigma > 0.0) {
            return Err(domain("zeta", format!("need sigma > 0, got {sigma}")));
        }
        let tol = self.prec.target_abs_tol;
        let mut out = vec![Complex64::new(0.0, 0.0); ts.len()];
        // ζ(σ − it) = conj ζ(σ + it): work with |t| throughout.
        let mut blocks: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, &t) in ts.iter().enumerate() {
            if !t.is_finite() || t.abs() >= MAX_BATCH_HEIGHT {
                return Err(domain("zeta", format!("|t| must be below {MAX_BATCH_HEIGHT}, got {t}")));
            }
            if sigma == 1.0 && t == 0.0 {
                return Err(Error::Pole);
            }
            match self.cache.get(sigma, t, tol) {
                Some(v) => out[i] = v,
                None => blocks.entry(block_index(t.abs())).or_default().push(i),
            }
        }
        let mut batch = Vec::new();
        for (&index, members) in &blocks {
            let plan = BlockPlan::new(sigma, index, &self.prec)?;
            let heights: Vec<f64> = members.iter().map(|&i| ts[i].abs()).collect();
            let values = self.eval_block(sigma, &plan, &heights);
            for (&i, v) in members.iter().zip(values) {
                let v = if ts[i] < 0.0 { v.conj() } else { v };
                out[i] = v;
                batch.push(CacheEntry { sigma, t: ts[i], tol, re: v.re, im: v.im });
            }
        }
        self.fresh.fetch_add(batch.len() as u64, Ordering::Relaxed);
        self.cache.merge(batch);
        Ok(out)
    }

    pub fn eval_one(&self, p: ComplexPoint) -> Result<Complex64> {
        Ok(self.eval(p.sigma, &[p.t])?[0])
    }
}
