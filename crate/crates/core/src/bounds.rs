//! Explicit constants and tail-bound evaluators for local U-statistics and
//! subgraph counts.
//!
//! Every bound is computed as a natural logarithm first and exponentiated
//! last; values above one are clamped to one.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::motif::{factorial, MotifTemplate};

/// Kernel parameters `(k, ρ_F, Θ_F, m_F, M_F)`: the kernel is positive on
/// tuples of diameter at most `ρ_F`, vanishes beyond `Θ_F ρ_F`, and takes
/// values in `[m_F, M_F]` on its support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelBounds {
    pub k: usize,
    pub rho_f: f64,
    pub theta_f: f64,
    pub m_f: f64,
    pub big_m_f: f64,
}

impl KernelBounds {
    pub fn new(k: usize, rho_f: f64, theta_f: f64, m_f: f64, big_m_f: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("kernel order must be >= 2, got {k}")));
        }
        if !(rho_f > 0.0 && rho_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho_F must be positive, got {rho_f}")));
        }
        if !(theta_f >= 1.0 && theta_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("Theta_F must be >= 1, got {theta_f}")));
        }
        if !(m_f > 0.0 && big_m_f >= m_f && big_m_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 0 < m_F <= M_F, got m_F={m_f}, M_F={big_m_f}")));
        }
        Ok(Self { k, rho_f, theta_f, m_f, big_m_f })
    }

    /// Kernel of the subgraph count of `H` on a graph with scale `rho` and
    /// eccentricity `theta`.
    pub fn for_template(h: &MotifTemplate, rho: f64, theta: f64) -> Result<Self> {
        let kf = factorial(h.k()) as f64;
        Self::new(h.k(), rho, h.diam() as f64 * theta, 1.0 / kf, h.a_h() as f64 / kf)
    }
}

/// `⌈x⌉`, ignoring excess below one part in 10¹² (e.g. `√2·√2`).
fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

fn grid_factor(theta: f64, d: usize, k: usize) -> f64 {
    let side = 2.0 * ceil_snapped(theta * (d as f64).sqrt()) + 1.0;
    side.powi((2 * d * (k - 1)) as i32)
}

/// `c_d = (2⌈Θ_F√d⌉+1)^{2d(k-1)} M_F² (k^k/(m_F k!))^{(2k-1)/k}`.
pub fn c_d_general(kb: &KernelBounds, d: usize) -> f64 {
    let k = kb.k;
    let kf = factorial(k) as f64;
    let inner = (k as f64).powi(k as i32) / (kb.m_f * kf);
    grid_factor(kb.theta_f, d, k) * kb.big_m_f * kb.big_m_f * inner.powf((2 * k - 1) as f64 / k as f64)
}

/// `c_d = (2⌈diam(H)θ√d⌉+1)^{2d(k-1)} (a_H/k!)² k^{2k-1}`.
pub fn c_d_subgraph(h: &MotifTemplate, d: usize, theta: f64) -> f64 {
    let k = h.k();
    let ratio = h.a_h() as f64 / factorial(k) as f64;
    grid_factor(h.diam() as f64 * theta, d, k) * ratio * ratio * (k as f64).powi((2 * k - 1) as i32)
}

/// Exponent `α = (2k-1)/k` of the subgraph-count specialisation.
pub fn subgraph_alpha(k: usize) -> f64 {
    (2 * k - 1) as f64 / k as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..2.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in [0, 2), got {alpha}")))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn clamp_exp(log: f64) -> f64 {
    log.min(0.0).exp()
}

/// `(E+r)^p - E^p` without cancellation.
fn power_increment(e: f64, r: f64, p: f64) -> f64 {
    if e == 0.0 {
        r.powf(p)
    } else {
        e.powf(p) * (p * (r / e).ln_1p()).exp_m1()
    }
}

/// Log of the upper mean tail `exp(-((E+r)^{1-α/2} - E^{1-α/2})²/(2k²c))`,
/// before clamping.
pub fn log_upper_tail_mean(ef: f64, r: f64, k: usize, c: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nonneg("EF", ef)?;
    check_nonneg("r", r)?;
    check_pos("c", c)?;
    let inc = power_increment(ef, r, 1.0 - alpha / 2.0);
    Ok(-inc * inc / (2.0 * (k * k) as f64 * c))
}

/// Bound on `P(F ≥ 𝔼F + r)`.
pub fn upper_tail_mean(ef: f64, r: f64, k: usize, c: f64, alpha: f64) -> Result<f64> {
    log_upper_tail_mean(ef, r, k, c, alpha).map(clamp_exp)
}

pub fn log_lower_tail_mean(vf: f64, r: f64, k: usize) -> Result<f64> {
    check_pos("VF", vf)?;
    check_nonneg("r", r)?;
    Ok(-r * r / (2.0 * k as f64 * vf))
}

/// Bound `exp(-r²/(2k𝕍F))` on `P(F ≤ 𝔼F - r)`.
pub fn lower_tail_mean(vf: f64, r: f64, k: usize) -> Result<f64> {
    log_lower_tail_mean(vf, r, k).map(clamp_exp)
}

/// Logs of the median tails `2exp(-r²/(4k²c(r+𝕄F)^α))` and
/// `2exp(-r²/(4k²c 𝕄F^α))`; the lower one is `-∞` when `𝕄F = 0 < r`.
pub fn log_median_tails(mf: f64, r: f64, k: usize, c: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    check_nonneg("MF", mf)?;
    check_nonneg("r", r)?;
    check_pos("c", c)?;
    if r == 0.0 {
        return Ok((0.0, 0.0));
    }
    let denom = 4.0 * (k * k) as f64 * c;
    let upper = std::f64::consts::LN_2 - r * r / (denom * (r + mf).powf(alpha));
    let lower = if mf == 0.0 {
        f64::NEG_INFINITY
    } else {
        std::f64::consts::LN_2 - r * r / (denom * mf.powf(alpha))
    };
    Ok((upper, lower))
}

/// Bounds on `P(F > 𝕄F + r)` and `P(F < 𝕄F - r)`.
pub fn median_tails(mf: f64, r: f64, k: usize, c: f64, alpha: f64) -> Result<(f64, f64)> {
    let (u, l) = log_median_tails(mf, r, k, c, alpha)?;
    Ok((clamp_exp(u), clamp_exp(l)))
}

/// `P(Z ≥ z)` for `Z ~ Poisson(q)`, by summing the pmf in log space.
pub fn poisson_sf(q: f64, z: u64) -> f64 {
    if z == 0 {
        return 1.0;
    }
    let ln_q = q.ln();
    let log_pmf = |n: u64| -q + n as f64 * ln_q - ln_gamma(n as f64 + 1.0);
    if (z as f64) <= q {
        let below: f64 = (0..z).map(|n| log_pmf(n).exp()).sum();
        return (1.0 - below).clamp(0.0, 1.0);
    }
    let first = log_pmf(z);
    let mut sum = 1.0;
    let mut n = z;
    let mut rel = 1.0;
    while rel > 1e-17 * sum {
        n += 1;
        rel *= q / n as f64;
        sum += rel;
    }
    (first + sum.ln()).exp().min(1.0)
}

/// Lower bound on `P(F ≥ M + r)` when `F ≥ m_F (Z-k+1)^k` for a Poisson
/// variable `Z` with mean `q`: returns `P(Z ≥ k-1+⌈((M+r)/m_F)^{1/k}⌉)`.
pub fn poisson_tail_lower_bound(q: f64, big_m: f64, r: f64, m_f: f64, k: usize) -> Result<f64> {
    check_pos("q", q)?;
    check_nonneg("M", big_m)?;
    check_nonneg("r", r)?;
    check_pos("m_F", m_f)?;
    let z0 = (k as f64 - 1.0) + ((big_m + r) / m_f).powf(1.0 / k as f64).ceil();
    if z0 <= 0.0 {
        return Ok(1.0);
    }
    if z0 >= u64::MAX as f64 {
        return Ok(0.0);
    }
    Ok(poisson_sf(q, z0 as u64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    MeanUpper,
    MeanLower,
    MedianUpper,
    MedianLower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailSample {
    pub r: f64,
    pub bound: f64,
    /// Natural log of the unclamped bound; finite even where `bound`
    /// underflows.
    pub log_bound: f64,
}

/// A tail bound evaluated on an `r` grid around an anchor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCurve {
    pub center: f64,
    pub kind: TailKind,
    pub samples: Vec<TailSample>,
}

impl TailCurve {
    /// Builds a curve from `(r, log bound)` pairs.
    pub fn from_log_bounds(center: f64, kind: TailKind, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let samples =
            points.into_iter().map(|(r, log_bound)| TailSample { r, bound: clamp_exp(log_bound), log_bound }).collect();
        Self { center, kind, samples }
    }

    fn try_build(
        center: f64,
        kind: TailKind,
        rs: &[f64],
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<Self> {
        let pts = rs.iter().map(|&r| f(r).map(|l| (r, l))).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_log_bounds(center, kind, pts))
    }

    pub fn mean_upper(ef: f64, k: usize, c: f64, alpha: f64, rs: &[f64]) -> Result<Self> {
        Self::try_build(ef, TailKind::MeanUpper, rs, |r| log_upper_tail_mean(ef, r, k, c, alpha))
    }

    pub fn mean_lower(ef: f64, vf: f64, k: usize, rs: &[f64]) -> Result<Self> {
        Self::try_build(ef, TailKind::MeanLower, rs, |r| log_lower_tail_mean(vf, r, k))
    }

    pub fn median_upper(mf: f64, k: usize, c: f64, alpha: f64, rs: &[f64]) -> Result<Self> {
        Self::try_build(mf, TailKind::MedianUpper, rs, |r| Ok(log_median_tails(mf, r, k, c, alpha)?.0))
    }

    pub fn median_lower(mf: f64, k: usize, c: f64, alpha: f64, rs: &[f64]) -> Result<Self> {
        Self::try_build(mf, TailKind::MedianLower, rs, |r| Ok(log_median_tails(mf, r, k, c, alpha)?.1))
    }

    /// Bounds lie in `[0,1]` and never increase with `r` along the grid.
    pub fn is_valid(&self) -> bool {
        let mut sorted: Vec<&TailSample> = self.samples.iter().collect();
        sorted.sort_by(|a, b| a.r.total_cmp(&b.r));
        sorted.iter().all(|s| (0.0..=1.0).contains(&s.bound)) && sorted.windows(2).all(|w| w[1].bound <= w[0].bound)
    }
}

/// Least-squares slope of `log(-log bound)` against `log r` over the top
/// decade of the grid. For a bound decaying like `exp(-C r^a)` the slope
/// tends to `a`.
pub fn decay_exponent_fit(curve: &TailCurve) -> Result<f64> {
    let active: Vec<&TailSample> =
        curve.samples.iter().filter(|s| s.r > 0.0 && s.log_bound < 0.0 && s.log_bound.is_finite()).collect();
    if active.len() < 10 {
        return Err(Error::InsufficientSpan(format!("{} samples below one, need 10", active.len())));
    }
    let r_min = active.iter().map(|s| s.r).fold(f64::INFINITY, f64::min);
    let r_max = active.iter().map(|s| s.r).fold(0.0, f64::max);
    if (r_max / r_min).log10() < 3.0 {
        return Err(Error::InsufficientSpan(format!("grid spans [{r_min}, {r_max}], need 3 decades")));
    }
    let top: Vec<(f64, f64)> =
        active.iter().filter(|s| s.r >= r_max / 10.0).map(|s| (s.r.ln(), (-s.log_bound).ln())).collect();
    if top.len() < 2 {
        return Err(Error::InsufficientSpan("fewer than 2 samples in the top decade".into()));
    }
    let n = top.len() as f64;
    let mx = top.iter().map(|p| p.0).sum::<f64>() / n;
    let my = top.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = top.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = top.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// `n` points log-spaced on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}
