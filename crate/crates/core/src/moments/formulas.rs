use rand::Rng;
use serde::Serialize;

use super::integrate::{integrate, Estimate, Proposal};
use crate::error::{Error, Result};
use crate::geograph::ConnectionSet;
use crate::motif::{factorial, pair_bit, MotifTemplate};
use crate::ppp::{integrability_check, sample_in_ball, total_mass_power, unit_ball_volume, Density, Window};
use crate::rng::child_seed;

/// Monte Carlo budget for the integral formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MonteCarlo {
    /// Outer samples per integral.
    pub samples: usize,
    /// Inner samples per independent inner estimate (variance terms).
    pub inner_samples: usize,
    pub seed: u64,
}

impl MonteCarlo {
    pub const MIN_SAMPLES: usize = 1000;

    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, inner_samples: 4, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.samples < Self::MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "need at least {} Monte Carlo samples, got {}",
                Self::MIN_SAMPLES,
                self.samples
            )));
        }
        if self.inner_samples == 0 {
            return Err(Error::InvalidParameter("inner_samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    AnalyticIntegral,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentParams {
    pub t: f64,
    pub rho: f64,
    pub template: String,
    pub density: String,
}

/// Expectation, variance and median of a subgraph count, each optional.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimates {
    pub expectation: Option<Estimate>,
    pub variance: Option<Estimate>,
    pub median: Option<Estimate>,
    /// `n!‖f_n‖²_n` for `n = 1..=k` when the variance was computed.
    pub variance_terms: Vec<Estimate>,
    pub source: Source,
    pub params: MomentParams,
}

/// Limits `a`, `A^(n)` and `K^(n)` (index `n-1`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    pub a: Estimate,
    pub big_a: Vec<Estimate>,
    pub big_k: Vec<Estimate>,
}

fn binomial(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shared geometry of the rescaled integrals: points `0, x_2, …, x_k` in
/// `B(0, Θ)` with the unit-scale connection set.
struct Frame<'a> {
    h: &'a MotifTemplate,
    unit: ConnectionSet,
    d: usize,
    k: usize,
    big_theta: f64,
    ball: f64,
}

impl<'a> Frame<'a> {
    fn new(density: &Density, h: &'a MotifTemplate, s: &ConnectionSet) -> Result<Self> {
        let d = density.dim();
        if s.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
        }
        let big_theta = h.diam() as f64 * s.theta();
        Ok(Self {
            h,
            unit: s.with_rho(1.0)?,
            d,
            k: h.k(),
            big_theta,
            ball: unit_ball_volume(d) * big_theta.powi(d as i32),
        })
    }

    /// `J` on the flat buffer of `k` points.
    fn copies(&self, pts: &[f64]) -> f64 {
        let d = self.d;
        let mut mask = 0;
        for a in 0..self.k {
            for b in a + 1..self.k {
                if self.unit.connects_unchecked(&pts[a * d..(a + 1) * d], &pts[b * d..(b + 1) * d]) {
                    mask |= pair_bit(a, b);
                }
            }
        }
        self.h.copies_in_mask(mask) as f64
    }

    fn fill_ball<R: Rng + ?Sized>(&self, rng: &mut R, pts: &mut [f64], slots: std::ops::Range<usize>) {
        for i in slots {
            sample_in_ball(rng, self.big_theta, &mut pts[i * self.d..(i + 1) * self.d]);
        }
    }
}

/// `m·1_W` at `anchor + rho·u`.
fn density_at(density: &Density, window: Option<&Window>, anchor: &[f64], rho: f64, u: &[f64], buf: &mut [f64]) -> f64 {
    for ((b, a), x) in buf.iter_mut().zip(anchor).zip(u) {
        *b = a + rho * x;
    }
    match window {
        Some(w) if !w.contains(buf) => 0.0,
        _ => density.eval(buf),
    }
}

fn require_integrable(density: &Density, k: usize, window: Option<&Window>) -> Result<()> {
    if window.is_none() && !integrability_check(density, k).unwrap_or(true) {
        return Err(Error::NotIntegrable { k, d: density.dim() });
    }
    Ok(())
}

fn check_scale(t: f64, rho: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite() && rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("t and rho must be positive and finite, got t={t}, rho={rho}")));
    }
    Ok(())
}

fn params(density: &Density, h: &MotifTemplate, t: f64, rho: f64) -> MomentParams {
    MomentParams { t, rho, template: h.name().to_string(), density: density.id() }
}

/// `𝔼N_t = t^k ρ^{d(k-1)}/k! ∫ m_W(x_1) Π m_W(x_1 + ρx_i) J(0, x_2, …, x_k)`,
/// integrating `x_1` against a proposal `∝ m^k` and `x_2..x_k` uniformly in
/// `B(0,Θ)`. `S` fixes the shape of the connection set; `rho` its scale.
/// With `window = None` the process lives on all of `ℝ^d`.
pub fn expectation_numeric(
    density: &Density,
    h: &MotifTemplate,
    s: &ConnectionSet,
    t: f64,
    rho: f64,
    window: Option<&Window>,
    mc: &MonteCarlo,
) -> Result<MomentEstimates> {
    mc.validate()?;
    check_scale(t, rho)?;
    let k = h.k();
    require_integrable(density, k, window)?;
    let frame = Frame::new(density, h, s)?;
    let proposal = Proposal::new(density, window, k as f64)?;
    let d = frame.d;
    let ball_k1 = frame.ball.powi(k as i32 - 1);
    let est = integrate(mc.samples, mc.seed, |rng| {
        let mut anchor = vec![0.0; d];
        let q = proposal.sample(rng, &mut anchor);
        let mut pts = vec![0.0; k * d];
        frame.fill_ball(rng, &mut pts, 1..k);
        let j = frame.copies(&pts);
        if j == 0.0 {
            return 0.0;
        }
        let mut buf = vec![0.0; d];
        let mut w = density_at(density, window, &anchor, 0.0, &pts[..d], &mut buf);
        for i in 1..k {
            if w == 0.0 {
                return 0.0;
            }
            w *= density_at(density, window, &anchor, rho, &pts[i * d..(i + 1) * d], &mut buf);
        }
        w * j * ball_k1 / q
    });
    let pref = (k as f64 * t.ln() + (d * (k - 1)) as f64 * rho.ln()).exp() / factorial(k) as f64;
    Ok(MomentEstimates {
        expectation: Some(est.scale(pref)),
        variance: None,
        median: None,
        variance_terms: Vec::new(),
        source: Source::MonteCarlo,
        params: params(density, h, t, rho),
    })
}

/// One inner estimate of `∫_{B(0,Θ)^{k-n}} Π_{i>n} m_W(y_1 + ρx_i) J dx`
/// (`scale = None` drops the density factors, giving the limit `∫J⁰`).
fn inner_estimate<R: Rng + ?Sized>(
    rng: &mut R,
    frame: &Frame<'_>,
    pts: &mut [f64],
    n: usize,
    reps: usize,
    scale: Option<(&Density, Option<&Window>, &[f64], f64)>,
) -> f64 {
    let (d, k) = (frame.d, frame.k);
    let vol = frame.ball.powi((k - n) as i32);
    let mut buf = vec![0.0; d];
    let mut acc = 0.0;
    for _ in 0..reps {
        frame.fill_ball(rng, pts, n..k);
        let j = frame.copies(pts);
        if j == 0.0 {
            continue;
        }
        let mut w = j;
        if let Some((density, window, anchor, rho)) = scale {
            for i in n..k {
                w *= density_at(density, window, anchor, rho, &pts[i * d..(i + 1) * d], &mut buf);
                if w == 0.0 {
                    break;
                }
            }
        }
        acc += w;
    }
    vol * acc / reps as f64
}

/// `𝕍N_t = Σ_{n=1}^k n!‖f_n‖²_n` with
/// `‖f_n‖²_n = c_n(t) ∫ I^y (∫ I^x J)²` and
/// `c_n(t) = t^{2k-n} ρ^{d(2k-n-1)} C(k,n)²/(k!)²`.
///
/// The squared inner integral is the product of two independent inner
/// estimates; the anchor `y_1` is drawn `∝ m^{2k-n}`.
pub fn variance_numeric(
    density: &Density,
    h: &MotifTemplate,
    s: &ConnectionSet,
    t: f64,
    rho: f64,
    window: Option<&Window>,
    mc: &MonteCarlo,
) -> Result<MomentEstimates> {
    mc.validate()?;
    check_scale(t, rho)?;
    let k = h.k();
    require_integrable(density, k, window)?;
    let frame = Frame::new(density, h, s)?;
    let d = frame.d;
    let kf = factorial(k) as f64;
    let mut terms = Vec::with_capacity(k);
    for n in 1..=k {
        let proposal = Proposal::new(density, window, (2 * k - n) as f64)?;
        let outer_vol = frame.ball.powi(n as i32 - 1);
        let reps = mc.inner_samples;
        let est = integrate(mc.samples, child_seed(mc.seed, n as u64), |rng| {
            let mut anchor = vec![0.0; d];
            let q = proposal.sample(rng, &mut anchor);
            let mut buf = vec![0.0; d];
            let mut pts = vec![0.0; k * d];
            frame.fill_ball(rng, &mut pts, 1..n);
            let mut w = density_at(density, window, &anchor, 0.0, &pts[..d], &mut buf);
            for i in 1..n {
                if w == 0.0 {
                    return 0.0;
                }
                w *= density_at(density, window, &anchor, rho, &pts[i * d..(i + 1) * d], &mut buf);
            }
            if w == 0.0 {
                return 0.0;
            }
            let sq = if n == k {
                frame.copies(&pts).powi(2)
            } else {
                let scale = Some((density, window, anchor.as_slice(), rho));
                let a = inner_estimate(rng, &frame, &mut pts, n, reps, scale);
                if a == 0.0 {
                    return 0.0;
                }
                a * inner_estimate(rng, &frame, &mut pts, n, reps, scale)
            };
            w * outer_vol * sq / q
        });
        let log_cn = (2 * k - n) as f64 * t.ln() + (d * (2 * k - n - 1)) as f64 * rho.ln();
        let cn = log_cn.exp() * binomial(k, n).powi(2) / (kf * kf);
        terms.push(est.scale(cn * factorial(n) as f64));
    }
    Ok(MomentEstimates {
        expectation: None,
        variance: Some(Estimate::sum(terms.iter().copied())),
        median: None,
        variance_terms: terms,
        source: Source::MonteCarlo,
        params: params(density, h, t, rho),
    })
}

fn require_closed_form_mass(density: &Density, k: usize) -> Result<()> {
    if !integrability_check(density, k)? {
        return Err(Error::NotIntegrable { k, d: density.dim() });
    }
    Ok(())
}

/// `a = (1/k!) ∫m^k · ∫_{B(0,Θ)^{k-1}} J`, the limit of `𝔼N_t/(t^kρ_t^{d(k-1)})`
/// as `ρ_t → 0`. The radial factor is exact; the ball integral is Monte Carlo.
pub fn asymptotic_a(density: &Density, h: &MotifTemplate, s: &ConnectionSet, mc: &MonteCarlo) -> Result<Estimate> {
    mc.validate()?;
    let k = h.k();
    require_closed_form_mass(density, k)?;
    let mass = total_mass_power(density, k as f64)?;
    let frame = Frame::new(density, h, s)?;
    let vol = frame.ball.powi(k as i32 - 1);
    let ball = integrate(mc.samples, mc.seed, |rng| {
        let mut pts = vec![0.0; k * frame.d];
        frame.fill_ball(rng, &mut pts, 1..k);
        vol * frame.copies(&pts)
    });
    Ok(ball.scale(mass / factorial(k) as f64))
}

/// `K^(n) = ∫m^{2k-n} · ∫_{B^{n-1}} (∫_{B^{k-n}} J⁰)²`.
pub fn limit_integral_k_n(
    density: &Density,
    h: &MotifTemplate,
    s: &ConnectionSet,
    n: usize,
    mc: &MonteCarlo,
) -> Result<Estimate> {
    mc.validate()?;
    let k = h.k();
    if !(1..=k).contains(&n) {
        return Err(Error::InvalidParameter(format!("n must lie in 1..={k}, got {n}")));
    }
    require_closed_form_mass(density, k)?;
    let mass = total_mass_power(density, (2 * k - n) as f64)?;
    let frame = Frame::new(density, h, s)?;
    let outer_vol = frame.ball.powi(n as i32 - 1);
    let est = integrate(mc.samples, child_seed(mc.seed, n as u64), |rng| {
        let mut pts = vec![0.0; k * frame.d];
        frame.fill_ball(rng, &mut pts, 1..n);
        let sq = if n == k {
            frame.copies(&pts).powi(2)
        } else {
            let a = inner_estimate(rng, &frame, &mut pts, n, mc.inner_samples, None);
            if a == 0.0 {
                return 0.0;
            }
            a * inner_estimate(rng, &frame, &mut pts, n, mc.inner_samples, None)
        };
        outer_vol * sq
    });
    Ok(est.scale(mass))
}

/// `A^(n) = n!/(k!)² · C(k,n)² · K^(n)`, so that
/// `𝕍N_t ≈ t^k ρ^{d(k-1)} Σ_n (tρ^d)^{k-n} A^(n)`.
pub fn asymptotic_a_n(
    density: &Density,
    h: &MotifTemplate,
    s: &ConnectionSet,
    n: usize,
    mc: &MonteCarlo,
) -> Result<Estimate> {
    let k = h.k();
    let big_k = limit_integral_k_n(density, h, s, n, mc)?;
    let kf = factorial(k) as f64;
    Ok(big_k.scale(factorial(n) as f64 * binomial(k, n).powi(2) / (kf * kf)))
}

pub fn asymptotic_constants(
    density: &Density,
    h: &MotifTemplate,
    s: &ConnectionSet,
    mc: &MonteCarlo,
) -> Result<AsymptoticConstants> {
    let k = h.k();
    let kf = factorial(k) as f64;
    let a = asymptotic_a(density, h, s, mc)?;
    let mut big_a = Vec::with_capacity(k);
    let mut big_k = Vec::with_capacity(k);
    for n in 1..=k {
        let kn = limit_integral_k_n(density, h, s, n, mc)?;
        big_a.push(kn.scale(factorial(n) as f64 * binomial(k, n).powi(2) / (kf * kf)));
        big_k.push(kn);
    }
    Ok(AsymptoticConstants { a, big_a, big_k })
}

/// `t^k ρ^{d(k-1)} Σ_n (tρ^d)^{k-n} A^(n)`.
pub fn asymptotic_variance(constants: &AsymptoticConstants, k: usize, d: usize, t: f64, rho: f64) -> Estimate {
    let lead = (k as f64 * t.ln() + (d * (k - 1)) as f64 * rho.ln()).exp();
    let x = t * rho.powi(d as i32);
    Estimate::sum(constants.big_a.iter().enumerate().map(|(i, a)| a.scale(lead * x.powi((k - i - 1) as i32))))
}

/// Closed form of `𝔼N_t` for edges of a Euclidean disk graph over a uniform
/// density on a rectangle with sides `a, b ≥ ρ`:
/// `(t² level²/2)(πρ²ab − (4/3)ρ³(a+b) + ρ⁴/2)`.
pub fn analytic_edge_expectation(density: &Density, s: &ConnectionSet, t: f64) -> Result<MomentEstimates> {
    use crate::geograph::ConnectionKind;
    use crate::ppp::DensityFamily;
    let (lo, hi, level) = match density.family() {
        DensityFamily::UniformBox { lo, hi, level } if lo.len() == 2 => (lo, hi, *level),
        _ => return Err(Error::UnsupportedFamily("closed form needs a uniform density on a 2-d box".into())),
    };
    if !matches!(s.kind(), ConnectionKind::LpBall { p } if *p == 2.0) {
        return Err(Error::UnsupportedFamily("closed form needs a Euclidean connection set".into()));
    }
    let (a, b, rho) = (hi[0] - lo[0], hi[1] - lo[1], s.rho());
    if rho > a.min(b) {
        return Err(Error::InvalidParameter(format!("closed form needs rho <= box side, got rho={rho}")));
    }
    let pairs = std::f64::consts::PI * rho * rho * a * b - 4.0 / 3.0 * rho.powi(3) * (a + b) + 0.5 * rho.powi(4);
    let value = 0.5 * t * t * level * level * pairs;
    Ok(MomentEstimates {
        expectation: Some(Estimate::exact(value)),
        variance: None,
        median: None,
        variance_terms: Vec::new(),
        source: Source::AnalyticIntegral,
        params: MomentParams { t, rho, template: "edge".into(), density: density.id() },
    })
}
