//! Closed-form radial integrals of the power-law family.
//!
//! With `u = 1 + s` the radial weight `s^(d-1) (1+s)^(-e)` expands into a
//! finite binomial sum of powers of `u`, which integrates exactly.

use rand::Rng;

use super::window::{sample_direction, unit_ball_volume};
use crate::error::{Error, Result};

fn binomial(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn sign(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `∫_0^r s^(d-1) (1+s)^(-e) ds` for finite `r`.
pub fn radial_partial(d: usize, e: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r.is_infinite() {
        return radial_tail(d, e, 0.0);
    }
    let mut acc = 0.0;
    for j in 0..d {
        let f = j as f64 - e + 1.0;
        let piece = if f.abs() < 1e-12 {
            r.ln_1p()
        } else {
            // ((1+r)^f - 1)/f without cancellation for small r
            (f * r.ln_1p()).exp_m1() / f
        };
        acc += binomial(d - 1, j) * sign(d - 1 - j) * piece;
    }
    acc.max(0.0)
}

/// `∫_r^∞ s^(d-1) (1+s)^(-e) ds`; finite iff `e > d`.
pub fn radial_tail(d: usize, e: f64, r: f64) -> f64 {
    if e <= d as f64 {
        return f64::INFINITY;
    }
    let r = r.max(0.0);
    let mut acc = 0.0;
    for j in 0..d {
        let f = e - j as f64 - 1.0;
        acc += binomial(d - 1, j) * sign(d - 1 - j) * (1.0 + r).powf(-f) / f;
    }
    acc.max(0.0)
}

/// `∫_{B(0,radius)} (A (‖x‖+1)^(-γ))^p dx`; `radius = ∞` for the whole space.
pub fn power_law_mass(d: usize, amplitude: f64, gamma: f64, p: f64, radius: f64) -> f64 {
    let shell = d as f64 * unit_ball_volume(d);
    amplitude.powf(p) * shell * radial_partial(d, p * gamma, radius)
}

/// `∫_{‖x‖>s} (A (‖x‖+1)^(-γ))^p dx`.
pub fn power_law_tail_mass(d: usize, amplitude: f64, gamma: f64, p: f64, s: f64) -> f64 {
    let shell = d as f64 * unit_ball_volume(d);
    amplitude.powf(p) * shell * radial_tail(d, p * gamma, s)
}

/// Samples `x ∈ B(0, r_max)` with density proportional to `(‖x‖+1)^(-e)`.
#[derive(Clone, Debug)]
pub struct RadialSampler {
    d: usize,
    e: f64,
    r_max: f64,
    total: f64,
}

impl RadialSampler {
    pub fn new(d: usize, e: f64, r_max: f64) -> Result<Self> {
        if r_max.is_infinite() && e <= d as f64 {
            return Err(Error::InvalidParameter(format!(
                "radial weight (1+r)^-{e} is not normalisable in dimension {d}"
            )));
        }
        let total = radial_partial(d, e, r_max);
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameter(format!("degenerate radial range r_max={r_max}")));
        }
        Ok(Self { d, e, r_max, total })
    }

    /// `∫_{B(0,r_max)} (‖x‖+1)^(-e) dx`.
    pub fn normaliser(&self) -> f64 {
        self.d as f64 * unit_ball_volume(self.d) * self.total
    }

    fn invert(&self, u: f64) -> f64 {
        let target = u * self.total;
        let mut lo = 0.0;
        let mut hi = if self.r_max.is_finite() {
            self.r_max
        } else {
            let mut h = 1.0;
            while radial_partial(self.d, self.e, h) < target && h < 1e300 {
                h *= 2.0;
            }
            h
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if radial_partial(self.d, self.e, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi.max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Writes the sample into `out` and returns its density
    /// `(‖x‖+1)^(-e) / normaliser`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        let r = self.invert(rng.random::<f64>());
        sample_direction(rng, out);
        for o in out.iter_mut() {
            *o *= r;
        }
        (1.0 + r).powf(-self.e) / self.normaliser()
    }
}
