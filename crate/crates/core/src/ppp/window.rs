use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lebesgue measure of the unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Bounded simulation region: an axis-aligned box or a Euclidean ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Window {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter("box corners must have equal positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidParameter("box needs finite lo <= hi".into()));
        }
        Ok(Window::Box { lo, hi })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("ball center must be a finite point".into()));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("ball radius must be >= 0, got {radius}")));
        }
        Ok(Window::Ball { center, radius })
    }

    pub fn unit_cube(d: usize) -> Self {
        Window::Box { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Box { lo, .. } => lo.len(),
            Window::Ball { center, .. } => center.len(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Window::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Window::Ball { center, radius } => unit_ball_volume(center.len()) * radius.powi(center.len() as i32),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Window::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h),
            Window::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                r2 <= radius * radius
            }
        }
    }

    /// Largest Euclidean norm of a point of the window.
    pub fn max_norm(&self) -> f64 {
        match self {
            Window::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Window::Ball { center, radius } => center.iter().map(|c| c * c).sum::<f64>().sqrt() + radius,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Window::Box { lo, hi } => (lo.clone(), hi.clone()),
            Window::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Writes a uniformly distributed point of the window into `out`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Window::Box { lo, hi } => {
                for ((o, l), h) in out.iter_mut().zip(lo).zip(hi) {
                    *o = l + (h - l) * rng.random::<f64>();
                }
            }
            Window::Ball { center, radius } => {
                sample_in_ball(rng, *radius, out);
                for (o, c) in out.iter_mut().zip(center) {
                    *o += c;
                }
            }
        }
    }
}

/// Uniform point in the centred ball `B(0, radius)`.
pub fn sample_in_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    let d = out.len();
    if d == 1 {
        out[0] = radius * (2.0 * rng.random::<f64>() - 1.0);
        return;
    }
    if d <= 3 {
        // cube rejection accepts with probability π/4 (d=2) or π/6 (d=3)
        loop {
            let mut n2 = 0.0;
            for o in out.iter_mut() {
                *o = 2.0 * rng.random::<f64>() - 1.0;
                n2 += *o * *o;
            }
            if n2 <= 1.0 {
                break;
            }
        }
        for o in out.iter_mut() {
            *o *= radius;
        }
        return;
    }
    sample_direction(rng, out);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    for o in out.iter_mut() {
        *o *= r;
    }
}

/// Uniform direction on the unit sphere.
pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut n2 = 0.0;
        for o in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *o = g;
            n2 += g * g;
        }
        if n2 > 1e-300 {
            let inv = n2.sqrt().recip();
            for o in out.iter_mut() {
                *o *= inv;
            }
            return;
        }
    }
}
