use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ppp::sample_direction;
use crate::rng::rng_from_seed;

type Indicator = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum ConnectionKind {
    /// Closed `ℓ^p` ball; `p = ∞` for the max norm.
    LpBall { p: f64 },
    /// Unit-scale indicator `w ↦ 1{ρ·w ∈ S}`.
    Custom { label: String, indicator: Indicator },
}

impl fmt::Debug for ConnectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectionKind::LpBall { p } => write!(f, "LpBall {{ p: {p} }}"),
            ConnectionKind::Custom { label, .. } => write!(f, "Custom {{ label: {label:?} }}"),
        }
    }
}

/// A symmetric connection set with `B(0,ρ) ⊆ S ⊆ B(0,θρ)`.
#[derive(Clone, Debug)]
pub struct ConnectionSet {
    d: usize,
    rho: f64,
    theta: f64,
    kind: ConnectionKind,
    /// `ℓ^p` radius of an `LpBall`, calibrated so the Euclidean sandwich holds.
    lp_radius: f64,
}

const SPOT_DIRECTIONS: usize = 10_000;
const SPOT_EPS: f64 = 1e-6;

impl ConnectionSet {
    /// Closed Euclidean ball of radius `rho` (`θ = 1`).
    pub fn euclidean(d: usize, rho: f64) -> Result<Self> {
        Self::lp_ball(d, rho, 2.0)
    }

    /// Closed `ℓ^p` ball. For `p >= 2` the `ℓ^p` radius is `ρ` and
    /// `θ = d^(1/2-1/p)`; for `p < 2` the `ℓ^p` radius is `ρ·d^(1/p-1/2)`
    /// and `θ` is the same factor, so that `B(0,ρ) ⊆ S ⊆ B(0,θρ)` either way.
    pub fn lp_ball(d: usize, rho: f64, p: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConnectionSet("dimension must be positive".into()));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidConnectionSet(format!("rho must be positive, got {rho}")));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidConnectionSet(format!("p must lie in [1, ∞], got {p}")));
        }
        let exponent = 0.5 - 1.0 / p;
        let theta = (d as f64).powf(exponent.abs());
        let lp_radius = if p >= 2.0 { rho } else { rho * theta };
        Ok(Self { d, rho, theta, kind: ConnectionKind::LpBall { p }, lp_radius })
    }

    /// A custom symmetric set given at unit scale: `indicator(w)` decides
    /// `ρ·w ∈ S`. The indicator is spot-checked on a fixed grid of 10⁴
    /// directions for symmetry and for the sandwich at radii `1-ε` and `θ+ε`.
    pub fn custom<F>(d: usize, rho: f64, theta: f64, label: impl Into<String>, indicator: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        if d == 0 || !(rho > 0.0 && rho.is_finite()) || !(theta >= 1.0 && theta.is_finite()) {
            return Err(Error::InvalidConnectionSet(format!(
                "need d > 0, rho > 0 and theta >= 1 (got d={d}, rho={rho}, theta={theta})"
            )));
        }
        let indicator: Indicator = Arc::new(indicator);
        spot_check(d, theta, indicator.as_ref())?;
        Ok(Self { d, rho, theta, kind: ConnectionKind::Custom { label: label.into(), indicator }, lp_radius: rho })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kind(&self) -> &ConnectionKind {
        &self.kind
    }

    /// Euclidean radius `θρ` that contains the whole set.
    pub fn outer_radius(&self) -> f64 {
        self.theta * self.rho
    }

    /// Same shape at scale `rho`.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        match &self.kind {
            ConnectionKind::LpBall { p } => Self::lp_ball(self.d, rho, *p),
            ConnectionKind::Custom { .. } => {
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(Error::InvalidConnectionSet(format!("rho must be positive, got {rho}")));
                }
                Ok(Self { rho, lp_radius: rho, ..self.clone() })
            }
        }
    }

    /// `v ∈ S` for a difference vector `v` (closed boundary).
    pub fn contains(&self, v: &[f64]) -> bool {
        match &self.kind {
            ConnectionKind::LpBall { p } => {
                let r = self.lp_radius;
                if *p == 2.0 {
                    v.iter().map(|a| a * a).sum::<f64>() <= r * r
                } else if p.is_infinite() {
                    v.iter().all(|a| a.abs() <= r)
                } else if *p == 1.0 {
                    v.iter().map(|a| a.abs()).sum::<f64>() <= r
                } else {
                    v.iter().map(|a| a.abs().powf(*p)).sum::<f64>().powf(1.0 / p) <= r
                }
            }
            ConnectionKind::Custom { indicator, .. } => {
                let w: Vec<f64> = v.iter().map(|a| a / self.rho).collect();
                indicator(&w)
            }
        }
    }

    /// `x - y ∈ S` without dimension checks; for hot loops.
    #[inline]
    pub fn connects_unchecked(&self, x: &[f64], y: &[f64]) -> bool {
        if let ConnectionKind::LpBall { p } = &self.kind {
            if *p == 2.0 {
                let r = self.lp_radius;
                let mut s = 0.0;
                for (a, b) in x.iter().zip(y) {
                    let t = a - b;
                    s += t * t;
                }
                return s <= r * r;
            }
        }
        let v: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.contains(&v)
    }

    pub fn connects(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        for len in [x.len(), y.len()] {
            if len != self.d {
                return Err(Error::DimensionMismatch { expected: self.d, found: len });
            }
        }
        Ok(self.connects_unchecked(x, y))
    }

    pub fn id(&self) -> String {
        match &self.kind {
            ConnectionKind::LpBall { p } => format!("l{p}_ball(rho={},theta={})", self.rho, self.theta),
            ConnectionKind::Custom { label, .. } => format!("custom({label},rho={},theta={})", self.rho, self.theta),
        }
    }
}

fn direction_grid(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..SPOT_DIRECTIONS)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / SPOT_DIRECTIONS as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut rng = rng_from_seed(0x5EED_D1EC);
            (0..SPOT_DIRECTIONS)
                .map(|_| {
                    let mut u = vec![0.0; d];
                    sample_direction(&mut rng, &mut u);
                    u
                })
                .collect()
        }
    }
}

fn spot_check(d: usize, theta: f64, indicator: &(dyn Fn(&[f64]) -> bool + Send + Sync)) -> Result<()> {
    let scaled = |u: &[f64], r: f64| u.iter().map(|a| a * r).collect::<Vec<f64>>();
    for u in direction_grid(d) {
        let inner = scaled(&u, 1.0 - SPOT_EPS);
        if !indicator(&inner) {
            return Err(Error::InvalidConnectionSet(format!("inner ball not contained: direction {u:?}")));
        }
        let outer = scaled(&u, theta + SPOT_EPS);
        if indicator(&outer) {
            return Err(Error::InvalidConnectionSet(format!("set exceeds radius theta: direction {u:?}")));
        }
        for r in [1.0 - SPOT_EPS, 0.5 * (1.0 + theta), theta, theta + SPOT_EPS] {
            let w = scaled(&u, r);
            let minus: Vec<f64> = w.iter().map(|a| -a).collect();
            if indicator(&w) != indicator(&minus) {
                return Err(Error::InvalidConnectionSet(format!("not symmetric at {w:?}")));
            }
        }
    }
    Ok(())
}
