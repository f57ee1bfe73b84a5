use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use super::density::{Density, DensityFamily};
use super::window::Window;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A finite simple point configuration with its provenance.
#[derive(Clone, Debug)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
    seed: u64,
    window: Window,
    t: f64,
    density: DensityFamily,
}

/// JSON sidecar written next to a point CSV.
#[derive(Debug, Serialize)]
pub struct PointSetMeta<'a> {
    pub seed: u64,
    pub t: f64,
    pub window: &'a Window,
    pub density: &'a DensityFamily,
    pub count: usize,
}

impl PointSet {
    /// Builds a point set from explicit points. The window defaults to the
    /// bounding box of the points.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(1, Vec::len);
        if d == 0 {
            return Err(Error::InvalidParameter("points need positive dimension".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: p.len() });
            }
            coords.extend_from_slice(p);
        }
        let (lo, hi) = if points.is_empty() {
            (vec![0.0; d], vec![0.0; d])
        } else {
            let lo = (0..d).map(|j| points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
            let hi = (0..d).map(|j| points.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
            (lo, hi)
        };
        let set = Self {
            d,
            coords,
            seed: 0,
            window: Window::Box { lo, hi },
            t: 1.0,
            density: DensityFamily::Custom { label: "explicit".into() },
        };
        if !set.duplicate_indices().is_empty() {
            return Err(Error::InvalidParameter("points must be pairwise distinct".into()));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn density_family(&self) -> &DensityFamily {
        &self.density
    }

    /// The points with the given indices, in the given order.
    pub fn subset(&self, keep: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(keep.len() * self.d);
        for &i in keep {
            coords.extend_from_slice(self.point(i));
        }
        PointSet { coords, ..self.clone() }
    }

    /// Adds a point; fails on an exact duplicate.
    pub fn with_point(&self, x: &[f64]) -> Result<PointSet> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: x.len() });
        }
        if self.iter().any(|p| p == x) {
            return Err(Error::InvalidParameter("duplicate point".into()));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(x);
        Ok(PointSet { coords, ..self.clone() })
    }

    /// Indices of points equal to an earlier point (lexicographic sort).
    fn duplicate_indices(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
            .windows(2)
            .filter(|w| self.point(w[0]) == self.point(w[1]))
            .map(|w| w[1])
            .collect()
    }

    pub fn meta(&self) -> PointSetMeta<'_> {
        PointSetMeta { seed: self.seed, t: self.t, window: &self.window, density: &self.density, count: self.len() }
    }

    /// CSV with header `x1,...,xd`, one point per row, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_sidecar<W: Write>(&self, out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(out, &self.meta()).map_err(std::io::Error::other)
    }
}

/// Draws a Poisson process with intensity `t·m` restricted to `window`.
///
/// A homogeneous process of intensity `t·sup_bound` is placed uniformly in
/// the window and each point `x` is kept with probability
/// `m(x)/sup_bound`. Exact coordinate duplicates are replaced by fresh
/// draws.
pub fn sample(density: &Density, window: &Window, t: f64, seed: u64) -> Result<PointSet> {
    let d = density.dim();
    if window.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: window.dim() });
    }
    let sup = density.sup_bound();
    if !(sup.is_finite() && sup > 0.0) {
        return Err(Error::InvalidDensity(format!("sup bound must be finite and positive, got {sup}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("intensity scale t must be positive, got {t}")));
    }
    let mut set = PointSet {
        d,
        coords: Vec::new(),
        seed,
        window: window.clone(),
        t,
        density: density.family().clone(),
    };
    let lambda = t * sup * window.volume();
    if lambda <= 0.0 {
        return Ok(set);
    }
    let mut rng = rng_from_seed(seed);
    let n = Poisson::new(lambda)
        .map_err(|e| Error::InvalidParameter(format!("proposal mean {lambda}: {e}")))?
        .sample(&mut rng) as u64;

    let mut x = vec![0.0; d];
    for _ in 0..n {
        window.sample_uniform(&mut rng, &mut x);
        if rng.random::<f64>() * sup < density.eval(&x) {
            set.coords.extend_from_slice(&x);
        }
    }
    loop {
        let dups = set.duplicate_indices();
        if dups.is_empty() {
            break;
        }
        for i in dups {
            loop {
                window.sample_uniform(&mut rng, &mut x);
                if rng.random::<f64>() * sup < density.eval(&x) {
                    break;
                }
            }
            set.coords[i * d..(i + 1) * d].copy_from_slice(&x);
        }
    }
    Ok(set)
}
