use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ppp::radial::RadialSampler;
use crate::ppp::{Density, DensityFamily, Window};
use crate::rng::{child_seed, rng_from_seed};

const BATCH: usize = 4096;

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self { value: self.value * factor, std_error: self.std_error * factor.abs() }
    }

    /// Sum of independent estimates.
    pub fn sum<I: IntoIterator<Item = Estimate>>(items: I) -> Self {
        let (v, s2) = items.into_iter().fold((0.0, 0.0), |(v, s2), e| (v + e.value, s2 + e.std_error * e.std_error));
        Self { value: v, std_error: s2.sqrt() }
    }

    /// Product of independent estimates, error to first order.
    pub fn product(self, other: Estimate) -> Self {
        let value = self.value * other.value;
        let std_error = ((self.std_error * other.value).powi(2) + (other.std_error * self.value).powi(2)).sqrt();
        Self { value, std_error }
    }

    /// `|a - b|` in units of the combined standard error.
    pub fn z_distance(self, other: Estimate) -> f64 {
        (self.value - other.value).abs() / (self.std_error.hypot(other.std_error)).max(f64::MIN_POSITIVE)
    }
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments { n, mean: self.mean + delta * o.n / n, m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n }
    }
}

/// Mean of `f` over `n` independent draws, in parallel batches with seeds
/// `child_seed(seed, batch)`; batches are merged in index order.
pub fn integrate<F>(n: usize, seed: u64, f: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let batches = n.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(child_seed(seed, b as u64));
            let mut m = Moments::default();
            for _ in 0..BATCH.min(n - b * BATCH) {
                m.push(f(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Estimate { value: total.mean, std_error: (var / total.n.max(1.0)).sqrt() }
}

/// Importance proposal for the anchor point: density proportional to `m^p`
/// for power laws (restricted to the window's bounding ball if any), uniform
/// on the support or window otherwise.
pub(crate) enum Proposal {
    Radial(RadialSampler),
    Uniform { region: Window, pdf: f64 },
}

impl Proposal {
    pub(crate) fn new(density: &Density, window: Option<&Window>, p: f64) -> Result<Self> {
        match (density.family(), window) {
            (DensityFamily::PowerLaw { gamma, .. }, w) => {
                let r_max = w.map_or(f64::INFINITY, Window::max_norm);
                RadialSampler::new(density.dim(), p * gamma, r_max).map(Proposal::Radial).map_err(|_| {
                    Error::NotIntegrable { k: p.round() as usize, d: density.dim() }
                })
            }
            (DensityFamily::UniformBox { lo, hi, .. }, _) => {
                let region = Window::new_box(lo.clone(), hi.clone())?;
                let pdf = 1.0 / region.volume();
                Ok(Proposal::Uniform { region, pdf })
            }
            (DensityFamily::Custom { .. }, Some(w)) => {
                if w.volume() <= 0.0 {
                    return Err(Error::InvalidParameter("window has zero volume".into()));
                }
                Ok(Proposal::Uniform { region: w.clone(), pdf: 1.0 / w.volume() })
            }
            (DensityFamily::Custom { label }, None) => Err(Error::UnsupportedFamily(format!(
                "custom density `{label}` needs an explicit window for numeric integration"
            ))),
        }
    }

    /// Draws into `out` and returns the proposal density there.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        match self {
            Proposal::Radial(s) => s.sample(rng, out),
            Proposal::Uniform { region, pdf } => {
                region.sample_uniform(rng, out);
                *pdf
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mean() {
        let e = integrate(100_000, 3, |rng| rng.random::<f64>());
        assert!((e.value - 0.5).abs() < 4.0 * e.std_error);
        assert!((e.std_error - (1.0 / 12.0f64 / 1e5).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let f = |rng: &mut ChaCha8Rng| rng.random::<f64>().powi(2);
        assert_eq!(integrate(10_000, 9, f), integrate(10_000, 9, f));
        assert_ne!(integrate(10_000, 9, f), integrate(10_000, 10, f));
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - whole.mean).abs() < 1e-12);
        assert!((m.m2 - whole.m2).abs() < 1e-6 * whole.m2);
    }

    #[test]
    fn estimate_arithmetic() {
        let a = Estimate { value: 2.0, std_error: 0.1 };
        let b = Estimate { value: 3.0, std_error: 0.2 };
        let s = Estimate::sum([a, b]);
        assert_eq!(s.value, 5.0);
        assert!((s.std_error - 0.05f64.sqrt()).abs() < 1e-12);
        assert!((a.z_distance(b) - 1.0 / 0.05f64.sqrt()).abs() < 1e-12);
        assert_eq!(a.scale(-2.0).std_error, 0.2);
    }
}
