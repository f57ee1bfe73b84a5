//! Expectation and variance of subgraph counts by numeric integration,
//! their asymptotic constants, and empirical medians.

mod formulas;
mod integrate;

pub use formulas::{
    analytic_edge_expectation, asymptotic_a, asymptotic_a_n, asymptotic_constants, asymptotic_variance,
    expectation_numeric, limit_integral_k_n, variance_numeric, AsymptoticConstants, MomentEstimates,
    MomentParams, MonteCarlo, Source,
};
pub use integrate::{integrate, Estimate};

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum sample size for [`mean_median_gap`].
pub const GAP_MIN_SAMPLES: usize = 1000;
/// Slack on the Chebyshev gap to absorb sampling noise.
pub const GAP_SLACK: f64 = 0.1;

/// Smallest empirical median: the `⌈n/2⌉`-th order statistic (1-based).
pub fn median_smallest(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[samples.len().div_ceil(2) - 1])
}

/// Mean and population variance.
pub fn mean_variance(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok((mean, var))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapCheck {
    pub gap: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `|median − mean| ≤ √(2·variance)·(1 + GAP_SLACK)` on an empirical sample.
pub fn mean_median_gap(samples: &[f64]) -> Result<GapCheck> {
    if samples.len() < GAP_MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {GAP_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let (mean, var) = mean_variance(samples)?;
    let gap = (median_smallest(samples)? - mean).abs();
    let bound = (2.0 * var).sqrt();
    Ok(GapCheck { gap, bound, holds: gap <= bound * (1.0 + GAP_SLACK) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, Poisson};

    #[test]
    fn medians() {
        assert_eq!(median_smallest(&[3.0; 7]).unwrap(), 3.0);
        assert_eq!(median_smallest(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median_smallest(&[5.0]).unwrap(), 5.0);
        assert!(matches!(median_smallest(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn poisson_median() {
        let mut rng = rng_from_seed(77);
        let p = Poisson::new(10.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| p.sample(&mut rng)).collect();
        assert_eq!(median_smallest(&xs).unwrap(), 10.0);
        let mut rng = rng_from_seed(78);
        let p = Poisson::new(100.0).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| p.sample(&mut rng)).collect();
        let g = mean_median_gap(&xs).unwrap();
        assert!(g.holds && g.gap <= 200f64.sqrt());
    }

    #[test]
    fn symmetric_gap() {
        let xs: Vec<f64> = (0..2000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let g = mean_median_gap(&xs).unwrap();
        assert_eq!(g.gap, 1.0);
        assert!((g.bound - 2f64.sqrt()).abs() < 1e-12);
        assert!(g.holds);
        assert!(mean_median_gap(&xs[..999]).is_err());
    }
}
