//! Poisson point processes on bounded windows.

mod density;
pub mod radial;
mod sample;
mod window;

pub use density::{Density, DensityFamily};
pub use sample::{sample, PointSet, PointSetMeta};
pub use window::{sample_direction, sample_in_ball, unit_ball_volume, Window};

use crate::error::{Error, Result};

/// Whether `∫ m(x)^k dx < ∞`, i.e. whether subgraph counts of order `k`
/// over the untruncated process are almost surely finite.
pub fn integrability_check(density: &Density, k: usize) -> Result<bool> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("order k must be >= 2, got {k}")));
    }
    match density.family() {
        DensityFamily::PowerLaw { gamma, .. } => Ok(k as f64 * gamma > density.dim() as f64),
        DensityFamily::UniformBox { .. } => Ok(true),
        DensityFamily::Custom { label } => Err(Error::UnsupportedFamily(format!(
            "no analytic integrability criterion for custom density `{label}`"
        ))),
    }
}

/// `∫ m(x)^p dx` over `ℝ^d`, when known in closed form.
pub fn total_mass_power(density: &Density, p: f64) -> Result<f64> {
    match density.family() {
        DensityFamily::PowerLaw { amplitude, gamma } => {
            let v = radial::power_law_mass(density.dim(), *amplitude, *gamma, p, f64::INFINITY);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NotIntegrable { k: p.round() as usize, d: density.dim() })
            }
        }
        DensityFamily::UniformBox { lo, hi, level } => {
            Ok(level.powf(p) * lo.iter().zip(hi).map(|(l, h)| h - l).product::<f64>())
        }
        DensityFamily::Custom { label } => {
            Err(Error::UnsupportedFamily(format!("no closed-form mass for custom density `{label}`")))
        }
    }
}

/// A constant `c >= 1` with `m(x) <= c·m(y)` whenever `‖x-y‖ <= range`.
pub fn ratio_constant(density: &Density, range: f64) -> Result<f64> {
    if !(range >= 0.0) || range.is_infinite() {
        return Err(Error::InvalidParameter(format!("range must be finite and >= 0, got {range}")));
    }
    if range == 0.0 {
        return Ok(1.0);
    }
    match density.family() {
        DensityFamily::PowerLaw { gamma, .. } => Ok((1.0 + range).powf(*gamma)),
        DensityFamily::UniformBox { .. } => Err(Error::NoFiniteRatio(
            "uniform box density vanishes outside its support, so m(x) <= c·m(y) fails for pairs \
             straddling the boundary; only the interior admits c = 1"
                .into(),
        )),
        DensityFamily::Custom { label } => {
            Err(Error::UnsupportedFamily(format!("no ratio constant known for custom density `{label}`")))
        }
    }
}

/// Radius `R` of a centred ball such that the expected number of copies of a
/// `k`-vertex template with a vertex outside `B(0, R - reach)` is at most
/// `eps`, where `reach = Θρ`.
///
/// Uses `E_out <= t^k ρ^{d(k-1)}/k! · c^k · J_max · (κ_d Θ^d)^{k-1} · ∫_{‖x‖>R-Θρ} m^k`
/// with `J_max = k!` and `c = ratio_constant(density, Θρ)`.
pub fn truncation_radius(density: &Density, k: usize, reach: f64, t: f64, rho: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidTolerance(eps));
    }
    if !(reach > 0.0 && rho > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter("reach, rho and t must be positive".into()));
    }
    if !integrability_check(density, k)? {
        return Err(Error::NotIntegrable { k, d: density.dim() });
    }
    if eps.is_infinite() {
        return Ok(reach);
    }
    let d = density.dim();
    match density.family() {
        DensityFamily::UniformBox { .. } => {
            // compact support: covering the whole box loses nothing
            let (lo, hi) = match density.family() {
                DensityFamily::UniformBox { lo, hi, .. } => (lo.clone(), hi.clone()),
                _ => unreachable!(),
            };
            Ok(Window::Box { lo, hi }.max_norm() + reach)
        }
        DensityFamily::PowerLaw { amplitude, gamma } => {
            let theta_big = reach / rho;
            let c = ratio_constant(density, reach)?;
            let ball = unit_ball_volume(d) * theta_big.powi(d as i32);
            let kf = k as f64;
            // t^k ρ^{d(k-1)}/k! · k! cancels the factorials
            let log_pref = kf * t.ln() + (d * (k - 1)) as f64 * rho.ln() + kf * c.ln() + (kf - 1.0) * ball.ln();
            let tail = |s: f64| radial::power_law_tail_mass(d, *amplitude, *gamma, kf, s);
            let budget = |s: f64| (log_pref + tail(s).ln()).exp();
            if budget(0.0) <= eps {
                return Ok(reach);
            }
            let mut hi = 1.0;
            while budget(hi) > eps {
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::InvalidTolerance(eps));
                }
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if budget(mid) > eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-13 * hi {
                    break;
                }
            }
            Ok(hi + reach)
        }
        DensityFamily::Custom { .. } => unreachable!("integrability_check rejects custom densities"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrability_examples() {
        let m = Density::power_law(2, 18.0, 1.0).unwrap();
        assert!(!integrability_check(&m, 2).unwrap());
        assert!(integrability_check(&m, 3).unwrap());
        assert!(integrability_check(&Density::unit_cube(2).unwrap(), 2).unwrap());
        let c = Density::custom(2, 1.0, "c", |_| 1.0).unwrap();
        assert!(matches!(integrability_check(&c, 2), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn ratio_constant_examples() {
        let m = Density::power_law(2, 1.0, 2.0).unwrap();
        assert_eq!(ratio_constant(&m, 1.0).unwrap(), 4.0);
        assert_eq!(ratio_constant(&m, 0.0).unwrap(), 1.0);
        let u = Density::unit_cube(2).unwrap();
        assert_eq!(ratio_constant(&u, 0.0).unwrap(), 1.0);
        assert!(matches!(ratio_constant(&u, 0.5), Err(Error::NoFiniteRatio(_))));
    }

    #[test]
    fn truncation_vacuous_and_invalid() {
        let m = Density::power_law(2, 18.0, 1.0).unwrap();
        assert_eq!(truncation_radius(&m, 3, 1.0, 1.0, 1.0, f64::INFINITY).unwrap(), 1.0);
        assert!(matches!(truncation_radius(&m, 3, 1.0, 1.0, 1.0, 0.0), Err(Error::InvalidTolerance(_))));
        assert!(matches!(truncation_radius(&m, 2, 1.0, 1.0, 1.0, 1.0), Err(Error::NotIntegrable { .. })));
    }

    #[test]
    fn truncation_one_dimensional_closed_form() {
        // d=1, k=2, A=1, γ=1, reach Θρ with Θ=1, ρ=0.5, t=3:
        // bound = t² ρ · c² · (2Θ) · 2/(1+s) with c = (1+Θρ)
        let m = Density::power_law(1, 1.0, 1.0).unwrap();
        let (t, rho, reach) = (3.0, 0.5, 0.5);
        let c: f64 = 1.0 + reach;
        let pref = t * t * rho * c * c * 2.0;
        for &eps in &[1e-3, 0.01, 0.5] {
            let r = truncation_radius(&m, 2, reach, t, rho, eps).unwrap();
            let s = r - reach;
            let expected_s = (2.0 * pref / eps - 1.0).max(0.0);
            assert!((s - expected_s).abs() < 1e-9 * expected_s.max(1.0), "{s} vs {expected_s}");
        }
    }

    #[test]
    fn truncation_monotone_in_eps() {
        let m = Density::power_law(2, 18.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        let mut eps = 1e-6;
        while eps < 1e6 {
            let r = truncation_radius(&m, 3, 1.0, 2.0, 1.0, eps).unwrap();
            assert!(r <= prev);
            prev = r;
            eps *= 2.0;
        }
    }

    #[test]
    fn uniform_box_truncation_covers_support() {
        let u = Density::unit_cube(2).unwrap();
        let r = truncation_radius(&u, 2, 0.1, 100.0, 0.1, 1e-3).unwrap();
        assert!((r - (2f64.sqrt() + 0.1)).abs() < 1e-12);
    }
}
