use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family of a [`Density`], the serialisable part of its description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityFamily {
    /// `m(x) = amplitude · (‖x‖ + 1)^(-gamma)`.
    PowerLaw { amplitude: f64, gamma: f64 },
    /// `m(x) = level` on the closed box `[lo, hi]`, zero elsewhere.
    UniformBox { lo: Vec<f64>, hi: Vec<f64>, level: f64 },
    Custom { label: String },
}

type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A bounded Lebesgue intensity on `ℝ^d`.
#[derive(Clone)]
pub struct Density {
    d: usize,
    family: DensityFamily,
    sup_bound: f64,
    custom: Option<DensityFn>,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("d", &self.d)
            .field("family", &self.family)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl Density {
    pub fn power_law(d: usize, amplitude: f64, gamma: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDensity("dimension must be positive".into()));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) || !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidDensity(format!(
                "power law needs amplitude > 0 and gamma > 0, got A={amplitude}, gamma={gamma}"
            )));
        }
        Ok(Self {
            d,
            family: DensityFamily::PowerLaw { amplitude, gamma },
            sup_bound: amplitude,
            custom: None,
        })
    }

    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>, level: f64) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidDensity("box corners must have equal positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::InvalidDensity("box needs finite lo <= hi".into()));
        }
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::InvalidDensity(format!("level must be positive, got {level}")));
        }
        Ok(Self {
            d: lo.len(),
            family: DensityFamily::UniformBox { lo, hi, level },
            sup_bound: level,
            custom: None,
        })
    }

    /// `m ≡ 1` on `[0,1]^d`.
    pub fn unit_cube(d: usize) -> Result<Self> {
        Self::uniform_box(vec![0.0; d], vec![1.0; d], 1.0)
    }

    /// A user supplied intensity. `sup_bound` must dominate `eval` on every
    /// window the density is sampled on.
    pub fn custom<F>(d: usize, sup_bound: f64, label: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if d == 0 {
            return Err(Error::InvalidDensity("dimension must be positive".into()));
        }
        Ok(Self {
            d,
            family: DensityFamily::Custom { label: label.into() },
            sup_bound,
            custom: Some(Arc::new(eval)),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        match &self.family {
            DensityFamily::PowerLaw { amplitude, gamma } => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if *gamma == 1.0 {
                    amplitude / (norm + 1.0)
                } else {
                    amplitude * (norm + 1.0).powf(-gamma)
                }
            }
            DensityFamily::UniformBox { lo, hi, level } => {
                let inside = x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h);
                if inside {
                    *level
                } else {
                    0.0
                }
            }
            DensityFamily::Custom { .. } => {
                let f = self.custom.as_ref().expect("custom density carries its function");
                f(x)
            }
        }
    }

    /// Same density with the amplitude (or level) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match &self.family {
            DensityFamily::PowerLaw { amplitude, gamma } => Self::power_law(self.d, amplitude * factor, *gamma),
            DensityFamily::UniformBox { lo, hi, level } => Self::uniform_box(lo.clone(), hi.clone(), level * factor),
            DensityFamily::Custom { label } => {
                let f = self.custom.clone().expect("custom density carries its function");
                Self::custom(self.d, self.sup_bound * factor, format!("{label}*{factor}"), move |x| factor * f(x))
            }
        }
    }

    /// Short identifier used in CSV `params` columns.
    pub fn id(&self) -> String {
        match &self.family {
            DensityFamily::PowerLaw { amplitude, gamma } => format!("power_law(A={amplitude},gamma={gamma},d={})", self.d),
            DensityFamily::UniformBox { level, .. } => format!("uniform_box(level={level},d={})", self.d),
            DensityFamily::Custom { label } => format!("custom({label})"),
        }
    }
}
