//! Experiment configuration files (TOML).
//!
//! ```toml
//! master_seed = 42
//! replicates = 1000
//! output_dir = "out"
//! t_grid = [100.0]
//!
//! [density]
//! family = "uniform_box"      # or "power_law" with amplitude, gamma, d
//! lo = [0.0, 0.0]
//! hi = [1.0, 1.0]
//!
//! [window]                    # optional for uniform_box
//! kind = "ball"               # "box" (lo, hi) | "ball" (center, radius) | "truncation" (eps)
//! center = [0.0, 0.0]
//! radius = 10.0
//!
//! [connection]
//! p = 2.0                     # lp ball; 1.0 .. inf
//!
//! [rho_rule]
//! kind = "fixed"              # or "power" with beta: rho_t = t^-beta
//! rho = 0.1
//!
//! [template]
//! preset = "edge"             # or k = 3 and edges = [[0, 1], [1, 2]]
//!
//! [experiment]                # all optional
//! r_points = 41
//! moment_samples = 200000
//! slln_seeds = 100
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geograph::ConnectionSet;
use crate::motif::{MotifTemplate, Preset};
use crate::ppp::{integrability_check, truncation_radius, Density, Window};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    master_seed: u64,
    replicates: usize,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    t_grid: Vec<f64>,
    density: RawDensity,
    window: Option<RawWindow>,
    #[serde(default)]
    connection: RawConnection,
    rho_rule: RhoRule,
    template: RawTemplate,
    #[serde(default)]
    experiment: ExperimentOptions,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawDensity {
    PowerLaw { amplitude: f64, gamma: f64, d: usize },
    UniformBox { lo: Vec<f64>, hi: Vec<f64>, #[serde(default = "one")] level: f64 },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawWindow {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Option<Vec<f64>>, radius: f64 },
    Truncation { eps: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    #[serde(default = "two")]
    p: f64,
}

impl Default for RawConnection {
    fn default() -> Self {
        Self { p: 2.0 }
    }
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    preset: Option<String>,
    k: Option<usize>,
    edges: Option<Vec<[usize; 2]>>,
}

/// How the connection radius depends on the intensity scale `t`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoRule {
    Fixed { rho: f64 },
    /// `ρ_t = t^{-β}`.
    Power { beta: f64 },
}

impl RhoRule {
    pub fn rho(&self, t: f64) -> f64 {
        match *self {
            RhoRule::Fixed { rho } => rho,
            RhoRule::Power { beta } => t.powf(-beta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentOptions {
    /// Points on the tail `r` grid.
    pub r_points: usize,
    /// Monte Carlo samples per moment integral.
    pub moment_samples: usize,
    /// Independent seeds for the SLLN deviation table.
    pub slln_seeds: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self { r_points: 41, moment_samples: 200_000, slln_seeds: 100 }
    }
}

#[derive(Clone, Debug)]
enum WindowSpec {
    Fixed(Window),
    Truncation { eps: f64 },
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub density: Density,
    window: WindowSpec,
    pub p: f64,
    pub template: MotifTemplate,
    pub t_grid: Vec<f64>,
    pub rho_rule: RhoRule,
    pub replicates: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub options: ExperimentOptions,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let density = match raw.density {
            RawDensity::PowerLaw { amplitude, gamma, d } => Density::power_law(d, amplitude, gamma)?,
            RawDensity::UniformBox { lo, hi, level } => Density::uniform_box(lo, hi, level)?,
        };
        let d = density.dim();
        let template = parse_template(&raw.template)?;
        let k = template.k();
        if !integrability_check(&density, k)? {
            return Err(Error::NotIntegrable { k, d });
        }
        let window = match raw.window {
            Some(RawWindow::Box { lo, hi }) => WindowSpec::Fixed(Window::new_box(lo, hi)?),
            Some(RawWindow::Ball { center, radius }) => {
                WindowSpec::Fixed(Window::new_ball(center.unwrap_or_else(|| vec![0.0; d]), radius)?)
            }
            Some(RawWindow::Truncation { eps }) => {
                if !(eps > 0.0) {
                    return Err(Error::InvalidTolerance(eps));
                }
                WindowSpec::Truncation { eps }
            }
            None => match density.family() {
                crate::ppp::DensityFamily::UniformBox { lo, hi, .. } => {
                    WindowSpec::Fixed(Window::new_box(lo.clone(), hi.clone())?)
                }
                _ => return Err(Error::Config("a [window] section is required for power-law densities".into())),
            },
        };
        if let WindowSpec::Fixed(w) = &window {
            if w.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: w.dim() });
            }
        }
        if raw.replicates < 1 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if raw.t_grid.is_empty() || raw.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("t_grid must be a non-empty list of positive numbers".into()));
        }
        match raw.rho_rule {
            RhoRule::Fixed { rho } if !(rho > 0.0 && rho.is_finite()) => {
                return Err(Error::Config(format!("rho must be positive, got {rho}")));
            }
            RhoRule::Power { beta } => {
                check_regime(beta, d, k)?;
            }
            _ => {}
        }
        // validates p
        ConnectionSet::lp_ball(d, 1.0, raw.connection.p)?;
        let options = raw.experiment;
        if options.r_points < 1 || options.slln_seeds < 1 {
            return Err(Error::Config("r_points and slln_seeds must be positive".into()));
        }
        Ok(Self {
            density,
            window,
            p: raw.connection.p,
            template,
            t_grid: raw.t_grid,
            rho_rule: raw.rho_rule,
            replicates: raw.replicates,
            master_seed: raw.master_seed,
            output_dir: raw.output_dir,
            options,
        })
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.rho_rule.rho(t)
    }

    /// Connection set at intensity scale `t`.
    pub fn connection(&self, t: f64) -> Result<ConnectionSet> {
        ConnectionSet::lp_ball(self.dim(), self.rho(t), self.p)
    }

    /// Sampling window at intensity scale `t`.
    pub fn window(&self, t: f64) -> Result<Window> {
        match &self.window {
            WindowSpec::Fixed(w) => Ok(w.clone()),
            WindowSpec::Truncation { eps } => {
                let s = self.connection(t)?;
                let reach = self.template.diam() as f64 * s.outer_radius();
                let radius = truncation_radius(&self.density, self.template.k(), reach, t, s.rho(), *eps)?;
                Window::new_ball(vec![0.0; self.dim()], radius)
            }
        }
    }
}

fn parse_template(raw: &RawTemplate) -> Result<MotifTemplate> {
    match (&raw.preset, raw.k, &raw.edges) {
        (Some(name), None, None) => Ok(name.parse::<Preset>()?.template()),
        (None, Some(k), Some(edges)) => {
            let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
            MotifTemplate::from_edges(k, &pairs)
        }
        _ => Err(Error::Config("[template] needs either `preset` or both `k` and `edges`".into())),
    }
}

/// The strong-law regime `liminf t^{k-γ} ρ_t^{d(k-1)} > 0` for some `γ > 0`
/// holds for `ρ_t = t^{-β}` iff `β d (k-1) < k`; the largest admissible
/// `γ` is `k - β d (k-1)`.
pub fn check_regime(beta: f64, d: usize, k: usize) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::RegimeViolation(format!("beta must be finite and >= 0, got {beta}")));
    }
    let gamma = k as f64 - beta * (d * (k - 1)) as f64;
    if gamma > 0.0 {
        Ok(gamma)
    } else {
        Err(Error::RegimeViolation(format!(
            "rho_t = t^-{beta} gives t^(k-g) rho_t^(d(k-1)) -> 0 for every g > 0 (need beta*d*(k-1) < k, \
             here {} >= {k})",
            beta * (d * (k - 1)) as f64
        )))
    }
}
