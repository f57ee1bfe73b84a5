use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, RhoRule};
use crate::bounds::{c_d_subgraph, log_lower_tail_mean, log_median_tails, log_upper_tail_mean, subgraph_alpha};
use crate::error::{Error, Result};
use crate::geograph::GeoGraph;
use crate::moments::{
    asymptotic_a, expectation_numeric, mean_variance, median_smallest, variance_numeric, Estimate, MonteCarlo,
};
use crate::motif::count;
use crate::ppp::{sample, PointSet, Window};
use crate::rng::child_seed;

/// Seed stream reserved for moment integrals, disjoint from replicate indices.
const MOMENT_STREAM: u64 = u64::MAX - 1;
const Z95: f64 = 1.96;

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Count of `H`-copies for one realisation at intensity `t` with `seed`.
pub fn simulate_count(cfg: &ExperimentConfig, t: f64, seed: u64) -> Result<u64> {
    let window = cfg.window(t)?;
    let s = cfg.connection(t)?;
    let pts = sample(&cfg.density, &window, t, seed)?;
    let g = GeoGraph::build(&pts, &s)?;
    Ok(count(&g, &cfg.template).total())
}

/// Counts for `replicates` independent realisations with seeds
/// `child_seed(master, r)`, in replicate order.
pub fn simulate_counts(cfg: &ExperimentConfig, t: f64, master: u64, replicates: usize) -> Result<Vec<u64>> {
    (0..replicates).into_par_iter().map(|r| simulate_count(cfg, t, child_seed(master, r as u64))).collect()
}

fn single_t(cfg: &ExperimentConfig) -> Result<f64> {
    match cfg.t_grid.as_slice() {
        [t] => Ok(*t),
        _ => Err(Error::Config(format!("this experiment needs exactly one t, got {}", cfg.t_grid.len()))),
    }
}

/// Expectation and variance of the count at `t` by numeric integration over
/// the configured window.
pub fn moment_anchors(cfg: &ExperimentConfig, t: f64) -> Result<(Estimate, Estimate)> {
    let window = cfg.window(t)?;
    let s = cfg.connection(t)?;
    let mc = MonteCarlo::new(cfg.options.moment_samples, child_seed(cfg.master_seed, MOMENT_STREAM));
    let e = expectation_numeric(&cfg.density, &cfg.template, &s, t, s.rho(), Some(&window), &mc)?;
    let v = variance_numeric(&cfg.density, &cfg.template, &s, t, s.rho(), Some(&window), &mc)?;
    Ok((e.expectation.expect("expectation set"), v.variance.expect("variance set")))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Anchors {
    pub expectation: Estimate,
    pub variance: Estimate,
    pub median: f64,
}

/// One row of the tail table. Mean-tail frequencies use `≥`/`≤`, median-tail
/// frequencies use strict inequalities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TailRow {
    pub r: f64,
    pub emp_upper: f64,
    pub emp_lower: f64,
    pub ci: f64,
    pub mean_upper: f64,
    pub mean_lower: f64,
    pub median_upper: f64,
    pub median_lower: f64,
    pub emp_median_upper: f64,
    pub emp_median_lower: f64,
    pub ci_median: f64,
    pub dominated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub t: f64,
    pub rho: f64,
    pub replicates: usize,
    pub anchors: Anchors,
    pub c_d: f64,
    pub alpha: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn dominated(&self) -> bool {
        self.rows.iter().all(|r| r.dominated)
    }

    pub fn violations(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| !r.dominated).map(|r| r.r).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "r,emp_upper,emp_lower,ci,mean_upper,mean_lower,median_upper,median_lower,\
             emp_median_upper,emp_median_lower,ci_median"
        )?;
        for row in &self.rows {
            let vals = [
                row.r,
                row.emp_upper,
                row.emp_lower,
                row.ci,
                row.mean_upper,
                row.mean_lower,
                row.median_upper,
                row.median_lower,
                row.emp_median_upper,
                row.emp_median_lower,
                row.ci_median,
            ];
            writeln!(out, "{}", vals.map(fmt17).join(","))?;
        }
        Ok(())
    }
}

fn half_width(p: f64, n: usize) -> f64 {
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Tail table from simulated counts and anchors, on `r_points` values spread
/// evenly over `[0, 5√𝕍]`.
pub fn tail_report(
    cfg: &ExperimentConfig,
    t: f64,
    counts: &[u64],
    expectation: Estimate,
    variance: Estimate,
) -> Result<TailReport> {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let median = median_smallest(&xs)?;
    let (emp_mean, emp_var) = mean_variance(&xs)?;
    let h = &cfg.template;
    let (k, d) = (h.k(), cfg.dim());
    let s = cfg.connection(t)?;
    let c = c_d_subgraph(h, d, s.theta());
    let alpha = subgraph_alpha(k);
    let (e, v) = (expectation.value, variance.value);
    let n = xs.len();
    let freq = |pred: &dyn Fn(f64) -> bool| xs.iter().filter(|&&x| pred(x)).count() as f64 / n as f64;
    let top = 5.0 * v.max(0.0).sqrt();
    let points = cfg.options.r_points;
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let r = if points == 1 { 0.0 } else { top * i as f64 / (points - 1) as f64 };
        let emp_upper = freq(&|x| x >= e + r);
        let emp_lower = freq(&|x| x <= e - r);
        let emp_median_upper = freq(&|x| x > median + r);
        let emp_median_lower = freq(&|x| x < median - r);
        let mean_upper = log_upper_tail_mean(e.max(0.0), r, k, c, alpha)?.min(0.0).exp();
        let mean_lower = log_lower_tail_mean(v, r, k)?.min(0.0).exp();
        let (mu, ml) = log_median_tails(median, r, k, c, alpha)?;
        let (median_upper, median_lower) = (mu.min(0.0).exp(), ml.min(0.0).exp());
        let (ciu, cil) = (half_width(emp_upper, n), half_width(emp_lower, n));
        let (cimu, ciml) = (half_width(emp_median_upper, n), half_width(emp_median_lower, n));
        let dominated = emp_upper <= mean_upper + ciu
            && emp_lower <= mean_lower + cil
            && emp_median_upper <= median_upper + cimu
            && emp_median_lower <= median_lower + ciml;
        rows.push(TailRow {
            r,
            emp_upper,
            emp_lower,
            ci: ciu.max(cil),
            mean_upper,
            mean_lower,
            median_upper,
            median_lower,
            emp_median_upper,
            emp_median_lower,
            ci_median: cimu.max(ciml),
            dominated,
        });
    }
    Ok(TailReport {
        t,
        rho: s.rho(),
        replicates: n,
        anchors: Anchors { expectation, variance, median },
        c_d: c,
        alpha,
        empirical_mean: emp_mean,
        empirical_variance: emp_var,
        rows,
    })
}

/// Simulates the configured replicates at the single configured `t` and
/// compares empirical tails with the four bounds.
pub fn run_tails(cfg: &ExperimentConfig) -> Result<TailReport> {
    let t = single_t(cfg)?;
    let counts = simulate_counts(cfg, t, cfg.master_seed, cfg.replicates)?;
    let (e, v) = moment_anchors(cfg, t)?;
    tail_report(cfg, t, &counts, e, v)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SllnPoint {
    pub t: f64,
    pub count: u64,
    pub ratio: f64,
    pub rel_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SllnReport {
    pub target: Estimate,
    /// One trajectory, seed `master_seed` at every `t`.
    pub path: Vec<SllnPoint>,
    /// `seeds[s][i]`: seed `child_seed(master, s)` at `t_grid[i]`.
    pub seeds: Vec<Vec<SllnPoint>>,
    /// Empirical 90th percentile of the relative deviation per `t`.
    pub p90: Vec<f64>,
}

impl SllnReport {
    pub fn final_deviation(&self) -> f64 {
        self.path.last().map_or(f64::NAN, |p| p.rel_deviation)
    }

    pub fn p90_decreasing(&self) -> bool {
        self.p90.windows(2).all(|w| w[1] < w[0])
    }

    pub fn write_path_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,ratio,target,rel_deviation")?;
        for p in &self.path {
            writeln!(out, "{},{},{},{}", fmt17(p.t), fmt17(p.ratio), fmt17(self.target.value), fmt17(p.rel_deviation))?;
        }
        Ok(())
    }

    pub fn write_seeds_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "seed_index,t,count,ratio,rel_deviation")?;
        for (s, row) in self.seeds.iter().enumerate() {
            for p in row {
                writeln!(out, "{s},{},{},{},{}", fmt17(p.t), p.count, fmt17(p.ratio), fmt17(p.rel_deviation))?;
            }
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,p90_rel_deviation")?;
        for (p, q) in self.path.iter().zip(&self.p90) {
            writeln!(out, "{},{}", fmt17(p.t), fmt17(*q))?;
        }
        Ok(())
    }
}

/// `⌈0.9 n⌉`-th order statistic.
pub fn percentile90(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v[((0.9 * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1]
}

/// Rescaled counts `N_t/(t^k ρ_t^{d(k-1)})` along the configured `t` grid,
/// against the limit `a` over the whole space.
pub fn run_slln(cfg: &ExperimentConfig) -> Result<SllnReport> {
    if !matches!(cfg.rho_rule, RhoRule::Power { .. }) {
        return Err(Error::Config("slln needs rho_rule kind = \"power\"".into()));
    }
    if cfg.t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("slln needs a strictly increasing t_grid".into()));
    }
    let (k, d) = (cfg.template.k(), cfg.dim());
    let shape = cfg.connection(1.0)?;
    let mc = MonteCarlo::new(cfg.options.moment_samples, child_seed(cfg.master_seed, MOMENT_STREAM));
    let target = asymptotic_a(&cfg.density, &cfg.template, &shape, &mc)?;
    let point = |t: f64, seed: u64| -> Result<SllnPoint> {
        let n = simulate_count(cfg, t, seed)?;
        let scale = (k as f64 * t.ln() + (d * (k - 1)) as f64 * cfg.rho(t).ln()).exp();
        let ratio = n as f64 / scale;
        Ok(SllnPoint { t, count: n, ratio, rel_deviation: (ratio - target.value).abs() / target.value })
    };
    let path = cfg.t_grid.par_iter().map(|&t| point(t, cfg.master_seed)).collect::<Result<Vec<_>>>()?;
    let seeds = (0..cfg.options.slln_seeds)
        .into_par_iter()
        .map(|s| cfg.t_grid.iter().map(|&t| point(t, child_seed(cfg.master_seed, s as u64))).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    let p90 = (0..cfg.t_grid.len())
        .map(|i| percentile90(&seeds.iter().map(|row| row[i].rel_deviation).collect::<Vec<_>>()))
        .collect();
    Ok(SllnReport { target, path, seeds, p90 })
}

/// SVG with one circle per vertex and one line per edge over the window's
/// bounding box (y pointing up).
pub fn render_svg(graph: &GeoGraph<'_>, window: &Window) -> Result<String> {
    let pts = graph.points();
    if pts.dim() != 2 || window.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: pts.dim() });
    }
    let (lo, hi) = window.bounding_box();
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let radius = 0.003 * w.max(h);
    let stroke = 0.4 * radius;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        lo[0],
        -hi[1],
        w,
        h
    );
    let _ = writeln!(svg, r##"<g stroke="#333" stroke-width="{stroke}">"##);
    for (i, j) in graph.edges() {
        let (a, b) = (pts.point(i), pts.point(j));
        let _ = writeln!(svg, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, a[0], -a[1], b[0], -b[1]);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r##"<g fill="#c00">"##);
    for p in pts.iter() {
        let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="{radius}"/>"#, p[0], -p[1]);
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_figure(graph: &GeoGraph<'_>, window: &Window, path: &Path) -> Result<()> {
    let svg = render_svg(graph, window)?;
    std::fs::write(path, svg)?;
    Ok(())
}

/// Edges per unit area in `rings` concentric annuli of equal width up to
/// `r_max`, binned by edge midpoint distance from the origin.
pub fn edge_density_by_radius(graph: &GeoGraph<'_>, rings: usize, r_max: f64) -> Vec<f64> {
    let pts = graph.points();
    let width = r_max / rings as f64;
    let mut counts = vec![0usize; rings];
    for (i, j) in graph.edges() {
        let mid: f64 = pts.point(i).iter().zip(pts.point(j)).map(|(a, b)| (0.5 * (a + b)).powi(2)).sum::<f64>().sqrt();
        let bin = (mid / width) as usize;
        if bin < rings {
            counts[bin] += 1;
        }
    }
    counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let (r0, r1) = (b as f64 * width, (b + 1) as f64 * width);
            c as f64 / (std::f64::consts::PI * (r1 * r1 - r0 * r0))
        })
        .collect()
}

/// Sample for the first configured `t`, with the given seed.
pub fn sample_first(cfg: &ExperimentConfig, seed: u64) -> Result<(f64, Window, PointSet)> {
    let t = cfg.t_grid[0];
    let window = cfg.window(t)?;
    let pts = sample(&cfg.density, &window, t, seed)?;
    Ok((t, window, pts))
}
