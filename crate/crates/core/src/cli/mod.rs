//! Command-line experiment runner.

mod config;
mod experiments;

pub use config::{check_regime, ExperimentConfig, ExperimentOptions, RhoRule};
pub use experiments::{
    edge_density_by_radius, fmt17, moment_anchors, percentile90, render_figure, render_svg, run_slln, run_tails,
    sample_first, simulate_count, simulate_counts, tail_report, Anchors, SllnPoint, SllnReport, TailReport, TailRow,
};

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::{c_d_subgraph, median_tails, subgraph_alpha, upper_tail_mean, lower_tail_mean};
use crate::error::{Error, Result};
use crate::geograph::GeoGraph;
use crate::moments::{asymptotic_a, expectation_numeric, median_smallest, variance_numeric, MonteCarlo};
use crate::motif::count;
use crate::ppp::integrability_check;
use crate::rng::child_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMINATION: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "GEOCONC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "geoconc", version, about = "Subgraph counts in random geometric graphs: simulation and bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `replicates`.
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one point set (points.csv, points.json).
    Sample(Common),
    /// Count template copies in one sample (census.csv, edges.csv).
    Count(Common),
    /// Tabulate the four tail bounds (bounds.csv).
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Expectation anchor; computed numerically when absent.
        #[arg(long)]
        expectation: Option<f64>,
        /// Variance anchor; computed numerically when absent.
        #[arg(long)]
        variance: Option<f64>,
        /// Median anchor; estimated from simulated replicates when absent.
        #[arg(long)]
        median: Option<f64>,
    },
    /// Numeric expectation, variance and limit constant (moments.csv).
    Moments(Common),
    /// Empirical tails against the bounds (tails.csv, tails.json).
    Tails(Common),
    /// Rescaled counts along the t grid (slln_path.csv, slln_seeds.csv, slln_summary.csv).
    Slln(Common),
    /// Render one sample as SVG (figure.svg, figure_rings.csv).
    Figure(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Sample(c)
            | Command::Count(c)
            | Command::Moments(c)
            | Command::Tails(c)
            | Command::Slln(c)
            | Command::Figure(c) => c,
            Command::Bounds { common, .. } => common,
        }
    }
}

/// Exit code for an error: configuration problems map to 2.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_FAILURE,
        Error::EmptySample | Error::OracleTooLarge(_) | Error::InvalidIndex { .. } | Error::InsufficientSpan(_) => {
            EXIT_FAILURE
        }
        _ => EXIT_CONFIG,
    }
}

/// Applies `GEOCONC_THREADS` to the global thread pool, if set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize =
            v.parse().map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
        }
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(r) = common.replicates {
        if r == 0 {
            return Err(Error::Config("--replicates must be at least 1".into()));
        }
        cfg.replicates = r;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    fs::create_dir_all(&cfg.output_dir)?;
    let dir = cfg.output_dir.clone();
    Ok((cfg, dir))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = configure_threads().and_then(|()| dispatch(&cli.command));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    let (cfg, dir) = load(command.common())?;
    match command {
        Command::Sample(_) => {
            let (_, _, pts) = sample_first(&cfg, cfg.master_seed)?;
            pts.write_csv(create(&dir, "points.csv")?)?;
            pts.write_sidecar(create(&dir, "points.json")?)?;
            println!("sampled {} points", pts.len());
        }
        Command::Count(_) => {
            let (t, _, pts) = sample_first(&cfg, cfg.master_seed)?;
            let g = GeoGraph::build(&pts, &cfg.connection(t)?)?;
            let census = count(&g, &cfg.template);
            census.write_csv(create(&dir, "census.csv")?)?;
            g.write_edge_csv(create(&dir, "edges.csv")?)?;
            println!("points={} edges={} copies={}", pts.len(), g.edge_count(), census.total());
        }
        Command::Bounds { expectation, variance, median, .. } => {
            bounds_table(&cfg, &dir, *expectation, *variance, *median)?;
        }
        Command::Moments(_) => moments_table(&cfg, &dir)?,
        Command::Tails(_) => {
            let report = run_tails(&cfg)?;
            report.write_csv(create(&dir, "tails.csv")?)?;
            let mut json = create(&dir, "tails.json")?;
            serde_json::to_writer_pretty(&mut json, &report).map_err(std::io::Error::from)?;
            json.flush()?;
            if !report.dominated() {
                eprintln!("domination failed at r = {:?}", report.violations());
                return Ok(EXIT_DOMINATION);
            }
            println!("domination holds on all {} rows", report.rows.len());
        }
        Command::Slln(_) => {
            let report = run_slln(&cfg)?;
            report.write_path_csv(create(&dir, "slln_path.csv")?)?;
            report.write_seeds_csv(create(&dir, "slln_seeds.csv")?)?;
            report.write_summary_csv(create(&dir, "slln_summary.csv")?)?;
            println!(
                "target a = {} ± {}; final relative deviation {}",
                report.target.value,
                report.target.std_error,
                report.final_deviation()
            );
        }
        Command::Figure(_) => {
            let (t, window, pts) = sample_first(&cfg, cfg.master_seed)?;
            let g = GeoGraph::build(&pts, &cfg.connection(t)?)?;
            render_figure(&g, &window, &dir.join("figure.svg"))?;
            let rings = edge_density_by_radius(&g, 5, window.max_norm());
            let mut out = create(&dir, "figure_rings.csv")?;
            writeln!(out, "ring,edge_density")?;
            for (i, v) in rings.iter().enumerate() {
                writeln!(out, "{i},{}", fmt17(*v))?;
            }
            println!("vertices={} edges={}", pts.len(), g.edge_count());
        }
    }
    Ok(EXIT_OK)
}

fn bounds_table(
    cfg: &ExperimentConfig,
    dir: &Path,
    expectation: Option<f64>,
    variance: Option<f64>,
    median: Option<f64>,
) -> Result<()> {
    let t = cfg.t_grid[0];
    let (e, v) = match (expectation, variance) {
        (Some(e), Some(v)) => (e, v),
        (e, v) => {
            let (ne, nv) = moment_anchors(cfg, t)?;
            (e.unwrap_or(ne.value), v.unwrap_or(nv.value))
        }
    };
    let m = match median {
        Some(m) => m,
        None => {
            let counts = simulate_counts(cfg, t, cfg.master_seed, cfg.replicates)?;
            median_smallest(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())?
        }
    };
    let h = &cfg.template;
    let k = h.k();
    let c = c_d_subgraph(h, cfg.dim(), cfg.connection(t)?.theta());
    let alpha = subgraph_alpha(k);
    let mut out = create(dir, "bounds.csv")?;
    writeln!(out, "r,mean_upper,mean_lower,median_upper,median_lower")?;
    let top = 5.0 * v.sqrt();
    let n = cfg.options.r_points;
    for i in 0..n {
        let r = if n == 1 { 0.0 } else { top * i as f64 / (n - 1) as f64 };
        let (mu, ml) = median_tails(m, r, k, c, alpha)?;
        let row = [r, upper_tail_mean(e, r, k, c, alpha)?, lower_tail_mean(v, r, k)?, mu, ml];
        writeln!(out, "{}", row.map(fmt17).join(","))?;
    }
    println!("anchors: E={e} V={v} M={m}; c_d={c}");
    Ok(())
}

fn moments_table(cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let mut out = create(dir, "moments.csv")?;
    writeln!(out, "quantity,value,std_error,source,params")?;
    let h = &cfg.template;
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        let window = cfg.window(t)?;
        let s = cfg.connection(t)?;
        let mc = MonteCarlo::new(cfg.options.moment_samples, child_seed(cfg.master_seed, i as u64));
        let e = expectation_numeric(&cfg.density, h, &s, t, s.rho(), Some(&window), &mc)?;
        let v = variance_numeric(&cfg.density, h, &s, t, s.rho(), Some(&window), &mc)?;
        let params = format!("t={t};rho={};template={};density={}", s.rho(), h.name(), cfg.density.id());
        let ex = e.expectation.expect("expectation set");
        let va = v.variance.expect("variance set");
        writeln!(out, "expectation,{},{},monte_carlo,\"{params}\"", fmt17(ex.value), fmt17(ex.std_error))?;
        writeln!(out, "variance,{},{},monte_carlo,\"{params}\"", fmt17(va.value), fmt17(va.std_error))?;
        for (n, term) in v.variance_terms.iter().enumerate() {
            writeln!(
                out,
                "variance_term_{},{},{},monte_carlo,\"{params}\"",
                n + 1,
                fmt17(term.value),
                fmt17(term.std_error)
            )?;
        }
    }
    if integrability_check(&cfg.density, h.k())? && cfg.density.dim() == cfg.connection(1.0)?.dim() {
        if let Ok(a) = asymptotic_a(
            &cfg.density,
            h,
            &cfg.connection(1.0)?,
            &MonteCarlo::new(cfg.options.moment_samples, cfg.master_seed),
        ) {
            writeln!(out, "a,{},{},monte_carlo,\"template={}\"", fmt17(a.value), fmt17(a.std_error), h.name())?;
        }
    }
    Ok(())
}
