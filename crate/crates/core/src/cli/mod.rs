//! `swipt` command-line front end.

pub mod output;
mod validate;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::design_io::read_design;
use crate::error::Error;
use crate::optimizer::{
    optimize, sweep_region, uniform_rate_grid, OptimizationConfig, OptimizeStatus, SweepOptions, SweepPoint, Variant,
};
use crate::oracle::{monte_carlo_zdc, OracleConfig};
use crate::scenario::{load_scenario, Scenario};
use output::{CsvRow, Curve, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_MAX_ITERATIONS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "swipt",
    version,
    about = "Rate-energy waveform design for a nonlinear rectenna"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Scenario file; the built-in reference link when omitted.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Relative convergence threshold of the successive approximation.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Iteration cap of the successive approximation.
    #[arg(long, global = true)]
    pub imax: Option<usize>,
    /// Minimum rate in bits per OFDM symbol.
    #[arg(long = "rate-floor", global = true)]
    pub rate_floor: Option<f64>,
    /// Number of rate points of a sweep.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Optimize the OFDM-only waveform; for `sweep`, also emit it as a comparison curve.
    #[arg(long = "wit-only", global = true)]
    pub wit_only: bool,
    /// Report rates in bits per tone.
    #[arg(long = "normalize-rate", global = true)]
    pub normalize_rate: bool,
    /// Hold the power-splitting ratio at this value.
    #[arg(long = "freeze-rho", global = true)]
    pub freeze_rho: Option<f64>,
    /// Solve sweep points independently in parallel.
    #[arg(long, global = true)]
    pub parallel: bool,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Optimize one design at the given rate floor.
    Optimize,
    /// Trace the rate-energy boundary.
    Sweep,
    /// Check a design's analytic output against a time-domain simulation.
    Oracle {
        /// Design file, standalone or an `optimize` result.
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        symbols: usize,
    },
    /// Run the invariant battery on the scenario.
    Validate,
}

impl Verb {
    fn name(&self) -> &'static str {
        match self {
            Verb::Optimize => "optimize",
            Verb::Sweep => "sweep",
            Verb::Oracle { .. } => "oracle",
            Verb::Validate => "validate",
        }
    }
}

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::RateInfeasible { .. } => EXIT_INFEASIBLE,
            Error::InvalidScenario(_) | Error::Schema { .. } | Error::Design(_) | Error::ShapeMismatch { .. } => {
                EXIT_USAGE
            }
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the verb and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn overrides(cli: &Cli) -> BTreeMap<String, String> {
    let g = &cli.global;
    let mut o = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            o.insert(k.to_string(), v);
        }
    };
    put("epsilon", g.epsilon.map(|v| v.to_string()));
    put("imax", g.imax.map(|v| v.to_string()));
    put("rate_floor", g.rate_floor.map(|v| v.to_string()));
    put("grid", g.grid.map(|v| v.to_string()));
    put("freeze_rho", g.freeze_rho.map(|v| v.to_string()));
    put("wit_only", g.wit_only.then(|| "true".into()));
    put("normalize_rate", g.normalize_rate.then(|| "true".into()));
    put("parallel", g.parallel.then(|| "true".into()));
    if let Verb::Oracle { design, symbols } = &cli.verb {
        put("design", Some(design.display().to_string()));
        put("symbols", Some(symbols.to_string()));
    }
    o
}

fn load(g: &GlobalArgs) -> CliResult<(Scenario, String)> {
    match &g.scenario {
        None => Ok((Scenario::reference(), "<reference>".into())),
        Some(p) => {
            let s = load_scenario(p).map_err(|e| match e {
                Error::Io(io) => CliError::usage(format!("cannot read scenario {}: {io}", p.display())),
                other => CliError::from(other),
            })?;
            Ok((s, p.display().to_string()))
        }
    }
}

fn config(g: &GlobalArgs) -> CliResult<OptimizationConfig> {
    let mut cfg = OptimizationConfig::default();
    if let Some(e) = g.epsilon {
        if !(e > 0.0) {
            return Err(CliError::usage(format!("--epsilon {e} must be > 0")));
        }
        cfg.epsilon = e;
    }
    if let Some(i) = g.imax {
        if i == 0 {
            return Err(CliError::usage("--imax must be >= 1"));
        }
        cfg.i_max = i;
    }
    if let Some(r) = g.rate_floor {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(CliError::usage(format!("--rate-floor {r} must be finite and >= 0")));
        }
        cfg.rate_floor = r;
    }
    if g.wit_only {
        cfg.variant = Variant::WIT_ONLY;
    }
    if let Some(rho) = g.freeze_rho {
        if !(0.0..=1.0).contains(&rho) || rho == 0.0 {
            return Err(CliError::usage(format!("--freeze-rho {rho} must lie in (0, 1]")));
        }
        cfg.variant = cfg.variant.with_fixed_rho(rho);
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<i32> {
    let g = &cli.global;
    let (scenario, scenario_name) = load(g)?;
    let cfg = config(g)?;
    let manifest = RunManifest::new(scenario_name, cli.verb.name(), overrides(cli), g.seed);
    std::fs::create_dir_all(&g.out)?;
    std::fs::write(g.out.join("manifest.toml"), manifest.to_toml())?;
    match &cli.verb {
        Verb::Optimize => cmd_optimize(g, &scenario, &cfg, &manifest),
        Verb::Sweep => cmd_sweep(g, &scenario, &cfg, &manifest),
        Verb::Oracle { design, symbols } => cmd_oracle(g, &scenario, design, *symbols, &manifest),
        Verb::Validate => Ok(validate::cmd_validate(&scenario, g.seed)?),
    }
}

fn status_code(status: OptimizeStatus) -> i32 {
    match status {
        OptimizeStatus::Converged => EXIT_OK,
        OptimizeStatus::MaxIterations | OptimizeStatus::SolverStalled => EXIT_MAX_ITERATIONS,
    }
}

fn cmd_optimize(g: &GlobalArgs, s: &Scenario, cfg: &OptimizationConfig, manifest: &RunManifest) -> CliResult<i32> {
    let inst = s.instance()?;
    let out = optimize(&inst, cfg)?;
    std::fs::write(
        g.out.join("optimize.toml"),
        output::optimize_result_toml(manifest, &out),
    )?;
    let n = s.num_tones() as f64;
    println!(
        "z_DC = {:.6e}  rate = {:.6} bits ({:.6} bits/tone)  rho = {:.6}  iterations = {}  status = {}",
        out.zdc,
        out.rate,
        out.rate / n,
        out.design.rho,
        out.iterations,
        output::status_label(out.status)
    );
    Ok(status_code(out.status))
}

fn sweep_rows(
    inst: &crate::optimizer::Instance,
    cfg: &OptimizationConfig,
    grid: &[f64],
    opts: &SweepOptions,
    normalize: bool,
) -> (Vec<CsvRow>, Vec<SweepPoint>, i32) {
    let n = inst.num_tones();
    match sweep_region(inst, cfg, grid, opts) {
        Ok(pts) => {
            let code = pts
                .iter()
                .map(|p| status_code(p.result.status))
                .max()
                .unwrap_or(EXIT_OK);
            (
                pts.iter().map(|p| CsvRow::from_point(p, normalize)).collect(),
                pts,
                code,
            )
        }
        // fall back to point-by-point so one failure does not lose the region
        Err(_) => {
            let mut rows = Vec::new();
            let mut pts = Vec::new();
            let mut code = EXIT_OK;
            for &r in grid {
                match sweep_region(inst, cfg, &[r], opts) {
                    Ok(mut p) => {
                        let p = p.remove(0);
                        code = code.max(status_code(p.result.status));
                        rows.push(CsvRow::from_point(&p, normalize));
                        pts.push(p);
                    }
                    Err(e) => {
                        code = code.max(EXIT_MAX_ITERATIONS);
                        rows.push(CsvRow::failed(r, n, normalize, &e.to_string()));
                    }
                }
            }
            (rows, pts, code)
        }
    }
}

fn cmd_sweep(g: &GlobalArgs, s: &Scenario, cfg: &OptimizationConfig, manifest: &RunManifest) -> CliResult<i32> {
    let inst = s.instance()?;
    let points = g.grid.unwrap_or(20);
    if points == 0 {
        return Err(CliError::usage("--grid must be >= 1"));
    }
    let opts = SweepOptions {
        warm_start: !g.parallel,
        parallel: g.parallel,
    };
    // the main curve is the superposed design unless only OFDM was requested via the variant
    let main_cfg = OptimizationConfig {
        variant: match g.freeze_rho {
            Some(rho) => Variant::SUPERPOSED.with_fixed_rho(rho),
            None => Variant::SUPERPOSED,
        },
        ..cfg.clone()
    };
    let grid = uniform_rate_grid(&inst, &main_cfg, points)?;
    let (rows, pts, mut code) = sweep_rows(&inst, &main_cfg, &grid, &opts, g.normalize_rate);
    output::write_region_csv(&g.out.join("sweep.csv"), manifest, &rows)?;

    let n = s.num_tones() as f64;
    let scale = if g.normalize_rate { 1.0 / n } else { 1.0 };
    let to_curve = |pts: &[SweepPoint]| -> Vec<(f64, f64)> {
        pts.iter().map(|p| (p.point().rate * scale, p.point().zdc)).collect()
    };
    let mut curves = vec![Curve {
        label: "multisine + OFDM",
        color: "#1f77b4",
        points: to_curve(&pts),
    }];
    if g.wit_only {
        let (wit_rows, wit_pts, wit_code) = sweep_rows(&inst, cfg, &grid, &opts, g.normalize_rate);
        output::write_region_csv(&g.out.join("sweep_wit_only.csv"), manifest, &wit_rows)?;
        code = code.max(wit_code);
        curves.push(Curve {
            label: "OFDM only",
            color: "#d62728",
            points: to_curve(&wit_pts),
        });
    }
    let unit = if g.normalize_rate { "bits/tone" } else { "bits/symbol" };
    std::fs::write(g.out.join("sweep.svg"), output::region_svg(manifest, &curves, unit))?;
    for r in &rows {
        println!(
            "{:>12.6} {:>14.6e} {:>8.5} {:>4} {}",
            r.rate_bits.unwrap_or(f64::NAN),
            r.zdc.unwrap_or(f64::NAN),
            r.rho.unwrap_or(f64::NAN),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            r.status
        );
    }
    Ok(code)
}

fn cmd_oracle(
    g: &GlobalArgs,
    s: &Scenario,
    design_path: &PathBuf,
    symbols: usize,
    manifest: &RunManifest,
) -> CliResult<i32> {
    let design = read_design(design_path).map_err(|e| match e {
        Error::Io(io) => CliError::usage(format!("cannot read design {}: {io}", design_path.display())),
        other => other.into(),
    })?;
    if design.shape() != (s.num_tones(), s.num_antennas()) {
        return Err(CliError::usage(format!(
            "design is {}x{} but the scenario has N = {}, M = {}",
            design.shape().0,
            design.shape().1,
            s.num_tones(),
            s.num_antennas()
        )));
    }
    let cfg = OracleConfig::new(symbols, g.seed);
    let report = monte_carlo_zdc(&design, &s.taps, &s.geometry, &s.grid, &s.rect, &cfg)?;
    std::fs::write(g.out.join("oracle.toml"), output::oracle_report_toml(manifest, &report))?;
    let pass = report.agrees(3.0);
    println!(
        "analytic {:.9e}  monte-carlo {:.9e} ± {:.3e}  ({} symbols)  {}",
        report.analytic,
        report.estimate.mean,
        report.estimate.std_error,
        report.num_symbols,
        if pass { "PASS (3σ)" } else { "FAIL (3σ)" }
    );
    Ok(if pass { EXIT_OK } else { EXIT_FAILURE })
}
