//! Command-line interface. Exit codes: 0 success, 1 usage, 2 data error,
//! 3 numeric failure.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mable_core::tilt;
use mable_core::{
    choose_baseline, degree_lower_bound, em_fit, mele_logistic, select_degree, BaselineChoice,
    Degree, EmConfig, QuadratureRule, RegressorSpec, SelectionMode, TwoSampleData,
};

use crate::bootstrap::bootstrap_se;
use crate::input;
use crate::report::{write_atomic, FitReportFile, SweepEntry, SCHEMA_VERSION};
use crate::sim::{run_monte_carlo, SimScenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser)]
#[command(
    name = "mable",
    version,
    about = "Two-sample density-ratio estimation with Bernstein-polynomial baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model to a `value,group` CSV and write a report
    Fit(FitArgs),
    /// Evaluate fitted densities and CDFs from a report onto a grid
    Density(DensityArgs),
    /// Fit, then bootstrap standard errors for the tilt estimate
    Bootstrap(BootstrapArgs),
    /// Run a Monte Carlo benchmark scenario
    Simulate(SimArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Profile,
}

#[derive(Clone, Copy, ValueEnum)]
enum VanishArg {
    Left,
    Right,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Normal,
    Exponential,
}

#[derive(Args, Clone)]
struct FitOptions {
    /// Input CSV with header `value,group`
    #[arg(long)]
    input: PathBuf,
    /// Support [A, B]; defaults to the pooled data range
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    support: Option<Vec<f64>>,
    /// Widen the default support by this amount on each side
    #[arg(long, default_value_t = 0.0)]
    margin: f64,
    /// Candidate degrees as M0:MK (defaults to max(1, mb-5) spanning 25)
    #[arg(long, value_parser = parse_degree_range)]
    degrees: Option<(usize, usize)>,
    /// Fixed Bernstein degree (skips selection)
    #[arg(long, conflicts_with = "degrees")]
    degree: Option<usize>,
    /// Polynomial degree of the regressor r(y)
    #[arg(short = 'd', long = "regressor-degree", default_value_t = 1)]
    regressor_degree: usize,
    /// Degree selection mode
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Inner Newton step tolerance
    #[arg(long, default_value_t = 1e-7)]
    eps1: f64,
    /// Outer loglik increment tolerance per observation
    #[arg(long, default_value_t = 1e-7)]
    eps2: f64,
    #[arg(long, default_value_t = 100)]
    max_newton: usize,
    #[arg(long, default_value_t = 500)]
    max_em: usize,
    /// Force the baseline density to vanish at a support endpoint
    #[arg(long, value_enum)]
    vanish: Option<VanishArg>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    opts: FitOptions,
    /// Report path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// Fit report produced by `fit` or `bootstrap`
    #[arg(long)]
    report: PathBuf,
    #[arg(long, default_value_t = 512)]
    grid_size: usize,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    #[command(flatten)]
    opts: FitOptions,
    /// Number of bootstrap replicates
    #[arg(long = "bootstrap", default_value_t = 1000)]
    b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Shift (normal) or mean (exponential) of the second sample
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long, default_value_t = 50)]
    n0: usize,
    #[arg(long, default_value_t = 50)]
    n1: usize,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Selection mode; defaults to full for normal, profile for exponential
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Candidate degrees as M0:MK
    #[arg(long, value_parser = parse_degree_range)]
    degrees: Option<(usize, usize)>,
    /// Writes PREFIX.csv and PREFIX.txt (stdout when omitted)
    #[arg(long)]
    output_prefix: Option<PathBuf>,
}

fn parse_degree_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected M0:MK")?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad degree `{lo}`"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad degree `{hi}`"))?;
    if hi < lo {
        return Err(format!("empty degree range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

enum CliError {
    Data(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn numeric_err(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Entry point used by `main`; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Density(args) => cmd_density(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

struct FittedModel {
    report: FitReportFile,
    work: TwoSampleData,
    spec: RegressorSpec,
    cfg: EmConfig,
}

fn em_config(opts: &FitOptions) -> EmConfig {
    EmConfig {
        eps1: opts.eps1,
        eps2_rel: opts.eps2,
        max_newton: opts.max_newton,
        max_em: opts.max_em,
        vanish_left: matches!(opts.vanish, Some(VanishArg::Left) | Some(VanishArg::Both)),
        vanish_right: matches!(opts.vanish, Some(VanishArg::Right) | Some(VanishArg::Both)),
    }
}

fn fit_pipeline(opts: &FitOptions) -> Result<FittedModel, CliError> {
    let (y0, y1) = input::read_samples(&opts.input).map_err(data_err)?;
    let (a, b) = match &opts.support {
        Some(v) => (v[0], v[1]),
        None => {
            let lo = y0.iter().chain(&y1).cloned().fold(f64::INFINITY, f64::min);
            let hi = y0.iter().chain(&y1).cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo - opts.margin, hi + opts.margin)
        }
    };
    if !(a < b) {
        return Err(CliError::Data(format!("support must satisfy A < B, got [{a}, {b}]")));
    }
    let spec = RegressorSpec::polynomial(opts.regressor_degree, a, b).map_err(data_err)?;
    let data = TwoSampleData::from_original(&y0, &y1, &spec).map_err(data_err)?;

    let (choice, mb0, mb1) = choose_baseline(&data).map_err(numeric_err)?;
    let swapped = choice == BaselineChoice::Swapped;
    let work = if swapped { data.swapped() } else { data };
    let mele = mele_logistic(&work, &spec).map_err(numeric_err)?;
    let cfg = em_config(opts);

    let mode = match opts.mode {
        ModeArg::Full => SelectionMode::Full,
        ModeArg::Profile => SelectionMode::Profile,
    };
    let (fit, sweep_trace, mode_name) = if let Some(m) = opts.degree {
        let deg = Degree::new(m).map_err(data_err)?;
        let fit = em_fit(&work, deg, &spec, &mele, &cfg).map_err(numeric_err)?;
        (fit, Vec::new(), "fixed".to_string())
    } else {
        let (m0, mk) = opts.degrees.unwrap_or_else(|| {
            let mb = degree_lower_bound(work.x0()).unwrap_or(1);
            let m0 = mb.saturating_sub(5).max(1);
            (m0, m0 + 25)
        });
        let sweep =
            select_degree(&work, m0, mk, &spec, &mele, mode, &cfg).map_err(numeric_err)?;
        let trace: Vec<SweepEntry> = (sweep.m0..)
            .zip(&sweep.logliks)
            .map(|(m, ll)| SweepEntry { m, loglik: *ll })
            .collect();
        let fit = match mode {
            // the profile sweep holds alpha at the MELE; refit the winner
            SelectionMode::Profile => {
                em_fit(&work, sweep.selected_fit().m, &spec, &mele, &cfg).map_err(numeric_err)?
            }
            SelectionMode::Full => sweep.selected_fit().clone(),
        };
        let name = match mode {
            SelectionMode::Full => "full",
            SelectionMode::Profile => "profile",
        };
        (fit, trace, name.to_string())
    };

    let sign = if swapped { -1.0 } else { 1.0 };
    let report = FitReportFile {
        schema_version: SCHEMA_VERSION,
        support: [a, b],
        regressor_degree: opts.regressor_degree,
        m: fit.m.get(),
        mb: [mb0, mb1],
        swapped,
        mode: mode_name,
        alpha: fit.alpha.as_slice().iter().map(|v| sign * v).collect(),
        alpha_se: None,
        p: fit.p.as_slice().to_vec(),
        loglik: fit.loglik,
        constraint_residual: fit.constraint_residual,
        sweep: sweep_trace,
    };
    Ok(FittedModel { report, work, spec, cfg })
}

fn emit(output: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_atomic(path, contents).map_err(|e| io_err(path, e)),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let model = fit_pipeline(&args.opts)?;
    emit(&args.output, &model.report.to_json())
}

fn cmd_bootstrap(args: BootstrapArgs) -> Result<(), CliError> {
    let mut model = fit_pipeline(&args.opts)?;
    let m = Degree::new(model.report.m).map_err(numeric_err)?;
    let boot = bootstrap_se(&model.work, &model.spec, m, args.b, &model.cfg, args.seed)
        .map_err(numeric_err)?;
    model.report.alpha_se = Some(boot.se);
    emit(&args.output, &model.report.to_json())
}

fn cmd_density(args: DensityArgs) -> Result<(), CliError> {
    let raw = std::fs::read_to_string(&args.report).map_err(|e| io_err(&args.report, e))?;
    let report = FitReportFile::from_json(&raw).map_err(data_err)?;
    if args.grid_size < 2 {
        return Err(CliError::Data(format!("grid size must be >= 2, got {}", args.grid_size)));
    }
    let fit = report.to_fit().map_err(data_err)?;
    let [a, b] = report.support;
    let spec =
        RegressorSpec::polynomial(report.regressor_degree, a, b).map_err(data_err)?;
    let rule = QuadratureRule::for_degree(report.m, report.regressor_degree);
    // fit is in working orientation; map original group i to the working one
    let wg = |i: u8| if report.swapped { 1 - i } else { i };

    let mut out = String::from("x,f0,f1,F0,F1\n");
    let n = args.grid_size;
    for k in 0..=n {
        let y = a + (b - a) * k as f64 / n as f64;
        let f0 = tilt::density_original_scale(fit.m, &fit.p, &spec, &fit.alpha, y, wg(0))
            .map_err(numeric_err)?;
        let f1 = tilt::density_original_scale(fit.m, &fit.p, &spec, &fit.alpha, y, wg(1))
            .map_err(numeric_err)?;
        let cf0 = tilt::cdf_original_scale(fit.m, &fit.p, &spec, &fit.alpha, y, wg(0), &rule)
            .map_err(numeric_err)?;
        let cf1 = tilt::cdf_original_scale(fit.m, &fit.p, &spec, &fit.alpha, y, wg(1), &rule)
            .map_err(numeric_err)?;
        out.push_str(&format!("{y:.10},{f0:.10e},{f1:.10e},{cf0:.10e},{cf1:.10e}\n"));
    }
    emit(&args.output, &out)
}

fn cmd_simulate(args: SimArgs) -> Result<(), CliError> {
    if args.mu <= 0.0 && matches!(args.model, ModelArg::Exponential) {
        return Err(CliError::Data(format!(
            "exponential model needs mu > 0, got {}",
            args.mu
        )));
    }
    let mut sc = match args.model {
        ModelArg::Normal => SimScenario::normal(args.mu, args.n0, args.runs, args.seed),
        ModelArg::Exponential => {
            SimScenario::exponential(args.mu, args.n0, args.runs, args.seed)
        }
    };
    sc.n1 = args.n1;
    if let Some(mode) = args.mode {
        sc.mode = match mode {
            ModeArg::Full => SelectionMode::Full,
            ModeArg::Profile => SelectionMode::Profile,
        };
    }
    if let Some((m0, mk)) = args.degrees {
        sc.m0 = m0;
        sc.mk = mk;
    }
    let table = run_monte_carlo(&sc).map_err(numeric_err)?;
    match &args.output_prefix {
        Some(prefix) => {
            let csv_path = prefix.with_extension("csv");
            let txt_path = prefix.with_extension("txt");
            write_atomic(&csv_path, &table.to_csv()).map_err(|e| io_err(&csv_path, e))?;
            write_atomic(&txt_path, &table.to_text()).map_err(|e| io_err(&txt_path, e))?;
            println!("{}", table.to_text());
            Ok(())
        }
        None => {
            println!("{}", table.to_text());
            Ok(())
        }
    }
}
