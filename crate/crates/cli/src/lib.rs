//! Command-line front end: runs, V-sweeps, diagnostics and figure
//! reproduction, writing CSV tables and TOML summaries.

mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use timeavg::config::parse_problem_config;
use timeavg::experiments::{self, RunOptions, ScalarKind};
use timeavg::instances::Figure;
use timeavg::{Exact, Scalar, Spec};

pub use output::{figure_table, sweep_table, trace_table, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] timeavg::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("could not write summary: {0}")]
    Summary(#[from] toml::ser::Error),
    #[error("could not write table: {0}")]
    Csv(#[from] csv::Error),
    #[error("acceptance check failed: {0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use timeavg::Error as E;
        match self {
            CliError::Core(E::Numeric { .. } | E::Domain { .. } | E::Estimation { .. } | E::Infeasible(_)) => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Usage(_) => 1,
            CliError::Summary(_) | CliError::Csv(_) => 1,
            CliError::Acceptance(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "timeavg", version, about = "Time-average optimization over finite decision sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One run: trace CSV plus summary.
    Solve(SolveArgs),
    /// Iterations-to-ε over a list of V values, with ε = 1/V.
    Sweep(SweepArgs),
    /// Phase detection, per-step certificates and bounds for one run.
    Diagnose(SolveArgs),
    /// The four sample-problem experiments.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalarArg {
    Auto,
    F64,
    Exact,
}

impl ScalarArg {
    fn kind(self) -> Option<ScalarKind> {
        match self {
            ScalarArg::Auto => None,
            ScalarArg::F64 => Some(ScalarKind::F64),
            ScalarArg::Exact => Some(ScalarKind::Exact),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// TOML problem file.
    #[arg(long, conflicts_with = "figure")]
    pub problem: Option<PathBuf>,
    /// Use the sample problem of figure 2, 3, 4 or 5 instead of a file.
    #[arg(long)]
    pub figure: Option<u8>,
}

impl ProblemArgs {
    fn load(&self) -> CliResult<Spec> {
        match (&self.problem, self.figure) {
            (Some(path), None) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(parse_problem_config(&text)?)
            }
            (None, Some(n)) => Ok(figure(n)?.problem()),
            _ => Err(CliError::Usage("give either --problem FILE or --figure N".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 200_000)]
    pub horizon: usize,
    /// Restart base for staggered averages.
    #[arg(long, default_value_t = 2)]
    pub restart_base: usize,
    #[arg(long)]
    pub no_restarts: bool,
    #[arg(long, value_enum, default_value_t = ScalarArg::Auto)]
    pub scalar: ScalarArg,
    /// Seed for multiplier probes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial w, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub initial_w: Option<Vec<f64>>,
    /// Initial z, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub initial_z: Option<Vec<f64>>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl RunArgs {
    fn options(&self, v: f64) -> RunOptions {
        RunOptions {
            v,
            horizon: self.horizon,
            scalar: self.scalar.kind(),
            restart_base: (!self.no_restarts).then_some(self.restart_base),
            initial_w: self.initial_w.clone(),
            initial_z: self.initial_z.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long = "V", visible_alias = "v", default_value_t = 100.0)]
    pub v: f64,
    /// Keep every k-th iterate in the trace.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long = "V", visible_alias = "v", value_delimiter = ',', default_value = "25,50,100,200")]
    pub v: Vec<f64>,
    /// Optimal value to measure against; defaults to the reference oracle.
    #[arg(long, allow_negative_numbers = true)]
    pub f_opt: Option<f64>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// Figure numbers; all four when omitted.
    #[arg(long, value_delimiter = ',')]
    pub figure: Vec<u8>,
    #[arg(long = "V", visible_alias = "v", default_value_t = 100.0)]
    pub v: f64,
    #[command(flatten)]
    pub run: RunArgs,
}

fn figure(n: u8) -> CliResult<Figure> {
    Figure::from_number(n).ok_or_else(|| CliError::Usage(format!("no figure {n}; choose 2, 3, 4 or 5")))
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; the returned lines are a short report for stdout.
pub fn execute(command: &Command) -> CliResult<Vec<String>> {
    match command {
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Reproduce(args) => reproduce(args),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn solve(args: &SolveArgs) -> CliResult<Vec<String>> {
    let spec = args.problem.load()?;
    let options = args.run.options(args.v);
    match options.scalar_for(&spec) {
        ScalarKind::F64 => solve_with(&spec, &spec, &options, args),
        ScalarKind::Exact => solve_with(&spec.convert::<Exact>(), &spec, &options, args),
    }
}

fn solve_with<S: Scalar>(spec: &timeavg::ProblemSpec<S>, fspec: &Spec, options: &RunOptions, args: &SolveArgs) -> CliResult<Vec<String>> {
    let config = options.solver_config(spec).with_record_every(args.record_every);
    let trace = timeavg::run(spec, &config)?;
    create_dir(&args.run.out)?;
    let trace_path = args.run.out.join("trace.csv");
    write_file(&trace_path, &trace_table(fspec, &trace).to_csv()?)?;
    let summary = output::SolveSummary::new(fspec, &trace, options.scalar_for(spec), options);
    write_file(&args.run.out.join("summary.toml"), &toml::to_string(&summary)?)?;
    Ok(vec![
        format!("iterations: {}", trace.horizon()),
        format!("f(xbar) = {}", summary.f_xbar),
        format!("max g(xbar) = {}", summary.g_xbar.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        format!("trace written to {}", trace_path.display()),
    ])
}

fn sweep(args: &SweepArgs) -> CliResult<Vec<String>> {
    let spec = args.problem.load()?;
    let options = args.run.options(args.v.first().copied().unwrap_or(1.0));
    let f_opt = match args.f_opt {
        Some(f) => f,
        None => experiments::reference_optimum(&spec)?.f_opt,
    };
    let estimate = experiments::estimate_for(&spec, args.run.seed).ok();
    let report = experiments::sweep(&spec, f_opt, &args.v, &options, estimate.as_ref())?;
    create_dir(&args.run.out)?;
    write_file(&args.run.out.join("sweep.csv"), &sweep_table(&report).to_csv()?)?;
    let summary = output::SweepSummary::new(&report, &options);
    write_file(&args.run.out.join("sweep_summary.toml"), &toml::to_string(&summary)?)?;
    let show = |s: Option<f64>| s.map_or("n/a".to_string(), |s| format!("{s:.3}"));
    let mut lines: Vec<String> = report
        .points
        .iter()
        .map(|p| {
            let n = |v: Option<usize>| v.map_or("never".to_string(), |v| v.to_string());
            format!("V = {}: plain {}, staggered {}", p.v, n(p.plain), n(p.staggered))
        })
        .collect();
    lines.push(format!("plain slope {}, staggered slope {}", show(report.plain_slope()), show(report.staggered_slope())));
    Ok(lines)
}

fn diagnose(args: &SolveArgs) -> CliResult<Vec<String>> {
    let spec = args.problem.load()?;
    let options = args.run.options(args.v);
    let report = experiments::diagnose(&spec, &options)?;
    create_dir(&args.run.out)?;
    write_file(
        &args.run.out.join("certificates.csv"),
        &output::certificate_table(&report).to_csv()?,
    )?;
    let summary = output::DiagnoseSummary::new(&report);
    write_file(&args.run.out.join("diagnose.toml"), &toml::to_string(&summary)?)?;
    let mut lines = vec![
        format!("final error {}", report.final_error),
        format!("multiplier {:?} (residual {:e})", report.estimate.lambda_star, report.estimate.residual),
    ];
    if report.estimate.possibly_non_unique {
        lines.push("multiplier possibly non-unique".into());
    }
    match &report.phase {
        Some(p) => lines.push(format!("hit {:?}, absorbed {}", p.hit, p.absorbed)),
        None => lines.push("no convergence radius available".into()),
    }
    for c in &report.invariants.checks {
        lines.push(format!("{}: {}", c.name, if c.passed { "ok" } else { "FAILED" }));
    }
    Ok(lines)
}

fn reproduce(args: &ReproduceArgs) -> CliResult<Vec<String>> {
    let figures: Vec<Figure> = if args.figure.is_empty() {
        Figure::ALL.to_vec()
    } else {
        args.figure.iter().map(|n| figure(*n)).collect::<CliResult<_>>()?
    };
    let options = args.run.options(args.v);
    create_dir(&args.run.out)?;
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for fig in figures {
        let report = experiments::reproduce_figure(fig, &options)?;
        let n = fig.number;
        write_file(&args.run.out.join(format!("figure{n}.csv")), &figure_table(&report).to_csv()?)?;
        let summary = output::FigureSummary::new(&report, options.restart_base);
        write_file(&args.run.out.join(format!("figure{n}.toml")), &toml::to_string(&summary)?)?;
        let last = &report.final_row().plain;
        lines.push(format!(
            "figure {n}: f(xbar) = {} (optimum {}), max g = {}, {}",
            last.f,
            report.f_opt,
            last.max_violation(),
            if report.passed() { "ok" } else { "FAILED" }
        ));
        if !report.passed() {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        Ok(lines)
    } else {
        for line in &lines {
            println!("{line}");
        }
        Err(CliError::Acceptance(format!("figures {failed:?} missed the tolerance")))
    }
}
