use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use muband_core::model_spaces::DEFAULT_GRID;

use crate::commands::{self, FamilyArg, ModelRequest, SideArg};
use crate::error::{CliError, CliResult, EXIT_PARSE};
use crate::report::{revalidate, Report};
use crate::scenario::{Format, Scenario};

#[derive(Parser)]
#[command(name = "muband", version, about = "Band width comparison and discrete mu-bubbles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Directory for CSV tables and summary.txt
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long, value_enum, default_value = "spherical")]
    family: FamilyArg,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Left end of the domain
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Right end of the domain
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
}

impl ModelFlags {
    fn request(&self) -> ModelRequest {
        ModelRequest { family: self.family, n: self.n, kappa: self.kappa, sigma: self.sigma, a: self.a, b: self.b }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    scenario: PathBuf,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate phi, h and scal of a model space
    Model {
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Smoothed potential of one model, or the glued potential of a scenario
    Potential {
        scenario: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_enum, default_value = "both")]
        side: SideArg,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Width bounds for given parameters
    Width {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hypotheses, assembly and condition certificate of a partitioned band
    Verify(ScenarioArgs),
    /// Discrete mu-bubble of a warped-1d or grid-2d band
    Bubble(ScenarioArgs),
    /// Width bounds over a parameter grid
    Sweep(ScenarioArgs),
}

fn load(args: &ScenarioArgs) -> CliResult<Scenario> {
    let mut sc = Scenario::load(&args.scenario)?;
    if args.grid.is_some() {
        sc.solver.grid = args.grid;
    }
    if args.eps.is_some() {
        sc.solver.eps = args.eps;
    }
    Ok(sc)
}

/// Writes the bundle when an output directory is known, re-derives the
/// summary from the written tables and prints to stdout.
fn emit(report: &Report, out: &OutputArgs, scenario: Option<&Scenario>, print_table: bool) -> CliResult<()> {
    let dir: Option<PathBuf> = out
        .out
        .clone()
        .or_else(|| scenario.and_then(|s| s.output.dir.clone()));
    let format = out.format.or_else(|| scenario.and_then(|s| s.output.format)).unwrap_or(Format::Csv);
    if let Some(dir) = &dir {
        report.write(dir)?;
        revalidate(Path::new(dir))?;
    }
    if print_table && dir.is_none() {
        if let Some(t) = report.all_tables().first() {
            match format {
                Format::Csv => print!("{}", String::from_utf8_lossy(&t.to_csv()?)),
                Format::Table => print!("{}", t.to_text()),
            }
        }
    } else if format == Format::Table {
        for t in report.all_tables() {
            if t.rows.len() <= 50 {
                println!("{}", t.name);
                print!("{}", t.to_text());
            }
        }
    }
    print!("{}", report.summary_text());
    Ok(())
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Model { model, grid, output } => {
            let r = commands::run_model(&model.request(), grid)?;
            emit(&r, &output, None, true)?;
            Ok(0)
        }
        Command::Potential { scenario: Some(path), grid, eps, output, .. } => {
            let mut sc = Scenario::load(&path)?;
            if grid.is_some() {
                sc.solver.grid = grid;
            }
            if eps.is_some() {
                sc.solver.eps = eps;
            }
            let r = commands::run_potential(&sc)?;
            emit(&r, &output, Some(&sc), false)?;
            Ok(0)
        }
        Command::Potential { scenario: None, model, eps, side, grid, output } => {
            let eps = eps.ok_or_else(|| CliError::Parse("--eps is required without a scenario".into()))?;
            let r = commands::run_smoothed(&model.request(), eps, side, grid.unwrap_or(DEFAULT_GRID))?;
            emit(&r, &output, None, true)?;
            Ok(0)
        }
        Command::Width { n, kappa, sigma, d, output } => {
            let r = commands::run_width(n, kappa, sigma, d)?;
            emit(&r, &output, None, true)?;
            Ok(0)
        }
        Command::Verify(args) => {
            let sc = load(&args)?;
            let (r, code) = commands::run_verify(&sc)?;
            emit(&r, &args.output, Some(&sc), false)?;
            Ok(code)
        }
        Command::Bubble(args) => {
            let sc = load(&args)?;
            let r = commands::run_bubble(&sc)?;
            emit(&r, &args.output, Some(&sc), false)?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let sc = load(&args)?;
            let r = commands::run_sweep(&sc)?;
            emit(&r, &args.output, Some(&sc), true)?;
            Ok(0)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("muband: {e}");
            e.exit_code()
        }
    }
}
