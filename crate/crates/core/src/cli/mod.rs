//! The `bellfeas` command line.
//!
//! Exit codes: 0 on success, 1 on I/O failure, 2 on a malformed or
//! out-of-range scenario or argument, 3 when `required-events` finds no
//! violation (`S <= 2`).

pub mod commands;
pub mod format;
pub mod scenario;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::montecarlo::with_workers;

use commands::MonteCarloOptions;
use format::{Document, OutputFormat};
use scenario::{parse_with_overrides, Scenario};
use sweep::{run_sweep, sweep_document, SweepSpec, SweepVariable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bellfeas",
    version,
    about = "Feasibility calculator for an atom-atom Bell test"
)]
pub struct Cli {
    /// Scenario document (TOML). Defaults to the reference experiment.
    #[arg(long, global = true, value_name = "FILE")]
    pub scenario: Option<PathBuf>,

    /// Override one scenario key, e.g. `--set cycle.fiber_length_m=300`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Output format (sweeps default to csv, everything else to text).
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error budget from atom-photon emission to the heralded atom-atom state.
    Budget,
    /// CHSH value, Delta S and significance for both readout schemes.
    Chsh,
    /// Events needed for a k-sigma violation with the selected readout.
    RequiredEvents,
    /// Required events along one swept parameter.
    Sweep(SweepArgs),
    /// Sampled CHSH experiment compared against the analytic model.
    Montecarlo(MonteCarloArgs),
    /// Repetition rate, measurement time and locality margin.
    Schedule,
    /// Every report above, with the two default sweeps.
    Report(MonteCarloArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `observable_visibility`, `p_d`, or any scalar `section.key`.
    #[arg(long)]
    pub variable: String,
    /// First grid value.
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    /// Last grid value.
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    /// Overrides `montecarlo.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `montecarlo.replicas`.
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Overrides `montecarlo.n_events`; split over the four settings.
    #[arg(long)]
    pub events: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

impl MonteCarloArgs {
    fn options(&self, scenario: &Scenario) -> Result<MonteCarloOptions, Error> {
        let mut opts = MonteCarloOptions::from_scenario(scenario);
        if let Some(s) = self.seed {
            opts.seed = s;
        }
        if let Some(r) = self.replicas {
            opts.replicas = r;
        }
        if let Some(n) = self.events {
            opts.n_events = n;
        }
        if opts.replicas < 2 {
            return Err(Error::Config(format!(
                "--replicas must be at least 2, got {}",
                opts.replicas
            )));
        }
        if opts.n_events < 4 {
            return Err(Error::Config(format!(
                "--events must be at least 4, got {}",
                opts.n_events
            )));
        }
        Ok(opts)
    }
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Model(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario, Failure> {
    let text = match &cli.scenario {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    Ok(parse_with_overrides(&text, &cli.set)?)
}

fn build(cli: &Cli, scenario: &Scenario) -> Result<(Document, OutputFormat), Error> {
    let text = cli.format.unwrap_or(OutputFormat::Text);
    Ok(match &cli.command {
        Command::Budget => (commands::run_budget(scenario)?, text),
        Command::Chsh => (commands::run_chsh(scenario)?, text),
        Command::RequiredEvents => (commands::run_required_events(scenario)?, text),
        Command::Schedule => (commands::run_schedule(scenario)?, text),
        Command::Sweep(args) => {
            let spec = SweepSpec {
                variable: args.variable.parse::<SweepVariable>()?,
                lo: args.from,
                hi: args.to,
                steps: args.steps,
                fixed: scenario.clone(),
            };
            let rows = run_sweep(&spec)?;
            (
                sweep_document(&spec, &rows),
                cli.format.unwrap_or(OutputFormat::Csv),
            )
        }
        Command::Montecarlo(args) => {
            let opts = args.options(scenario)?;
            let doc = with_workers(args.workers, || commands::run_montecarlo(scenario, &opts))?;
            (doc, text)
        }
        Command::Report(args) => {
            let opts = args.options(scenario)?;
            let doc = with_workers(args.workers, || commands::run_report(scenario, &opts))?;
            (doc, text)
        }
    })
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let scenario = load_scenario(cli)?;
    let (doc, format) = build(cli, &scenario)?;
    let rendered = doc.render(format);
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(format!("cannot write to standard output: {e}")))
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::NoViolation { .. } => EXIT_NO_VIOLATION,
                _ => EXIT_INVALID,
            }
        }
    }
}
