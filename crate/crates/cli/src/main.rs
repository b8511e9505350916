use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use secroute::experiment::{self, ExperimentConfig, RunOutput, Severity, SolverChoice};
use secroute::Error;

/// Secure multi-hop routing experiments.
#[derive(Debug, Parser)]
#[command(name = "secroute", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// CSV destination; stdout when neither this nor the config names one.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Monte Carlo trials per row.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,

    #[arg(long, global = true)]
    solver: Option<SolverArg>,

    #[arg(long, global = true)]
    jam: Option<Toggle>,

    /// Exit with status 2 if any solver stops short of its tolerance.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimum-COP route and closed-form powers for each layout.
    Route,
    /// Jamming powers by polyblock over a jammer-power grid.
    JamOpt,
    /// Jamming powers by multi-start SCA.
    JamSca,
    /// Configured solver followed by Monte Carlo checks.
    Simulate,
    /// Run the `[sweep]` section of the config.
    Sweep,
    /// Check the config and print diagnostics.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Closed,
    Polyblock,
    Sca,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Closed => SolverChoice::Closed,
            SolverArg::Polyblock => SolverChoice::Polyblock,
            SolverArg::Sca => SolverChoice::Sca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NONCONVERGED: u8 = 2;

fn config_error(message: impl Into<String>) -> Error {
    Error::Config { field: "<command line>".into(), message: message.into() }
}

/// Merges the config file, the subcommand and the flags.
fn build_config(cli: &Cli) -> secroute::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    if let Some(s) = cli.solver {
        config.solver.kind = s.into();
    }
    if let Some(j) = cli.jam {
        config.solver.jam = j == Toggle::On;
    }
    config.solver.strict |= cli.strict;

    let forced = match cli.command {
        Command::Route => Some((SolverChoice::Closed, false)),
        Command::JamOpt => Some((SolverChoice::Polyblock, true)),
        Command::JamSca => Some((SolverChoice::Sca, true)),
        _ => None,
    };
    if let Some((kind, jam)) = forced {
        if cli.solver.is_some_and(|s| SolverChoice::from(s) != kind) || cli.jam.is_some_and(|j| (j == Toggle::On) != jam) {
            return Err(config_error("--solver/--jam contradict the subcommand"));
        }
        config.solver.kind = kind;
        config.solver.jam = jam;
        config.sweep = None;
        // Simulation is opt-in for the solver subcommands.
        config.trials = cli.trials.unwrap_or(0);
    } else if let Some(t) = cli.trials {
        config.trials = t;
    }
    match cli.command {
        Command::Simulate => {
            config.sweep = None;
            if config.trials == 0 {
                return Err(config_error("simulate needs a positive trial count"));
            }
        }
        Command::Sweep if config.sweep.is_none() => {
            return Err(Error::Config { field: "sweep".into(), message: "the config has no [sweep] section".into() });
        }
        _ => {}
    }
    Ok(config)
}

fn write_output(config: &ExperimentConfig, output: &RunOutput) -> secroute::Result<()> {
    match &config.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", path.display())))?;
            output.write_csv(BufWriter::new(file))
        }
        None => output.write_csv(io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let diagnostics = experiment::validate(&config);
    for d in &diagnostics {
        eprintln!("{d}");
    }
    if experiment::has_errors(&diagnostics) {
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Command::Validate = cli.command {
        let warnings = diagnostics.iter().filter(|d| d.severity == Severity::Warning).count();
        println!("config ok ({warnings} warnings), hash {:016x}", config.hash());
        return ExitCode::SUCCESS;
    }

    let output = match experiment::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = write_output(&config, &output) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    let _ = io::stdout().flush();
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    if output.failures > 0 {
        eprintln!("{} row(s) failed; see the error column", output.failures);
    }
    if output.nonconverged > 0 {
        eprintln!("{} row(s) did not converge", output.nonconverged);
        if config.solver.strict {
            return ExitCode::from(EXIT_NONCONVERGED);
        }
    }
    ExitCode::SUCCESS
}
