use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rsma_cli::{config_hash, load_config, run, CliError, Experiment, ModeChoice, Overrides};

#[derive(Parser)]
#[command(
    name = "rsma-aoii",
    version,
    about = "AoII-aware RSMA/SDMA scheduling experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scheduled users versus required rate on the geometric channel pair.
    SweepUsers(RunArgs),
    /// Paired Monte Carlo over Rayleigh realizations.
    MonteCarlo(RunArgs),
    /// Closed-loop multi-slot run.
    Trajectory(RunArgs),
    /// Parse and validate a config, printing its hash.
    ValidateConfig(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Replace the config's seed.
    #[arg(long)]
    seed_override: Option<u64>,
    /// Replace the config's mode list.
    #[arg(long, value_enum)]
    mode: Option<ModeChoice>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed_override,
            mode: self.mode,
        }
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    let (experiment, args) = match command {
        Command::ValidateConfig(args) => {
            let cfg = load_config(&args.config, args.overrides())?;
            println!("ok config_hash={} seed={}", config_hash(&cfg)?, cfg.seed);
            return Ok(0);
        }
        Command::SweepUsers(args) => (Experiment::SweepUsers, args),
        Command::MonteCarlo(args) => (Experiment::MonteCarlo, args),
        Command::Trajectory(args) => (Experiment::Trajectory, args),
    };
    let cfg = load_config(&args.config.config, args.config.overrides())?;
    if args.jobs == Some(0) {
        return Err(CliError::Config("--jobs must be >= 1".into()));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| {
        CliError::Config(format!(
            "cannot start {} worker threads: {e}",
            args.jobs.unwrap_or(0)
        ))
    })?;
    let report = pool.install(|| run(experiment, &cfg, &args.out))?;
    for path in &report.outputs {
        println!("wrote {}", path.display());
    }
    if report.num_failed > 0 {
        eprintln!(
            "{} of {} rows failed; see the error column",
            report.num_failed, report.num_rows
        );
        return Ok(2);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage problems count as configuration errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
