use std::path::PathBuf;
use std::process::ExitCode;

use bogoliubov_cli::{run_stage, CliError, Context, Format, Overrides, RunConfig, Stage};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bogoliubov", version, about = "Bogoliubov limit laws and Fock-space verification")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the verification suite, overriding `verify.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Table format, overriding `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering length and Neumann ground states.
    Scattering,
    /// Per-mode Bogoliubov coefficients.
    Coefficients,
    /// Covariance, characteristic functions and densities of the limit law.
    Limit,
    /// Fock-space identities and bound fits.
    Verify,
    /// Rate and decay sweeps with slope fits.
    Sweep,
    /// Summary table of all stage results in the output directory.
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    Overrides {
        out: cli.out,
        seed: cli.seed,
        format: cli.format,
    }
    .apply(&mut cfg);
    let stage = match cli.command {
        Command::Scattering => Stage::Scattering,
        Command::Coefficients => Stage::Coefficients,
        Command::Limit => Stage::Limit,
        Command::Verify => Stage::Verify,
        Command::Sweep => Stage::Sweep,
        Command::Report => Stage::Report,
    };
    let bundle = run_stage(stage, &cfg, &Context::from_env())?;
    println!(
        "{}: {} checks passed, results in {}",
        bundle.stage,
        bundle.checks.len(),
        cfg.output.dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
