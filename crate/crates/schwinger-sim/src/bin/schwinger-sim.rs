//! Thin command-line front end: parse flags, hand off to the library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical/protocol
//! failure, 4 failed self test.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use schwinger_sim::config::{parse_config, ExperimentKind, Overrides};
use schwinger_sim::run::{run, selftest};
use schwinger_sim::Error;

#[derive(Parser)]
#[command(
    name = "schwinger-sim",
    version,
    about = "Simulator for the encoded lattice Schwinger model (exact, Trotterized, and noisy)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Override the configured RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = automatic). Outputs do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact Krylov evolution from the bare vacuum.
    Evolve(RunArgs),
    /// Ideal Trotterized evolution.
    Trotter(RunArgs),
    /// Noisy trajectory ensemble.
    Noise(RunArgs),
    /// Exact evolution tracking entanglement entropy.
    Entropy(RunArgs),
    /// Size-and-spacing sweep with 1/N extrapolation.
    Continuum(RunArgs),
    /// Joint exact / Trotter / noisy table.
    Compare(RunArgs),
    /// Run the built-in identity and oracle checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, expected) = match &cli.command {
        Command::Evolve(a) => (a, ExperimentKind::Evolve),
        Command::Trotter(a) => (a, ExperimentKind::Trotter),
        Command::Noise(a) => (a, ExperimentKind::Noise),
        Command::Entropy(a) => (a, ExperimentKind::Entropy),
        Command::Continuum(a) => (a, ExperimentKind::Continuum),
        Command::Compare(a) => (a, ExperimentKind::Compare),
        Command::Selftest => return run_selftest(),
    };
    match execute(args, expected) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Config(_) | Error::InvalidParameter { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn execute(args: &RunArgs, expected: ExperimentKind) -> Result<(), Error> {
    let overrides = Overrides {
        seed: args.seed,
        out_dir: args.out.clone(),
        threads: args.threads,
    };
    let config = parse_config(&args.config, &overrides)?;
    if config.kind != expected {
        return Err(Error::Config(format!(
            "config kind `{}` does not match the `{}` subcommand",
            config.kind.as_str(),
            expected.as_str()
        )));
    }
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let outcome = run(&config)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {}", outcome.manifest_path.display());
    for p in &outcome.csv_paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run_selftest() -> ExitCode {
    let checks = selftest();
    let mut ok = true;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {} — {}", c.name, c.detail);
        ok &= c.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}
