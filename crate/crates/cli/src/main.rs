use std::path::PathBuf;
use std::process::ExitCode;

use alphadyn_cli::{cmd_check, cmd_evolve, cmd_repro, cmd_reversals, cmd_spectrum, exit_code, Format, RunConfig, Sink};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alphadyn", version, about = "Spectra, criteria and noisy evolution of a spherical α² dynamo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (`key = value` lines under [section] headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps and bundled runs.
    #[arg(long, env = "ALPHADYN_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// C* sweep of the spectrum with exceptional points.
    Spectrum(Common),
    /// Anti-dynamo, imaginary-part and finiteness criteria.
    Check(Common),
    /// Nonlinear time evolution.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Re-analyse an existing timeseries.csv in --out instead of simulating.
        #[arg(long)]
        replot: bool,
    },
    /// Evolution followed by reversal detection and stacking.
    Reversals {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        replot: bool,
    },
    /// Runs the bundled reference configurations.
    Repro {
        #[command(flatten)]
        common: Common,
        /// Only runs whose name contains this string.
        #[arg(long)]
        only: Option<String>,
        /// Lists the bundled runs and exits.
        #[arg(long)]
        list: bool,
    },
}

fn setup(c: &Common) -> alphadyn::Result<(RunConfig, Sink)> {
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(alphadyn::Error::InvalidInput("--threads must be >= 1".into()));
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.evolve.seed = s;
    }
    Ok((cfg, Sink::new(&c.out, c.format)?))
}

fn run(cli: Cli) -> alphadyn::Result<()> {
    let summary = match &cli.command {
        Command::Spectrum(c) => {
            let (cfg, sink) = setup(c)?;
            cmd_spectrum(&cfg.spectrum, &sink)?
        }
        Command::Check(c) => {
            let (cfg, sink) = setup(c)?;
            cmd_check(&cfg.check, &sink)?
        }
        Command::Evolve { common, replot } => {
            let (cfg, sink) = setup(common)?;
            cmd_evolve(&cfg.evolve, &sink, *replot)?
        }
        Command::Reversals { common, replot } => {
            let (cfg, sink) = setup(common)?;
            cmd_reversals(&cfg, &sink, *replot)?
        }
        Command::Repro { common, only, list } => {
            if *list {
                for e in alphadyn_cli::repro_entries() {
                    println!("{}", e.name);
                }
                return Ok(());
            }
            let (_, sink) = setup(common)?;
            cmd_repro(&sink, only.as_deref(), common.seed)?
        }
    };
    print!("{}", summary.to_text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
