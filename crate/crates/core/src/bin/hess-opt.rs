use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hess_core::config::RunConfig;
use hess_core::report::{cmd_density, cmd_simulate, cmd_sweep, ErrorReport};

/// Capacity-split optimizer for two-chemistry battery packs.
#[derive(Parser, Debug)]
#[command(name = "hess-opt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one design and write its totals and per-step trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Chemistry pair as <high-energy>-<high-power>, e.g. nca-nmc.
        #[arg(long)]
        pair: String,
        #[arg(long)]
        gamma: f64,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the capacity split for every configured pair.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Also sweep with an ideal DC-DC converter.
        #[arg(long)]
        lossless_dcdc: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write energy and power density data for every sweep point.
    Density {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("HESS_OPT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| hess_core::Error::Config(format!("HESS_OPT_THREADS must be a positive integer, got `{raw}`")))?;
    if n == 0 {
        return Err(hess_core::Error::Config("HESS_OPT_THREADS must be at least 1".into()).into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    Ok(RunConfig::load(path)?)
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match cli.command {
        Command::Simulate {
            config,
            pair,
            gamma,
            out,
        } => {
            let cfg = load(&config)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            for p in cmd_simulate(&cfg, &pair, gamma, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Sweep {
            config,
            lossless_dcdc,
            out,
        } => {
            let cfg = load(&config)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            for p in cmd_sweep(&cfg, lossless_dcdc, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Density { config, out } => {
            let cfg = load(&config)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            println!("{}", cmd_density(&cfg, &out)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = match err.downcast_ref::<hess_core::Error>() {
                Some(e) => ErrorReport::of(e),
                None => ErrorReport {
                    kind: "internal".into(),
                    message: format!("{err:#}"),
                    exit_code: 3,
                },
            };
            eprintln!("error: {err:#}");
            println!("{}", report.to_json());
            ExitCode::from(report.exit_code as u8)
        }
    }
}
