//! `climidx`: climate index, yield prediction and option pricing runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use climidx_core::ingest::{Season, Variable};
use climidx_core::pricing::{DetrendMode, PricingMethod};
use climidx_core::stats::Family;
use climidx_core::synthetic::{SyntheticConfig, DEFAULT_SEED};
use climidx_core::Execution;

use commands::Context;
use config::{ConfigError, ContractConfig, Loaded, Needs, DATA_DIR_ENV};

const EXIT_PARTIAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "climidx",
    version,
    about = "Climate index, crop-yield and weather-derivative pipeline"
)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Default data directory when the config does not set `data.dir`.
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,

    /// Output root; overrides `output.dir`.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; 1 runs sequentially.
    #[arg(short, long, global = true)]
    jobs: Option<usize>,

    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Seasonal CDD/HDD/PRE tables (and optional ACI anomalies) from daily station files.
    Indices,
    /// Cross-validated MAPE for the configured model matrix.
    Predict,
    /// Price call options by burn analysis and index modeling.
    Price(PriceArgs),
    /// Plot-ready CSVs: explained variance, MAPE bars, payoffs and ECDFs.
    Plotdata {
        /// Predict `reports.json` to summarise instead of rerunning the matrix.
        #[arg(long)]
        reports: Option<PathBuf>,
    },
    /// Check the configuration and referenced files, then exit.
    ValidateConfig,
    /// Write a seeded synthetic seasonal/yield panel.
    Synth {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        years: usize,
        #[arg(long, default_value_t = 1961)]
        start_year: i32,
    },
}

#[derive(Debug, Args)]
struct PriceArgs {
    /// Index variable of a single ad-hoc contract (with --region and --season).
    #[arg(long)]
    index: Option<Variable>,
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    season: Option<Season>,
    /// Tick size α.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    method: Option<PricingMethod>,
    /// Comma-separated candidate families for index modeling.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<Family>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    detrend: Option<DetrendMode>,
    /// Simulations per contract.
    #[arg(long)]
    sims: Option<usize>,
}

impl PriceArgs {
    fn apply(&self, loaded: &mut Loaded) -> Result<(), ConfigError> {
        let p = &mut loaded.config.pricing;
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.method {
            p.method = v;
        }
        if let Some(v) = &self.families {
            p.families = v.clone();
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.detrend {
            p.detrend = v;
        }
        if let Some(v) = self.sims {
            p.n_sims = v;
        }
        match (self.index, &self.region, self.season) {
            (None, None, None) => {}
            (Some(index), Some(region), Some(season)) => {
                p.contracts = vec![ContractConfig {
                    name: format!("{index}_{region}_{season}"),
                    index,
                    region: region.clone(),
                    season,
                    alpha: None,
                    years: None,
                }];
                p.comparisons.clear();
            }
            _ => {
                return Err(ConfigError(
                    "--index, --region and --season must be given together".into(),
                ))
            }
        }
        Ok(())
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Indices => "indices",
        Command::Predict => "predict",
        Command::Price(_) => "price",
        Command::Plotdata { .. } => "plotdata",
        Command::ValidateConfig => "validate-config",
        Command::Synth { .. } => "synth",
    }
}

fn configure_pool(jobs: Option<usize>) -> Result<Execution, ConfigError> {
    match jobs {
        Some(0) => Err(ConfigError("--jobs must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| ConfigError(format!("cannot size worker pool: {e}")))?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::Parallel),
    }
}

enum Failure {
    Config(ConfigError),
    Run(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let mut loaded = Loaded::load(cli.config.as_deref(), cli.data_dir.clone())?;
    if let Command::Price(args) = &cli.command {
        args.apply(&mut loaded)?;
    }
    let needs = match &cli.command {
        Command::Indices => Some(Needs::Daily),
        Command::Predict => Some(Needs::SeasonalAndYields),
        Command::Price(_) => Some(Needs::Seasonal),
        Command::Plotdata { reports: Some(_) } => Some(Needs::Seasonal),
        Command::Plotdata { reports: None } => Some(Needs::SeasonalAndYields),
        Command::ValidateConfig => Some(Needs::Everything),
        Command::Synth { .. } => None,
    };
    match needs {
        Some(n) => loaded.validate(n)?,
        None => loaded.validate_settings()?,
    }
    if let Command::ValidateConfig = cli.command {
        println!("config ok (sha256 {})", loaded.hash());
        return Ok(0);
    }

    let execution = configure_pool(cli.jobs)?;
    let out_root = loaded.output_dir(cli.out.as_deref());
    let name = command_name(&cli.command);
    let ctx = Context {
        out_dir: out_root.join(name),
        out_root: out_root.clone(),
        loaded,
        execution,
        jobs: cli.jobs,
        predict_reports: match &cli.command {
            Command::Plotdata { reports } => reports.clone(),
            _ => None,
        },
    };
    let mut written = ctx.out_dir.clone();
    let code = match &cli.command {
        Command::Indices => commands::indices::run(&ctx)?,
        Command::Predict => commands::predict::run(&ctx)?,
        Command::Price(_) => commands::price::run(&ctx)?,
        Command::Plotdata { .. } => commands::plotdata::run(&ctx)?,
        Command::Synth {
            seed,
            years,
            start_year,
        } => {
            let cfg = SyntheticConfig {
                seed: *seed,
                n_years: *years,
                start_year: *start_year,
                ..Default::default()
            };
            if let Some(dir) = &cli.out {
                written = dir.clone();
            }
            commands::synth::run(&ctx, &written, &cfg)?
        }
        Command::ValidateConfig => unreachable!(),
    };
    log::info!("{name}: outputs in {}", written.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}
