use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use bvdual::json::Precision;
use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "bvdual",
    version,
    about = "Expectation values and Fourier duality of free observables on flat tori"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Mode cutoff: keep Fourier modes with |k|^2 <= LAMBDA
    #[arg(long)]
    pub lambda: Option<u32>,
    /// Action cutoff for the sum over topological sectors
    #[arg(long = "lattice-cutoff")]
    pub lattice_cutoff: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on worker threads used by the engines
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expectation value of an observable
    Expect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        observable: PathBuf,
        /// diagrams, isserlis, montecarlo or lattice
        #[arg(long)]
        method: Option<String>,
    },
    /// Fourier dual of an observable, written with the dual theory
    Dualize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        observable: PathBuf,
        /// Apply the inverse transform (input lives in the dual theory)
        #[arg(long)]
        inverse: bool,
        /// Round coefficients to 12 significant digits of the largest one
        /// instead of writing full binary64 precision
        #[arg(long)]
        canonical: bool,
    },
    /// Run a verification suite, or `all`
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
        /// Include wall-clock runtimes in the report
        #[arg(long)]
        timings: bool,
    },
}

fn merged_config(common: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.lambda = common.lambda.or(cfg.lambda);
    cfg.lattice_cutoff = common.lattice_cutoff.or(cfg.lattice_cutoff);
    cfg.seed = common.seed.or(cfg.seed);
    cfg.threads = common.threads.or(cfg.threads);
    cfg.out = common.out.clone().or(cfg.out);
    cfg.validate()?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Expect {
            common,
            observable,
            method,
        } => {
            let mut cfg = merged_config(&common)?;
            cfg.method = method.or(cfg.method);
            let record = commands::expect(&cfg, &observable)?;
            commands::emit(&cfg.out, &bvdual::json::to_canonical_string(&record)?)?;
            Ok(0)
        }
        Command::Dualize {
            common,
            observable,
            inverse,
            canonical,
        } => {
            let cfg = merged_config(&common)?;
            let precision = if canonical {
                Precision::Canonical
            } else {
                Precision::Full
            };
            let dual = commands::dualize(&cfg, &observable, inverse, precision)?;
            commands::emit(&cfg.out, &bvdual::json::to_canonical_string(&dual)?)?;
            Ok(0)
        }
        Command::Verify {
            suite,
            common,
            timings,
        } => {
            let cfg = merged_config(&common)?;
            commands::verify(&cfg, &suite, timings)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ADL_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let err = CliError::usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code as u8);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code as u8)
        }
    }
}
