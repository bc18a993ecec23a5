use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use loglp_core::{CellRecord, Partition, SobolevOptions};
use loglp_harness::{
    lp_sweep, run_all, run_experiment, verify_miyachi, verify_partition, write_bundle, Config, Experiment,
    HarnessError, OutputFormat, Report, SymbolName, PREFLIGHT_SAMPLES,
};

#[derive(Parser)]
#[command(name = "loglp", version, about = "Log-subdyadic Littlewood–Paley verification harness")]
struct Cli {
    /// TOML configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for the report bundle.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Also run at half the scale step and twice the grid size.
    #[arg(long, global = true)]
    refine: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check the partition identity and emit the cell inventory.
    Partition,
    /// Run one named estimate.
    Verify {
        /// decoupling, recoupling, local_multiplier, pointwise, forward_weighted,
        /// reverse_weighted, weighted_multiplier, maximal_lr, lp_sweep, bessel,
        /// kernel_stability
        name: String,
    },
    /// L^p growth-factor sweep over the configured β grid.
    SweepLp,
    /// Pointwise and localized Miyachi quantities of a symbol.
    Miyachi {
        /// model, mikhlin_log, power_phase, constant or tabulated
        symbol: String,
    },
    /// Partition preflight, then every configured experiment.
    RunAll,
}

fn is_config_error(e: &HarnessError) -> bool {
    matches!(
        e,
        HarnessError::Config(_) | HarnessError::Toml(_) | HarnessError::Band { .. } | HarnessError::Core(_)
    )
}

fn load(cli: &Cli) -> Result<Config, HarnessError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.refine |= cli.refine;
    Ok(config)
}

fn write_cells(config: &Config, dir: &Path) -> Result<PathBuf, HarnessError> {
    let setup = config.setup()?;
    let partition = Partition::new(setup.params);
    std::fs::create_dir_all(dir)?;
    let path = dir.join("cells.csv");
    let mut w = csv::Writer::from_path(&path)?;
    for k in setup.params.k0..=setup.params.kmax {
        for cell in partition.enumerate_cells(k)? {
            w.serialize(CellRecord::from(&cell))?;
        }
    }
    w.flush()?;
    Ok(path)
}

fn execute(cli: &Cli, config: &Config) -> Result<Vec<Report>, HarnessError> {
    match &cli.command {
        Command::Partition => {
            let report = verify_partition(&config.setup()?, PREFLIGHT_SAMPLES, config.seed)?;
            if let Some(dir) = &cli.out {
                write_cells(config, dir)?;
            }
            Ok(vec![report])
        }
        Command::Verify { name } => Ok(vec![run_experiment(config, name.parse::<Experiment>()?)?]),
        Command::SweepLp => {
            let params = config.params()?;
            let gamma = config.symbol.gamma.unwrap_or(params.gamma);
            Ok(vec![lp_sweep(&params, gamma, &config.sweep, config.seed)?])
        }
        Command::Miyachi { symbol } => {
            let params = config.params()?;
            let mut spec = config.symbol.clone();
            spec.kind = symbol.parse::<SymbolName>()?;
            let symbol = spec.build(&params)?;
            let opts = SobolevOptions { seed: config.seed, ..SobolevOptions::for_dim(params.dim) };
            Ok(vec![verify_miyachi(&symbol, &params, &opts)?])
        }
        Command::RunAll => run_all(config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let reports = match execute(&cli, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_config_error(&e) { 2 } else { 1 });
        }
    };
    for r in &reports {
        println!("{}", r.summary_line());
    }
    if let Some(dir) = &cli.out {
        let format = match cli.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
        if let Err(e) = write_bundle(&reports, dir, format) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let failed: Vec<&Report> = reports.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        let checks: Vec<String> = r.failed_checks().iter().map(|c| c.name.clone()).collect();
        eprintln!("failed: {} ({})", r.name, checks.join(", "));
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
