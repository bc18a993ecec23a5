//! Corpus generation, end-to-end verification of the log-subdyadic
//! Littlewood–Paley estimates, and report bundles.
//!
//! ```no_run
//! use loglp_harness::{run_all, Config};
//!
//! let reports = run_all(&Config::default()).unwrap();
//! for r in &reports {
//!     println!("{}", r.summary_line());
//! }
//! ```

pub mod config;
pub mod corpus;
pub mod error;
pub mod report;
pub mod setup;
pub mod sweep;
pub mod verify;

pub use config::{Config, Experiment, SymbolName};
pub use corpus::{gen_corpus, gen_weights, CorpusKind, CorpusSpec, Member, Weight, WeightKind};
pub use error::{HarnessError, Result};
pub use report::{write_bundle, Check, OutputFormat, Record, Report};
pub use setup::{Refine, Setup};
pub use sweep::{estimate_norm, lp_sweep, SweepOptions};
pub use verify::{
    cell_count_exponent, verify_bessel, verify_decoupling, verify_forward_weighted, verify_kernel_stability,
    verify_local_multiplier, verify_maximal_lr, verify_miyachi, verify_partition, verify_pointwise,
    verify_recoupling, verify_reverse_weighted, verify_weighted_multiplier,
};

/// Frequencies sampled by the partition preflight.
pub const PREFLIGHT_SAMPLES: usize = 10_000;

/// Run one experiment as configured.
pub fn run_experiment(config: &Config, experiment: Experiment) -> Result<Report> {
    let setup = config.setup()?;
    let corpus = config.corpus(&setup);
    let refine = config.refinement();
    let seed = config.seed;
    let weights = &config.weights.kinds;
    match experiment {
        Experiment::Decoupling => verify_decoupling(&setup, &corpus, refine),
        Experiment::Recoupling => verify_recoupling(&setup, &corpus, refine),
        Experiment::LocalMultiplier => {
            let symbol = config.symbol(&setup.params)?;
            verify_local_multiplier(&setup, &corpus, &symbol, &config.local_ks(&setup), refine)
        }
        Experiment::Pointwise => {
            let symbol = config.symbol(&setup.params)?;
            verify_pointwise(&setup, &corpus, &symbol, refine)
        }
        Experiment::ForwardWeighted => verify_forward_weighted(&setup, &corpus, weights, seed, refine),
        Experiment::ReverseWeighted => verify_reverse_weighted(&setup, &corpus, weights, seed, refine),
        Experiment::WeightedMultiplier => {
            let symbol = config.symbol(&setup.params)?;
            verify_weighted_multiplier(&setup, &corpus, weights, seed, &symbol, refine)
        }
        Experiment::MaximalLr => {
            let m = &config.maximal;
            verify_maximal_lr(&setup, weights, seed, m.r, m.beta_above, m.beta_below, refine)
        }
        Experiment::LpSweep => {
            let gamma = config.symbol.gamma.unwrap_or(setup.params.gamma);
            lp_sweep(&setup.params, gamma, &config.sweep, seed)
        }
        Experiment::Bessel => verify_bessel(&setup, &config.local_ks(&setup), 4, seed),
        Experiment::KernelStability => verify_kernel_stability(&setup, &[1.5, 2.0, 4.0]),
    }
}

/// Partition preflight, then the configured experiments in dependency order.
/// A failed preflight is returned alone.
pub fn run_all(config: &Config) -> Result<Vec<Report>> {
    let mut experiments = config.experiments.clone();
    if experiments.is_empty() {
        return Ok(Vec::new());
    }
    experiments.sort();
    experiments.dedup();
    let preflight = verify_partition(&config.setup()?, PREFLIGHT_SAMPLES, config.seed)?;
    if !preflight.passed {
        return Ok(vec![preflight]);
    }
    experiments.into_iter().map(|e| run_experiment(config, e)).collect()
}
