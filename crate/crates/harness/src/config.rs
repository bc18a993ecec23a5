//! TOML run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use loglp_core::{Params, RadialSymbol, SymbolKind, Table};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::corpus::{default_band, CorpusKind, CorpusSpec, WeightKind};
use crate::error::{HarnessError, Result};
use crate::setup::{Refine, Setup};
use crate::sweep::SweepOptions;

/// The named estimates, in the order `run_all` executes them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Decoupling,
    Recoupling,
    LocalMultiplier,
    Pointwise,
    ForwardWeighted,
    ReverseWeighted,
    WeightedMultiplier,
    MaximalLr,
    LpSweep,
    Bessel,
    KernelStability,
}

impl Experiment {
    /// One per named estimate.
    pub const NAMED: [Experiment; 9] = [
        Experiment::Decoupling,
        Experiment::Recoupling,
        Experiment::LocalMultiplier,
        Experiment::Pointwise,
        Experiment::ForwardWeighted,
        Experiment::ReverseWeighted,
        Experiment::WeightedMultiplier,
        Experiment::MaximalLr,
        Experiment::LpSweep,
    ];

    pub const ALL: [Experiment; 11] = [
        Experiment::Decoupling,
        Experiment::Recoupling,
        Experiment::LocalMultiplier,
        Experiment::Pointwise,
        Experiment::ForwardWeighted,
        Experiment::ReverseWeighted,
        Experiment::WeightedMultiplier,
        Experiment::MaximalLr,
        Experiment::LpSweep,
        Experiment::Bessel,
        Experiment::KernelStability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Decoupling => "decoupling",
            Experiment::Recoupling => "recoupling",
            Experiment::LocalMultiplier => "local_multiplier",
            Experiment::Pointwise => "pointwise",
            Experiment::ForwardWeighted => "forward_weighted",
            Experiment::ReverseWeighted => "reverse_weighted",
            Experiment::WeightedMultiplier => "weighted_multiplier",
            Experiment::MaximalLr => "maximal_lr",
            Experiment::LpSweep => "lp_sweep",
            Experiment::Bessel => "bessel",
            Experiment::KernelStability => "kernel_stability",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub dim: usize,
    pub gamma: f64,
    pub beta: f64,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub r0: Option<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            gamma: 2.0,
            beta: 1.0,
            sigma: None,
            lambda: None,
            r0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    /// Scale step `Δu`; ignored when `scales` is set.
    pub du: Option<f64>,
    /// Number of scales filling the resolvable range.
    pub scales: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 4096, du: None, scales: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub random: usize,
    pub packets: usize,
    pub tones: usize,
    pub chirps: usize,
    /// `(lo, hi)` dyadic band; derived from the grid when absent.
    pub band: Option<(i32, i32)>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            random: 8,
            packets: 4,
            tones: 4,
            chirps: 0,
            band: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolName {
    Model,
    MikhlinLog,
    PowerPhase,
    Constant,
    Tabulated,
}

impl FromStr for SymbolName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "model" => Ok(SymbolName::Model),
            "mikhlin_log" => Ok(SymbolName::MikhlinLog),
            "power_phase" => Ok(SymbolName::PowerPhase),
            "constant" => Ok(SymbolName::Constant),
            "tabulated" => Ok(SymbolName::Tabulated),
            _ => Err(HarnessError::Config(format!("unknown symbol '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolConfig {
    pub kind: SymbolName,
    /// Defaults to `params.gamma`.
    pub gamma: Option<f64>,
    /// Defaults to `params.beta`.
    pub beta: Option<f64>,
    pub alpha: f64,
    /// `[re, im]`: the constant, or `m(0)` for a table that starts above 0.
    pub value: Option<[f64; 2]>,
    /// `R, Re m, Im m` rows.
    pub table: Option<PathBuf>,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self {
            kind: SymbolName::Model,
            gamma: None,
            beta: None,
            alpha: 0.5,
            value: None,
            table: None,
        }
    }
}

impl SymbolConfig {
    pub fn build(&self, params: &Params) -> Result<RadialSymbol<f64>> {
        let gamma = self.gamma.unwrap_or(params.gamma);
        let beta = self.beta.unwrap_or(params.beta);
        let value = self.value.map(|[re, im]| Complex64::new(re, im));
        Ok(match self.kind {
            SymbolName::Model => RadialSymbol::model(gamma, beta)?,
            SymbolName::MikhlinLog => RadialSymbol::mikhlin_log(beta),
            SymbolName::PowerPhase => RadialSymbol::power_phase(self.alpha, beta),
            SymbolName::Constant => RadialSymbol::constant(
                value.ok_or_else(|| HarnessError::Config("constant symbol needs `value`".into()))?,
            ),
            SymbolName::Tabulated => {
                let path = self
                    .table
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("tabulated symbol needs `table`".into()))?;
                let mut text = std::fs::read_to_string(path)?;
                if let Some(v) = value {
                    text = format!("0, {}, {}\n{text}", v.re, v.im);
                }
                RadialSymbol::new(SymbolKind::Tabulated(Table::parse(&text)?))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub kinds: Vec<WeightKind>,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self { kinds: WeightKind::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalConfig {
    pub r: f64,
    pub beta_above: f64,
    pub beta_below: f64,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        Self {
            r: 2.0,
            beta_above: 0.5,
            beta_below: 0.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalConfig {
    /// Annuli probed by `local_multiplier` and `bessel`.
    pub ks: Option<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub refine: bool,
    /// Absent means none.
    #[serde(default)]
    pub experiments: Vec<Experiment>,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub corpus: CorpusConfig,
    pub symbol: SymbolConfig,
    pub weights: WeightsConfig,
    pub maximal: MaximalConfig,
    pub sweep: SweepOptions,
    pub local: LocalConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            refine: false,
            experiments: Experiment::NAMED.to_vec(),
            params: ParamsConfig::default(),
            grid: GridConfig::default(),
            corpus: CorpusConfig::default(),
            symbol: SymbolConfig::default(),
            weights: WeightsConfig::default(),
            maximal: MaximalConfig::default(),
            sweep: SweepOptions::default(),
            local: LocalConfig::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text)?;
        config.params()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> Result<Params> {
        let c = &self.params;
        let mut p = Params::new(c.dim, c.gamma, c.beta)?;
        if let Some(r0) = c.r0 {
            p = p.with_r0(r0)?;
        }
        if let Some(sigma) = c.sigma {
            p = p.with_sigma(sigma)?;
        }
        if let Some(lambda) = c.lambda {
            p = p.with_lambda(lambda)?;
        }
        Ok(p)
    }

    pub fn setup(&self) -> Result<Setup> {
        let params = self.params()?;
        match (self.grid.scales, self.grid.du) {
            (Some(count), _) => Setup::with_count(params, self.grid.n, count),
            (None, Some(du)) => Setup::with_step(params, self.grid.n, du),
            (None, None) => Setup::new(params, self.grid.n),
        }
    }

    pub fn refinement(&self) -> Refine {
        if self.refine {
            Refine::BOTH
        } else {
            Refine::NONE
        }
    }

    pub fn corpus(&self, setup: &Setup) -> Vec<CorpusSpec> {
        let c = &self.corpus;
        let band = c.band.unwrap_or_else(|| default_band(&setup.params, &setup.grid));
        [
            (CorpusKind::RandomBandlimited, c.random),
            (CorpusKind::WavePacket, c.packets),
            (CorpusKind::Tone, c.tones),
            (CorpusKind::ChirpLog, c.chirps),
        ]
        .into_iter()
        .filter(|&(_, count)| count > 0)
        .map(|(kind, count)| CorpusSpec::new(kind, count, band, self.seed))
        .collect()
    }

    pub fn symbol(&self, params: &Params) -> Result<RadialSymbol<f64>> {
        self.symbol.build(params)
    }

    /// `k0 + 4, k0 + 8, k0 + 12`, keeping those the grid resolves.
    pub fn local_ks(&self, setup: &Setup) -> Vec<i32> {
        if let Some(ks) = &self.local.ks {
            return ks.clone();
        }
        let top = (setup.grid.n.trailing_zeros() as i32 - 3).min(setup.params.kmax);
        let k0 = setup.params.k0;
        let ks: Vec<i32> = [k0 + 4, k0 + 8, k0 + 12].into_iter().filter(|&k| k <= top).collect();
        if ks.is_empty() {
            vec![top]
        } else {
            ks
        }
    }
}
