use std::io::Write;

use loglp_harness::{run_all, Config, Experiment, HarnessError, SymbolName, WeightKind};
use num_complex::Complex64;

#[test]
fn empty_config_gives_empty_bundle() {
    let config = Config::from_toml("").unwrap();
    assert!(config.experiments.is_empty());
    assert!(run_all(&config).unwrap().is_empty());
}

#[test]
fn default_config_names_nine_estimates() {
    let config = Config::default();
    assert_eq!(config.experiments, Experiment::NAMED.to_vec());
    assert_eq!(config.experiments.len(), 9);
    let names: Vec<&str> = config.experiments.iter().map(|e| e.name()).collect();
    assert_eq!(names[0], "decoupling");
    assert_eq!(names[8], "lp_sweep");
}

#[test]
fn full_config_parses() {
    let text = r#"
seed = 12
refine = true
experiments = ["pointwise", "maximal_lr"]

[params]
dim = 2
gamma = 3.0
beta = 0.5
sigma = 2.5
r0 = 20.0

[grid]
n = 2048
du = 0.1

[corpus]
random = 2
packets = 1
tones = 0
chirps = 1
band = [5, 6]

[symbol]
kind = "power_phase"
alpha = 0.25

[weights]
kinds = ["constant", "spike"]

[maximal]
r = 3.0
beta_above = 1.5
beta_below = 0.1

[sweep]
betas = [0.0, 1.0]
ps = [3.0]
ceiling = 5
n = 1024

[local]
ks = [6, 7]
"#;
    let c = Config::from_toml(text).unwrap();
    assert_eq!(c.seed, 12);
    assert!(c.refine);
    assert_eq!(c.experiments, vec![Experiment::Pointwise, Experiment::MaximalLr]);
    let p = c.params().unwrap();
    assert_eq!((p.dim, p.gamma, p.beta, p.sigma), (2, 3.0, 0.5, 2.5));
    assert_eq!(p.lambda, 2.5);
    assert_eq!(p.k0, 5);
    assert_eq!(c.symbol.kind, SymbolName::PowerPhase);
    assert_eq!(c.weights.kinds, vec![WeightKind::Constant, WeightKind::Spike]);
    assert_eq!(c.sweep.ps, vec![3.0]);
    assert_eq!(c.sweep.iterations, 40);
    let setup = c.setup().unwrap();
    assert_eq!(setup.grid.n, 2048);
    assert!((setup.scales.du - 0.1).abs() < 1e-12);
    let corpus = c.corpus(&setup);
    assert_eq!(corpus.len(), 3);
    assert!(corpus.iter().all(|s| s.band == (5, 6) && s.seed == 12));
    assert_eq!(c.local_ks(&setup), vec![6, 7]);
}

#[test]
fn malformed_configs_are_rejected() {
    assert!(matches!(Config::from_toml("bogus = 1"), Err(HarnessError::Toml(_))));
    assert!(matches!(Config::from_toml("[params]\ngamma = 0.5"), Err(HarnessError::Core(_))));
    assert!(matches!(Config::from_toml("experiments = [\"nope\"]"), Err(HarnessError::Toml(_))));
    assert!("nope".parse::<Experiment>().is_err());
    assert_eq!("weighted-multiplier".parse::<Experiment>().unwrap(), Experiment::WeightedMultiplier);
}

#[test]
fn symbols_build_from_config() {
    let c = Config::default();
    let p = c.params().unwrap();
    let model = c.symbol(&p).unwrap();
    let r = 1.0e6f64;
    let l = (std::f64::consts::E + r).ln();
    let expect = Complex64::from_polar(l.powf(-1.0), l.powi(2));
    assert!((model.eval(r) - expect).norm() < 1e-12);

    let mut c2 = c.clone();
    c2.symbol.kind = SymbolName::Constant;
    assert!(matches!(c2.symbol(&p), Err(HarnessError::Config(_))));
    c2.symbol.value = Some([0.0, 1.0]);
    assert_eq!(c2.symbol(&p).unwrap().eval(5.0), Complex64::new(0.0, 1.0));
}

#[test]
fn tabulated_symbols_need_a_value_at_zero() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# R, Re m, Im m\n1, 0.5, 0\n3, 0.25, 0.5").unwrap();
    let mut c = Config::default();
    c.symbol.kind = SymbolName::Tabulated;
    let p = c.params().unwrap();
    assert!(matches!(c.symbol(&p), Err(HarnessError::Config(_))));
    c.symbol.table = Some(file.path().to_path_buf());
    assert!(c.symbol(&p).is_err());
    c.symbol.value = Some([1.0, 0.0]);
    let m = c.symbol(&p).unwrap();
    assert_eq!(m.eval(0.0), Complex64::new(1.0, 0.0));
    assert!((m.eval(1.0) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    assert!((m.eval(10.0) - Complex64::new(0.25, 0.5)).norm() < 1e-12);
}
