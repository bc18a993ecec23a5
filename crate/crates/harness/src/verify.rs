//! End-to-end checks of the named estimates. Each returns a [`Report`] whose
//! constant is the corpus max of the per-member ratios.

use std::collections::BTreeMap;
use std::f64::consts::E;

use loglp_core::{
    canonical_balls, hi_projection, hl_maximal, kernel_conv_stability, log_maximal, rhs_weight, Ball,
    Partition, RadialSymbol, RealField64, RobustKernel, SobolevOptions, Spectral64, SquareFunctions,
    SymbolKind, TorusGrid,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{describe, gen_corpora, gen_weights, CorpusSpec, Weight, WeightKind};
use crate::error::{HarnessError, Result};
use crate::report::{pointwise_ratio, relative_drift, Record, Report, DRIFT_TOLERANCE};
use crate::setup::{with_refinements, Refine, Setup};

fn energy(f: &Spectral64) -> RealField64 {
    f.inverse().abs_sq()
}

fn weighted_integral(a: &RealField64, w: &RealField64) -> f64 {
    a.values().iter().zip(w.values()).map(|(x, y)| x * y).sum::<f64>() * a.grid().cell_volume::<f64>()
}

fn nonzero(f: &Spectral64) -> bool {
    f.coeffs().iter().any(|c| c.norm_sqr() > 0.0)
}

/// `Σ_{k,ℓ} f * ψ̌_{k,ℓ}` pieces of `f`, zero pieces dropped.
fn pieces(partition: &Partition<f64>, f: &Spectral64) -> Result<Vec<Spectral64>> {
    let mut out = Vec::new();
    for cell in partition.cells_for(f) {
        let p = partition.project(f, &cell)?;
        if nonzero(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn sum_squares(
    engine: &SquareFunctions<f64>,
    parts: &[Spectral64],
    beta: f64,
    lambda: f64,
) -> Result<RealField64> {
    let mut acc = RealField64::constant(*engine.grid(), 0.0);
    for p in parts {
        let g = engine.g_star_sq(p, beta, lambda)?.squared;
        acc = acc.zip_map(&g, |a, b| a + b)?;
    }
    Ok(acc)
}

/// `g_log(Σ f_{k,ℓ})² ≤ C Σ g*(f_{k,ℓ})²` pointwise.
pub fn verify_decoupling(setup: &Setup, corpus: &[CorpusSpec], refine: Refine) -> Result<Report> {
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, _| {
        let engine = s.engine()?;
        let partition = Partition::new(s.params);
        let mut report = Report::new("decoupling", describe(corpus));
        let (beta, lambda) = (s.params.beta, s.params.lambda);
        for m in gen_corpora(corpus, &s.grid, &s.params)? {
            let parts = pieces(&partition, &m.field)?;
            if parts.is_empty() {
                return Err(HarnessError::EmptyCover(format!("decoupling/{}", m.label)));
            }
            let mut total = Spectral64::zeros(s.grid);
            for p in &parts {
                total = total.add(p)?;
            }
            let lhs = engine.g_log_sq(&total, beta)?;
            let rhs = sum_squares(&engine, &parts, beta, lambda)?;
            let stat = pointwise_ratio(&lhs.squared, &rhs);
            report.push_pointwise(&m.label, &stat, lhs.squared.max(), rhs.max());
            report.truncation = Some(lhs.meta);
        }
        report.summarize();
        Ok(report)
    })
}

/// `Σ g*(f * ψ̌_{k,ℓ})² ≤ C g*(f)²` pointwise.
pub fn verify_recoupling(setup: &Setup, corpus: &[CorpusSpec], refine: Refine) -> Result<Report> {
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, _| {
        let engine = s.engine()?;
        let partition = Partition::new(s.params);
        let mut report = Report::new("recoupling", describe(corpus));
        let (beta, lambda) = (s.params.beta, s.params.lambda);
        for m in gen_corpora(corpus, &s.grid, &s.params)? {
            let parts = pieces(&partition, &m.field)?;
            if parts.is_empty() && nonzero(&m.field) {
                return Err(HarnessError::EmptyCover(format!("recoupling/{}", m.label)));
            }
            let lhs = sum_squares(&engine, &parts, beta, lambda)?;
            let rhs = engine.g_star_sq(&m.field, beta, lambda)?;
            let stat = pointwise_ratio(&lhs, &rhs.squared);
            report.push_pointwise(&m.label, &stat, lhs.max(), rhs.squared.max());
            report.truncation = Some(rhs.meta);
        }
        report.summarize();
        Ok(report)
    })
}

/// The lattice cell of annulus `k` sitting on the positive first axis.
fn axis_cell(partition: &Partition<f64>, k: i32, dim: usize) -> loglp_core::Cell<f64> {
    let r_k = partition.r_k(k);
    let mut ell = vec![0i64; dim];
    ell[0] = (2f64.powi(k) / r_k).round() as i64;
    partition.cell(k, ell)
}

/// The corpus moved to the band `[k-1, k+1]` around annulus `k`, capped by
/// what the grid can hold.
fn rebanded(corpus: &[CorpusSpec], k: i32, grid: &TorusGrid) -> Vec<CorpusSpec> {
    let cap = grid.n.trailing_zeros() as i32 - 3;
    corpus
        .iter()
        .map(|c| CorpusSpec { band: ((k - 1).max(1), (k + 1).min(cap)), ..c.clone() })
        .collect()
}

/// Pieces carrying less than this share of their member's `ℓ²` mass are
/// numerically empty.
const EMPTY_PIECE: f64 = 1e-8;

/// `g*_β(T_m(f * ψ̌_B)) ≤ C g*_0(f * ψ̌_B)` for one cell per annulus in `ks`,
/// with the corpus re-banded around each annulus.
pub fn verify_local_multiplier(
    setup: &Setup,
    corpus: &[CorpusSpec],
    symbol: &RadialSymbol<f64>,
    ks: &[i32],
    refine: Refine,
) -> Result<Report> {
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, primary| {
        let engine = s.engine()?;
        let partition = Partition::new(s.params);
        let mut report = Report::new("local_multiplier", describe(corpus));
        let (beta, lambda) = (s.params.beta, s.params.lambda);
        let mut per_k = Vec::new();
        for &k in ks {
            partition.check_resolved(k, &s.grid)?;
            let cell = axis_cell(&partition, k, s.params.dim);
            let members = gen_corpora(&rebanded(corpus, k, &s.grid), &s.grid, &s.params)?;
            let mut worst = 0.0f64;
            for m in &members {
                let piece = partition.project(&m.field, &cell)?;
                if piece.coeff_l2() <= EMPTY_PIECE * m.field.coeff_l2() {
                    continue;
                }
                let lhs = engine.g_star(&symbol.apply(&piece), beta, lambda)?;
                let rhs = engine.g_star(&piece, 0.0, lambda)?;
                let stat = pointwise_ratio(&lhs, &rhs);
                worst = worst.max(stat.max);
                report.push_pointwise(&format!("{}@k{k}", m.label), &stat, lhs.max(), rhs.max());
            }
            if worst == 0.0 {
                return Err(HarnessError::EmptyCover(format!("local_multiplier/k{k}")));
            }
            per_k.push(worst);
            report.records.push(Record::new(
                format!("k={k}"),
                &[
                    ("k", k as f64),
                    ("r_b", cell.center_norm()),
                    ("cell_radius", cell.r_k),
                    ("constant", worst),
                ],
            ));
        }
        report.summarize();
        if primary && !per_k.is_empty() {
            let hi = per_k.iter().copied().fold(0.0, f64::max);
            let lo = per_k.iter().copied().fold(f64::INFINITY, f64::min);
            report.check_le("k_uniformity", hi / lo, 2.0);
        }
        Ok(report)
    })
}

/// `g_log,β(T_m f) ≤ C g*_0(f)` pointwise, with the identity multiplier as
/// control: `g_log,0(f) ≤ 2^{dλ/2} g*_0(f)`.
pub fn verify_pointwise(
    setup: &Setup,
    corpus: &[CorpusSpec],
    symbol: &RadialSymbol<f64>,
    refine: Refine,
) -> Result<Report> {
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, primary| {
        let engine = s.engine()?;
        let mut report = Report::new("pointwise", describe(corpus));
        let (beta, lambda) = (s.params.beta, s.params.lambda);
        let mut control = 0.0f64;
        for m in gen_corpora(corpus, &s.grid, &s.params)? {
            let lhs = engine.g_log_sq(&symbol.apply(&m.field), beta)?;
            let rhs = engine.g_star_sq(&m.field, 0.0, lambda)?;
            let (l, r) = (lhs.values(), rhs.values());
            let stat = pointwise_ratio(&l, &r);
            report.push_pointwise(&m.label, &stat, l.max(), r.max());
            report.truncation = Some(lhs.meta);
            if primary {
                let ident = engine.g_log(&m.field, 0.0)?;
                control = control.max(pointwise_ratio(&ident, &r).max);
            }
        }
        report.summarize();
        if primary {
            let d = s.params.dim as f64;
            report.check_le("identity_control", control, 2f64.powf(d * lambda / 2.0));
        }
        Ok(report)
    })
}

/// `∫ g*_0(f)² w ≤ C ∫ |f|² M²w`.
pub fn verify_forward_weighted(
    setup: &Setup,
    corpus: &[CorpusSpec],
    weights: &[WeightKind],
    seed: u64,
    refine: Refine,
) -> Result<Report> {
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, _| {
        let engine = s.engine()?;
        let mut report = Report::new("forward_weighted", format!("{}; weights {}", describe(corpus), weight_names(weights)));
        let ws = weights_with_m2(&gen_weights(weights, seed, &s.grid))?;
        for m in gen_corpora(corpus, &s.grid, &s.params)? {
            let g = engine.g_star_sq(&m.field, 0.0, s.params.lambda)?;
            let e = energy(&m.field);
            for (w, m2) in &ws {
                let lhs = weighted_integral(&g.squared, &w.field);
                let rhs = weighted_integral(&e, m2);
                report.push_scalar(&format!("{}|{}", m.label, w.label), lhs, rhs);
            }
            report.truncation = Some(g.meta);
        }
        report.summarize();
        Ok(report)
    })
}

fn weight_names(kinds: &[WeightKind]) -> String {
    kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
}

fn weights_with_m2(ws: &[Weight]) -> Result<Vec<(Weight, RealField64)>> {
    ws.iter()
        .map(|w| Ok((w.clone(), hl_maximal(&hl_maximal(&w.field)?)?)))
        .collect()
}

fn m4(w: &RealField64) -> Result<RealField64> {
    let mut v = w.clone();
    for _ in 0..4 {
        v = hl_maximal(&v)?;
    }
    Ok(v)
}

/// `∫ |P_hi f|² w ≤ C ∫ g_log,β(f)² M_log(M⁴w)`.
pub fn verify_reverse_weighted(
    setup: &Setup,
    corpus: &[CorpusSpec],
    weights: &[WeightKind],
    seed: u64,
    refine: Refine,
) -> Result<Report> {
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, _| {
        let engine = s.engine()?;
        let mut report = Report::new("reverse_weighted", format!("{}; weights {}", describe(corpus), weight_names(weights)));
        let ws: Vec<(Weight, RealField64)> = gen_weights(weights, seed, &s.grid)
            .into_iter()
            .map(|w| {
                let big = log_maximal(&m4(&w.field)?, &s.params, &s.scales)?;
                Ok((w, big))
            })
            .collect::<Result<_>>()?;
        for m in gen_corpora(corpus, &s.grid, &s.params)? {
            let hi = energy(&hi_projection(&m.field, &s.params));
            let g = engine.g_log_sq(&m.field, s.params.beta)?;
            for (w, big) in &ws {
                let lhs = weighted_integral(&hi, &w.field);
                let rhs = weighted_integral(&g.squared, big);
                report.push_scalar(&format!("{}|{}", m.label, w.label), lhs, rhs);
            }
            report.truncation = Some(g.meta);
        }
        report.summarize();
        Ok(report)
    })
}

/// Stage constants of the weighted chain, each evaluated on the chain's own
/// intermediate quantities.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageConstants {
    pub reverse: f64,
    pub pointwise: f64,
    pub forward: f64,
}

impl StageConstants {
    pub fn product(&self) -> f64 {
        self.reverse * self.pointwise * self.pointwise * self.forward
    }
}

/// `∫ |T_{m,hi} f|² w ≤ C ∫ |f|² M²(M_log(M⁴w))`, with the stage-composition
/// check and the unimodular control `w ≡ 1`, `β = 0`.
pub fn verify_weighted_multiplier(
    setup: &Setup,
    corpus: &[CorpusSpec],
    weights: &[WeightKind],
    seed: u64,
    symbol: &RadialSymbol<f64>,
    refine: Refine,
) -> Result<Report> {
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, primary| {
        let engine = s.engine()?;
        let mut report = Report::new(
            "weighted_multiplier",
            format!("{}; weights {}", describe(corpus), weight_names(weights)),
        );
        let (beta, lambda) = (s.params.beta, s.params.lambda);
        // (w, M_log M⁴ w, M² M_log M⁴ w)
        let ws: Vec<(Weight, RealField64, RealField64)> = gen_weights(weights, seed, &s.grid)
            .into_iter()
            .map(|w| {
                let mid = log_maximal(&m4(&w.field)?, &s.params, &s.scales)?;
                let outer = hl_maximal(&hl_maximal(&mid)?)?;
                Ok((w, mid, outer))
            })
            .collect::<Result<_>>()?;
        let mut stages = StageConstants::default();
        let members = gen_corpora(corpus, &s.grid, &s.params)?;
        for m in &members {
            let u = symbol.apply(&m.field);
            let hi = energy(&hi_projection(&u, &s.params));
            let e = energy(&m.field);
            let gl = engine.g_log_sq(&u, beta)?;
            let gs = engine.g_star_sq(&m.field, 0.0, lambda)?;
            let pw = pointwise_ratio(&gl.values(), &gs.values());
            stages.pointwise = stages.pointwise.max(pw.max);
            for (w, mid, outer) in &ws {
                let lhs = weighted_integral(&hi, &w.field);
                let rhs = weighted_integral(&e, outer);
                report.push_scalar(&format!("{}|{}", m.label, w.label), lhs, rhs);
                let rev_rhs = weighted_integral(&gl.squared, mid);
                if rev_rhs > 0.0 {
                    stages.reverse = stages.reverse.max(lhs / rev_rhs);
                }
                if rhs > 0.0 {
                    stages.forward = stages.forward.max(weighted_integral(&gs.squared, mid) / rhs);
                }
            }
            report.truncation = Some(gl.meta);
        }
        report.summarize();
        if primary {
            report.records.push(Record::new(
                "stages",
                &[
                    ("reverse", stages.reverse),
                    ("pointwise", stages.pointwise),
                    ("forward", stages.forward),
                    ("product", stages.product()),
                ],
            ));
            report.check_le("stage_composition", report.constant, stages.product() * 1.10);

            // unimodular control
            let p0 = s.params.with_beta(0.0)?;
            let model0 = match symbol.kind {
                SymbolKind::Model { gamma, .. } => RadialSymbol::model(gamma, 0.0)?,
                _ => RadialSymbol::model(s.params.gamma, 0.0)?,
            };
            let one = RealField64::constant(s.grid, 1.0);
            let weight = rhs_weight(&one, &p0, &s.scales)?;
            let mut control = 0.0f64;
            for m in &members {
                let lhs = energy(&hi_projection(&model0.apply(&m.field), &p0)).integral();
                let rhs = weighted_integral(&energy(&m.field), &weight);
                if rhs > 0.0 {
                    control = control.max(lhs / rhs);
                }
            }
            report.records.push(Record::new("unimodular_control", &[("ratio", control)]));
            report.check_le("unimodular_control", control, 1.0 + 1e-10);
        }
        Ok(report)
    })
}

/// `‖M_log w‖_r / ‖w‖_r` over a weight corpus, at `β` above the threshold
/// `d(γ-1)/(2r)` (the report's constant) and at `beta_below` (trend only).
pub fn verify_maximal_lr(
    setup: &Setup,
    weights: &[WeightKind],
    seed: u64,
    r: f64,
    beta_above: f64,
    beta_below: f64,
    refine: Refine,
) -> Result<Report> {
    let threshold = setup.params.dim as f64 * (setup.params.gamma - 1.0) / (2.0 * r);
    if beta_above <= threshold {
        return Err(HarnessError::Config(format!(
            "beta_above = {beta_above} is not above the threshold {threshold}"
        )));
    }
    with_refinements(setup, refine, DRIFT_TOLERANCE, |s, primary| {
        let mut report = Report::new("maximal_lr", format!("weights {}; r = {r}", weight_names(weights)));
        let above = s.params.with_beta(beta_above)?;
        let below = s.params.with_beta(beta_below)?;
        for w in gen_weights(weights, seed, &s.grid) {
            let norm = w.field.lp_norm(r)?;
            let hi = log_maximal(&w.field, &above, &s.scales)?.lp_norm(r)?;
            report.push_scalar(&w.label, hi, norm);
            if primary {
                let lo = log_maximal(&w.field, &below, &s.scales)?.lp_norm(r)?;
                report.records.push(Record::new(
                    w.label.clone(),
                    &[("beta_above", beta_above), ("ratio_above", hi / norm), ("beta_below", beta_below), ("ratio_below", lo / norm)],
                ));
            }
        }
        report.summarize();
        if primary {
            let one = RealField64::constant(s.grid, 1.0);
            let got = log_maximal(&one, &above, &s.scales)?.lp_norm(r)? / one.lp_norm(r)?;
            let expect = (-s.scales.t_max().ln()).powf(-2.0 * beta_above);
            report.check_le("constant_weight_closed_form", relative_drift(expect, got), 1e-10);
            report.records.push(Record::new("threshold", &[("beta_star", threshold)]));
        }
        Ok(report)
    })
}

/// Bessel constants of random fields band-limited to each annulus in `ks`.
pub fn verify_bessel(setup: &Setup, ks: &[i32], count: usize, seed: u64) -> Result<Report> {
    let partition = Partition::new(setup.params);
    let mut report = Report::new("bessel", format!("{count} random fields per annulus #{seed}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_k = Vec::new();
    for &k in ks {
        partition.check_resolved(k, &setup.grid)?;
        let (r_in, r_out) = Partition::<f64>::eta_support(k);
        let mut worst = 0.0f64;
        for i in 0..count {
            let mut spec = Spectral64::zeros(setup.grid);
            for bin in 0..setup.grid.len() {
                let r: f64 = setup.grid.frequency_norm(bin);
                if r > r_in && r < r_out {
                    spec.coeffs_mut()[bin] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
            let b = partition.bessel_ratio(&spec.inverse(), k)?;
            worst = worst.max(b.ratio);
            report.members.push(crate::report::MemberStat {
                label: format!("k{k}#{i}"),
                lhs: b.ratio,
                rhs: 1.0,
                ratio: b.ratio,
                median: b.ratio,
                excluded: b.excluded,
            });
            report.evaluated += b.evaluated;
            report.excluded += b.excluded;
        }
        per_k.push(worst);
        report.records.push(Record::new(format!("k={k}"), &[("k", k as f64), ("constant", worst)]));
    }
    report.summarize();
    if !per_k.is_empty() {
        let hi = per_k.iter().copied().fold(0.0, f64::max);
        let lo = per_k.iter().copied().fold(f64::INFINITY, f64::min);
        report.check_le("k_span", hi / lo, 4.0);
    }
    report.provisional = false;
    Ok(report.finish())
}

/// `K*K ≤ C K` for each `λ`: uniformity over the scale grid and drift under
/// grid doubling, per scale.
pub fn verify_kernel_stability(setup: &Setup, lambdas: &[f64]) -> Result<Report> {
    let mut report = Report::new("kernel_stability", format!("lambda {lambdas:?}"));
    let doubled = loglp_core::TorusGrid::new(setup.grid.dim, setup.grid.n * 2)?;
    let mut maxima = BTreeMap::new();
    for &lambda in lambdas {
        let (mut hi, mut lo, mut drift) = (0.0f64, f64::INFINITY, 0.0f64);
        let mut excluded = 0;
        for &(t, _) in &setup.scales.entries {
            let k = RobustKernel::new(&setup.params, t, lambda)?;
            let a = kernel_conv_stability(&k, &setup.grid);
            let b = kernel_conv_stability(&k, &doubled);
            hi = hi.max(a.constant);
            lo = lo.min(a.constant);
            drift = drift.max(relative_drift(a.constant, b.constant));
            excluded += a.excluded;
            report.evaluated += a.evaluated;
        }
        report.members.push(crate::report::MemberStat {
            label: format!("lambda={lambda}"),
            lhs: hi,
            rhs: 1.0,
            ratio: hi,
            median: lo,
            excluded,
        });
        report.records.push(Record::new(
            format!("lambda={lambda}"),
            &[("lambda", lambda), ("max", hi), ("min", lo), ("span", hi / lo), ("grid_drift", drift), ("excluded", excluded as f64)],
        ));
        report.check_le(&format!("span_lambda_{lambda}"), hi / lo, 2.0);
        report.check_le(&format!("grid_drift_lambda_{lambda}"), drift, 0.10);
        maxima.insert(lambda.to_bits(), hi);
    }
    report.summarize();
    report.provisional = false;
    report.drift.grid = report.records.iter().filter_map(|r| r.get("grid_drift")).reduce(f64::max);
    Ok(report.finish())
}

/// Pointwise and localized Miyachi quantities of `symbol`, plus the
/// classical-Mikhlin strictness probe along `R = e^{2^j}`, `j = 3..6`.
pub fn verify_miyachi(symbol: &RadialSymbol<f64>, params: &loglp_core::Params, opts: &SobolevOptions) -> Result<Report> {
    let mut report = Report::new("miyachi", format!("{:?}", symbol.kind));
    let orders = 3.min(params.n_deriv);
    let samples = 161;
    for j in 0..=orders {
        let ratios: Vec<f64> = (0..samples)
            .map(|i| {
                let u = 4.0 + 16.0 * i as f64 / (samples - 1) as f64;
                symbol.pointwise_miyachi_ratio(u.exp(), j, params)
            })
            .collect::<std::result::Result<_, _>>()?;
        let max = ratios.iter().copied().fold(0.0, f64::max);
        let quarter = samples / 4;
        let early = ratios[..quarter].iter().copied().fold(0.0, f64::max);
        let late = ratios[samples - quarter..].iter().copied().fold(0.0, f64::max);
        report.records.push(Record::new(
            format!("pointwise_j{j}"),
            &[("j", j as f64), ("max", max), ("early_max", early), ("late_max", late)],
        ));
        report.check_le(&format!("pointwise_finite_j{j}"), if max.is_finite() { 0.0 } else { 1.0 }, 0.0);
        report.check_le(&format!("pointwise_growth_j{j}"), late / early, 2.0);
    }

    let thetas: Vec<f64> = [0.0, 1.0, 2.0].into_iter().filter(|&t| t <= params.sigma).collect();
    let balls: Vec<Ball<f64>> = canonical_balls(params, 6.0, 20.0, 12)?;
    let local = symbol.miyachi_constant(&balls, &thetas, params, opts)?;
    for rec in &local.records {
        report.members.push(crate::report::MemberStat {
            label: format!("R_B=e^{:.2},theta={}", rec.r_b.ln(), rec.theta),
            lhs: rec.canonical,
            rhs: rec.randomized,
            ratio: rec.value(),
            median: rec.value(),
            excluded: 0,
        });
    }
    report.summarize();
    report.check_le("localized_max_over_median", local.max_over_median, 3.0);
    report.records.push(Record::new(
        "localized",
        &[
            ("constant", local.constant),
            ("median", local.median),
            ("max_over_median", local.max_over_median),
            ("growth_factor", local.growth_factor),
            ("grows", f64::from(u8::from(local.grows))),
        ],
    ));

    // resolution check: one doubling of the local grids
    let fine = SobolevOptions {
        points_per_radius: opts.points_per_radius * 2,
        ..*opts
    };
    let refined = symbol.miyachi_constant(&balls[..2], &thetas, params, &fine)?;
    let coarse = symbol.miyachi_constant(&balls[..2], &thetas, params, opts)?;
    report.drift.grid = Some(relative_drift(coarse.constant, refined.constant));
    report.drift.grid_constant = Some(refined.constant);

    let mikhlin: Vec<f64> = (3..=6)
        .map(|j| symbol.mikhlin_ratio(E.powf(2f64.powi(j)), params))
        .collect::<std::result::Result<_, _>>()?;
    let increments = mikhlin.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    for (j, v) in (3..=6).zip(&mikhlin) {
        report.records.push(Record::new(format!("mikhlin_j{j}"), &[("j", j as f64), ("log_r", 2f64.powi(j)), ("ratio", *v)]));
    }
    report.records.push(Record::new("mikhlin_strictness", &[("min_increment", increments)]));
    report.provisional = false;
    Ok(report.finish())
}

/// Partition identity at `samples` random frequencies of the covered range.
pub fn verify_partition(setup: &Setup, samples: usize, seed: u64) -> Result<Report> {
    let partition = Partition::new(setup.params);
    let (lo, hi) = (setup.params.k0 as f64 + 1.0, setup.params.kmax as f64 - 1.0);
    if lo >= hi {
        return Err(HarnessError::EmptyCover("partition".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let r = 2f64.powf(rng.random_range(lo..hi));
        let xi = match setup.params.dim {
            1 => vec![if rng.random_bool(0.5) { r } else { -r }],
            _ => {
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                vec![r * a.cos(), r * a.sin()]
            }
        };
        worst = worst.max((partition.partition_sum(&xi) - 1.0).abs());
    }
    let mut report = Report::new("partition", format!("{samples} frequencies in [2^{lo}, 2^{hi}] #{seed}"));
    report.records.push(Record::new("identity", &[("max_deviation", worst), ("samples", samples as f64)]));
    for k in setup.params.k0..=setup.params.kmax {
        partition.check_resolved(k, &setup.grid)?;
        let count = partition.enumerate_cells(k)?.len();
        report.records.push(Record::new(format!("k={k}"), &[("k", k as f64), ("cells", count as f64), ("r_k", partition.r_k(k))]));
    }
    report.check_le("partition_identity", worst, 1e-10);
    report.provisional = false;
    Ok(report.finish())
}

/// Least-squares slope of `log(cells in A_k)` against `log k`.
pub fn cell_count_exponent(params: &loglp_core::Params, ks: std::ops::RangeInclusive<i32>) -> Result<f64> {
    let top = *ks.end();
    let partition = Partition::new(params.with_kmax(top.max(params.kmax))?);
    let mut pts = Vec::new();
    for k in ks {
        let count = partition.enumerate_cells(k)?.len();
        pts.push(((k as f64).ln(), (count as f64).ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
