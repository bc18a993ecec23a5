//! `L^p` operator-ratio sweeps of the model family across band ceilings.

use loglp_core::{Field64, Params, RadialSymbol, Spectral64, TorusGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::corpus::{gen_corpus, CorpusKind, CorpusSpec};
use crate::error::{HarnessError, Result};
use crate::report::{relative_drift, Record, Report};

/// Sweep grid and estimator budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepOptions {
    pub betas: Vec<f64>,
    pub ps: Vec<f64>,
    /// Lower band ceiling `K`; the upper one is `K + 2`.
    pub ceiling: i32,
    /// Power-iteration steps per starting point.
    pub iterations: usize,
    /// Random band-limited starting points besides the conjugate spike.
    pub starts: usize,
    pub n: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            betas: vec![0.0, 0.125, 0.25, 0.5, 1.0],
            ps: vec![2.0, 4.0],
            ceiling: 10,
            iterations: 40,
            starts: 2,
            n: 1 << 15,
        }
    }
}

/// Lower bound on `sup ‖T_m f‖_p / ‖f‖_p` over fields with `|ξ| ≤ 2^ceiling`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub ratio: f64,
    pub iterations: usize,
}

fn band_mask(grid: &TorusGrid, ceiling: i32) -> Vec<f64> {
    let top = 2f64.powi(ceiling);
    grid.radial_mask(|r: f64| if r <= top { 1.0 } else { 0.0 })
}

/// `|y|^{p-1} sgn y`, rescaled to unit sup.
fn duality_map(y: &Field64, p: f64) -> Result<Field64> {
    let data: Vec<Complex64> = y
        .samples()
        .iter()
        .map(|z| {
            let a = z.norm();
            if a == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z * a.powf(p - 2.0)
            }
        })
        .collect();
    let peak = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    Ok(Field64::new(*y.grid(), data.into_iter().map(|z| z * scale).collect())?)
}

fn ratio(symbol: &RadialSymbol<f64>, x: &Spectral64, p: f64) -> Result<f64> {
    let den = x.inverse().lp_norm(p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(symbol.apply(x).inverse().lp_norm(p)? / den)
}

/// Projected power iteration for the `p → p` norm of `symbol` on the band
/// `|ξ| ≤ 2^ceiling`, from each of `starts`; returns the best ratio seen.
pub fn estimate_norm(
    symbol: &RadialSymbol<f64>,
    starts: &[Spectral64],
    p: f64,
    ceiling: i32,
    iterations: usize,
) -> Result<NormEstimate> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(HarnessError::Config(format!("p = {p} is outside (1, ∞)")));
    }
    let q = p / (p - 1.0);
    let adjoint = symbol.conj();
    let mut best = NormEstimate { ratio: 0.0, iterations: 0 };
    for start in starts {
        let mask = band_mask(start.grid(), ceiling);
        let mut x = start.apply_mask(&mask)?;
        let mut last = ratio(symbol, &x, p)?;
        if last > best.ratio {
            best = NormEstimate { ratio: last, iterations: 0 };
        }
        for it in 1..=iterations {
            let y = symbol.apply(&x).inverse();
            let z = duality_map(&y, p)?.forward();
            let w = adjoint.apply(&z).apply_mask(&mask)?.inverse();
            x = duality_map(&w, q)?.forward().apply_mask(&mask)?;
            let r = ratio(symbol, &x, p)?;
            if r > best.ratio {
                best = NormEstimate { ratio: r, iterations: it };
            }
            if (r - last).abs() <= 1e-12 * r {
                break;
            }
            last = r;
        }
    }
    Ok(best)
}

/// Starting points: the band-limited conjugate-symbol spike and random
/// band-limited fields.
fn starting_points(symbol: &RadialSymbol<f64>, grid: &TorusGrid, params: &Params, ceiling: i32, count: usize, seed: u64) -> Result<Vec<Spectral64>> {
    let mut spike = Spectral64::new(*grid, symbol.conj().mask(grid))?;
    spike = spike.apply_mask(&band_mask(grid, ceiling))?;
    let mut out = vec![spike];
    if count > 0 {
        let spec = CorpusSpec::new(CorpusKind::RandomBandlimited, count, (1, ceiling), seed);
        out.extend(gen_corpus(&spec, grid, params)?.into_iter().map(|m| m.field));
    }
    Ok(out)
}

/// Growth factors `est(K+2)/est(K)` of the model family `(γ, β)` for each `β`
/// and `p`, with the conjugate operator at `p'` as the duality pair.
pub fn lp_sweep(params: &Params, gamma: f64, opts: &SweepOptions, seed: u64) -> Result<Report> {
    let grid = TorusGrid::new(params.dim, opts.n)?;
    let top = opts.ceiling + 2;
    if opts.ceiling < 1 || 2f64.powi(top) > (opts.n / 8) as f64 {
        return Err(HarnessError::Band {
            lo: opts.ceiling,
            hi: top,
            reason: format!("ceilings must satisfy 1 ≤ K and 2^(K+2) ≤ n/8 = {}", opts.n / 8),
        });
    }
    for &p in &opts.ps {
        if !(p > 1.0 && p.is_finite()) {
            return Err(HarnessError::Config(format!("p = {p} is outside (1, ∞)")));
        }
    }
    let mut report = Report::new(
        "lp_sweep",
        format!("model gamma={gamma}; conjugate spike + {} random_bandlimited #{seed}", opts.starts),
    );
    let mut betas = opts.betas.clone();
    betas.sort_by(f64::total_cmp);
    let mut growth_by_p: Vec<(f64, Vec<f64>)> = opts.ps.iter().map(|&p| (p, Vec::new())).collect();
    let mut plancherel = 0.0f64;
    let mut duality = 0.0f64;
    for &beta in &betas {
        let symbol = RadialSymbol::model(gamma, beta)?;
        let dual = symbol.conj();
        for (p, growths) in growth_by_p.iter_mut() {
            let p = *p;
            let run = |sym: &RadialSymbol<f64>, p: f64| -> Result<(f64, f64)> {
                let lo_starts = starting_points(sym, &grid, params, opts.ceiling, opts.starts, seed)?;
                let hi_starts = starting_points(sym, &grid, params, top, opts.starts, seed)?;
                let lo = estimate_norm(sym, &lo_starts, p, opts.ceiling, opts.iterations)?;
                let hi = estimate_norm(sym, &hi_starts, p, top, opts.iterations)?;
                Ok((lo.ratio, hi.ratio))
            };
            let (lo, hi) = run(&symbol, p)?;
            let growth = hi / lo;
            growths.push(growth);
            report.push_scalar(&format!("beta={beta},p={p}"), hi, lo);
            let mut values = vec![("beta", beta), ("p", p), ("ratio_lo", lo), ("ratio_hi", hi), ("growth", growth)];
            if (p - 2.0).abs() < 1e-12 {
                plancherel = plancherel.max(lo).max(hi);
            } else {
                let q = p / (p - 1.0);
                let (dlo, dhi) = run(&dual, q)?;
                let dual_growth = dhi / dlo;
                duality = duality.max(relative_drift(growth, dual_growth));
                values.extend([("p_dual", q), ("dual_ratio_lo", dlo), ("dual_ratio_hi", dhi), ("dual_growth", dual_growth)]);
            }
            report.records.push(Record::new(format!("beta={beta},p={p}"), &values));
        }
    }
    report.summarize();
    if opts.ps.iter().any(|&p| (p - 2.0).abs() < 1e-12) {
        report.check_le("plancherel_p2", plancherel, 1.0 + 1e-10);
    }
    for (p, growths) in &growth_by_p {
        if (p - 2.0).abs() < 1e-12 {
            continue;
        }
        let worst = growths.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        if growths.len() > 1 {
            report.check_le(&format!("growth_nonincreasing_p{p}"), worst, 1e-9);
        }
    }
    if opts.ps.iter().any(|&p| (p - 2.0).abs() >= 1e-12) {
        report.check_le("duality_match", duality, 0.15);
    }
    Ok(report.finish())
}
