use loglp_core::{default_du, Params, Scales64, SquareFunctions, TorusGrid};

use crate::error::{HarnessError, Result};
use crate::report::Report;

/// Parameters, grid and scale grid of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub params: Params,
    pub grid: TorusGrid,
    pub scales: Scales64,
}

/// Largest `k` whose annulus support `[2^{k-3/4}, 2^{k+3/4}]` stays below Nyquist.
pub fn resolved_kmax(n: usize) -> i32 {
    let nyquist = (n / 2) as f64;
    let mut k = 0;
    while 2f64.powf(k as f64 + 1.0 + 0.75) < nyquist {
        k += 1;
    }
    k
}

impl Setup {
    /// Scales at the default step `ln 2 / 8`.
    pub fn new(params: Params, dim_n: usize) -> Result<Self> {
        Self::with_step(params, dim_n, default_du())
    }

    pub fn with_step(params: Params, n: usize, du: f64) -> Result<Self> {
        let (params, grid) = Self::fit(params, n)?;
        let scales = Scales64::with_step(&params, &grid, du)?;
        Ok(Self { params, grid, scales })
    }

    /// `count` scales filling `[log 1/t0, log(n/4))`.
    pub fn with_count(params: Params, n: usize, count: usize) -> Result<Self> {
        let (params, grid) = Self::fit(params, n)?;
        let limit = Scales64::resolvable_limit(&grid);
        let scales = Scales64::new(&params, &grid, count, limit)?;
        Ok(Self { params, grid, scales })
    }

    fn fit(params: Params, n: usize) -> Result<(Params, TorusGrid)> {
        let grid = TorusGrid::new(params.dim, n)?;
        let kmax = resolved_kmax(n);
        if kmax <= params.k0 {
            return Err(HarnessError::Config(format!(
                "n = {n} resolves no annulus above k0 = {}",
                params.k0
            )));
        }
        Ok((params.with_kmax(kmax)?, grid))
    }

    /// Same range, half the scale step.
    pub fn halved(&self) -> Result<Self> {
        Ok(Self {
            params: self.params,
            grid: self.grid,
            scales: self.scales.halved()?,
        })
    }

    /// Twice the grid size at the same scale step.
    pub fn doubled(&self) -> Result<Self> {
        Self::with_step(self.params, self.grid.n * 2, self.scales.du)
    }

    pub fn with_params(&self, params: Params) -> Result<Self> {
        Ok(Self {
            params: params.with_kmax(self.params.kmax)?,
            grid: self.grid,
            scales: self.scales.clone(),
        })
    }

    pub fn engine(&self) -> Result<SquareFunctions<f64>> {
        Ok(SquareFunctions::new(self.params, self.grid, self.scales.clone())?)
    }
}

/// Which refinements accompany a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Refine {
    /// Repeat at `2n`.
    pub grid: bool,
    /// Repeat at `Δu/2`.
    pub scales: bool,
}

impl Refine {
    pub const NONE: Refine = Refine { grid: false, scales: false };
    pub const BOTH: Refine = Refine { grid: true, scales: true };
    pub const SCALES: Refine = Refine { grid: false, scales: true };
    pub const GRID: Refine = Refine { grid: true, scales: false };
}

/// Run `body` at the base resolution and the requested refinements, then
/// attach drift and settle the report. `body` receives `true` on the base run.
pub(crate) fn with_refinements(
    setup: &Setup,
    refine: Refine,
    tolerance: f64,
    body: impl Fn(&Setup, bool) -> Result<Report>,
) -> Result<Report> {
    let mut base = body(setup, true)?;
    let scales = if refine.scales {
        Some(body(&setup.halved()?, false)?.constant)
    } else {
        None
    };
    let grid = if refine.grid {
        Some(body(&setup.doubled()?, false)?.constant)
    } else {
        None
    };
    base.set_drift(grid, scales, tolerance);
    Ok(base.finish())
}
