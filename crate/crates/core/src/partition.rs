//! Log-subdyadic lattice partition `ψ_{k,ℓ}(ξ) = η_k(ξ) ν(ξ/r_k - ℓ)` with
//! lattice spacing `r_k = ρ(2^k)`.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{log_scale, LogParams};
use crate::grid::{Field, RealField, SpectralField, TorusGrid};
use crate::scalar::{lit, Scalar};
use crate::special::SmoothStep;

/// `b = 1_{[-1/2, 1/2]} * μ` for a smooth unit-mass mollifier `μ` supported
/// in `[-1/4, 1/4]`, so `Σ_ℓ b(x - ℓ) = 1` and `supp b = [-3/4, 3/4]`.
#[derive(Debug, Clone)]
pub struct BumpProfile<T> {
    step: SmoothStep<T>,
}

impl<T: Scalar> BumpProfile<T> {
    pub fn new() -> Self {
        Self {
            step: SmoothStep::new(),
        }
    }

    /// Half-width of the support.
    pub fn half_width() -> T {
        lit(0.75)
    }

    /// `∫_{-∞}^x μ`.
    fn mollified_step(&self, x: T) -> T {
        self.step.value(x * lit(4.0))
    }

    pub fn value(&self, x: T) -> T {
        let half = lit::<T>(0.5);
        self.mollified_step(x + half) - self.mollified_step(x - half)
    }

    /// Tensor product `ν(ζ) = Π b(ζ_i)`.
    pub fn tensor(&self, zeta: &[T]) -> T {
        zeta.iter().map(|&z| self.value(z)).fold(T::one(), |a, b| a * b)
    }
}

impl<T: Scalar> Default for BumpProfile<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// One lattice piece `(k, ℓ)` of the partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell<T> {
    pub k: i32,
    pub ell: Vec<i64>,
    pub r_k: T,
}

impl<T: Scalar> Cell<T> {
    pub fn center(&self) -> Vec<T> {
        self.ell.iter().map(|&l| self.r_k * T::from_i64_lossy(l)).collect()
    }

    pub fn center_norm(&self) -> T {
        self.center().iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    /// Radius of a ball about the center containing the cutoff support.
    pub fn support_radius(&self) -> T {
        BumpProfile::<T>::half_width() * self.r_k * T::from_usize_lossy(self.ell.len()).sqrt()
    }
}

/// Flat record used for the cell inventory export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub k: i32,
    pub ell_0: i64,
    pub ell_1: Option<i64>,
    pub center_0: f64,
    pub center_1: Option<f64>,
    pub r_k: f64,
    pub support_radius: f64,
}

impl<T: Scalar> From<&Cell<T>> for CellRecord {
    fn from(c: &Cell<T>) -> Self {
        let center = c.center();
        Self {
            k: c.k,
            ell_0: c.ell[0],
            ell_1: c.ell.get(1).copied(),
            center_0: center[0].to_f64_lossy(),
            center_1: center.get(1).map(|v| v.to_f64_lossy()),
            r_k: c.r_k.to_f64_lossy(),
            support_radius: c.support_radius().to_f64_lossy(),
        }
    }
}

/// Outcome of one lattice Bessel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselReport {
    /// `max_y LHS(y) / RHS(y)` over the evaluated points.
    pub ratio: f64,
    /// Points with a vanishing majorant but non-zero left side.
    pub excluded: usize,
    pub evaluated: usize,
}

/// The lattice partition attached to a parameter bundle.
#[derive(Debug, Clone)]
pub struct Partition<T> {
    params: LogParams<T>,
    bump: BumpProfile<T>,
}

impl<T: Scalar> Partition<T> {
    pub fn new(params: LogParams<T>) -> Self {
        Self {
            params,
            bump: BumpProfile::new(),
        }
    }

    pub fn params(&self) -> &LogParams<T> {
        &self.params
    }

    pub fn bump(&self) -> &BumpProfile<T> {
        &self.bump
    }

    /// Radial dyadic profile `χ(r) = b(log₂ r)`, supported in
    /// `[2^{-3/4}, 2^{3/4}] ⊂ [1/2, 2]`, with `Σ_k χ(2^{-k} r) = 1`.
    pub fn chi(&self, r: T) -> T {
        if r <= T::zero() {
            return T::zero();
        }
        self.bump.value(r.log2())
    }

    /// `η_k(ξ) = χ(|ξ| / 2^k)` as a function of `|ξ|`.
    pub fn eta(&self, k: i32, r: T) -> T {
        if r <= T::zero() {
            return T::zero();
        }
        self.bump.value(r.log2() - T::from_i64_lossy(k as i64))
    }

    /// Inner and outer radius of `supp η_k`.
    pub fn eta_support(k: i32) -> (T, T) {
        let two = lit::<T>(2.0);
        (
            two.powf(T::from_i64_lossy(k as i64) - lit(0.75)),
            two.powf(T::from_i64_lossy(k as i64) + lit(0.75)),
        )
    }

    /// Lattice spacing `r_k = ρ(2^k)`.
    pub fn r_k(&self, k: i32) -> T {
        log_scale(self.params.gamma, lit::<T>(2.0).powi(k))
    }

    pub fn cell(&self, k: i32, ell: Vec<i64>) -> Cell<T> {
        Cell {
            k,
            ell,
            r_k: self.r_k(k),
        }
    }

    /// `ψ_{k,ℓ}(ξ)`.
    pub fn cell_cutoff(&self, cell: &Cell<T>, xi: &[T]) -> T {
        let r = xi.iter().map(|&x| x * x).sum::<T>().sqrt();
        let eta = self.eta(cell.k, r);
        if eta == T::zero() {
            return T::zero();
        }
        let zeta: Vec<T> = xi
            .iter()
            .zip(&cell.ell)
            .map(|(&x, &l)| x / cell.r_k - T::from_i64_lossy(l))
            .collect();
        eta * self.bump.tensor(&zeta)
    }

    /// Cells of annulus `k` whose cutoff is not identically zero.
    ///
    /// Lattice indices come from the bounding box of `supp η_k` and are kept
    /// when the cell's `ν` support meets the open shell `supp η_k`.
    pub fn enumerate_cells(&self, k: i32) -> Result<Vec<Cell<T>>> {
        if k < self.params.k0 || k > self.params.kmax {
            return Err(Error::InvalidParams(format!(
                "annulus {k} outside [{}, {}]",
                self.params.k0, self.params.kmax
            )));
        }
        Ok(self.cells_unchecked(k))
    }

    fn cells_unchecked(&self, k: i32) -> Vec<Cell<T>> {
        let r_k = self.r_k(k);
        let w = BumpProfile::<T>::half_width();
        let (r_in, r_out) = Self::eta_support(k);
        let bound = (r_out / r_k + w).ceil().to_i64().unwrap_or(0);
        let axis_range = |l: i64| {
            let lo = r_k * (T::from_i64_lossy(l) - w);
            let hi = r_k * (T::from_i64_lossy(l) + w);
            let near = if lo > T::zero() {
                lo
            } else if hi < T::zero() {
                -hi
            } else {
                T::zero()
            };
            (near, lo.abs().max(hi.abs()))
        };
        let keep = |ranges: &[(T, T)]| {
            let near = ranges.iter().map(|r| r.0 * r.0).sum::<T>().sqrt();
            let far = ranges.iter().map(|r| r.1 * r.1).sum::<T>().sqrt();
            near < r_out && far > r_in
        };
        let mut cells = Vec::new();
        match self.params.dim {
            1 => {
                for l in -bound..=bound {
                    if keep(&[axis_range(l)]) {
                        cells.push(Cell { k, ell: vec![l], r_k });
                    }
                }
            }
            _ => {
                for l0 in -bound..=bound {
                    let a = axis_range(l0);
                    for l1 in -bound..=bound {
                        if keep(&[a, axis_range(l1)]) {
                            cells.push(Cell { k, ell: vec![l0, l1], r_k });
                        }
                    }
                }
            }
        }
        cells
    }

    /// Every cell for `k0 ≤ k ≤ kmax`.
    pub fn all_cells(&self) -> Vec<Cell<T>> {
        (self.params.k0..=self.params.kmax)
            .flat_map(|k| self.cells_unchecked(k))
            .collect()
    }

    /// `Σ_{k0 ≤ k ≤ kmax} Σ_ℓ ψ_{k,ℓ}(ξ)`.
    pub fn partition_sum(&self, xi: &[T]) -> T {
        let r = xi.iter().map(|&x| x * x).sum::<T>().sqrt();
        let w = BumpProfile::<T>::half_width();
        let mut total = T::zero();
        for k in self.params.k0..=self.params.kmax {
            let eta = self.eta(k, r);
            if eta == T::zero() {
                continue;
            }
            let r_k = self.r_k(k);
            let ranges: Vec<(i64, i64)> = xi
                .iter()
                .map(|&x| {
                    let z = x / r_k;
                    (
                        (z - w).ceil().to_i64().unwrap_or(0),
                        (z + w).floor().to_i64().unwrap_or(0),
                    )
                })
                .collect();
            let mut nu_sum = T::zero();
            match xi.len() {
                1 => {
                    for l in ranges[0].0..=ranges[0].1 {
                        nu_sum = nu_sum + self.bump.value(xi[0] / r_k - T::from_i64_lossy(l));
                    }
                }
                _ => {
                    for l0 in ranges[0].0..=ranges[0].1 {
                        let b0 = self.bump.value(xi[0] / r_k - T::from_i64_lossy(l0));
                        for l1 in ranges[1].0..=ranges[1].1 {
                            nu_sum = nu_sum
                                + b0 * self.bump.value(xi[1] / r_k - T::from_i64_lossy(l1));
                        }
                    }
                }
            }
            total = total + eta * nu_sum;
        }
        total
    }

    /// Error unless `supp η_k` lies strictly below the grid's Nyquist frequency.
    pub fn check_resolved(&self, k: i32, grid: &TorusGrid) -> Result<()> {
        let (_, r_out) = Self::eta_support(k);
        if r_out >= T::from_usize_lossy(grid.nyquist()) {
            return Err(Error::Unresolved(format!(
                "annulus {k} reaches |xi| = {r_out} beyond Nyquist {}",
                grid.nyquist()
            )));
        }
        Ok(())
    }

    /// Non-zero values of `ψ_{k,ℓ}` on grid bins, as `(bin, value)` pairs.
    pub fn cell_weights(&self, cell: &Cell<T>, grid: &TorusGrid) -> Result<Vec<(usize, T)>> {
        self.check_resolved(cell.k, grid)?;
        let w = BumpProfile::<T>::half_width();
        let axis = |l: i64| {
            let lo = (cell.r_k * (T::from_i64_lossy(l) - w)).ceil().to_i64().unwrap_or(0);
            let hi = (cell.r_k * (T::from_i64_lossy(l) + w)).floor().to_i64().unwrap_or(0);
            lo..=hi
        };
        let mut out = Vec::new();
        let mut push = |freq: &[i64]| {
            let xi: Vec<T> = freq.iter().map(|&f| T::from_i64_lossy(f)).collect();
            let v = self.cell_cutoff(cell, &xi);
            if v != T::zero() {
                if let Some(bin) = grid.bin(freq) {
                    out.push((bin, v));
                }
            }
        };
        match grid.dim {
            1 => axis(cell.ell[0]).for_each(|f| push(&[f])),
            _ => {
                for f0 in axis(cell.ell[0]) {
                    for f1 in axis(cell.ell[1]) {
                        push(&[f0, f1]);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Fourier projection `f * ψ̌_{k,ℓ}`.
    pub fn project(&self, f: &SpectralField<T>, cell: &Cell<T>) -> Result<SpectralField<T>> {
        let weights = self.cell_weights(cell, f.grid())?;
        let mut out = SpectralField::zeros(*f.grid());
        let src = f.coeffs();
        let dst = out.coeffs_mut();
        for (bin, v) in weights {
            dst[bin] = src[bin] * v;
        }
        Ok(out)
    }

    /// Cells of every annulus meeting the spectral support of `f`.
    pub fn cells_for(&self, f: &SpectralField<T>) -> Vec<Cell<T>> {
        let mut cells = Vec::new();
        let Some((lo, hi)) = f.support_radii(T::zero()) else {
            return cells;
        };
        for k in self.params.k0..=self.params.kmax {
            let (r_in, r_out) = Self::eta_support(k);
            if r_out <= lo || r_in >= hi {
                continue;
            }
            cells.extend(self.cells_unchecked(k));
        }
        cells
    }

    /// Empirical constant of `Σ_ℓ |F * ν̌_{k,ℓ}|² ≤ C |F|² * |ν̌_k|`, where
    /// `ν̌_k` is the normalized kernel of the multiplier `ν(ξ / r_k)`.
    pub fn bessel_ratio(&self, f: &Field<T>, k: i32) -> Result<BesselReport> {
        let grid = *f.grid();
        let spec = f.forward();
        let Some((_, _)) = spec.support_radii(T::zero()) else {
            return Ok(BesselReport {
                ratio: 0.0,
                excluded: 0,
                evaluated: grid.len(),
            });
        };
        let r_k = self.r_k(k);
        let w = BumpProfile::<T>::half_width();
        let nu_mask: Vec<T> = (0..grid.len())
            .map(|i| {
                let fr = grid.frequency(i);
                let zeta: Vec<T> = fr[..grid.dim]
                    .iter()
                    .map(|&x| T::from_i64_lossy(x) / r_k)
                    .collect();
                self.bump.tensor(&zeta)
            })
            .collect();

        // Each occupied bin feeds the few cells whose bump covers it.
        // Bins at transform roundoff are treated as empty.
        let peak = spec.coeffs().iter().map(|c| c.norm_sqr()).fold(T::zero(), |a, b| a.max(b));
        let cutoff = peak * lit::<T>(1e-24);
        let mut pieces: BTreeMap<[i64; 2], Vec<(usize, T)>> = BTreeMap::new();
        for (i, c) in spec.coeffs().iter().enumerate() {
            if c.norm_sqr() <= cutoff {
                continue;
            }
            let fr = grid.frequency(i);
            let z: Vec<T> = (0..grid.dim).map(|a| T::from_i64_lossy(fr[a]) / r_k).collect();
            let range = |a: usize| {
                let lo = (z[a] - w).ceil().to_i64().unwrap_or(0);
                let hi = (z[a] + w).floor().to_i64().unwrap_or(0);
                lo..=hi
            };
            let seconds = if grid.dim == 1 { 0..=0 } else { range(1) };
            for l0 in range(0) {
                for l1 in seconds.clone() {
                    let ell = [l0, l1];
                    let zeta: Vec<T> = (0..grid.dim).map(|a| z[a] - T::from_i64_lossy(ell[a])).collect();
                    let v = self.bump.tensor(&zeta);
                    if v != T::zero() {
                        pieces.entry(ell).or_default().push((i, v));
                    }
                }
            }
        }

        let mut lhs = vec![T::zero(); grid.len()];
        for entries in pieces.values() {
            let mut piece = SpectralField::zeros(grid);
            for &(i, v) in entries {
                piece.coeffs_mut()[i] = spec.coeffs()[i] * v;
            }
            for (acc, z) in lhs.iter_mut().zip(piece.inverse().samples()) {
                *acc = *acc + z.norm_sqr();
            }
        }

        let kernel = SpectralField::new(
            grid,
            nu_mask.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        )?
        .inverse()
        .abs();
        let rhs = normalized_convolution(&f.abs_sq(), &kernel)?;

        let floor = lit::<T>(1e-14);
        let mut ratio = T::zero();
        let mut excluded = 0;
        let mut evaluated = 0;
        for (l, r) in lhs.iter().zip(rhs.values()) {
            if *r < floor {
                if *l > floor {
                    excluded += 1;
                }
                continue;
            }
            evaluated += 1;
            ratio = ratio.max(*l / *r);
        }
        Ok(BesselReport {
            ratio: ratio.to_f64_lossy(),
            excluded,
            evaluated,
        })
    }
}

/// `(2π)^{-d} ∫ u(x - y) v(y) dy` for real fields, via the transform.
pub(crate) fn normalized_convolution<T: Scalar>(
    u: &RealField<T>,
    v: &RealField<T>,
) -> Result<RealField<T>> {
    let a = u.forward();
    let b = v.forward();
    let coeffs = a.coeffs().iter().zip(b.coeffs()).map(|(&x, &y)| x * y).collect();
    let out = SpectralField::new(*u.grid(), coeffs)?.inverse();
    RealField::new(*u.grid(), out.samples().iter().map(|z| z.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn partition(dim: usize, gamma: f64) -> Partition<f64> {
        let p = LogParams::new(dim, gamma, 1.0).unwrap().with_kmax(13).unwrap();
        Partition::new(p)
    }

    #[test]
    fn bump_partitions_unity() {
        let b = BumpProfile::<f64>::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let x: f64 = rng.random_range(-5.0..5.0);
            let s: f64 = (-8..=8).map(|l| b.value(x - l as f64)).sum();
            assert!((s - 1.0).abs() <= 1e-12, "x = {x}: {s}");
        }
        assert_eq!(b.value(0.75), 0.0);
        assert_eq!(b.value(-0.8), 0.0);
        assert_eq!(b.value(0.2), 1.0);
        assert!((-100..=100).all(|i| b.value(i as f64 * 0.01) >= 0.0));
    }

    #[test]
    fn bump_derivatives_stay_bounded() {
        let b = BumpProfile::<f64>::new();
        let h = 1e-3;
        let xs: Vec<f64> = (0..=300).map(|i| -0.75 + 1.5 * i as f64 / 300.0).collect();
        let d1 = xs.iter().map(|&x| ((b.value(x + h) - b.value(x - h)) / (2.0 * h)).abs());
        let d2 = xs
            .iter()
            .map(|&x| ((b.value(x + h) - 2.0 * b.value(x) + b.value(x - h)) / (h * h)).abs());
        assert!(d1.fold(0.0, f64::max) < 10.0);
        assert!(d2.fold(0.0, f64::max) < 200.0);
    }

    #[test]
    fn dyadic_telescope() {
        let part = partition(1, 2.0);
        for i in 0..2000 {
            let r = (2.0f64).powf(-3.0 + 30.0 * i as f64 / 1999.0);
            let s: f64 = (-10..=40).map(|k| part.chi(r / 2f64.powi(k))).sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        assert_eq!(part.chi(0.5), 0.0);
        assert_eq!(part.chi(2.0), 0.0);
        assert_eq!(part.chi(1.0), 1.0);
        assert_relative_eq!(part.chi(2f64.sqrt()), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn partition_sum_examples() {
        for dim in [1, 2] {
            let part = partition(dim, 2.0);
            let k0 = part.params().k0;
            let along = |r: f64| {
                let mut xi = vec![0.0; dim];
                xi[0] = r;
                xi
            };
            assert_relative_eq!(part.partition_sum(&along(2f64.powi(k0 + 2))), 1.0, epsilon = 1e-10);
            assert_eq!(part.partition_sum(&along(2f64.powi(k0 - 2))), 0.0);
            assert_relative_eq!(part.partition_sum(&along(2f64.powi(k0 + 3))), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn partition_sum_dense_2d() {
        let part = partition(2, 2.0);
        let p = part.params();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let r = 2f64.powf(rng.random_range((p.k0 + 1) as f64..p.kmax as f64));
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s = part.partition_sum(&[r * th.cos(), r * th.sin()]);
            assert!((s - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn cell_cutoff_examples() {
        let part = partition(1, 2.0);
        let k = 10;
        let cell = part.cell(k, vec![3]);
        assert_eq!(part.cell_cutoff(&cell, &[2f64.powi(k - 1) * 0.99]), 0.0);
        // at the lattice center ν = 1, leaving η_k
        let l = (2f64.powi(k) * 2f64.sqrt() / part.r_k(k)).round() as i64;
        let cell = part.cell(k, vec![l]);
        let c = cell.center()[0];
        assert_relative_eq!(part.cell_cutoff(&cell, &[c]), part.eta(k, c), epsilon = 1e-15);
        // lattice overlap at a fixed ξ recovers η_k
        let xi = 1500.3;
        let s: f64 = part
            .enumerate_cells(k)
            .unwrap()
            .iter()
            .map(|c| part.cell_cutoff(c, &[xi]))
            .sum();
        assert_relative_eq!(s, part.eta(k, xi), epsilon = 1e-12);
    }

    #[test]
    fn cell_centers_sit_near_annulus() {
        for (dim, ks) in [(1, [13, 20]), (2, [24, 30])] {
            let part = Partition::new(LogParams::new(dim, 2.0, 1.0).unwrap().with_kmax(30).unwrap());
            for k in ks {
                for c in part.enumerate_cells(k).unwrap() {
                    let m = c.center_norm();
                    assert!(m >= 2f64.powi(k - 1) && m <= 2f64.powi(k + 2), "k={k} |c|={m}");
                }
            }
        }
        assert!(partition(1, 2.0).enumerate_cells(2).is_err());
    }

    fn fitted_exponent(part: &Partition<f64>, ks: &[i32]) -> f64 {
        let pts: Vec<(f64, f64)> = ks
            .iter()
            .map(|&k| ((k as f64).ln(), (part.cells_unchecked(k).len() as f64).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn cell_count_exponent() {
        let slope = fitted_exponent(&partition(1, 2.0), &[16, 32, 64]);
        assert!((0.85..=1.15).contains(&slope), "{slope}");
        let flat = fitted_exponent(&partition(1, 1.05), &[16, 32, 64]);
        assert!(flat.abs() < 0.2, "{flat}");
    }

    #[test]
    fn bounded_overlap() {
        let part = partition(1, 2.0);
        let cells = part.all_cells();
        let bound = (2.0 * 1.5 + 1.0) * 3.0;
        for i in 0..500 {
            let xi = 2f64.powf(4.0 + 9.0 * i as f64 / 499.0);
            let hits = cells.iter().filter(|c| part.cell_cutoff(c, &[xi]) > 1e-14).count();
            assert!(hits as f64 <= bound);
        }
    }

    fn band_field(grid: TorusGrid, lo: f64, hi: f64, seed: u64) -> Field<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spec = SpectralField::zeros(grid);
        for i in 0..grid.len() {
            let r: f64 = grid.frequency_norm(i);
            if r >= lo && r <= hi {
                spec.coeffs_mut()[i] =
                    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        spec.inverse()
    }

    #[test]
    fn projections_reconstruct_band_limited_fields() {
        for (dim, n, kmax) in [(1, 1 << 12, 9), (2, 256, 5)] {
            let params = LogParams::new(dim, 2.0, 1.0).unwrap();
            let params = LogParams { kmax, ..params };
            let part = Partition::new(params);
            let grid = TorusGrid::new(dim, n).unwrap();
            let k0 = params.k0;
            let f = band_field(grid, 2f64.powi(k0 + 1), 2f64.powi(kmax), 9);
            let spec = f.forward();
            let mut total = SpectralField::zeros(grid);
            for cell in part.all_cells() {
                total = total.add(&part.project(&spec, &cell).unwrap()).unwrap();
            }
            let err = total.inverse().sub(&f).unwrap().lp_norm(2.0).unwrap();
            assert!(err <= 1e-10 * f.lp_norm(2.0).unwrap(), "dim {dim}: {err}");
        }
    }

    #[test]
    fn projection_of_remote_tone_vanishes_and_contracts() {
        let part = partition(1, 2.0);
        let grid = TorusGrid::new(1, 1 << 14).unwrap();
        let cell = part.enumerate_cells(10).unwrap()[5].clone();
        let far = Field::<f64>::tone(grid, &[17]).forward();
        assert!(part.project(&far, &cell).unwrap().coeff_l2() < 1e-14);
        let f = band_field(grid, 500.0, 2000.0, 2).forward();
        let once = part.project(&f, &cell).unwrap();
        let twice = part.project(&once, &cell).unwrap();
        assert!(twice.coeff_l2() <= once.coeff_l2());
        let small = TorusGrid::new(1, 256).unwrap();
        assert!(part.project(&Field::tone(small, &[3]).forward(), &cell).is_err());
    }

    #[test]
    fn bessel_examples() {
        let part = partition(1, 2.0);
        let grid = TorusGrid::new(1, 1 << 12).unwrap();
        let k = 8;
        let zero = part.bessel_ratio(&Field::zeros(grid), k).unwrap();
        assert_eq!(zero.ratio, 0.0);
        let tone = part.bessel_ratio(&Field::tone(grid, &[300]), k).unwrap();
        assert!(tone.ratio.is_finite() && tone.ratio > 0.0 && tone.ratio <= 1.0 + 1e-9);
        let mut ratios = Vec::new();
        for k in [6, 7, 8, 9] {
            let f = band_field(grid, 2f64.powi(k), 2f64.powi(k + 1), k as u64);
            let r = part.bessel_ratio(&f, k).unwrap();
            assert_eq!(r.excluded, 0);
            ratios.push(r.ratio);
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 4.0, "{ratios:?}");
    }

    proptest! {
        #[test]
        fn nu_partition_of_unity_2d(x in -20.0f64..20.0, y in -20.0f64..20.0) {
            let b = BumpProfile::<f64>::new();
            let mut s = 0.0;
            for l0 in -22..=22 {
                for l1 in -22..=22 {
                    s += b.tensor(&[x - l0 as f64, y - l1 as f64]);
                }
            }
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }
}
