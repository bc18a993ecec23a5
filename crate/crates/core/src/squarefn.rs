//! Littlewood–Paley pieces `f * φ_t`, the robust kernels `K_t^λ` and the
//! square functions `g_log` and `g*`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LogParams;
use crate::grid::{Field, RealField, ScaleGrid, SpectralField, TorusGrid};
use crate::scalar::{lit, Scalar};
use crate::special::{hurwitz_zeta, integrate_gl16};

/// Radial profile `φ̂(r) = e · exp(-1/(1 - (log₂ r)²))`, supported in
/// `(1/2, 2)` with `φ̂(1) = 1`.
pub fn phi_hat<T: Scalar>(r: T) -> T {
    if r <= lit(0.5) || r >= lit(2.0) {
        return T::zero();
    }
    let x = r.log2();
    (T::one() - T::one() / (T::one() - x * x)).exp()
}

/// `∫_{ℝ^d} (1 + |u|)^{-dλ} du`.
pub fn kernel_mass<T: Scalar>(dim: usize, lambda: T) -> T {
    let one = T::one();
    let two = lit::<T>(2.0);
    match dim {
        1 => two / (lambda - one),
        _ => T::TAU() / ((two * lambda - two) * (two * lambda - one)),
    }
}

const IMAGES: i64 = 4;
/// Chebyshev nodes per axis for the two-dimensional exterior tail.
const TAIL_NODES: usize = 14;

/// `K_t^λ(z) = a^{-d} (1 + |z|/a)^{-dλ}` with `a = a_γ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustKernel<T> {
    pub dim: usize,
    pub t: T,
    pub lambda: T,
    pub aperture: T,
}

impl<T: Scalar> RobustKernel<T> {
    pub fn new(params: &LogParams<T>, t: T, lambda: T) -> Result<Self> {
        if !(lambda > T::one()) {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must exceed 1")));
        }
        Ok(Self {
            dim: params.dim,
            t,
            lambda,
            aperture: params.aperture(t)?,
        })
    }

    fn decay(&self) -> T {
        T::from_usize_lossy(self.dim) * self.lambda
    }

    /// `x^e`, by repeated multiplication when `e` is a small integer.
    fn pow(x: T, e: T) -> T {
        if e.fract() == T::zero() && e.abs() <= lit(64.0) {
            x.powi(e.to_i32().unwrap_or(0))
        } else {
            x.powf(e)
        }
    }

    /// Closed form at distance `|z|`.
    pub fn value(&self, z: T) -> T {
        self.aperture.powi(-(self.dim as i32)) * Self::pow(T::one() + z.abs() / self.aperture, -self.decay())
    }

    /// `∫_{ℝ^d} K = kernel_mass(d, λ)`, independent of `t`.
    pub fn l1(&self) -> T {
        kernel_mass(self.dim, self.lambda)
    }

    /// `Σ_{m ∈ ℤ^d} K(z + 2πm)` for a periodic offset `z ∈ [-π, π)^d`.
    ///
    /// In one dimension the image sums are Hurwitz zeta values; in two
    /// dimensions images with `|m_i| ≤ 4` are summed and the rest is replaced
    /// by the integral of `K` over the uncovered exterior.
    pub fn periodized(&self, z: &[T]) -> T {
        let a = self.aperture;
        let s = self.decay();
        let tau = T::TAU();
        match self.dim {
            1 => {
                let z = z[0].abs();
                let scale = (a / tau).powf(s);
                let q_plus = T::one() + (a + z) / tau;
                let q_minus = T::one() + (a - z) / tau;
                a.recip()
                    * ((T::one() + z / a).powf(-s)
                        + scale * (hurwitz_zeta(s, q_plus) + hurwitz_zeta(s, q_minus)))
            }
            _ => self.image_sum(z) + self.exterior_tail(z),
        }
    }

    fn image_sum(&self, z: &[T]) -> T {
        let tau = T::TAU();
        let mut sum = T::zero();
        for m0 in -IMAGES..=IMAGES {
            for m1 in -IMAGES..=IMAGES {
                let u0 = z[0] + tau * T::from_i64_lossy(m0);
                let u1 = z[1] + tau * T::from_i64_lossy(m1);
                sum = sum + self.value((u0 * u0 + u1 * u1).sqrt());
            }
        }
        sum
    }

    /// The images beyond `|m_i| ≤ IMAGES` tile the exterior of the square of
    /// half-side `(2·IMAGES + 1)π` centred at `z`; integrate `K` there in polar form.
    fn exterior_tail(&self, z: &[T]) -> T {
        let a = self.aperture;
        let s = self.decay();
        let tau = T::TAU();
        let half_side = T::from_i64_lossy(2 * IMAGES + 1) * T::PI();
        let radial_tail = |r: T| {
            let rho = r / a;
            Self::pow(T::one() + rho, lit::<T>(2.0) - s) / (s - lit(2.0))
                - Self::pow(T::one() + rho, T::one() - s) / (s - T::one())
        };
        let (lo, hi) = ([z[0] - half_side, z[1] - half_side], [z[0] + half_side, z[1] + half_side]);
        let exit = |theta: T| {
            let (c, sn) = (theta.cos(), theta.sin());
            let rx = if c > T::zero() { hi[0] / c } else { lo[0] / c };
            let ry = if sn > T::zero() { hi[1] / sn } else { lo[1] / sn };
            rx.abs().min(ry.abs())
        };
        let wrap = |x: T| if x < T::zero() { x + T::TAU() } else { x };
        let mut corners = [
            wrap(hi[1].atan2(hi[0])),
            wrap(hi[1].atan2(lo[0])),
            wrap(lo[1].atan2(lo[0])),
            wrap(lo[1].atan2(hi[0])),
        ];
        corners.sort_by(|x, y| x.partial_cmp(y).expect("finite corner angle"));
        let mut tail = T::zero();
        for i in 0..4 {
            let (t0, t1) = (corners[i], if i == 3 { corners[0] + T::TAU() } else { corners[i + 1] });
            tail = tail + integrate_gl16(t0, t1, |theta| radial_tail(exit(theta)));
        }
        tail / (tau * tau)
    }

    /// Periodized kernel sampled on `grid`.
    pub fn sample(&self, grid: &TorusGrid) -> RealField<T> {
        let h = grid.spacing::<T>();
        match grid.dim {
            1 => {
                // even in z: evaluate once per |offset|
                let half: Vec<T> = (0..=grid.n / 2)
                    .map(|j| self.periodized(&[h * T::from_usize_lossy(j)]))
                    .collect();
                let data = (0..grid.n)
                    .map(|i| half[grid.axis_offset(i).unsigned_abs() as usize])
                    .collect();
                RealField::new(*grid, data).expect("grid-sized kernel")
            }
            _ => {
                // invariant under coordinate reflections and the swap
                let n = grid.n;
                let m = n / 2;
                // the exterior tail is analytic on [0, π]²: interpolate it
                // from a Chebyshev tensor table
                let nodes = chebyshev_nodes::<T>(TAIL_NODES, T::PI());
                let table: Vec<T> = (0..TAIL_NODES * TAIL_NODES)
                    .map(|i| self.exterior_tail(&[nodes[i / TAIL_NODES], nodes[i % TAIL_NODES]]))
                    .collect();
                let basis: Vec<Vec<T>> = (0..=m)
                    .map(|a| lagrange_basis(&nodes, h * T::from_usize_lossy(a)))
                    .collect();
                let mut octant = vec![T::zero(); (m + 1) * (m + 1)];
                for a in 0..=m {
                    let row: Vec<T> = (0..TAIL_NODES)
                        .map(|j| (0..TAIL_NODES).fold(T::zero(), |acc, i| acc + basis[a][i] * table[i * TAIL_NODES + j]))
                        .collect();
                    for b in 0..=a {
                        let tail = row.iter().zip(&basis[b]).fold(T::zero(), |acc, (&r, &l)| acc + r * l);
                        let v = self.image_sum(&[h * T::from_usize_lossy(a), h * T::from_usize_lossy(b)]) + tail;
                        octant[a * (m + 1) + b] = v;
                        octant[b * (m + 1) + a] = v;
                    }
                }
                let data = (0..grid.len())
                    .map(|i| {
                        let [a, b] = grid.frequency(i);
                        octant[a.unsigned_abs() as usize * (m + 1) + b.unsigned_abs() as usize]
                    })
                    .collect();
                RealField::new(*grid, data).expect("grid-sized kernel")
            }
        }
    }

    /// Multiplier of `u ↦ Σ_y u(y) K_per(x - y) h^d` on the spectral side.
    fn convolution_multiplier(spec: &SpectralField<T>) -> Vec<T> {
        let factor = T::TAU().powi(spec.grid().dim as i32);
        spec.coeffs().iter().map(|c| c.re * factor).collect()
    }
}

/// First-kind Chebyshev nodes on `[0, len]`.
fn chebyshev_nodes<T: Scalar>(count: usize, len: T) -> Vec<T> {
    (0..count)
        .map(|i| {
            let theta = T::PI() * T::from_usize_lossy(2 * i + 1) / T::from_usize_lossy(2 * count);
            len * (T::one() - theta.cos()) / lit(2.0)
        })
        .collect()
}

/// Barycentric Lagrange basis at `x` for first-kind Chebyshev `nodes`.
fn lagrange_basis<T: Scalar>(nodes: &[T], x: T) -> Vec<T> {
    let count = nodes.len();
    if let Some(hit) = nodes.iter().position(|&xi| xi == x) {
        return (0..count).map(|i| if i == hit { T::one() } else { T::zero() }).collect();
    }
    let terms: Vec<T> = (0..count)
        .map(|i| {
            let theta = T::PI() * T::from_usize_lossy(2 * i + 1) / T::from_usize_lossy(2 * count);
            let w = if i % 2 == 0 { theta.sin() } else { -theta.sin() };
            w / (x - nodes[i])
        })
        .collect();
    let total = terms.iter().fold(T::zero(), |a, &b| a + b);
    terms.into_iter().map(|v| v / total).collect()
}

/// Result of the kernel self-convolution probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// `max_z (K * K)(z) / K(z)` over evaluated points.
    pub constant: f64,
    pub evaluated: usize,
    /// Points where `K * K` sits below the transform's noise floor.
    pub excluded: usize,
}

/// Relative level below which `K * K` is dominated by transform round-off.
const CONVOLUTION_NOISE_FLOOR: f64 = 1e-9;

/// Empirical constant of `K_t^λ * K_t^λ ≤ C K_t^λ` on the torus.
pub fn kernel_conv_stability<T: Scalar>(
    kernel: &RobustKernel<T>,
    grid: &TorusGrid,
) -> StabilityReport {
    let k = kernel.sample(grid);
    let spec = k.forward();
    let mult = RobustKernel::convolution_multiplier(&spec);
    let conv = spec
        .apply_mask(&mult)
        .expect("grid-sized multiplier")
        .inverse();
    let kk: Vec<T> = conv.samples().iter().map(|z| z.re).collect();
    let peak = kk.iter().copied().fold(T::zero(), T::max);
    let floor = peak * lit(CONVOLUTION_NOISE_FLOOR);
    let mut constant = T::zero();
    let (mut evaluated, mut excluded) = (0, 0);
    for (&c, &kv) in kk.iter().zip(k.values()) {
        if c < floor {
            excluded += 1;
            continue;
        }
        evaluated += 1;
        constant = constant.max(c / kv);
    }
    StabilityReport {
        constant: constant.to_f64_lossy(),
        evaluated,
        excluded,
    }
}

/// A square function on the grid together with its quadrature metadata.
#[derive(Debug, Clone)]
pub struct SquareOutput<T> {
    /// Pointwise square of the square function.
    pub squared: RealField<T>,
    pub meta: SquareMeta,
}

impl<T: Scalar> SquareOutput<T> {
    pub fn values(&self) -> RealField<T> {
        self.squared.map(|v| v.max(T::zero()).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareMeta {
    /// Largest and smallest scale of the quadrature.
    pub t_max: f64,
    pub t_min: f64,
    /// Scales that actually met the input spectrum.
    pub active_scales: usize,
    /// Scales whose aperture is below one grid cell.
    pub degenerate_scales: usize,
    /// Largest relative gap between the grid-point count of a ball and its
    /// volume `|B(0, a)| / h^d`; the count is what normalizes `g_log`.
    pub normalization_gap: f64,
}

type KernelKey = (usize, u64);

/// Square-function engine for one grid, parameter bundle and scale grid.
/// Kernel spectra are computed on first use and cached.
#[derive(Debug)]
pub struct SquareFunctions<T> {
    params: LogParams<T>,
    grid: TorusGrid,
    scales: ScaleGrid<T>,
    apertures: Vec<T>,
    kernels: Mutex<HashMap<KernelKey, Arc<Vec<T>>>>,
    balls: Mutex<HashMap<usize, Arc<Vec<T>>>>,
}

impl<T: Scalar> SquareFunctions<T> {
    pub fn new(params: LogParams<T>, grid: TorusGrid, scales: ScaleGrid<T>) -> Result<Self> {
        if params.dim != grid.dim {
            return Err(Error::GridMismatch);
        }
        let limit = T::from_usize_lossy(grid.n) / lit(4.0);
        let mut apertures = Vec::with_capacity(scales.len());
        for &(t, _) in &scales.entries {
            if !(t.recip() < limit) {
                return Err(Error::Truncation {
                    requested: (-t.ln()).to_f64_lossy(),
                    limit: limit.ln().to_f64_lossy(),
                });
            }
            apertures.push(params.aperture(t)?);
        }
        Ok(Self {
            params,
            grid,
            scales,
            apertures,
            kernels: Mutex::new(HashMap::new()),
            balls: Mutex::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> &LogParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn scales(&self) -> &ScaleGrid<T> {
        &self.scales
    }

    /// `f * φ_t` for the `j`-th scale.
    pub fn lp_piece(&self, f: &SpectralField<T>, j: usize) -> Result<Field<T>> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let t = self.scales.entries[j].0;
        Ok(self.masked_piece(f, t).inverse())
    }

    fn masked_piece(&self, f: &SpectralField<T>, t: T) -> SpectralField<T> {
        let mut out = SpectralField::zeros(self.grid);
        let (lo, hi) = (lit::<T>(0.5) / t, lit::<T>(2.0) / t);
        let kmax = hi.ceil().to_i64().unwrap_or(0);
        let src = f.coeffs();
        let dst = out.coeffs_mut();
        let mut visit = |freq: [i64; 2]| {
            let r = T::from_i64_lossy(freq[0] * freq[0] + freq[1] * freq[1]).sqrt();
            if r > lo && r < hi {
                if let Some(bin) = self.grid.bin(&freq[..self.grid.dim]) {
                    dst[bin] = src[bin] * phi_hat(t * r);
                }
            }
        };
        match self.grid.dim {
            1 => {
                for k in -kmax..=kmax {
                    visit([k, 0]);
                }
            }
            _ => {
                for a in -kmax..=kmax {
                    for b in -kmax..=kmax {
                        visit([a, b]);
                    }
                }
            }
        }
        out
    }

    /// Indices of scales whose `φ̂(t·)` support meets `(lo, hi)`.
    fn active(&self, f: &SpectralField<T>) -> Vec<usize> {
        let Some((lo, hi)) = f.support_radii(T::zero()) else {
            return Vec::new();
        };
        (0..self.scales.len())
            .filter(|&j| {
                let t = self.scales.entries[j].0;
                lit::<T>(2.0) / t > lo && lit::<T>(0.5) / t < hi
            })
            .collect()
    }

    fn meta(&self, active: usize) -> SquareMeta {
        let h = self.grid.spacing::<T>();
        SquareMeta {
            t_max: self.scales.t_max().to_f64_lossy(),
            t_min: self.scales.t_min().to_f64_lossy(),
            active_scales: active,
            degenerate_scales: self.apertures.iter().filter(|&&a| a < h).count(),
            normalization_gap: self
                .apertures
                .iter()
                .map(|&a| {
                    let rho = (a / h).to_f64_lossy();
                    let (count, volume) = match self.grid.dim {
                        1 => ((2.0 * rho.floor() + 1.0), 2.0 * rho),
                        _ => (lattice_disk_count(rho) as f64, std::f64::consts::PI * rho * rho),
                    };
                    (count / volume - 1.0).abs()
                })
                .fold(0.0, f64::max),
        }
    }

    fn log_weight(&self, j: usize, beta: T) -> T {
        let (t, w) = self.scales.entries[j];
        if beta == T::zero() {
            w
        } else {
            w * (-t.ln()).powf(lit::<T>(2.0) * beta)
        }
    }

    /// Pointwise `g_log(f)²`: ball means of `|f * φ_t|²` over `|y - x| ≤ a_γ(t)`,
    /// normalized by the number of grid points in the ball.
    pub fn g_log_sq(&self, f: &SpectralField<T>, beta: T) -> Result<SquareOutput<T>> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let active = self.active(f);
        let mut acc = vec![T::zero(); self.grid.len()];
        let mut spectral_acc: Option<Vec<Complex<T>>> = None;
        for &j in &active {
            let weight = self.log_weight(j, beta);
            let piece = self.masked_piece(f, self.scales.entries[j].0).inverse().abs_sq();
            match self.grid.dim {
                1 => {
                    let radius = self.ball_cells(j);
                    ball_mean_1d_accumulate(piece.values(), radius, weight, &mut acc);
                }
                _ => {
                    let mult = self.ball_multiplier(j);
                    let spec = piece.forward();
                    let sacc = spectral_acc
                        .get_or_insert_with(|| vec![Complex::new(T::zero(), T::zero()); self.grid.len()]);
                    for ((s, c), m) in sacc.iter_mut().zip(spec.coeffs()).zip(mult.iter()) {
                        *s = *s + *c * (*m * weight);
                    }
                }
            }
        }
        if let Some(sacc) = spectral_acc {
            let field = SpectralField::new(self.grid, sacc)?.inverse();
            for (a, z) in acc.iter_mut().zip(field.samples()) {
                *a = *a + z.re.max(T::zero());
            }
        }
        Ok(SquareOutput {
            squared: RealField::new(self.grid, acc)?,
            meta: self.meta(active.len()),
        })
    }

    pub fn g_log(&self, f: &SpectralField<T>, beta: T) -> Result<RealField<T>> {
        Ok(self.g_log_sq(f, beta)?.values())
    }

    /// Pointwise `g*(f)²` with kernel decay `λ`.
    pub fn g_star_sq(&self, f: &SpectralField<T>, beta: T, lambda: T) -> Result<SquareOutput<T>> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if !(lambda > T::one()) {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must exceed 1")));
        }
        let active = self.active(f);
        let mut sacc = vec![Complex::new(T::zero(), T::zero()); self.grid.len()];
        for &j in &active {
            let weight = self.log_weight(j, beta);
            let piece = self.masked_piece(f, self.scales.entries[j].0).inverse().abs_sq();
            let spec = piece.forward();
            let mult = self.kernel_multiplier(j, lambda)?;
            for ((s, c), m) in sacc.iter_mut().zip(spec.coeffs()).zip(mult.iter()) {
                *s = *s + *c * (*m * weight);
            }
        }
        let field = SpectralField::new(self.grid, sacc)?.inverse();
        let squared = field.samples().iter().map(|z| z.re.max(T::zero())).collect();
        Ok(SquareOutput {
            squared: RealField::new(self.grid, squared)?,
            meta: self.meta(active.len()),
        })
    }

    pub fn g_star(&self, f: &SpectralField<T>, beta: T, lambda: T) -> Result<RealField<T>> {
        Ok(self.g_star_sq(f, beta, lambda)?.values())
    }

    /// Ball radius of scale `j` in whole grid cells.
    fn ball_cells(&self, j: usize) -> usize {
        (self.apertures[j] / self.grid.spacing::<T>())
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.grid.n / 2)
    }

    fn ball_multiplier(&self, j: usize) -> Arc<Vec<T>> {
        let mut cache = self.balls.lock().expect("ball cache poisoned");
        cache
            .entry(j)
            .or_insert_with(|| {
                let a = self.apertures[j];
                let indicator: Vec<T> = (0..self.grid.len())
                    .map(|i| {
                        if self.grid.distance_to_origin::<T>(i) <= a {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                    .collect();
                let count = indicator.iter().copied().sum::<T>().max(T::one());
                let spec = RealField::new(self.grid, indicator)
                    .expect("grid-sized indicator")
                    .forward();
                let n = T::from_usize_lossy(self.grid.len());
                Arc::new(spec.coeffs().iter().map(|c| c.re * n / count).collect())
            })
            .clone()
    }

    fn kernel_multiplier(&self, j: usize, lambda: T) -> Result<Arc<Vec<T>>> {
        let key = (j, lambda.to_f64_lossy().to_bits());
        if let Some(m) = self.kernels.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(m.clone());
        }
        let kernel = RobustKernel::new(&self.params, self.scales.entries[j].0, lambda)?;
        let mult = Arc::new(RobustKernel::convolution_multiplier(&kernel.sample(&self.grid).forward()));
        self.kernels
            .lock()
            .expect("kernel cache poisoned")
            .insert(key, mult.clone());
        Ok(mult)
    }

    /// Apertures `a_γ(t_j)` of the scale grid.
    pub fn apertures(&self) -> &[T] {
        &self.apertures
    }
}

fn lattice_disk_count(rho: f64) -> usize {
    let r = rho.floor() as i64;
    (-r..=r)
        .map(|dy| {
            let rem = rho * rho - (dy * dy) as f64;
            2 * rem.max(0.0).sqrt().floor() as usize + 1
        })
        .sum()
}

/// `acc[x] += weight · mean_{|y - x| ≤ radius} v[y]` on the circle.
fn ball_mean_1d_accumulate<T: Scalar>(v: &[T], radius: usize, weight: T, acc: &mut [T]) {
    let n = v.len();
    if radius == 0 {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = *a + weight * x;
        }
        return;
    }
    let width = 2 * radius + 1;
    let scale = weight / T::from_usize_lossy(width.min(n));
    if width >= n {
        let total: T = v.iter().copied().sum();
        for a in acc.iter_mut() {
            *a = *a + weight * total / T::from_usize_lossy(n);
        }
        return;
    }
    let mut prefix = Vec::with_capacity(n + 1);
    let mut running = T::zero();
    prefix.push(running);
    for &x in v {
        running = running + x;
        prefix.push(running);
    }
    let window = |lo: isize, hi: isize| -> T {
        // inclusive circular window [lo, hi]
        let n_i = n as isize;
        let lo_w = lo.rem_euclid(n_i) as usize;
        let hi_w = hi.rem_euclid(n_i) as usize;
        if lo_w <= hi_w {
            prefix[hi_w + 1] - prefix[lo_w]
        } else {
            prefix[n] - prefix[lo_w] + prefix[hi_w + 1]
        }
    };
    for (x, a) in acc.iter_mut().enumerate() {
        let s = window(x as isize - radius as isize, x as isize + radius as isize);
        *a = *a + scale * s.max(T::zero());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::default_du;
    use crate::special::hurwitz_zeta;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(dim: usize, n: usize) -> SquareFunctions<f64> {
        let params = LogParams::new(dim, 2.0, 1.0).unwrap();
        let grid = TorusGrid::new(dim, n).unwrap();
        let scales = ScaleGrid::with_step(&params, &grid, default_du()).unwrap();
        SquareFunctions::new(params, grid, scales).unwrap()
    }

    fn band(grid: TorusGrid, lo: f64, hi: f64, seed: u64) -> SpectralField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = SpectralField::zeros(grid);
        for i in 0..grid.len() {
            let r: f64 = grid.frequency_norm(i);
            if r >= lo && r <= hi {
                s.coeffs_mut()[i] = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        s
    }

    #[test]
    fn phi_profile() {
        assert_eq!(phi_hat(1.0), 1.0);
        assert_eq!(phi_hat(0.5), 0.0);
        assert_eq!(phi_hat(2.0), 0.0);
        assert!(phi_hat(0.51) > 0.0 && phi_hat(1.99) > 0.0);
        assert_relative_eq!(phi_hat(1.5), phi_hat(1.0 / 1.5), epsilon = 1e-15);
    }

    #[test]
    fn kernel_closed_forms() {
        let p = LogParams::new(1, 2.0, 0.0).unwrap();
        let k = RobustKernel::new(&p, 1e-3, 2.0).unwrap();
        let a = k.aperture;
        assert_relative_eq!(k.value(0.0), 1.0 / a);
        assert_relative_eq!(k.value(a), 0.25 / a, max_relative = 1e-14);
        assert_relative_eq!(kernel_mass(1, 2.0), 2.0);
        assert!(RobustKernel::new(&p, 1e-3, 1.0).is_err());
        // quadrature of K over one period
        let m = 1 << 20;
        let h = std::f64::consts::TAU / m as f64;
        let q: f64 = (0..m)
            .map(|i| k.value(-std::f64::consts::PI + (i as f64 + 0.5) * h) * h)
            .sum();
        assert!((q - 2.0).abs() / 2.0 < 0.01, "{q}");
    }

    #[test]
    fn periodization_matches_brute_force_images() {
        let p = LogParams::new(1, 2.0, 0.0).unwrap();
        for &lambda in &[1.5, 2.0, 4.0] {
            let k = RobustKernel::new(&p, 5e-3, lambda).unwrap();
            for &z in &[0.0, 0.3, -1.7, 3.1] {
                let tau = std::f64::consts::TAU;
                let mut brute = k.value(z);
                // images summed far out plus an integral tail
                let mm = 200_000;
                for m in 1..=mm {
                    brute += k.value(z + tau * m as f64) + k.value(z - tau * m as f64);
                }
                let s = lambda;
                let edge = tau * (mm as f64 + 0.5);
                let tail = |u: f64| (1.0 + u / k.aperture).powf(1.0 - s) / (s - 1.0) / tau;
                brute += tail(edge + z) + tail(edge - z);
                let got = k.periodized(&[z]);
                assert!((got - brute).abs() / brute < 1e-6, "λ={lambda} z={z}: {got} vs {brute}");
            }
        }
    }

    #[test]
    fn periodization_2d_is_close_to_wider_image_sum() {
        let p = LogParams::new(2, 2.0, 0.0).unwrap();
        let k = RobustKernel::new(&p, 5e-3, 2.0).unwrap();
        let tau = std::f64::consts::TAU;
        for z in [[0.0, 0.0], [1.0, -2.0], [3.0, 3.0]] {
            let mut brute = 0.0;
            for m0 in -60i64..=60 {
                for m1 in -60i64..=60 {
                    let u0 = z[0] + tau * m0 as f64;
                    let u1 = z[1] + tau * m1 as f64;
                    brute += k.value((u0 * u0 + u1 * u1).sqrt());
                }
            }
            let got = k.periodized(&z);
            assert!((got - brute).abs() / brute < 1e-3, "{z:?}: {got} vs {brute}");
        }
    }

    #[test]
    fn sampled_2d_kernel_matches_pointwise_periodization() {
        let p = LogParams::new(2, 2.0, 0.0).unwrap();
        let grid = TorusGrid::new(2, 64).unwrap();
        let h = grid.spacing::<f64>();
        for lambda in [1.5, 4.0] {
            let k = RobustKernel::new(&p, 1e-2, lambda).unwrap();
            let sampled = k.sample(&grid);
            for (i, &v) in sampled.values().iter().enumerate() {
                let [a, b] = grid.frequency(i);
                let direct = k.periodized(&[h * a as f64, h * b as f64]);
                assert!((v - direct).abs() <= 1e-12 * direct, "λ={lambda} ({a},{b}): {v} vs {direct}");
            }
        }
    }

    #[test]
    fn lp_pieces_of_tones() {
        let sf = setup(1, 1 << 12);
        let xi = 300;
        let tone = Field::<f64>::tone(*sf.grid(), &[xi]).forward();
        for j in [0, 10, 30] {
            let t = sf.scales().entries[j].0;
            let piece = sf.lp_piece(&tone, j).unwrap();
            let expect = phi_hat(t * xi as f64);
            assert!(piece.samples().iter().all(|z| (z.norm() - expect).abs() < 1e-12));
        }
        let low = Field::<f64>::tone(*sf.grid(), &[3]).forward();
        for j in 0..sf.scales().len() {
            assert!(sf.lp_piece(&low, j).unwrap().lp_norm(2.0).unwrap() < 1e-13);
        }
    }

    #[test]
    fn lp_energy_bounded_by_profile_constant() {
        let sf = setup(1, 1 << 12);
        let c_phi = (0..20_000)
            .map(|i| {
                let r = 2f64.powf(2.0 + 9.0 * i as f64 / 19_999.0);
                sf.scales()
                    .entries
                    .iter()
                    .map(|&(t, w)| w * phi_hat(t * r).powi(2))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let f = band(*sf.grid(), 40.0, 900.0, 3);
        let total: f64 = (0..sf.scales().len())
            .map(|j| {
                let w = sf.scales().entries[j].1;
                w * sf.lp_piece(&f, j).unwrap().lp_norm(2.0).unwrap().powi(2)
            })
            .sum();
        assert!(total <= c_phi * f.l2_norm().powi(2) * (1.0 + 1e-12));
    }

    /// Σ_j w_j φ̂(t_j ξ)² (log 1/t_j)^{2β}, the tone value of g_log².
    fn tone_oracle(sf: &SquareFunctions<f64>, xi: f64, beta: f64, mass: &dyn Fn(f64) -> f64) -> f64 {
        sf.scales()
            .entries
            .iter()
            .map(|&(t, w)| w * phi_hat(t * xi).powi(2) * (-t.ln()).powf(2.0 * beta) * mass(t))
            .sum()
    }

    #[test]
    fn g_log_of_tones_matches_scalar_quadrature() {
        let sf = setup(1, 1 << 12);
        let xi = 1 << (sf.params().k0 + 4);
        let tone = Field::<f64>::tone(*sf.grid(), &[xi]).forward();
        for beta in [0.0, 1.0] {
            let g2 = sf.g_log_sq(&tone, beta).unwrap().squared;
            let expect = tone_oracle(&sf, xi as f64, beta, &|_| 1.0);
            assert!(g2.values().iter().all(|v| (v - expect).abs() <= 1e-10 * expect));
        }
        let g0 = sf.g_log(&tone, 0.0).unwrap().values()[0];
        let g1 = sf.g_log(&tone, 1.0).unwrap().values()[0];
        let us: Vec<f64> = sf
            .scales()
            .entries
            .iter()
            .filter(|e| phi_hat(e.0 * xi as f64) > 0.0)
            .map(|e| -e.0.ln())
            .collect();
        let (lo, hi) = (us.iter().cloned().fold(f64::INFINITY, f64::min), us.iter().cloned().fold(0.0, f64::max));
        assert!(g1 / g0 >= lo && g1 / g0 <= hi);
        assert!(sf.g_log(&SpectralField::zeros(*sf.grid()), 1.0).unwrap().max() == 0.0);
    }

    #[test]
    fn g_star_of_tones_matches_scalar_quadrature() {
        let sf = setup(1, 1 << 12);
        let h = sf.grid().spacing::<f64>();
        let xi = 1 << (sf.params().k0 + 4);
        let tone = Field::<f64>::tone(*sf.grid(), &[xi]).forward();
        for lambda in [1.5, 2.0, 4.0] {
            let s = lambda;
            // lattice mass h Σ_m K(mh) = (h/a)[1 + 2 (h/a)^{-s} ζ(s, 1 + a/h)]
            let params = *sf.params();
            let mass = |t: f64| {
                let a = params.aperture(t).unwrap();
                (h / a) * (1.0 + 2.0 * (h / a).powf(-s) * hurwitz_zeta(s, 1.0 + a / h))
            };
            let expect = tone_oracle(&sf, xi as f64, 1.0, &mass);
            let g2 = sf.g_star_sq(&tone, 1.0, lambda).unwrap().squared;
            assert!(
                g2.values().iter().all(|v| (v - expect).abs() <= 1e-10 * expect),
                "λ={lambda}: {} vs {expect}",
                g2.values()[0]
            );
        }
    }

    #[test]
    fn domination_and_homogeneity() {
        for (dim, n) in [(1, 1 << 12), (2, 512)] {
            let sf = setup(dim, n);
            let k0 = sf.params().k0;
            let f = band(*sf.grid(), 2f64.powi(k0 + 1), n as f64 / 5.0, 7);
            let lambda = sf.params().lambda;
            let gl = sf.g_log(&f, 1.0).unwrap();
            let gs = sf.g_star(&f, 1.0, lambda).unwrap();
            let c = 2f64.powf(dim as f64 * lambda / 2.0);
            for (a, b) in gl.values().iter().zip(gs.values()) {
                assert!(*a <= c * b * (1.0 + 1e-9), "dim {dim}: {a} vs {b}");
            }
            let alpha = Complex::new(-1.5, 2.0);
            let scaled = f.apply_complex_mask(&vec![alpha; f.coeffs().len()]).unwrap();
            let gl2 = sf.g_log(&scaled, 1.0).unwrap();
            let gs2 = sf.g_star(&scaled, 1.0, lambda).unwrap();
            let (ml, ms) = (gl.max(), gs.max());
            for i in 0..gl.values().len() {
                assert!((gl2.values()[i] - 2.5 * gl.values()[i]).abs() <= 1e-12 * 2.5 * ml);
                assert!((gs2.values()[i] - 2.5 * gs.values()[i]).abs() <= 1e-12 * 2.5 * ms);
            }
        }
    }

    #[test]
    fn pieces_vanish_off_their_annulus() {
        let sf = setup(1, 1 << 12);
        let f = band(*sf.grid(), 100.0, 130.0, 1);
        for j in 0..sf.scales().len() {
            let t = sf.scales().entries[j].0;
            let norm = sf.lp_piece(&f, j).unwrap().lp_norm(2.0).unwrap();
            if 2.0 / t <= 100.0 || 0.5 / t >= 130.0 {
                assert_eq!(norm, 0.0);
            }
        }
    }

    #[test]
    fn stability_constant_behaviour() {
        let p = LogParams::new(1, 2.0, 0.0).unwrap();
        let g1 = TorusGrid::new(1, 1 << 12).unwrap();
        let g2 = TorusGrid::new(1, 1 << 13).unwrap();
        let scales = ScaleGrid::with_step(&p, &g1, 0.5).unwrap();
        let mut by_lambda = Vec::new();
        for lambda in [1.5, 2.0, 4.0] {
            let consts: Vec<f64> = scales
                .entries
                .iter()
                .map(|&(t, _)| {
                    let k = RobustKernel::new(&p, t, lambda).unwrap();
                    let a = kernel_conv_stability(&k, &g1);
                    let b = kernel_conv_stability(&k, &g2);
                    assert!((a.constant / b.constant - 1.0).abs() <= 0.1);
                    a.constant
                })
                .collect();
            let max = consts.iter().cloned().fold(0.0, f64::max);
            let min = consts.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(max.is_finite() && max / min <= 2.0, "λ={lambda}: {consts:?}");
            assert!((1.0..=50.0).contains(&max) || lambda != 2.0);
            by_lambda.push(max);
        }
        assert!(by_lambda[2] <= by_lambda[0]);
    }
}
