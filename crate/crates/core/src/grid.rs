//! Periodic sampling grid on the torus `[0, 2π)^d`, spectral transforms,
//! norms and the log-uniform scale quadrature.
//!
//! Spectral coefficients are Fourier-series coefficients,
//! `c_ξ = (2π)^{-d} ∫ f(x) e^{-iξ·x} dx`, so a unit tone has coefficient 1 and
//! `‖f‖_{L²} = (2π)^{d/2} ‖c‖_{ℓ²}`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LogParams;
use crate::scalar::{lit, Scalar};

/// The torus `[0, 2π)^d` sampled with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    pub dim: usize,
    pub n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidParams(format!("dimension {dim} not in {{1, 2}}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParams(format!("n = {n} must be a power of two >= 8")));
        }
        Ok(Self { dim, n })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial step `2π / n`.
    pub fn spacing<T: Scalar>(&self) -> T {
        T::TAU() / T::from_usize_lossy(self.n)
    }

    /// Volume element `(2π / n)^d` of the Riemann sums.
    pub fn cell_volume<T: Scalar>(&self) -> T {
        self.spacing::<T>().powi(self.dim as i32)
    }

    /// Largest resolvable frequency magnitude per axis.
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Largest annulus `k` whose support `[2^{k-1}, 2^{k+2}]` stays below Nyquist.
    pub fn max_annulus(&self) -> i32 {
        self.n.trailing_zeros() as i32 - 3
    }

    /// Signed integer frequency of FFT bin `i` along one axis.
    #[inline]
    pub fn axis_frequency(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Bin index of the signed frequency `k`, if resolvable.
    pub fn axis_bin(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            return None;
        }
        Some(k.rem_euclid(self.n as i64) as usize)
    }

    /// Integer frequency vector of flat bin `index`.
    pub fn frequency(&self, index: usize) -> [i64; 2] {
        match self.dim {
            1 => [self.axis_frequency(index), 0],
            _ => [
                self.axis_frequency(index / self.n),
                self.axis_frequency(index % self.n),
            ],
        }
    }

    /// Flat bin index of a frequency vector, if resolvable.
    pub fn bin(&self, freq: &[i64]) -> Option<usize> {
        match self.dim {
            1 => self.axis_bin(freq[0]),
            _ => Some(self.axis_bin(freq[0])? * self.n + self.axis_bin(freq[1])?),
        }
    }

    pub fn frequency_norm<T: Scalar>(&self, index: usize) -> T {
        let [a, b] = self.frequency(index);
        T::from_i64_lossy(a * a + b * b).sqrt()
    }

    /// Grid point of flat index `index`, `x_j = 2π j / n` per axis.
    pub fn point<T: Scalar>(&self, index: usize) -> [T; 2] {
        let h = self.spacing::<T>();
        match self.dim {
            1 => [h * T::from_usize_lossy(index), T::zero()],
            _ => [
                h * T::from_usize_lossy(index / self.n),
                h * T::from_usize_lossy(index % self.n),
            ],
        }
    }

    /// Signed lattice offset `j` along one axis, wrapped into `[-n/2, n/2)`.
    #[inline]
    pub fn axis_offset(&self, i: usize) -> i64 {
        self.axis_frequency(i)
    }

    /// Periodic distance from grid point `index` to the origin.
    pub fn distance_to_origin<T: Scalar>(&self, index: usize) -> T {
        let h = self.spacing::<T>();
        let [a, b] = self.frequency(index);
        h * T::from_i64_lossy(a * a + b * b).sqrt()
    }

    /// Radial frequency mask `m(|ξ|)` over every bin.
    pub fn radial_mask<T: Scalar>(&self, m: impl Fn(T) -> T) -> Vec<T> {
        (0..self.len()).map(|i| m(self.frequency_norm(i))).collect()
    }

    /// Complex radial frequency mask.
    pub fn radial_mask_complex<T: Scalar>(
        &self,
        m: impl Fn(T) -> Complex<T>,
    ) -> Vec<Complex<T>> {
        (0..self.len()).map(|i| m(self.frequency_norm(i))).collect()
    }
}

fn zero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// In-place unnormalized transform of a row-major array on `grid`.
fn transform<T: Scalar>(data: &mut [Complex<T>], grid: &TorusGrid, inverse: bool) {
    let n = grid.n;
    let fft = {
        let mut planner = T::planner().lock().expect("fft planner poisoned");
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };
    let mut scratch = vec![zero(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    if grid.dim == 2 {
        transpose_square(data, n);
        fft.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }
}

fn transpose_square<X: Copy>(data: &mut [X], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Complex samples on a torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: TorusGrid,
    data: Vec<Complex<T>>,
}

/// Real samples on a torus grid (weights, square functions, maximal functions).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField<T> {
    grid: TorusGrid,
    data: Vec<T>,
}

/// Fourier-series coefficients indexed by FFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    grid: TorusGrid,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> Field<T> {
    pub fn new(grid: TorusGrid, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("field contains non-finite samples".into()));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            data: vec![zero(); grid.len()],
        }
    }

    /// Sample `f` at every grid point.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([T; 2]) -> Complex<T>) -> Self {
        Self {
            grid,
            data: (0..grid.len()).map(|i| f(grid.point(i))).collect(),
        }
    }

    /// `e^{i ξ·x}` for an integer frequency vector.
    pub fn tone(grid: TorusGrid, freq: &[i64]) -> Self {
        let (a, b) = (freq[0], freq.get(1).copied().unwrap_or(0));
        let n = grid.n as i64;
        let step = T::TAU() / T::from_usize_lossy(grid.n);
        let data = (0..grid.len())
            .map(|i| {
                let [j0, j1] = match grid.dim {
                    1 => [i as i64, 0],
                    _ => [(i / grid.n) as i64, (i % grid.n) as i64],
                };
                // reduce the phase exactly in integers before scaling
                let phase = (a * j0 + b * j1).rem_euclid(n);
                Complex::from_polar(T::one(), step * T::from_i64_lossy(phase))
            })
            .collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn forward(&self) -> SpectralField<T> {
        let mut coeffs = self.data.clone();
        transform(&mut coeffs, &self.grid, false);
        let scale = T::one() / T::from_usize_lossy(self.grid.len());
        for c in &mut coeffs {
            *c = *c * scale;
        }
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn abs_sq(&self) -> RealField<T> {
        RealField {
            grid: self.grid,
            data: self.data.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn abs(&self) -> RealField<T> {
        RealField {
            grid: self.grid,
            data: self.data.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn scale(&self, a: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&z| z * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Riemann-sum `L^p` norm; `p = ∞` gives the max norm.
    pub fn lp_norm(&self, p: T) -> Result<T> {
        lp_norm_of(self.data.iter().map(|z| z.norm()), &self.grid, p)
    }

    /// `Σ |f|² w (2π/n)^d`.
    pub fn weighted_l2(&self, w: &RealField<T>) -> Result<T> {
        check_grid(&self.grid, &w.grid)?;
        w.check_nonnegative()?;
        let sum: T = self
            .data
            .iter()
            .zip(&w.data)
            .map(|(z, &wi)| z.norm_sqr() * wi)
            .sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// Periodic convolution `∫ f(y) g(x - y) dy` through the transform.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        let a = self.forward();
        let b = other.forward();
        let factor = T::TAU().powi(self.grid.dim as i32);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| x * y * factor)
            .collect();
        Ok(SpectralField {
            grid: self.grid,
            coeffs,
        }
        .inverse())
    }

    /// Write little-endian complex64 samples to `path` and a JSON descriptor
    /// to `path` with extension `.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.save_as(path, FieldDtype::Complex64)
    }

    pub fn save_as(&self, path: &Path, dtype: FieldDtype) -> Result<()> {
        let header = FieldHeader {
            dim: self.grid.dim,
            n: self.grid.n,
            dtype,
        };
        std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&header)?)?;
        let mut out = BufWriter::new(File::create(path)?);
        for z in &self.data {
            match dtype {
                FieldDtype::Complex64 => {
                    out.write_all(&(z.re.to_f64_lossy() as f32).to_le_bytes())?;
                    out.write_all(&(z.im.to_f64_lossy() as f32).to_le_bytes())?;
                }
                FieldDtype::Complex128 => {
                    out.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
                    out.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let header: FieldHeader = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
        let grid = TorusGrid::new(header.dim, header.n)
            .map_err(|e| Error::FieldFormat(e.to_string()))?;
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        let width = match header.dtype {
            FieldDtype::Complex64 => 8,
            FieldDtype::Complex128 => 16,
        };
        if bytes.len() != grid.len() * width {
            return Err(Error::FieldFormat(format!(
                "expected {} bytes, found {}",
                grid.len() * width,
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(width)
            .map(|c| {
                let (re, im) = match header.dtype {
                    FieldDtype::Complex64 => (
                        f32::from_le_bytes(c[0..4].try_into().unwrap()) as f64,
                        f32::from_le_bytes(c[4..8].try_into().unwrap()) as f64,
                    ),
                    FieldDtype::Complex128 => (
                        f64::from_le_bytes(c[0..8].try_into().unwrap()),
                        f64::from_le_bytes(c[8..16].try_into().unwrap()),
                    ),
                };
                Complex::new(lit(re), lit(im))
            })
            .collect();
        Field::new(grid, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldDtype {
    Complex64,
    Complex128,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldHeader {
    dim: usize,
    n: usize,
    dtype: FieldDtype,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn check_grid(a: &TorusGrid, b: &TorusGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

fn lp_norm_of<T: Scalar>(
    values: impl Iterator<Item = T>,
    grid: &TorusGrid,
    p: T,
) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::Domain {
            what: "p",
            value: p.to_f64_lossy(),
            domain: "[1, inf]",
        });
    }
    if p.is_infinite() {
        return Ok(values.fold(T::zero(), T::max));
    }
    let sum: T = values.map(|v| v.powf(p)).sum();
    Ok((sum * grid.cell_volume()).powf(p.recip()))
}

impl<T: Scalar> RealField<T> {
    pub fn new(grid: TorusGrid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: data.len(),
            });
        }
        Ok(Self { grid, data })
    }

    pub fn constant(grid: TorusGrid, c: T) -> Self {
        Self {
            grid,
            data: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn([T; 2]) -> T) -> Self {
        Self {
            grid,
            data: (0..grid.len()).map(|i| f(grid.point(i))).collect(),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        match self.data.iter().position(|&v| !(v >= T::zero())) {
            Some(index) => Err(Error::NegativeWeight {
                index,
                value: self.data[index].to_f64_lossy(),
            }),
            None => Ok(()),
        }
    }

    pub fn max(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / T::from_usize_lossy(self.data.len())
    }

    /// `∫ v` as a Riemann sum.
    pub fn integral(&self) -> T {
        self.data.iter().copied().sum::<T>() * self.grid.cell_volume()
    }

    pub fn lp_norm(&self, p: T) -> Result<T> {
        lp_norm_of(self.data.iter().map(|v| v.abs()), &self.grid, p)
    }

    pub fn to_complex(&self) -> Field<T> {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }

    pub fn forward(&self) -> SpectralField<T> {
        self.to_complex().forward()
    }
}

impl<T: Scalar> SpectralField<T> {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![zero(); grid.len()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Coefficient at an integer frequency, zero when unresolved.
    pub fn at(&self, freq: &[i64]) -> Complex<T> {
        self.grid.bin(freq).map_or_else(zero, |i| self.coeffs[i])
    }

    pub fn inverse(&self) -> Field<T> {
        let mut data = self.coeffs.clone();
        transform(&mut data, &self.grid, true);
        Field {
            grid: self.grid,
            data,
        }
    }

    /// Pointwise product with a real mask.
    pub fn apply_mask(&self, mask: &[T]) -> Result<Self> {
        if mask.len() != self.coeffs.len() {
            return Err(Error::SizeMismatch {
                expected: self.coeffs.len(),
                got: mask.len(),
            });
        }
        Ok(Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(mask).map(|(&c, &m)| c * m).collect(),
        })
    }

    /// Pointwise product with a complex mask.
    pub fn apply_complex_mask(&self, mask: &[Complex<T>]) -> Result<Self> {
        if mask.len() != self.coeffs.len() {
            return Err(Error::SizeMismatch {
                expected: self.coeffs.len(),
                got: mask.len(),
            });
        }
        Ok(Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(mask).map(|(&c, &m)| c * m).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect(),
        })
    }

    /// `‖c‖_{ℓ²}`.
    pub fn coeff_l2(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    /// Spatial `L²` norm by Parseval, `(2π)^{d/2} ‖c‖_{ℓ²}`.
    pub fn l2_norm(&self) -> T {
        T::TAU().powf(lit::<T>(0.5) * T::from_usize_lossy(self.grid.dim)) * self.coeff_l2()
    }

    /// Smallest and largest `|ξ|` carrying a coefficient above `tol · max`.
    pub fn support_radii(&self, tol: T) -> Option<(T, T)> {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        if peak == T::zero() {
            return None;
        }
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() > tol * peak {
                let r = self.grid.frequency_norm::<T>(i);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        Some((lo, hi))
    }
}

/// Log-uniform midpoint quadrature of `∫_0^{t0} · dt/t` in `u = log(1/t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid<T> {
    /// `log(1/t)` at the top of the integral.
    pub u0: T,
    /// Step `Δu`, also the weight of every node.
    pub du: T,
    /// `(t_j, weight_j)`, `t_j` strictly decreasing.
    pub entries: Vec<(T, T)>,
    /// Smallest `u` the grid could resolve; the integral is truncated there.
    pub u_limit: T,
}

/// Default step `Δu = log(2) / 8`.
pub fn default_du<T: Scalar>() -> T {
    T::LN_2() / lit(8.0)
}

impl<T: Scalar> ScaleGrid<T> {
    /// Nodes `u_j = u0 + (j + 1/2) Δu`, `j = 0..J`, without a grid check.
    pub fn log_uniform(u0: T, u_max: T, count: usize) -> Result<Self> {
        if count < 2 || !(u_max > u0) {
            return Err(Error::InvalidParams(format!(
                "scale grid needs J >= 2 and u_max > u0 (J = {count}, u0 = {u0}, u_max = {u_max})"
            )));
        }
        let du = (u_max - u0) / T::from_usize_lossy(count);
        let entries = (0..count)
            .map(|j| {
                let u = u0 + (T::from_usize_lossy(j) + lit(0.5)) * du;
                ((-u).exp(), du)
            })
            .collect();
        Ok(Self {
            u0,
            du,
            entries,
            u_limit: u_max,
        })
    }

    /// `J` nodes over `[log(1/t0), u_max]`; every node must satisfy
    /// `1/t_j < n/4`, else the request is rejected as truncated.
    pub fn new(params: &LogParams<T>, grid: &TorusGrid, count: usize, u_max: T) -> Result<Self> {
        let limit = Self::resolvable_limit(grid);
        let mut out = Self::log_uniform(-params.t0.ln(), u_max, count)?;
        let top = out.entries.last().map(|e| -e.0.ln()).unwrap_or(u_max);
        if top >= limit {
            return Err(Error::Truncation {
                requested: u_max.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
        out.u_limit = limit;
        Ok(out)
    }

    /// Nodes at spacing `du` from `log(1/t0)` up to the resolvable limit.
    pub fn with_step(params: &LogParams<T>, grid: &TorusGrid, du: T) -> Result<Self> {
        let u0 = -params.t0.ln();
        let limit = Self::resolvable_limit(grid);
        let count = ((limit - u0) / du).floor().to_usize().unwrap_or(0);
        let mut out = Self::log_uniform(u0, u0 + du * T::from_usize_lossy(count), count)?;
        out.u_limit = limit;
        Ok(out)
    }

    /// `log(n/4)`: above it `φ̂(t·)` reaches past Nyquist.
    pub fn resolvable_limit(grid: &TorusGrid) -> T {
        (T::from_usize_lossy(grid.n) / lit(4.0)).ln()
    }

    /// Same range with half the step.
    pub fn halved(&self) -> Result<Self> {
        let u_max = self.u0 + self.du * T::from_usize_lossy(self.entries.len());
        let mut out = Self::log_uniform(self.u0, u_max, 2 * self.entries.len())?;
        out.u_limit = self.u_limit;
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest scale of the grid.
    pub fn t_max(&self) -> T {
        self.entries[0].0
    }

    /// Smallest scale of the grid.
    pub fn t_min(&self) -> T {
        self.entries[self.entries.len() - 1].0
    }

    pub fn u_max(&self) -> T {
        self.u0 + self.du * T::from_usize_lossy(self.entries.len())
    }

    /// Midpoint-rule value of `∫ f(t) dt/t`.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.entries.iter().map(|&(t, w)| w * f(t)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn random_field(grid: TorusGrid, seed: u64) -> Field<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::from_fn(grid, |_| Complex::new(0.0, 0.0)).map_samples(|_| {
            Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    impl Field<f64> {
        fn map_samples(mut self, mut f: impl FnMut(Complex<f64>) -> Complex<f64>) -> Self {
            for z in &mut self.data {
                *z = f(*z);
            }
            self
        }
    }

    fn rel_err(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn constant_and_tone_coefficients() {
        let grid = TorusGrid::new(1, 64).unwrap();
        let one = Field::<f64>::from_fn(grid, |_| Complex::new(1.0, 0.0)).forward();
        assert_relative_eq!(one.at(&[0]).re, 1.0, epsilon = 1e-15);
        assert!(one.coeffs().iter().skip(1).all(|c| c.norm() < 1e-15));
        let tone = Field::<f64>::tone(grid, &[5]).forward();
        assert_relative_eq!(tone.at(&[5]).re, 1.0, epsilon = 1e-14);
        assert_eq!(tone.coeffs().iter().filter(|c| c.norm() > 1e-12).count(), 1);
        let g2 = TorusGrid::new(2, 16).unwrap();
        let tone2 = Field::<f64>::tone(g2, &[3, -2]).forward();
        assert_relative_eq!(tone2.at(&[3, -2]).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn round_trip_and_plancherel() {
        for (dim, n) in [(1, 8), (1, 1024), (1, 1 << 14), (2, 8), (2, 64)] {
            let grid = TorusGrid::new(dim, n).unwrap();
            let f = random_field(grid, n as u64);
            let spec = f.forward();
            let back = spec.inverse();
            assert!(rel_err(back.samples(), f.samples()) <= 1e-12);
            let l2 = f.lp_norm(2.0).unwrap();
            assert!((spec.l2_norm() - l2).abs() / l2 <= 1e-10);
        }
    }

    #[test]
    fn masks() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let f = Field::<f64>::tone(grid, &[5]).add(&Field::tone(grid, &[7])).unwrap();
        let spec = f.forward();
        let ones = vec![1.0; grid.len()];
        assert_eq!(spec.apply_mask(&ones).unwrap(), spec);
        let zeros = vec![0.0; grid.len()];
        assert!(spec.apply_mask(&zeros).unwrap().coeff_l2() == 0.0);
        let mut pick = vec![0.0; grid.len()];
        pick[grid.bin(&[5]).unwrap()] = 1.0;
        let out = spec.apply_mask(&pick).unwrap().inverse();
        assert!(rel_err(out.samples(), Field::tone(grid, &[5]).samples()) < 1e-13);
        assert!(spec.apply_mask(&[1.0; 3]).is_err());
    }

    #[test]
    fn norms() {
        for dim in [1, 2] {
            let grid = TorusGrid::new(dim, 16).unwrap();
            let one = Field::<f64>::from_fn(grid, |_| Complex::new(1.0, 0.0));
            for p in [1.0, 2.0, 3.5] {
                assert_relative_eq!(
                    one.lp_norm(p).unwrap(),
                    TAU.powf(dim as f64 / p),
                    max_relative = 1e-13
                );
            }
            assert_eq!(one.lp_norm(f64::INFINITY).unwrap(), 1.0);
        }
        let grid = TorusGrid::new(1, 64).unwrap();
        let mut spike = vec![Complex::new(0.0, 0.0); 64];
        spike[9] = Complex::new(3.0, 0.0);
        let spike = Field::new(grid, spike).unwrap();
        assert_relative_eq!(spike.lp_norm(1.0).unwrap(), 3.0 * TAU / 64.0, epsilon = 1e-15);
        assert!(spike.lp_norm(0.5).is_err());
    }

    #[test]
    fn weighted_l2_consistency() {
        let grid = TorusGrid::new(1, 128).unwrap();
        let f = random_field(grid, 3);
        let ones = RealField::constant(grid, 1.0);
        let l2 = f.lp_norm(2.0).unwrap();
        assert_relative_eq!(f.weighted_l2(&ones).unwrap(), l2 * l2, max_relative = 1e-12);
        assert_eq!(Field::zeros(grid).weighted_l2(&ones).unwrap(), 0.0);
        let w = RealField::from_fn(grid, |x: [f64; 2]| 1.0 + x[0].sin().powi(2));
        let unit = Field::from_fn(grid, |_| Complex::new(1.0, 0.0));
        let expect: f64 = w.values().iter().sum::<f64>() * TAU / 128.0;
        assert_relative_eq!(unit.weighted_l2(&w).unwrap(), expect, max_relative = 1e-14);
        let bad = RealField::from_fn(grid, |x| x[0] - 1.0);
        assert!(matches!(f.weighted_l2(&bad), Err(Error::NegativeWeight { .. })));
    }

    #[test]
    fn convolution_matches_direct_sum() {
        for (dim, n) in [(1, 64), (2, 16)] {
            let grid = TorusGrid::new(dim, n).unwrap();
            let f = random_field(grid, 11);
            let g = random_field(grid, 12);
            let fast = f.convolve(&g).unwrap();
            let vol = grid.cell_volume::<f64>();
            let direct: Vec<Complex<f64>> = (0..grid.len())
                .map(|x| {
                    let mut acc = Complex::new(0.0, 0.0);
                    for y in 0..grid.len() {
                        let idx = match dim {
                            1 => (x + n - y) % n,
                            _ => {
                                let (x0, x1, y0, y1) = (x / n, x % n, y / n, y % n);
                                ((x0 + n - y0) % n) * n + (x1 + n - y1) % n
                            }
                        };
                        acc += f.samples()[y] * g.samples()[idx];
                    }
                    acc * vol
                })
                .collect();
            assert!(rel_err(fast.samples(), &direct) < 1e-10);
        }
    }

    #[test]
    fn scale_grid_arithmetic() {
        let g = ScaleGrid::<f64>::log_uniform(2.0, 4.0, 2).unwrap();
        let us: Vec<f64> = g.entries.iter().map(|e| -e.0.ln()).collect();
        assert_relative_eq!(us[0], 2.5, epsilon = 1e-14);
        assert_relative_eq!(us[1], 3.5, epsilon = 1e-14);
        assert!(g.entries.iter().all(|e| e.1 == 1.0));
        assert_relative_eq!(g.integrate(|_| 1.0), 2.0, epsilon = 1e-14);
        assert!(ScaleGrid::<f64>::log_uniform(2.0, 4.0, 1).is_err());
    }

    #[test]
    fn scale_grid_against_params() {
        let params = LogParams::<f64>::new(1, 2.0, 1.0).unwrap();
        let grid = TorusGrid::new(1, 1 << 14).unwrap();
        let g = ScaleGrid::with_step(&params, &grid, default_du()).unwrap();
        assert!(g.entries.iter().all(|e| e.0 < params.t0));
        assert!(g.entries.windows(2).all(|w| w[1].0 < w[0].0));
        assert!(g.entries.iter().all(|e| 1.0 / e.0 < grid.n as f64 / 4.0));
        let len = g.u_max() - g.u0;
        assert_relative_eq!(g.integrate(|_| 1.0), len, max_relative = 1e-13);
        let h = g.halved().unwrap();
        assert_eq!(h.len(), 2 * g.len());
        assert_relative_eq!(h.integrate(|_| 1.0), len, max_relative = 1e-13);
        assert!(matches!(
            ScaleGrid::new(&params, &grid, 8, (grid.n as f64).ln()),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn field_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = TorusGrid::new(2, 8).unwrap();
        let f = random_field(grid, 5);
        let path = dir.path().join("f.bin");
        f.save(&path).unwrap();
        let back = Field::<f64>::load(&path).unwrap();
        assert!(rel_err(back.samples(), f.samples()) < 1e-7);
        f.save_as(&path, FieldDtype::Complex128).unwrap();
        assert_eq!(Field::<f64>::load(&path).unwrap(), f);
        std::fs::write(&path, [0u8; 5]).unwrap();
        assert!(matches!(Field::<f64>::load(&path), Err(Error::FieldFormat(_))));
    }

    #[test]
    fn frequency_indexing() {
        let grid = TorusGrid::new(2, 16).unwrap();
        for i in 0..grid.len() {
            assert_eq!(grid.bin(&grid.frequency(i)), Some(i));
        }
        assert_eq!(grid.bin(&[8, 0]), None);
        assert_relative_eq!(grid.distance_to_origin::<f64>(grid.bin(&[-3, 4]).unwrap()), 5.0 * PI / 8.0);
    }
}
