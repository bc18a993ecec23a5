//! Smooth averages `A_t`, the Hardy–Littlewood maximal operators `M` and `M_s`,
//! the logarithmic geometric maximal operator and the composite weight
//! `M²(M_log(M⁴ w))`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LogParams;
use crate::grid::{RealField, ScaleGrid, TorusGrid};
use crate::scalar::{lit, Scalar};

/// Unit-mass Gaussian `η(x) = (2π)^{-d/2} e^{-|x|²/2}` and its dilates
/// `η_t(x) = t^{-d} η(x/t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AveragingKernel {
    pub dim: usize,
}

impl AveragingKernel {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn value<T: Scalar>(&self, r: T) -> T {
        T::TAU().powf(-lit::<T>(self.dim as f64) / lit(2.0)) * (-(r * r) / lit(2.0)).exp()
    }

    /// `c` with `η ≥ c` on the unit ball.
    pub fn lower_bound<T: Scalar>(&self) -> T {
        self.value(T::one())
    }

    /// Fourier multiplier of `w ↦ η_t * w` at frequency magnitude `r`.
    pub fn multiplier<T: Scalar>(&self, t: T, r: T) -> T {
        (-(t * r) * (t * r) / lit(2.0)).exp()
    }

    /// `η_t` summed over periodic images, sampled on `grid`.
    pub fn periodized<T: Scalar>(&self, grid: &TorusGrid, t: T) -> RealField<T> {
        let tau = T::TAU();
        let images = (lit::<T>(40.0) * t / tau).ceil().to_i64().unwrap_or(0) + 1;
        let scale = t.powi(-(self.dim as i32));
        let axis = |x: T| {
            (-images..=images)
                .map(|m| {
                    let u = (x + tau * T::from_i64_lossy(m)) / t;
                    (-(u * u) / lit(2.0)).exp()
                })
                .sum::<T>()
        };
        let norm = tau.powf(-lit::<T>(self.dim as f64) / lit(2.0)) * scale;
        let h = grid.spacing::<T>();
        let data = (0..grid.len())
            .map(|i| {
                let [a, b] = grid.frequency(i);
                let mut v = axis(h * T::from_i64_lossy(a));
                if grid.dim == 2 {
                    v = v * axis(h * T::from_i64_lossy(b));
                }
                norm * v
            })
            .collect();
        RealField::new(*grid, data).expect("grid-sized kernel")
    }
}

/// `A_t w = η_t * w`, computed spectrally and clamped at zero.
pub fn smooth_average<T: Scalar>(w: &RealField<T>, t: T) -> Result<RealField<T>> {
    w.check_nonnegative()?;
    if !(t > T::zero()) {
        return Err(crate::error::domain("averaging scale t", t.to_f64_lossy(), "(0, ∞)"));
    }
    let eta = AveragingKernel::new(w.grid().dim);
    let mask = w.grid().radial_mask(|r| eta.multiplier(t, r));
    let out = w.forward().apply_mask(&mask)?.inverse();
    let data = out.samples().iter().map(|z| z.re.max(T::zero())).collect();
    RealField::new(*w.grid(), data)
}

/// Ball radii of the discrete maximal function, in grid cells:
/// `0, 1, 2, 4, …` up to half the period.
pub fn radius_ladder(grid: &TorusGrid) -> Vec<usize> {
    let mut ladder = vec![0];
    let mut r = 1;
    while r <= grid.n / 2 {
        ladder.push(r);
        r *= 2;
    }
    ladder
}

/// Discrete Hardy–Littlewood maximal function: the largest mean of `w` over
/// the grid balls of the radius ladder, the centre included.
pub fn hl_maximal<T: Scalar>(w: &RealField<T>) -> Result<RealField<T>> {
    w.check_nonnegative()?;
    let grid = *w.grid();
    let mut out = w.values().to_vec();
    for &r in radius_ladder(&grid).iter().skip(1) {
        let avg = ball_means(w.values(), &grid, r);
        for (o, a) in out.iter_mut().zip(avg) {
            *o = o.max(a);
        }
    }
    RealField::new(grid, out)
}

/// `M_s w = (M(w^s))^{1/s}`.
pub fn hl_maximal_s<T: Scalar>(w: &RealField<T>, s: T) -> Result<RealField<T>> {
    if !(s > T::one()) {
        return Err(Error::InvalidParams(format!("M_s needs s > 1, got {s}")));
    }
    w.check_nonnegative()?;
    let m = hl_maximal(&w.map(|v| v.powf(s)))?;
    Ok(m.map(|v| v.powf(s.recip())))
}

/// `sup_j (log 1/t_j)^{-2β} sup_{|y - x| ≤ a_γ(t_j)} A_{t_j} w(y)`.
pub fn log_maximal<T: Scalar>(
    w: &RealField<T>,
    params: &LogParams<T>,
    scales: &ScaleGrid<T>,
) -> Result<RealField<T>> {
    w.check_nonnegative()?;
    let grid = *w.grid();
    if grid.dim != params.dim {
        return Err(Error::GridMismatch);
    }
    let h = grid.spacing::<T>();
    let mut out = vec![T::zero(); grid.len()];
    for &(t, _) in &scales.entries {
        let radius = params.aperture(t)? / h;
        let avg = smooth_average(w, t)?;
        let dilated = dilate(avg.values(), &grid, radius);
        let factor = (-t.ln()).powf(lit::<T>(-2.0) * params.beta);
        for (o, v) in out.iter_mut().zip(dilated) {
            *o = o.max(factor * v);
        }
    }
    RealField::new(grid, out)
}

/// `M(M(M_log(M(M(M(M w))))))`.
pub fn rhs_weight<T: Scalar>(
    w: &RealField<T>,
    params: &LogParams<T>,
    scales: &ScaleGrid<T>,
) -> Result<RealField<T>> {
    let mut v = w.clone();
    for _ in 0..4 {
        v = hl_maximal(&v)?;
    }
    v = log_maximal(&v, params, scales)?;
    for _ in 0..2 {
        v = hl_maximal(&v)?;
    }
    Ok(v)
}

/// Means over grid balls of radius `r` cells, exact via prefix sums.
fn ball_means<T: Scalar>(v: &[T], grid: &TorusGrid, r: usize) -> Vec<T> {
    let n = grid.n;
    match grid.dim {
        1 => {
            let sums = circular_window_sums(v, r);
            let count = T::from_usize_lossy((2 * r + 1).min(n));
            sums.into_iter().map(|s| s / count).collect()
        }
        _ => {
            let widths = disk_half_widths(r as f64);
            let mut row_sums: Vec<Option<Vec<T>>> = vec![None; r + 1];
            for &hw in &widths {
                if row_sums[hw].is_none() {
                    let mut all = Vec::with_capacity(n * n);
                    for row in v.chunks(n) {
                        all.extend(circular_window_sums(row, hw));
                    }
                    row_sums[hw] = Some(all);
                }
            }
            let count = T::from_usize_lossy(widths.iter().map(|&hw| (2 * hw + 1).min(n)).sum());
            let rr = r as isize;
            let mut out = vec![T::zero(); n * n];
            for (dy, &hw) in (-rr..=rr).zip(&widths) {
                let sums = row_sums[hw].as_ref().expect("row sums computed");
                for y in 0..n {
                    let src = (y as isize + dy).rem_euclid(n as isize) as usize;
                    let (dst_row, src_row) = (&mut out[y * n..(y + 1) * n], &sums[src * n..(src + 1) * n]);
                    for (o, s) in dst_row.iter_mut().zip(src_row) {
                        *o = *o + *s;
                    }
                }
            }
            out.into_iter().map(|s| s / count).collect()
        }
    }
}

/// Half-widths `⌊√(r² − dy²)⌋` of the grid disk, rows `dy = -⌊r⌋..=⌊r⌋`.
fn disk_half_widths(r: f64) -> Vec<usize> {
    let ri = r.floor() as isize;
    (-ri..=ri)
        .map(|dy| {
            let rem = r * r - (dy * dy) as f64;
            let mut w = rem.max(0.0).sqrt().floor() as usize;
            // guard against sqrt rounding below an exact square
            while ((w + 1) * (w + 1)) as f64 <= rem {
                w += 1;
            }
            w
        })
        .collect()
}

/// Sums over the circular windows `[x - r, x + r]`.
fn circular_window_sums<T: Scalar>(v: &[T], r: usize) -> Vec<T> {
    let n = v.len();
    if 2 * r + 1 >= n {
        let total: T = v.iter().copied().sum();
        return vec![total; n];
    }
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    prefix.push(acc);
    for &x in v {
        acc = acc + x;
        prefix.push(acc);
    }
    (0..n)
        .map(|x| {
            let lo = (x as isize - r as isize).rem_euclid(n as isize) as usize;
            let hi = (x + r) % n;
            let s = if lo <= hi {
                prefix[hi + 1] - prefix[lo]
            } else {
                prefix[n] - prefix[lo] + prefix[hi + 1]
            };
            s.max(T::zero())
        })
        .collect()
}

/// Maxima over the circular windows `[x - r, x + r]` (monotone deque).
fn circular_window_max<T: Scalar>(v: &[T], r: usize) -> Vec<T> {
    let n = v.len();
    if r == 0 {
        return v.to_vec();
    }
    if 2 * r + 1 >= n {
        let m = v.iter().copied().fold(T::neg_infinity(), T::max);
        return vec![m; n];
    }
    let at = |i: isize| v[i.rem_euclid(n as isize) as usize];
    let mut out = Vec::with_capacity(n);
    let mut deque: VecDeque<isize> = VecDeque::new();
    let (r, ni) = (r as isize, n as isize);
    for i in -r..ni + r {
        while deque.back().is_some_and(|&j| at(j) <= at(i)) {
            deque.pop_back();
        }
        deque.push_back(i);
        let x = i - r;
        if x >= 0 {
            while deque.front().is_some_and(|&j| j < x - r) {
                deque.pop_front();
            }
            out.push(at(*deque.front().expect("window is nonempty")));
        }
    }
    out
}

/// Maximum over grid points within periodic distance `radius` (in cells).
fn dilate<T: Scalar>(v: &[T], grid: &TorusGrid, radius: T) -> Vec<T> {
    let r = radius.to_f64_lossy().max(0.0).min(grid.n as f64);
    let n = grid.n;
    match grid.dim {
        1 => circular_window_max(v, r.floor() as usize),
        _ => {
            let widths = disk_half_widths(r);
            let mut row_max: Vec<Option<Vec<T>>> = vec![None; widths.iter().max().map_or(1, |w| w + 1)];
            for &hw in &widths {
                if row_max[hw].is_none() {
                    let mut all = Vec::with_capacity(n * n);
                    for row in v.chunks(n) {
                        all.extend(circular_window_max(row, hw));
                    }
                    row_max[hw] = Some(all);
                }
            }
            let ri = r.floor() as isize;
            let mut out = vec![T::neg_infinity(); n * n];
            for (dy, &hw) in (-ri..=ri).zip(&widths) {
                let rows = row_max[hw].as_ref().expect("row maxima computed");
                for y in 0..n {
                    let src = (y as isize + dy).rem_euclid(n as isize) as usize;
                    for (o, s) in out[y * n..(y + 1) * n].iter_mut().zip(&rows[src * n..(src + 1) * n]) {
                        *o = o.max(*s);
                    }
                }
            }
            out
        }
    }
}
