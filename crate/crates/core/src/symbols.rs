//! Radial Fourier multipliers, their radial derivatives, and the localized
//! logarithmic Miyachi condition.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{log_scale, Ball, BallClass, LogParams};
use crate::grid::{Field, SpectralField, TorusGrid};
use crate::jet::Jet;
use crate::partition::BumpProfile;
use crate::scalar::{lit, Scalar};
use crate::special::SmoothStep;

/// Piecewise cubic Hermite table of `m(R)` on `[0, R_last]`, held constant
/// beyond the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    knots: Vec<T>,
    values: Vec<Complex<T>>,
    slopes: Vec<Complex<T>>,
}

impl<T: Scalar> Table<T> {
    /// Build from `(R, m(R))` rows; `R` must start at 0 and increase strictly.
    pub fn new(rows: Vec<(T, Complex<T>)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Table("need at least two rows".into()));
        }
        if rows[0].0 != T::zero() {
            return Err(Error::Table("the first row must give the value at R = 0".into()));
        }
        if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Table("R must be strictly increasing".into()));
        }
        let knots: Vec<T> = rows.iter().map(|r| r.0).collect();
        let values: Vec<Complex<T>> = rows.iter().map(|r| r.1).collect();
        let last = knots.len() - 1;
        let slopes = (0..=last)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(last));
                (values[b] - values[a]) / (knots[b] - knots[a])
            })
            .collect();
        Ok(Self {
            knots,
            values,
            slopes,
        })
    }

    /// Parse `R, Re m, Im m` rows separated by commas or whitespace; blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 3 {
                return Err(Error::Table(format!("line {}: expected 3 columns", no + 1)));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Table(format!("line {}: {e}", no + 1)))
            };
            rows.push((
                lit(num(cols[0])?),
                Complex::new(lit(num(cols[1])?), lit(num(cols[2])?)),
            ));
        }
        Self::new(rows)
    }

    /// Taylor coefficients `a_0..a_3` of the active cubic around `r`.
    fn local_cubic(&self, r: T) -> [Complex<T>; 4] {
        let zero = Complex::new(T::zero(), T::zero());
        let last = self.knots.len() - 1;
        if r >= self.knots[last] {
            return [self.values[last], zero, zero, zero];
        }
        let i = self.knots.partition_point(|&k| k <= r).saturating_sub(1);
        let h = self.knots[i + 1] - self.knots[i];
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        let dy = (y1 - y0) / h;
        let (two, three) = (lit::<T>(2.0), lit::<T>(3.0));
        let a2 = (dy * three - m0 * two - m1) / h;
        let a3 = (m0 + m1 - dy * two) / (h * h);
        // re-expand around r
        let s = r - self.knots[i];
        [
            y0 + m0 * s + a2 * s * s + a3 * s * s * s,
            m0 + a2 * s * two + a3 * s * s * three,
            a2 + a3 * s * three,
            a3,
        ]
    }
}

/// The closed-form families plus tabulated data.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind<T> {
    /// `(log(e+R))^{-β} e^{i (log(e+R))^γ}`.
    Model { gamma: T, beta: T },
    /// `(log(e+R))^{-β}`, the logarithmic Mikhlin symbol.
    MikhlinLog { beta: T },
    /// `(log(e+R))^{-β} e^{i R^α}`.
    PowerPhase { alpha: T, beta: T },
    Constant(Complex<T>),
    Tabulated(Table<T>),
}

/// A radial multiplier `m(|ξ|)` with derivatives up to `max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSymbol<T> {
    pub kind: SymbolKind<T>,
    pub conjugate: bool,
    pub max_order: usize,
}

const DEFAULT_MAX_ORDER: usize = 8;

impl<T: Scalar> RadialSymbol<T> {
    pub fn new(kind: SymbolKind<T>) -> Self {
        Self {
            kind,
            conjugate: false,
            max_order: DEFAULT_MAX_ORDER,
        }
    }

    pub fn model(gamma: T, beta: T) -> Result<Self> {
        if !(gamma > T::one()) {
            return Err(domain("gamma", gamma.to_f64_lossy(), "(1, inf)"));
        }
        Ok(Self::new(SymbolKind::Model { gamma, beta }))
    }

    pub fn mikhlin_log(beta: T) -> Self {
        Self::new(SymbolKind::MikhlinLog { beta })
    }

    pub fn power_phase(alpha: T, beta: T) -> Self {
        Self::new(SymbolKind::PowerPhase { alpha, beta })
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(SymbolKind::Constant(c))
    }

    pub fn identity() -> Self {
        Self::constant(Complex::new(T::one(), T::zero()))
    }

    pub fn with_max_order(mut self, n: usize) -> Self {
        self.max_order = n;
        self
    }

    /// The symbol of the adjoint operator, `conj(m)`.
    pub fn conj(&self) -> Self {
        Self {
            conjugate: !self.conjugate,
            ..self.clone()
        }
    }

    /// Supremum of `|m|` over `R ≥ 0`.
    pub fn sup_abs(&self) -> T {
        match &self.kind {
            SymbolKind::Model { beta, .. }
            | SymbolKind::MikhlinLog { beta }
            | SymbolKind::PowerPhase { beta, .. } => {
                if *beta >= T::zero() {
                    T::one()
                } else {
                    T::infinity()
                }
            }
            SymbolKind::Constant(c) => c.norm(),
            SymbolKind::Tabulated(t) => t.values.iter().map(|v| v.norm()).fold(T::zero(), T::max),
        }
    }

    pub fn eval(&self, r: T) -> Complex<T> {
        let e = T::E();
        let v = match &self.kind {
            SymbolKind::Model { gamma, beta } => {
                let u = (e + r).ln();
                Complex::from_polar(u.powf(-*beta), u.powf(*gamma))
            }
            SymbolKind::MikhlinLog { beta } => {
                Complex::new((e + r).ln().powf(-*beta), T::zero())
            }
            SymbolKind::PowerPhase { alpha, beta } => {
                Complex::from_polar((e + r).ln().powf(-*beta), r.powf(*alpha))
            }
            SymbolKind::Constant(c) => *c,
            SymbolKind::Tabulated(t) => t.local_cubic(r)[0],
        };
        if self.conjugate {
            v.conj()
        } else {
            v
        }
    }

    /// Taylor jet of `m` at `R`.
    pub fn jet(&self, r: T, order: usize) -> Result<Jet<T>> {
        if order > self.max_order {
            return Err(Error::DerivativeOrder {
                order,
                max: self.max_order,
            });
        }
        let real = |x: T| Complex::new(x, T::zero());
        let i = Complex::new(T::zero(), T::one());
        let log_u = || Jet::variable(r, order).add_constant(real(T::E())).ln();
        let jet = match &self.kind {
            SymbolKind::Model { gamma, beta } => {
                let u = Jet::variable(r, order).add_constant(real(T::E()));
                let ln_u = u.ln().ln();
                let phase = u.ln().powf(*gamma).scale(i);
                (&ln_u.scale(real(-*beta)) + &phase).exp()
            }
            SymbolKind::MikhlinLog { beta } => log_u().ln().scale(real(-*beta)).exp(),
            SymbolKind::PowerPhase { alpha, beta } => {
                if order > 0 && r <= T::zero() {
                    return Err(domain("R", r.to_f64_lossy(), "(0, inf) for derivatives of R^alpha"));
                }
                let amp = log_u().ln().scale(real(-*beta));
                let phase = if order == 0 {
                    Jet::constant(real(r.powf(*alpha)), 0)
                } else {
                    Jet::variable(r, order).powf(*alpha)
                };
                (&amp + &phase.scale(i)).exp()
            }
            SymbolKind::Constant(c) => Jet::constant(*c, order),
            SymbolKind::Tabulated(t) => {
                let a = t.local_cubic(r);
                let mut jet = Jet::constant(a[0], order);
                let mut power = Jet::constant(real(T::one()), order);
                let step = Jet::variable(T::zero(), order);
                for coeff in a.iter().skip(1).take(order) {
                    power = &power * &step;
                    jet = &jet + &power.scale(*coeff);
                }
                jet
            }
        };
        Ok(if self.conjugate { jet.conj() } else { jet })
    }

    /// `d^j m / dR^j` at `R`.
    pub fn radial_derivative(&self, r: T, j: usize) -> Result<Complex<T>> {
        if j == 0 {
            return Ok(self.eval(r));
        }
        Ok(self.jet(r, j)?.derivative(j))
    }

    /// `|m^{(j)}(R)| (log R)^β ρ(R)^j`, bounded for symbols in the class.
    pub fn pointwise_miyachi_ratio(&self, r: T, j: usize, params: &LogParams<T>) -> Result<T> {
        let rho = params.rho(r)?;
        if j > params.n_deriv {
            return Err(Error::DerivativeOrder {
                order: j,
                max: params.n_deriv,
            });
        }
        let d = self.radial_derivative(r, j)?.norm();
        Ok(d * r.ln().powf(params.beta) * rho.powi(j as i32))
    }

    /// Classical Mikhlin normalization `|m'(R)| R (log R)^β`.
    pub fn mikhlin_ratio(&self, r: T, params: &LogParams<T>) -> Result<T> {
        if !(r >= params.r0) {
            return Err(domain("R", r.to_f64_lossy(), "[R0, inf)"));
        }
        Ok(self.radial_derivative(r, 1)?.norm() * r * r.ln().powf(params.beta))
    }

    /// `m(|ξ|)` on every bin of `grid`.
    pub fn mask(&self, grid: &TorusGrid) -> Vec<Complex<T>> {
        grid.radial_mask_complex(|r| self.eval(r))
    }

    /// `T_m f = (m f̂)^∨` on the spectral side.
    pub fn apply(&self, f: &SpectralField<T>) -> SpectralField<T> {
        f.apply_complex_mask(&self.mask(f.grid()))
            .expect("mask built on the field's own grid")
    }

    /// `(m_lo, m_hi) = (m θ_lo, m (1 - θ_lo))` on every bin.
    pub fn hi_lo_split(
        &self,
        grid: &TorusGrid,
        params: &LogParams<T>,
    ) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let cut = LowCutoff::new(params.k0);
        (0..grid.len())
            .map(|i| {
                let r = grid.frequency_norm::<T>(i);
                let m = self.eval(r);
                let lo = cut.value(r);
                (m * lo, m * (T::one() - lo))
            })
            .unzip()
    }

    /// Normalized Miyachi quantity of one ball and one bump dilation.
    fn miyachi_quantity(
        &self,
        ball: &Ball<T>,
        theta: T,
        params: &LogParams<T>,
        opts: &SobolevOptions,
        dilation: T,
    ) -> Result<T> {
        let norm = localized_sobolev_norm_dilated(self, ball, theta, params, opts, dilation)?;
        let rb = ball.distance_to_origin();
        Ok(rb.ln().powf(params.beta) * log_scale(params.gamma, rb).powf(theta)
            / ball.volume().sqrt()
            * norm)
    }

    /// Normalized localized Sobolev quantities over `balls × thetas`.
    pub fn miyachi_constant(
        &self,
        balls: &[Ball<T>],
        thetas: &[T],
        params: &LogParams<T>,
        opts: &SobolevOptions,
    ) -> Result<MiyachiReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut records = Vec::new();
        for ball in balls {
            if params.classify_ball(ball) != BallClass::LogSubdyadic {
                return Err(Error::InvalidParams(format!(
                    "ball at {:?} with radius {} is not log-subdyadic",
                    ball.center, ball.radius
                )));
            }
            let dilation: T = lit(rng.random_range(0.5..1.0));
            for &theta in thetas {
                let canonical = self.miyachi_quantity(ball, theta, params, opts, T::one())?;
                let randomized = self.miyachi_quantity(ball, theta, params, opts, dilation)?;
                records.push(MiyachiRecord {
                    r_b: ball.distance_to_origin().to_f64_lossy(),
                    radius: ball.radius.to_f64_lossy(),
                    theta: theta.to_f64_lossy(),
                    canonical: canonical.to_f64_lossy(),
                    randomized: randomized.to_f64_lossy(),
                    dilation: dilation.to_f64_lossy(),
                });
            }
        }
        Ok(MiyachiReport::from_records(records))
    }
}

/// Smooth low-frequency cutoff `θ_lo`: 1 on `|ξ| ≤ 2^{k0}`, 0 on `|ξ| ≥ 2^{k0+1}`.
#[derive(Debug, Clone)]
pub struct LowCutoff<T> {
    k0: i32,
    step: SmoothStep<T>,
}

impl<T: Scalar> LowCutoff<T> {
    pub fn new(k0: i32) -> Self {
        Self {
            k0,
            step: SmoothStep::new(),
        }
    }

    pub fn value(&self, r: T) -> T {
        if r <= T::zero() {
            return T::one();
        }
        let x = (r.log2() - T::from_i64_lossy(self.k0 as i64)) * lit(2.0) - T::one();
        T::one() - self.step.value(x)
    }

    /// `1 - θ_lo` on every bin of `grid`.
    pub fn hi_mask(&self, grid: &TorusGrid) -> Vec<T> {
        grid.radial_mask(|r| T::one() - self.value(r))
    }
}

/// High-frequency projection `P_hi f`.
pub fn hi_projection<T: Scalar>(f: &SpectralField<T>, params: &LogParams<T>) -> SpectralField<T> {
    let mask = LowCutoff::new(params.k0).hi_mask(f.grid());
    f.apply_mask(&mask).expect("mask built on the field's own grid")
}

/// Resolution of the local grids used for localized Sobolev norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevOptions {
    /// Samples per ball radius along each axis.
    pub points_per_radius: usize,
    /// Seed of the randomized bump dilations.
    pub seed: u64,
}

impl SobolevOptions {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            points_per_radius: if dim == 1 { 256 } else { 64 },
            seed: 0x5eed,
        }
    }
}

const MIN_POINTS_PER_RADIUS: usize = 8;

/// `‖m Ψ_B‖_{Ḣ^θ}` for the canonical adapted bump
/// `Ψ_B(ξ) = Π b((ξ_i - c_i)/s)`, `s = C1 r / (0.75 √d)`, so that
/// `supp Ψ_B ⊂ C1 B`.
pub fn localized_sobolev_norm<T: Scalar>(
    symbol: &RadialSymbol<T>,
    ball: &Ball<T>,
    theta: T,
    params: &LogParams<T>,
    opts: &SobolevOptions,
) -> Result<T> {
    localized_sobolev_norm_dilated(symbol, ball, theta, params, opts, T::one())
}

fn localized_sobolev_norm_dilated<T: Scalar>(
    symbol: &RadialSymbol<T>,
    ball: &Ball<T>,
    theta: T,
    params: &LogParams<T>,
    opts: &SobolevOptions,
    dilation: T,
) -> Result<T> {
    if !(theta >= T::zero() && theta <= params.sigma) {
        return Err(domain("theta", theta.to_f64_lossy(), "[0, sigma]"));
    }
    if opts.points_per_radius < MIN_POINTS_PER_RADIUS {
        return Err(Error::Unresolved(format!(
            "{} local points per radius, need at least {MIN_POINTS_PER_RADIUS}",
            opts.points_per_radius
        )));
    }
    let dim = ball.center.len();
    let bump = BumpProfile::<T>::new();
    let w = BumpProfile::<T>::half_width();
    let s = params.c1 * ball.radius / (w * T::from_usize_lossy(dim).sqrt()) * dilation;
    // zero padding: the window is twice the bump support
    let window = lit::<T>(4.0) * w * s / dilation;
    let wanted = (window / ball.radius * T::from_usize_lossy(opts.points_per_radius))
        .ceil()
        .to_usize()
        .unwrap_or(8);
    let m = wanted.next_power_of_two().max(8);
    let local = TorusGrid::new(dim, m)?;
    let delta = window / T::from_usize_lossy(m);
    let half = window * lit(0.5);
    let coord = |j: usize, axis: usize| ball.center[axis] - half + delta * T::from_usize_lossy(j);
    let samples: Vec<Complex<T>> = (0..local.len())
        .map(|idx| {
            let (j0, j1) = if dim == 1 { (idx, 0) } else { (idx / m, idx % m) };
            let xi0 = coord(j0, 0);
            let (r, psi) = if dim == 1 {
                (xi0.abs(), bump.value((xi0 - ball.center[0]) / s))
            } else {
                let xi1 = coord(j1, 1);
                (
                    (xi0 * xi0 + xi1 * xi1).sqrt(),
                    bump.value((xi0 - ball.center[0]) / s) * bump.value((xi1 - ball.center[1]) / s),
                )
            };
            if psi == T::zero() {
                Complex::new(T::zero(), T::zero())
            } else {
                symbol.eval(r) * psi
            }
        })
        .collect();
    let coeffs = Field::new(local, samples)?.forward();
    let two_pi_over_w = T::TAU() / window;
    let sum: T = coeffs
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = local.frequency_norm::<T>(i) * two_pi_over_w;
            let weight = if theta == T::zero() {
                T::one()
            } else {
                k.powf(lit::<T>(2.0) * theta)
            };
            weight * c.norm_sqr()
        })
        .sum();
    Ok((window.powi(dim as i32) * sum).sqrt())
}

/// One `(ball, θ)` evaluation of the normalized Miyachi quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiyachiRecord {
    pub r_b: f64,
    pub radius: f64,
    pub theta: f64,
    /// Canonical adapted bump.
    pub canonical: f64,
    /// Randomly dilated adapted bump.
    pub randomized: f64,
    pub dilation: f64,
}

impl MiyachiRecord {
    pub fn value(&self) -> f64 {
        self.canonical.max(self.randomized)
    }
}

/// Summary of a Miyachi-condition scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiyachiReport {
    pub records: Vec<MiyachiRecord>,
    /// Largest normalized quantity, the empirical `C_m`.
    pub constant: f64,
    /// Median over balls of the per-ball maximum.
    pub median: f64,
    pub max_over_median: f64,
    /// Per-ball maximum at the largest `R_B` over that at the smallest.
    pub growth_factor: f64,
    /// Set when the per-ball maxima keep increasing with `R_B`.
    pub grows: bool,
}

/// Growth beyond which a scan is flagged as leaving the class.
const GROWTH_FLAG: f64 = 2.0;

impl MiyachiReport {
    fn from_records(records: Vec<MiyachiRecord>) -> Self {
        let mut per_ball: Vec<(f64, f64)> = Vec::new();
        for rec in &records {
            match per_ball.iter_mut().find(|(rb, _)| *rb == rec.r_b) {
                Some(entry) => entry.1 = entry.1.max(rec.value()),
                None => per_ball.push((rec.r_b, rec.value())),
            }
        }
        per_ball.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut maxima: Vec<f64> = per_ball.iter().map(|p| p.1).collect();
        let constant = maxima.iter().copied().fold(0.0, f64::max);
        let growth_factor = match (per_ball.first(), per_ball.last()) {
            (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
            _ => 1.0,
        };
        let increasing = per_ball.windows(2).all(|w| w[1].1 >= w[0].1);
        maxima.sort_by(f64::total_cmp);
        let median = if maxima.is_empty() {
            0.0
        } else if maxima.len() % 2 == 1 {
            maxima[maxima.len() / 2]
        } else {
            0.5 * (maxima[maxima.len() / 2 - 1] + maxima[maxima.len() / 2])
        };
        Self {
            records,
            constant,
            median,
            max_over_median: if median > 0.0 { constant / median } else { 0.0 },
            growth_factor,
            grows: increasing && growth_factor > GROWTH_FLAG,
        }
    }
}

/// Log-subdyadic balls `B(R_B + ρ(R_B), ρ(R_B))` along the first axis with
/// `log R_B` evenly spaced over `[lo, hi]`.
pub fn canonical_balls<T: Scalar>(
    params: &LogParams<T>,
    log_lo: T,
    log_hi: T,
    count: usize,
) -> Result<Vec<Ball<T>>> {
    (0..count)
        .map(|i| {
            let frac = if count > 1 {
                T::from_usize_lossy(i) / T::from_usize_lossy(count - 1)
            } else {
                T::zero()
            };
            let rb = (log_lo + (log_hi - log_lo) * frac).exp();
            let r = params.rho(rb)?;
            let mut center = vec![T::zero(); params.dim];
            center[0] = rb + r;
            Ball::new(center, r)
        })
        .collect()
}
