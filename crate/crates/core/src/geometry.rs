//! Logarithmic scale functions and log-subdyadic ball geometry.
//!
//! The frequency scale `ρ(R) = R / (log R)^{γ-1}` is the inverse derivative of
//! the phase `(log R)^γ`; its spatial dual is the aperture
//! `a_γ(t) = t (log 1/t)^{γ-1} = 1 / ρ(1/t)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{lit, Scalar};

/// `R / (log R)^{γ-1}` with no domain check.
#[inline]
pub fn log_scale<T: Scalar>(gamma: T, r: T) -> T {
    r / r.ln().powf(gamma - T::one())
}

/// `t (log 1/t)^{γ-1}` with no domain check.
#[inline]
pub fn log_aperture<T: Scalar>(gamma: T, t: T) -> T {
    t * (-t.ln()).powf(gamma - T::one())
}

/// Structural parameter bundle shared by every operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogParams<T> {
    /// Spatial dimension, 1 or 2.
    pub dim: usize,
    /// Oscillation order γ > 1.
    pub gamma: T,
    /// Logarithmic decay β ≥ 0.
    pub beta: T,
    /// Localized Sobolev order σ > d/2.
    pub sigma: T,
    /// Kernel decay λ > 1 (defaults to 2σ/d).
    pub lambda: T,
    /// High-frequency threshold R0 ≥ e².
    pub r0: T,
    /// Scale ceiling of the square functions.
    pub t0: T,
    /// First annulus of the lattice partition, 2^k0 ≥ R0.
    pub k0: i32,
    /// Top annulus resolved by the grid in use.
    pub kmax: i32,
    /// Lower ball-radius comparability constant.
    pub c0: T,
    /// Upper ball-radius comparability constant.
    pub c0_upper: T,
    /// Support dilation of adapted bumps.
    pub c1: T,
    /// Highest derivative order N > σ.
    pub n_deriv: usize,
}

impl<T: Scalar> LogParams<T> {
    /// Default bundle for dimension `dim` and model exponents `(γ, β)`.
    ///
    /// σ = d/2 + 1, λ = 2σ/d, R0 = max(e², e^{γ-1/2}), k0 = ⌈log₂ R0⌉,
    /// t0 = min(e^{-(γ-1)}, 2^{-(k0+3)}), c0 = 1/2, C0 = 2, C1 = 2,
    /// N = ⌊σ⌋ + 2 and kmax = k0 + 9.
    pub fn new(dim: usize, gamma: T, beta: T) -> Result<Self> {
        let one = T::one();
        let d = T::from_usize_lossy(dim);
        let sigma = d * lit(0.5) + one;
        let r0 = lit::<T>(2.0).exp().max((gamma - lit(0.5)).exp());
        let k0 = r0.log2().ceil().to_i32().unwrap_or(3);
        let params = Self {
            dim,
            gamma,
            beta,
            sigma,
            lambda: lit::<T>(2.0) * sigma / d,
            r0,
            t0: Self::default_t0(gamma, k0),
            k0,
            kmax: k0 + 9,
            c0: lit(0.5),
            c0_upper: lit(2.0),
            c1: lit(2.0),
            n_deriv: sigma.floor().to_usize().unwrap_or(1) + 2,
        };
        params.validate()?;
        Ok(params)
    }

    fn default_t0(gamma: T, k0: i32) -> T {
        (T::one() - gamma).exp().min(lit::<T>(2.0).powi(-(k0 + 3)))
    }

    /// Replace σ, resetting λ = 2σ/d and N = ⌊σ⌋ + 2.
    pub fn with_sigma(mut self, sigma: T) -> Result<Self> {
        self.sigma = sigma;
        self.lambda = lit::<T>(2.0) * sigma / T::from_usize_lossy(self.dim);
        self.n_deriv = sigma.floor().to_usize().unwrap_or(1) + 2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: T) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: T) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kmax(mut self, kmax: i32) -> Result<Self> {
        self.kmax = kmax;
        self.validate()?;
        Ok(self)
    }

    /// Replace R0, recomputing k0 and the default t0.
    pub fn with_r0(mut self, r0: T) -> Result<Self> {
        self.r0 = r0;
        self.k0 = r0.log2().ceil().to_i32().unwrap_or(self.k0);
        self.t0 = Self::default_t0(self.gamma, self.k0);
        self.kmax = self.kmax.max(self.k0 + 1);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        let two = lit::<T>(2.0);
        let d = T::from_usize_lossy(self.dim);
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.dim == 1 || self.dim == 2) {
            return bad(format!("dimension {} not in {{1, 2}}", self.dim));
        }
        if !(self.gamma > one) {
            return bad(format!("gamma = {} must exceed 1", self.gamma));
        }
        if !(self.lambda > one) {
            return bad(format!("lambda = {} must exceed 1", self.lambda));
        }
        if !(self.sigma > d / two) {
            return bad(format!("sigma = {} must exceed d/2", self.sigma));
        }
        if !(self.r0 >= two.exp() * (one - lit(1e-12))) {
            return bad(format!("R0 = {} is below e^2", self.r0));
        }
        if !(T::zero() < self.c0 && self.c0 < self.c0_upper) {
            return bad(format!("need 0 < c0 < C0, got {} and {}", self.c0, self.c0_upper));
        }
        if !(self.c1 >= one) {
            return bad(format!("C1 = {} must be at least 1", self.c1));
        }
        if two.powi(self.k0) < self.r0 {
            return bad(format!("2^k0 = 2^{} is below R0 = {}", self.k0, self.r0));
        }
        if !(self.t0 > T::zero() && self.t0 <= (one - self.gamma).exp()) {
            return bad(format!("t0 = {} must lie in (0, e^-(gamma-1)]", self.t0));
        }
        if !(self.t0 < two.powi(-(self.k0 + 2))) {
            return bad(format!("t0 = {} must be below 2^-(k0+2)", self.t0));
        }
        if T::from_usize_lossy(self.n_deriv) <= self.sigma {
            return bad(format!("N = {} must exceed sigma = {}", self.n_deriv, self.sigma));
        }
        if self.kmax <= self.k0 {
            return bad(format!("kmax = {} must exceed k0 = {}", self.kmax, self.k0));
        }
        Ok(())
    }

    /// `ρ(R) = R / (log R)^{γ-1}` for `R ≥ R0`.
    pub fn rho(&self, r: T) -> Result<T> {
        if !(r >= self.r0) {
            return Err(domain("R", r.to_f64_lossy(), "[R0, inf)"));
        }
        Ok(log_scale(self.gamma, r))
    }

    /// `a_γ(t) = t (log 1/t)^{γ-1}` for `0 < t < t0`.
    pub fn aperture(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t < self.t0) {
            return Err(domain("t", t.to_f64_lossy(), "(0, t0)"));
        }
        Ok(log_aperture(self.gamma, t))
    }

    /// `ρ(R') / ρ(R)`, which tends to 1 when `|R' - R| ≤ A ρ(R)` and `R → ∞`.
    pub fn stability_ratio(&self, r: T, r_prime: T) -> Result<T> {
        Ok(self.rho(r_prime)? / self.rho(r)?)
    }

    /// Largest `|ρ(R')/ρ(R) - 1|` over `|R' - R| ≤ A ρ(R)`, `R' ≥ R0`.
    ///
    /// ρ is monotone above `e^{γ-1}`, so the extremes sit at the endpoints.
    pub fn stability_deviation(&self, a: T, r: T) -> Result<T> {
        let rho = self.rho(r)?;
        let hi = self.stability_ratio(r, r + a * rho)?;
        let lo = self.stability_ratio(r, (r - a * rho).max(self.r0))?;
        Ok((hi - T::one()).abs().max((lo - T::one()).abs()))
    }

    pub fn classify_ball(&self, ball: &Ball<T>) -> BallClass {
        let rb = ball.distance_to_origin();
        if rb < self.r0 {
            return BallClass::BelowR0;
        }
        let rho = log_scale(self.gamma, rb);
        if ball.radius < self.c0 * rho {
            BallClass::TooSmall
        } else if ball.radius > self.c0_upper * rho {
            BallClass::TooLarge
        } else {
            BallClass::LogSubdyadic
        }
    }
}

/// Euclidean ball in frequency space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: Vec<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(domain("radius", radius.to_f64_lossy(), "(0, inf)"));
        }
        Ok(Self { center, radius })
    }

    pub fn center_norm(&self) -> T {
        self.center.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    /// `R_B = dist(B, 0)`, zero when the ball contains the origin.
    pub fn distance_to_origin(&self) -> T {
        (self.center_norm() - self.radius).max(T::zero())
    }

    /// Lebesgue measure `|B|`.
    pub fn volume(&self) -> T {
        match self.center.len() {
            1 => lit::<T>(2.0) * self.radius,
            2 => T::PI() * self.radius * self.radius,
            d => unit_ball_volume::<T>(d) * self.radius.powi(d as i32),
        }
    }
}

pub(crate) fn unit_ball_volume<T: Scalar>(d: usize) -> T {
    match d {
        1 => lit(2.0),
        2 => T::PI(),
        3 => lit::<T>(4.0 / 3.0) * T::PI(),
        _ => panic!("dimension {d} unsupported"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallClass {
    LogSubdyadic,
    TooSmall,
    TooLarge,
    BelowR0,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn params() -> LogParams<f64> {
        LogParams::new(1, 2.0, 1.0).unwrap()
    }

    #[test]
    fn rho_closed_forms() {
        assert_relative_eq!(log_scale(2.0, E), E, epsilon = 1e-15);
        assert_relative_eq!(log_scale(2.0, E * E), E * E / 2.0, epsilon = 1e-14);
        assert_relative_eq!(log_scale(3.0, E * E), E * E / 4.0, epsilon = 1e-14);
        assert_relative_eq!(params().rho(2f64.exp()).unwrap(), 3.694_528_049_465_325, epsilon = 1e-12);
    }

    #[test]
    fn aperture_closed_forms() {
        assert_relative_eq!(log_aperture(2.0, 1.0 / E), 1.0 / E, epsilon = 1e-15);
        assert_relative_eq!(log_aperture(3.0, (-2.0f64).exp()), 4.0 * (-2.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn domain_errors() {
        let p = params();
        assert!(p.rho(p.r0 * 0.5).is_err());
        assert!(p.aperture(p.t0).is_err());
        assert!(p.aperture(0.0).is_err());
        assert!(p.stability_ratio(1.0, 100.0).is_err());
    }

    #[test]
    fn defaults_satisfy_invariants() {
        for &gamma in &[1.05f64, 1.5, 2.0, 3.0] {
            for dim in [1, 2] {
                let p = LogParams::new(dim, gamma, 0.5).unwrap();
                assert!(p.t0 <= (1.0 - gamma).exp());
                assert!(p.t0 < 2f64.powi(-(p.k0 + 2)));
                assert!(2f64.powi(p.k0) >= p.r0);
                assert!(p.lambda > 1.0);
            }
        }
        assert!(LogParams::new(3, 2.0, 0.0).is_err());
        assert!(LogParams::new(1, 1.0, 0.0).is_err());
        assert!(params().with_sigma(0.4).is_err());
    }

    #[test]
    fn ball_classification() {
        let p = params();
        let r = E.powi(4);
        let rho = p.rho(r).unwrap();
        assert_relative_eq!(rho, r / 4.0);
        let at = |radius: f64| Ball::new(vec![r + radius], radius).unwrap();
        assert_eq!(p.classify_ball(&at(rho)), BallClass::LogSubdyadic);
        assert_eq!(p.classify_ball(&at(r)), BallClass::TooLarge);
        assert_eq!(p.classify_ball(&at(rho / 10.0)), BallClass::TooSmall);
        let low = Ball::new(vec![p.r0 / 2.0 + 1.0], 1.0).unwrap();
        assert_eq!(p.classify_ball(&low), BallClass::BelowR0);
        let around_origin = Ball::new(vec![1.0], 5.0).unwrap();
        assert_eq!(around_origin.distance_to_origin(), 0.0);
        assert_eq!(p.classify_ball(&around_origin), BallClass::BelowR0);
    }

    #[test]
    fn stability_examples() {
        let p = params();
        assert_eq!(p.stability_ratio(1e6, 1e6).unwrap(), 1.0);
        let r = E.powi(20);
        let ratio = p.stability_ratio(r, r + p.rho(r).unwrap()).unwrap();
        assert!((0.95..=1.10).contains(&ratio), "{ratio}");
        let devs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&e| {
                let r = E.powi(e);
                (p.stability_ratio(r, r + p.rho(r).unwrap()).unwrap() - 1.0).abs()
            })
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
    }

    #[test]
    fn stability_deviation_non_increasing_along_doubling() {
        let p = params();
        let mut prev = f64::INFINITY;
        let mut r = 64.0;
        while r < 1e12 {
            let dev = p.stability_deviation(1.0, r).unwrap();
            assert!(dev <= prev, "deviation grew at R = {r}");
            prev = dev;
            r *= 2.0;
        }
    }

    #[test]
    fn rho_and_aperture_monotone_on_log_grids() {
        for &gamma in &[1.5f64, 2.0, 3.0] {
            let p = LogParams::new(1, gamma, 0.0).unwrap();
            let lo = p.r0.max((gamma - 1.0 + 0.1f64).exp()).ln();
            let hi = 1e12f64.ln();
            let grid: Vec<f64> = (0..400).map(|i| (lo + (hi - lo) * i as f64 / 399.0).exp()).collect();
            for w in grid.windows(2) {
                assert!(p.rho(w[1]).unwrap() > p.rho(w[0]).unwrap());
            }
            let tgrid: Vec<f64> = (1..400).map(|i| p.t0 * (-(i as f64) * 0.05).exp()).collect();
            for w in tgrid.windows(2) {
                // t decreasing => aperture decreasing
                assert!(p.aperture(w[1]).unwrap() < p.aperture(w[0]).unwrap());
            }
        }
    }

    proptest! {
        #[test]
        fn aperture_is_dual_to_rho(gamma in 1.01f64..4.0, u in 0.5f64..60.0) {
            let t = (-u).exp();
            let prod = log_aperture(gamma, t) * log_scale(gamma, 1.0 / t);
            prop_assert!((prod - 1.0).abs() < 1e-13);
        }

        #[test]
        fn classification_is_rotation_invariant(angle in 0.0f64..std::f64::consts::TAU, scale in 0.05f64..3.0, lr in 3.0f64..20.0) {
            let p = LogParams::new(2, 2.0, 0.0).unwrap();
            let rb = lr.exp();
            let radius = scale * p.rho(rb).unwrap();
            let c = rb + radius;
            let a = Ball::new(vec![c, 0.0], radius).unwrap();
            let b = Ball::new(vec![c * angle.cos(), c * angle.sin()], radius).unwrap();
            prop_assert_eq!(p.classify_ball(&a), p.classify_ball(&b));
        }
    }
}
