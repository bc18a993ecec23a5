//! Truncated Taylor series ("jets") with complex coefficients.
//!
//! Composing elementary functions on jets is Faà di Bruno's formula carried
//! out numerically: the `j`-th coefficient of `f(x0 + ε)` times `j!` is the
//! `j`-th derivative of `f` at `x0`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> Jet<T> {
    /// The jet of the constant `c`, truncated after order `order`.
    pub fn constant(c: Complex<T>, order: usize) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The jet of the identity function at `x0`.
    pub fn variable(x0: T, order: usize) -> Self {
        let mut jet = Self::constant(Complex::new(x0, T::zero()), order);
        if order > 0 {
            jet.coeffs[1] = Complex::new(T::one(), T::zero());
        }
        jet
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> Complex<T> {
        self.coeffs[j]
    }

    /// `j`-th derivative at the expansion point.
    pub fn derivative(&self, j: usize) -> Complex<T> {
        let mut factorial = T::one();
        for i in 2..=j {
            factorial = factorial * T::from_usize_lossy(i);
        }
        self.coeffs[j] * factorial
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    pub fn add_constant(&self, c: Complex<T>) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0] + c;
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Natural logarithm; the constant term must be non-zero.
    pub fn ln(&self) -> Self {
        let a = &self.coeffs;
        let mut b = vec![Complex::new(T::zero(), T::zero()); a.len()];
        b[0] = a[0].ln();
        for n in 1..a.len() {
            let mut acc = a[n] * T::from_usize_lossy(n);
            for k in 1..n {
                acc = acc - b[k] * a[n - k] * T::from_usize_lossy(k);
            }
            b[n] = acc / (a[0] * T::from_usize_lossy(n));
        }
        Self { coeffs: b }
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut e = vec![Complex::new(T::zero(), T::zero()); a.len()];
        e[0] = a[0].exp();
        for n in 1..a.len() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 1..=n {
                acc = acc + a[k] * e[n - k] * T::from_usize_lossy(k);
            }
            e[n] = acc / T::from_usize_lossy(n);
        }
        Self { coeffs: e }
    }

    /// Real power `self^p`; the constant term must be positive real.
    pub fn powf(&self, p: T) -> Self {
        self.ln().scale(Complex::new(p, T::zero())).exp()
    }
}

impl<T: Scalar> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: &Jet<T>) -> Jet<T> {
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: &Jet<T>) -> Jet<T> {
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet {
            coeffs: self.coeffs.iter().map(|&a| -a).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: &Jet<T>) -> Jet<T> {
        let n = self.coeffs.len();
        let mut out = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().take(n - i).enumerate() {
                out[i + j] = out[i + j] + a * b;
            }
        }
        Jet { coeffs: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derivatives_of_log_match_closed_form() {
        // d^j/dx^j ln x = (-1)^{j-1} (j-1)! / x^j
        let x0 = 2.5f64;
        let l = Jet::variable(x0, 5).ln();
        let mut fact = 1.0;
        for j in 1..=5 {
            if j > 1 {
                fact *= (j - 1) as f64;
            }
            let expect = (-1f64).powi(j as i32 - 1) * fact / x0.powi(j as i32);
            assert_relative_eq!(l.derivative(j).re, expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn exp_of_ln_is_identity() {
        let x = Jet::variable(1.7f64, 6);
        let y = x.ln().exp();
        for j in 0..=6 {
            assert_relative_eq!(y.coeff(j).re, x.coeff(j).re, epsilon = 1e-14);
        }
    }

    #[test]
    fn power_matches_binomial_series() {
        // (x0 + ε)^p has coefficients C(p, j) x0^{p-j}
        let (x0, p) = (3.0f64, 2.5f64);
        let y = Jet::variable(x0, 4).powf(p);
        let mut binom = 1.0;
        for j in 0..=4 {
            if j > 0 {
                binom *= (p - (j - 1) as f64) / j as f64;
            }
            assert_relative_eq!(y.coeff(j).re, binom * x0.powf(p - j as f64), max_relative = 1e-13);
        }
    }
}
