//! Special functions: Gauss–Legendre rules, the compactly supported bump
//! `exp(-1/(1-x^2))`, its normalized antiderivative, and the Hurwitz zeta
//! function used to wrap polynomially decaying kernels around the torus.

use std::sync::OnceLock;

use crate::scalar::{lit, Scalar};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

pub(crate) fn gl16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Integrate `f` over `[a, b]` with the 16-point Gauss–Legendre rule.
pub fn integrate_gl16<T: Scalar>(a: T, b: T, f: impl Fn(T) -> T) -> T {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    gl16()
        .iter()
        .map(|&(x, w)| lit::<T>(w) * f(mid + half * lit(x)))
        .sum::<T>()
        * half
}

/// `exp(-1/(1-x^2))` on `(-1, 1)`, zero elsewhere.
#[inline]
pub fn standard_bump<T: Scalar>(x: T) -> T {
    let one = T::one();
    if x.abs() >= one {
        return T::zero();
    }
    (-one / (one - x * x)).exp()
}

const STEP_PANELS: usize = 256;

/// Normalized antiderivative of [`standard_bump`]: a `C^∞` step rising from
/// `0` at `-1` to `1` at `+1`.
///
/// Values come from a cumulative 16-point Gauss–Legendre table plus one
/// partial panel, so the result is accurate to rounding and exactly smooth.
#[derive(Debug, Clone)]
pub struct SmoothStep<T> {
    cumulative: Vec<T>,
    panel: T,
    mass: T,
}

impl<T: Scalar> SmoothStep<T> {
    pub fn new() -> Self {
        let panel = lit::<T>(2.0 / STEP_PANELS as f64);
        let mut cumulative = Vec::with_capacity(STEP_PANELS + 1);
        let mut acc = T::zero();
        cumulative.push(acc);
        for p in 0..STEP_PANELS {
            let a = -T::one() + panel * T::from_usize_lossy(p);
            acc = acc + integrate_gl16(a, a + panel, standard_bump);
            cumulative.push(acc);
        }
        Self {
            cumulative,
            panel,
            mass: acc,
        }
    }

    /// Total mass `∫ exp(-1/(1-x^2)) dx` over `[-1, 1]`.
    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn value(&self, y: T) -> T {
        let one = T::one();
        if y <= -one {
            return T::zero();
        }
        if y >= one {
            return one;
        }
        let p = ((y + one) / self.panel)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(STEP_PANELS - 1);
        let start = -one + self.panel * T::from_usize_lossy(p);
        let partial = integrate_gl16(start, y, standard_bump);
        ((self.cumulative[p] + partial) / self.mass).min(one).max(T::zero())
    }

    /// Derivative of [`SmoothStep::value`].
    pub fn density(&self, y: T) -> T {
        standard_bump(y) / self.mass
    }
}

impl<T: Scalar> Default for SmoothStep<T> {
    fn default() -> Self {
        Self::new()
    }
}

const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q + k)^{-s}` for `s > 1`, `q > 0`, by
/// Euler–Maclaurin summation.
pub fn hurwitz_zeta<T: Scalar>(s: T, q: T) -> T {
    debug_assert!(s > T::one() && q > T::zero());
    let direct = (2.0 * s.to_f64_lossy()).ceil().max(10.0) as usize;
    let mut sum = T::zero();
    for k in 0..direct {
        sum = sum + (q + T::from_usize_lossy(k)).powf(-s);
    }
    let big_q = q + T::from_usize_lossy(direct);
    let q_pow = big_q.powf(-s);
    sum = sum + big_q * q_pow / (s - T::one()) + q_pow * lit(0.5);
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j-2) · Q^{-s-2j+1}
    let inv_q2 = T::one() / (big_q * big_q);
    let mut rising = s; // s(s+1)…(s+2j-2)
    let mut factorial = 2.0; // (2j)!
    let mut q_term = q_pow / big_q;
    for (j, &b) in BERNOULLI_EVEN.iter().enumerate() {
        let j = j + 1;
        sum = sum + lit::<T>(b / factorial) * rising * q_term;
        let next = 2 * j;
        rising = rising * (s + T::from_usize_lossy(next - 1)) * (s + T::from_usize_lossy(next));
        factorial *= ((next + 1) * (next + 2)) as f64;
        q_term = q_term * inv_q2;
    }
    sum
}
