//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::{Mutex, OnceLock};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::{FftNum, FftPlanner};

/// Real floating-point type the toolkit is generic over (`f32` or `f64`).
///
/// Every tolerance quoted in the test-suite assumes `f64`; `f32` is supported
/// for cheap exploratory runs.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Process-wide FFT planner for this precision.
    fn planner() -> &'static Mutex<FftPlanner<Self>>;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("representable integer")
    }

    #[inline]
    fn from_i64_lossy(x: i64) -> Self {
        Self::from_i64(x).expect("representable integer")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn planner() -> &'static Mutex<FftPlanner<Self>> {
        static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
        PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
    }
}

impl Scalar for f32 {
    fn planner() -> &'static Mutex<FftPlanner<Self>> {
        static PLANNER: OnceLock<Mutex<FftPlanner<f32>>> = OnceLock::new();
        PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
    }
}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}
