//! Scalar abstraction for the simulation core.
//!
//! Everything numeric is generic over [`Real`], which is satisfied by `f32`
//! and `f64`. Concrete `f64` aliases for the main types live at the crate
//! root; `f64` is what the scenario runner and the validation suites use.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Floating-point scalar usable throughout the core: `f32` or `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + NumAssign + FftNum {
    /// Converts an `f64` constant into `Self`.
    ///
    /// Panics only if the value is not representable at all, which cannot
    /// happen for the finite literals this crate feeds it.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant")
    }

    /// Converts a `usize` (grid sizes, mode orders) into `Self`.
    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("grid size fits the scalar")
    }
}

impl<T> Real for T where T: Float + FloatConst + FromPrimitive + NumAssign + FftNum {}

/// Pairwise summation; reproducible to ~1e-13 relative independently of
/// how callers chunk the work, and far more accurate than a naive fold.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    if values.len() <= 32 {
        let mut acc = T::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
