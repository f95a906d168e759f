//! Scalar abstraction for the numeric kernels.
//!
//! Everything numerical in this crate is written against [`Real`] so the same
//! code instantiates at `f32` or `f64`. The crate root pins `f64` aliases for
//! the types the harnesses and CLI actually use.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    'static
    + Send
    + Sync
    + Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
{
    /// Convert an `f64` constant into `Self`.
    ///
    /// Approximation coefficients and tolerances are written once as `f64`
    /// literals; at `f32` they round to the nearest representable value.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant")
    }

    /// Lossy view of `self` as `f64` (exact when `Self` is `f64`).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
