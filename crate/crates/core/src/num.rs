//! Scalar abstraction for the real-valued dynamics and penalties.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the generic math is written against.
///
/// Implemented for `f32` and `f64`; experiments default to `f64`
/// (see the aliases at the crate root).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64` literals in parameter defaults.
    fn from_f64_lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
