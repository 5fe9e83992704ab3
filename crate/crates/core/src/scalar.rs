//! Scalar abstraction shared by the billing, profile and metric code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type usable for bills, profiles and metrics: `f32` or `f64`.
///
/// The LP backend works in `f64`; values cross that boundary through
/// [`Scalar::to_f64_lossy`] and [`Scalar::lit`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Energy integration factor for one 15-minute step, in hours.
    fn quarter() -> Self {
        Self::lit(0.25)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Maximum of a slice, `None` if empty. NaNs are ignored.
pub fn max_of<T: Scalar>(xs: &[T]) -> Option<T> {
    xs.iter().copied().fold(None, |acc, x| match acc {
        None => Some(x),
        Some(m) => Some(m.max(x)),
    })
}
