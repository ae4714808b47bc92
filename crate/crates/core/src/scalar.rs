//! Scalar abstraction: the whole library is generic over the working
//! floating-point type.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numerics run on: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Shorthand for converting an `f64` literal into the working type.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("literal not representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
