//! Scalar abstraction: the whole crate is generic over `f32`/`f64`.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for `f64` literals in generic code (tolerances, defaults).
pub(crate) fn lit<S: Scalar>(v: f64) -> S {
    S::from_f64(v).expect("f64 literal representable in scalar type")
}

pub(crate) fn from_usize<S: Scalar>(v: usize) -> S {
    S::from_usize(v).expect("usize representable in scalar type")
}
