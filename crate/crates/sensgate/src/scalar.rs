//! Scalar abstraction so the numeric core can run at either precision.
//!
//! Training runs at `f32`; gradient checking instantiates the same code at
//! `f64` where central differences are trustworthy.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable throughout the numeric core.
pub trait Real:
    Float
    + FromPrimitive
    + NumAssignOps
    + Sum
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into the active scalar type.
#[inline]
pub fn real<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 conversion")
}

/// Numerically stable logistic function.
///
/// Written in the `1 / (1 + exp(-x))` form: `exp` saturates to `inf` or `0`
/// for large inputs, so the result degrades gracefully to exactly `0` or `1`
/// instead of producing NaN.
#[inline]
pub fn sigmoid<S: Real>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

/// Inverse of [`sigmoid`]. Defined for `p` in the open interval (0, 1).
#[inline]
pub fn logit<S: Real>(p: S) -> S {
    (p / (S::one() - p)).ln()
}
