//! Floating-point scalar abstraction shared by the gradient, classifier and
//! metrics code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for gradients, network activations and metrics: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::FloatConst
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64`, used for constants and thresholds.
    fn of(value: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(value).expect("f64 converts to any float")
    }

    fn of_usize(value: usize) -> Self {
        <Self as num_traits::FromPrimitive>::from_usize(value).expect("usize converts to any float")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
