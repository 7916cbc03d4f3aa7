//! Scalar abstraction for the numeric core.
//!
//! All metric machinery is generic over [`Scalar`], which is any IEEE float
//! with the conversions we need. `f64` is the canonical instantiation (the
//! crate-root aliases use it); `f32` works for smoke-level precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used throughout the crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Absolute tolerance for metric-axiom and certificate comparisons.
    fn tol_metric() -> Self;

    /// Absolute tolerance for primal/dual agreement of transport solves.
    fn tol_gap() -> Self;

    /// Threshold below which a reduced cost counts as zero in the solver.
    fn tol_pivot() -> Self;

    /// Convert an `f64` literal, panicking only on truly unrepresentable input.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("scalar literal out of range")
    }
}

impl Scalar for f64 {
    fn tol_metric() -> f64 {
        1e-9
    }
    fn tol_gap() -> f64 {
        1e-7
    }
    fn tol_pivot() -> f64 {
        1e-12
    }
}

impl Scalar for f32 {
    fn tol_metric() -> f32 {
        1e-4
    }
    fn tol_gap() -> f32 {
        1e-3
    }
    fn tol_pivot() -> f32 {
        1e-6
    }
}
