//! Scalar abstraction for the numeric core.
//!
//! Everything that manipulates carriers, lattice points, or DCT coefficients
//! is generic over [`Real`], which `f32` and `f64` both satisfy. Concrete
//! aliases for the common `f64` instantiation live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the crate.
///
/// `Float::round` rounds half away from zero, which is the tie-break this
/// crate standardizes on for pixel and lattice rounding.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lifts an `f64` constant into this type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }

    /// Lifts a count into this type.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("value not representable as f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<Self>
        + AddAssign
        + SubAssign
        + MulAssign
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Squared Euclidean norm of `v`.
pub fn norm_sq<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum()
}

/// Euclidean norm of `v`.
pub fn norm<T: Real>(v: &[T]) -> T {
    norm_sq(v).sqrt()
}

/// Squared Euclidean distance between `a` and `b`.
pub fn dist_sq<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between `a` and `b`.
pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    dist_sq(a, b).sqrt()
}
