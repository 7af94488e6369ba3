//! Numeric abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A real scalar type the solvers can run on.
///
/// Implemented for `f64` (the default everywhere) and `f32`. Tolerances are
/// part of the trait because a 1e-9 mass check is meaningless in single
/// precision.
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
    /// Absolute tolerance for probability-mass and value-preservation checks.
    fn mass_tol() -> Self;

    /// Pivot and feasibility tolerance of the simplex solver.
    fn lp_tol() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f64 {
    fn mass_tol() -> Self {
        1e-9
    }

    fn lp_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn mass_tol() -> Self {
        1e-5
    }

    fn lp_tol() -> Self {
        1e-5
    }
}

/// `true` when `a` and `b` agree within the scalar's mass tolerance.
pub fn approx_eq<F: Scalar>(a: F, b: F) -> bool {
    (a - b).abs() <= F::mass_tol()
}
