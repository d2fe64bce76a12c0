//! Scalar abstraction shared by the measure, field and density code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the numerical core is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Coordinate and weight tolerance used for validation and atom merging.
    const TOL: f64;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn tol() -> Self {
        Self::of(Self::TOL)
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("finite float converts to f64")
    }
}

impl Real for f64 {
    const TOL: f64 = 1e-12;
}

impl Real for f32 {
    const TOL: f64 = 1e-5;
}
