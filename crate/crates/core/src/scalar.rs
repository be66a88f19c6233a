//! Scalar abstraction shared by the matrix, permanent and Fock-space code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point type the numerical core is generic over.
///
/// The tolerance constants scale the unitarity checks to the precision of
/// the type: a matrix built by this crate must be unitary to
/// `CONSTRUCTION_TOL`, a matrix handed in by a caller to `INPUT_TOL`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    const CONSTRUCTION_TOL: Self;
    const INPUT_TOL: Self;
    /// Slack allowed when a computed probability leaves `[0, 1]`.
    const PROBABILITY_SLACK: Self;
    /// Smallest derivative magnitude treated as phase-identifiable.
    const MIN_SLOPE: Self;

    /// Lossless conversion from a small literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in every supported float type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable as float")
    }
}

macro_rules! impl_real {
    ($t:ty, $construction:expr, $input:expr, $slack:expr, $slope:expr) => {
        impl Real for $t {
            const CONSTRUCTION_TOL: Self = $construction;
            const INPUT_TOL: Self = $input;
            const PROBABILITY_SLACK: Self = $slack;
            const MIN_SLOPE: Self = $slope;
        }
    };
}

impl_real!(f64, 1e-12, 1e-10, 1e-12, 1e-14);
impl_real!(f32, 1e-5, 1e-4, 1e-5, 1e-7);
