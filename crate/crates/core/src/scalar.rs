//! Scalar abstraction shared by the numeric parts of the crate.
//!
//! Kernel values are integer counts; everything downstream of the Gram
//! matrix (normalization, the ridge solve, scores, metrics) is generic over
//! a floating point type so the same code runs in `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from a count or an `f64` literal.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 is representable")
    }

    fn of_count(v: u64) -> Self {
        Self::from_u64(v).expect("count is representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(<f32 as Scalar>::of(0.5), 0.5f32);
        assert_eq!(<f64 as Scalar>::of_count(7), 7.0);
        assert_eq!(2.5f32.as_f64(), 2.5);
    }
}
