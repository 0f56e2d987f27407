//! Numeric bounds shared by the scalar-generic parts of the crate.
//!
//! Power series and value-gap insertion keys only need field-like arithmetic
//! and an ordering, so they are written against [`Scalar`]. Exact work uses
//! [`BigRational`](num_rational::BigRational); `f64` is accepted for quick
//! approximate checks.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num};

pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Neg<Output = Self> + Debug {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("scalar from i64") / Self::from_i64(den).expect("scalar from i64")
    }
}

impl<T> Scalar for T where T: Num + Clone + PartialOrd + FromPrimitive + Neg<Output = T> + Debug {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn ratio_construction() {
        assert_eq!(f64::from_ratio(3, 2), 1.5);
        let half: BigRational = Scalar::from_ratio(1, 2);
        assert_eq!(half * BigRational::from_i64(4).unwrap(), BigRational::from_i64(2).unwrap());
    }
}
