//! Scalar abstractions shared by the whole engine.
//!
//! [`Scalar`] covers anything an operator can be assembled over, including
//! exact rationals. [`Real`] adds what the floating-point paths need
//! (square roots, dense linear algebra).

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::Neg;

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive, Num, NumAssign, ToPrimitive};

pub trait Scalar:
    Num + Copy + Debug + Send + Sync + FromPrimitive + Neg<Output = Self> + PartialOrd + 'static
{
    fn from_i64_exact(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable in scalar type")
    }

    fn abs_val(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num + Copy + Debug + Send + Sync + FromPrimitive + Neg<Output = T> + PartialOrd + 'static
{
}

pub trait Real: Scalar + Float + RealField + NumAssign + Sum + Display + LowerExp + ToPrimitive {
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Scalar + Float + RealField + NumAssign + Sum + Display + LowerExp + ToPrimitive {}
