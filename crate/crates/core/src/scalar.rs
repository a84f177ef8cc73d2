//! Scalar abstraction so the closed-form and quadrature layers run over `f32` or `f64`.

use core::fmt::{Debug, Display};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the model layer is generic over.
///
/// Beyond [`Float`] we only need the complementary error function, which is
/// forwarded to `libm` for each concrete width.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn erfc(self) -> Self;

    /// Literal conversion; every `f64` constant we use is representable (possibly rounded).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Standard normal distribution function.
    #[inline]
    fn norm_cdf(self) -> Self {
        let half = Self::lit(0.5);
        half * (-self * Self::FRAC_1_SQRT_2()).erfc()
    }
}

impl Scalar for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Scalar for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// `(1 - e^{-x}) / 1`, i.e. `-expm1(-x)`, without cancellation for small `x`.
#[inline]
pub(crate) fn one_minus_exp_neg<T: Scalar>(x: T) -> T {
    -(-x).exp_m1()
}
