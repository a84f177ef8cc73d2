//! Vasicek and Lévy-Vasicek interest-rate models built from their pricing kernels.
//!
//! The closed-form layer ([`vasicek`]), the Lévy exponent catalogue
//! ([`levy_exponent`]) and the quadrature-based Lévy-Vasicek layer
//! ([`levy_vasicek`]) are generic over the floating-point type through
//! [`Scalar`]. The Monte Carlo oracles in [`montecarlo`] run in `f64`.
//!
//! The crate-root aliases fix the scalar to `f64` (or `f32` with the `32` suffix)
//! for callers who do not need the generic surface.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod levy_exponent;
pub mod levy_vasicek;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;
pub mod vasicek;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelParams = vasicek::ModelParams<f64>;
pub type BondQuote = vasicek::BondQuote<f64>;
pub type UiVerdict = vasicek::UiVerdict<f64>;
pub type ExponentDomain = levy_exponent::ExponentDomain<f64>;
pub type LevyExponentModel = levy_exponent::LevyExponentModel<f64>;
pub type LevyVasicekModel = levy_vasicek::LevyVasicekModel<f64>;
pub type MeasureChangeStats = levy_vasicek::MeasureChangeStats<f64>;
pub type QuadratureConfig = quadrature::QuadratureConfig<f64>;

pub type ModelParams32 = vasicek::ModelParams<f32>;
pub type LevyExponentModel32 = levy_exponent::LevyExponentModel<f32>;
pub type LevyVasicekModel32 = levy_vasicek::LevyVasicekModel<f32>;
pub type QuadratureConfig32 = quadrature::QuadratureConfig<f32>;

pub use montecarlo::{McEstimate, SamplePath, Scheme, SimulationConfig};
pub use vasicek::Regime;
