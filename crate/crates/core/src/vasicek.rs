//! Classical Vasicek model, built from its pricing kernel
//!
//! ```text
//! π_t = exp[−∫₀ᵗ r_s ds − λ W_t − ½ λ² t],   dr_t = k(θ − r_t) dt − σ dW_t.
//! ```
//!
//! Everything here is closed form. Log quantities are assembled first and
//! exponentiated once so long horizons with a negative long rate do not
//! overflow intermediate terms.
//!
//! # Integrated squared kernel exponent
//!
//! With `α_st = a − b e^{k(s−t)}`, `a = σ/k − λ` and `b = σ/k`,
//!
//! ```text
//! A_t² = ∫₀ᵗ α_st² ds
//!      = a² t − (2ab/k)(1 − e^{−kt}) + (b²/2k)(1 − e^{−2kt}),
//! ```
//!
//! obtained by expanding the square and integrating each exponential term
//! separately. For each `t` the kernel is lognormal,
//! `π_t = P_{0t} exp(A_t Z − ½ A_t²)`, which gives the tail expectation below.

use crate::error::{Error, Result};
use crate::scalar::{one_minus_exp_neg, Scalar};

/// Parameters shared by the classical and Lévy model families.
///
/// `k` is the mean-reversion rate, `theta` the mean-reversion level,
/// `sigma` the short-rate volatility, `lambda` the risk aversion and `r0` the
/// initial short rate. In the Brownian convention `sigma` has units of
/// time^(-3/2); in the Lévy convention it is 1/time and the driver is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub k: T,
    pub theta: T,
    pub sigma: T,
    pub lambda: T,
    pub r0: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(k: T, theta: T, sigma: T, lambda: T, r0: T) -> Result<Self> {
        let p = Self {
            k,
            theta,
            sigma,
            lambda,
            r0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `k > 0`, `lambda > 0`, `sigma ≥ 0` (zero gives the deterministic limit), all finite.
    pub fn validate(&self) -> Result<()> {
        let bad = |field, value: T, reason| {
            Err(Error::InvalidParameter {
                field,
                value: value.to_f64_lossy(),
                reason,
            })
        };
        for (field, v) in [
            ("k", self.k),
            ("theta", self.theta),
            ("sigma", self.sigma),
            ("lambda", self.lambda),
            ("r0", self.r0),
        ] {
            if !v.is_finite() {
                return bad(field, v, "must be finite");
            }
        }
        if !(self.k > T::zero()) {
            return bad("k", self.k, "mean-reversion rate must be positive");
        }
        if self.sigma < T::zero() {
            return bad("sigma", self.sigma, "volatility must be non-negative");
        }
        if !(self.lambda > T::zero()) {
            return bad("lambda", self.lambda, "risk aversion must be positive");
        }
        Ok(())
    }

    /// Volatility of the long-bond return, `σ/k`.
    pub fn long_bond_volatility(&self) -> T {
        self.sigma / self.k
    }

    /// `σ/k − λ`: the limiting kernel exponent, and the volatility of the
    /// terminal-measure density martingale.
    pub fn terminal_exponent(&self) -> T {
        self.sigma / self.k - self.lambda
    }
}

/// Price and continuously-compounded yield of a discount bond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondQuote<T> {
    pub t: T,
    pub maturity: T,
    pub log_price: T,
    pub price: T,
    /// `−log(price)/(T − t)`; the short rate `r_t` when `T = t`.
    pub zero_yield: T,
}

impl<T: Scalar> BondQuote<T> {
    pub(crate) fn from_log_price(t: T, maturity: T, log_price: T, r_t: T) -> Self {
        let tau = maturity - t;
        let zero_yield = if tau > T::zero() {
            -log_price / tau
        } else {
            r_t
        };
        Self {
            t,
            maturity,
            log_price,
            price: log_price.exp(),
            zero_yield,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    UniformlyIntegrable,
    NotUiBoundary,
    NotUiUnbounded,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::UniformlyIntegrable => "UniformlyIntegrable",
            Self::NotUiBoundary => "NotUiBoundary",
            Self::NotUiUnbounded => "NotUiUnbounded",
        }
    }

    pub fn classify<T: Scalar>(long_rate: T, zero_tolerance: T) -> Self {
        if long_rate > zero_tolerance {
            Self::UniformlyIntegrable
        } else if long_rate < -zero_tolerance {
            Self::NotUiUnbounded
        } else {
            Self::NotUiBoundary
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform-integrability classification of the pricing kernel.
///
/// `witness_p` is present exactly when the regime is uniformly integrable and
/// is an exponent `p > 1` for which `E[π_t^p]` stays bounded. `+∞` means every
/// `p > 1` works.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UiVerdict<T> {
    pub regime: Regime,
    pub long_rate: T,
    pub witness_p: Option<T>,
    pub zero_tolerance: T,
}

pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-12;

/// Mean and variance of `r_t` given `r_0`.
pub fn short_rate_moments<T: Scalar>(p: &ModelParams<T>, t: T) -> (T, T) {
    let decay = (-p.k * t).exp();
    let mean = p.theta + (p.r0 - p.theta) * decay;
    let variance =
        p.sigma * p.sigma * one_minus_exp_neg(T::lit(2.0) * p.k * t) / (T::lit(2.0) * p.k);
    (mean, variance)
}

/// Exponential long rate `R∞ = θ + λσ/k − σ²/(2k²)`.
pub fn long_rate<T: Scalar>(p: &ModelParams<T>) -> T {
    let b = p.sigma / p.k;
    p.theta + p.lambda * b - T::lit(0.5) * b * b
}

/// Log of the time-`t` price of the bond maturing at `maturity`, given `r_t`.
pub fn log_bond_price<T: Scalar>(p: &ModelParams<T>, t: T, r_t: T, maturity: T) -> Result<T> {
    if maturity < t || t.is_nan() || maturity.is_nan() {
        return Err(Error::InvalidHorizon {
            t: t.to_f64_lossy(),
            maturity: maturity.to_f64_lossy(),
        });
    }
    let r_inf = long_rate(p);
    let tau = maturity - t;
    let g = one_minus_exp_neg(p.k * tau);
    let quarter = T::lit(0.25);
    Ok(-r_inf * tau + g / p.k * (r_inf - r_t) - quarter * p.sigma * p.sigma / p.k.powi(3) * g * g)
}

pub fn bond_price<T: Scalar>(
    p: &ModelParams<T>,
    t: T,
    r_t: T,
    maturity: T,
) -> Result<BondQuote<T>> {
    let log_price = log_bond_price(p, t, r_t, maturity)?;
    Ok(BondQuote::from_log_price(t, maturity, log_price, r_t))
}

/// Coefficient of `t` in `log E[π_t^p]`: `−p[θ + ½λ² − ½ p (σ/k − λ)²]`.
pub fn lp_time_coefficient<T: Scalar>(p: &ModelParams<T>, power: T) -> T {
    let half = T::lit(0.5);
    let a = p.terminal_exponent();
    -power * (p.theta + half * p.lambda * p.lambda - power * half * a * a)
}

/// The two bounded terms of `log E[π_t^p]`.
pub fn lp_bounded_terms<T: Scalar>(p: &ModelParams<T>, power: T, t: T) -> T {
    let b = p.sigma / p.k;
    let a = p.terminal_exponent();
    let first = power / p.k * (p.theta - p.r0 - power * b * a) * one_minus_exp_neg(p.k * t);
    let second = power * power * p.sigma * p.sigma / (T::lit(4.0) * p.k.powi(3))
        * one_minus_exp_neg(T::lit(2.0) * p.k * t);
    first + second
}

/// `log E[π_t^p]`.
pub fn lp_log_moment<T: Scalar>(p: &ModelParams<T>, power: T, t: T) -> T {
    lp_time_coefficient(p, power) * t + lp_bounded_terms(p, power, t)
}

/// Classifies the kernel by the sign of the long rate.
///
/// In the uniformly integrable regime the witness is the exponent at which the
/// linear-in-`t` term of `log E[π_t^p]` vanishes,
/// `p = (θ + ½λ²) / (½(σ/k − λ)²)`, and `+∞` when `λ = σ/k`.
pub fn ui_classify<T: Scalar>(p: &ModelParams<T>, zero_tolerance: T) -> UiVerdict<T> {
    let long_rate = long_rate(p);
    let regime = Regime::classify(long_rate, zero_tolerance);
    let witness_p = (regime == Regime::UniformlyIntegrable).then(|| {
        let half = T::lit(0.5);
        let a = p.terminal_exponent();
        let denom = half * a * a;
        let w = if denom == T::zero() {
            T::infinity()
        } else {
            (p.theta + half * p.lambda * p.lambda) / denom
        };
        debug_assert!(w > T::one(), "witness p = {w} must exceed 1 when R∞ > 0");
        debug_assert!(!w.is_finite() || lp_time_coefficient(p, w) <= T::lit(1e-12) * w * w);
        w
    });
    UiVerdict {
        regime,
        long_rate,
        witness_p,
        zero_tolerance,
    }
}

/// `A_t² = ∫₀ᵗ α_st² ds`, see the module docs for the derivation.
pub fn a_t_squared<T: Scalar>(p: &ModelParams<T>, t: T) -> T {
    let a = p.terminal_exponent();
    let b = p.sigma / p.k;
    let two = T::lit(2.0);
    a * a * t - two * a * b / p.k * one_minus_exp_neg(p.k * t)
        + b * b / (two * p.k) * one_minus_exp_neg(two * p.k * t)
}

/// `E[π_t 1{π_t > δ}] = P_{0t} N((log P_{0t} + ½A_t² − log δ)/A_t)`.
pub fn tail_expectation<T: Scalar>(p: &ModelParams<T>, t: T, delta: T) -> Result<T> {
    if !(delta > T::zero()) {
        return Err(Error::InvalidParameter {
            field: "delta",
            value: delta.to_f64_lossy(),
            reason: "must be positive",
        });
    }
    if t < T::zero() {
        return Err(Error::InvalidHorizon {
            t: 0.0,
            maturity: t.to_f64_lossy(),
        });
    }
    if t == T::zero() {
        return Ok(if delta < T::one() {
            T::one()
        } else {
            T::zero()
        });
    }
    let log_p = log_bond_price(p, T::zero(), p.r0, t)?;
    let a2 = a_t_squared(p, t);
    let a = a2.sqrt();
    let z = (log_p + T::lit(0.5) * a2 - delta.ln()) / a;
    Ok(log_p.exp() * z.norm_cdf())
}

/// Lower bound `exp(−(r₀/k)·1{r₀>0} − σ²/(4k³))` on `sup_t E[π_t 1{π_t > δ}]`
/// that holds for every `δ` when the long rate is zero.
pub fn boundary_tail_lower_bound<T: Scalar>(p: &ModelParams<T>) -> T {
    let drift = if p.r0 > T::zero() {
        p.r0 / p.k
    } else {
        T::zero()
    };
    (-drift - p.sigma * p.sigma / (T::lit(4.0) * p.k.powi(3))).exp()
}

/// For a negative long rate, the time `t*` beyond which `P_{0t} > γ`, witnessing
/// that the kernel is unbounded in `L¹`. `None` unless `R∞ < 0` and `γ > 0`.
pub fn l1_escape_time<T: Scalar>(p: &ModelParams<T>, gamma: T) -> Option<T> {
    let r_inf = long_rate(p);
    if !(r_inf < T::zero()) || !(gamma > T::zero()) {
        return None;
    }
    let jump = r_inf - p.r0;
    let drift = if jump <= T::zero() {
        jump / p.k
    } else {
        T::zero()
    };
    let convexity = p.sigma * p.sigma / (T::lit(4.0) * p.k.powi(3));
    Some((drift - convexity - gamma.ln()) / r_inf)
}

/// Digital put on the natural numeraire `n_T = 1/π_T` in the constant-rate GBM kernel model:
/// `e^{−rT} N[(log(e^{−rT}κ) + ½λ²T)/(λ√T)]`.
pub fn digital_put_gbm<T: Scalar>(r: T, lambda: T, kappa: T, maturity: T) -> T {
    let disc = -r * maturity;
    let z =
        (disc + kappa.ln() + T::lit(0.5) * lambda * lambda * maturity) / (lambda * maturity.sqrt());
    disc.exp() * z.norm_cdf()
}

/// Long-bond return `L_t = exp[R∞ t + (r₀ − r_t)/k]`.
pub fn long_bond_return<T: Scalar>(p: &ModelParams<T>, t: T, r_t: T) -> T {
    (long_rate(p) * t + (p.r0 - r_t) / p.k).exp()
}

/// `λ − σ/k`; zero exactly when the terminal measure is the physical measure.
pub fn ross_recovery_gap<T: Scalar>(p: &ModelParams<T>) -> T {
    p.lambda - p.sigma / p.k
}
