//! Lévy-Vasicek model: the short rate `dr_t = k(θ − r_t) dt − σ dξ_t` driven by a
//! compensated Lévy process `ξ`, with pricing kernel
//!
//! ```text
//! π_t = exp[−∫₀ᵗ r_s ds − λ ξ_t − ψ(−λ) t].
//! ```
//!
//! Here `σ` has units of 1/time and `ξ` is dimensionless.
//!
//! # Integrals along `α`
//!
//! Bond prices, `Lᵖ` moments and measure-change statistics all reduce to
//! `∫₀ᴸ f(a − b e^{−kτ}) dτ` with `a = σ/k − λ`, `b = σ/k`. Substituting
//! `v = e^{−kτ}` and splitting off the limit value gives
//!
//! ```text
//! f(a) L + ∫_{e^{−kL}}^1 [f(a − b v) − f(a)] / (k v) dv,
//! ```
//!
//! a bounded integrand on a fixed interval whatever the horizon, so a
//! maturity of 10⁴ years costs the same as one of a year.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy_exponent::LevyExponentModel;
use crate::quadrature::{integrate, QuadResult, QuadratureConfig};
use crate::scalar::{one_minus_exp_neg, Scalar};
use crate::vasicek::{BondQuote, ModelParams, Regime, UiVerdict};

pub const DEFAULT_P_MAX: f64 = 4.0;

/// Rate `ω` in the Chebyshev barrier `B(t, ωt)`, per unit time.
pub const DEFAULT_BARRIER_RATE: f64 = 1.0;

/// Measure-change statistics of `∫₀ᵗ α_st dξ_s` under the measure with density
/// `exp[∫α dξ − ∫ψ(α) ds]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureChangeStats<T> {
    pub t: T,
    pub mean_star: T,
    pub variance_star: T,
    pub barrier: T,
    pub drift_constant: T,
}

#[derive(Debug, Clone)]
pub struct LevyVasicekModel<T: Scalar> {
    params: ModelParams<T>,
    driver: LevyExponentModel<T>,
    p_max: T,
    p_limit: T,
}

impl<T: Scalar> LevyVasicekModel<T> {
    pub fn new(params: ModelParams<T>, driver: LevyExponentModel<T>) -> Result<Self> {
        Self::with_p_max(params, driver, T::lit(DEFAULT_P_MAX))
    }

    /// Arguments `−λ` and `σ/k − λ` (and with them every `α_ut`) must lie in the
    /// driver's domain. `p_max` caps the `Lᵖ` witness search; exponents between
    /// the domain limit and `p_max` are rejected per call.
    pub fn with_p_max(
        params: ModelParams<T>,
        driver: LevyExponentModel<T>,
        p_max: T,
    ) -> Result<Self> {
        params.validate()?;
        if !(p_max > T::one()) || p_max.is_nan() {
            return Err(Error::InvalidParameter {
                field: "p_max",
                value: p_max.to_f64_lossy(),
                reason: "must exceed 1",
            });
        }
        let (lo, hi) = alpha_range(&params);
        driver.domain().check_segment(lo, hi)?;
        let p_limit = p_max.min(scaling_limit(&driver, lo, hi));
        Ok(Self {
            params,
            driver,
            p_max,
            p_limit,
        })
    }

    /// Brownian driver with unit scale, reproducing the classical model with
    /// `σ` and `λ` unchanged.
    pub fn classical(params: ModelParams<T>) -> Result<Self> {
        Self::new(params, LevyExponentModel::brownian(T::one())?)
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn driver(&self) -> &LevyExponentModel<T> {
        &self.driver
    }

    pub fn p_max(&self) -> T {
        self.p_max
    }

    /// Largest usable `Lᵖ` exponent: `p_max`, or just inside the point where
    /// `p·α` leaves the domain.
    pub fn p_limit(&self) -> T {
        self.p_limit
    }

    /// `α_st = σ/k − λ − (σ/k) e^{k(s−t)}`.
    pub fn alpha(&self, s: T, t: T) -> Result<T> {
        if s > t || s.is_nan() || t.is_nan() {
            return Err(Error::Ordering {
                s: s.to_f64_lossy(),
                t: t.to_f64_lossy(),
            });
        }
        let b = self.params.long_bond_volatility();
        Ok(self.params.terminal_exponent() - b * (self.params.k * (s - t)).exp())
    }

    /// `∫₀ᴸ f(a − b e^{−kτ}) dτ`; see the module docs.
    fn integrate_along_alpha<F>(
        &self,
        f: F,
        length: T,
        cfg: &QuadratureConfig<T>,
    ) -> Result<QuadResult<T>>
    where
        F: Fn(T) -> T,
    {
        let k = self.params.k;
        let a = self.params.terminal_exponent();
        let b = self.params.long_bond_volatility();
        let limit = f(a);
        let head = limit * length;
        if length == T::zero() || b == T::zero() {
            cfg.validate()?;
            return Ok(QuadResult {
                value: head,
                error_estimate: T::zero(),
                subdivisions: 0,
                evaluations: 1,
            });
        }
        let v0 = (-k * length).exp();
        let r = integrate(|v: T| (f(a - b * v) - limit) / (k * v), v0, T::one(), cfg)?;
        Ok(QuadResult {
            value: head + r.value,
            ..r
        })
    }

    /// `∫_t^T ψ(α_uT) du` with its quadrature error estimate.
    pub fn psi_integral_with_error(
        &self,
        t: T,
        maturity: T,
        cfg: &QuadratureConfig<T>,
    ) -> Result<QuadResult<T>> {
        check_horizon(t, maturity)?;
        self.integrate_along_alpha(|x| self.driver.psi_unchecked(x), maturity - t, cfg)
    }

    pub fn psi_integral(&self, t: T, maturity: T, cfg: &QuadratureConfig<T>) -> Result<T> {
        Ok(self.psi_integral_with_error(t, maturity, cfg)?.value)
    }

    /// `(σ/k²)(|ψ′(σ/k − λ)| + |ψ′(−λ)|)`, a horizon-free bound on
    /// `|∫₀ᵗ ψ(α_st) ds − ψ(σ/k − λ) t|`.
    pub fn psi_integral_bound(&self) -> T {
        let p = &self.params;
        let scale = p.sigma / (p.k * p.k);
        scale
            * (self.driver.psi_prime_unchecked(p.terminal_exponent()).abs()
                + self.driver.psi_prime_unchecked(-p.lambda).abs())
    }

    /// `R∞ = θ + ψ(−λ) − ψ(σ/k − λ)`.
    pub fn long_rate(&self) -> T {
        let p = &self.params;
        p.theta + self.driver.psi_unchecked(-p.lambda)
            - self.driver.psi_unchecked(p.terminal_exponent())
    }

    pub fn log_bond_price(
        &self,
        t: T,
        r_t: T,
        maturity: T,
        cfg: &QuadratureConfig<T>,
    ) -> Result<T> {
        check_horizon(t, maturity)?;
        let p = &self.params;
        let tau = maturity - t;
        // ∫ψ(α) − (θ + ψ(−λ))τ regrouped as the O(1) remainder minus R∞τ.
        let a = p.terminal_exponent();
        let remainder = self.psi_integral(t, maturity, cfg)? - self.driver.psi_unchecked(a) * tau;
        Ok(-self.long_rate() * tau
            + remainder
            + one_minus_exp_neg(p.k * tau) / p.k * (p.theta - r_t))
    }

    pub fn bond_price(
        &self,
        t: T,
        r_t: T,
        maturity: T,
        cfg: &QuadratureConfig<T>,
    ) -> Result<BondQuote<T>> {
        let log_price = self.log_bond_price(t, r_t, maturity, cfg)?;
        Ok(BondQuote::from_log_price(t, maturity, log_price, r_t))
    }

    /// Time-zero bond quotes over a maturity grid, evaluated in parallel.
    pub fn bond_curve(
        &self,
        maturities: &[T],
        cfg: &QuadratureConfig<T>,
    ) -> Result<Vec<BondQuote<T>>> {
        maturities
            .par_iter()
            .map(|&m| self.bond_price(T::zero(), self.params.r0, m, cfg))
            .collect()
    }

    /// `log E[π_t^p]`. Fails with a domain error when `p·α_st` leaves the
    /// driver's domain.
    pub fn lp_log_moment(&self, power: T, t: T, cfg: &QuadratureConfig<T>) -> Result<T> {
        if !(power >= T::one()) {
            return Err(Error::InvalidParameter {
                field: "p",
                value: power.to_f64_lossy(),
                reason: "must be at least 1",
            });
        }
        if t < T::zero() {
            return Err(Error::InvalidHorizon {
                t: 0.0,
                maturity: t.to_f64_lossy(),
            });
        }
        let p = &self.params;
        let (lo, hi) = alpha_range(p);
        self.driver.domain().check_segment(power * lo, power * hi)?;
        let a = p.terminal_exponent();
        let integral = self
            .integrate_along_alpha(|x| self.driver.psi_unchecked(power * x), t, cfg)?
            .value;
        Ok(-power * self.long_rate() * t
            - power / p.k * (p.r0 - p.theta) * one_minus_exp_neg(p.k * t)
            + integral
            - power * self.driver.psi_unchecked(a) * t)
    }

    /// Growth rate of `log E[π_t^p]`, `g(p) = −p R∞ + ψ(p(σ/k − λ)) − p ψ(σ/k − λ)`;
    /// `E[π_t^p]` is bounded in `t` when it is negative.
    pub fn witness_predicate(&self, power: T) -> Result<T> {
        let a = self.params.terminal_exponent();
        Ok(-power * self.long_rate() + self.driver.psi(power * a)?
            - power * self.driver.psi_unchecked(a))
    }

    /// Classifies the kernel by the sign of the long rate. In the uniformly
    /// integrable regime a witness `p > 1` with `g(p) < 0` is found by bisection
    /// on `(1, p_limit]`. `g` is convex with `g(1) = −R∞`, so its negative set is
    /// an interval starting at 1.
    pub fn ui_classify(&self, zero_tolerance: T) -> Result<UiVerdict<T>> {
        let long_rate = self.long_rate();
        let regime = Regime::classify(long_rate, zero_tolerance);
        let witness_p = match regime {
            Regime::UniformlyIntegrable => Some(self.find_witness()?),
            _ => None,
        };
        Ok(UiVerdict {
            regime,
            long_rate,
            witness_p,
            zero_tolerance,
        })
    }

    fn find_witness(&self) -> Result<T> {
        let feasible = |p: T| {
            self.witness_predicate(p)
                .map(|g| g < T::zero())
                .unwrap_or(false)
        };
        let not_found = || Error::WitnessNotFound {
            p_limit: self.p_limit.to_f64_lossy(),
        };

        let mut hi = self.p_limit;
        if feasible(hi) {
            return Ok(hi);
        }
        let mut lo = [1e-6, 1e-9, 1e-12, 1e-15]
            .iter()
            .map(|&eps| T::one() + T::lit(eps))
            .find(|&p| p < hi && p > T::one() && feasible(p))
            .ok_or_else(not_found)?;
        for _ in 0..80 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Statistics over `[0, t]` for the barrier level `δ`.
    pub fn measure_change_stats(
        &self,
        t: T,
        delta: T,
        cfg: &QuadratureConfig<T>,
    ) -> Result<MeasureChangeStats<T>> {
        if !(t > T::zero()) {
            return Err(Error::InvalidHorizon {
                t: 0.0,
                maturity: t.to_f64_lossy(),
            });
        }
        if !(delta > T::zero()) {
            return Err(Error::InvalidParameter {
                field: "delta",
                value: delta.to_f64_lossy(),
                reason: "must be positive",
            });
        }
        let p = &self.params;
        let d = &self.driver;
        let a = p.terminal_exponent();
        let mean_star = self
            .integrate_along_alpha(|x| x * d.psi_prime_unchecked(x), t, cfg)?
            .value;
        let variance_star = self
            .integrate_along_alpha(|x| x * x * d.psi_double_prime_unchecked(x), t, cfg)?
            .value;
        let barrier = delta.ln()
            + self.long_rate() * t
            + (p.r0 - p.theta) / p.k * one_minus_exp_neg(p.k * t)
            + d.psi_unchecked(a) * t;
        Ok(MeasureChangeStats {
            t,
            mean_star,
            variance_star: variance_star.max(T::zero()),
            barrier,
            drift_constant: self.drift_constant(),
        })
    }

    /// [`measure_change_stats`](Self::measure_change_stats) with the growing
    /// barrier level `δ = ω t`.
    pub fn chebyshev_stats(
        &self,
        t: T,
        omega: T,
        cfg: &QuadratureConfig<T>,
    ) -> Result<MeasureChangeStats<T>> {
        self.measure_change_stats(t, omega * t, cfg)
    }

    /// `C = aψ′(a) − ψ(a)` with `a = σ/k − λ`; positive unless `a = 0`.
    pub fn drift_constant(&self) -> T {
        let a = self.params.terminal_exponent();
        a * self.driver.psi_prime_unchecked(a) - self.driver.psi_unchecked(a)
    }

    /// `L_t = exp[R∞ t + (r₀ − r_t)/k]`.
    pub fn long_bond_return(&self, t: T, r_t: T) -> T {
        (self.long_rate() * t + (self.params.r0 - r_t) / self.params.k).exp()
    }

    /// `λ − σ/k`.
    pub fn ross_recovery_gap(&self) -> T {
        self.params.lambda - self.params.long_bond_volatility()
    }

    /// `R(λ, σ/k) = ψ(σ/k) + ψ(−λ) − ψ(σ/k − λ)`; needs `σ/k` in the domain.
    pub fn long_bond_excess_return(&self) -> Result<T> {
        self.driver
            .excess_rate_of_return(self.params.lambda, self.params.long_bond_volatility())
    }
}

fn check_horizon<T: Scalar>(t: T, maturity: T) -> Result<()> {
    if maturity < t || t.is_nan() || maturity.is_nan() {
        return Err(Error::InvalidHorizon {
            t: t.to_f64_lossy(),
            maturity: maturity.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Range `[min, max]` of `α_ut`, spanned by `−λ` and `σ/k − λ`.
fn alpha_range<T: Scalar>(p: &ModelParams<T>) -> (T, T) {
    let a = p.terminal_exponent();
    (a.min(-p.lambda), a.max(-p.lambda))
}

/// Largest `p` keeping `p·[lo, hi]` strictly inside the domain, nudged inward.
fn scaling_limit<T: Scalar>(driver: &LevyExponentModel<T>, lo: T, hi: T) -> T {
    let dom = driver.domain();
    let mut limit = T::infinity();
    if hi > T::zero() {
        limit = limit.min(dom.upper() / hi);
    }
    if lo < T::zero() {
        limit = limit.min(dom.lower() / lo);
    }
    if limit.is_finite() {
        limit * (T::one() - T::lit(1e-9))
    } else {
        limit
    }
}
