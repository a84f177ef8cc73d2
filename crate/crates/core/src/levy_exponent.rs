//! Compensated Lévy drivers described by their exponent `ψ`, with `E[exp(α ξ_t)] = exp(ψ(α) t)`.
//!
//! Every driver is compensated (`ψ(0) = ψ'(0) = 0`), so `ψ` is non-negative and
//! strictly convex on its exponential-moment domain. The built-in catalogue keeps
//! `ψ`, `ψ'` and `ψ''` in closed form; anything else goes through
//! [`LevyExponentModel::custom`], which must supply all three callables.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Open interval `(lower, upper)` of exponents with finite exponential moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentDomain<T> {
    lower: T,
    upper: T,
}

impl<T: Scalar> ExponentDomain<T> {
    /// `lower` may be `-inf` and `upper` may be `+inf`; the origin must lie strictly inside.
    pub fn new(lower: T, upper: T) -> Result<Self> {
        if lower.is_nan() || !(lower < T::zero()) {
            return Err(Error::InvalidParameter {
                field: "domain.lower",
                value: lower.to_f64_lossy(),
                reason: "must be strictly negative",
            });
        }
        if upper.is_nan() || !(upper > T::zero()) {
            return Err(Error::InvalidParameter {
                field: "domain.upper",
                value: upper.to_f64_lossy(),
                reason: "must be strictly positive",
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded() -> Self {
        Self {
            lower: T::neg_infinity(),
            upper: T::infinity(),
        }
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    /// Strict membership; endpoints are excluded.
    pub fn contains(&self, alpha: T) -> bool {
        alpha > self.lower && alpha < self.upper
    }

    pub fn check(&self, alpha: T) -> Result<()> {
        if self.contains(alpha) {
            Ok(())
        } else {
            Err(Error::Domain {
                alpha: alpha.to_f64_lossy(),
                lower: self.lower.to_f64_lossy(),
                upper: self.upper.to_f64_lossy(),
            })
        }
    }

    /// Checks a whole closed segment; enough since the domain is an interval.
    pub fn check_segment(&self, a: T, b: T) -> Result<()> {
        self.check(a)?;
        self.check(b)
    }
}

pub type ExponentFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum DriverKind<T> {
    /// `ξ = c W`.
    Brownian { scale: T },
    /// `ξ_t = N_t − μ t`.
    CompensatedPoisson { rate: T },
    /// `ξ_t = Σ Y_i − μ m t` with `Y ~ N(m, s²)`.
    CompoundPoissonNormalJumps {
        rate: T,
        jump_mean: T,
        jump_stdev: T,
    },
    Custom {
        psi: ExponentFn<T>,
        psi_prime: ExponentFn<T>,
        psi_double_prime: ExponentFn<T>,
    },
}

impl<T: fmt::Debug> fmt::Debug for DriverKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Brownian { scale } => f.debug_struct("Brownian").field("scale", scale).finish(),
            Self::CompensatedPoisson { rate } => f
                .debug_struct("CompensatedPoisson")
                .field("rate", rate)
                .finish(),
            Self::CompoundPoissonNormalJumps {
                rate,
                jump_mean,
                jump_stdev,
            } => f
                .debug_struct("CompoundPoissonNormalJumps")
                .field("rate", rate)
                .field("jump_mean", jump_mean)
                .field("jump_stdev", jump_stdev)
                .finish(),
            Self::Custom { .. } => f.write_str("Custom(..)"),
        }
    }
}

/// A compensated Lévy driver together with its exponential-moment domain.
#[derive(Debug, Clone)]
pub struct LevyExponentModel<T> {
    kind: DriverKind<T>,
    domain: ExponentDomain<T>,
}

fn positive<T: Scalar>(field: &'static str, value: T) -> Result<T> {
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            field,
            value: value.to_f64_lossy(),
            reason: "must be positive and finite",
        })
    }
}

impl<T: Scalar> LevyExponentModel<T> {
    pub fn brownian(scale: T) -> Result<Self> {
        let scale = positive("driver.scale", scale)?;
        Ok(Self {
            kind: DriverKind::Brownian { scale },
            domain: ExponentDomain::unbounded(),
        })
    }

    pub fn compensated_poisson(rate: T) -> Result<Self> {
        let rate = positive("driver.rate", rate)?;
        Ok(Self {
            kind: DriverKind::CompensatedPoisson { rate },
            domain: ExponentDomain::unbounded(),
        })
    }

    pub fn compound_poisson_normal(rate: T, jump_mean: T, jump_stdev: T) -> Result<Self> {
        let rate = positive("driver.rate", rate)?;
        let jump_stdev = positive("driver.jump_stdev", jump_stdev)?;
        if !jump_mean.is_finite() {
            return Err(Error::InvalidParameter {
                field: "driver.jump_mean",
                value: jump_mean.to_f64_lossy(),
                reason: "must be finite",
            });
        }
        Ok(Self {
            kind: DriverKind::CompoundPoissonNormalJumps {
                rate,
                jump_mean,
                jump_stdev,
            },
            domain: ExponentDomain::unbounded(),
        })
    }

    /// A driver given by user-supplied `ψ`, `ψ'`, `ψ''`. No properties are
    /// enforced here; run [`validate`](Self::validate) to check them.
    pub fn custom(
        psi: impl Fn(T) -> T + Send + Sync + 'static,
        psi_prime: impl Fn(T) -> T + Send + Sync + 'static,
        psi_double_prime: impl Fn(T) -> T + Send + Sync + 'static,
        domain: ExponentDomain<T>,
    ) -> Self {
        Self {
            kind: DriverKind::Custom {
                psi: Arc::new(psi),
                psi_prime: Arc::new(psi_prime),
                psi_double_prime: Arc::new(psi_double_prime),
            },
            domain,
        }
    }

    pub fn kind(&self) -> &DriverKind<T> {
        &self.kind
    }

    pub fn domain(&self) -> &ExponentDomain<T> {
        &self.domain
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DriverKind::Brownian { .. } => "brownian",
            DriverKind::CompensatedPoisson { .. } => "compensated_poisson",
            DriverKind::CompoundPoissonNormalJumps { .. } => "compound_poisson_normal",
            DriverKind::Custom { .. } => "custom",
        }
    }

    pub fn psi(&self, alpha: T) -> Result<T> {
        self.domain.check(alpha)?;
        Ok(self.psi_unchecked(alpha))
    }

    pub fn psi_prime(&self, alpha: T) -> Result<T> {
        self.domain.check(alpha)?;
        Ok(self.psi_prime_unchecked(alpha))
    }

    pub fn psi_double_prime(&self, alpha: T) -> Result<T> {
        self.domain.check(alpha)?;
        Ok(self.psi_double_prime_unchecked(alpha))
    }

    pub(crate) fn psi_unchecked(&self, alpha: T) -> T {
        let half = T::lit(0.5);
        match &self.kind {
            DriverKind::Brownian { scale } => half * (*scale * alpha).powi(2),
            // expm1 keeps ψ > 0 resolvable for tiny |α|.
            DriverKind::CompensatedPoisson { rate } => *rate * (alpha.exp_m1() - alpha),
            DriverKind::CompoundPoissonNormalJumps {
                rate,
                jump_mean,
                jump_stdev,
            } => {
                let cumulant = *jump_mean * alpha + half * (*jump_stdev * alpha).powi(2);
                *rate * (cumulant.exp_m1() - *jump_mean * alpha)
            }
            DriverKind::Custom { psi, .. } => psi(alpha),
        }
    }

    pub(crate) fn psi_prime_unchecked(&self, alpha: T) -> T {
        let half = T::lit(0.5);
        match &self.kind {
            DriverKind::Brownian { scale } => *scale * *scale * alpha,
            DriverKind::CompensatedPoisson { rate } => *rate * alpha.exp_m1(),
            DriverKind::CompoundPoissonNormalJumps {
                rate,
                jump_mean,
                jump_stdev,
            } => {
                let s2 = *jump_stdev * *jump_stdev;
                let cumulant = *jump_mean * alpha + half * s2 * alpha * alpha;
                // (m + s²α) e^κ − m  =  (m + s²α)(e^κ − 1) + s²α
                *rate * ((*jump_mean + s2 * alpha) * cumulant.exp_m1() + s2 * alpha)
            }
            DriverKind::Custom { psi_prime, .. } => psi_prime(alpha),
        }
    }

    pub(crate) fn psi_double_prime_unchecked(&self, alpha: T) -> T {
        let half = T::lit(0.5);
        match &self.kind {
            DriverKind::Brownian { scale } => *scale * *scale,
            DriverKind::CompensatedPoisson { rate } => *rate * alpha.exp(),
            DriverKind::CompoundPoissonNormalJumps {
                rate,
                jump_mean,
                jump_stdev,
            } => {
                let s2 = *jump_stdev * *jump_stdev;
                let slope = *jump_mean + s2 * alpha;
                let cumulant = *jump_mean * alpha + half * s2 * alpha * alpha;
                *rate * (s2 + slope * slope) * cumulant.exp()
            }
            DriverKind::Custom {
                psi_double_prime, ..
            } => psi_double_prime(alpha),
        }
    }

    /// Excess rate of return `R(λ, σ) = ψ(σ) + ψ(−λ) − ψ(σ − λ)` of a geometric
    /// Lévy asset with volatility `σ` under risk aversion `λ`.
    pub fn excess_rate_of_return(&self, lambda: T, sigma: T) -> Result<T> {
        positive("lambda", lambda)?;
        Ok(self.psi(sigma)? + self.psi(-lambda)? - self.psi(sigma - lambda)?)
    }

    /// `α ψ'(α) − ψ(α)`, positive away from the origin for any compensated driver.
    pub fn superlinearity_gap(&self, alpha: T) -> Result<T> {
        self.domain.check(alpha)?;
        Ok(alpha * self.psi_prime_unchecked(alpha) - self.psi_unchecked(alpha))
    }

    /// Grid used by [`validate`](Self::validate): `per_sign` log-spaced magnitudes
    /// on each side of the origin, clipped to 90% of the way to finite endpoints.
    pub fn validation_grid(&self, per_sign: usize) -> Vec<T> {
        let extent = |end: T| {
            if end.is_finite() {
                T::lit(0.9) * end.abs()
            } else {
                T::lit(DEFAULT_GRID_EXTENT)
            }
        };
        let mut grid = log_spaced(extent(self.domain.lower), per_sign)
            .into_iter()
            .rev()
            .map(|m| -m)
            .collect::<Vec<_>>();
        grid.extend(log_spaced(extent(self.domain.upper), per_sign));
        grid
    }

    /// Checks compensation, strict convexity and positivity on the validation grid.
    /// Never fails; every failed check is listed in the report.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let psi0 = self.psi_unchecked(T::zero()).to_f64_lossy();
        report.push(
            "psi(0) = 0",
            psi0.abs() <= 1e-12,
            format!("|psi(0)| = {:e}", psi0.abs()),
        );
        let dpsi0 = self.psi_prime_unchecked(T::zero()).to_f64_lossy();
        report.push(
            "psi'(0) = 0",
            dpsi0.abs() <= 1e-8,
            format!("|psi'(0)| = {:e}", dpsi0.abs()),
        );

        let grid = self.validation_grid(VALIDATION_POINTS_PER_SIGN);
        let convex_fail: Vec<T> = grid
            .iter()
            .copied()
            .filter(|&a| !(self.psi_double_prime_unchecked(a) > T::zero()))
            .collect();
        report.push(
            "psi'' > 0 on grid",
            convex_fail.is_empty(),
            grid_detail(grid.len(), &convex_fail),
        );
        let pos_fail: Vec<T> = grid
            .iter()
            .copied()
            .filter(|&a| !(self.psi_unchecked(a) > T::zero()))
            .collect();
        report.push(
            "psi > 0 on grid",
            pos_fail.is_empty(),
            grid_detail(grid.len(), &pos_fail),
        );
        report
    }
}

pub const VALIDATION_POINTS_PER_SIGN: usize = 64;

/// Half-width of the validation grid when the domain is unbounded on that side.
const DEFAULT_GRID_EXTENT: f64 = 4.0;

fn log_spaced<T: Scalar>(max: T, n: usize) -> Vec<T> {
    let lo = (max * T::lit(1e-4)).ln();
    let hi = max.ln();
    let steps = T::from_usize(n.saturating_sub(1).max(1)).unwrap();
    (0..n)
        .map(|i| {
            let w = T::from_usize(i).unwrap() / steps;
            (lo + (hi - lo) * w).exp()
        })
        .collect()
}

fn grid_detail<T: Scalar>(n: usize, failures: &[T]) -> String {
    match failures.first() {
        None => format!("{n} points"),
        Some(a) => format!(
            "{} of {n} points fail, first at alpha = {a}",
            failures.len()
        ),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(ValidationCheck {
            name,
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}
