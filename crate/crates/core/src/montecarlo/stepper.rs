use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::levy_exponent::DriverKind;
use crate::levy_vasicek::LevyVasicekModel;

use super::Scheme;

/// Overflow guard on `|log π|`.
pub(crate) const LOG_PI_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy)]
enum Driver {
    Brownian {
        scale: f64,
    },
    /// Compound Poisson with `N(m, s²)` jumps; the compensated Poisson driver
    /// is `m = 1, s = 0`.
    Jumps {
        rate: f64,
        mean: f64,
        stdev: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct State {
    pub t: f64,
    pub xi: f64,
    pub r: f64,
    pub log_pi: f64,
    /// Trapezoidal `∫r ds`; only the Euler scheme keeps it.
    pub integral: f64,
}

/// Simulation constants for one model and scheme.
#[derive(Debug, Clone)]
pub(crate) struct Stepper {
    scheme: Scheme,
    driver: Driver,
    k: f64,
    theta: f64,
    sigma: f64,
    lambda: f64,
    r0: f64,
    psi_neg_lambda: f64,
    pub long_rate: f64,
}

impl Stepper {
    pub(crate) fn new(model: &LevyVasicekModel<f64>, scheme: Scheme) -> Result<Self> {
        let driver = match model.driver().kind() {
            DriverKind::Brownian { scale } => Driver::Brownian { scale: *scale },
            DriverKind::CompensatedPoisson { rate } => Driver::Jumps {
                rate: *rate,
                mean: 1.0,
                stdev: 0.0,
            },
            DriverKind::CompoundPoissonNormalJumps {
                rate,
                jump_mean,
                jump_stdev,
            } => Driver::Jumps {
                rate: *rate,
                mean: *jump_mean,
                stdev: *jump_stdev,
            },
            DriverKind::Custom { .. } => return Err(mismatch(scheme, model)),
        };
        match (scheme, driver) {
            (Scheme::ExactGaussian, Driver::Jumps { .. })
            | (Scheme::ExactJumpTimes, Driver::Brownian { .. }) => {
                return Err(mismatch(scheme, model))
            }
            _ => {}
        }
        let p = model.params();
        Ok(Self {
            scheme,
            driver,
            k: p.k,
            theta: p.theta,
            sigma: p.sigma,
            lambda: p.lambda,
            r0: p.r0,
            psi_neg_lambda: model.driver().psi(-p.lambda)?,
            long_rate: model.long_rate(),
        })
    }

    pub(crate) fn initial(&self) -> State {
        State {
            t: 0.0,
            xi: 0.0,
            r: self.r0,
            log_pi: 0.0,
            integral: 0.0,
        }
    }

    pub(crate) fn log_long_bond(&self, s: &State) -> f64 {
        self.long_rate * s.t + (self.r0 - s.r) / self.k
    }

    /// Advances `s` to time `t_next`; `step` is reported on blow-up.
    pub(crate) fn advance(
        &self,
        s: &mut State,
        t_next: f64,
        step: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        let dt = t_next - s.t;
        match (self.scheme, self.driver) {
            (Scheme::ExactGaussian, Driver::Brownian { scale }) => {
                self.exact_gaussian(s, dt, scale, rng)
            }
            (Scheme::ExactJumpTimes, Driver::Jumps { rate, mean, stdev }) => {
                self.exact_jumps(s, dt, rate, mean, stdev, rng)
            }
            (Scheme::EulerLevy, driver) => self.euler(s, dt, driver, rng),
            _ => unreachable!("scheme/driver pairing checked in Stepper::new"),
        }
        s.t = t_next;
        if self.scheme != Scheme::EulerLevy {
            // ∫r ds = θt + (r₀ − r_t)/k − (σ/k)ξ_t holds exactly along the path.
            let integral = self.theta * s.t + (self.r0 - s.r) / self.k - self.sigma / self.k * s.xi;
            s.log_pi = -integral - self.lambda * s.xi - self.psi_neg_lambda * s.t;
        }
        if !(s.r.is_finite() && s.xi.is_finite() && s.log_pi.is_finite())
            || s.log_pi.abs() > LOG_PI_LIMIT
        {
            return Err(Error::NumericalBlowup { step, t: s.t });
        }
        Ok(())
    }

    /// Joint exact draw of `ΔW` and `∫ e^{−k(t+Δ−u)} dW_u` over the step.
    fn exact_gaussian(&self, s: &mut State, dt: f64, scale: f64, rng: &mut ChaCha8Rng) {
        let k = self.k;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let decay = (-k * dt).exp();
        let var_x = -(-2.0 * k * dt).exp_m1() / (2.0 * k);
        let cov = -(-k * dt).exp_m1() / k;
        let dw = dt.sqrt() * z1;
        let x = cov / dt * dw + (var_x - cov * cov / dt).max(0.0).sqrt() * z2;
        s.r = self.theta + (s.r - self.theta) * decay - self.sigma * scale * x;
        s.xi += scale * dw;
    }

    /// Exact jump-time simulation: between jumps `r` relaxes towards
    /// `θ + σμm/k` (the compensator drift), and each jump `Y` moves it by `−σY`.
    fn exact_jumps(
        &self,
        s: &mut State,
        dt: f64,
        rate: f64,
        mean: f64,
        stdev: f64,
        rng: &mut ChaCha8Rng,
    ) {
        let target = self.theta + self.sigma * rate * mean / self.k;
        let relax = |r: f64, h: f64| target + (r - target) * (-self.k * h).exp();
        let mut elapsed = 0.0;
        let mut jumps = 0.0;
        loop {
            let wait: f64 = rng.sample::<f64, _>(Exp1) / rate;
            if elapsed + wait > dt {
                break;
            }
            elapsed += wait;
            s.r = relax(s.r, wait);
            let y = if stdev > 0.0 {
                mean + stdev * rng.sample::<f64, _>(StandardNormal)
            } else {
                mean
            };
            s.r -= self.sigma * y;
            jumps += y;
        }
        s.r = relax(s.r, dt - elapsed);
        s.xi += jumps - rate * mean * dt;
    }

    /// Left-point Euler step with exactly sampled driver increments and
    /// trapezoidal accumulation of `∫r ds`.
    fn euler(&self, s: &mut State, dt: f64, driver: Driver, rng: &mut ChaCha8Rng) {
        let dxi = sample_increment(driver, dt, rng);
        let r_next = s.r + self.k * (self.theta - s.r) * dt - self.sigma * dxi;
        s.integral += 0.5 * (s.r + r_next) * dt;
        s.r = r_next;
        s.xi += dxi;
        s.log_pi = -s.integral - self.lambda * s.xi - self.psi_neg_lambda * (s.t + dt);
    }
}

fn sample_increment(driver: Driver, dt: f64, rng: &mut ChaCha8Rng) -> f64 {
    match driver {
        Driver::Brownian { scale } => scale * dt.sqrt() * rng.sample::<f64, _>(StandardNormal),
        Driver::Jumps { rate, mean, stdev } => {
            let n: f64 = Poisson::new(rate * dt)
                .map(|d| rng.sample(d))
                .unwrap_or(0.0);
            let jumps = if n > 0.0 && stdev > 0.0 {
                n * mean + stdev * n.sqrt() * rng.sample::<f64, _>(StandardNormal)
            } else {
                n * mean
            };
            jumps - rate * mean * dt
        }
    }
}

/// Increment of a built-in driver over `dt`, sampled exactly; `None` for custom drivers.
pub(crate) fn driver_increment(
    kind: &DriverKind<f64>,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Option<f64> {
    let driver = match kind {
        DriverKind::Brownian { scale } => Driver::Brownian { scale: *scale },
        DriverKind::CompensatedPoisson { rate } => Driver::Jumps {
            rate: *rate,
            mean: 1.0,
            stdev: 0.0,
        },
        DriverKind::CompoundPoissonNormalJumps {
            rate,
            jump_mean,
            jump_stdev,
        } => Driver::Jumps {
            rate: *rate,
            mean: *jump_mean,
            stdev: *jump_stdev,
        },
        DriverKind::Custom { .. } => return None,
    };
    Some(sample_increment(driver, dt, rng))
}

fn mismatch(scheme: Scheme, model: &LevyVasicekModel<f64>) -> Error {
    Error::SchemeMismatch {
        scheme: scheme.as_str(),
        driver: model.driver().name(),
    }
}
