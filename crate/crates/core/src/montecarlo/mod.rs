//! Path simulation of the (Lévy-)OU short rate and its pricing kernel, with
//! estimators that serve as independent oracles for the closed forms.
//!
//! Path `i` draws from its own ChaCha8 stream `(seed, i)`, so a path never
//! depends on `n_paths` or on evaluation order. Paths are processed in parallel
//! in fixed-size chunks whose partial statistics are merged in chunk order,
//! which keeps every estimate bit-reproducible.
//!
//! The classical model is a [`LevyVasicekModel`] with a unit Brownian driver.

mod stats;
mod stepper;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy_exponent::{DriverKind, LevyExponentModel};
use crate::levy_vasicek::LevyVasicekModel;

pub use stats::McEstimate;
use stats::Running;
use stepper::{State, Stepper};

/// Paths per parallel work unit.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Exact joint Gaussian transition; Brownian drivers only.
    ExactGaussian,
    /// Left-point Euler with trapezoidal `∫r ds`; any built-in driver.
    EulerLevy,
    /// Exact simulation between jump times; compound-Poisson drivers only.
    ExactJumpTimes,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExactGaussian => "ExactGaussian",
            Self::EulerLevy => "EulerLevy",
            Self::ExactJumpTimes => "ExactJumpTimes",
        }
    }

    /// The bias-free scheme for a driver, if there is one.
    pub fn exact_for(driver: &LevyExponentModel<f64>) -> Option<Self> {
        match driver.kind() {
            DriverKind::Brownian { .. } => Some(Self::ExactGaussian),
            DriverKind::CompensatedPoisson { .. }
            | DriverKind::CompoundPoissonNormalJumps { .. } => Some(Self::ExactJumpTimes),
            DriverKind::Custom { .. } => None,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::InvalidParameter {
                field: "n_paths",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidParameter {
                field: "n_steps",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "horizon",
                value: self.horizon,
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Grid point `j`, computed without accumulating rounding.
    pub fn grid_time(&self, j: usize) -> f64 {
        if j == self.n_steps {
            self.horizon
        } else {
            self.horizon * j as f64 / self.n_steps as f64
        }
    }
}

/// One simulated trajectory on the configuration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub index: usize,
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    pub r: Vec<f64>,
    pub log_pi: Vec<f64>,
    /// `log L_t = R∞ t + (r₀ − r_t)/k`.
    pub log_long_bond: Vec<f64>,
    /// `log π_t + log L_t`, the log of the geometric martingale.
    pub log_martingale: Vec<f64>,
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Step schedule: the grid up to the last observation time, with every
/// observation time merged in. Returns the times and, per observation, its
/// position in the schedule.
fn schedule(cfg: &SimulationConfig, obs: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    let tol = 1e-12 * cfg.horizon;
    for &t in obs {
        if !(t >= 0.0) {
            return Err(Error::InvalidHorizon {
                t: 0.0,
                maturity: t,
            });
        }
        if t > cfg.horizon + tol {
            return Err(Error::BeyondHorizon {
                t,
                horizon: cfg.horizon,
            });
        }
    }
    let t_max = obs.iter().copied().fold(0.0, f64::max);
    let mut times: Vec<f64> = (0..=cfg.n_steps)
        .map(|j| cfg.grid_time(j))
        .take_while(|&t| t < t_max - tol)
        .collect();
    times.extend_from_slice(obs);
    times.push(0.0);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|later, earlier| *later - *earlier <= tol);
    let positions = obs
        .iter()
        .map(|&t| times.partition_point(|&s| s < t - tol))
        .collect();
    Ok((times, positions))
}

/// States at each schedule position in `wanted` (ascending, may repeat).
fn run_path(
    stepper: &Stepper,
    times: &[f64],
    wanted: &[usize],
    seed: u64,
    index: usize,
) -> Result<Vec<State>> {
    let mut rng = path_rng(seed, index);
    let mut state = stepper.initial();
    let mut out = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();
    while next.next_if(|&&w| w == 0).is_some() {
        out.push(state);
    }
    for (j, &t) in times.iter().enumerate().skip(1) {
        if next.peek().is_none() {
            break;
        }
        stepper.advance(&mut state, t, j, &mut rng)?;
        while next.next_if(|&&w| w == j).is_some() {
            out.push(state);
        }
    }
    Ok(out)
}

/// Simulates a single path on the grid of `cfg`.
pub fn simulate_path(
    model: &LevyVasicekModel<f64>,
    cfg: &SimulationConfig,
    index: usize,
) -> Result<SamplePath> {
    cfg.validate()?;
    let stepper = Stepper::new(model, cfg.scheme)?;
    let times: Vec<f64> = (0..=cfg.n_steps).map(|j| cfg.grid_time(j)).collect();
    let wanted: Vec<usize> = (0..times.len()).collect();
    let states = run_path(&stepper, &times, &wanted, cfg.seed, index)?;
    let log_long_bond: Vec<f64> = states.iter().map(|s| stepper.log_long_bond(s)).collect();
    Ok(SamplePath {
        index,
        xi: states.iter().map(|s| s.xi).collect(),
        r: states.iter().map(|s| s.r).collect(),
        log_pi: states.iter().map(|s| s.log_pi).collect(),
        log_martingale: states
            .iter()
            .zip(&log_long_bond)
            .map(|(s, l)| s.log_pi + l)
            .collect(),
        log_long_bond,
        times,
    })
}

/// Lazily simulates paths `0..n_paths`. Configuration and scheme/driver
/// compatibility are checked up front.
pub fn simulate_paths<'a>(
    model: &'a LevyVasicekModel<f64>,
    cfg: &'a SimulationConfig,
) -> Result<impl Iterator<Item = Result<SamplePath>> + 'a> {
    cfg.validate()?;
    Stepper::new(model, cfg.scheme)?;
    Ok((0..cfg.n_paths).map(move |i| simulate_path(model, cfg, i)))
}

/// Runs `per_path` over all path indices in parallel chunks and merges the
/// `n_out` statistics in chunk order.
fn par_accumulate<F>(n_paths: usize, n_out: usize, per_path: F) -> Result<Vec<McEstimate>>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    let n_chunks = n_paths.div_ceil(CHUNK);
    let partials: Vec<Result<Vec<Running>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Running::default(); n_out];
            let mut values = vec![0.0; n_out];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                per_path(i, &mut values)?;
                acc.iter_mut().zip(&values).for_each(|(a, &v)| a.push(v));
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Running::default(); n_out];
    for part in partials {
        total.iter_mut().zip(&part?).for_each(|(t, p)| t.merge(p));
    }
    Ok(total.iter().map(Running::estimate).collect())
}

/// Simulates every path to the observation times and averages `f` of the
/// observed states.
fn estimate_observed<F>(
    model: &LevyVasicekModel<f64>,
    cfg: &SimulationConfig,
    obs: &[f64],
    n_out: usize,
    f: F,
) -> Result<Vec<McEstimate>>
where
    F: Fn(&Stepper, &[State], &mut [f64]) + Sync,
{
    cfg.validate()?;
    let stepper = Stepper::new(model, cfg.scheme)?;
    let (times, positions) = schedule(cfg, obs)?;
    let mut order: Vec<usize> = (0..obs.len()).collect();
    order.sort_by_key(|&i| positions[i]);
    let wanted: Vec<usize> = order.iter().map(|&i| positions[i]).collect();
    par_accumulate(cfg.n_paths, n_out, |index, out| {
        let sorted = run_path(&stepper, &times, &wanted, cfg.seed, index)?;
        let mut states = vec![sorted[0]; obs.len()];
        order.iter().zip(sorted).for_each(|(&i, s)| states[i] = s);
        f(&stepper, &states, out);
        Ok(())
    })
}

/// `E[π_T]` for each maturity, from a common set of paths.
pub fn estimate_bond_prices(
    model: &LevyVasicekModel<f64>,
    maturities: &[f64],
    cfg: &SimulationConfig,
) -> Result<Vec<McEstimate>> {
    estimate_observed(
        model,
        cfg,
        maturities,
        maturities.len(),
        |_, states, out| {
            states
                .iter()
                .zip(out.iter_mut())
                .for_each(|(s, o)| *o = s.log_pi.exp());
        },
    )
}

/// `E[π_T]`, the oracle for the time-zero bond price.
pub fn estimate_bond_price(
    model: &LevyVasicekModel<f64>,
    maturity: f64,
    cfg: &SimulationConfig,
) -> Result<McEstimate> {
    Ok(estimate_bond_prices(model, &[maturity], cfg)?[0])
}

/// `E[π_t 1{π_t > δ}]`.
pub fn estimate_tail(
    model: &LevyVasicekModel<f64>,
    t: f64,
    delta: f64,
    cfg: &SimulationConfig,
) -> Result<McEstimate> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter {
            field: "delta",
            value: delta,
            reason: "must be positive",
        });
    }
    let log_delta = delta.ln();
    let est = estimate_observed(model, cfg, &[t], 1, |_, states, out| {
        let lp = states[0].log_pi;
        out[0] = if lp > log_delta { lp.exp() } else { 0.0 };
    })?;
    Ok(est[0])
}

/// `E[π_t^p]`.
pub fn estimate_lp_moment(
    model: &LevyVasicekModel<f64>,
    power: f64,
    t: f64,
    cfg: &SimulationConfig,
) -> Result<McEstimate> {
    let est = estimate_observed(model, cfg, &[t], 1, |_, states, out| {
        out[0] = (power * states[0].log_pi).exp()
    })?;
    Ok(est[0])
}

/// `E[M_t] − 1` for the geometric martingale `M_t = π_t L_t`; zero in expectation.
pub fn estimate_martingale_deviation(
    model: &LevyVasicekModel<f64>,
    t: f64,
    cfg: &SimulationConfig,
) -> Result<McEstimate> {
    let est = estimate_observed(model, cfg, &[t], 1, |stepper, states, out| {
        let s = &states[0];
        out[0] = (s.log_pi + stepper.log_long_bond(s)).exp_m1();
    })?;
    Ok(est[0])
}

/// `E[π_T 1{n_T < κ}]` under the constant-rate kernel `π_T = exp(−rT − λW_T − ½λ²T)`,
/// with `n_T = 1/π_T`. `W_T` is drawn directly, so `n_steps` is unused.
pub fn estimate_digital_put(
    r: f64,
    lambda: f64,
    kappa: f64,
    maturity: f64,
    cfg: &SimulationConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    if maturity > cfg.horizon {
        return Err(Error::BeyondHorizon {
            t: maturity,
            horizon: cfg.horizon,
        });
    }
    if !(maturity > 0.0) {
        return Err(Error::InvalidHorizon { t: 0.0, maturity });
    }
    let log_kappa = kappa.ln();
    let est = par_accumulate(cfg.n_paths, 1, |index, out| {
        let z: f64 = rand::Rng::sample(&mut path_rng(cfg.seed, index), StandardNormal);
        let log_pi =
            -r * maturity - lambda * maturity.sqrt() * z - 0.5 * lambda * lambda * maturity;
        out[0] = if -log_pi < log_kappa {
            log_pi.exp()
        } else {
            0.0
        };
        Ok(())
    })?;
    Ok(est[0])
}

/// Cross-sectional statistics at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSummary {
    pub t: f64,
    pub short_rate: McEstimate,
    /// `E[π_t]`, the time-zero price of the `t`-maturity bond.
    pub kernel: McEstimate,
    /// `E[M_t] − 1`.
    pub martingale_deviation: McEstimate,
}

/// Short rate, kernel and geometric-martingale statistics at every grid time.
pub fn estimate_grid_summary(
    model: &LevyVasicekModel<f64>,
    cfg: &SimulationConfig,
) -> Result<Vec<GridSummary>> {
    let times: Vec<f64> = (0..=cfg.n_steps).map(|j| cfg.grid_time(j)).collect();
    let est = estimate_observed(
        model,
        cfg,
        &times,
        3 * times.len(),
        |stepper, states, out| {
            for (s, o) in states.iter().zip(out.chunks_exact_mut(3)) {
                o[0] = s.r;
                o[1] = s.log_pi.exp();
                o[2] = (s.log_pi + stepper.log_long_bond(s)).exp_m1();
            }
        },
    )?;
    Ok(times
        .iter()
        .zip(est.chunks_exact(3))
        .map(|(&t, e)| GridSummary {
            t,
            short_rate: e[0],
            kernel: e[1],
            martingale_deviation: e[2],
        })
        .collect())
}

/// `E[exp(α ξ_t)]` from exactly sampled driver values `ξ_t`; equals
/// `exp(ψ(α) t)`. `n_steps` and `scheme` are unused.
pub fn estimate_exponential_moment(
    driver: &LevyExponentModel<f64>,
    alpha: f64,
    t: f64,
    cfg: &SimulationConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    driver.domain().check(alpha)?;
    let kind = driver.kind();
    if matches!(kind, DriverKind::Custom { .. }) {
        return Err(Error::SchemeMismatch {
            scheme: "exact increments",
            driver: driver.name(),
        });
    }
    let est = par_accumulate(cfg.n_paths, 1, |index, out| {
        let xi = stepper::driver_increment(kind, t, &mut path_rng(cfg.seed, index))
            .expect("built-in driver");
        out[0] = (alpha * xi).exp();
        Ok(())
    })?;
    Ok(est[0])
}

/// Exact expectation of `π_T` under [`Scheme::EulerLevy`] with `n_steps`
/// uniform steps.
///
/// With `a = 1 − kΔ` the Euler kernel is log-linear in the driver increments:
/// the coefficient of `Δξ_i` is `b_i = σ[(1 − a^{n−i})/k − ½Δ a^{n−1−i}] − λ`,
/// so `E[π_T] = exp(D + Δ Σ ψ(b_i))` with the deterministic part
/// `D = −Δ(Σ_j d_j − ½d_0 − ½d_n) − ψ(−λ)T`, `d_j = θ + (r₀ − θ)a^j`.
/// Its distance from the exact price is the discretisation bias, first order in `Δ`.
pub fn euler_bond_price(
    model: &LevyVasicekModel<f64>,
    maturity: f64,
    n_steps: usize,
) -> Result<f64> {
    if !(maturity > 0.0) || n_steps == 0 {
        return Ok(1.0);
    }
    let p = model.params();
    let psi = |x: f64| model.driver().psi(x);
    let dt = maturity / n_steps as f64;
    let a = 1.0 - p.k * dt;
    let d = |j: i32| p.theta + (p.r0 - p.theta) * a.powi(j);
    let n = n_steps as i32;
    let sum_d: f64 = (0..=n).map(d).sum::<f64>() - 0.5 * d(0) - 0.5 * d(n);
    let mut log_price = -dt * sum_d - psi(-p.lambda)? * maturity;
    for i in 0..n {
        let b = p.sigma * ((1.0 - a.powi(n - i)) / p.k - 0.5 * dt * a.powi(n - 1 - i)) - p.lambda;
        log_price += dt * psi(b)?;
    }
    Ok(log_price.exp())
}
