//! TOML run configuration.
//!
//! ```toml
//! [model]
//! family = "levy"          # or "classical"
//! k = 0.2
//! theta = 0.03
//! sigma = 0.05
//! lambda = 0.5
//! r0 = 0.05
//!
//! [model.driver]           # levy only
//! kind = "compensated_poisson"
//! rate = 1.0
//!
//! [curve]
//! maturities = [1, 5, 10]
//!
//! [simulation]
//! n_paths = 100000
//! n_steps = 10
//! horizon = 10
//! seed = 7
//! ```
//!
//! All rates are per unit time; the time unit is years by convention only.
//! For a Brownian driver with scale `c`, Lévy parameters `(σ, λ)` correspond
//! to classical parameters `(σc, λc)`.

use std::path::{Path, PathBuf};

use longbond_core::montecarlo::{Scheme, SimulationConfig};
use longbond_core::vasicek::ModelParams;
use longbond_core::{LevyExponentModel, LevyVasicekModel, QuadratureConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSection>,
    #[serde(default)]
    pub regime: RegimeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub longbond: Option<LongbondSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Classical,
    Levy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    pub k: f64,
    pub theta: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub r0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver: Option<DriverSpec>,
    #[serde(default = "default_p_max")]
    pub p_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriverSpec {
    Brownian {
        #[serde(default = "one")]
        scale: f64,
    },
    CompensatedPoisson {
        rate: f64,
    },
    CompoundPoissonNormal {
        rate: f64,
        jump_mean: f64,
        jump_stdev: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub maturities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeSection {
    #[serde(default = "default_zero_tolerance")]
    pub zero_tolerance: f64,
}

impl Default for RegimeSection {
    fn default() -> Self {
        Self {
            zero_tolerance: default_zero_tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongbondSection {
    /// CSV with header `t,r`; relative paths resolve against the config file.
    pub scenario: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeName {
    #[serde(alias = "exact_gaussian")]
    ExactGaussian,
    #[serde(alias = "euler_levy")]
    EulerLevy,
    #[serde(alias = "exact_jump_times")]
    ExactJumpTimes,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::ExactGaussian => Scheme::ExactGaussian,
            SchemeName::EulerLevy => Scheme::EulerLevy,
            SchemeName::ExactJumpTimes => Scheme::ExactJumpTimes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub n_paths: usize,
    pub n_steps: usize,
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the exact scheme for the driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeName>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    #[serde(default = "default_validate_maturities")]
    pub maturities: Vec<f64>,
    /// Pricing checks pass when the estimate is within this many standard errors.
    #[serde(default = "default_tolerance_se")]
    pub tolerance_se: f64,
    /// Same, for the martingale and exponent-law checks.
    #[serde(default = "default_martingale_tolerance_se")]
    pub martingale_tolerance_se: f64,
    #[serde(default = "default_martingale_times")]
    pub martingale_times: Vec<f64>,
    #[serde(default = "default_tail_times")]
    pub tail_times: Vec<f64>,
    #[serde(default = "one")]
    pub tail_delta: f64,
    #[serde(default = "default_lp_power")]
    pub lp_power: f64,
    #[serde(default = "default_lp_time")]
    pub lp_time: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            maturities: default_validate_maturities(),
            tolerance_se: default_tolerance_se(),
            martingale_tolerance_se: default_martingale_tolerance_se(),
            martingale_times: default_martingale_times(),
            tail_times: default_tail_times(),
            tail_delta: 1.0,
            lp_power: default_lp_power(),
            lp_time: default_lp_time(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_subdivisions")]
    pub max_subdivisions: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_subdivisions: default_max_subdivisions(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_p_max() -> f64 {
    longbond_core::levy_vasicek::DEFAULT_P_MAX
}
fn default_zero_tolerance() -> f64 {
    longbond_core::vasicek::DEFAULT_ZERO_TOLERANCE
}
fn default_validate_maturities() -> Vec<f64> {
    vec![1.0, 5.0, 10.0]
}
fn default_tolerance_se() -> f64 {
    3.0
}
fn default_martingale_tolerance_se() -> f64 {
    4.0
}
fn default_martingale_times() -> Vec<f64> {
    vec![1.0, 5.0]
}
fn default_tail_times() -> Vec<f64> {
    vec![5.0]
}
fn default_lp_power() -> f64 {
    1.5
}
fn default_lp_time() -> f64 {
    5.0
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_max_subdivisions() -> usize {
    200
}

/// A model ready for evaluation: closed forms for the classical family,
/// quadrature for the Lévy family.
#[derive(Debug, Clone)]
pub enum Model {
    Classical(ModelParams<f64>),
    Levy(LevyVasicekModel),
}

impl Model {
    pub fn params(&self) -> &ModelParams<f64> {
        match self {
            Self::Classical(p) => p,
            Self::Levy(m) => m.params(),
        }
    }

    /// The model as a simulation target; the classical family maps to a unit Brownian driver.
    pub fn simulation_model(&self) -> Result<LevyVasicekModel, CliError> {
        match self {
            Self::Classical(p) => LevyVasicekModel::classical(*p)
                .map_err(|e| CliError::numeric("model construction", e)),
            Self::Levy(m) => Ok(m.clone()),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Structural checks that do not need a model.
    fn check(&self) -> Result<(), CliError> {
        if let Some(curve) = &self.curve {
            check_grid("curve.maturities", &curve.maturities)?;
        }
        let v = &self.validate;
        check_grid("validate.maturities", &v.maturities)?;
        check_grid("validate.martingale_times", &v.martingale_times)?;
        check_grid("validate.tail_times", &v.tail_times)?;
        for (field, value) in [
            ("validate.tolerance_se", v.tolerance_se),
            (
                "validate.martingale_tolerance_se",
                v.martingale_tolerance_se,
            ),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(CliError::Config(format!(
                    "`{field}` must be non-negative and finite, got {value}"
                )));
            }
        }
        if !(v.tail_delta > 0.0) {
            return Err(CliError::Config(format!(
                "`validate.tail_delta` must be positive, got {}",
                v.tail_delta
            )));
        }
        if !(v.lp_power >= 1.0) {
            return Err(CliError::Config(format!(
                "`validate.lp_power` must be at least 1, got {}",
                v.lp_power
            )));
        }
        if !(self.regime.zero_tolerance >= 0.0) {
            return Err(CliError::Config(format!(
                "`regime.zero_tolerance` must be non-negative, got {}",
                self.regime.zero_tolerance
            )));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        let m = &self.model;
        let params = ModelParams::new(m.k, m.theta, m.sigma, m.lambda, m.r0)
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        match (m.family, &m.driver) {
            (Family::Classical, None) => Ok(Model::Classical(params)),
            (Family::Classical, Some(_)) => Err(CliError::Config(
                "`model.driver` is only valid with family = \"levy\"".into(),
            )),
            (Family::Levy, None) => Err(CliError::Config(
                "`model.driver` is required with family = \"levy\"".into(),
            )),
            (Family::Levy, Some(spec)) => {
                let driver = spec
                    .build()
                    .map_err(|e| CliError::Config(format!("model.{e}")))?;
                LevyVasicekModel::with_p_max(params, driver, m.p_max)
                    .map(Model::Levy)
                    .map_err(|e| CliError::Config(format!("model: {e}")))
            }
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        let q = &self.quadrature;
        let cfg = QuadratureConfig {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_subdivisions: q.max_subdivisions,
        };
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Simulation settings with the seed override applied and the scheme resolved.
    pub fn simulation(
        &self,
        model: &LevyVasicekModel,
        seed: Option<u64>,
    ) -> Result<SimulationConfig, CliError> {
        let s = self.simulation.as_ref().ok_or_else(|| {
            CliError::Config("a [simulation] section is required for this command".into())
        })?;
        let scheme = match s.scheme {
            Some(name) => name.into(),
            None => Scheme::exact_for(model.driver()).ok_or_else(|| {
                CliError::Config("`simulation.scheme` is required for this driver".into())
            })?,
        };
        let cfg = SimulationConfig {
            n_paths: s.n_paths,
            n_steps: s.n_steps,
            horizon: s.horizon,
            seed: seed.unwrap_or(s.seed),
            scheme,
        };
        cfg.validate()
            .map_err(|e| CliError::Config(format!("simulation: {e}")))?;
        Ok(cfg)
    }

    /// Absolute scenario path, resolved against the config directory.
    pub fn scenario_path(&self, base_dir: &Path) -> Result<PathBuf, CliError> {
        let lb = self.longbond.as_ref().ok_or_else(|| {
            CliError::Config("a [longbond] section with `scenario` is required".into())
        })?;
        Ok(if lb.scenario.is_absolute() {
            lb.scenario.clone()
        } else {
            base_dir.join(&lb.scenario)
        })
    }
}

impl DriverSpec {
    pub fn build(&self) -> longbond_core::Result<LevyExponentModel> {
        match *self {
            Self::Brownian { scale } => LevyExponentModel::brownian(scale),
            Self::CompensatedPoisson { rate } => LevyExponentModel::compensated_poisson(rate),
            Self::CompoundPoissonNormal {
                rate,
                jump_mean,
                jump_stdev,
            } => LevyExponentModel::compound_poisson_normal(rate, jump_mean, jump_stdev),
        }
    }
}

/// Non-empty, finite, non-negative and strictly increasing.
pub fn check_grid(field: &str, grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("`{field}` must not be empty")));
    }
    if let Some(bad) = grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::Config(format!(
            "`{field}` contains invalid time {bad}"
        )));
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(CliError::Config(format!(
            "`{field}` must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}
