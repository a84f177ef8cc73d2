use std::path::Path;

use longbond_core::levy_exponent::VALIDATION_POINTS_PER_SIGN;
use longbond_core::montecarlo::{self, McEstimate, Scheme, SimulationConfig};
use longbond_core::vasicek::{self, Regime};
use longbond_core::{LevyVasicekModel, QuadratureConfig};
use serde::Deserialize;

use crate::config::{check_grid, Model, RunConfig};
use crate::error::CliError;
use crate::output::{format_sig, Cell, Table, CSV_DIGITS};

/// `|λ − σ/k|` at or below this is reported as Ross recovery holding.
pub const ROSS_TOLERANCE: f64 = 1e-12;

const EXPONENT_LAW_ALPHAS: [f64; 4] = [-1.0, -0.25, 0.25, 1.0];
const EXPONENT_LAW_TIME: f64 = 1.0;

/// A finished command: its table, the seed it ran with, and whether every check passed.
pub struct Outcome {
    pub table: Table,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub passed: bool,
}

impl Outcome {
    fn plain(table: Table) -> Self {
        Self {
            table,
            seed: None,
            scheme: None,
            passed: true,
        }
    }
}

fn numeric(op: &'static str) -> impl Fn(longbond_core::Error) -> CliError {
    move |e| CliError::numeric(op, e)
}

fn bond_quote(
    model: &Model,
    maturity: f64,
    q: &QuadratureConfig,
) -> Result<vasicek::BondQuote<f64>, CliError> {
    match model {
        Model::Classical(p) => vasicek::bond_price(p, 0.0, p.r0, maturity),
        Model::Levy(m) => m.bond_price(0.0, m.params().r0, maturity, q),
    }
    .map_err(numeric("bond pricing"))
}

fn long_rate(model: &Model) -> f64 {
    match model {
        Model::Classical(p) => vasicek::long_rate(p),
        Model::Levy(m) => m.long_rate(),
    }
}

pub fn curve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let q = cfg.quadrature()?;
    let grid = &cfg
        .curve
        .as_ref()
        .ok_or_else(|| CliError::Config("a [curve] section with `maturities` is required".into()))?
        .maturities;
    let mut table = Table::new("curve", &["kind", "maturity", "price", "yield"]);
    let quotes: Vec<_> = match &model {
        Model::Levy(m) => m.bond_curve(grid, &q).map_err(numeric("bond pricing"))?,
        Model::Classical(_) => grid
            .iter()
            .map(|&t| bond_quote(&model, t, &q))
            .collect::<Result<_, _>>()?,
    };
    for b in quotes {
        table.push(vec![
            "bond".into(),
            b.maturity.into(),
            b.price.into(),
            b.zero_yield.into(),
        ]);
    }
    table.push(vec![
        "long_rate".into(),
        Cell::Empty,
        Cell::Empty,
        long_rate(&model).into(),
    ]);
    Ok(Outcome::plain(table))
}

pub fn regime(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let tol = cfg.regime.zero_tolerance;
    let (verdict, excess) = match &model {
        Model::Classical(p) => (
            vasicek::ui_classify(p, tol),
            Some(p.lambda * p.long_bond_volatility()),
        ),
        Model::Levy(m) => {
            let v = m
                .ui_classify(tol)
                .map_err(numeric("regime classification"))?;
            // Undefined when σ/k falls outside the driver's exponent domain.
            (v, m.long_bond_excess_return().ok())
        }
    };
    let p = model.params();
    let gap = p.lambda - p.long_bond_volatility();
    let witness = match verdict.witness_p {
        Some(w) if w.is_infinite() => Cell::Text("any".into()),
        other => other.into(),
    };
    let mut table = Table::new(
        "regime",
        &[
            "long_rate",
            "regime",
            "witness_p",
            "ross_recovery_gap",
            "ross_recovery",
            "long_bond_volatility",
            "long_bond_excess_return",
        ],
    );
    let ross = if gap.abs() <= ROSS_TOLERANCE {
        "Ross recovery holds"
    } else {
        "Ross recovery fails"
    };
    table.push(vec![
        verdict.long_rate.into(),
        verdict.regime.as_str().into(),
        witness,
        gap.into(),
        ross.into(),
        p.long_bond_volatility().into(),
        excess.into(),
    ]);
    Ok(Outcome::plain(table))
}

#[derive(Debug, Deserialize)]
struct ScenarioRow {
    t: f64,
    r: f64,
}

/// Reads a `t,r` scenario file.
pub fn read_scenario(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("scenario {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Config(format!("scenario {}: {e}", path.display())))?;
    if headers != vec!["t", "r"] {
        return Err(CliError::Config(format!(
            "scenario {}: header must be `t,r`, found `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in reader.deserialize::<ScenarioRow>() {
        let row = rec.map_err(|e| {
            let line = e
                .position()
                .map_or(String::new(), |p| format!(" line {}", p.line()));
            CliError::Config(format!("scenario {}{line}: {e}", path.display()))
        })?;
        if !(row.t.is_finite() && row.r.is_finite() && row.t >= 0.0) {
            return Err(CliError::Config(format!(
                "scenario {} line {}: `t` must be non-negative and `r` finite",
                path.display(),
                rows.len() + 2
            )));
        }
        rows.push((row.t, row.r));
    }
    Ok(rows)
}

pub fn longbond(cfg: &RunConfig, base_dir: &Path) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let scenario = read_scenario(&cfg.scenario_path(base_dir)?)?;
    let mut table = Table::new("longbond", &["t", "r", "L"]);
    for (t, r) in scenario {
        let l = match &model {
            Model::Classical(p) => vasicek::long_bond_return(p, t, r),
            Model::Levy(m) => m.long_bond_return(t, r),
        };
        table.push(vec![t.into(), r.into(), l.into()]);
    }
    Ok(Outcome::plain(table))
}

pub fn simulate(cfg: &RunConfig, seed: Option<u64>) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let q = cfg.quadrature()?;
    let sim_model = model.simulation_model()?;
    let sim = cfg.simulation(&sim_model, seed)?;
    let summary =
        montecarlo::estimate_grid_summary(&sim_model, &sim).map_err(numeric("simulation"))?;
    let mut table = Table::new(
        "simulate",
        &[
            "t",
            "r_mean",
            "r_std_error",
            "r_target",
            "kernel_mean",
            "kernel_std_error",
            "bond_price",
            "martingale_deviation",
            "martingale_std_error",
        ],
    );
    for s in summary {
        // Every built-in driver is compensated, so the short-rate mean is driver-free.
        let (r_target, _) = vasicek::short_rate_moments(model.params(), s.t);
        let price = bond_quote(&model, s.t, &q)?.price;
        table.push(vec![
            s.t.into(),
            s.short_rate.mean.into(),
            s.short_rate.std_error.into(),
            r_target.into(),
            s.kernel.mean.into(),
            s.kernel.std_error.into(),
            price.into(),
            s.martingale_deviation.mean.into(),
            s.martingale_deviation.std_error.into(),
        ]);
    }
    Ok(Outcome {
        table,
        seed: Some(sim.seed),
        scheme: Some(sim.scheme),
        passed: true,
    })
}

struct Checks {
    table: Table,
    passed: bool,
}

impl Checks {
    fn new() -> Self {
        Self {
            table: Table::new(
                "validate",
                &[
                    "check",
                    "estimate",
                    "target",
                    "std_error",
                    "tolerance",
                    "pass",
                ],
            ),
            passed: true,
        }
    }

    /// Passes when `|mean − target| ≤ tolerance`, with `tolerance` absolute.
    fn mc(&mut self, name: String, est: McEstimate, target: f64, tolerance: f64) {
        let pass = (est.mean - target).abs() <= tolerance;
        self.push(
            name,
            est.mean.into(),
            target.into(),
            est.std_error.into(),
            tolerance.into(),
            pass,
        );
    }

    fn push(
        &mut self,
        name: String,
        estimate: Cell,
        target: Cell,
        se: Cell,
        tolerance: Cell,
        pass: bool,
    ) {
        self.passed &= pass;
        self.table.push(vec![
            Cell::Text(name),
            estimate,
            target,
            se,
            tolerance,
            pass.into(),
        ]);
    }
}

fn check_within_horizon(
    field: &str,
    times: &[f64],
    sim: &SimulationConfig,
) -> Result<(), CliError> {
    check_grid(field, times)?;
    match times.iter().find(|&&t| t > sim.horizon) {
        Some(t) => Err(CliError::Config(format!(
            "`{field}` time {t} lies beyond `simulation.horizon` = {}",
            sim.horizon
        ))),
        None => Ok(()),
    }
}

/// Euler price bias at `maturity`, using the grid step of `sim`.
fn euler_bias(
    model: &LevyVasicekModel,
    maturity: f64,
    exact: f64,
    sim: &SimulationConfig,
) -> Result<f64, CliError> {
    let steps = ((maturity / sim.step()).round() as usize).max(1);
    Ok(
        (montecarlo::euler_bond_price(model, maturity, steps).map_err(numeric("euler bias"))?
            - exact)
            .abs(),
    )
}

pub fn validate(cfg: &RunConfig, seed: Option<u64>) -> Result<Outcome, CliError> {
    let model = cfg.build_model()?;
    let q = cfg.quadrature()?;
    let sim_model = model.simulation_model()?;
    let sim = cfg.simulation(&sim_model, seed)?;
    let v = &cfg.validate;
    check_within_horizon("validate.maturities", &v.maturities, &sim)?;
    check_within_horizon("validate.martingale_times", &v.martingale_times, &sim)?;
    check_within_horizon("validate.tail_times", &v.tail_times, &sim)?;
    if v.lp_time > sim.horizon || !(v.lp_time >= 0.0) {
        return Err(CliError::Config(format!(
            "`validate.lp_time` = {} must lie in [0, simulation.horizon]",
            v.lp_time
        )));
    }
    let exact = sim.scheme != Scheme::EulerLevy;
    let mut checks = Checks::new();

    let prices = montecarlo::estimate_bond_prices(&sim_model, &v.maturities, &sim)
        .map_err(numeric("bond simulation"))?;
    for (&t, est) in v.maturities.iter().zip(prices) {
        let target = bond_quote(&model, t, &q)?.price;
        let bias = if exact {
            0.0
        } else {
            euler_bias(&sim_model, t, target, &sim)?
        };
        checks.mc(
            format!("bond_price T={t}"),
            est,
            target,
            v.tolerance_se * est.std_error + bias,
        );
    }

    if exact {
        for &t in &v.martingale_times {
            let est = montecarlo::estimate_martingale_deviation(&sim_model, t, &sim)
                .map_err(numeric("martingale simulation"))?;
            checks.mc(
                format!("martingale t={t}"),
                est,
                0.0,
                v.martingale_tolerance_se * est.std_error,
            );
        }
        if let Model::Classical(p) = &model {
            for &t in &v.tail_times {
                let est = montecarlo::estimate_tail(&sim_model, t, v.tail_delta, &sim)
                    .map_err(numeric("tail simulation"))?;
                let target = vasicek::tail_expectation(p, t, v.tail_delta)
                    .map_err(numeric("tail expectation"))?;
                checks.mc(
                    format!("tail t={t} delta={}", v.tail_delta),
                    est,
                    target,
                    v.tolerance_se * est.std_error,
                );
            }
        }
        let est = montecarlo::estimate_lp_moment(&sim_model, v.lp_power, v.lp_time, &sim)
            .map_err(numeric("Lp simulation"))?;
        let log_target = match &model {
            Model::Classical(p) => vasicek::lp_log_moment(p, v.lp_power, v.lp_time),
            Model::Levy(m) => m
                .lp_log_moment(v.lp_power, v.lp_time, &q)
                .map_err(numeric("Lp moment"))?,
        };
        checks.mc(
            format!("lp_moment p={} t={}", v.lp_power, v.lp_time),
            est,
            log_target.exp(),
            v.tolerance_se * est.std_error,
        );
    }

    let driver = sim_model.driver();
    for alpha in EXPONENT_LAW_ALPHAS
        .into_iter()
        .filter(|&a| driver.domain().contains(a))
    {
        let est = montecarlo::estimate_exponential_moment(driver, alpha, EXPONENT_LAW_TIME, &sim)
            .map_err(numeric("exponent-law simulation"))?;
        let target =
            (driver.psi(alpha).map_err(numeric("exponent law"))? * EXPONENT_LAW_TIME).exp();
        checks.mc(
            format!("exponent_law alpha={alpha}"),
            est,
            target,
            v.martingale_tolerance_se * est.std_error,
        );
    }

    for c in driver.validate().checks {
        checks.push(
            format!("exponent {}", c.name),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            c.passed,
        );
    }
    let grid = driver.validation_grid(VALIDATION_POINTS_PER_SIGN);
    let superlinear = grid
        .iter()
        .all(|&a| driver.superlinearity_gap(a).is_ok_and(|g| g > 0.0));
    checks.push(
        "exponent superlinearity on grid".into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        superlinear,
    );

    let verdict = sim_model
        .ui_classify(cfg.regime.zero_tolerance)
        .map_err(numeric("regime classification"))?;
    if verdict.regime == Regime::UniformlyIntegrable {
        let w = verdict.witness_p.expect("witness in the integrable regime");
        let g = sim_model
            .witness_predicate(w)
            .map_err(numeric("witness predicate"))?;
        checks.push(
            format!("ui_witness p={}", format_sig(w, CSV_DIGITS)),
            g.into(),
            0.0.into(),
            Cell::Empty,
            Cell::Empty,
            g < 0.0,
        );
    }

    Ok(Outcome {
        table: checks.table,
        seed: Some(sim.seed),
        scheme: Some(sim.scheme),
        passed: checks.passed,
    })
}
