//! Monte Carlo oracles paired with the closed-form and quadrature layers.

use longbond_core::levy_exponent::LevyExponentModel;
use longbond_core::montecarlo::{self, Scheme, SimulationConfig};
use longbond_core::vasicek::{self, ModelParams};
use longbond_core::{LevyVasicekModel, QuadratureConfig};

const MILLION: usize = 1_000_000;

fn classical_params() -> ModelParams<f64> {
    ModelParams::new(0.2, 0.03, 0.01, 0.5, 0.05).unwrap()
}

fn classical() -> LevyVasicekModel {
    LevyVasicekModel::classical(classical_params()).unwrap()
}

fn poisson() -> LevyVasicekModel {
    let p = ModelParams::new(0.2, 0.03, 0.05, 0.5, 0.05).unwrap();
    LevyVasicekModel::new(p, LevyExponentModel::compensated_poisson(1.0).unwrap()).unwrap()
}

fn sim(n_paths: usize, n_steps: usize, horizon: f64, scheme: Scheme) -> SimulationConfig {
    SimulationConfig {
        n_paths,
        n_steps,
        horizon,
        seed: 20240611,
        scheme,
    }
}

#[test]
fn exact_gaussian_reproduces_short_rate_moments() {
    let m = classical();
    let cfg = sim(MILLION, 10, 5.0, Scheme::ExactGaussian);
    let (mean, var) = vasicek::short_rate_moments(&classical_params(), 5.0);
    let mut first = 0.0;
    let mut second = 0.0;
    let mut n = 0.0;
    for path in montecarlo::simulate_paths(&m, &cfg).unwrap() {
        let r = *path.unwrap().r.last().unwrap();
        first += r;
        second += r * r;
        n += 1.0;
    }
    let sample_mean = first / n;
    let sample_var = (second - n * sample_mean * sample_mean) / (n - 1.0);
    let se_mean = (var / n).sqrt();
    // Var of the sample variance of a normal is 2σ⁴/(n−1).
    let se_var = var * (2.0 / (n - 1.0)).sqrt();
    assert!(
        (sample_mean - mean).abs() <= 4.0 * se_mean,
        "{sample_mean} vs {mean}"
    );
    assert!(
        (sample_var - var).abs() <= 4.0 * se_var,
        "{sample_var} vs {var}"
    );
}

#[test]
fn exact_jump_times_count_and_compensation() {
    let m = poisson();
    let cfg = sim(100_000, 10, 10.0, Scheme::ExactJumpTimes);
    let (mut sum, mut sum_sq, mut n) = (0.0, 0.0, 0.0);
    for path in montecarlo::simulate_paths(&m, &cfg).unwrap() {
        let xi = *path.unwrap().xi.last().unwrap();
        sum += xi;
        sum_sq += xi * xi;
        n += 1.0;
    }
    let mean_xi = sum / n;
    let se = ((sum_sq / n - mean_xi * mean_xi) / n).sqrt();
    // N_10 = ξ_10 + 10 for the unit-rate compensated Poisson driver.
    let mean_jumps = mean_xi + 10.0;
    assert!((mean_jumps - 10.0).abs() <= 4.0 * se, "E[N] = {mean_jumps}");
    assert!((se * n.sqrt() - 10f64.sqrt()).abs() < 0.05);
}

#[test]
fn classical_bond_price_matches_closed_form() {
    let m = classical();
    let cfg = sim(MILLION, 10, 10.0, Scheme::ExactGaussian);
    let est = montecarlo::estimate_bond_price(&m, 10.0, &cfg).unwrap();
    let exact = vasicek::bond_price(&classical_params(), 0.0, 0.05, 10.0)
        .unwrap()
        .price;
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");
}

#[test]
fn poisson_bond_price_and_lp_moment_match_quadrature() {
    let m = poisson();
    let q = QuadratureConfig::default();
    let cfg = sim(MILLION, 10, 10.0, Scheme::ExactJumpTimes);
    let est = montecarlo::estimate_bond_price(&m, 10.0, &cfg).unwrap();
    let exact = m.bond_price(0.0, 0.05, 10.0, &q).unwrap().price;
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");

    let est = montecarlo::estimate_lp_moment(&m, 1.5, 5.0, &cfg).unwrap();
    let exact = m.lp_log_moment(1.5, 5.0, &q).unwrap().exp();
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");
}

#[test]
fn classical_tail_expectation() {
    let m = classical();
    let cfg = sim(MILLION, 5, 5.0, Scheme::ExactGaussian);
    let est = montecarlo::estimate_tail(&m, 5.0, 1.0, &cfg).unwrap();
    let exact = vasicek::tail_expectation(&classical_params(), 5.0, 1.0).unwrap();
    assert!(est.within(exact, 3.0), "{est:?} vs {exact}");
}

#[test]
fn tail_estimates_decrease_in_delta() {
    let m = classical();
    let cfg = sim(50_000, 50, 50.0, Scheme::ExactGaussian);
    for t in [5.0, 20.0, 50.0] {
        let tails: Vec<f64> = [0.1, 1.0, 10.0, 1e3]
            .iter()
            .map(|&d| montecarlo::estimate_tail(&m, t, d, &cfg).unwrap().mean)
            .collect();
        assert!(tails.windows(2).all(|w| w[1] <= w[0]), "t={t}: {tails:?}");
    }
}

#[test]
fn digital_put_matches_closed_form() {
    let cfg = sim(MILLION, 1, 5.0, Scheme::ExactGaussian);
    for (r, lambda, kappa, big_t) in [
        (0.0, 1.0, 1.0, 1.0),
        (0.03, 0.4, 1.2, 2.0),
        (0.05, 0.2, 0.9, 5.0),
    ] {
        let est = montecarlo::estimate_digital_put(r, lambda, kappa, big_t, &cfg).unwrap();
        let exact = vasicek::digital_put_gbm(r, lambda, kappa, big_t);
        assert!(
            est.within(exact, 3.0),
            "({r},{lambda},{kappa},{big_t}): {est:?} vs {exact}"
        );
    }
}

#[test]
fn geometric_martingale_has_unit_mean() {
    for (m, scheme) in [
        (classical(), Scheme::ExactGaussian),
        (poisson(), Scheme::ExactJumpTimes),
    ] {
        let cfg = sim(200_000, 5, 5.0, scheme);
        for t in [1.0, 5.0] {
            let est = montecarlo::estimate_martingale_deviation(&m, t, &cfg).unwrap();
            assert!(est.within(0.0, 4.0), "{scheme} t={t}: {est:?}");
        }
    }
}

#[test]
fn driver_exponent_law() {
    let cfg = sim(MILLION, 1, 1.0, Scheme::EulerLevy);
    let drivers = [
        LevyExponentModel::brownian(0.7).unwrap(),
        LevyExponentModel::compensated_poisson(1.0).unwrap(),
        LevyExponentModel::compound_poisson_normal(0.5, -0.1, 0.2).unwrap(),
    ];
    for d in &drivers {
        for alpha in [-1.0, -0.25, 0.25, 1.0] {
            let est = montecarlo::estimate_exponential_moment(d, alpha, 1.0, &cfg).unwrap();
            let exact = d.psi(alpha).unwrap().exp();
            assert!(
                est.within(exact, 4.0),
                "{} alpha={alpha}: {est:?} vs {exact}",
                d.name()
            );
        }
    }
}

#[test]
fn euler_scheme_converges_to_quadrature_price() {
    let m = poisson();
    let exact = m
        .bond_price(0.0, 0.05, 10.0, &QuadratureConfig::default())
        .unwrap()
        .price;
    let mut previous_bias = f64::INFINITY;
    for n_steps in [250, 500, 1000] {
        let cfg = sim(50_000, n_steps, 10.0, Scheme::EulerLevy);
        let est = montecarlo::estimate_bond_price(&m, 10.0, &cfg).unwrap();
        let bias = (montecarlo::euler_bond_price(&m, 10.0, n_steps).unwrap() - exact).abs();
        assert!(bias < previous_bias);
        previous_bias = bias;
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.std_error + bias,
            "n={n_steps}: {est:?} vs {exact} (bias {bias})"
        );
    }
}

#[test]
fn euler_bias_formula_matches_simulation() {
    // Coarse grid so the bias dominates the noise.
    let m = poisson();
    let cfg = sim(400_000, 5, 10.0, Scheme::EulerLevy);
    let est = montecarlo::estimate_bond_price(&m, 10.0, &cfg).unwrap();
    let euler = montecarlo::euler_bond_price(&m, 10.0, 5).unwrap();
    let exact = m
        .bond_price(0.0, 0.05, 10.0, &QuadratureConfig::default())
        .unwrap()
        .price;
    assert!(est.within(euler, 4.0), "{est:?} vs {euler}");
    assert!(!est.within(exact, 4.0));
}

#[test]
fn poisson_long_bond_return_matches_bond_ratio() {
    let m = poisson();
    let q = QuadratureConfig::default();
    let cfg = sim(8, 50, 5.0, Scheme::ExactJumpTimes);
    for path in montecarlo::simulate_paths(&m, &cfg).unwrap() {
        let r_t = *path.unwrap().r.last().unwrap();
        let big_t = 1e4;
        let ratio = (m.log_bond_price(5.0, r_t, big_t, &q).unwrap()
            - m.log_bond_price(0.0, 0.05, big_t, &q).unwrap())
        .exp();
        let l = m.long_bond_return(5.0, r_t);
        assert!((ratio / l - 1.0).abs() < 1e-4, "{ratio} vs {l}");
    }
}
