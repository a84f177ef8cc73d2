//! Property tests for the closed-form and quadrature layers.

use longbond_core::levy_exponent::VALIDATION_POINTS_PER_SIGN;
use longbond_core::levy_vasicek::DEFAULT_BARRIER_RATE;
use longbond_core::vasicek::{self, ModelParams, Regime};
use longbond_core::{LevyExponentModel, LevyVasicekModel, QuadratureConfig};
use proptest::prelude::*;

fn driver_strategy() -> impl Strategy<Value = LevyExponentModel> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|c| LevyExponentModel::brownian(c).unwrap()),
        (0.1..5.0f64).prop_map(|mu| LevyExponentModel::compensated_poisson(mu).unwrap()),
        (0.1..5.0f64, -1.0..1.0f64, 0.05..1.0f64)
            .prop_map(|(mu, m, s)| LevyExponentModel::compound_poisson_normal(mu, m, s).unwrap()),
    ]
}

fn params_strategy() -> impl Strategy<Value = ModelParams<f64>> {
    (
        0.1..2.0f64,
        -0.05..0.1f64,
        0.0..0.1f64,
        0.05..1.0f64,
        -0.02..0.1f64,
    )
        .prop_map(|(k, theta, sigma, lambda, r0)| {
            ModelParams::new(k, theta, sigma, lambda, r0).unwrap()
        })
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_lemmas_on_grid(d in driver_strategy()) {
        prop_assert!(d.psi(0.0).unwrap().abs() <= 1e-12);
        for alpha in d.validation_grid(VALIDATION_POINTS_PER_SIGN) {
            prop_assert!(d.psi(alpha).unwrap() > 0.0, "psi({alpha}) not positive");
            prop_assert!(d.superlinearity_gap(alpha).unwrap() > 0.0, "superlinearity fails at {alpha}");
            let h = 1e-6 * alpha.abs().max(1.0);
            let fd1 = (d.psi(alpha + h).unwrap() - d.psi(alpha - h).unwrap()) / (2.0 * h);
            let fd2 = (d.psi_prime(alpha + h).unwrap() - d.psi_prime(alpha - h).unwrap()) / (2.0 * h);
            prop_assert!(rel_gap(d.psi_prime(alpha).unwrap(), fd1) <= 1e-5, "psi' at {alpha}");
            prop_assert!(rel_gap(d.psi_double_prime(alpha).unwrap(), fd2) <= 1e-5, "psi'' at {alpha}");
        }
    }

    #[test]
    fn excess_return_increases_in_lambda_and_sigma(d in driver_strategy(), lambda in 0.05..1.5f64, sigma in 0.0..1.5f64) {
        let r = d.excess_rate_of_return(lambda, sigma).unwrap();
        prop_assert!(d.excess_rate_of_return(lambda * 1.1, sigma).unwrap() >= r);
        prop_assert!(d.excess_rate_of_return(lambda, sigma * 1.1 + 1e-3).unwrap() > r);
    }

    #[test]
    fn brownian_reduction(p in params_strategy(), big_t in 0.1..200.0f64, power in 1.0..3.0f64) {
        let m = LevyVasicekModel::classical(p).unwrap();
        let q = QuadratureConfig::default();
        prop_assert!(rel_gap(m.long_rate(), vasicek::long_rate(&p)) <= 1e-8 || (m.long_rate() - vasicek::long_rate(&p)).abs() < 1e-15);
        let lp = m.bond_price(0.0, p.r0, big_t, &q).unwrap().price;
        prop_assert!(rel_gap(lp, vasicek::bond_price(&p, 0.0, p.r0, big_t).unwrap().price) <= 1e-8);
        let lm = m.lp_log_moment(power, big_t, &q).unwrap();
        prop_assert!((lm - vasicek::lp_log_moment(&p, power, big_t)).abs() <= 1e-8 * lm.abs().max(1.0));
        let r_t = p.theta + 0.01;
        prop_assert!(rel_gap(m.long_bond_return(big_t, r_t), vasicek::long_bond_return(&p, big_t, r_t)) <= 1e-8);
    }

    #[test]
    fn psi_integral_stays_near_linear_growth(p in params_strategy(), d in driver_strategy()) {
        let m = LevyVasicekModel::new(p, d).unwrap();
        let a = p.terminal_exponent();
        let psi_a = m.driver().psi(a).unwrap();
        let bound = m.psi_integral_bound();
        for t in [0.1, 1.0, 10.0, 100.0, 1e3, 1e4] {
            let dev = (m.psi_integral(0.0, t, &QuadratureConfig::default()).unwrap() - psi_a * t).abs();
            prop_assert!(dev <= bound * (1.0 + 1e-9) + 1e-9, "t={t}: {dev} > {bound}");
        }
    }

    #[test]
    fn yields_approach_long_rate(p in params_strategy(), d in driver_strategy()) {
        let m = LevyVasicekModel::new(p, d).unwrap();
        let q = QuadratureConfig::default();
        let gaps: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&t| (m.bond_price(0.0, p.r0, t, &q).unwrap().zero_yield - m.long_rate()).abs())
            .collect();
        prop_assert!(gaps[1] <= gaps[0] && gaps[2] <= gaps[1], "{gaps:?}");
        // The gap decays like 1/T once e^{−kT} is negligible.
        prop_assert!(gaps[2] <= 0.101 * gaps[1] + 1e-12, "{gaps:?}");
    }

    #[test]
    fn regime_follows_long_rate_sign(p in params_strategy(), d in driver_strategy()) {
        let m = LevyVasicekModel::new(p, d).unwrap();
        let v = m.ui_classify(1e-12).unwrap();
        let expected = Regime::classify(m.long_rate(), 1e-12);
        prop_assert_eq!(v.regime, expected);
        prop_assert_eq!(v.witness_p.is_some(), expected == Regime::UniformlyIntegrable);
    }

    #[test]
    fn lp_moment_bounded_at_witness(p in params_strategy(), d in driver_strategy()) {
        let m = LevyVasicekModel::new(p, d).unwrap();
        let v = m.ui_classify(1e-12).unwrap();
        prop_assume!(v.regime == Regime::UniformlyIntegrable);
        let w = v.witness_p.unwrap();
        prop_assert!(w > 1.0 && m.witness_predicate(w).unwrap() < 0.0);
        // Bounded part: the r₀ − θ transient plus the integral deviation for ψ(p·).
        let drv = m.driver();
        let scale = p.sigma / (p.k * p.k);
        let cap = w / p.k * (p.r0 - p.theta).abs()
            + scale * w * (drv.psi_prime(w * p.terminal_exponent()).unwrap().abs() + drv.psi_prime(-w * p.lambda).unwrap().abs());
        for t in [0.0, 1.0, 10.0, 100.0, 1e3, 1e4] {
            let lm = m.lp_log_moment(w, t, &QuadratureConfig::default()).unwrap();
            prop_assert!(lm <= cap + 1e-8, "t={t}: {lm} > {cap}");
        }
    }

    #[test]
    fn classical_lp_sup_within_bounded_terms(p in params_strategy()) {
        let v = vasicek::ui_classify(&p, 1e-12);
        prop_assume!(v.regime == Regime::UniformlyIntegrable && v.witness_p.unwrap().is_finite());
        let w = v.witness_p.unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| 1e4 * (i as f64 / 400.0).powi(3)).collect();
        let sup = grid.iter().map(|&t| vasicek::lp_log_moment(&p, w, t)).fold(f64::NEG_INFINITY, f64::max);
        let first = (w / p.k * (p.theta - p.r0 - w * p.sigma / p.k * p.terminal_exponent())).max(0.0);
        let second = w * w * p.sigma * p.sigma / (4.0 * p.k.powi(3));
        prop_assert!(sup <= first + second + 1e-8 * (1.0 + sup.abs()), "{sup} > {}", first + second);
    }

    #[test]
    fn classical_tail_monotone_and_capped(p in params_strategy(), t in 0.1..500.0f64) {
        let cap = vasicek::bond_price(&p, 0.0, p.r0, t).unwrap().price;
        let mut prev = f64::INFINITY;
        for e in -6..=6 {
            let v = vasicek::tail_expectation(&p, t, 10f64.powi(e)).unwrap();
            prop_assert!(v <= prev && v <= cap * (1.0 + 1e-14));
            prev = v;
        }
    }

    #[test]
    fn classical_escape_time(p in params_strategy(), shift in 0.05..1.0f64) {
        // θ placed so that R∞ = −shift.
        let p = ModelParams { theta: p.theta - vasicek::long_rate(&p) - shift, ..p };
        let t_star = vasicek::l1_escape_time(&p, 2.0).unwrap();
        for f in [1.0001, 1.5, 3.0, 10.0] {
            let t = t_star.max(0.0) * f + 1e-9;
            prop_assert!(vasicek::bond_price(&p, 0.0, p.r0, t).unwrap().price > 2.0);
        }
    }
}

#[test]
fn chebyshev_drift_statistics_on_boundary() {
    // Large drift constant, so the log(ωt)/t term in the barrier is small against C.
    let driver = LevyExponentModel::compensated_poisson(1.0).unwrap();
    let (k, sigma, lambda, r0) = (2.0, 5.0, 0.5, 0.05);
    let a = sigma / k - lambda;
    let theta = driver.psi(a).unwrap() - driver.psi(-lambda).unwrap();
    let m = LevyVasicekModel::new(
        ModelParams::new(k, theta, sigma, lambda, r0).unwrap(),
        driver,
    )
    .unwrap();
    assert!(m.long_rate().abs() < 1e-12);
    let c = m.drift_constant();
    let var_rate = a * a * m.driver().psi_double_prime(a).unwrap();
    for t in [50.0, 100.0, 200.0] {
        let s = m
            .chebyshev_stats(t, DEFAULT_BARRIER_RATE, &QuadratureConfig::default())
            .unwrap();
        let drift = (s.mean_star - s.barrier) / t;
        assert!((drift - c).abs() <= 0.05 * c, "t={t}: {drift} vs {c}");
        assert!(
            (s.variance_star / t - var_rate).abs() <= 0.05 * var_rate,
            "t={t}"
        );
    }
}
