//! Policy simulation and life-expectancy statistics.

mod common;

use annuitize::core_model::MarketParams;
use annuitize::monte_carlo::{life_expectancy, simulate_path, simulate_policy, Policy, SimConfig};
use annuitize::{solve_constant, solve_shock, ModelParams, StoppingRegion};

fn cfg(n_paths: usize, dt: f64, seed: u64) -> SimConfig {
    SimConfig { n_paths, dt, horizon: 20.0, x0: 1e5, seed }
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let p = ModelParams::reference_unrounded();
    let policy = Policy::shock(&solve_shock(&p).unwrap());
    let a = simulate_policy(&p.market, &p.mortality, &policy, &cfg(4000, 1.0 / 252.0, 5)).unwrap();
    let b = simulate_policy(&p.market, &p.mortality, &policy, &cfg(4000, 1.0 / 252.0, 5)).unwrap();
    let c = simulate_policy(&p.market, &p.mortality, &policy, &cfg(4000, 1.0 / 252.0, 6)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    // A single path does not depend on how many paths run alongside it.
    let one = simulate_path(&p.market, p.mortality.lambda_l, &policy, &cfg(1, 1.0 / 252.0, 5), 17);
    let other = simulate_path(&p.market, p.mortality.lambda_l, &policy, &cfg(4000, 1.0 / 252.0, 5), 17);
    assert_eq!(one, other);
}

#[test]
fn shock_times_are_exponential() {
    let p = ModelParams::reference_unrounded();
    let policy = Policy::shock(&solve_shock(&p).unwrap());
    let s = simulate_policy(&p.market, &p.mortality, &policy, &cfg(20_000, 1.0 / 52.0, 3)).unwrap();
    let expected = 1.0 / p.mortality.lambda_l;
    assert!(
        (s.mean_shock_time - expected).abs() < 3.0 * s.se_shock_time,
        "{} +- {}",
        s.mean_shock_time,
        s.se_shock_time
    );
    assert!((s.frac_pre_shock + s.frac_post_shock - s.frac_annuitized_total).abs() < 1e-15);
}

#[test]
fn fractions_are_stable_under_step_halving() {
    let p = ModelParams::reference_unrounded();
    let policy = Policy::shock(&solve_shock(&p).unwrap());
    let coarse = simulate_policy(&p.market, &p.mortality, &policy, &cfg(20_000, 1.0 / 126.0, 11)).unwrap();
    let fine = simulate_policy(&p.market, &p.mortality, &policy, &cfg(20_000, 1.0 / 252.0, 11)).unwrap();
    let se = coarse.se_frac_total.hypot(fine.se_frac_total);
    // Finer monitoring can only catch more crossings; allow noise plus a small bias.
    assert!((fine.frac_annuitized_total - coarse.frac_annuitized_total).abs() < 4.0 * se + 0.005);
    assert!(
        (fine.mean_time_to_annuitize - coarse.mean_time_to_annuitize).abs()
            < 4.0 * coarse.se_time.hypot(fine.se_time) + 0.1
    );
}

#[test]
fn no_shock_limit_matches_constant_policy() {
    let mut p = ModelParams::reference_unrounded();
    p.mortality.delta = 0.0;
    let shock = Policy::shock(&solve_shock(&p).unwrap());
    let constant = Policy::constant(&solve_constant(&p, p.mortality.mu_l).unwrap());
    assert_eq!(shock.pre_shock, constant.pre_shock);
    let c = cfg(20_000, 1.0 / 126.0, 8);
    let a = simulate_policy(&p.market, &p.mortality, &shock, &c).unwrap();
    let b = simulate_policy(&p.market, &p.mortality, &constant, &c).unwrap();
    let se = a.se_frac_total.hypot(b.se_frac_total);
    assert!((a.frac_annuitized_total - b.frac_annuitized_total).abs() < 3.0 * se);
    assert_eq!(b.frac_post_shock, 0.0);
}

#[test]
fn vanishing_volatility_gives_deterministic_crossing() {
    let market = MarketParams { theta: 0.09, alpha: 0.04, sigma: 1e-8 };
    let mortality = ModelParams::reference().mortality;
    let drift = market.theta - market.alpha;
    let x0 = 1e5;
    let dt = 1.0 / 252.0;
    // Midway between two grid times, so noise of size 1e-8 cannot change the step.
    let target = x0 * (drift * (1260.5 * dt)).exp();
    let policy = Policy { pre_shock: StoppingRegion::Above(target), post_shock: None };
    let c = SimConfig { n_paths: 200, dt, horizon: 20.0, x0, seed: 1 };
    let s = simulate_policy(&market, &mortality, &policy, &c).unwrap();
    assert_eq!(s.frac_annuitized_total, 1.0);
    assert!((s.mean_time_to_annuitize - 1261.0 * dt).abs() < 1e-9, "{}", s.mean_time_to_annuitize);
    assert!(s.se_time < 1e-12);
}

#[test]
fn starting_inside_the_region_annuitizes_immediately() {
    let p = ModelParams::reference_unrounded();
    let policy = Policy { pre_shock: StoppingRegion::Everywhere, post_shock: None };
    let s = simulate_policy(&p.market, &p.mortality, &policy, &cfg(100, 0.01, 1)).unwrap();
    assert_eq!(s.frac_annuitized_total, 1.0);
    assert_eq!(s.mean_time_to_annuitize, 0.0);
}

#[test]
fn invalid_configurations_are_rejected() {
    let p = ModelParams::reference_unrounded();
    let policy = Policy::shock(&solve_shock(&p).unwrap());
    for bad in [cfg(0, 0.01, 1), cfg(10, 0.0, 1), cfg(10, 30.0, 1), SimConfig { x0: -1.0, ..cfg(10, 0.01, 1) }] {
        assert!(simulate_policy(&p.market, &p.mortality, &policy, &bad).is_err(), "{bad:?}");
    }
    assert!(life_expectancy(&p.mortality, 0, 1).is_err());
}

#[test]
fn life_expectancy_matches_closed_form() {
    let m = ModelParams::reference_unrounded().mortality;
    let expected = 1.0 / (m.mu_l + m.lambda_l) + m.lambda_l / ((m.mu_l + m.lambda_l) * m.mu_h());
    let (mean, se) = life_expectancy(&m, 200_000, 4).unwrap();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} +- {se} vs {expected}");
    let mut flat = m;
    flat.delta = 0.0;
    let (mean, se) = life_expectancy(&flat, 200_000, 4).unwrap();
    assert!((mean - 1.0 / m.mu_l).abs() < 3.0 * se, "{mean} +- {se}");
}
