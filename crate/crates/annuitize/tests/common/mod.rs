//! Shared fixtures: the reference calibrations, a broad random parameter
//! sampler and a parameter set in the never-stop, stop-above regime.

#![allow(dead_code)]

use annuitize::core_model::{MarketParams, MortalityParams, PreferenceParams, PricingParams};
use annuitize::verify_oracles::{
    continuation_grid, dominance_gap, log_grid, ode_residual, pasting_report, wealth_scale,
};
use annuitize::{ModelParams, ShockSolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draws one parameter set from wide economic ranges; `None` when the draw
/// violates a standing assumption.
pub fn draw_params<R: Rng>(rng: &mut R) -> Option<ModelParams> {
    let theta = rng.gen_range(0.02..0.12);
    let alpha = rng.gen_range(0.0..theta);
    let sigma = rng.gen_range(0.05..0.4);
    let rho = rng.gen_range(0.01..0.1);
    let nu = rng.gen_range(0.0..1.0);
    let rho_hat = rng.gen_range(0.01..0.1);
    let mu_hat = rng.gen_range(0.005..0.1);
    let mu_l = rng.gen_range(0.005..0.1);
    let delta = rng.gen_range(0.0..0.3);
    let lambda_l = rng.gen_range(0.01..0.5);
    let sign = rng.gen_range(0..3) as f64 - 1.0;
    let k = sign * rng.gen_range(100.0..5000.0);
    ModelParams {
        market: MarketParams { theta, alpha, sigma },
        prefs: PreferenceParams { rho, nu },
        pricing: PricingParams { rho_hat, mu_hat, k },
        mortality: MortalityParams { mu_l, delta, lambda_l },
    }
    .validate()
    .ok()
}

/// Up to `attempts` valid parameter sets from a seeded stream.
pub fn sample_params(seed: u64, attempts: usize) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..attempts).filter_map(|_| draw_params(&mut rng)).collect()
}

/// A parameter set in the never-stop, stop-above regime (the only regime
/// with alpha functions), found by the sampler with seed 7.
pub fn synthetic_never_stop_above() -> ModelParams {
    ModelParams {
        market: MarketParams { theta: 0.116879180792041, alpha: 0.05502144972025508, sigma: 0.09531981356361122 },
        prefs: PreferenceParams { rho: 0.025156359730246023, nu: 0.021607708956616678 },
        pricing: PricingParams { rho_hat: 0.06362323009382002, mu_hat: 0.052458655005889095, k: 3028.1478672666362 },
        mortality: MortalityParams {
            mu_l: 0.044309458242325656,
            delta: 0.09036552263877733,
            lambda_l: 0.11520250940831024,
        },
    }
}

/// Relative difference `|a - b| / |b|`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Points per residual grid.
pub const GRID_POINTS: usize = 200;

/// Worst structural residuals of one solution: value-matching and
/// smooth-pasting gaps at every breakpoint, scaled ODE residuals on
/// 200-point continuation grids, and payoff dominance, for both states.
#[derive(Debug, Default, Clone, Copy)]
pub struct Worst {
    pub value_matching: f64,
    pub smooth_pasting: f64,
    pub ode: f64,
    pub dominance: f64,
}

impl Worst {
    pub fn merge(&mut self, o: Worst) {
        self.value_matching = self.value_matching.max(o.value_matching);
        self.smooth_pasting = self.smooth_pasting.max(o.smooth_pasting);
        self.ode = self.ode.max(o.ode);
        self.dominance = self.dominance.max(o.dominance);
    }
}

pub fn structural_residuals(p: &ModelParams, sol: &ShockSolution) -> Worst {
    let c = &sol.coeffs;
    let market = &p.market;
    let scale = wealth_scale(sol);
    let (lo, hi) = (1e-2 * scale, 1e2 * scale);
    let post = &sol.post_shock;
    let mut w = Worst::default();
    for vf in [&sol.pre_shock, &post.value] {
        for r in pasting_report(vf) {
            w.value_matching = w.value_matching.max(r.value_gap);
            w.smooth_pasting = w.smooth_pasting.max(r.slope_gap);
        }
        w.dominance = w.dominance.max(dominance_gap(vf, &log_grid(lo, hi, GRID_POINTS)));
    }
    let source_l = |x: f64| -(market.alpha + p.prefs.nu * c.low.mu) * x - c.low.lambda * post.eval(x);
    let grid = continuation_grid(&sol.pre_shock, lo, hi, GRID_POINTS);
    if !grid.is_empty() {
        w.ode = ode_residual(&sol.pre_shock, market, c.low.r, &source_l, &grid).unwrap().max_scaled;
    }
    let source_h = |x: f64| -(market.alpha + p.prefs.nu * c.high.mu) * x;
    let grid = continuation_grid(&post.value, lo, hi, GRID_POINTS);
    if !grid.is_empty() {
        w.ode = w.ode.max(ode_residual(&post.value, market, c.high.r, &source_h, &grid).unwrap().max_scaled);
    }
    w
}
