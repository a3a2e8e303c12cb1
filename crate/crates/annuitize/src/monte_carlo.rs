//! Path statistics of threshold policies and life-expectancy simulation.
//!
//! Each path draws its shock time `xi ~ Exp(lambda_l)` once, then moves
//! wealth by exact log-normal steps on a uniform grid. At each grid time the
//! active health state's stopping region is checked (closed comparison), and
//! the first entry records the annuitization time and state. The state
//! switches at the first grid time at or after `xi`.
//!
//! Path `i` always uses random stream `i` of the seeded generator, so results
//! are bit-identical for any thread count; means are reduced in path order
//! with compensated summation.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constant_solver::ConstantSolution;
use crate::core_model::{HealthState, MarketParams, MortalityParams};
use crate::error::{Error, Result};
use crate::shock_solver::{ShockSolution, StoppingRegion};
use crate::verify_oracles::{mean_and_se, path_rng, KahanSum};

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Monitoring step (yr).
    pub dt: f64,
    /// Simulated time span (yr).
    pub horizon: f64,
    /// Initial wealth (currency).
    pub x0: f64,
    pub seed: u64,
}

impl SimConfig {
    /// Checks `n_paths >= 1`, `0 < dt <= horizon` and `x0 > 0`.
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Runtime("sim.n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon && self.horizon.is_finite()) {
            return Err(Error::Runtime("sim: need 0 < dt <= horizon".into()));
        }
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(Error::Runtime("sim.x0 must be positive".into()));
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        (self.horizon / self.dt * (1.0 + 1e-12)).floor() as usize
    }
}

/// Per-state stopping regions of a threshold policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Policy {
    /// Region applied before the shock (or always, without a shock).
    pub pre_shock: StoppingRegion,
    /// Region applied after the shock; `None` simulates no shock at all.
    pub post_shock: Option<StoppingRegion>,
}

impl Policy {
    /// Single-state policy of a constant-force solution.
    pub fn constant(sol: &ConstantSolution) -> Self {
        Self { pre_shock: StoppingRegion::of_constant(&sol.regime), post_shock: None }
    }

    /// Two-state policy of a shock solution.
    pub fn shock(sol: &ShockSolution) -> Self {
        Self { pre_shock: sol.stopping_region_l, post_shock: Some(sol.stopping_region_h) }
    }
}

/// The state of one simulated path at the end of its run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathState {
    /// Time reached (yr): the annuitization time or the horizon.
    pub t: f64,
    /// Wealth at time `t`.
    pub wealth: f64,
    /// Health state at time `t`.
    pub health: HealthState,
    /// Shock time (infinite without a shock).
    pub xi: f64,
    /// Whether the path annuitized by the horizon.
    pub annuitized: bool,
}

/// Region membership in log-wealth, so the inner loop needs no `exp`.
#[derive(Debug, Clone, Copy)]
enum LogRegion {
    Always,
    Below(f64),
    Above(f64),
    Never,
}

impl LogRegion {
    fn new(region: StoppingRegion) -> Self {
        match region {
            StoppingRegion::Everywhere => Self::Always,
            StoppingRegion::Below(b) => Self::Below(b.ln()),
            StoppingRegion::Above(b) => Self::Above(b.ln()),
            // Wealth stays positive, so `{0}` is never reached.
            StoppingRegion::OnlyZero | StoppingRegion::Empty => Self::Never,
        }
    }

    #[inline]
    fn contains(self, lx: f64) -> bool {
        match self {
            Self::Always => true,
            Self::Below(lb) => lx <= lb,
            Self::Above(lb) => lx >= lb,
            Self::Never => false,
        }
    }
}

/// Simulates one path of the policy.
pub fn simulate_path(market: &MarketParams, lambda_l: f64, policy: &Policy, cfg: &SimConfig, path: u64) -> PathState {
    let mut rng = path_rng(cfg.seed, path);
    let xi = match policy.post_shock {
        Some(_) => {
            let e: f64 = Exp1.sample(&mut rng);
            e / lambda_l
        }
        None => f64::INFINITY,
    };
    let pre = LogRegion::new(policy.pre_shock);
    let post = LogRegion::new(policy.post_shock.unwrap_or(StoppingRegion::Empty));
    let sigma = market.sigma;
    let drift_step = (market.theta - market.alpha - 0.5 * sigma * sigma) * cfg.dt;
    let vol_step = sigma * cfg.dt.sqrt();
    let mut lx = cfg.x0.ln();
    let finish = |i: usize, lx: f64, annuitized: bool| {
        let t = i as f64 * cfg.dt;
        let health = if t >= xi { HealthState::High } else { HealthState::Low };
        PathState { t, wealth: lx.exp(), health, xi, annuitized }
    };
    // First grid index at or after the shock.
    let shock_step = if xi.is_finite() { (xi / cfg.dt).ceil().min(usize::MAX as f64) as usize } else { usize::MAX };
    let n = cfg.n_steps();
    for i in 0..=n {
        if i > 0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            lx += drift_step + vol_step * z;
        }
        let region = if i >= shock_step { post } else { pre };
        if region.contains(lx) {
            return finish(i, lx, true);
        }
    }
    finish(n, lx, false)
}

/// Summary statistics of a policy simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimStats {
    pub n_paths: usize,
    pub frac_annuitized_total: f64,
    /// Fraction annuitizing before the shock.
    pub frac_pre_shock: f64,
    /// Fraction annuitizing after the shock.
    pub frac_post_shock: f64,
    /// Mean annuitization time among annuitizing paths (yr).
    pub mean_time_to_annuitize: f64,
    pub se_frac_total: f64,
    pub se_frac_pre: f64,
    pub se_frac_post: f64,
    pub se_time: f64,
    /// Mean and standard error of the drawn shock times (infinite without a shock).
    pub mean_shock_time: f64,
    pub se_shock_time: f64,
}

fn binomial_se(p: f64, n: usize) -> f64 {
    if n > 1 {
        (p * (1.0 - p) / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    }
}

/// Simulates `cfg.n_paths` paths of the policy and aggregates them.
///
/// `mortality.lambda_l` drives the shock time; the mortality forces
/// themselves do not affect wealth paths.
pub fn simulate_policy(
    market: &MarketParams,
    mortality: &MortalityParams,
    policy: &Policy,
    cfg: &SimConfig,
) -> Result<SimStats> {
    cfg.validate()?;
    if policy.post_shock.is_some() && !(mortality.lambda_l > 0.0) {
        return Err(Error::Runtime("a shock policy needs lambda_l > 0".into()));
    }
    let paths: Vec<PathState> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(market, mortality.lambda_l, policy, cfg, i))
        .collect();
    Ok(aggregate(&paths))
}

/// Aggregates path outcomes (in path order, so the result is deterministic).
pub fn aggregate(paths: &[PathState]) -> SimStats {
    let n = paths.len();
    let (mut pre, mut post) = (0usize, 0usize);
    let mut times = Vec::new();
    let mut shock = KahanSum::default();
    let mut shock_sq = KahanSum::default();
    for p in paths {
        if p.annuitized {
            match p.health {
                HealthState::Low => pre += 1,
                HealthState::High => post += 1,
            }
            times.push(p.t);
        }
        shock.add(p.xi);
        shock_sq.add(p.xi * p.xi);
    }
    let nf = n as f64;
    let (frac_pre, frac_post) = (pre as f64 / nf, post as f64 / nf);
    let total = (pre + post) as f64 / nf;
    let (mean_time, se_time) = if times.is_empty() { (f64::NAN, f64::NAN) } else { mean_and_se(&times) };
    let (mean_shock_time, se_shock_time) = if shock.value().is_finite() {
        let m = shock.value() / nf;
        let var = if n > 1 { (shock_sq.value() / nf - m * m).max(0.0) * nf / (nf - 1.0) } else { 0.0 };
        (m, (var / nf).sqrt())
    } else {
        (f64::INFINITY, f64::NAN)
    };
    SimStats {
        n_paths: n,
        frac_annuitized_total: total,
        frac_pre_shock: frac_pre,
        frac_post_shock: frac_post,
        mean_time_to_annuitize: mean_time,
        se_frac_total: binomial_se(total, n),
        se_frac_pre: binomial_se(frac_pre, n),
        se_frac_post: binomial_se(frac_post, n),
        se_time,
        mean_shock_time,
        se_shock_time,
    }
}

/// Simulated remaining lifetime: shock time `xi ~ Exp(lambda_l)`, then death
/// at rate `mu_l` before `xi` and `mu_h` after it, each segment sampled by
/// inversion. Returns `(mean years, standard error)`.
pub fn life_expectancy(mortality: &MortalityParams, n_sims: usize, seed: u64) -> Result<(f64, f64)> {
    if n_sims == 0 {
        return Err(Error::Runtime("life expectancy needs at least one simulation".into()));
    }
    let (mu_l, mu_h, lambda) = (mortality.mu_l, mortality.mu_h(), mortality.lambda_l);
    let lifetimes: Vec<f64> = (0..n_sims as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            // -ln(1 - U) with U in [0, 1) is an exact unit exponential.
            let mut unit_exp = || -(1.0 - rng.gen::<f64>()).ln();
            let xi = unit_exp() / lambda;
            let first = unit_exp() / mu_l;
            if first < xi {
                first
            } else {
                xi + unit_exp() / mu_h
            }
        })
        .collect();
    Ok(mean_and_se(&lifetimes))
}
