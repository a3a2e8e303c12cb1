//! Independent numerical cross-checks for the closed forms.
//!
//! * [`survival_expectation`] and [`moneys_worth_quadrature`] recompute the
//!   money's worth by integrating the discounted survival curve.
//! * [`alpha_quadrature`] integrates the time-integral definitions of the
//!   three functions used by the never-stop, stop-above regime.
//! * [`mc_value_oracle`] values a threshold policy by simulating wealth
//!   with exact log-normal increments.
//! * [`ode_residual`], [`pasting_report`] and [`dominance_gap`] check the
//!   free-boundary conditions from analytic per-piece derivatives.
//! * [`run_suite`] bundles everything into pass/fail checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::constant_solver::{solve_constant, ConstantSolution};
use crate::core_model::{HealthState, MarketParams, ModelParams, MortalityParams};
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseValueFunction;
use crate::quadrature::{integrate_half_line, QuadratureConfig};
use crate::shock_solver::{solve_shock, ShockRegime, ShockSolution, StoppingRegion};

/// Probability-weighted survival `E[exp(-int_0^u mu_s ds)]` starting in `state`.
///
/// Before the shock the force is `mu_l` until an exponential time with rate
/// `lambda_l`, then `mu_h`. Requires `delta != lambda_l` (the model's guard).
pub fn survival_expectation(mortality: &MortalityParams, u: f64, state: HealthState) -> f64 {
    let mu_h = mortality.mu_h();
    match state {
        HealthState::High => (-mu_h * u).exp(),
        HealthState::Low => {
            let (d, l) = (mortality.delta, mortality.lambda_l);
            (d * (-(mortality.mu_l + l) * u).exp() - l * (-mu_h * u).exp()) / (d - l)
        }
    }
}

/// Money's worth by quadrature: `(rho_hat + mu_hat) int_0^inf e^{-rho u} S(u) du`.
pub fn moneys_worth_quadrature(params: &ModelParams, state: HealthState) -> Result<f64> {
    let m = &params.mortality;
    let rho = params.prefs.rho;
    let slowest = match state {
        HealthState::High => m.mu_h(),
        HealthState::Low => (m.mu_l + m.lambda_l).min(m.mu_h()),
    };
    let decay = rho + slowest;
    let cfg = QuadratureConfig::for_decay_rate(decay);
    let r = integrate_half_line(|u| (-rho * u).exp() * survival_expectation(m, u, state), decay, &[], &cfg)?;
    Ok((params.pricing.rho_hat + params.pricing.mu_hat) * r.value)
}

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    thread_local! {
        static N: Normal = Normal::new(0.0, 1.0).expect("unit normal");
    }
    N.with(|n| n.cdf(z))
}

/// The time-integral definition of `alpha_which(x)` (`which` in `1..=3`),
/// integrated numerically. Only the never-stop, stop-above regime has
/// these functions; other regimes return `RegimeMismatch`.
///
/// With `b` the post-shock threshold and
/// `d1,2(x, t) = (ln(x/b) + (theta - alpha +- sigma^2/2) t) / (sigma sqrt t)`:
///
/// * `alpha_1 = int e^{-(r_l + alpha - theta) t} [beta_h Phi(-d1) + delta_h Phi(d1)] dt`
/// * `alpha_2 = int e^{(Delta - lambda_l) t} Phi(-d2 - sigma gamma+_h sqrt t) dt`
/// * `alpha_3 = int e^{-r_l t} Phi(d2) dt`
pub fn alpha_quadrature(params: &ModelParams, sol: &ShockSolution, x: f64, which: u8) -> Result<f64> {
    if sol.regime != ShockRegime::P35ii {
        return Err(Error::RegimeMismatch(format!("alpha functions exist only in P35ii, not {}", sol.regime)));
    }
    if !(x > 0.0) || !(1..=3).contains(&which) {
        return Err(Error::Runtime(format!("alpha_quadrature: need x > 0 and which in 1..=3 (got {x}, {which})")));
    }
    let c = &sol.coeffs;
    let b = sol.post_shock.threshold().expect("P35ii has a post-shock threshold");
    let market = &params.market;
    let sigma = market.sigma;
    let drift = market.theta - market.alpha;
    let s2h = 0.5 * sigma * sigma;
    let ln = (x / b).ln();
    let d1 = move |t: f64| (ln + (drift + s2h) * t) / (sigma * t.sqrt());
    let d2 = move |t: f64| (ln + (drift - s2h) * t) / (sigma * t.sqrt());
    let (q, r_l) = (c.low.r + market.alpha - market.theta, c.low.r);
    let (delta_h, beta_h, gph) = (c.high.delta, c.high.beta, c.high.gamma_plus);
    let growth = params.mortality.delta - params.mortality.lambda_l;

    // Times where the normal arguments change sign, plus a geometric ladder,
    // help the adaptive rule resolve the early transition layer.
    let mut breaks: Vec<f64> = (-6..=3).map(|e| 10f64.powi(e)).collect();
    for speed in [drift + s2h, drift - s2h, drift - s2h + sigma * sigma * gph] {
        let t = -ln / speed;
        if t.is_finite() && t > 0.0 {
            breaks.push(t);
        }
    }
    // Purely relative tolerance: far above the threshold alpha_2 is tiny.
    let cfg = |rate: f64| QuadratureConfig { abs_tol: 0.0, ..QuadratureConfig::for_decay_rate(rate) };
    let value = match which {
        1 => {
            let f = |t: f64| {
                if t == 0.0 {
                    return if x >= b { delta_h } else { beta_h };
                }
                let d = d1(t);
                (-q * t).exp() * (beta_h * phi(-d) + delta_h * phi(d))
            };
            integrate_half_line(f, q, &breaks, &cfg(q))?
        }
        2 => {
            // The normal factor decays like exp(-kappa^2 t / 2).
            let kappa = (drift - s2h) / sigma + sigma * gph;
            let decay = -growth + 0.5 * kappa * kappa;
            let f = |t: f64| {
                if t == 0.0 {
                    return if x < b { 1.0 } else { 0.0 };
                }
                (growth * t).exp() * phi(-d2(t) - sigma * gph * t.sqrt())
            };
            integrate_half_line(f, decay, &breaks, &cfg(decay))?
        }
        _ => {
            let f = |t: f64| {
                if t == 0.0 {
                    return if x >= b { 1.0 } else { 0.0 };
                }
                (-r_l * t).exp() * phi(d2(t))
            };
            integrate_half_line(f, r_l, &breaks, &cfg(r_l))?
        }
    };
    Ok(value.value)
}

/// Settings of the Monte Carlo policy-valuation oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOracleConfig {
    pub n_paths: usize,
    /// Monitoring step (yr).
    pub dt: f64,
    /// Truncation horizon (yr).
    pub horizon: f64,
    pub seed: u64,
}

impl McOracleConfig {
    /// Minimum number of paths for a meaningful standard error.
    pub const MIN_PATHS: usize = 10_000;

    /// Daily monitoring with a horizon after which the discounted value of
    /// the remaining fund is below `e^{-11.5}` of its starting level.
    pub fn for_problem(problem: &ValuationProblem, n_paths: usize, seed: u64) -> Self {
        let q = problem.r - problem.market.theta + problem.market.alpha;
        Self { n_paths, dt: 1.0 / 252.0, horizon: 11.5 / q, seed }
    }

    /// Checks `n_paths >= 10^4`, `0 < dt <= 1/252` and `horizon >= dt`.
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < Self::MIN_PATHS {
            return Err(Error::Runtime(format!("mc oracle: n_paths must be at least {}", Self::MIN_PATHS)));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0 / 252.0 + 1e-15 && self.horizon >= self.dt) {
            return Err(Error::Runtime("mc oracle: need 0 < dt <= 1/252 and horizon >= dt".into()));
        }
        Ok(())
    }
}

/// The discounted objective valued by [`mc_value_oracle`]:
/// `int_0^tau e^{-r t} [a X_t + lambda V_h(X_t)] dt + e^{-r tau} delta (X_tau - K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValuationProblem {
    pub market: MarketParams,
    /// Effective discount rate (including the shock intensity before the shock).
    pub r: f64,
    /// Running consumption-plus-bequest rate `alpha + nu mu`.
    pub running_rate: f64,
    /// Shock intensity; zero for a constant force.
    pub lambda: f64,
    /// Money's worth in the valued state.
    pub delta: f64,
    pub k: f64,
    /// Post-shock value function, present when `lambda > 0`.
    pub post_shock: Option<ConstantSolution>,
}

impl ValuationProblem {
    /// Constant mortality force `mu` (no shock).
    pub fn constant(params: &ModelParams, mu: f64) -> Result<Self> {
        let sol = solve_constant(params, mu)?;
        Ok(Self {
            market: params.market,
            r: sol.coeffs.r,
            running_rate: params.market.alpha + params.prefs.nu * mu,
            lambda: 0.0,
            delta: sol.coeffs.delta,
            k: params.pricing.k,
            post_shock: None,
        })
    }

    /// Pre-shock state, with the post-shock value as a running reward.
    pub fn pre_shock(params: &ModelParams) -> Result<Self> {
        let c = params.derive()?;
        Ok(Self {
            market: params.market,
            r: c.low.r,
            running_rate: params.market.alpha + params.prefs.nu * c.low.mu,
            lambda: c.low.lambda,
            delta: c.low.delta,
            k: params.pricing.k,
            post_shock: Some(solve_constant(params, c.high.mu)?),
        })
    }

    fn running(&self, x: f64) -> f64 {
        let shock = match &self.post_shock {
            Some(v) if self.lambda > 0.0 => self.lambda * v.eval(x),
            _ => 0.0,
        };
        self.running_rate * x + shock
    }
}

/// Kahan–compensated accumulator, so reductions are accurate and ordered.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut s = KahanSum::default();
    samples.iter().for_each(|&v| s.add(v));
    let mean = s.value() / n;
    let mut ss = KahanSum::default();
    samples.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    let var = if samples.len() > 1 { ss.value() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// The per-path random stream: path `i` is identical under any thread count.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Monte Carlo value of the policy "annuitize on first entry into `policy`".
///
/// Wealth moves by exact log-normal steps; the stopping rule is checked at
/// grid times; the running reward is integrated by the trapezoid rule.
/// Returns `(estimate, standard error)`. If `x0` is already in the stopping
/// region the value `delta (x0 - K)` is returned exactly with zero error.
pub fn mc_value_oracle(
    problem: &ValuationProblem,
    policy: StoppingRegion,
    x0: f64,
    cfg: &McOracleConfig,
) -> Result<(f64, f64)> {
    if policy.contains(x0) {
        return Ok((problem.delta * (x0 - problem.k), 0.0));
    }
    cfg.validate()?;
    let m = &problem.market;
    let sigma = m.sigma;
    let drift_step = (m.theta - m.alpha - 0.5 * sigma * sigma) * cfg.dt;
    let vol_step = sigma * cfg.dt.sqrt();
    let disc_step = (-problem.r * cfg.dt).exp();
    let n_steps = (cfg.horizon / cfg.dt).ceil() as usize;
    let half_dt = 0.5 * cfg.dt;
    let lx0 = x0.ln();
    let g0 = problem.running(x0);

    let values: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut rng = path_rng(cfg.seed, path);
            let (mut lx, mut disc, mut g_prev) = (lx0, 1.0, g0);
            let mut acc = 0.0;
            for _ in 0..n_steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                lx += drift_step + vol_step * z;
                let x = lx.exp();
                disc *= disc_step;
                let g = disc * problem.running(x);
                acc += half_dt * (g_prev + g);
                g_prev = g;
                if policy.contains(x) {
                    return acc + disc * problem.delta * (x - problem.k);
                }
            }
            acc
        })
        .collect();
    Ok(mean_and_se(&values))
}

/// Maximum ODE residuals over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `max |residual|`.
    pub max_abs: f64,
    /// `max |residual| / (1 + |V|)`.
    pub max_scaled: f64,
    /// Grid point attaining `max_scaled`.
    pub worst_x: f64,
}

/// Relative margin that grid points must keep from breakpoints.
pub const BREAKPOINT_MARGIN: f64 = 1e-6;

/// Residual `s2/2 x^2 V'' + (theta - alpha) x V' - r V - source(x)` over `grid`,
/// from the analytic derivatives of the piece owning each point.
///
/// Fails with `GridTouchesBreakpoint` if a point lies within
/// `1e-6 x` of a breakpoint, where one-sided derivatives disagree.
pub fn ode_residual(
    vf: &PiecewiseValueFunction,
    market: &MarketParams,
    r: f64,
    source: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<ResidualReport> {
    let half_s2 = 0.5 * market.sigma * market.sigma;
    let drift = market.theta - market.alpha;
    let mut report = ResidualReport { max_abs: 0.0, max_scaled: 0.0, worst_x: f64::NAN };
    for &x in grid {
        if let Some(&b) = vf.breakpoints.iter().find(|&&b| (x - b).abs() <= BREAKPOINT_MARGIN * x) {
            return Err(Error::GridTouchesBreakpoint { x, breakpoint: b });
        }
        let piece = vf.piece_at(x);
        let v = piece.value(x);
        let res = half_s2 * x * x * piece.d2(x) + drift * x * piece.d1(x) - r * v - source(x);
        let scaled = res.abs() / (1.0 + v.abs());
        report.max_abs = report.max_abs.max(res.abs());
        if !(scaled <= report.max_scaled) {
            report.max_scaled = scaled;
            report.worst_x = x;
        }
    }
    Ok(report)
}

/// `n` log-spaced points in the continuation region of `vf` within
/// `[lo, hi]`, kept clear of every breakpoint.
pub fn continuation_grid(vf: &PiecewiseValueFunction, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let pad = 1e-4;
    let mut edges = vec![lo];
    edges.extend(vf.breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    edges.push(hi);
    let intervals: Vec<(f64, f64)> = edges
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|&(a, b)| !vf.is_stopping((a * b).sqrt()))
        .map(|(a, b)| (a * (1.0 + pad), b * (1.0 - pad)))
        .filter(|&(a, b)| a < b)
        .collect();
    let total: f64 = intervals.iter().map(|(a, b)| (b / a).ln()).sum();
    if intervals.is_empty() || n == 0 {
        return vec![];
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = total * (i as f64 + 0.5) / n as f64;
        for &(a, b) in &intervals {
            let len = (b / a).ln();
            if s <= len {
                out.push(a * s.exp());
                break;
            }
            s -= len;
        }
    }
    out
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (n.max(2) - 1) as f64;
    (0..n).map(|i| lo * (step * i as f64).exp()).collect()
}

/// Value-matching and smooth-pasting gaps at one breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PastingReport {
    pub breakpoint: f64,
    /// `|V(b-) - V(b+)| / max(|V(b-)|, |V(b+)|)`.
    pub value_gap: f64,
    /// `|V'(b-) - V'(b+)| / max(|V'(b-)|, |V'(b+)|)`.
    pub slope_gap: f64,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Continuity of value and slope at every breakpoint of `vf`.
pub fn pasting_report(vf: &PiecewiseValueFunction) -> Vec<PastingReport> {
    (0..vf.breakpoints.len())
        .map(|i| {
            let (vl, vr) = vf.one_sided_values(i);
            let (sl, sr) = vf.one_sided_slopes(i);
            PastingReport { breakpoint: vf.breakpoints[i], value_gap: rel_gap(vl, vr), slope_gap: rel_gap(sl, sr) }
        })
        .collect()
}

/// Largest relative shortfall `max(payoff - V, 0) / (1 + |payoff|)` over `grid`.
pub fn dominance_gap(vf: &PiecewiseValueFunction, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&x| {
            let p = vf.payoff(x);
            ((p - vf.value(x)).max(0.0)) / (1.0 + p.abs())
        })
        .fold(0.0, f64::max)
}

/// Rebuilds the pre-shock value for a threshold policy with boundary `x`
/// instead of the optimal one.
///
/// The optimal continuation value is extended and a multiple of the
/// homogeneous solution that decays away from the stopping region is added
/// so that value matching holds at `x`. Smooth pasting then fails unless `x`
/// is the optimal threshold. Regimes without a pre-shock threshold return
/// `RegimeMismatch`.
pub fn policy_with_threshold(sol: &ShockSolution, x: f64) -> Result<PiecewiseValueFunction> {
    let opt = &sol.pre_shock;
    let c = &sol.coeffs;
    let (below, gamma) = match sol.stopping_region_l {
        StoppingRegion::Below(_) => (true, c.low.gamma_minus),
        StoppingRegion::Above(_) => (false, c.low.gamma_plus),
        _ => {
            return Err(Error::RegimeMismatch(format!("{} has no pre-shock threshold", sol.regime)));
        }
    };
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Runtime("threshold must be positive".into()));
    }
    let dl = c.low.delta;
    let k = c.k();
    // Continuation pieces in the optimal function, ordered by position.
    let cont: Vec<usize> = (0..opt.pieces.len()).filter(|&i| !opt.pieces[i].stopping).collect();
    let nearest = if below { cont[0] } else { *cont.last().expect("a continuation piece") };
    let piece_for = |i: usize| if opt.pieces[i].stopping { nearest } else { i };
    let homogeneous = |coef: f64| crate::piecewise::Term::scaled(coef, gamma, x);
    let base = opt.pieces[piece_for(opt.piece_index(x))].value(x);
    let coef = dl * (x - k) - base;
    let stop_piece = crate::piecewise::Piece::payoff(dl, k);
    let with_h = |i: usize| {
        let mut p = opt.pieces[piece_for(i)].clone();
        p.terms.push(homogeneous(coef));
        p.stopping = false;
        p
    };
    let inner: Vec<f64> = opt
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| if below { b > x } else { b < x })
        .filter(|&b| !sol.stopping_region_l.boundary().is_some_and(|s| s == b))
        .collect();
    let mut breakpoints = Vec::new();
    let mut closed_left = Vec::new();
    let mut pieces = Vec::new();
    if below {
        breakpoints.push(x);
        closed_left.push(true);
        pieces.push(stop_piece);
        // Interval (x, next) uses the piece owning its midpoint.
        let mut edges = vec![x];
        edges.extend(inner.iter().copied());
        for (j, &b) in inner.iter().enumerate() {
            let mid = 0.5 * (edges[j] + b);
            pieces.push(with_h(opt.piece_index(mid)));
            breakpoints.push(b);
            closed_left.push(opt.closed_left[opt.breakpoints.iter().position(|&o| o == b).unwrap()]);
        }
        let last = *edges.last().unwrap();
        pieces.push(with_h(opt.piece_index(last * 2.0)));
    } else {
        let mut edges: Vec<f64> = inner.clone();
        edges.push(x);
        let mut prev = 0.0;
        for (j, &b) in inner.iter().enumerate() {
            let mid = if j == 0 { 0.5 * b } else { 0.5 * (prev + b) };
            pieces.push(with_h(opt.piece_index(mid)));
            breakpoints.push(b);
            closed_left.push(opt.closed_left[opt.breakpoints.iter().position(|&o| o == b).unwrap()]);
            prev = b;
        }
        let mid = if inner.is_empty() { 0.5 * x } else { 0.5 * (prev + x) };
        pieces.push(with_h(opt.piece_index(mid)));
        breakpoints.push(x);
        closed_left.push(false);
        pieces.push(stop_piece);
    }
    Ok(PiecewiseValueFunction::new(breakpoints, closed_left, pieces, dl, k))
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// The measured residual or deviation.
    pub magnitude: f64,
    /// The pass threshold for `magnitude`.
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, magnitude: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: magnitude <= tolerance, magnitude, tolerance, detail: detail.into() }
    }
}

/// Options for [`run_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// Wealth levels for the Monte Carlo cross-check (empty to skip it).
    pub mc_points: Vec<f64>,
    pub mc_paths: usize,
    pub seed: u64,
    /// Replace the optimal pre-shock threshold with this one (fault injection).
    pub forced_threshold: Option<f64>,
    /// Points per residual grid.
    pub grid_points: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { mc_points: vec![100_000.0], mc_paths: 10_000, seed: 42, forced_threshold: None, grid_points: 200 }
    }
}

/// Tolerances of the suite.
pub mod tolerances {
    /// Closed-form versus quadrature money's worth (relative).
    pub const MONEYS_WORTH: f64 = 1e-8;
    /// Closed-form versus quadrature alpha functions (relative).
    pub const ALPHA: f64 = 1e-6;
    /// Value matching (relative).
    pub const VALUE_MATCHING: f64 = 1e-9;
    /// Smooth pasting (relative).
    pub const SMOOTH_PASTING: f64 = 1e-6;
    /// ODE residual, scaled by `1 + |V|`.
    pub const ODE: f64 = 1e-6;
    /// Dominance of the payoff, scaled by `1 + |payoff|`.
    pub const DOMINANCE: f64 = 1e-9;
    /// Monte Carlo deviation in standard errors.
    pub const MC_SIGMAS: f64 = 3.0;
}

/// Wealth scale used to place residual grids: the thresholds if any, else `|K|`.
pub fn wealth_scale(sol: &ShockSolution) -> f64 {
    [sol.details.x_l, sol.details.x_h].into_iter().flatten().fold(sol.coeffs.k().abs().max(1.0), f64::max)
}

/// Runs every applicable oracle against the shock solution of `params`.
pub fn run_suite(params: &ModelParams, opts: &SuiteOptions) -> Result<Vec<CheckOutcome>> {
    let sol = solve_shock(params)?;
    let c = &sol.coeffs;
    let mut out = Vec::new();

    for (state, closed) in [(HealthState::Low, c.low.delta), (HealthState::High, c.high.delta)] {
        let q = moneys_worth_quadrature(params, state)?;
        out.push(CheckOutcome::new(
            format!("moneys_worth_{state:?}").to_lowercase(),
            rel_gap(q, closed),
            tolerances::MONEYS_WORTH,
            format!("closed {closed} quadrature {q}"),
        ));
    }

    let pre = match opts.forced_threshold {
        Some(x) => policy_with_threshold(&sol, x)?,
        None => sol.pre_shock.clone(),
    };
    let scale = wealth_scale(&sol);
    let (lo, hi) = (1e-2 * scale, 1e2 * scale);

    if let Some(al) = sol.alphas {
        let mut worst: f64 = 0.0;
        for &x in &log_grid(al.b / 20.0, al.b * 20.0, 7) {
            for which in 1..=3u8 {
                let q = alpha_quadrature(params, &sol, x, which)?;
                worst = worst.max(rel_gap(q, al.alpha(which, x)));
            }
        }
        out.push(CheckOutcome::new("alpha_quadrature", worst, tolerances::ALPHA, "7 points x 3 functions"));
    }

    let market = &params.market;
    let post = &sol.post_shock;
    let source_l = |x: f64| -(market.alpha + params.prefs.nu * c.low.mu) * x - c.low.lambda * post.eval(x);
    let grid = continuation_grid(&pre, lo, hi, opts.grid_points);
    if !grid.is_empty() {
        let r = ode_residual(&pre, market, c.low.r, &source_l, &grid)?;
        out.push(CheckOutcome::new(
            "ode_residual_pre_shock",
            r.max_scaled,
            tolerances::ODE,
            format!("{} points, worst at x = {}", grid.len(), r.worst_x),
        ));
    }
    let source_h = |x: f64| -(market.alpha + params.prefs.nu * c.high.mu) * x;
    let grid_h = continuation_grid(&post.value, lo, hi, opts.grid_points);
    if !grid_h.is_empty() {
        let r = ode_residual(&post.value, market, c.high.r, &source_h, &grid_h)?;
        out.push(CheckOutcome::new(
            "ode_residual_post_shock",
            r.max_scaled,
            tolerances::ODE,
            format!("{} points, worst at x = {}", grid_h.len(), r.worst_x),
        ));
    }

    for (label, vf) in [("pre_shock", &pre), ("post_shock", &post.value)] {
        for p in pasting_report(vf) {
            out.push(CheckOutcome::new(
                format!("value_matching_{label}"),
                p.value_gap,
                tolerances::VALUE_MATCHING,
                format!("at x = {}", p.breakpoint),
            ));
            out.push(CheckOutcome::new(
                format!("smooth_pasting_{label}"),
                p.slope_gap,
                tolerances::SMOOTH_PASTING,
                format!("at x = {}", p.breakpoint),
            ));
        }
        let g = dominance_gap(vf, &log_grid(lo, hi, opts.grid_points));
        out.push(CheckOutcome::new(format!("dominance_{label}"), g, tolerances::DOMINANCE, "V >= payoff"));
    }

    if !opts.mc_points.is_empty() {
        let problem = ValuationProblem::pre_shock(params)?;
        let mc_cfg = McOracleConfig::for_problem(&problem, opts.mc_paths, opts.seed);
        let policy = match (opts.forced_threshold, sol.stopping_region_l) {
            (Some(x), StoppingRegion::Below(_)) => StoppingRegion::Below(x),
            (Some(x), StoppingRegion::Above(_)) => StoppingRegion::Above(x),
            (_, region) => region,
        };
        for &x0 in &opts.mc_points {
            let (est, se) = mc_value_oracle(&problem, policy, x0, &mc_cfg)?;
            let closed = pre.value(x0);
            let sigmas = if se > 0.0 { (est - closed).abs() / se } else { rel_gap(est, closed) * 1e12 };
            out.push(CheckOutcome::new(
                "mc_value",
                sigmas,
                tolerances::MC_SIGMAS,
                format!("x0 = {x0}: closed {closed}, mc {est} +- {se} (magnitude in standard errors)"),
            ));
        }
    }
    Ok(out)
}
