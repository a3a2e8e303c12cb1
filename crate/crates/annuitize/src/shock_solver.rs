//! Pre-shock value function and stopping region under a one-shot mortality shock.
//!
//! After the shock the individual faces a constant force `mu_h`, so the
//! post-shock problem is solved by [`crate::constant_solver`]. Before the
//! shock the value function satisfies, on its continuation region,
//!
//! ```text
//! sigma^2/2 x^2 V'' + (theta - alpha) x V' - r_l V + (alpha + nu mu_l) x + lambda_l V_h(x) = 0,
//! ```
//!
//! with value matching and smooth pasting against `delta_l (x - K)` at the
//! free boundary. Writing `V = delta_l (x - K) + W`, the regime is decided by
//! the sign of `K`, the post-shock order of `delta_h` and `beta_h`, and the
//! sign of the attractiveness index `M_l`. Where the pre-shock boundary is
//! implicit, its position relative to the post-shock boundary selects one of
//! two candidate equations; both are solved and the self-consistent one kept.
//!
//! Every pre-shock piece is expressed as power terms, with coefficients
//! from the closed-form expressions below. Note the orientation of `W`. The
//! bracketed expressions `B(x)` built here solve the free-boundary equation
//! with the running reward entering with the opposite sign, so the value
//! function is `V = delta_l (x - K) - B(x)`. The threshold equations are
//! eliminants of value matching and smooth pasting and are sign-invariant.
//! The value-matching, smooth-pasting and ODE-residual tests pin this
//! orientation.

use serde::Serialize;

use crate::constant_solver::{solve_constant, ConstantRegime, ConstantSolution};
use crate::core_model::{DerivedCoefficients, ModelParams};
use crate::error::{Error, Result};
use crate::piecewise::{Piece, PiecewiseValueFunction, Term};
use crate::roots::{solve_in, RootReport};

/// The twelve pre-shock regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ShockRegime {
    /// `K < 0`, `delta_h >= beta_h`, `M_l <= 0`: annuitize immediately.
    P32i,
    /// `K < 0`, `delta_h >= beta_h`, `M_l > 0`: annuitize below `x1_l` (closed form).
    P32ii,
    /// `K < 0`, `delta_h < beta_h`, `M_l <= 0`: annuitize immediately.
    P33i,
    /// `K < 0`, `delta_h < beta_h`, `M_l > 0`, `x2_l > x2_h`.
    P33ii1,
    /// `K < 0`, `delta_h < beta_h`, `M_l > 0`, `x2_l <= x2_h`.
    P33ii2,
    /// `K > 0`, `delta_h <= beta_h`, `M_l < 0`: annuitize above `x3_l` (closed form).
    P34i,
    /// `K > 0`, `delta_h <= beta_h`, `M_l >= 0`: never annuitize.
    P34ii,
    /// `K > 0`, `delta_h > beta_h`, `M_l < 0`, `x4_l < x4_h`.
    P35i1,
    /// `K > 0`, `delta_h > beta_h`, `M_l < 0`, `x4_l >= x4_h`.
    P35i2,
    /// `K > 0`, `delta_h > beta_h`, `M_l >= 0`: never annuitize before the shock.
    P35ii,
    /// `K = 0`, `M_l <= 0`: annuitize immediately.
    P36stop,
    /// `K = 0`, `M_l > 0`: never annuitize before the shock.
    P36never,
}

impl ShockRegime {
    /// Every tag, in declaration order.
    pub const ALL: [ShockRegime; 12] = [
        Self::P32i,
        Self::P32ii,
        Self::P33i,
        Self::P33ii1,
        Self::P33ii2,
        Self::P34i,
        Self::P34ii,
        Self::P35i1,
        Self::P35i2,
        Self::P35ii,
        Self::P36stop,
        Self::P36never,
    ];

    /// Tag as printed in reports and CSV files.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::P32i => "P32i",
            Self::P32ii => "P32ii",
            Self::P33i => "P33i",
            Self::P33ii1 => "P33ii1",
            Self::P33ii2 => "P33ii2",
            Self::P34i => "P34i",
            Self::P34ii => "P34ii",
            Self::P35i1 => "P35i1",
            Self::P35i2 => "P35i2",
            Self::P35ii => "P35ii",
            Self::P36stop => "P36stop",
            Self::P36never => "P36never",
        }
    }

    /// True for the four regimes with an implicit threshold equation.
    pub fn has_implicit_threshold(&self) -> bool {
        matches!(self, Self::P33ii1 | Self::P33ii2 | Self::P35i1 | Self::P35i2)
    }
}

impl std::fmt::Display for ShockRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Result of classification before the threshold ordering is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// The regime is fully determined by coefficient signs.
    Resolved(ShockRegime),
    /// Stop-below with `delta_h < beta_h`: `P33ii1` or `P33ii2`, decided by ordering.
    StopBelowPendingOrder,
    /// Stop-above with `delta_h > beta_h`: `P35i1` or `P35i2`, decided by ordering.
    StopAbovePendingOrder,
}

/// Shape of a stopping region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StoppingRegion {
    /// `[0, inf)`.
    Everywhere,
    /// `[0, b]`.
    Below(f64),
    /// `[b, inf)`.
    Above(f64),
    /// `{0}` only.
    OnlyZero,
    /// Empty.
    Empty,
}

impl StoppingRegion {
    /// The boundary, if any.
    pub fn boundary(&self) -> Option<f64> {
        match *self {
            Self::Below(b) | Self::Above(b) => Some(b),
            _ => None,
        }
    }

    /// True if wealth `x` lies in the (closed) region.
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Self::Everywhere => true,
            Self::Below(b) => x <= b,
            Self::Above(b) => x >= b,
            Self::OnlyZero => x == 0.0,
            Self::Empty => false,
        }
    }

    /// Region of a constant-force solution.
    pub fn of_constant(regime: &ConstantRegime) -> Self {
        match *regime {
            ConstantRegime::StopEverywhere => Self::Everywhere,
            ConstantRegime::StopBelow { x2, .. } => Self::Below(x2),
            ConstantRegime::StopAbove { x4, .. } => Self::Above(x4),
            ConstantRegime::NeverStop => Self::Empty,
            ConstantRegime::StopOnlyAtZero => Self::OnlyZero,
        }
    }
}

/// Classifies the pre-shock regime from coefficient signs and `K`.
///
/// Ties follow the weak inequalities of the case table: `M_l = 0` routes to
/// immediate stopping when `K <= 0` and to never stopping when `K > 0`, and
/// `delta_h = beta_h` routes to the branch without a post-shock threshold.
pub fn classify(c: &DerivedCoefficients, k: f64) -> Classification {
    let (dh, bh, m) = (c.high.delta, c.high.beta, c.low.m);
    use Classification::*;
    use ShockRegime::*;
    if k < 0.0 {
        match (dh >= bh, m <= 0.0) {
            (true, true) => Resolved(P32i),
            (true, false) => Resolved(P32ii),
            (false, true) => Resolved(P33i),
            (false, false) => StopBelowPendingOrder,
        }
    } else if k > 0.0 {
        match (dh <= bh, m < 0.0) {
            (true, true) => Resolved(P34i),
            (true, false) => Resolved(P34ii),
            (false, true) => StopAbovePendingOrder,
            (false, false) => Resolved(P35ii),
        }
    } else if m <= 0.0 {
        Resolved(P36stop)
    } else {
        Resolved(P36never)
    }
}

/// Implicit threshold equation `F(x) = a x + b (x/s)^p + c` on an admissible
/// interval, where `s` is the post-shock threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdEquation {
    pub regime: ShockRegime,
    pub linear: f64,
    pub power_coef: f64,
    pub power: f64,
    pub power_scale: f64,
    pub constant: f64,
    /// Wealth interval in which a root is consistent with the regime's ordering.
    pub domain: (f64, f64),
}

impl ThresholdEquation {
    /// Residual `F(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.linear * x + self.power_coef * (x / self.power_scale).powf(self.power) + self.constant
    }
}

/// Auxiliary quantities that feed the pre-shock closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Aux {
    /// `theta - alpha - r_l` (negative).
    d: f64,
    /// `rho_hat + mu_hat`.
    price: f64,
    /// `r_l + alpha - theta` (positive).
    q: f64,
    gp: f64,
    gm: f64,
    gph: f64,
    gmh: f64,
    /// `Delta - lambda_l` (nonzero).
    dl_gap: f64,
    lambda: f64,
    r: f64,
    delta_l: f64,
    delta_h: f64,
    beta_h: f64,
    m_delta: f64,
    m_beta: f64,
    k: f64,
}

impl Aux {
    fn new(c: &DerivedCoefficients) -> Self {
        let p = &c.params;
        Self {
            d: c.drift() - c.low.r,
            price: c.price_rate(),
            q: c.low.r - c.drift(),
            gp: c.low.gamma_plus,
            gm: c.low.gamma_minus,
            gph: c.high.gamma_plus,
            gmh: c.high.gamma_minus,
            dl_gap: p.mortality.delta - p.mortality.lambda_l,
            lambda: p.mortality.lambda_l,
            r: c.low.r,
            delta_l: c.low.delta,
            delta_h: c.high.delta,
            beta_h: c.high.beta,
            m_delta: c.m_delta_full,
            m_beta: c.m_beta_full,
            k: c.k(),
        }
    }

    /// `zeta_h x_h^{gamma_h}` for the post-shock boundary `x_h`; smooth pasting
    /// makes it `(delta_h - beta_h) x_h / gamma_h` for either exponent.
    fn post_term_at_boundary(&self, xh: f64) -> f64 {
        let gamma = if self.k < 0.0 { self.gmh } else { self.gph };
        (self.delta_h - self.beta_h) * xh / gamma
    }

    /// `varpi^2_l`: coupling coefficient of the stop-below branch with `x_l <= x_h`.
    fn varpi2(&self) -> f64 {
        let (gm, gmh) = (self.gm, self.gmh);
        ((gm - 1.0) / self.d + gm * (gmh - 1.0) / (self.r * gmh) + (gmh - gm) / (gmh * self.dl_gap))
            * self.lambda
            * (self.delta_h - self.beta_h)
            / (self.gp - self.gm)
    }

    /// `pi^2_l`.
    fn pi2(&self) -> f64 {
        let gmh = self.gmh;
        (1.0 / self.r + gmh / (self.d * (gmh - 1.0)) - 1.0 / (self.dl_gap * (gmh - 1.0)))
            * self.lambda
            * self.delta_h
            * self.k
    }

    /// `varpi^4_l`: coupling coefficient of the stop-above branch with `x_l >= x_h`.
    fn varpi4(&self) -> f64 {
        let (gp, gph) = (self.gp, self.gph);
        ((1.0 - gp) / self.d - gp * (gph - 1.0) / (self.r * gph) + (gp - gph) / (gph * self.dl_gap))
            * self.lambda
            * (self.delta_h - self.beta_h)
            / (self.gp - self.gm)
    }

    /// `pi^4_l`.
    fn pi4(&self) -> f64 {
        let gph = self.gph;
        (1.0 / self.r + gph / (self.d * (gph - 1.0)) - 1.0 / (self.dl_gap * (gph - 1.0)))
            * self.lambda
            * self.delta_h
            * self.k
    }
}

/// Coefficients of the pre-shock closed forms, for introspection and reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ShockCoefficients {
    /// Pre-shock threshold, if any.
    pub x_l: Option<f64>,
    /// Post-shock threshold, if any.
    pub x_h: Option<f64>,
    /// Coefficient of the decreasing (stop-below) or increasing (stop-above)
    /// homogeneous power in the bracket adjacent to the pre-shock boundary.
    pub zeta: Option<f64>,
    /// `zeta-hat` of the branches whose boundaries straddle the post-shock one.
    pub zeta_hat: Option<f64>,
    pub varpi: Option<f64>,
    pub pi: Option<f64>,
    /// Number of sign changes seen while locating an implicit threshold.
    pub sign_changes: Option<usize>,
}

/// The three time-integral functions of the never-stop, stop-above regime,
/// in closed form. `b` is the post-shock threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaFunctions {
    pub b: f64,
    /// `r_l + alpha - theta`.
    pub q: f64,
    pub r: f64,
    pub gp: f64,
    pub gm: f64,
    pub gph: f64,
    /// `lambda_l - Delta`.
    pub lambda_minus_delta: f64,
    pub delta_h: f64,
    pub beta_h: f64,
}

impl AlphaFunctions {
    fn spread(&self) -> f64 {
        self.gp - self.gm
    }

    /// `int_0^inf e^{-qt} Phi(d1(t, x)) dt`, the discounted probability that
    /// the dividend-adjusted wealth is above `b`.
    pub fn i1(&self, x: f64) -> f64 {
        let ratio = self.b / x;
        if x >= self.b {
            (1.0 + (1.0 - self.gp) / self.spread() * ratio.powf(1.0 - self.gm)) / self.q
        } else {
            (1.0 - self.gm) / self.spread() * ratio.powf(1.0 - self.gp) / self.q
        }
    }

    /// `alpha_1(x) = beta_h / q + (delta_h - beta_h) I1(x)`.
    pub fn alpha1(&self, x: f64) -> f64 {
        self.beta_h / self.q + (self.delta_h - self.beta_h) * self.i1(x)
    }

    /// `alpha_2(x)`, the discounted expected `x^{gamma+_h}`-weight below `b`.
    pub fn alpha2(&self, x: f64) -> f64 {
        let lmd = self.lambda_minus_delta;
        if x >= self.b {
            (self.gp - self.gph) / (lmd * self.spread()) * (x / self.b).powf(self.gm - self.gph)
        } else {
            1.0 / lmd - (self.gph - self.gm) / (lmd * self.spread()) * (x / self.b).powf(self.gp - self.gph)
        }
    }

    /// `alpha_3(x) = int_0^inf e^{-r_l t} Phi(d2(t, x)) dt`.
    pub fn alpha3(&self, x: f64) -> f64 {
        let ratio = self.b / x;
        if x >= self.b {
            (1.0 - self.gp / self.spread() * ratio.powf(-self.gm)) / self.r
        } else {
            -self.gm / self.spread() * ratio.powf(-self.gp) / self.r
        }
    }

    /// Evaluates `alpha_which` for `which` in `1..=3`.
    pub fn alpha(&self, which: u8, x: f64) -> f64 {
        match which {
            1 => self.alpha1(x),
            2 => self.alpha2(x),
            _ => self.alpha3(x),
        }
    }
}

/// Paired pre- and post-shock solutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockSolution {
    pub coeffs: DerivedCoefficients,
    pub regime: ShockRegime,
    pub pre_shock: PiecewiseValueFunction,
    pub post_shock: ConstantSolution,
    pub stopping_region_l: StoppingRegion,
    pub stopping_region_h: StoppingRegion,
    pub details: ShockCoefficients,
    /// Present only in the never-stop, stop-above regime.
    pub alphas: Option<AlphaFunctions>,
}

impl ShockSolution {
    /// Value at wealth `x` in the given health state.
    pub fn eval(&self, x: f64, state: crate::core_model::HealthState) -> f64 {
        match state {
            crate::core_model::HealthState::Low => self.pre_shock.value(x),
            crate::core_model::HealthState::High => self.post_shock.eval(x),
        }
    }

    /// Pre-shock value rebuilt from the alpha functions (never-stop, stop-above regime only).
    pub fn eval_via_alphas(&self, x: f64) -> Option<f64> {
        let a = self.alphas?;
        let zb = (a.delta_h - a.beta_h) * a.b / a.gph;
        let lambda = self.coeffs.low.lambda;
        Some(
            self.coeffs.low.beta * x + lambda * x * a.alpha1(x) + lambda * zb * (x / a.b).powf(a.gph) * a.alpha2(x)
                - lambda * a.delta_h * self.coeffs.k() * a.alpha3(x),
        )
    }
}

/// Evaluates a shock solution; the post-shock state delegates to the constant solver.
pub fn eval_shock(sol: &ShockSolution, x: f64, state: crate::core_model::HealthState) -> f64 {
    sol.eval(x, state)
}

/// Builds the residual of the implicit threshold equation for `regime`.
///
/// Only the four regimes with an implicit pre-shock threshold have one; the
/// rest return `RegimeMismatch`.
pub fn threshold_equation(
    regime: ShockRegime,
    c: &DerivedCoefficients,
    post: &ConstantSolution,
) -> Result<ThresholdEquation> {
    let a = Aux::new(c);
    let mismatch = || Error::RegimeMismatch(format!("{regime} has no implicit threshold equation"));
    let Some(xh) = post.threshold() else {
        return Err(mismatch());
    };
    // zeta_h x_h^{gamma_h}, the post-shock homogeneous coefficient at its boundary.
    let zh = a.post_term_at_boundary(xh);
    let eq = |linear, power_coef, power, constant, domain| ThresholdEquation {
        regime,
        linear,
        power_coef,
        power,
        power_scale: xh,
        constant,
        domain,
    };
    match (regime, post.regime) {
        (ShockRegime::P33ii1, ConstantRegime::StopBelow { .. }) => Ok(eq(
            (a.gm - 1.0) * a.m_beta / (a.gm * a.d),
            a.lambda * zh * (a.gm - a.gmh) / (a.gm * a.dl_gap),
            a.gmh,
            -a.delta_l * a.k,
            (xh, f64::INFINITY),
        )),
        (ShockRegime::P33ii2, ConstantRegime::StopBelow { .. }) => Ok(eq(
            (a.gm - 1.0) / a.gm * a.m_delta / a.d,
            (a.gm - a.gp) / a.gm * a.varpi2() * xh,
            a.gp,
            -a.price * a.k / a.r,
            (0.0, xh),
        )),
        (ShockRegime::P35i1, ConstantRegime::StopAbove { .. }) => Ok(eq(
            a.m_beta * (a.gp - 1.0) / (a.gp * a.d),
            a.lambda * zh * (a.gp - a.gph) / (a.gp * a.dl_gap),
            a.gph,
            -a.delta_l * a.k,
            (0.0, xh),
        )),
        (ShockRegime::P35i2, ConstantRegime::StopAbove { .. }) => Ok(eq(
            (a.gp - 1.0) / a.gp * a.m_delta / a.d,
            (a.gp - a.gm) / a.gp * a.varpi4() * xh,
            a.gm,
            -a.price * a.k / a.r,
            (xh, f64::INFINITY),
        )),
        _ => Err(mismatch()),
    }
}

/// Relative width of the scan beyond a finite domain end (towards 0 or infinity).
const SCAN_DECADES: f64 = 12.0;

/// Locates a root of `eq` inside its admissible domain.
fn locate(eq: &ThresholdEquation) -> Result<RootReport> {
    let (lo, hi) = eq.domain;
    let (lo, hi) = match (lo > 0.0, hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo * 10f64.powf(SCAN_DECADES)),
        (false, true) => (hi * 10f64.powf(-SCAN_DECADES), hi),
        (false, false) => unreachable!("threshold domains have a finite end"),
    };
    let report = solve_in(|x| eq.eval(x), lo, hi)?;
    if report.sign_changes > 1 {
        return Err(Error::MultipleRoots {
            what: format!("{} threshold equation", eq.regime),
            count: report.sign_changes,
            first: report.root,
        });
    }
    Ok(report)
}

/// Solves both ordering branches and keeps the self-consistent one.
fn select_branch(
    c: &DerivedCoefficients,
    post: &ConstantSolution,
    first: ShockRegime,
    second: ShockRegime,
) -> Result<(ShockRegime, RootReport)> {
    let solve = |regime| -> Result<Option<RootReport>> {
        let eq = threshold_equation(regime, c, post)?;
        match locate(&eq) {
            Ok(r) => Ok(Some(r)),
            Err(Error::NoBracket(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let x_h = post.threshold().expect("post-shock threshold exists");
    match (solve(first)?, solve(second)?) {
        (Some(a), None) => Ok((first, a)),
        (None, Some(b)) => Ok((second, b)),
        // A root exactly at the post-shock threshold satisfies both equations;
        // the weak-inequality branch owns it.
        (Some(a), Some(b)) if (a.root - b.root).abs() <= 1e-9 * x_h => {
            let weak = if first == ShockRegime::P33ii1 { second } else { first };
            Ok((weak, if weak == first { a } else { b }))
        }
        (Some(a), Some(b)) => Err(Error::BranchInconsistency(format!(
            "both orderings consistent: {first} root {}, {second} root {} (post-shock threshold {x_h})",
            a.root, b.root
        ))),
        (None, None) => Err(Error::BranchInconsistency(format!(
            "neither ordering consistent for {first}/{second} (post-shock threshold {x_h})"
        ))),
    }
}

/// `V = delta_l (x - K) - B(x)` as power terms, given the bracket `B`.
fn below_payoff(delta_l: f64, k: f64, bracket: &[Term]) -> Piece {
    let mut terms = vec![Term::new(delta_l, 1.0), Term::new(-delta_l * k, 0.0)];
    terms.extend(bracket.iter().map(|t| Term::scaled(-t.coef, t.power, t.scale)));
    Piece::new(merge(terms), false)
}

/// Combines terms with equal powers and drops zeros.
fn merge(terms: Vec<Term>) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        if let Some(existing) = out.iter_mut().find(|e| e.power == t.power && e.scale == t.scale) {
            existing.coef += t.coef;
        } else {
            out.push(t);
        }
    }
    out.retain(|t| t.coef != 0.0);
    out
}

/// Solves the full shock problem.
pub fn solve_shock(params: &ModelParams) -> Result<ShockSolution> {
    let c = params.derive()?;
    let post = solve_constant(params, c.high.mu)?;
    let a = Aux::new(&c);
    let k = a.k;
    let dl = a.delta_l;
    let payoff = Piece::payoff(dl, k);
    let mut details = ShockCoefficients { x_h: post.threshold(), ..Default::default() };
    let mut alphas = None;
    let (gm, gp) = (a.gm, a.gp);

    let (regime, pre, region) = match classify(&c, k) {
        Classification::Resolved(regime @ (ShockRegime::P32i | ShockRegime::P33i | ShockRegime::P36stop)) => {
            (regime, PiecewiseValueFunction::single(payoff, dl, k), StoppingRegion::Everywhere)
        }
        Classification::Resolved(ShockRegime::P32ii) => {
            let md = a.m_delta;
            let x1 = gm * a.price * a.d * k / ((gm - 1.0) * a.r * md);
            // zeta^1_l (x^1_l)^{gamma-_l}, from smooth pasting.
            let z1 = -md * x1 / (gm * a.d);
            details.x_l = Some(x1);
            details.zeta = Some(-(a.price * k / ((gm - 1.0) * a.r)).powf(1.0 - gm) * (gm * a.d / md).powf(-gm));
            let bracket = [Term::scaled(z1, gm, x1), Term::new(md / a.d, 1.0), Term::new(-a.price * k / a.r, 0.0)];
            let v =
                PiecewiseValueFunction::new(vec![x1], vec![true], vec![payoff, below_payoff(dl, k, &bracket)], dl, k);
            (ShockRegime::P32ii, v, StoppingRegion::Below(x1))
        }
        Classification::StopBelowPendingOrder => {
            let xh = post.threshold().expect("delta_h < beta_h with K < 0 stops below after the shock");
            let zh = a.post_term_at_boundary(xh);
            let (regime, root) = select_branch(&c, &post, ShockRegime::P33ii1, ShockRegime::P33ii2)?;
            let xl = root.root;
            details.x_l = Some(xl);
            details.sign_changes = Some(root.sign_changes);
            let gmh = a.gmh;
            let shock_term = Term::scaled(a.lambda * zh / a.dl_gap, gmh, xh);
            if regime == ShockRegime::P33ii1 {
                let mb = a.m_beta;
                // zeta^2_l (x^2_l)^{gamma-_l}
                let z = -mb * xl / (gm * a.d) - gmh * a.lambda * zh / (gm * a.dl_gap) * (xl / xh).powf(gmh);
                details.zeta = Some(z * xl.powf(-gm));
                let bracket = [Term::scaled(z, gm, xl), Term::new(-dl * k, 0.0), Term::new(mb / a.d, 1.0), shock_term];
                let v = PiecewiseValueFunction::new(
                    vec![xl],
                    vec![true],
                    vec![payoff, below_payoff(dl, k, &bracket)],
                    dl,
                    k,
                );
                (regime, v, StoppingRegion::Below(xl))
            } else {
                let (varpi, pi, md) = (a.varpi2(), a.pi2(), a.m_delta);
                // zeta-hat^2_l (x^2_l)^{gamma-_l}
                let zhat = -gp / gm * varpi * xh * (xl / xh).powf(gp) - md * xl / (gm * a.d);
                details.zeta_hat = Some(zhat * xl.powf(-gm));
                details.varpi = Some(varpi);
                details.pi = Some(pi);
                let inner = [
                    Term::scaled(varpi * xh, gp, xh),
                    Term::scaled(zhat, gm, xl),
                    Term::new(md / a.d, 1.0),
                    Term::new(-a.price * k / a.r, 0.0),
                ];
                let outer = [
                    Term::scaled(varpi * xh + pi, gm, xh),
                    Term::scaled(zhat, gm, xl),
                    Term::new(-dl * k, 0.0),
                    Term::new(a.m_beta / a.d, 1.0),
                    shock_term,
                ];
                // At the tie x_l = x_h the middle interval is empty.
                let v = if xl < xh {
                    PiecewiseValueFunction::new(
                        vec![xl, xh],
                        vec![true, true],
                        vec![payoff, below_payoff(dl, k, &inner), below_payoff(dl, k, &outer)],
                        dl,
                        k,
                    )
                } else {
                    PiecewiseValueFunction::new(vec![xl], vec![true], vec![payoff, below_payoff(dl, k, &outer)], dl, k)
                };
                (regime, v, StoppingRegion::Below(xl))
            }
        }
        Classification::Resolved(ShockRegime::P34i) => {
            let mb = a.m_beta;
            let x3 = gp * a.d * dl * k / ((gp - 1.0) * mb);
            // zeta^3_l (x^3_l)^{gamma+_l}
            let z3 = -mb * x3 / (gp * a.d);
            details.x_l = Some(x3);
            details.zeta = Some(-(dl * k / (gp - 1.0)).powf(1.0 - gp) * (gp * a.d / mb).powf(-gp));
            let bracket = [Term::scaled(z3, gp, x3), Term::new(mb / a.d, 1.0), Term::new(-dl * k, 0.0)];
            let v =
                PiecewiseValueFunction::new(vec![x3], vec![false], vec![below_payoff(dl, k, &bracket), payoff], dl, k);
            (ShockRegime::P34i, v, StoppingRegion::Above(x3))
        }
        Classification::Resolved(regime @ (ShockRegime::P34ii | ShockRegime::P36never)) => {
            let (m, region) = if regime == ShockRegime::P34ii {
                (a.m_beta, StoppingRegion::Empty)
            } else {
                (c.low.m, StoppingRegion::OnlyZero)
            };
            let piece = Piece::new(vec![Term::new(dl + m / a.q, 1.0)], false);
            (regime, PiecewiseValueFunction::single(piece, dl, k), region)
        }
        Classification::StopAbovePendingOrder => {
            let xh = post.threshold().expect("delta_h > beta_h with K > 0 stops above after the shock");
            let zh = a.post_term_at_boundary(xh);
            let (regime, root) = select_branch(&c, &post, ShockRegime::P35i1, ShockRegime::P35i2)?;
            let xl = root.root;
            details.x_l = Some(xl);
            details.sign_changes = Some(root.sign_changes);
            let gph = a.gph;
            let shock_term = Term::scaled(a.lambda * zh / a.dl_gap, gph, xh);
            if regime == ShockRegime::P35i1 {
                let mb = a.m_beta;
                // zeta^4_l (x^4_l)^{gamma+_l}
                let z = -mb * xl / (gp * a.d) - a.lambda * zh * gph / (gp * a.dl_gap) * (xl / xh).powf(gph);
                details.zeta = Some(z * xl.powf(-gp));
                let bracket = [Term::scaled(z, gp, xl), Term::new(-dl * k, 0.0), Term::new(mb / a.d, 1.0), shock_term];
                let v = PiecewiseValueFunction::new(
                    vec![xl],
                    vec![false],
                    vec![below_payoff(dl, k, &bracket), payoff],
                    dl,
                    k,
                );
                (regime, v, StoppingRegion::Above(xl))
            } else {
                let (varpi, pi, md) = (a.varpi4(), a.pi4(), a.m_delta);
                // zeta-hat^4_l (x^4_l)^{gamma+_l}
                let zhat = -gm / gp * varpi * xh * (xl / xh).powf(gm) - md * xl / (gp * a.d);
                details.zeta_hat = Some(zhat * xl.powf(-gp));
                details.varpi = Some(varpi);
                details.pi = Some(pi);
                let lower = [
                    Term::scaled(zhat, gp, xl),
                    Term::scaled(varpi * xh + pi, gp, xh),
                    Term::new(-dl * k, 0.0),
                    Term::new(a.m_beta / a.d, 1.0),
                    shock_term,
                ];
                let middle = [
                    Term::scaled(zhat, gp, xl),
                    Term::scaled(varpi * xh, gm, xh),
                    Term::new(md / a.d, 1.0),
                    Term::new(-a.price * k / a.r, 0.0),
                ];
                // At the tie x_l = x_h the middle interval is empty.
                let v = if xh < xl {
                    PiecewiseValueFunction::new(
                        vec![xh, xl],
                        vec![true, false],
                        vec![below_payoff(dl, k, &lower), below_payoff(dl, k, &middle), payoff],
                        dl,
                        k,
                    )
                } else {
                    PiecewiseValueFunction::new(vec![xl], vec![false], vec![below_payoff(dl, k, &lower), payoff], dl, k)
                };
                (regime, v, StoppingRegion::Above(xl))
            }
        }
        Classification::Resolved(ShockRegime::P35ii) => {
            let xh = post.threshold().expect("delta_h > beta_h with K > 0 stops above after the shock");
            let al = AlphaFunctions {
                b: xh,
                q: a.q,
                r: a.r,
                gp: a.gp,
                gm: a.gm,
                gph: a.gph,
                lambda_minus_delta: -a.dl_gap,
                delta_h: a.delta_h,
                beta_h: a.beta_h,
            };
            alphas = Some(al);
            let v = never_stop_above_pieces(&c, &al, a.post_term_at_boundary(xh));
            (ShockRegime::P35ii, v, StoppingRegion::Empty)
        }
        Classification::Resolved(other) => unreachable!("classification never resolves to {other}"),
    };

    Ok(ShockSolution {
        coeffs: c,
        regime,
        pre_shock: pre,
        stopping_region_h: StoppingRegion::of_constant(&post.regime),
        post_shock: post,
        stopping_region_l: region,
        details,
        alphas,
    })
}

/// Expands `beta_l x + lambda x alpha_1 + lambda zeta_h x^{g+_h} alpha_2 - lambda delta_h K alpha_3`
/// into power terms on either side of the post-shock threshold `b`.
/// `zb` is `zeta_h b^{g+_h}`.
fn never_stop_above_pieces(c: &DerivedCoefficients, al: &AlphaFunctions, zb: f64) -> PiecewiseValueFunction {
    let lambda = c.low.lambda;
    let (b, q, r, gp, gm, gph) = (al.b, al.q, al.r, al.gp, al.gm, al.gph);
    let (dh, bh, k) = (al.delta_h, al.beta_h, c.k());
    let s = gp - gm;
    let lmd = al.lambda_minus_delta;
    let upper = vec![
        Term::new(c.low.beta + lambda * dh / q, 1.0),
        Term::new(-lambda * dh * k / r, 0.0),
        Term::scaled(
            lambda * (dh - bh) * (1.0 - gp) / (q * s) * b
                + lambda * zb * (gp - gph) / (lmd * s)
                + lambda * dh * k * gp / (r * s),
            gm,
            b,
        ),
    ];
    let lower = vec![
        Term::new(c.low.beta + lambda * bh / q, 1.0),
        Term::scaled(lambda * zb / lmd, gph, b),
        Term::scaled(
            lambda * (dh - bh) * (1.0 - gm) / (q * s) * b - lambda * zb * (gph - gm) / (lmd * s)
                + lambda * dh * k * gm / (r * s),
            gp,
            b,
        ),
    ];
    PiecewiseValueFunction::new(
        vec![b],
        vec![false],
        vec![Piece::new(lower, false), Piece::new(upper, false)],
        c.low.delta,
        k,
    )
}
