//! Closed-form value function for a constant mortality force.
//!
//! With no shock the problem is a perpetual optimal stopping problem for a
//! geometric Brownian motion. The stopping region is decided by the sign of
//! `K` and by whether the money's worth `delta` beats the fund index `beta`:
//!
//! | `K`   | order       | regime           | stopping region |
//! |-------|-------------|------------------|-----------------|
//! | `< 0` | `delta >= beta` | stop everywhere | `[0, inf)`      |
//! | `< 0` | `delta < beta`  | stop below      | `[0, x2]`       |
//! | `> 0` | `delta <= beta` | never stop      | empty           |
//! | `> 0` | `delta > beta`  | stop above      | `[x4, inf)`     |
//! | `= 0` | `delta < beta`  | stop only at 0  | `{0}`           |
//! | `= 0` | `delta >= beta` | stop everywhere | `[0, inf)`      |
//!
//! Ties `delta = beta` always land on a branch without a threshold, so the
//! threshold formulas never divide by zero.

use serde::Serialize;

use crate::core_model::{characteristic_exponents, constant_moneys_worth, fund_index, ModelParams};
use crate::error::{Error, Result};
use crate::piecewise::{Piece, PiecewiseValueFunction, Term};

/// Coefficients of the constant-force problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantCoefficients {
    pub mu: f64,
    /// Discount rate `rho + mu`.
    pub r: f64,
    pub beta: f64,
    pub delta: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
}

impl ConstantCoefficients {
    /// Coefficients for force `mu`; fails if wealth would grow faster than it is discounted.
    pub fn new(params: &ModelParams, mu: f64) -> Result<Self> {
        let m = &params.market;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::AssumptionViolation("mu > 0".into()));
        }
        if m.theta - m.alpha - params.prefs.rho - mu >= 0.0 {
            return Err(Error::AssumptionViolation("well-posedness".into()));
        }
        let r = params.prefs.rho + mu;
        let (gamma_plus, gamma_minus) = characteristic_exponents(m, r);
        Ok(Self {
            mu,
            r,
            beta: fund_index(params, r, mu),
            delta: constant_moneys_worth(&params.prefs, &params.pricing, mu),
            gamma_plus,
            gamma_minus,
        })
    }
}

/// Shape of the optimal stopping region for a constant force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConstantRegime {
    /// Annuitize immediately at every wealth level.
    StopEverywhere,
    /// Annuitize once wealth falls to `x2` or below.
    StopBelow { x2: f64, zeta2: f64 },
    /// Annuitize once wealth rises to `x4` or above.
    StopAbove { x4: f64, zeta4: f64 },
    /// Never annuitize.
    NeverStop,
    /// Annuitize only at zero wealth (where the payoff is zero anyway).
    StopOnlyAtZero,
}

impl ConstantRegime {
    /// Short machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::StopEverywhere => "StopEverywhere",
            Self::StopBelow { .. } => "StopBelow",
            Self::StopAbove { .. } => "StopAbove",
            Self::NeverStop => "NeverStop",
            Self::StopOnlyAtZero => "StopOnlyAtZero",
        }
    }

    /// The free boundary, if the regime has one.
    pub fn threshold(&self) -> Option<f64> {
        match *self {
            Self::StopBelow { x2, .. } => Some(x2),
            Self::StopAbove { x4, .. } => Some(x4),
            _ => None,
        }
    }
}

/// Solution of the constant-force problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantSolution {
    pub coeffs: ConstantCoefficients,
    pub k: f64,
    pub regime: ConstantRegime,
    pub value: PiecewiseValueFunction,
}

impl ConstantSolution {
    /// Value at wealth `x >= 0`.
    pub fn eval(&self, x: f64) -> f64 {
        self.value.value(x)
    }

    /// Stopping payoff `delta (x - K)`.
    pub fn payoff(&self, x: f64) -> f64 {
        self.value.payoff(x)
    }

    /// The free boundary, if any.
    pub fn threshold(&self) -> Option<f64> {
        self.regime.threshold()
    }
}

/// Threshold and coefficient for a one-sided stopping region with exponent `gamma`.
///
/// Value matching and smooth pasting of `beta x + zeta x^gamma` against
/// `delta (x - K)` give
/// `x* = delta K gamma / ((gamma - 1)(delta - beta))` and
/// `zeta = (delta K / (gamma - 1))^(1 - gamma) ((delta - beta) / gamma)^gamma`.
pub fn one_sided_boundary(delta: f64, beta: f64, k: f64, gamma: f64) -> (f64, f64) {
    let x = delta * k * gamma / ((gamma - 1.0) * (delta - beta));
    let zeta = (delta * k / (gamma - 1.0)).powf(1.0 - gamma) * ((delta - beta) / gamma).powf(gamma);
    (x, zeta)
}

/// The term `zeta x^gamma` written relative to its boundary `b`:
/// smooth pasting gives `zeta b^gamma = (delta - beta) b / gamma`.
pub fn pasted_term(delta: f64, beta: f64, b: f64, gamma: f64) -> Term {
    Term::scaled((delta - beta) * b / gamma, gamma, b)
}

/// Solves the constant-force problem for force `mu`.
pub fn solve_constant(params: &ModelParams, mu: f64) -> Result<ConstantSolution> {
    let c = ConstantCoefficients::new(params, mu)?;
    let k = params.pricing.k;
    let (delta, beta) = (c.delta, c.beta);
    let payoff = Piece::payoff(delta, k);
    let fund = |extra: Option<Term>| {
        let mut terms = vec![Term::new(beta, 1.0)];
        terms.extend(extra);
        Piece::new(terms, false)
    };

    let (regime, value) = if k < 0.0 {
        if delta >= beta {
            (ConstantRegime::StopEverywhere, PiecewiseValueFunction::single(payoff, delta, k))
        } else {
            let (x2, zeta2) = one_sided_boundary(delta, beta, k, c.gamma_minus);
            let cont = fund(Some(pasted_term(delta, beta, x2, c.gamma_minus)));
            let v = PiecewiseValueFunction::new(vec![x2], vec![true], vec![payoff, cont], delta, k);
            (ConstantRegime::StopBelow { x2, zeta2 }, v)
        }
    } else if k > 0.0 {
        if delta <= beta {
            (ConstantRegime::NeverStop, PiecewiseValueFunction::single(fund(None), delta, k))
        } else {
            let (x4, zeta4) = one_sided_boundary(delta, beta, k, c.gamma_plus);
            let cont = fund(Some(pasted_term(delta, beta, x4, c.gamma_plus)));
            let v = PiecewiseValueFunction::new(vec![x4], vec![false], vec![cont, payoff], delta, k);
            (ConstantRegime::StopAbove { x4, zeta4 }, v)
        }
    } else if delta < beta {
        (ConstantRegime::StopOnlyAtZero, PiecewiseValueFunction::single(fund(None), delta, k))
    } else {
        (ConstantRegime::StopEverywhere, PiecewiseValueFunction::single(payoff, delta, k))
    };
    Ok(ConstantSolution { coeffs: c, k, regime, value })
}

/// Evaluates a constant-force solution at `x`.
pub fn eval_constant(sol: &ConstantSolution, x: f64) -> f64 {
    sol.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_k(k: f64) -> ModelParams {
        let mut p = ModelParams::reference();
        p.pricing.k = k;
        p
    }

    #[test]
    fn benchmark_individual_stops_below() {
        let p = ModelParams::reference();
        let sol = solve_constant(&p, p.mortality.mu_l).unwrap();
        let ConstantRegime::StopBelow { x2, zeta2 } = sol.regime else { panic!("unexpected regime {:?}", sol.regime) };
        assert!(x2 > 0.0 && zeta2 > 0.0);
        assert_eq!(sol.eval(x2), sol.payoff(x2));
        assert_eq!(sol.eval(0.5 * x2), sol.payoff(0.5 * x2));
    }

    #[test]
    fn zero_cost_with_dominant_annuity_stops_everywhere() {
        let mut p = with_k(0.0);
        p.prefs.nu = 0.0;
        p.market.alpha = 0.0;
        let sol = solve_constant(&p, p.mortality.mu_l).unwrap();
        assert!(sol.coeffs.delta >= sol.coeffs.beta);
        assert_eq!(sol.regime, ConstantRegime::StopEverywhere);
        assert_eq!(sol.eval(1234.0), sol.coeffs.delta * 1234.0);
    }

    #[test]
    fn tax_with_dominant_fund_never_stops() {
        let p = with_k(500.0);
        let sol = solve_constant(&p, p.mortality.mu_l).unwrap();
        assert_eq!(sol.regime, ConstantRegime::NeverStop);
        assert_eq!(sol.eval(10.0), sol.coeffs.beta * 10.0);
    }

    #[test]
    fn rejects_explosive_growth() {
        let mut p = ModelParams::reference();
        p.market.theta = 0.5;
        assert!(solve_constant(&p, 0.01).is_err());
    }
}
