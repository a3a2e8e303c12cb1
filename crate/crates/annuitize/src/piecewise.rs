//! Piecewise value functions built from power terms `c x^p`.
//!
//! Every value function in the model is, on each interval between
//! breakpoints, a finite sum of power terms: affine parts (`p = 0, 1`),
//! homogeneous solutions (`p = gamma+-`) and particular solutions driven by
//! the post-shock value (`p = gamma+-_h`). Keeping the terms explicit lets
//! oracles differentiate analytically and apply the generator exactly.

use serde::Serialize;

/// A single power term `coef * (x / scale)^power`.
///
/// Homogeneous exponents can be large in magnitude (tens, for low
/// volatility), so coefficients are stored relative to a natural wealth
/// scale, typically the boundary the term is pasted at. This keeps them
/// finite where `x^power` alone would overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub coef: f64,
    pub power: f64,
    pub scale: f64,
}

impl Term {
    /// `coef * x^power`.
    pub fn new(coef: f64, power: f64) -> Self {
        Self { coef, power, scale: 1.0 }
    }

    /// `coef * (x / scale)^power`.
    pub fn scaled(coef: f64, power: f64, scale: f64) -> Self {
        Self { coef, power, scale }
    }

    /// `(x / scale)^power`.
    fn pow(&self, x: f64, power: f64) -> f64 {
        let u = x / self.scale;
        if power == 0.0 {
            1.0
        } else if power == 1.0 {
            u
        } else {
            u.powf(power)
        }
    }

    /// Value at `x`.
    pub fn value(&self, x: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        self.coef * self.pow(x, self.power)
    }

    /// First derivative at `x`.
    pub fn d1(&self, x: f64) -> f64 {
        if self.coef == 0.0 || self.power == 0.0 {
            return 0.0;
        }
        self.coef * self.power * self.pow(x, self.power - 1.0) / self.scale
    }

    /// Second derivative at `x`.
    pub fn d2(&self, x: f64) -> f64 {
        if self.coef == 0.0 || self.power == 0.0 || self.power == 1.0 {
            return 0.0;
        }
        self.coef * self.power * (self.power - 1.0) * self.pow(x, self.power - 2.0) / (self.scale * self.scale)
    }

    /// `x^2 T''(x)`, `x T'(x)` and `T(x)` combined into the generator
    /// `s2/2 x^2 T'' + drift x T' - r T`, evaluated without cancellation.
    pub fn generator(&self, x: f64, half_sigma2: f64, drift: f64, r: f64) -> f64 {
        let p = self.power;
        self.value(x) * (half_sigma2 * p * (p - 1.0) + drift * p - r)
    }
}

/// A sum of power terms valid on one interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    pub terms: Vec<Term>,
    /// True if this interval belongs to the stopping region.
    pub stopping: bool,
}

impl Piece {
    pub fn new(terms: Vec<Term>, stopping: bool) -> Self {
        Self { terms, stopping }
    }

    /// The stopping payoff `delta (x - K)`.
    pub fn payoff(delta: f64, k: f64) -> Self {
        Self::new(vec![Term::new(delta, 1.0), Term::new(-delta * k, 0.0)], true)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.value(x)).sum()
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.d1(x)).sum()
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.d2(x)).sum()
    }

    /// `s2/2 x^2 V'' + drift x V' - r V` applied term by term.
    pub fn generator(&self, x: f64, half_sigma2: f64, drift: f64, r: f64) -> f64 {
        self.terms.iter().map(|t| t.generator(x, half_sigma2, drift, r)).sum()
    }
}

/// A value function on `[0, inf)` with sorted breakpoints.
///
/// `pieces[i]` covers the interval between `breakpoints[i-1]` and
/// `breakpoints[i]`. At a breakpoint exactly, `closed_left[i]` decides
/// whether the left (`true`) or right piece is used, so that stopping
/// regions are closed sets and evaluation is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseValueFunction {
    pub breakpoints: Vec<f64>,
    pub closed_left: Vec<bool>,
    pub pieces: Vec<Piece>,
    /// Slope of the stopping payoff (`delta`).
    pub payoff_slope: f64,
    /// Intercept of the stopping payoff (`-delta K`).
    pub payoff_intercept: f64,
}

impl PiecewiseValueFunction {
    /// A single piece on the whole half-line.
    pub fn single(piece: Piece, delta: f64, k: f64) -> Self {
        Self {
            breakpoints: vec![],
            closed_left: vec![],
            pieces: vec![piece],
            payoff_slope: delta,
            payoff_intercept: -delta * k,
        }
    }

    /// Builds a function from pieces and breakpoints.
    ///
    /// # Panics
    /// If the lengths are inconsistent or breakpoints are not increasing.
    pub fn new(breakpoints: Vec<f64>, closed_left: Vec<bool>, pieces: Vec<Piece>, delta: f64, k: f64) -> Self {
        assert_eq!(pieces.len(), breakpoints.len() + 1);
        assert_eq!(closed_left.len(), breakpoints.len());
        assert!(breakpoints.windows(2).all(|w| w[0] < w[1]), "breakpoints must increase");
        Self { breakpoints, closed_left, pieces, payoff_slope: delta, payoff_intercept: -delta * k }
    }

    /// Index of the piece used at `x`.
    pub fn piece_index(&self, x: f64) -> usize {
        for (i, &b) in self.breakpoints.iter().enumerate() {
            if x < b || (x == b && self.closed_left[i]) {
                return i;
            }
        }
        self.breakpoints.len()
    }

    pub fn piece_at(&self, x: f64) -> &Piece {
        &self.pieces[self.piece_index(x)]
    }

    /// Value at `x >= 0`.
    pub fn value(&self, x: f64) -> f64 {
        self.piece_at(x).value(x)
    }

    /// First derivative at `x` (from the piece that owns `x`).
    pub fn d1(&self, x: f64) -> f64 {
        self.piece_at(x).d1(x)
    }

    /// Second derivative at `x`.
    pub fn d2(&self, x: f64) -> f64 {
        self.piece_at(x).d2(x)
    }

    /// Stopping payoff `delta (x - K)`.
    pub fn payoff(&self, x: f64) -> f64 {
        self.payoff_slope * x + self.payoff_intercept
    }

    /// True if `x` lies in the stopping region.
    pub fn is_stopping(&self, x: f64) -> bool {
        self.piece_at(x).stopping
    }

    /// Values of the pieces immediately left and right of breakpoint `i`.
    pub fn one_sided_values(&self, i: usize) -> (f64, f64) {
        let b = self.breakpoints[i];
        (self.pieces[i].value(b), self.pieces[i + 1].value(b))
    }

    /// First derivatives of the pieces immediately left and right of breakpoint `i`.
    pub fn one_sided_slopes(&self, i: usize) -> (f64, f64) {
        let b = self.breakpoints[i];
        (self.pieces[i].d1(b), self.pieces[i + 1].d1(b))
    }
}
