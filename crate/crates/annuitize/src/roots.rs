//! Bracketed root finding for the implicit threshold equations.
//!
//! Thresholds live on `(0, inf)` and span many orders of magnitude, so
//! brackets are searched on a logarithmic scale and refined with Brent's
//! method (inverse quadratic interpolation safeguarded by bisection).

use crate::error::{Error, Result};

/// Relative tolerance on the bracket width at convergence.
pub const ROOT_REL_TOL: f64 = 1e-12;

/// Points per decade of the diagnostic sign-change scan.
const SCAN_PER_DECADE: usize = 60;

/// A located root together with the number of sign changes seen while scanning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootReport {
    pub root: f64,
    pub sign_changes: usize,
}

/// Brent's method on a bracket `[a, b]` with `f(a) f(b) <= 0`.
///
/// Stops when the bracket is narrower than `rel_tol * |root|` (plus a tiny
/// absolute floor) or `f` vanishes exactly.
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket(format!("f({a}) = {fa}, f({b}) = {fb}")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs() + f64::MIN_POSITIVE;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NoBracket(format!("non-finite residual at {b}")));
        }
    }
    Ok(b)
}

/// Log-spaced scan of `[lo, hi]` (both positive); returns every sub-interval
/// across which `f` changes sign.
pub fn sign_changes<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let decades = (hi / lo).log10().max(1e-3);
    let n = ((decades * SCAN_PER_DECADE as f64).ceil() as usize).max(16);
    let step = (hi / lo).ln() / n as f64;
    let mut out = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..=n {
        let x = if i == n { hi } else { lo * (step * i as f64).exp() };
        let fx = f(x);
        if fx == 0.0 {
            out.push((x, x));
        } else if f_prev.is_finite() && fx.is_finite() && f_prev != 0.0 && f_prev.signum() != fx.signum() {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    out
}

/// Finds the roots of `f` in `[lo, hi]` by a log-scale scan and refines the first.
///
/// Returns `NoBracket` if no sign change is seen; the report carries the
/// number of sign changes so callers can decide how to treat several.
pub fn solve_in<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<RootReport> {
    let changes = sign_changes(&f, lo, hi);
    let &(a, b) = changes.first().ok_or_else(|| Error::NoBracket(format!("no sign change on [{lo:e}, {hi:e}]")))?;
    let root = brent(&f, a, b, ROOT_REL_TOL)?;
    Ok(RootReport { root, sign_changes: changes.len() })
}

/// Root of `f` on `(0, inf)`: bracket search starting from
/// `[1e-6, 1e2] * scale`, widened tenfold on both sides up to
/// `[1e-12, 1e12] * scale`, then Brent refinement.
///
/// After bracketing, the widest interval `[1e-12, 1e12] * scale` is scanned;
/// more than one sign change is reported as `MultipleRoots` carrying the
/// first root.
pub fn solve_threshold<F: Fn(f64) -> f64>(f: F, scale: f64) -> Result<f64> {
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let (mut lo, mut hi) = (1e-6 * scale, 1e2 * scale);
    loop {
        let changes = sign_changes(&f, lo, hi);
        if !changes.is_empty() {
            let (a, b) = changes[0];
            let root = brent(&f, a, b, ROOT_REL_TOL)?;
            let count = sign_changes(&f, 1e-12 * scale, 1e12 * scale).len();
            if count > 1 {
                return Err(Error::MultipleRoots { what: "threshold residual".into(), count, first: root });
            }
            return Ok(root);
        }
        if hi >= 1e12 * scale {
            return Err(Error::NoBracket(format!("no sign change on [{lo:e}, {hi:e}]")));
        }
        lo /= 10.0;
        hi *= 10.0;
    }
}
