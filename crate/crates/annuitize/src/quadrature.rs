//! Adaptive Gauss–Kronrod quadrature on finite intervals and half-lines.
//!
//! Each interval is integrated with the 15-point Kronrod rule; the embedded
//! 7-point Gauss rule supplies the error estimate. The interval with the
//! largest error is bisected until the total error meets the tolerance.
//! Half-line integrals are truncated at a horizon `T_max` beyond which the
//! integrand decays exponentially, and the remainder is added analytically.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kronrod abscissae on `[-1, 1]` (non-negative half, descending).
#[allow(clippy::excessive_precision)] // tables kept as published
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Kronrod weights matching [`XGK`].
#[allow(clippy::excessive_precision)] // tables kept as published
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes and the centre.
#[allow(clippy::excessive_precision)] // tables kept as published
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and truncation horizon for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Relative error target.
    pub rel_tol: f64,
    /// Absolute error target.
    pub abs_tol: f64,
    /// Maximum number of interval bisections.
    pub max_subdivisions: usize,
    /// Truncation horizon for half-line integrals (yr).
    pub t_max: f64,
}

impl QuadratureConfig {
    /// Horizon cap (yr) for very slowly decaying integrands.
    pub const T_MAX_CAP: f64 = 2000.0;

    /// Configuration for integrands decaying at least like `e^{-rate t}`:
    /// `T_max = 60 / rate`, capped at [`Self::T_MAX_CAP`].
    pub fn for_decay_rate(rate: f64) -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-15, max_subdivisions: 2000, t_max: (60.0 / rate).min(Self::T_MAX_CAP) }
    }

    /// Checks the positivity invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol >= 0.0 && self.t_max > 0.0 && self.max_subdivisions > 0) {
            return Err(Error::Runtime("quadrature: tolerances and horizon must be positive".into()));
        }
        Ok(())
    }
}

/// An integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod evaluation on `[a, b]`: `(value, error estimate)`.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// Fails with `QuadratureNonConvergence` if the subdivision budget runs out
/// or the integrand produces non-finite values.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    cfg.validate()?;
    let (value, error) = kronrod15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let (mut total, mut total_err) = (value, error);
    let mut evaluations = 15;
    for _ in 0..cfg.max_subdivisions {
        if !total.is_finite() {
            break;
        }
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(QuadResult { value: total, error: total_err, evaluations });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        total += left.0 + right.0 - worst.value;
        total_err += left.1 + right.1 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: left.0, error: left.1 });
        heap.push(Segment { a: mid, b: worst.b, value: right.0, error: right.1 });
        // Re-sum to shed accumulated rounding in the running totals.
        if evaluations % 3000 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if value.is_finite() && error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
        return Ok(QuadResult { value, error, evaluations });
    }
    Err(Error::QuadratureNonConvergence { estimate: value, error })
}

/// Integral of `f` over `[0, inf)` for an integrand whose tail decays like
/// `f(T) e^{-decay (t - T)}` beyond `T = cfg.t_max`.
///
/// `breakpoints` split `[0, T_max]` where the integrand has kinks or steep
/// layers. The tail beyond `T_max` is added in closed form, `f(T_max) / decay`,
/// and its size is included in the error bound.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    decay: f64,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    if !(decay > 0.0) {
        return Err(Error::Runtime("quadrature: tail decay rate must be positive".into()));
    }
    let t_max = cfg.t_max;
    let mut nodes: Vec<f64> = breakpoints.iter().copied().filter(|&t| t > 0.0 && t < t_max).collect();
    nodes.sort_by(f64::total_cmp);
    nodes.insert(0, 0.0);
    nodes.push(t_max);
    let mut out = QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    for w in nodes.windows(2) {
        let part = integrate(&f, w[0], w[1], cfg)?;
        out.value += part.value;
        out.error += part.error;
        out.evaluations += part.evaluations;
    }
    let tail = f(t_max) / decay;
    out.value += tail;
    out.error += tail.abs();
    out.evaluations += 1;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let cfg = QuadratureConfig::for_decay_rate(1.0);
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &cfg).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_half_line() {
        let cfg = QuadratureConfig::for_decay_rate(0.3);
        let r = integrate_half_line(|t| (-0.3 * t).exp(), 0.3, &[], &cfg).unwrap();
        assert!((r.value - 1.0 / 0.3).abs() < 1e-11);
    }

    #[test]
    fn square_root_singularity() {
        let cfg = QuadratureConfig::for_decay_rate(1.0);
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = QuadratureConfig { max_subdivisions: 1, ..QuadratureConfig::for_decay_rate(1.0) };
        let e = integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &cfg).unwrap_err();
        assert!(matches!(e, Error::QuadratureNonConvergence { .. }));
    }
}
