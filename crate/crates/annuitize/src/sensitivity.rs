//! Sweeps over the shock size and intensity, and crossing detection.
//!
//! Each grid point re-derives every coefficient and re-solves the full
//! threshold problem. Points inside a narrow relative band around
//! `Delta = lambda_l`, where the closed forms degenerate, are skipped and
//! marked; nothing is interpolated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core_model::ModelParams;
use crate::error::{Error, Result};
use crate::shock_solver::solve_shock;

/// Relative half-width of the skipped band around `Delta = lambda_l`.
pub const SKIP_BAND: f64 = 1e-6;

/// Absolute tolerance of the crossing bisection, in parameter units.
pub const CROSSING_TOL: f64 = 1e-6;

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    /// Shock severity `Delta`.
    #[serde(rename = "Delta")]
    Delta,
    /// Shock intensity `lambda_l`.
    #[serde(rename = "Lambda")]
    Lambda,
}

impl SweepParameter {
    /// Name used in configuration files and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "Delta",
            Self::Lambda => "Lambda",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = *base;
        match self {
            Self::Delta => p.mortality.delta = value,
            Self::Lambda => p.mortality.lambda_l = value,
        }
        p
    }
}

/// A one-dimensional sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    pub base: ModelParams,
}

impl SweepSpec {
    /// Checks `lo < hi` (both finite) and `n_points >= 2`.
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Runtime(format!("sweep range must satisfy lo < hi (got [{}, {}])", self.lo, self.hi)));
        }
        if self.n_points < 2 {
            return Err(Error::Runtime("sweep.n_points must be at least 2".into()));
        }
        Ok(())
    }

    /// Evenly spaced grid including both ends.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| if i + 1 == n { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64 })
            .collect()
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RowStatus {
    Ok,
    /// Inside the degenerate band or failing validation; nothing computed.
    Skipped(String),
    /// Coefficients computed but the solver failed.
    Failed(String),
}

impl RowStatus {
    /// Short label for CSV output.
    pub fn label(&self) -> String {
        match self {
            Self::Ok => "ok".into(),
            Self::Skipped(why) => format!("skipped: {why}"),
            Self::Failed(why) => format!("failed: {why}"),
        }
    }
}

/// Quantities recorded at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub delta_l: Option<f64>,
    pub delta_h: Option<f64>,
    pub m_l: Option<f64>,
    pub m_h: Option<f64>,
    /// Pre-shock threshold, absent when the regime has none.
    pub x_l: Option<f64>,
    /// Post-shock threshold, absent when the regime has none.
    pub x_h: Option<f64>,
    pub regime: Option<String>,
    pub status: RowStatus,
}

/// Computes the row for one parameter value.
pub fn evaluate_row(parameter: SweepParameter, base: &ModelParams, value: f64) -> SweepRow {
    let p = parameter.apply(base, value);
    let mut row = SweepRow {
        parameter,
        value,
        delta_l: None,
        delta_h: None,
        m_l: None,
        m_h: None,
        x_l: None,
        x_h: None,
        regime: None,
        status: RowStatus::Ok,
    };
    let (d, l) = (p.mortality.delta, p.mortality.lambda_l);
    if (d - l).abs() <= SKIP_BAND * d.max(l) {
        row.status = RowStatus::Skipped("Delta = lambda_l band".into());
        return row;
    }
    let c = match p.derive() {
        Ok(c) => c,
        Err(e) => {
            row.status = RowStatus::Skipped(e.to_string());
            return row;
        }
    };
    row.delta_l = Some(c.low.delta);
    row.delta_h = Some(c.high.delta);
    row.m_l = Some(c.low.m);
    row.m_h = Some(c.high.m);
    match solve_shock(&p) {
        Ok(sol) => {
            row.x_l = sol.details.x_l;
            row.x_h = sol.details.x_h;
            row.regime = Some(sol.regime.tag().to_string());
        }
        Err(e) => row.status = RowStatus::Failed(e.to_string()),
    }
    row
}

/// One row per grid point, computed in parallel and returned in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.grid().into_par_iter().map(|v| evaluate_row(spec.parameter, &spec.base, v)).collect())
}

/// Signed row quantities whose zero is a reported crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    /// `M_h - M_l`: where the attractiveness indices of the two states meet.
    M,
    /// `x_l - x_h`: where the pre- and post-shock thresholds meet.
    Threshold,
}

impl Crossing {
    /// Name used in `# crossing <name> = <value>` lines.
    pub fn name(self) -> &'static str {
        match self {
            Self::M => "M",
            Self::Threshold => "threshold",
        }
    }

    /// The signed quantity, if the row has it.
    pub fn eval(self, row: &SweepRow) -> Option<f64> {
        match self {
            Self::M => Some(row.m_h? - row.m_l?),
            Self::Threshold => Some(row.x_l? - row.x_h?),
        }
    }
}

/// Locates the first sign change of `f` along the sweep grid and refines it
/// by bisection (re-solving at every midpoint) to [`CROSSING_TOL`].
///
/// Rows where `f` is unavailable or exactly zero are ignored when
/// bracketing. Returns `NoSignChange` if consecutive remaining rows never
/// change sign.
pub fn find_crossing<F>(spec: &SweepSpec, f: F) -> Result<f64>
where
    F: Fn(&SweepRow) -> Option<f64> + Sync,
{
    let rows = run_sweep(spec)?;
    // Exact zeros are not sign changes by themselves (a touching tie, such
    // as both thresholds coinciding at `Delta = 0`); dropping them still
    // brackets any zero across which the sign flips.
    let samples: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| f(r).map(|v| (r.value, v))).filter(|&(_, v)| v != 0.0).collect();
    let bracket = samples.windows(2).find(|w| w[0].1.signum() != w[1].1.signum()).map(|w| (w[0], w[1]));
    let Some(((mut a, fa), (mut b, _))) = bracket else {
        return Err(Error::NoSignChange(format!(
            "no sign change over {} on [{}, {}] ({} usable rows)",
            spec.parameter.name(),
            spec.lo,
            spec.hi,
            samples.len()
        )));
    };
    let sign_a = fa.signum();
    while b - a > CROSSING_TOL {
        let mid = 0.5 * (a + b);
        let row = evaluate_row(spec.parameter, &spec.base, mid);
        let fm = f(&row).ok_or_else(|| {
            Error::Runtime(format!(
                "crossing quantity unavailable at {} = {mid}: {}",
                spec.parameter.name(),
                row.status.label()
            ))
        })?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
