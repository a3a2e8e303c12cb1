//! Parameter sweeps and crossing detection.

use annuitize::sensitivity::{evaluate_row, find_crossing, run_sweep, Crossing, RowStatus, SweepParameter, SweepSpec};
use annuitize::{Error, ModelParams};

fn spec(parameter: SweepParameter, lo: f64, hi: f64, n_points: usize) -> SweepSpec {
    SweepSpec { parameter, lo, hi, n_points, base: ModelParams::reference_unrounded() }
}

#[test]
fn rows_follow_the_grid_in_order() {
    let s = spec(SweepParameter::Lambda, 0.05, 0.5, 31);
    let rows = run_sweep(&s).unwrap();
    assert_eq!(rows.len(), 31);
    assert_eq!(rows[0].value, 0.05);
    assert_eq!(rows[30].value, 0.5);
    assert!(rows.windows(2).all(|w| w[0].value < w[1].value));
    assert!(rows.iter().all(|r| r.status == RowStatus::Ok));
}

#[test]
fn degenerate_band_is_skipped_not_interpolated() {
    let base = ModelParams::reference_unrounded();
    let row = evaluate_row(SweepParameter::Delta, &base, base.mortality.lambda_l);
    assert!(matches!(row.status, RowStatus::Skipped(_)), "{row:?}");
    assert_eq!(row.x_l, None);
    assert_eq!(row.delta_l, None);
}

#[test]
fn invalid_ranges_are_rejected() {
    assert!(run_sweep(&spec(SweepParameter::Delta, 0.2, 0.1, 10)).is_err());
    assert!(run_sweep(&spec(SweepParameter::Delta, 0.0, 0.1, 1)).is_err());
}

#[test]
fn attractiveness_crossings_at_reference() {
    let m = |r: &_| Crossing::M.eval(r);
    let d = find_crossing(&spec(SweepParameter::Delta, 0.0, 0.22935, 200), m).unwrap();
    assert!((d - 0.01755).abs() < 1e-4, "{d}");
    let l = find_crossing(&spec(SweepParameter::Lambda, 0.05, 0.5, 200), m).unwrap();
    assert!((l - 0.125210).abs() < 1e-4, "{l}");
}

#[test]
fn thresholds_never_cross_at_reference() {
    // The pre-shock threshold stays above the post-shock one across both
    // sweeps; they meet only at Delta = 0, where the shock vanishes.
    let t = |r: &_| Crossing::Threshold.eval(r);
    for s in [spec(SweepParameter::Delta, 0.0, 0.22935, 200), spec(SweepParameter::Lambda, 0.05, 0.5, 200)] {
        match find_crossing(&s, t) {
            Err(Error::NoSignChange(_)) => {}
            other => panic!("{:?}: {other:?}", s.parameter),
        }
        for row in run_sweep(&s).unwrap() {
            if let Some(gap) = Crossing::Threshold.eval(&row) {
                assert!(gap >= 0.0, "{row:?}");
            }
        }
    }
}
