//! C ABI for the `annuitize` solver library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `annuitize_solve_*` functions and released by the matching `*_free`.
//! Every fallible function returns an [`AnnuitizeStatus`]; on failure a
//! description is available from [`annuitize_last_error`] until the next
//! call on the same thread. Results are written through out-pointers.
//! Absent quantities (for example the threshold of a regime without one)
//! are reported as NaN. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use annuitize::config::RunConfig;
use annuitize::core_model::{MarketParams, MortalityParams, PreferenceParams, PricingParams};
use annuitize::monte_carlo::{life_expectancy, simulate_policy, Policy, SimConfig};
use annuitize::{solve_constant, solve_shock, ConstantSolution, Error, HealthState, ModelParams, ShockSolution};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuitizeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or malformed (including bad JSON).
    InvalidArgument = 2,
    /// A parameter assumption failed (see the last error for its name).
    AssumptionViolation = 3,
    /// Shock severity and intensity coincide within the guard.
    NearDegenerateShock = 4,
    /// Root finding, branch selection or quadrature failed.
    SolverFailure = 5,
    /// An internal panic was caught.
    Panic = 6,
}

/// Health state selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnuitizeHealth {
    /// Before the shock.
    Low = 0,
    /// After the shock.
    High = 1,
}

/// Opaque model parameters.
pub struct AnnuitizeParams(ModelParams);

/// Opaque solution of the shock problem.
pub struct AnnuitizeShockSolution {
    sol: ShockSolution,
    tag: CString,
}

/// Opaque solution of the constant-force problem.
pub struct AnnuitizeConstantSolution(ConstantSolution);

/// Summary of a policy simulation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnnuitizeSimStats {
    pub frac_total: f64,
    pub frac_pre_shock: f64,
    pub frac_post_shock: f64,
    pub mean_time: f64,
    pub se_frac: f64,
    pub se_time: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("NUL bytes removed"));
}

fn status_of(e: &Error) -> AnnuitizeStatus {
    match e {
        Error::AssumptionViolation(_) => AnnuitizeStatus::AssumptionViolation,
        Error::NearDegenerateShock { .. } => AnnuitizeStatus::NearDegenerateShock,
        Error::Config(_) | Error::Runtime(_) => AnnuitizeStatus::InvalidArgument,
        _ => AnnuitizeStatus::SolverFailure,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (AnnuitizeStatus, String)>>(f: F) -> AnnuitizeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnnuitizeStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AnnuitizeStatus::Panic
        }
    }
}

fn fail(e: Error) -> (AnnuitizeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AnnuitizeStatus, String) {
    (AnnuitizeStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to a live object of type `T`.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (AnnuitizeStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or valid for writing a `T`.
unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), (AnnuitizeStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Description of the last failure on this thread (empty if none).
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn annuitize_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn annuitize_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates validated parameters from individual values.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn annuitize_params_new(
    theta: f64,
    alpha: f64,
    sigma: f64,
    rho: f64,
    nu: f64,
    rho_hat: f64,
    mu_hat: f64,
    k: f64,
    mu_l: f64,
    delta: f64,
    lambda_l: f64,
    out: *mut *mut AnnuitizeParams,
) -> AnnuitizeStatus {
    guard(|| {
        let p = ModelParams {
            market: MarketParams { theta, alpha, sigma },
            prefs: PreferenceParams { rho, nu },
            pricing: PricingParams { rho_hat, mu_hat, k },
            mortality: MortalityParams { mu_l, delta, lambda_l },
        }
        .validate()
        .map_err(fail)?;
        write(out, Box::into_raw(Box::new(AnnuitizeParams(p))), "out")
    })
}

/// Creates validated parameters from a JSON configuration document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn annuitize_params_from_json(
    json: *const c_char,
    out: *mut *mut AnnuitizeParams,
) -> AnnuitizeStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (AnnuitizeStatus::InvalidArgument, "json is not UTF-8".to_string()))?;
        let cfg = RunConfig::parse(text, &[]).map_err(fail)?;
        let p = cfg.params().validate().map_err(fail)?;
        write(out, Box::into_raw(Box::new(AnnuitizeParams(p))), "out")
    })
}

/// The reference calibration, carried at full precision.
#[no_mangle]
pub extern "C" fn annuitize_params_reference() -> *mut AnnuitizeParams {
    Box::into_raw(Box::new(AnnuitizeParams(ModelParams::reference_unrounded())))
}

/// Releases parameters. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn annuitize_params_free(p: *mut AnnuitizeParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Money's worth before and after the shock.
///
/// # Safety
/// `params` must be a live handle; the out-pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn annuitize_moneys_worth(
    params: *const AnnuitizeParams,
    delta_l: *mut f64,
    delta_h: *mut f64,
) -> AnnuitizeStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        let c = p.0.derive().map_err(fail)?;
        write(delta_l, c.low.delta, "delta_l")?;
        write(delta_h, c.high.delta, "delta_h")
    })
}

/// Solves the shock problem.
///
/// # Safety
/// `params` must be a live handle; `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn annuitize_solve_shock(
    params: *const AnnuitizeParams,
    out: *mut *mut AnnuitizeShockSolution,
) -> AnnuitizeStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        let sol = solve_shock(&p.0).map_err(fail)?;
        let tag = CString::new(sol.regime.tag()).expect("tags have no NUL");
        write(out, Box::into_raw(Box::new(AnnuitizeShockSolution { sol, tag })), "out")
    })
}

/// Releases a shock solution. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn annuitize_shock_solution_free(s: *mut AnnuitizeShockSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Regime tag (for example `P33ii1`), owned by the solution handle.
///
/// # Safety
/// `s` must be a live handle or null (which yields null).
#[no_mangle]
pub unsafe extern "C" fn annuitize_shock_regime(s: *const AnnuitizeShockSolution) -> *const c_char {
    match s.as_ref() {
        Some(s) => s.tag.as_ptr(),
        None => ptr::null(),
    }
}

/// Pre- and post-shock thresholds; NaN where the regime has none.
///
/// # Safety
/// `s` must be a live handle; the out-pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn annuitize_shock_thresholds(
    s: *const AnnuitizeShockSolution,
    x_l: *mut f64,
    x_h: *mut f64,
) -> AnnuitizeStatus {
    guard(|| {
        let s = borrow(s, "solution")?;
        write(x_l, s.sol.details.x_l.unwrap_or(f64::NAN), "x_l")?;
        write(x_h, s.sol.details.x_h.unwrap_or(f64::NAN), "x_h")
    })
}

/// Value function at wealth `x >= 0` in the given health state.
///
/// # Safety
/// `s` must be a live handle; `value` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn annuitize_shock_eval(
    s: *const AnnuitizeShockSolution,
    x: f64,
    health: AnnuitizeHealth,
    value: *mut f64,
) -> AnnuitizeStatus {
    guard(|| {
        let s = borrow(s, "solution")?;
        if !(x >= 0.0 && x.is_finite()) {
            return Err((AnnuitizeStatus::InvalidArgument, format!("wealth must be finite and >= 0, got {x}")));
        }
        let state = match health {
            AnnuitizeHealth::Low => HealthState::Low,
            AnnuitizeHealth::High => HealthState::High,
        };
        write(value, s.sol.eval(x, state), "value")
    })
}

/// Solves the constant-force problem with force `mu`.
///
/// # Safety
/// `params` must be a live handle; `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn annuitize_solve_constant(
    params: *const AnnuitizeParams,
    mu: f64,
    out: *mut *mut AnnuitizeConstantSolution,
) -> AnnuitizeStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        let sol = solve_constant(&p.0, mu).map_err(fail)?;
        write(out, Box::into_raw(Box::new(AnnuitizeConstantSolution(sol))), "out")
    })
}

/// Releases a constant-force solution. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn annuitize_constant_solution_free(s: *mut AnnuitizeConstantSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Threshold of a constant-force solution; NaN if the regime has none.
///
/// # Safety
/// `s` must be a live handle; `x` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn annuitize_constant_threshold(
    s: *const AnnuitizeConstantSolution,
    x: *mut f64,
) -> AnnuitizeStatus {
    guard(|| {
        let s = borrow(s, "solution")?;
        write(x, s.0.threshold().unwrap_or(f64::NAN), "x")
    })
}

/// Value of a constant-force solution at wealth `x >= 0`.
///
/// # Safety
/// `s` must be a live handle; `value` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn annuitize_constant_eval(
    s: *const AnnuitizeConstantSolution,
    x: f64,
    value: *mut f64,
) -> AnnuitizeStatus {
    guard(|| {
        let s = borrow(s, "solution")?;
        if !(x >= 0.0 && x.is_finite()) {
            return Err((AnnuitizeStatus::InvalidArgument, format!("wealth must be finite and >= 0, got {x}")));
        }
        write(value, s.0.eval(x), "value")
    })
}

/// Simulates the optimal policy of the shock problem.
///
/// # Safety
/// `params` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn annuitize_simulate_shock_policy(
    params: *const AnnuitizeParams,
    n_paths: u64,
    dt: f64,
    horizon: f64,
    x0: f64,
    seed: u64,
    out: *mut AnnuitizeSimStats,
) -> AnnuitizeStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        let sol = solve_shock(&p.0).map_err(fail)?;
        let cfg = SimConfig { n_paths: n_paths as usize, dt, horizon, x0, seed };
        let s = simulate_policy(&p.0.market, &p.0.mortality, &Policy::shock(&sol), &cfg).map_err(fail)?;
        let stats = AnnuitizeSimStats {
            frac_total: s.frac_annuitized_total,
            frac_pre_shock: s.frac_pre_shock,
            frac_post_shock: s.frac_post_shock,
            mean_time: s.mean_time_to_annuitize,
            se_frac: s.se_frac_total,
            se_time: s.se_time,
        };
        write(out, stats, "out")
    })
}

/// Simulated life expectancy under the two-state mortality of `params`.
///
/// # Safety
/// `params` must be a live handle; the out-pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn annuitize_life_expectancy(
    params: *const AnnuitizeParams,
    n_sims: u64,
    seed: u64,
    mean: *mut f64,
    std_error: *mut f64,
) -> AnnuitizeStatus {
    guard(|| {
        let p = borrow(params, "params")?;
        let (m, se) = life_expectancy(&p.0.mortality, n_sims as usize, seed).map_err(fail)?;
        write(mean, m, "mean")?;
        write(std_error, se, "std_error")
    })
}
