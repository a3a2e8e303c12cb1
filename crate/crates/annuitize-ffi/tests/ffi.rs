//! Tests of the C ABI: status codes, handle lifetimes, error messages and
//! the generated header.

use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use annuitize_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(annuitize_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn reference_solution_through_handles() {
    unsafe {
        let params = annuitize_params_reference();
        let (mut dl, mut dh) = (0.0, 0.0);
        assert_eq!(annuitize_moneys_worth(params, &mut dl, &mut dh), AnnuitizeStatus::Ok);
        assert!((dl - 0.906988).abs() < 5e-7 && (dh - 0.809704).abs() < 5e-7);

        let mut sol = ptr::null_mut();
        assert_eq!(annuitize_solve_shock(params, &mut sol), AnnuitizeStatus::Ok);
        assert_eq!(CStr::from_ptr(annuitize_shock_regime(sol)).to_str().unwrap(), "P33ii1");
        let (mut xl, mut xh) = (0.0, 0.0);
        assert_eq!(annuitize_shock_thresholds(sol, &mut xl, &mut xh), AnnuitizeStatus::Ok);
        assert!((xl - 63132.55).abs() < 0.01 && (xh - 26431.37).abs() < 0.01);
        let mut v = 0.0;
        assert_eq!(annuitize_shock_eval(sol, 1e5, AnnuitizeHealth::Low, &mut v), AnnuitizeStatus::Ok);
        assert!((v - 92487.81).abs() < 0.01, "{v}");
        assert_eq!(annuitize_shock_eval(sol, -1.0, AnnuitizeHealth::High, &mut v), AnnuitizeStatus::InvalidArgument);
        assert!(last_error().contains("wealth"));
        annuitize_shock_solution_free(sol);

        let mut c = ptr::null_mut();
        assert_eq!(annuitize_solve_constant(params, 0.044623, &mut c), AnnuitizeStatus::Ok);
        let mut x = 0.0;
        assert_eq!(annuitize_constant_threshold(c, &mut x), AnnuitizeStatus::Ok);
        assert!((x - 68893.5).abs() < 1.0, "{x}");
        assert_eq!(annuitize_constant_eval(c, 1e3, &mut v), AnnuitizeStatus::Ok);
        annuitize_constant_solution_free(c);
        annuitize_params_free(params);
    }
}

#[test]
fn absent_thresholds_are_nan() {
    unsafe {
        let mut p = ptr::null_mut();
        // K = 0 with these coefficients never stops before the shock.
        let st = annuitize_params_new(
            0.094864, 0.075891, 0.15452, 0.05997, 0.25, 0.05997, 0.044623, 0.0, 0.044623, 0.024581, 0.1, &mut p,
        );
        assert_eq!(st, AnnuitizeStatus::Ok, "{}", last_error());
        let mut sol = ptr::null_mut();
        assert_eq!(annuitize_solve_shock(p, &mut sol), AnnuitizeStatus::Ok);
        let (mut xl, mut xh) = (0.0, 0.0);
        annuitize_shock_thresholds(sol, &mut xl, &mut xh);
        let tag = CStr::from_ptr(annuitize_shock_regime(sol)).to_str().unwrap();
        assert!(tag.starts_with("P36"), "{tag}");
        assert!(xl.is_nan() && xh.is_nan());
        annuitize_shock_solution_free(sol);
        annuitize_params_free(p);
    }
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        let st = annuitize_params_new(0.09, 0.07, -0.1, 0.06, 0.25, 0.06, 0.04, -1500.0, 0.04, 0.02, 0.1, &mut p);
        assert_eq!(st, AnnuitizeStatus::AssumptionViolation);
        assert!(p.is_null());
        assert!(!last_error().is_empty());

        let st = annuitize_params_new(0.09, 0.07, 0.15, 0.06, 0.25, 0.06, 0.04, -1500.0, 0.04, 0.1, 0.1, &mut p);
        assert_eq!(st, AnnuitizeStatus::NearDegenerateShock, "{}", last_error());

        assert_eq!(annuitize_solve_shock(ptr::null(), &mut ptr::null_mut()), AnnuitizeStatus::NullPointer);
        assert!(last_error().contains("params"));
        let params = annuitize_params_reference();
        assert_eq!(annuitize_moneys_worth(params, ptr::null_mut(), ptr::null_mut()), AnnuitizeStatus::NullPointer);
        assert!(annuitize_shock_regime(ptr::null()).is_null());
        annuitize_params_free(params);
        annuitize_params_free(ptr::null_mut());
        annuitize_shock_solution_free(ptr::null_mut());
        annuitize_constant_solution_free(ptr::null_mut());
    }
}

#[test]
fn params_from_json() {
    let json = CString::new(
        r#"{"market":{"theta":0.094864,"alpha":0.075891,"sigma":0.15452},
            "prefs":{"rho":0.05997,"nu":0.25},
            "pricing":{"rho_hat":0.05997,"mu_hat":0.044623,"K":-1500},
            "mortality":{"mu_l":0.044623,"delta":0.024581,"lambda_l":0.1}}"#,
    )
    .unwrap();
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(annuitize_params_from_json(json.as_ptr(), &mut p), AnnuitizeStatus::Ok, "{}", last_error());
        let (mut dl, mut dh) = (0.0, 0.0);
        annuitize_moneys_worth(p, &mut dl, &mut dh);
        assert!((dl - 0.9069891).abs() < 1e-6);
        annuitize_params_free(p);

        let bad = CString::new(r#"{"market":{}}"#).unwrap();
        assert_eq!(annuitize_params_from_json(bad.as_ptr(), &mut p), AnnuitizeStatus::InvalidArgument);
        assert!(last_error().contains("required"), "{}", last_error());
        assert_eq!(annuitize_params_from_json(ptr::null(), &mut p), AnnuitizeStatus::NullPointer);
    }
}

#[test]
fn simulation_and_life_expectancy() {
    unsafe {
        let params = annuitize_params_reference();
        let mut a = AnnuitizeSimStats::default();
        let mut b = AnnuitizeSimStats::default();
        assert_eq!(
            annuitize_simulate_shock_policy(params, 2000, 1.0 / 52.0, 20.0, 1e5, 42, &mut a),
            AnnuitizeStatus::Ok
        );
        assert_eq!(
            annuitize_simulate_shock_policy(params, 2000, 1.0 / 52.0, 20.0, 1e5, 42, &mut b),
            AnnuitizeStatus::Ok
        );
        assert_eq!(a, b);
        assert!((a.frac_pre_shock + a.frac_post_shock - a.frac_total).abs() < 1e-15);
        assert_eq!(
            annuitize_simulate_shock_policy(params, 0, 0.01, 20.0, 1e5, 42, &mut a),
            AnnuitizeStatus::InvalidArgument
        );
        let (mut m, mut se) = (0.0, 0.0);
        assert_eq!(annuitize_life_expectancy(params, 100_000, 1, &mut m, &mut se), AnnuitizeStatus::Ok);
        assert!((m - 16.906).abs() < 4.0 * se);
        annuitize_params_free(params);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(annuitize_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_compiles() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/annuitize.h")).unwrap();
    let source = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    for line in source.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
        }
    }
    let probe = dir.join("include/annuitize.h");
    for compiler in ["cc", "c++"] {
        let lang = if compiler == "cc" { "c" } else { "c++" };
        match Command::new(compiler).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&probe).status() {
            Ok(s) => assert!(s.success(), "{compiler} rejects the header"),
            Err(e) => eprintln!("skipping {compiler} header check: {e}"),
        }
    }
}

#[test]
fn c_program_links_against_static_library() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.join("libannuitize_ffi.a");
    if !lib.exists() {
        eprintln!("skipping C link test: {} not built", lib.display());
        return;
    }
    let out_dir = tempfile_dir();
    let exe = out_dir.join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "C smoke program failed to build"),
        Err(e) => {
            eprintln!("skipping C link test: {e}");
            return;
        }
    }
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "P33ii1 63132.55 26431.38\nnull 1 params is null\n");
    let _ = std::fs::remove_dir_all(out_dir);
}

/// A fresh directory under the system temp dir for build products.
fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("annuitize-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
