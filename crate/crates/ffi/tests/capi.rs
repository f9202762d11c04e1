use std::ffi::{CStr, CString};
use std::process::Command;

use rgq_ffi::*;

fn last_error() -> String {
    let p = rgq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn fidelity_of_pure_states() {
    // |0⟩⟨0| and |+⟩⟨+| project onto states with overlap 1/√2.
    let a = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let b = [0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0];
    let mut f = 0.0;
    assert_eq!(unsafe { rgq_fidelity(2, a.as_ptr(), b.as_ptr(), &mut f) }, RgqStatus::Ok);
    assert!((f - 0.5f64.sqrt()).abs() < 1e-10);
}

#[test]
fn fidelity_rejects_bad_input() {
    let bad = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0];
    let ok = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let mut f = 0.0;
    assert_eq!(unsafe { rgq_fidelity(2, bad.as_ptr(), ok.as_ptr(), &mut f) }, RgqStatus::NotPsd);
    assert!(last_error().contains("not positive semidefinite"));
    assert_eq!(unsafe { rgq_fidelity(2, std::ptr::null(), ok.as_ptr(), &mut f) }, RgqStatus::NullPointer);
    assert_eq!(unsafe { rgq_fidelity(0, ok.as_ptr(), ok.as_ptr(), &mut f) }, RgqStatus::InvalidArgument);
}

#[test]
fn amplitude_matches_weak_coupling_decay() {
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { rgq_u_closed_form(0.0, 1.0, 1.0, 0.0, &mut re, &mut im) }, RgqStatus::Ok);
    assert!((re - 1.0).abs() < 1e-15 && im.abs() < 1e-15);
    // Large α: |u(t)|² ≈ e^{−t} in units of 1/λ².
    assert_eq!(unsafe { rgq_u_closed_form(0.0, 200.0, 1.0, 2.0, &mut re, &mut im) }, RgqStatus::Ok);
    assert!(((re * re + im * im) - (-2.0f64).exp()).abs() < 2e-3);
    assert_eq!(
        unsafe { rgq_u_closed_form(0.0, -1.0, 1.0, 0.0, &mut re, &mut im) },
        RgqStatus::InvalidArgument
    );
}

#[test]
fn oscillator_solutions_agree_early() {
    let (mut e, mut n, mut r) = (0.0, 0.0, 0.0);
    let th = std::f64::consts::FRAC_PI_2;
    assert_eq!(unsafe { rgq_oscillator_eval(0.1, 1.0, th, 0.0, &mut e, &mut n, &mut r) }, RgqStatus::Ok);
    assert!((e - 1.0).abs() < 1e-12 && (r - 1.0).abs() < 1e-12 && (n - 1.0).abs() < 1e-12);
    let (mut rg_err, mut naive_err) = (0.0f64, 0.0f64);
    for k in 0..=200 {
        let t = 30.0 + 0.1 * k as f64;
        assert_eq!(unsafe { rgq_oscillator_eval(0.1, 1.0, th, t, &mut e, &mut n, &mut r) }, RgqStatus::Ok);
        rg_err = rg_err.max((e - r).abs());
        naive_err = naive_err.max((e - n).abs());
    }
    assert!(rg_err < 1e-2, "{rg_err}");
    assert!(naive_err > 1.0, "{naive_err}");
    assert_eq!(
        unsafe { rgq_oscillator_eval(2.5, 1.0, th, 0.0, &mut e, &mut n, &mut r) },
        RgqStatus::InvalidArgument
    );
}

#[test]
fn comparison_handle_lifecycle() {
    let mask = (1 << RgqMethod::Exact as u32) | (1 << RgqMethod::Tcl as u32) | (1 << RgqMethod::Rg as u32);
    let mut h = std::ptr::null_mut();
    assert_eq!(unsafe { rgq_spin_boson_compare(10.0, 5.0, 1.0, 2.0, 0.01, mask, &mut h) }, RgqStatus::Ok);
    assert!(!h.is_null());
    let n = unsafe { rgq_comparison_len(h) };
    assert_eq!(n, 201);

    let mut times = vec![0.0; n];
    assert_eq!(unsafe { rgq_comparison_times(h, times.as_mut_ptr(), n) }, RgqStatus::Ok);
    assert!((times[n - 1] - 2.0).abs() < 1e-12);

    let mut f = vec![0.0; n];
    assert_eq!(unsafe { rgq_comparison_fidelity(h, RgqMethod::Exact as u32, f.as_mut_ptr(), n) }, RgqStatus::Ok);
    assert!(f.iter().all(|v| (v - 1.0).abs() < 1e-10));
    assert_eq!(unsafe { rgq_comparison_fidelity(h, RgqMethod::Rg as u32, f.as_mut_ptr(), n) }, RgqStatus::Ok);
    let (mut v, mut t) = (0.0, 0.0);
    assert_eq!(unsafe { rgq_comparison_min_fidelity(h, RgqMethod::Rg as u32, &mut v, &mut t) }, RgqStatus::Ok);
    assert_eq!(v, f.iter().cloned().fold(f64::INFINITY, f64::min));
    assert!(v > 0.99 && (0.0..=2.0).contains(&t));

    assert_eq!(
        unsafe { rgq_comparison_fidelity(h, RgqMethod::Rwa as u32, f.as_mut_ptr(), n) },
        RgqStatus::InvalidArgument
    );
    assert!(last_error().contains("rwa"));
    assert_eq!(unsafe { rgq_comparison_fidelity(h, 17, f.as_mut_ptr(), n) }, RgqStatus::InvalidArgument);
    assert_eq!(unsafe { rgq_comparison_times(h, times.as_mut_ptr(), 3) }, RgqStatus::DimMismatch);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cmp.csv");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { rgq_comparison_write_csv(h, cpath.as_ptr()) }, RgqStatus::Ok);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * n);

    unsafe { rgq_comparison_free(h) };
    unsafe { rgq_comparison_free(std::ptr::null_mut()) };
    assert_eq!(unsafe { rgq_comparison_len(std::ptr::null()) }, 0);
}

#[test]
fn comparison_requires_exact() {
    let mut h = std::ptr::null_mut();
    let mask = 1 << RgqMethod::Tcl as u32;
    assert_eq!(unsafe { rgq_spin_boson_compare(10.0, 5.0, 1.0, 1.0, 0.1, mask, &mut h) }, RgqStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("exact"));
    assert_eq!(unsafe { rgq_spin_boson_compare(10.0, 5.0, 1.0, 1.0, 0.1, 1 << 9, &mut h) }, RgqStatus::InvalidArgument);
    assert_eq!(unsafe { rgq_spin_boson_compare(10.0, 5.0, 1.0, -1.0, 0.1, 1, &mut h) }, RgqStatus::InvalidArgument);
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rgq.h")).unwrap();
    for name in [
        "RgqStatus",
        "RgqMethod",
        "typedef struct RgqComparison RgqComparison",
        "rgq_last_error_message",
        "rgq_fidelity",
        "rgq_u_closed_form",
        "rgq_oscillator_eval",
        "rgq_spin_boson_compare",
        "rgq_comparison_len",
        "rgq_comparison_times",
        "rgq_comparison_fidelity",
        "rgq_comparison_min_fidelity",
        "rgq_comparison_write_csv",
        "rgq_comparison_free",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include/rgq.h"))
        .status()
    else {
        eprintln!("cc not available, skipping header compile check");
        return;
    };
    assert!(status.success());
}
