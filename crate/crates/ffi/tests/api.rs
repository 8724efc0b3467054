use fiberip::laws::{CompositeLaw, Issip, SectionPairGeometry};
use fiberip_ffi::*;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

const M: [f64; 2] = [6.0, 12.0];
const K: [f64; 2] = [-1e-7, 5e-25];

fn law() -> *mut FipLaw {
    let mut h = ptr::null_mut();
    let s = unsafe { fip_law_new(M.as_ptr(), K.as_ptr(), 2, 0.02, 0.02, 1.0, 1.0, &mut h) };
    assert_eq!(s, FipStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fip_last_error()) }.to_string_lossy().into_owned()
}

fn native() -> Issip {
    let g = SectionPairGeometry::symmetric(0.02, 1.0).unwrap();
    Issip::new(&CompositeLaw::lennard_jones(K[0], K[1]), &g).unwrap()
}

#[test]
fn values_match_the_library() {
    let h = law();
    let is = native();
    for (q1, q2) in [(0.0, 1e-3), (0.01, 5e-4), (-0.02, 3e-3)] {
        let mut v = 0.0;
        assert_eq!(unsafe { fip_issip_value(h, q1, q2, &mut v) }, FipStatus::Ok);
        assert_eq!(v, is.value(q1, q2).unwrap());
        let mut d = FipDerivatives::default();
        assert_eq!(unsafe { fip_issip_derivatives(h, q1, q2, &mut d) }, FipStatus::Ok);
        let n = is.derivs(q1, q2).unwrap();
        assert_eq!((d.phi, d.phi_1, d.phi_2, d.phi_11, d.phi_12, d.phi_22), (n.phi, n.phi_1, n.phi_2, n.phi_11, n.phi_12, n.phi_22));
    }
    unsafe { fip_law_free(h) };
}

#[test]
fn lssip_force_is_the_negative_gradient() {
    let h = law();
    let (dx, dy) = (0.01, 0.0415);
    let (mut v, mut fx, mut fy) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { fip_lssip_force(h, dx, dy, &mut v, &mut fx, &mut fy) }, FipStatus::Ok);
    let e = 1e-8;
    let at = |x: f64, y: f64| {
        let (mut v, mut a, mut b) = (0.0, 0.0, 0.0);
        assert_eq!(unsafe { fip_lssip_force(h, x, y, &mut v, &mut a, &mut b) }, FipStatus::Ok);
        v
    };
    let gx = (at(dx + e, dy) - at(dx - e, dy)) / (2.0 * e);
    let gy = (at(dx, dy + e) - at(dx, dy - e)) / (2.0 * e);
    let scale = fx.hypot(fy);
    assert!((fx + gx).abs() <= 1e-5 * scale && (fy + gy).abs() <= 1e-5 * scale, "({fx}, {fy}) vs -({gx}, {gy})");
    unsafe { fip_law_free(h) };
}

#[test]
fn cylinder_minimum_sits_at_equilibrium_gap() {
    let h = law();
    let mut gap = 0.0;
    assert_eq!(unsafe { fip_equilibrium_gap(h, &mut gap) }, FipStatus::Ok);
    let cyl = |q: f64| {
        let mut v = 0.0;
        assert_eq!(unsafe { fip_cylinder_per_length(h, q, &mut v) }, FipStatus::Ok);
        v
    };
    let c = cyl(gap);
    assert!(c < 0.0);
    assert!(cyl(0.99 * gap) > c && cyl(1.01 * gap) > c);
    unsafe { fip_law_free(h) };
}

#[test]
fn special_functions() {
    let mut g = 0.0;
    assert_eq!(unsafe { fip_gamma(0.5, &mut g) }, FipStatus::Ok);
    assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    let mut f = 0.0;
    // 2F1(1, 1; 2; z) = -ln(1 - z) / z
    assert_eq!(unsafe { fip_hyp2f1(1.0, 1.0, 2.0, -0.5, &mut f) }, FipStatus::Ok);
    assert!((f - 1.5f64.ln() / 0.5).abs() < 1e-14);
    assert_eq!(unsafe { fip_gamma(-1.0, &mut g) }, FipStatus::Domain);
    assert!(last_error().contains("gamma"), "{}", last_error());
    assert_eq!(unsafe { fip_hyp2f1(1.0, 1.0, 2.0, 0.5, &mut f) }, FipStatus::Domain);
}

#[test]
fn failures_report_status_and_message() {
    let h = law();
    let mut v = 7.0;
    assert_eq!(unsafe { fip_issip_value(h, 0.0, -1e-3, &mut v) }, FipStatus::Contact);
    assert_eq!(v, 7.0, "output written on failure");
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { fip_issip_value(h, f64::NAN, 1e-3, &mut v) }, FipStatus::InvalidArgument);
    assert_eq!(unsafe { fip_issip_value(ptr::null(), 0.0, 1e-3, &mut v) }, FipStatus::InvalidArgument);
    assert_eq!(unsafe { fip_issip_value(h, 0.0, 1e-3, ptr::null_mut()) }, FipStatus::InvalidArgument);
    // success clears the message
    assert_eq!(unsafe { fip_issip_value(h, 0.0, 1e-3, &mut v) }, FipStatus::Ok);
    assert!(last_error().is_empty());
    unsafe { fip_law_free(h) };
    unsafe { fip_law_free(ptr::null_mut()) };
}

#[test]
fn bad_laws_are_rejected() {
    let mut h = ptr::null_mut();
    let m = [3.0];
    let k = [-1.0];
    assert_eq!(unsafe { fip_law_new(m.as_ptr(), k.as_ptr(), 1, 0.02, 0.02, 1.0, 1.0, &mut h) }, FipStatus::Domain);
    assert!(h.is_null());
    assert_eq!(unsafe { fip_law_new(M.as_ptr(), K.as_ptr(), 2, -0.02, 0.02, 1.0, 1.0, &mut h) }, FipStatus::Domain);
    assert_eq!(unsafe { fip_law_new(M.as_ptr(), K.as_ptr(), 0, 0.02, 0.02, 1.0, 1.0, &mut h) }, FipStatus::InvalidArgument);
    assert_eq!(unsafe { fip_law_new(M.as_ptr(), K.as_ptr(), 2, 0.02, 0.02, 1.0, 1.0, ptr::null_mut()) }, FipStatus::InvalidArgument);
    // a single attractive term has no equilibrium
    let mut one = ptr::null_mut();
    assert_eq!(unsafe { fip_law_new(M.as_ptr(), K.as_ptr(), 1, 0.02, 0.02, 1.0, 1.0, &mut one) }, FipStatus::Ok);
    let mut gap = 0.0;
    assert_eq!(unsafe { fip_equilibrium_gap(one, &mut gap) }, FipStatus::Domain);
    unsafe { fip_law_free(one) };
}

#[test]
fn errors_are_per_thread() {
    let mut g = 0.0;
    assert_eq!(unsafe { fip_gamma(-1.0, &mut g) }, FipStatus::Domain);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_empty());
    assert!(!last_error().is_empty());
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(fip_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn run_scenario_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CString::new(r#"{"scenario":"cylinder-eq"}"#).unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fip_run_scenario(cfg.as_ptr(), out.as_ptr(), &mut s) }, FipStatus::Ok, "{}", last_error());
    let summary: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    unsafe { fip_string_free(s) };
    assert_eq!(summary["scenario"], "cylinder-eq");
    assert!(dir.path().join("summary.json").exists());

    let bad = CString::new(r#"{"scenario":"peel"}"#).unwrap();
    assert_eq!(unsafe { fip_run_scenario(bad.as_ptr(), out.as_ptr(), ptr::null_mut()) }, FipStatus::Config);
    assert!(last_error().contains("material.youngs_modulus"), "{}", last_error());
    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { fip_run_scenario(junk.as_ptr(), out.as_ptr(), ptr::null_mut()) }, FipStatus::Config);
    assert_eq!(unsafe { fip_run_scenario(ptr::null(), out.as_ptr(), ptr::null_mut()) }, FipStatus::InvalidArgument);
}

/// Directory holding the library artifacts, two levels above this test binary.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = artifact_dir().join("libfiberip_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let line = String::from_utf8(run.stdout).unwrap();
    assert!(line.starts_with(env!("CARGO_PKG_VERSION")), "{line}");
}
