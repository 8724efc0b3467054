//! C interface to the section-section potentials, the special functions and
//! the scenario runner.
//!
//! Every entry point returns a [`FipStatus`]; on failure the message is
//! available from [`fip_last_error`] on the same thread. Results are written
//! through out-pointers only on success. Panics never cross the boundary.

use fiberip::laws::{self, CompositeLaw, Issip, PowerLaw, SectionPairGeometry};
use fiberip::specialfn::{self, Hyp2F1Params};
use fiberip::vec2::Vec2;
use fiberip::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FipStatus {
    Ok = 0,
    /// null pointer, invalid UTF-8 or a non-finite input
    InvalidArgument = 1,
    /// argument outside the domain of the function
    Domain = 2,
    NonConvergence = 3,
    /// sections touch or overlap, or the pair frame is degenerate
    Contact = 4,
    Config = 5,
    /// Newton or linear solve failure
    Solver = 6,
    Io = 7,
    /// internal panic, caught at the boundary
    Panic = 8,
}

/// Section-section potential and its derivatives at one `(q1, q2)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FipDerivatives {
    pub phi: f64,
    pub phi_1: f64,
    pub phi_2: f64,
    pub phi_11: f64,
    pub phi_12: f64,
    pub phi_22: f64,
}

/// Opaque handle: a composite power law bound to one section pair.
pub struct FipLaw {
    law: CompositeLaw,
    geom: SectionPairGeometry,
    issip: Issip,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(FipStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) | Error::OutOfRange(_) => FipStatus::Domain,
            Error::NonConvergence { .. } => FipStatus::NonConvergence,
            Error::Contact { .. } | Error::DegenerateFrame { .. } => FipStatus::Contact,
            Error::Config { .. } => FipStatus::Config,
            Error::Solver(_) | Error::Singular(_) => FipStatus::Solver,
            Error::Io(_) => FipStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(FipStatus::InvalidArgument, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FipStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FipStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            FipStatus::Panic
        }
    }
}

fn finite(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

unsafe fn out<'a, T>(name: &str, p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| invalid(format!("{name} is null")))
}

unsafe fn handle<'a>(law: *const FipLaw) -> Result<&'a FipLaw, Failure> {
    law.as_ref().ok_or_else(|| invalid("law handle is null"))
}

unsafe fn text<'a>(name: &str, p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| invalid(format!("{name} is not UTF-8: {e}")))
}

/// Build a law from `n` (exponent, coefficient) pairs and a section pair.
///
/// # Safety
/// `exponents` and `coefficients` must point to `n` readable doubles and
/// `out_law` to writable storage for one pointer. Release the handle with
/// [`fip_law_free`].
#[no_mangle]
pub unsafe extern "C" fn fip_law_new(
    exponents: *const f64,
    coefficients: *const f64,
    n: usize,
    radius_x: f64,
    radius_y: f64,
    density_x: f64,
    density_y: f64,
    out_law: *mut *mut FipLaw,
) -> FipStatus {
    guard(|| {
        let slot = out("out_law", out_law)?;
        if n == 0 || exponents.is_null() || coefficients.is_null() {
            return Err(invalid("need at least one term and non-null term arrays"));
        }
        let ms = std::slice::from_raw_parts(exponents, n);
        let ks = std::slice::from_raw_parts(coefficients, n);
        let terms = ms
            .iter()
            .zip(ks)
            .map(|(&m, &k)| Ok(PowerLaw::new(finite("exponent", m)?, finite("coefficient", k)?)))
            .collect::<Result<Vec<_>, Failure>>()?;
        let law = CompositeLaw::new(terms)?;
        let geom = SectionPairGeometry::new(radius_x, radius_y, density_x, density_y)?;
        let issip = Issip::new(&law, &geom)?;
        *slot = Box::into_raw(Box::new(FipLaw { law, geom, issip }));
        Ok(())
    })
}

/// Release a handle from [`fip_law_new`]; null is ignored.
///
/// # Safety
/// `law` must be null or a handle that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn fip_law_free(law: *mut FipLaw) {
    if !law.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(law))));
    }
}

/// Section-section potential at offset `q1` and gap `q2`.
///
/// # Safety
/// `law` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn fip_issip_value(law: *const FipLaw, q1: f64, q2: f64, out_value: *mut f64) -> FipStatus {
    guard(|| {
        let h = handle(law)?;
        let slot = out("out_value", out_value)?;
        *slot = h.issip.value(finite("q1", q1)?, finite("q2", q2)?)?;
        Ok(())
    })
}

/// Potential with first and second derivatives in `(q1, q2)`.
///
/// # Safety
/// `law` must be a live handle and `out_derivs` writable.
#[no_mangle]
pub unsafe extern "C" fn fip_issip_derivatives(
    law: *const FipLaw,
    q1: f64,
    q2: f64,
    out_derivs: *mut FipDerivatives,
) -> FipStatus {
    guard(|| {
        let h = handle(law)?;
        let slot = out("out_derivs", out_derivs)?;
        let d = h.issip.derivs(finite("q1", q1)?, finite("q2", q2)?)?;
        *slot = FipDerivatives {
            phi: d.phi,
            phi_1: d.phi_1,
            phi_2: d.phi_2,
            phi_11: d.phi_11,
            phi_12: d.phi_12,
            phi_22: d.phi_22,
        };
        Ok(())
    })
}

/// Offset-free section law evaluated at the centroid difference `(dx, dy)`,
/// with the force on the first section; the second receives the opposite force.
///
/// # Safety
/// `law` must be a live handle and the three out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fip_lssip_force(
    law: *const FipLaw,
    dx: f64,
    dy: f64,
    out_value: *mut f64,
    out_fx: *mut f64,
    out_fy: *mut f64,
) -> FipStatus {
    guard(|| {
        let h = handle(law)?;
        let (v, fx, fy) = (out("out_value", out_value)?, out("out_fx", out_fx)?, out("out_fy", out_fy)?);
        let (phi, f) = h.issip.lssip(Vec2::new(finite("dx", dx)?, finite("dy", dy)?))?;
        *v = phi;
        *fx = f.x;
        *fy = f.y;
        Ok(())
    })
}

/// Potential per unit length of a section against an infinite parallel
/// cylinder at gap `q2`.
///
/// # Safety
/// `law` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn fip_cylinder_per_length(law: *const FipLaw, q2: f64, out_value: *mut f64) -> FipStatus {
    guard(|| {
        let h = handle(law)?;
        let slot = out("out_value", out_value)?;
        *slot = laws::cylinder_per_length(finite("q2", q2)?, &h.law, &h.geom)?;
        Ok(())
    })
}

/// Stationary gap of the per-length potential; the law must have exactly
/// one attractive and one repulsive term.
///
/// # Safety
/// `law` must be a live handle and `out_gap` writable.
#[no_mangle]
pub unsafe extern "C" fn fip_equilibrium_gap(law: *const FipLaw, out_gap: *mut f64) -> FipStatus {
    guard(|| {
        let h = handle(law)?;
        let slot = out("out_gap", out_gap)?;
        *slot = laws::equilibrium_gap(&h.law, &h.geom)?;
        Ok(())
    })
}

/// Gauss hypergeometric function for real `z <= 0`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fip_hyp2f1(a: f64, b: f64, c: f64, z: f64, out_value: *mut f64) -> FipStatus {
    guard(|| {
        let slot = out("out_value", out_value)?;
        *slot = specialfn::hyp2f1(Hyp2F1Params { a, b, c, z })?;
        Ok(())
    })
}

/// Gamma function for `x > 0`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fip_gamma(x: f64, out_value: *mut f64) -> FipStatus {
    guard(|| {
        let slot = out("out_value", out_value)?;
        *slot = specialfn::gamma_fn(x)?;
        Ok(())
    })
}

/// Run the scenario in the JSON `config`, writing artifacts under `out_dir`.
/// On success `*out_summary` (if not null) receives the summary JSON, to be
/// released with [`fip_string_free`].
///
/// # Safety
/// `config` and `out_dir` must be NUL-terminated strings; `out_summary`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fip_run_scenario(
    config: *const c_char,
    out_dir: *const c_char,
    out_summary: *mut *mut c_char,
) -> FipStatus {
    guard(|| {
        let cfg = fiberip::cli_io::config_parse(text("config", config)?)?;
        let dir = text("out_dir", out_dir)?;
        let summary = fiberip::cli_io::run_scenario(&cfg, Path::new(dir))?;
        if let Some(slot) = out_summary.as_mut() {
            *slot = CString::new(summary.to_string())
                .expect("JSON has no interior nul")
                .into_raw();
        }
        Ok(())
    })
}

/// Release a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fip_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fip_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fip_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
