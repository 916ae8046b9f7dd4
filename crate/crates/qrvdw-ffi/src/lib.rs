//! C ABI for `qrvdw`.
//!
//! Systems are opaque handles created from a JSON description and released
//! with `qrvdw_system_free`. Every call returns a `QrvdwStatus`; on failure
//! the message is available from `qrvdw_last_error_message` on the same
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qrvdw::closed_form::{excitation_probability, Method};
use qrvdw::contour::Prescription;
use qrvdw::scan::evaluate;
use qrvdw::{Error, PairSystem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrvdwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidSystem = 4,
    /// Outside the domain of the requested evaluator.
    Domain = 5,
    NonConvergence = 6,
    InvalidArgument = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrvdwMethod {
    ClosedForm = 0,
    FarField = 1,
    Adiabatic = 2,
    Causal = 3,
    ContourAdiabatic = 4,
    StationaryPv = 5,
    Pt1995 = 6,
    Quadrature = 7,
}

impl From<QrvdwMethod> for Method {
    fn from(m: QrvdwMethod) -> Self {
        match m {
            QrvdwMethod::ClosedForm => Method::ClosedForm,
            QrvdwMethod::FarField => Method::FarField,
            QrvdwMethod::Adiabatic => Method::Adiabatic,
            QrvdwMethod::Causal => Method::Contour(Prescription::Causal),
            QrvdwMethod::ContourAdiabatic => Method::Contour(Prescription::Adiabatic),
            QrvdwMethod::StationaryPv => Method::Contour(Prescription::StationaryPv),
            QrvdwMethod::Pt1995 => Method::Contour(Prescription::Pt1995),
            QrvdwMethod::Quadrature => Method::Quadrature,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QrvdwEnergy {
    /// Joules.
    pub value_j: f64,
    pub value_rad_s: f64,
    /// `W R⁶/U₀`.
    pub value_scaled: f64,
    pub error_scale: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QrvdwRegime {
    pub quasi_resonant: bool,
    pub linewidth_ok: bool,
    /// Largest `|Δ|/ω̄` over the B lines.
    pub max_delta_over_omega: f64,
}

/// Opaque system handle.
pub struct QrvdwSystem {
    inner: PairSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QrvdwStatus {
    match e {
        Error::Config { .. } | Error::Io(_) => QrvdwStatus::Config,
        Error::InvalidSystem(_) | Error::DegenerateGeometry(_) => QrvdwStatus::InvalidSystem,
        Error::FarFieldDomain { .. } | Error::MultiLine(_) | Error::Singularity | Error::ContourAmbiguity(_) => {
            QrvdwStatus::Domain
        }
        Error::NonConvergence(_) | Error::InsufficientResolution(_) => QrvdwStatus::NonConvergence,
        Error::InvalidArgument(_) => QrvdwStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (QrvdwStatus, String)>) -> QrvdwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrvdwStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            QrvdwStatus::Panic
        }
    }
}

fn lift(e: Error) -> (QrvdwStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QrvdwStatus, String) {
    (QrvdwStatus::NullPointer, format!("{what} is null"))
}

/// Parse a system description and return a new handle in `*out`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer to
/// writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn qrvdw_system_from_json(json: *const c_char, out: *mut *mut QrvdwSystem) -> QrvdwStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(json).to_str().map_err(|e| (QrvdwStatus::InvalidUtf8, e.to_string()))?;
        let sys = qrvdw::atom::load_system(text).map_err(lift)?;
        *out = Box::into_raw(Box::new(QrvdwSystem { inner: sys }));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `sys` must come from `qrvdw_system_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrvdw_system_free(sys: *mut QrvdwSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Move atom B to distance `r_m` (metres) along the current direction.
///
/// # Safety
/// `sys` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qrvdw_system_set_distance(sys: *mut QrvdwSystem, r_m: f64) -> QrvdwStatus {
    guard(|| {
        let s = sys.as_mut().ok_or_else(|| null("sys"))?;
        s.inner = s.inner.with_distance(r_m).map_err(lift)?;
        Ok(())
    })
}

/// Interaction energy at observation time `t_s` (seconds).
///
/// # Safety
/// `sys` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qrvdw_energy(
    sys: *const QrvdwSystem,
    method: QrvdwMethod,
    t_s: f64,
    out: *mut QrvdwEnergy,
) -> QrvdwStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let e = evaluate(&s.inner, t_s, method.into()).map_err(lift)?;
        *o = QrvdwEnergy {
            value_j: e.value,
            value_rad_s: e.value_rad_s,
            value_scaled: e.value_scaled,
            error_scale: e.error_scale,
        };
        Ok(())
    })
}

/// Excitation probability of atom B at `t_s`; single-line systems only.
///
/// # Safety
/// `sys` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qrvdw_excitation_probability(sys: *const QrvdwSystem, t_s: f64, out: *mut f64) -> QrvdwStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = excitation_probability(&s.inner, t_s).map_err(lift)?;
        Ok(())
    })
}

/// # Safety
/// `sys` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qrvdw_regime(sys: *const QrvdwSystem, out: *mut QrvdwRegime) -> QrvdwStatus {
    guard(|| {
        let s = sys.as_ref().ok_or_else(|| null("sys"))?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        let r = qrvdw::atom::validate_regime(&s.inner);
        *o = QrvdwRegime {
            quasi_resonant: r.quasi_resonant,
            linewidth_ok: r.linewidth_ok,
            max_delta_over_omega: r.lines.iter().map(|l| l.delta_over_omega).fold(0.0, f64::max),
        };
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qrvdw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn qrvdw_status_name(status: QrvdwStatus) -> *const c_char {
    let s: &'static CStr = match status {
        QrvdwStatus::Ok => c"ok",
        QrvdwStatus::NullPointer => c"null pointer",
        QrvdwStatus::InvalidUtf8 => c"invalid utf-8",
        QrvdwStatus::Config => c"config error",
        QrvdwStatus::InvalidSystem => c"invalid system",
        QrvdwStatus::Domain => c"domain error",
        QrvdwStatus::NonConvergence => c"non-convergence",
        QrvdwStatus::InvalidArgument => c"invalid argument",
        QrvdwStatus::Panic => c"panic",
    };
    s.as_ptr()
}
