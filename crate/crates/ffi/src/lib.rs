//! C ABI for the Obata verification toolkit.
//!
//! The surface follows the usual opaque-handle pattern: constructors
//! return `ObataStatus` and write a handle through an out-pointer, every
//! handle has a matching `_free`, and all numerical results come back
//! through out-pointers.  No Rust panic crosses the boundary; failures of
//! any kind map to a status code.
//!
//! The C header is generated into `include/obata.h` by the build script.

use std::panic::{catch_unwind, AssertUnwindSafe};

use obata_core::flow::{normalized_gradient_flow, FlowDirection, FlowOptions, TerminalEvent};
use obata_core::geometry::{
    make_model_domain, DomainSide, ModelDomain, ObataFunction, SpherePoint,
};
use obata_core::ode::{flow_value, metric_warp, phi_radial_solve, BaseGeometry};
use obata_core::spectral::{smallest_eigenvalue, EigenResult, RadialBc, SturmLiouvilleProblem};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ObataStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotOnBoundary = 3,
    NumericalFailure = 4,
    BufferTooSmall = 5,
}

/// Boundary-condition selector for the eigenvalue solver.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ObataBc {
    Dirichlet = 0,
    Neumann = 1,
    Robin = 2,
}

/// Opaque model-domain handle.
pub struct ObataDomain {
    domain: ModelDomain,
    height: ObataFunction,
}

/// Opaque eigenvalue-result handle.
pub struct ObataEigen {
    result: EigenResult,
}

fn status_of(err: &obata_core::CoreError) -> ObataStatus {
    use obata_core::CoreError::*;
    match err {
        InvalidParameter { .. } | DimensionMismatch { .. } => ObataStatus::InvalidArgument,
        NotOnBoundary { .. } => ObataStatus::NotOnBoundary,
        _ => ObataStatus::NumericalFailure,
    }
}

fn guarded<F: FnOnce() -> ObataStatus>(f: F) -> ObataStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => ObataStatus::NumericalFailure,
    }
}

/// ABI version of this header; bumped on breaking changes.
#[no_mangle]
pub extern "C" fn obata_abi_version() -> u32 {
    1
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn obata_status_name(status: ObataStatus) -> *const std::os::raw::c_char {
    let name: &'static [u8] = match status {
        ObataStatus::Ok => b"ok\0",
        ObataStatus::NullPointer => b"null pointer\0",
        ObataStatus::InvalidArgument => b"invalid argument\0",
        ObataStatus::NotOnBoundary => b"not on boundary\0",
        ObataStatus::NumericalFailure => b"numerical failure\0",
        ObataStatus::BufferTooSmall => b"buffer too small\0",
    };
    name.as_ptr() as *const _
}

/// Creates a model domain D^m(θ) (core = 1) or its complement (core = 0)
/// in Sⁿ, carrying the canonical height solution with amplitude 1.
///
/// # Safety
/// `out` must be a valid pointer; the returned handle must be released
/// with `obata_domain_free`.
#[no_mangle]
pub unsafe extern "C" fn obata_domain_new(
    n: usize,
    m: usize,
    theta: f64,
    core: i32,
    out: *mut *mut ObataDomain,
) -> ObataStatus {
    if out.is_null() {
        return ObataStatus::NullPointer;
    }
    guarded(|| {
        let side = if core != 0 {
            DomainSide::Core
        } else {
            DomainSide::Complement
        };
        match make_model_domain(n, m, theta, side) {
            Ok(domain) => {
                let handle = Box::new(ObataDomain {
                    height: ObataFunction::height(n, 1.0),
                    domain,
                });
                *out = Box::into_raw(handle);
                ObataStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a domain handle.
///
/// # Safety
/// `handle` must come from `obata_domain_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn obata_domain_free(handle: *mut ObataDomain) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn point_from(y: *const f64, len: usize) -> Result<SpherePoint, ObataStatus> {
    if y.is_null() {
        return Err(ObataStatus::NullPointer);
    }
    let coords = std::slice::from_raw_parts(y, len).to_vec();
    SpherePoint::new(coords).map_err(|e| status_of(&e))
}

/// Closed-set membership of an ambient point (length n+1).
///
/// # Safety
/// `handle`, `y` (length `len`) and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn obata_domain_contains(
    handle: *const ObataDomain,
    y: *const f64,
    len: usize,
    out: *mut i32,
) -> ObataStatus {
    if handle.is_null() || out.is_null() {
        return ObataStatus::NullPointer;
    }
    guarded(|| {
        let h = &*handle;
        let p = match point_from(y, len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match h.domain.contains(&p) {
            Ok(v) => {
                *out = v as i32;
                ObataStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Robin residual ∂f/∂ν + a·f of the canonical height solution at a
/// boundary point.
///
/// # Safety
/// `handle`, `y` (length `len`) and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn obata_domain_robin_residual(
    handle: *const ObataDomain,
    y: *const f64,
    len: usize,
    a: f64,
    out: *mut f64,
) -> ObataStatus {
    if handle.is_null() || out.is_null() {
        return ObataStatus::NullPointer;
    }
    guarded(|| {
        let h = &*handle;
        let p = match point_from(y, len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match obata_core::geometry::robin_residual(&h.domain, &h.height, a, &p) {
            Ok(v) => {
                *out = v;
                ObataStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Time for the normalized gradient flow from a boundary point of the cap
/// complement Sⁿ∖D^{n−1}(θ) to reach the interior maximum (π/2 − θ for
/// the model).
///
/// # Safety
/// `y` (length `len`) and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn obata_cap_hit_time(
    n: usize,
    theta: f64,
    y: *const f64,
    len: usize,
    dt: f64,
    out: *mut f64,
) -> ObataStatus {
    if out.is_null() {
        return ObataStatus::NullPointer;
    }
    guarded(|| {
        let domain = match make_model_domain(n, n.saturating_sub(1), theta, DomainSide::Complement)
        {
            Ok(d) => d,
            Err(e) => return status_of(&e),
        };
        let p = match point_from(y, len) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let f = ObataFunction::height(n, 1.0);
        let opts = FlowOptions::new(dt, 6.0, FlowDirection::Forward);
        match normalized_gradient_flow(&f, &p, Some(&domain), opts) {
            Ok(trace) if trace.terminal_event == TerminalEvent::InteriorMax => {
                *out = trace.terminal_time;
                ObataStatus::Ok
            }
            Ok(_) => ObataStatus::NumericalFailure,
            Err(e) => status_of(&e),
        }
    })
}

/// Solves the reduced radial eigenproblem on the cap of the given radius.
/// `a` is only read for the Robin condition.
///
/// # Safety
/// `out` must be a valid pointer; release the handle with
/// `obata_eigen_free`.
#[no_mangle]
pub unsafe extern "C" fn obata_eigen_solve(
    n: usize,
    radius: f64,
    ell: usize,
    bc: ObataBc,
    a: f64,
    out: *mut *mut ObataEigen,
) -> ObataStatus {
    if out.is_null() {
        return ObataStatus::NullPointer;
    }
    guarded(|| {
        let bc = match bc {
            ObataBc::Dirichlet => RadialBc::Dirichlet,
            ObataBc::Neumann => RadialBc::Neumann,
            ObataBc::Robin => RadialBc::Robin(a),
        };
        let problem = match SturmLiouvilleProblem::new(n, radius, ell, bc) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        match smallest_eigenvalue(&problem) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(ObataEigen { result }));
                ObataStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases an eigenvalue handle.
///
/// # Safety
/// `handle` must come from `obata_eigen_solve` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn obata_eigen_free(handle: *mut ObataEigen) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Smallest eigenvalue of a solved problem.
///
/// # Safety
/// `handle` must be a live handle from `obata_eigen_solve`.
#[no_mangle]
pub unsafe extern "C" fn obata_eigen_value(handle: *const ObataEigen) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    (*handle).result.xi
}

/// Boundary-condition residual of the returned eigenfunction.
///
/// # Safety
/// `handle` must be a live handle from `obata_eigen_solve`.
#[no_mangle]
pub unsafe extern "C" fn obata_eigen_bc_residual(handle: *const ObataEigen) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    (*handle).result.bc_residual
}

/// Sup-norm ODE residual of the returned eigenfunction.
///
/// # Safety
/// `handle` must be a live handle from `obata_eigen_solve`.
#[no_mangle]
pub unsafe extern "C" fn obata_eigen_ode_residual(handle: *const ObataEigen) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    (*handle).result.ode_residual
}

/// Number of (r, u) samples held by the handle.
///
/// # Safety
/// `handle` must be a live handle from `obata_eigen_solve`.
#[no_mangle]
pub unsafe extern "C" fn obata_eigen_sample_count(handle: *const ObataEigen) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).result.u_samples.len()
}

/// Copies the eigenfunction samples into caller-provided buffers of
/// capacity `cap` each.
///
/// # Safety
/// `handle`, `r_out` and `u_out` must be valid; the buffers must have room
/// for `cap` doubles each.
#[no_mangle]
pub unsafe extern "C" fn obata_eigen_samples(
    handle: *const ObataEigen,
    r_out: *mut f64,
    u_out: *mut f64,
    cap: usize,
) -> ObataStatus {
    if handle.is_null() || r_out.is_null() || u_out.is_null() {
        return ObataStatus::NullPointer;
    }
    let samples = &(*handle).result.u_samples;
    if cap < samples.len() {
        return ObataStatus::BufferTooSmall;
    }
    for (i, (r, u)) in samples.iter().enumerate() {
        *r_out.add(i) = *r;
        *u_out.add(i) = *u;
    }
    ObataStatus::Ok
}

/// The flow-value law L·sin(α + t).
#[no_mangle]
pub extern "C" fn obata_flow_value(alpha: f64, t: f64, l: f64) -> f64 {
    flow_value(alpha, t, l)
}

/// The warp factor cos²(α+t)/cos²α; NaN when cos α vanishes.
#[no_mangle]
pub extern "C" fn obata_metric_warp(alpha: f64, t: f64) -> f64 {
    metric_warp(alpha, t).unwrap_or(f64::NAN)
}

/// Plateau value of the radial graph-equation profile for a < 0 (π − θ),
/// written to `out` after an actual solve.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn obata_phi_plateau(
    a: f64,
    rho_max: f64,
    h: f64,
    out: *mut f64,
) -> ObataStatus {
    if out.is_null() {
        return ObataStatus::NullPointer;
    }
    guarded(
        || match phi_radial_solve(a, BaseGeometry::FlatDisk, rho_max, h) {
            Ok(profile) => {
                *out = profile.rho_samples.last().map(|s| s.1).unwrap_or(f64::NAN);
                ObataStatus::Ok
            }
            Err(e) => status_of(&e),
        },
    )
}
