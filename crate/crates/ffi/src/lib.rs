//! C ABI for the epilim toolkit.
//!
//! Grid functions cross the boundary as opaque handles created from JSON.
//! Every fallible call returns an [`EpilimStatus`]; on anything other than
//! `EPILIM_OK` the message is available from [`epilim_last_error`] until the
//! next call on the same thread. Strings handed out by the library must be
//! released with [`epilim_string_free`], handles with
//! [`epilim_grid_function_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use epilim::legendre::{biconjugate, conjugate, infconv};
use epilim::scenarios::{run_all, run_scenario, Profile, SuiteReport, REPORT_VERSION};
use epilim::{DualGrid, Error, Grid, GridFunction};

/// Result codes shared by every entry point.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpilimStatus {
    EPILIM_OK = 0,
    EPILIM_NULL_POINTER = 1,
    EPILIM_INVALID_INPUT = 2,
    EPILIM_UNSUPPORTED = 3,
    /// The computation ran but at least one check failed or was refused.
    EPILIM_CHECK_FAILED = 4,
    EPILIM_INTERNAL = 5,
}

use EpilimStatus::*;

/// Opaque grid function.
pub struct EpilimGridFunction {
    inner: GridFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> EpilimStatus {
    match e {
        Error::InvalidInput(_) | Error::Json(_) | Error::UndefinedSum => EPILIM_INVALID_INPUT,
        Error::Unsupported(_) => EPILIM_UNSUPPORTED,
        Error::Refused(_) => EPILIM_CHECK_FAILED,
    }
}

/// Runs `body`, turning library errors and panics into status codes.
fn guarded(body: impl FnOnce() -> Result<EpilimStatus, (EpilimStatus, String)>) -> EpilimStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            EPILIM_INTERNAL
        }
    }
}

fn lib<T>(r: epilim::Result<T>) -> Result<T, (EpilimStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (EpilimStatus, String) {
    (EPILIM_NULL_POINTER, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (EpilimStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (EPILIM_INVALID_INPUT, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(p: *const EpilimGridFunction, what: &str) -> Result<&'a GridFunction, (EpilimStatus, String)> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null(what))
}

fn give_string(s: String) -> Result<*mut c_char, (EpilimStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|_| (EPILIM_INTERNAL, "output contains a NUL byte".into()))
}

fn give_handle(f: GridFunction) -> *mut EpilimGridFunction {
    Box::into_raw(Box::new(EpilimGridFunction { inner: f }))
}

/// Version of the report JSON schema produced by [`epilim_verify`].
#[no_mangle]
pub extern "C" fn epilim_report_version() -> u32 {
    REPORT_VERSION
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn epilim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn epilim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a grid function from its JSON encoding.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn epilim_grid_function_from_json(json: *const c_char, out: *mut *mut EpilimGridFunction) -> EpilimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let f = lib(GridFunction::from_json(text))?;
        *out = give_handle(f);
        Ok(EPILIM_OK)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `f` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn epilim_grid_function_free(f: *mut EpilimGridFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// JSON encoding of a grid function; free the result with [`epilim_string_free`].
///
/// # Safety
/// `f` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn epilim_grid_function_to_json(f: *const EpilimGridFunction, out: *mut *mut c_char) -> EpilimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let f = handle(f, "f")?;
        *out = give_string(f.to_json())?;
        Ok(EPILIM_OK)
    })
}

/// Number of grid nodes.
///
/// # Safety
/// `f` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn epilim_grid_function_len(f: *const EpilimGridFunction, out: *mut usize) -> EpilimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = handle(f, "f")?.len();
        Ok(EPILIM_OK)
    })
}

/// Copies the values into `buf` in row-major order, with `±INFINITY` for
/// infinite entries. `len` must equal the node count.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn epilim_grid_function_values(f: *const EpilimGridFunction, buf: *mut f64, len: usize) -> EpilimStatus {
    guarded(|| {
        let f = handle(f, "f")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != f.len() {
            return Err((EPILIM_INVALID_INPUT, format!("buffer holds {len} values, function has {}", f.len())));
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for (d, v) in dst.iter_mut().zip(&f.values) {
            *d = v.to_f64();
        }
        Ok(EPILIM_OK)
    })
}

/// Value at a grid node given by its coordinates (`dim` of them).
///
/// # Safety
/// `point` must point to `dim` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn epilim_grid_function_at(f: *const EpilimGridFunction, point: *const f64, dim: usize, out: *mut f64) -> EpilimStatus {
    guarded(|| {
        let f = handle(f, "f")?;
        if point.is_null() {
            return Err(null("point"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if dim != f.grid.dim {
            return Err((EPILIM_INVALID_INPUT, format!("point has dimension {dim}, grid has {}", f.grid.dim)));
        }
        let p = std::slice::from_raw_parts(point, dim);
        match f.at(p) {
            Some(v) => {
                *out = v.to_f64();
                Ok(EPILIM_OK)
            }
            None => Err((EPILIM_INVALID_INPUT, "point is not a grid node".into())),
        }
    })
}

/// Conjugate `f*` on the dual window `[dual_min, dual_max]^d` with
/// `dual_n` nodes per axis.
///
/// # Safety
/// `f` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn epilim_conjugate(
    f: *const EpilimGridFunction,
    dual_min: f64,
    dual_max: f64,
    dual_n: usize,
    out: *mut *mut EpilimGridFunction,
) -> EpilimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let f = handle(f, "f")?;
        let dual = match f.grid.dim {
            1 => lib(DualGrid::line(dual_min, dual_max, dual_n))?,
            d => DualGrid(lib(Grid::unanchored(d, vec![dual_min; d], vec![dual_max; d], vec![dual_n; d]))?),
        };
        let r = lib(conjugate(f, &dual))?;
        *out = give_handle(r.function);
        Ok(EPILIM_OK)
    })
}

/// Closed convex envelope `f**` on the grid of `f`.
///
/// # Safety
/// `f` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn epilim_biconjugate(f: *const EpilimGridFunction, out: *mut *mut EpilimGridFunction) -> EpilimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let f = handle(f, "f")?;
        *out = give_handle(lib(biconjugate(f))?);
        Ok(EPILIM_OK)
    })
}

/// Infimal convolution `f □ g` of two functions on compatible grids.
///
/// # Safety
/// `f` and `g` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn epilim_infconv(
    f: *const EpilimGridFunction,
    g: *const EpilimGridFunction,
    out: *mut *mut EpilimGridFunction,
) -> EpilimStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let f = handle(f, "f")?;
        let g = handle(g, "g")?;
        *out = give_handle(lib(infconv(f, g))?);
        Ok(EPILIM_OK)
    })
}

/// Runs one scenario, or all of them when `scenario` is `"all"`, and writes
/// the suite report JSON to `out_json`. `profile` is `"quick"`, `"full"` or
/// null for quick. Returns `EPILIM_CHECK_FAILED` when the report does not
/// pass; the JSON is written in that case too.
///
/// # Safety
/// String arguments must be NUL-terminated and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn epilim_verify(
    scenario: *const c_char,
    seed: u64,
    profile: *const c_char,
    out_json: *mut *mut c_char,
) -> EpilimStatus {
    guarded(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        *out_json = ptr::null_mut();
        let name = read_str(scenario, "scenario")?;
        let profile: Profile = if profile.is_null() {
            Profile::Quick
        } else {
            lib(read_str(profile, "profile")?.parse())?
        };
        let suite = if name == "all" {
            lib(run_all(seed, profile))?
        } else {
            SuiteReport::new(seed, profile, vec![lib(run_scenario(name, seed, profile))?])
        };
        *out_json = give_string(suite.to_json())?;
        Ok(if suite.pass { EPILIM_OK } else { EPILIM_CHECK_FAILED })
    })
}
