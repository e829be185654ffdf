//! C ABI over the process file format and the composition operations.
//!
//! Every object crosses the boundary as an opaque pointer owned by this
//! library; callers get them from constructors, hand them back to `_free`,
//! and never look inside. Functions return a status code, and on any
//! failure a message is parked in thread-local storage where
//! `omp_last_error_message` can read it until the next failing call on the
//! same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use open_markov::cli::{black_box_json, from_open_markov, parse_process, print_process, to_open_markov};
use open_markov::markov::{compose_open, tensor_open, OpenMarkov};
use open_markov::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Input text was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The text failed to parse; the message carries line and column.
    SyntaxError = 3,
    /// The document parsed but broke an invariant.
    SemanticError = 4,
    /// Two processes could not be combined along their boundaries.
    BoundaryMismatch = 5,
    /// Any other error from the underlying library.
    InternalError = 6,
}

/// An open Markov process together with its document name.
pub struct OmpProcess {
    name: String,
    inner: OpenMarkov,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: OmpStatus, msg: &str) -> OmpStatus {
    let sanitized = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
    status
}

fn fail_with(e: Error) -> OmpStatus {
    let status = match e {
        Error::Syntax { .. } => OmpStatus::SyntaxError,
        Error::Semantic(_) => OmpStatus::SemanticError,
        Error::BoundaryMismatch(_) | Error::SharedBoundaryMismatch(_) => {
            OmpStatus::BoundaryMismatch
        }
        _ => OmpStatus::InternalError,
    };
    fail(status, &e.to_string())
}

/// The message left behind by the most recent failing call on this thread.
/// The pointer stays valid until the next failing call on the same thread.
/// Never returns null; before any failure the message is empty.
#[no_mangle]
pub extern "C" fn omp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_utf8<'a>(text: *const c_char) -> Result<&'a str, OmpStatus> {
    if text.is_null() {
        return Err(fail(OmpStatus::NullPointer, "text pointer is null"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| fail(OmpStatus::InvalidUtf8, "text is not valid UTF-8"))
}

unsafe fn deref<'a>(p: *const OmpProcess, what: &str) -> Result<&'a OmpProcess, OmpStatus> {
    p.as_ref()
        .ok_or_else(|| fail(OmpStatus::NullPointer, &format!("{what} pointer is null")))
}

fn give_process(out: *mut *mut OmpProcess, value: OmpProcess) -> OmpStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    OmpStatus::Ok
}

fn give_string(out: *mut *mut c_char, value: String) -> OmpStatus {
    let s = CString::new(value.replace('\0', " ")).unwrap();
    unsafe { *out = s.into_raw() };
    OmpStatus::Ok
}

/// Parses a process document and hands back an owned handle through `out`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must point to writable
/// memory for one pointer. On success the handle must eventually go back
/// to `omp_process_free`.
#[no_mangle]
pub unsafe extern "C" fn omp_process_parse(
    text: *const c_char,
    out: *mut *mut OmpProcess,
) -> OmpStatus {
    if out.is_null() {
        return fail(OmpStatus::NullPointer, "out pointer is null");
    }
    let text = match read_utf8(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let doc = match parse_process(text) {
        Ok(d) => d,
        Err(e) => return fail_with(e),
    };
    match to_open_markov(&doc) {
        Ok(inner) => give_process(out, OmpProcess { name: doc.name, inner }),
        Err(e) => fail_with(e),
    }
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn omp_process_free(p: *mut OmpProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Renders the canonical document for a process. The string goes back to
/// `omp_string_free`.
///
/// # Safety
/// `p` must be a live handle; `out` must point to writable memory for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn omp_process_print(
    p: *const OmpProcess,
    out: *mut *mut c_char,
) -> OmpStatus {
    if out.is_null() {
        return fail(OmpStatus::NullPointer, "out pointer is null");
    }
    match deref(p, "process") {
        Ok(p) => give_string(out, print_process(&from_open_markov(&p.name, &p.inner))),
        Err(s) => s,
    }
}

/// Number of internal states, or 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn omp_process_n_states(p: *const OmpProcess) -> usize {
    p.as_ref().map_or(0, |p| p.inner.states().len())
}

/// Number of input boundary points, or 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn omp_process_n_inputs(p: *const OmpProcess) -> usize {
    p.as_ref().map_or(0, |p| p.inner.inputs().len())
}

/// Number of output boundary points, or 0 for a null handle.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn omp_process_n_outputs(p: *const OmpProcess) -> usize {
    p.as_ref().map_or(0, |p| p.inner.outputs().len())
}

/// Glues `a`'s outputs to `b`'s inputs and hands back the composite.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must point to writable memory
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn omp_compose(
    a: *const OmpProcess,
    b: *const OmpProcess,
    out: *mut *mut OmpProcess,
) -> OmpStatus {
    if out.is_null() {
        return fail(OmpStatus::NullPointer, "out pointer is null");
    }
    let (a, b) = match (deref(a, "left process"), deref(b, "right process")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match compose_open(&a.inner, &b.inner) {
        Ok(m) => give_process(out, OmpProcess { name: format!("{}_{}", a.name, b.name), inner: m }),
        Err(e) => fail_with(e),
    }
}

/// Puts `a` and `b` side by side and hands back the sum.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must point to writable memory
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn omp_tensor(
    a: *const OmpProcess,
    b: *const OmpProcess,
    out: *mut *mut OmpProcess,
) -> OmpStatus {
    if out.is_null() {
        return fail(OmpStatus::NullPointer, "out pointer is null");
    }
    let (a, b) = match (deref(a, "left process"), deref(b, "right process")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match tensor_open(&a.inner, &b.inner) {
        Ok(m) => {
            give_process(out, OmpProcess { name: format!("{}_x_{}", a.name, b.name), inner: m })
        }
        Err(e) => fail_with(e),
    }
}

/// Renders the steady-state boundary relation as one line of JSON. The
/// string goes back to `omp_string_free`.
///
/// # Safety
/// `p` must be a live handle; `out` must point to writable memory for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn omp_black_box_json(
    p: *const OmpProcess,
    out: *mut *mut c_char,
) -> OmpStatus {
    if out.is_null() {
        return fail(OmpStatus::NullPointer, "out pointer is null");
    }
    match deref(p, "process") {
        Ok(p) => give_string(out, black_box_json(&p.inner)),
        Err(s) => s,
    }
}

/// Releases a string produced by this library. Null is ignored.
///
/// # Safety
/// `s` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn omp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
