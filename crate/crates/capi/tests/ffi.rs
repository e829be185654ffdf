//! Drives the C surface the way a foreign caller would: through raw
//! pointers and status codes only.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use open_markov_capi::*;

fn parse(text: &str) -> *mut OmpProcess {
    let text = CString::new(text).unwrap();
    let mut out: *mut OmpProcess = ptr::null_mut();
    let status = unsafe { omp_process_parse(text.as_ptr(), &mut out) };
    assert_eq!(status, OmpStatus::Ok, "{}", last_error());
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(omp_last_error_message()).to_string_lossy().into_owned() }
}

fn take_string(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let owned = unsafe { CStr::from_ptr(s).to_string_lossy().into_owned() };
    unsafe { omp_string_free(s) };
    owned
}

const LEFT: &str =
    "process L { states: x, y; edges: x -> y @ 1; inputs: s -> x; outputs: t -> y; }";
const RIGHT: &str =
    "process R { states: w, z; edges: w -> z @ 2; inputs: t -> w; outputs: u -> z; }";

#[test]
fn parse_print_round_trip() {
    let p = parse(LEFT);
    assert_eq!(unsafe { omp_process_n_states(p) }, 2);
    assert_eq!(unsafe { omp_process_n_inputs(p) }, 1);
    assert_eq!(unsafe { omp_process_n_outputs(p) }, 1);

    let mut text: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { omp_process_print(p, &mut text) }, OmpStatus::Ok);
    let rendered = take_string(text);

    // canonical output parses back to an equal process
    let q = parse(&rendered);
    let mut again: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { omp_process_print(q, &mut again) }, OmpStatus::Ok);
    assert_eq!(take_string(again), rendered);

    unsafe {
        omp_process_free(p);
        omp_process_free(q);
    }
}

#[test]
fn compose_and_tensor_produce_handles() {
    let a = parse(LEFT);
    let b = parse(RIGHT);

    let mut c: *mut OmpProcess = ptr::null_mut();
    assert_eq!(unsafe { omp_compose(a, b, &mut c) }, OmpStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { omp_process_n_states(c) }, 3);
    assert_eq!(unsafe { omp_process_n_inputs(c) }, 1);
    assert_eq!(unsafe { omp_process_n_outputs(c) }, 1);

    let mut t: *mut OmpProcess = ptr::null_mut();
    assert_eq!(unsafe { omp_tensor(a, b, &mut t) }, OmpStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { omp_process_n_states(t) }, 4);
    assert_eq!(unsafe { omp_process_n_inputs(t) }, 2);

    unsafe {
        omp_process_free(a);
        omp_process_free(b);
        omp_process_free(c);
        omp_process_free(t);
    }
}

#[test]
fn black_box_json_matches_the_command_line() {
    let p = parse(LEFT);
    let mut s: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { omp_black_box_json(p, &mut s) }, OmpStatus::Ok);
    assert_eq!(
        take_string(s),
        "{\"basis\":[[\"1\",\"1\",\"0\",\"1\"],[\"0\",\"0\",\"1\",\"0\"]],\"src_dim\":2,\"tgt_dim\":2}"
    );
    unsafe { omp_process_free(p) };
}

#[test]
fn status_codes_and_messages() {
    let mut out: *mut OmpProcess = ptr::null_mut();

    assert_eq!(
        unsafe { omp_process_parse(ptr::null(), &mut out) },
        OmpStatus::NullPointer
    );

    let bad = CString::new("process P { states a; }").unwrap();
    assert_eq!(
        unsafe { omp_process_parse(bad.as_ptr(), &mut out) },
        OmpStatus::SyntaxError
    );
    assert!(last_error().contains("expected"), "{}", last_error());

    let loopy = CString::new("process P { states: a; edges: a -> a @ 1; }").unwrap();
    assert_eq!(
        unsafe { omp_process_parse(loopy.as_ptr(), &mut out) },
        OmpStatus::SemanticError
    );
    assert!(last_error().contains("self-loop"), "{}", last_error());

    let invalid = unsafe { CString::from_vec_unchecked(vec![0xff, 0xfe]) };
    assert_eq!(
        unsafe { omp_process_parse(invalid.as_ptr(), &mut out) },
        OmpStatus::InvalidUtf8
    );

    // boundary shapes that cannot be glued
    let a = parse(LEFT);
    let b = parse("process B { states: v; inputs: q1 -> v; }");
    let mut c: *mut OmpProcess = ptr::null_mut();
    assert_eq!(unsafe { omp_compose(a, b, &mut c) }, OmpStatus::BoundaryMismatch);
    assert!(c.is_null());

    assert_eq!(unsafe { omp_compose(ptr::null(), b, &mut c) }, OmpStatus::NullPointer);

    unsafe {
        omp_process_free(a);
        omp_process_free(b);
        omp_process_free(ptr::null_mut());
        omp_string_free(ptr::null_mut());
    }
}
