use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use epilim_ffi::EpilimStatus::*;
use epilim_ffi::*;

const SQUARE: &str = r#"{"grid":{"dim":1,"min":[-2],"max":[2],"n":[5]},"values":[4,1,0,1,4]}"#;

fn from_json(s: &str) -> *mut EpilimGridFunction {
    let c = CString::new(s).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { epilim_grid_function_from_json(c.as_ptr(), &mut h) }, EPILIM_OK);
    assert!(!h.is_null());
    h
}

fn values(h: *const EpilimGridFunction) -> Vec<f64> {
    let mut n = 0usize;
    unsafe {
        assert_eq!(epilim_grid_function_len(h, &mut n), EPILIM_OK);
        let mut buf = vec![0.0; n];
        assert_eq!(epilim_grid_function_values(h, buf.as_mut_ptr(), n), EPILIM_OK);
        buf
    }
}

fn last_error() -> String {
    let p = epilim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn json_round_trip_through_a_handle() {
    let h = from_json(SQUARE);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(epilim_grid_function_to_json(h, &mut s), EPILIM_OK);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        epilim_string_free(s);
        let back = from_json(&text);
        assert_eq!(values(back), vec![4.0, 1.0, 0.0, 1.0, 4.0]);
        epilim_grid_function_free(back);
        epilim_grid_function_free(h);
    }
}

#[test]
fn conjugate_of_a_sampled_square() {
    // (x²)* on integer slopes over the window [-2, 2]: max_x (s·x − x²).
    let h = from_json(SQUARE);
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(epilim_conjugate(h, -2.0, 2.0, 5, &mut c), EPILIM_OK);
    }
    let got = values(c);
    let want: Vec<f64> = [-2.0f64, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|&s| [-2.0f64, -1.0, 0.0, 1.0, 2.0].iter().map(|&x| s * x - x * x).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    assert_eq!(got, want);
    let mut at = 0.0;
    unsafe {
        assert_eq!(epilim_grid_function_at(c, [1.0].as_ptr(), 1, &mut at), EPILIM_OK);
        assert_eq!(at, 0.0);
        assert_eq!(epilim_grid_function_at(c, [0.5].as_ptr(), 1, &mut at), EPILIM_INVALID_INPUT);
        epilim_grid_function_free(c);
        epilim_grid_function_free(h);
    }
}

#[test]
fn biconjugate_fills_a_nonconvex_dip() {
    let h = from_json(r#"{"grid":{"dim":1,"min":[0],"max":[4],"n":[5]},"values":[0,3,"inf",1,2]}"#);
    let mut b = ptr::null_mut();
    unsafe { assert_eq!(epilim_biconjugate(h, &mut b), EPILIM_OK) };
    let v = values(b);
    // Lower hull of (0,0), (1,3), (3,1), (4,2): the chord from 0 to 3 has slope 1/3.
    let want = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0];
    for (a, w) in v.iter().zip(want) {
        assert!((a - w).abs() < 1e-12, "{v:?}");
    }
    unsafe {
        epilim_grid_function_free(b);
        epilim_grid_function_free(h);
    }
}

#[test]
fn infconv_with_an_indicator_of_zero_is_identity() {
    let f = from_json(SQUARE);
    let g = from_json(r#"{"grid":{"dim":1,"min":[-2],"max":[2],"n":[5]},"values":["inf","inf",0,"inf","inf"]}"#);
    let mut out = ptr::null_mut();
    unsafe { assert_eq!(epilim_infconv(f, g, &mut out), EPILIM_OK) };
    assert_eq!(values(out), values(f));
    unsafe {
        epilim_grid_function_free(out);
        epilim_grid_function_free(g);
        epilim_grid_function_free(f);
    }
}

#[test]
fn infinities_cross_as_ieee_values() {
    let h = from_json(r#"{"grid":{"dim":1,"min":[0],"max":[1],"n":[2]},"values":["inf","-inf"]}"#);
    assert_eq!(values(h), vec![f64::INFINITY, f64::NEG_INFINITY]);
    unsafe { epilim_grid_function_free(h) };
}

#[test]
fn errors_set_status_and_message() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(epilim_grid_function_from_json(ptr::null(), &mut h), EPILIM_NULL_POINTER);
        assert!(last_error().contains("json"));
        let bad = CString::new(r#"{"grid":{"dim":1,"min":[0],"max":[1],"n":[3]},"values":[1]}"#).unwrap();
        assert_eq!(epilim_grid_function_from_json(bad.as_ptr(), &mut h), EPILIM_INVALID_INPUT);
        assert!(h.is_null());
        assert!(!last_error().is_empty());
        let junk = CString::new("not json").unwrap();
        assert_eq!(epilim_grid_function_from_json(junk.as_ptr(), &mut h), EPILIM_INVALID_INPUT);
        assert_eq!(epilim_grid_function_from_json(junk.as_ptr(), ptr::null_mut()), EPILIM_NULL_POINTER);

        let mut n = 0usize;
        assert_eq!(epilim_grid_function_len(ptr::null(), &mut n), EPILIM_NULL_POINTER);
        let f = from_json(SQUARE);
        assert!(epilim_last_error().is_null(), "a successful call clears the message");
        let mut buf = [0.0; 3];
        assert_eq!(epilim_grid_function_values(f, buf.as_mut_ptr(), 3), EPILIM_INVALID_INPUT);
        let mut c = ptr::null_mut();
        assert_eq!(epilim_conjugate(f, 1.0, -1.0, 5, &mut c), EPILIM_INVALID_INPUT);
        assert!(c.is_null());
        epilim_grid_function_free(f);
        epilim_grid_function_free(ptr::null_mut());
        epilim_string_free(ptr::null_mut());
    }
}

#[test]
fn verify_returns_report_json() {
    let name = CString::new("example7").unwrap();
    let profile = CString::new("quick").unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { epilim_verify(name.as_ptr(), 7, profile.as_ptr(), &mut out) };
    assert_eq!(status, EPILIM_OK);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { epilim_string_free(out) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["report_v"], epilim_report_version());
    assert_eq!(v["pass"], true);
    assert_eq!(v["scenarios"][0]["scenario"], "example7");

    let unknown = CString::new("no-such-scenario").unwrap();
    let status = unsafe { epilim_verify(unknown.as_ptr(), 7, ptr::null(), &mut out) };
    assert_eq!(status, EPILIM_INVALID_INPUT);
    assert!(out.is_null());
    let bad_profile = CString::new("huge").unwrap();
    let status = unsafe { epilim_verify(name.as_ptr(), 7, bad_profile.as_ptr(), &mut out) };
    assert_eq!(status, EPILIM_INVALID_INPUT);
}

fn header() -> (PathBuf, String) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("epilim.h");
    let text = std::fs::read_to_string(&path).expect("build script writes the header");
    (path, text)
}

#[test]
fn header_declares_every_entry_point() {
    let (_, h) = header();
    for name in [
        "epilim_report_version",
        "epilim_last_error",
        "epilim_string_free",
        "epilim_grid_function_from_json",
        "epilim_grid_function_free",
        "epilim_grid_function_to_json",
        "epilim_grid_function_len",
        "epilim_grid_function_values",
        "epilim_grid_function_at",
        "epilim_conjugate",
        "epilim_biconjugate",
        "epilim_infconv",
        "epilim_verify",
    ] {
        assert!(h.contains(&format!(" {name}(")) || h.contains(&format!("*{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct EpilimGridFunction EpilimGridFunction;"));
    for (code, value) in [("EPILIM_OK", 0), ("EPILIM_NULL_POINTER", 1), ("EPILIM_INVALID_INPUT", 2), ("EPILIM_UNSUPPORTED", 3), ("EPILIM_CHECK_FAILED", 4), ("EPILIM_INTERNAL", 5)] {
        assert!(h.contains(&format!("{code} = {value},")), "{code}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let (path, _) = header();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(compiler).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang]).arg(&path).output() else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
