use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mvcrofoot_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mvc_last_error_message()) }.to_string_lossy().into_owned()
}

fn random(d: usize, n: usize, seed: u64) -> *mut MvcInner {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { mvc_inner_random(d, n, seed, false, 0.95, &mut h) }, MvcStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn z_squared_round_trip() {
    let u0 = [1.0, 0.0];
    let zeros = [0.0, 0.0, 0.0, 0.0];
    let dirs = [1.0, 0.0, 1.0, 0.0];
    let mut h = ptr::null_mut();
    let s = unsafe { mvc_inner_assemble(1, u0.as_ptr(), 2, zeros.as_ptr(), dirs.as_ptr(), 0.95, &mut h) };
    assert_eq!(s, MvcStatus::Ok);
    assert_eq!(unsafe { (mvc_inner_dim(h), mvc_inner_degree(h)) }, (1, 2));
    let mut v = [0.0; 2];
    assert_eq!(unsafe { mvc_inner_evaluate(h, 0.0, 1.0, v.as_mut_ptr()) }, MvcStatus::Ok);
    assert!((v[0] + 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);

    let w = [0.5, 0.0];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { mvc_pair_new(h, w.as_ptr(), &mut p) }, MvcStatus::Ok);
    // Θ′(z) = (z² − 1/2)/(1 − z²/2) at z = 0.3.
    assert_eq!(unsafe { mvc_pair_theta_prime_evaluate(p, 0.3, 0.0, v.as_mut_ptr()) }, MvcStatus::Ok);
    let expect = (0.09 - 0.5) / (1.0 - 0.045);
    assert!((v[0] - expect).abs() < 1e-14, "{v:?}");

    let x = [0.3, -0.2, 1.1, 0.4];
    let mut y = [0.0; 4];
    let mut back = [0.0; 4];
    unsafe {
        assert_eq!(mvc_pair_map(p, MvcDirection::Forward, x.as_ptr(), y.as_mut_ptr()), MvcStatus::Ok);
        assert_eq!(mvc_pair_map(p, MvcDirection::Inverse, y.as_ptr(), back.as_mut_ptr()), MvcStatus::Ok);
        mvc_pair_free(p);
        mvc_inner_free(h);
    }
    let nx: f64 = x.iter().map(|a| a * a).sum();
    let ny: f64 = y.iter().map(|a| a * a).sum();
    assert!((nx - ny).abs() < 1e-12);
    for (a, b) in x.iter().zip(&back) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { mvc_inner_random(2, 1, 1, false, 0.95, &mut h) }, MvcStatus::GenerationFailed);
    assert!(h.is_null());
    assert!(last_error().starts_with("GenerationFailed"));

    let theta = random(2, 3, 7);
    let w = [1.2, 0.0, 0.0, 0.0, 0.0, 0.0, 1.2, 0.0];
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { mvc_pair_new(theta, w.as_ptr(), &mut p) }, MvcStatus::NotStrict);
    assert!(last_error().contains("strict"));

    let mut out = [0.0; 8];
    assert_eq!(unsafe { mvc_inner_evaluate(ptr::null(), 0.0, 0.0, out.as_mut_ptr()) }, MvcStatus::NullPointer);
    assert_eq!(unsafe { mvc_inner_evaluate(theta, 0.0, 0.0, ptr::null_mut()) }, MvcStatus::NullPointer);
    assert_eq!(unsafe { mvc_inner_evaluate(theta, 0.1, 0.0, out.as_mut_ptr()) }, MvcStatus::Ok);
    assert_eq!(last_error(), "");
    assert_eq!(unsafe { mvc_inner_dim(ptr::null()) }, 0);
    unsafe {
        mvc_inner_free(theta);
        mvc_inner_free(ptr::null_mut());
        mvc_pair_free(ptr::null_mut());
        mvc_string_free(ptr::null_mut());
    }
}

#[test]
fn verify_returns_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let (mut file, _) = mvcrofoot::instance::generate(&mvcrofoot::instance::GenOptions::new(2, 3, 7)).unwrap();
    file.save(&path).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let suite = CString::new("crofoot").unwrap();
    let mut report = ptr::null_mut();
    let mut passed = false;
    let s = unsafe { mvc_verify_instance(cpath.as_ptr(), suite.as_ptr(), 1e-8, 1024, &mut report, &mut passed) };
    assert_eq!(s, MvcStatus::Ok, "{}", last_error());
    assert!(passed);
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    unsafe { mvc_string_free(report) };
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["suite"], "crofoot");
    assert_eq!(json["pass"], true);

    let bad = CString::new("nope").unwrap();
    let s = unsafe { mvc_verify_instance(cpath.as_ptr(), bad.as_ptr(), 1e-8, 1024, &mut report, &mut passed) };
    assert_eq!(s, MvcStatus::Malformed);
    let missing = CString::new(dir.path().join("missing.json").to_str().unwrap()).unwrap();
    let s = unsafe { mvc_verify_instance(missing.as_ptr(), suite.as_ptr(), 1e-8, 1024, &mut report, &mut passed) };
    assert_eq!(s, MvcStatus::Io);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/mvcrofoot.h")).unwrap();
    for name in [
        "mvc_last_error_message",
        "mvc_inner_random",
        "mvc_inner_assemble",
        "mvc_inner_evaluate",
        "mvc_inner_free",
        "mvc_pair_new",
        "mvc_pair_theta_prime_evaluate",
        "mvc_pair_map",
        "mvc_pair_free",
        "mvc_verify_instance",
        "mvc_string_free",
        "typedef struct MvcInner MvcInner;",
        "MVC_STATUS_NOT_STRICT = 8",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles a small C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler on PATH; C link test not run");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = target_dir.join("libmvcrofoot_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <math.h>
#include "mvcrofoot.h"
int main(void) {
    MvcInner *h = NULL;
    if (mvc_inner_random(2, 3, 7, false, 0.95, &h) != MVC_STATUS_OK) return 10;
    double v[8];
    if (mvc_inner_evaluate(h, 1.0, 0.0, v) != MVC_STATUS_OK) return 11;
    double w[8] = {0.3, 0.0, 0.1, 0.0, 0.0, 0.0, 0.2, 0.0};
    MvcPair *p = NULL;
    if (mvc_pair_new(h, w, &p) != MVC_STATUS_OK) return 12;
    double t[8];
    if (mvc_pair_theta_prime_evaluate(p, 0.0, 0.0, t) != MVC_STATUS_OK) return 13;
    MvcInner *bad = NULL;
    if (mvc_inner_random(2, 1, 1, false, 0.95, &bad) != MVC_STATUS_GENERATION_FAILED) return 14;
    printf("%s\n", mvc_last_error_message());
    mvc_pair_free(p);
    mvc_inner_free(h);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("GenerationFailed"));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
