use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use iverson_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = iverson_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn family_eval_and_errors() {
    unsafe {
        let mut fam = ptr::null_mut();
        let spec = c("kind = \"sub_case_ii\"\na = 1\nc = 1\nrho = 1\nr = 1\nepsilon = 0");
        assert_eq!(iverson_family_new(spec.as_ptr(), &mut fam), IversonStatus::Ok);
        let mut v = 0.0;
        assert_eq!(iverson_family_eval(fam, 2.0, 0.5, &mut v), IversonStatus::Ok);
        assert_eq!(v, 2.5);
        assert_eq!(iverson_family_eval(fam, -1.0, 0.5, &mut v), IversonStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(iverson_family_eval(fam, 1.0, 0.5, ptr::null_mut()), IversonStatus::NullPointer);
        iverson_family_free(fam);
        iverson_family_free(ptr::null_mut());

        let bad = c("kind = \"nope\"");
        assert_eq!(iverson_family_new(bad.as_ptr(), &mut fam), IversonStatus::Config);
        assert!(last_error().contains("nope"));
        let bad = c("kind = \"affine_b\"\nc = 0\nd = 0");
        assert_eq!(iverson_family_new(bad.as_ptr(), &mut fam), IversonStatus::Param);
    }
}

#[test]
fn scale_round_trip() {
    unsafe {
        let mut sc = ptr::null_mut();
        let spec = c("kind = \"exp\"\na = 1\nk = 1\nb = -1");
        assert_eq!(iverson_scale_new(spec.as_ptr(), &mut sc), IversonStatus::Ok);
        let (mut y, mut x) = (0.0, 0.0);
        assert_eq!(iverson_scale_eval(sc, 0.7, &mut y), IversonStatus::Ok);
        assert_eq!(iverson_scale_invert(sc, y, &mut x), IversonStatus::Ok);
        assert!((x - 0.7).abs() < 1e-12);
        // e^t − 1 > −1
        assert_eq!(iverson_scale_invert(sc, -2.0, &mut x), IversonStatus::Range);
        iverson_scale_free(sc);
    }
}

#[test]
fn similarity_residual_through_handles() {
    unsafe {
        let (mut fam, mut gam, mut eta, mut grid) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        let f = c("kind = \"sub_case_ii\"\na = 1\nc = 1\nrho = 1\nr = 1\nepsilon = 0");
        let g = c("kind = \"lambda_only\"");
        let e = c("kind = \"power_scale\"\ntheta = -1");
        assert_eq!(iverson_family_new(f.as_ptr(), &mut fam), IversonStatus::Ok);
        assert_eq!(iverson_gamma_new(g.as_ptr(), &mut gam), IversonStatus::Ok);
        assert_eq!(iverson_eta_new(e.as_ptr(), &mut eta), IversonStatus::Ok);
        let xs: Vec<f64> = (0..20).map(|i| 0.5 + 0.125 * i as f64).collect();
        let ls: Vec<f64> = (0..10).map(|i| 0.5 + 0.15 * i as f64).collect();
        let ss: Vec<f64> = (0..10).map(|i| 0.1 + 0.1 * i as f64).collect();
        assert_eq!(
            iverson_grid_new(xs.as_ptr(), xs.len(), ls.as_ptr(), ls.len(), ss.as_ptr(), ss.len(), &mut grid),
            IversonStatus::Ok
        );
        let mut rep = std::mem::zeroed::<IversonReport>();
        assert_eq!(iverson_similarity_residual(fam, gam, eta, grid, 1e-12, &mut rep), IversonStatus::Ok);
        assert!(rep.pass && rep.max_abs <= 1e-12 && rep.evaluated > 0);

        let mut v = 0.0;
        assert_eq!(iverson_eta_eval(eta, 2.0, 1.0, &mut v), IversonStatus::Ok);
        assert_eq!(v, 0.5);
        assert_eq!(iverson_gamma_eval(gam, 3.0, 1.0, &mut v), IversonStatus::Ok);
        assert_eq!(v, 3.0);
        assert_eq!(
            iverson_similarity_residual(ptr::null(), gam, eta, grid, 1e-12, &mut rep),
            IversonStatus::NullPointer
        );
        iverson_family_free(fam);
        iverson_gamma_free(gam);
        iverson_eta_free(eta);
        iverson_grid_free(grid);
    }
}

#[test]
fn run_config_reports_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "command = \"check\"\n[eta]\nkind = \"affine_shift\"\ndelta = 1\nepsilon = 0.5\n").unwrap();
    let out = dir.path().join("out");
    let (p, o) = (c(cfg.to_str().unwrap()), c(out.to_str().unwrap()));
    let mut status = -1;
    unsafe {
        assert_eq!(iverson_run_config(p.as_ptr(), o.as_ptr(), &mut status), IversonStatus::Ok);
    }
    assert_eq!(status, 1);
    assert!(out.join("report.json").exists());
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(iverson_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/iverson.h")
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let h = header();
    assert!(h.exists(), "header missing: {}", h.display());
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&h)
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(e) => panic!("{compiler} unavailable: {e}"),
        }
    }
}

#[test]
fn header_declarations_are_usable_from_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "iverson.h"
int probe(void) {
    IversonFamily *f = NULL;
    double v = 0.0;
    IversonStatus st = iverson_family_new("kind = \"fech_exp\"\nrho_bar = 1", &f);
    if (st != IVERSON_STATUS_OK) return (int)st;
    st = iverson_family_eval(f, 1.0, 0.0, &v);
    iverson_family_free(f);
    IversonReport r;
    (void)r.worst_point[2];
    return st == IVERSON_STATUS_OK && v == 1.0 ? 0 : 1;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-c", "-Wall", "-Werror", "-std=c11", "-I"])
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg("-o")
        .arg(dir.path().join("use.o"))
        .status()
        .expect("cc available");
    assert!(status.success());
}
