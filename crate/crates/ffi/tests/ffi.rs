use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use finray_core::characterize::{identify_stiffness_elastic, ProbePlan};
use finray_core::geometry::{build_frame, FingerDesign};
use finray_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(finray_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn design(dir: f64, den: f64, material: &str) -> Result<*mut FinrayDesign, FinrayStatus> {
    let name = CString::new(material).unwrap();
    let mut out = ptr::null_mut();
    match unsafe { finray_design_new(dir, den, name.as_ptr(), &mut out) } {
        FinrayStatus::Ok => Ok(out),
        s => {
            assert!(out.is_null());
            Err(s)
        }
    }
}

fn calibrated(dir: f64, den: f64) -> *mut FinrayDesign {
    let anchor = design(0.0, 0.1, "PLA+").unwrap();
    let mut scale = 0.0;
    assert_eq!(
        unsafe { finray_calibration_scale(anchor, 1.2, 2, &mut scale) },
        FinrayStatus::Ok
    );
    let d = design(dir, den, "PLA+").unwrap();
    assert_eq!(unsafe { finray_design_calibrate(d, scale) }, FinrayStatus::Ok);
    unsafe { finray_design_free(anchor) };
    d
}

#[test]
fn stiffness_matches_the_core_library() {
    let d = design(10.0, 0.2, "PETG").unwrap();
    let mut k = FinrayStiffness::default();
    assert_eq!(unsafe { finray_design_stiffness(d, 2, &mut k) }, FinrayStatus::Ok);
    let core = FingerDesign::new(10.0, 0.2).with_material(finray_core::material::builtin_material("PETG").unwrap());
    let (expected, _) = identify_stiffness_elastic(&build_frame(&core, 2).unwrap(), &ProbePlan::default(), 8).unwrap();
    assert_eq!(
        (k.kxx, k.kyy, k.kzz, k.kzy),
        (expected.kxx, expected.kyy, expected.kzz, expected.kzy)
    );
    let mut angle = 0.0;
    assert_eq!(unsafe { finray_principal_angle(&k, &mut angle) }, FinrayStatus::Ok);
    assert!(angle > 0.0 && angle < 45.0);
    unsafe { finray_design_free(d) };
}

#[test]
fn calibration_reproduces_the_anchor() {
    let d = calibrated(0.0, 0.1);
    let mut k = FinrayStiffness::default();
    assert_eq!(unsafe { finray_design_stiffness(d, 2, &mut k) }, FinrayStatus::Ok);
    assert!((k.kyy - 1.2).abs() < 1e-6, "{k:?}");
    assert_eq!(
        unsafe { finray_design_calibrate(d, 1.5) },
        FinrayStatus::InvalidArgument
    );
    assert!(last_error().contains("already calibrated"));
    unsafe { finray_design_free(d) };
}

#[test]
fn error_codes_and_messages() {
    assert_eq!(design(0.0, 0.1, "ABS"), Err(FinrayStatus::UnknownEntity));
    assert!(last_error().contains("ABS"));
    assert_eq!(design(0.0, 1.5, "PLA+"), Err(FinrayStatus::InvalidArgument));
    assert_eq!(design(55.0, 0.1, "PLA+"), Err(FinrayStatus::InvalidArgument));

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { finray_design_new(0.0, 0.1, ptr::null(), &mut out) },
        FinrayStatus::NullPointer
    );
    assert!(last_error().contains("material"));
    let name = CString::new("PLA+").unwrap();
    assert_eq!(
        unsafe { finray_design_new(0.0, 0.1, name.as_ptr(), ptr::null_mut()) },
        FinrayStatus::NullPointer
    );

    let mut k = FinrayStiffness::default();
    assert_eq!(
        unsafe { finray_design_stiffness(ptr::null(), 2, &mut k) },
        FinrayStatus::NullPointer
    );
    let d = design(0.0, 0.1, "PLA+").unwrap();
    assert_eq!(
        unsafe { finray_design_stiffness(d, 0, &mut k) },
        FinrayStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { finray_design_set_mount_angle(d, f64::NAN) },
        FinrayStatus::InvalidArgument
    );
    unsafe {
        finray_design_free(d);
        finray_design_free(ptr::null_mut());
        finray_scenario_free(ptr::null_mut());
    }
}

#[test]
fn degenerate_layout_is_a_numerical_error() {
    let d = design(0.0, 0.002, "PLA+").unwrap();
    let mut n = 0;
    assert_eq!(
        unsafe { finray_design_rib_count(d, 2, &mut n) },
        FinrayStatus::Numerical
    );
    assert!(last_error().contains("rib"));
    unsafe { finray_design_free(d) };
}

#[test]
fn rib_count_and_strength() {
    let d = calibrated(0.0, 0.1);
    let design = FingerDesign::new(0.0, 0.1);
    let mut n = 0;
    assert_eq!(unsafe { finray_design_rib_count(d, 2, &mut n) }, FinrayStatus::Ok);
    assert_eq!(
        n,
        (design.usable_height() / design.rib_pitch().unwrap()).floor() as usize
    );
    let mut s = FinrayStrength {
        max_force: 0.0,
        max_deflection: 0.0,
        failure_mode: FinrayFailureMode::Buckling,
    };
    assert_eq!(unsafe { finray_design_strength(d, 2, &mut s) }, FinrayStatus::Ok);
    assert!(s.max_force > 0.0 && s.max_deflection > 0.0);
    unsafe { finray_design_free(d) };
}

#[test]
fn extrapolation_and_viscoelastic_fit() {
    let (mut value, mut slope) = (0.0, 0.0);
    assert_eq!(
        unsafe { finray_extrapolate_stiffness(20.0, 1.533, 30.0, 1.667, 40.0, &mut value, &mut slope) },
        FinrayStatus::Ok
    );
    assert!((value - 1.801).abs() < 1e-12 && (slope - 0.0134).abs() < 1e-12);
    assert_eq!(
        unsafe { finray_extrapolate_stiffness(20.0, 1.0, 20.0, 2.0, 40.0, &mut value, ptr::null_mut()) },
        FinrayStatus::InvalidArgument
    );

    let d: Vec<f64> = (0..12).map(|i| 0.3 * i as f64).collect();
    let v: Vec<f64> = (0..12).map(|i| 2.0 + (i % 5) as f64).collect();
    let f: Vec<f64> = d.iter().zip(&v).map(|(d, v)| 1.45 * d + 0.055 * v).collect();
    let mut fit = FinrayViscoFit::default();
    assert_eq!(
        unsafe { finray_fit_viscoelastic(d.as_ptr(), v.as_ptr(), f.as_ptr(), 12, &mut fit) },
        FinrayStatus::Ok
    );
    assert!((fit.k - 1.45).abs() < 1e-9 && (fit.b - 0.055).abs() < 1e-9);
    assert_eq!(
        unsafe { finray_fit_viscoelastic(d.as_ptr(), ptr::null(), f.as_ptr(), 12, &mut fit) },
        FinrayStatus::NullPointer
    );
}

#[test]
fn insertion_through_the_abi() {
    let d = calibrated(0.0, 0.1);
    let mut k = FinrayStiffness::default();
    assert_eq!(unsafe { finray_design_stiffness(d, 2, &mut k) }, FinrayStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { finray_scenario_new(&k, &mut s) }, FinrayStatus::Ok);

    let mut r = FinrayInsertResult {
        outcome: FinrayOutcome::Missed,
        peak_contact_force: 0.0,
        insert_depth: 0.0,
    };
    assert_eq!(unsafe { finray_simulate_insert(s, &mut r) }, FinrayStatus::Ok);
    assert_eq!(r.outcome, FinrayOutcome::Success);
    assert!(r.peak_contact_force < 60.0);

    assert_eq!(
        unsafe { finray_scenario_set_misalignment(s, FinrayAxis::Y, 20.0) },
        FinrayStatus::Ok
    );
    assert_eq!(unsafe { finray_simulate_insert(s, &mut r) }, FinrayStatus::Ok);
    assert_ne!(r.outcome, FinrayOutcome::Success);
    assert_eq!(
        unsafe { finray_scenario_set_misalignment(s, FinrayAxis::Y, 0.0) },
        FinrayStatus::Ok
    );

    let mut w = FinrayWindow {
        min_offset: 0.0,
        max_offset: 0.0,
        window: 0.0,
        limiting_outcome: FinrayOutcome::Success,
    };
    assert_eq!(
        unsafe { finray_tolerance_window(s, FinrayAxis::Y, 0.5, &mut w) },
        FinrayStatus::Ok
    );
    assert!(w.window >= 5.0 && w.min_offset < 0.0 && w.max_offset > 0.0);
    assert_ne!(w.limiting_outcome, FinrayOutcome::Success);
    assert_eq!(
        unsafe { finray_tolerance_window(s, FinrayAxis::Y, -1.0, &mut w) },
        FinrayStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { finray_scenario_set_clearance(s, -0.1) },
        FinrayStatus::InvalidArgument
    );

    let bad = FinrayStiffness {
        kxx: 1.0,
        kyy: -1.0,
        kzz: 1.0,
        kzy: 0.0,
    };
    let mut t = ptr::null_mut();
    assert_ne!(unsafe { finray_scenario_new(&bad, &mut t) }, FinrayStatus::Ok);
    assert!(t.is_null());
    unsafe {
        finray_scenario_free(s);
        finray_design_free(d);
    }
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(finray_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/finray.h")).unwrap()
}

#[test]
fn header_declares_every_exported_function() {
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let h = header();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 15);
    for name in exported {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"#include <stdio.h>
#include "finray.h"

int main(void) {
  FinrayDesign *d = NULL;
  if (finray_design_new(0.0, 0.1, "PLA+", &d) != FINRAY_STATUS_OK) return 1;
  FinrayStiffness k;
  if (finray_design_stiffness(d, 2, &k) != FINRAY_STATUS_OK) return 2;
  FinrayDesign *bad = NULL;
  FinrayStatus s = finray_design_new(0.0, 0.1, "ABS", &bad);
  printf("%d %s\n", (int)s, finray_last_error());
  printf("ratio %.3f\n", k.kzz / k.kyy);
  finray_design_free(d);
  return bad == NULL ? 0 : 3;
}
"#;

#[test]
fn c_program_builds_and_runs_against_the_header() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(&main, C_PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let syntax = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&main)
        .status()
        .unwrap();
    assert!(syntax.success());

    // the static library sits next to the test binary's deps directory
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().and_then(Path::parent).map(|d| d.join("libfinray_ffi.a"));
    let Some(lib) = lib.filter(|l| l.exists()) else { return };
    let bin = dir.path().join("main");
    let link = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&main)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(link.success());
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{run:?}");
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(
        stdout.starts_with(&format!(
            "{} unknown material `ABS`",
            FinrayStatus::UnknownEntity as i32
        )),
        "{stdout}"
    );
    assert!(stdout.contains("ratio 20."), "{stdout}");
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
