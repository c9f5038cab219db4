//! C ABI over `finray-core`.
//!
//! Every fallible function returns a [`FinrayStatus`] and writes results
//! through out-pointers. On failure the message is available from
//! [`finray_last_error`] on the same thread. Handles are created by `*_new`
//! functions and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finray_core::characterize::{
    calibrate, extrapolate_stiffness, fit_viscoelastic, identify_stiffness_elastic, principal_axis, strength_sweep,
    CalibrationAnchor, FailureMode, ProbePlan, StiffnessMatrix, StrengthSettings, ViscoSample, AXIAL_PUSH,
};
use finray_core::geometry::{build_frame, rib_count, FingerDesign};
use finray_core::insertion::{
    simulate_insert, tolerance_window, InsertionScenario, Outcome, StrategyParams, WindowAxis,
};
use finray_core::material::builtin_material;
use finray_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinrayStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownEntity = 3,
    Numerical = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinrayAxis {
    X = 0,
    Y = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinrayOutcome {
    Success = 0,
    Jammed = 1,
    Missed = 2,
    Overforce = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinrayFailureMode {
    Yield = 0,
    Buckling = 1,
}

/// Fingertip stiffness, N/mm.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FinrayStiffness {
    pub kxx: f64,
    pub kyy: f64,
    pub kzz: f64,
    pub kzy: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinrayStrength {
    /// N
    pub max_force: f64,
    /// mm
    pub max_deflection: f64,
    pub failure_mode: FinrayFailureMode,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinrayWindow {
    pub min_offset: f64,
    pub max_offset: f64,
    pub window: f64,
    pub limiting_outcome: FinrayOutcome,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinrayInsertResult {
    pub outcome: FinrayOutcome,
    /// N
    pub peak_contact_force: f64,
    /// mm
    pub insert_depth: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FinrayViscoFit {
    pub k: f64,
    pub b: f64,
    pub residual_rms: f64,
}

/// Opaque finger design.
pub struct FinrayDesign {
    inner: FingerDesign,
}

/// Opaque insertion scenario with its search strategy.
pub struct FinrayScenario {
    inner: InsertionScenario,
    strategy: StrategyParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FinrayStatus {
    match e {
        Error::UnknownEntity { .. } | Error::UnknownMaterial(_) => FinrayStatus::UnknownEntity,
        Error::Invalid(_)
        | Error::Domain(_)
        | Error::Config(_)
        | Error::AlreadyCalibrated(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => FinrayStatus::InvalidArgument,
        _ => FinrayStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FinrayStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FinrayStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("`{name}` is null"));
            FinrayStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            FinrayStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

fn stiffness_matrix(k: &FinrayStiffness) -> StiffnessMatrix {
    StiffnessMatrix::new(k.kxx, k.kyy, k.kzz, k.kzy)
}

fn outcome(o: Outcome) -> FinrayOutcome {
    match o {
        Outcome::Success => FinrayOutcome::Success,
        Outcome::Jammed => FinrayOutcome::Jammed,
        Outcome::Missed => FinrayOutcome::Missed,
        Outcome::Overforce => FinrayOutcome::Overforce,
    }
}

fn axis(a: FinrayAxis) -> WindowAxis {
    match a {
        FinrayAxis::X => WindowAxis::X,
        FinrayAxis::Y => WindowAxis::Y,
    }
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn finray_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn finray_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a design with the default envelope, notched contact-plane tip and
/// 10° mount. `material` is a builtin name such as `"PLA+"` or `"PETG"`.
///
/// # Safety
/// `material` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finray_design_new(
    infill_direction: f64,
    infill_density: f64,
    material: *const c_char,
    out: *mut *mut FinrayDesign,
) -> FinrayStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        if material.is_null() {
            return Err(Failure::Null("material"));
        }
        let name = CStr::from_ptr(material)
            .to_str()
            .map_err(|_| Error::Invalid("material name is not UTF-8".into()))?;
        let design = FingerDesign::new(infill_direction, infill_density).with_material(builtin_material(name)?);
        design.validate()?;
        *out = Box::into_raw(Box::new(FinrayDesign { inner: design }));
        Ok(())
    })
}

/// # Safety
/// `design` must come from [`finray_design_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn finray_design_free(design: *mut FinrayDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn finray_design_set_mount_angle(design: *mut FinrayDesign, degrees: f64) -> FinrayStatus {
    guard(|| {
        let d = deref_mut(design, "design")?;
        let mut next = d.inner.clone();
        next.mount_angle = degrees;
        next.validate()?;
        d.inner = next;
        Ok(())
    })
}

/// Modulus scale that makes `anchor` reproduce `measured_kyy`.
///
/// # Safety
/// `anchor` must be a live handle and `out_scale` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finray_calibration_scale(
    anchor: *const FinrayDesign,
    measured_kyy: f64,
    elems_per_member: usize,
    out_scale: *mut f64,
) -> FinrayStatus {
    guard(|| {
        let d = &deref(anchor, "anchor")?.inner;
        let out = deref_mut(out_scale, "out_scale")?;
        let a = CalibrationAnchor {
            design: d.clone(),
            measured_kyy,
        };
        *out = calibrate(d, &a, &ProbePlan::default(), elems_per_member)?;
        Ok(())
    })
}

/// Applies a calibration scale to the design's material. A design can be
/// calibrated once.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn finray_design_calibrate(design: *mut FinrayDesign, scale: f64) -> FinrayStatus {
    guard(|| {
        let d = deref_mut(design, "design")?;
        d.inner.material = d.inner.material.calibrated(scale)?;
        Ok(())
    })
}

/// # Safety
/// `design` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finray_design_rib_count(
    design: *const FinrayDesign,
    elems_per_member: usize,
    out: *mut usize,
) -> FinrayStatus {
    guard(|| {
        let d = &deref(design, "design")?.inner;
        let out = deref_mut(out, "out")?;
        *out = rib_count(&build_frame(d, elems_per_member)?);
        Ok(())
    })
}

/// Identifies the fingertip stiffness with the default probe plan.
///
/// # Safety
/// `design` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finray_design_stiffness(
    design: *const FinrayDesign,
    elems_per_member: usize,
    out: *mut FinrayStiffness,
) -> FinrayStatus {
    guard(|| {
        let d = &deref(design, "design")?.inner;
        let out = deref_mut(out, "out")?;
        let (k, _) = identify_stiffness_elastic(&build_frame(d, elems_per_member)?, &ProbePlan::default(), 8)?;
        *out = FinrayStiffness {
            kxx: k.kxx,
            kyy: k.kyy,
            kzz: k.kzz,
            kzy: k.kzy,
        };
        Ok(())
    })
}

/// Axial push to first yield or instability.
///
/// # Safety
/// `design` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finray_design_strength(
    design: *const FinrayDesign,
    elems_per_member: usize,
    out: *mut FinrayStrength,
) -> FinrayStatus {
    guard(|| {
        let d = &deref(design, "design")?.inner;
        let out = deref_mut(out, "out")?;
        let r = strength_sweep(
            &build_frame(d, elems_per_member)?,
            AXIAL_PUSH,
            &StrengthSettings::default(),
        )?;
        *out = FinrayStrength {
            max_force: r.max_force,
            max_deflection: r.max_deflection,
            failure_mode: match r.failure_mode {
                FailureMode::Yield => FinrayFailureMode::Yield,
                FailureMode::Buckling => FinrayFailureMode::Buckling,
            },
        };
        Ok(())
    })
}

/// Angle of the stiff principal axis from z toward y, degrees.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn finray_principal_angle(k: *const FinrayStiffness, out_degrees: *mut f64) -> FinrayStatus {
    guard(|| {
        let k = deref(k, "k")?;
        let out = deref_mut(out_degrees, "out_degrees")?;
        *out = principal_axis(&stiffness_matrix(k))?.angle_deg;
        Ok(())
    })
}

/// Line through (`angle_a`, `k_a`) and (`angle_b`, `k_b`) evaluated at `target`.
///
/// # Safety
/// `out_value` must be valid; `out_slope` may be null.
#[no_mangle]
pub unsafe extern "C" fn finray_extrapolate_stiffness(
    angle_a: f64,
    k_a: f64,
    angle_b: f64,
    k_b: f64,
    target: f64,
    out_value: *mut f64,
    out_slope: *mut f64,
) -> FinrayStatus {
    guard(|| {
        let value = deref_mut(out_value, "out_value")?;
        let e = extrapolate_stiffness(&[(angle_a, k_a), (angle_b, k_b)], target)?;
        *value = e.value;
        if let Some(slope) = out_slope.as_mut() {
            *slope = e.slope;
        }
        Ok(())
    })
}

/// Least-squares fit of `F = k δ + b δ̇` to `n` samples.
///
/// # Safety
/// The three arrays must hold `n` values each; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn finray_fit_viscoelastic(
    displacement: *const f64,
    velocity: *const f64,
    force: *const f64,
    n: usize,
    out: *mut FinrayViscoFit,
) -> FinrayStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        for (p, name) in [(displacement, "displacement"), (velocity, "velocity"), (force, "force")] {
            if p.is_null() {
                return Err(Failure::Null(name));
            }
        }
        let (d, v, f) = (
            std::slice::from_raw_parts(displacement, n),
            std::slice::from_raw_parts(velocity, n),
            std::slice::from_raw_parts(force, n),
        );
        let samples: Vec<ViscoSample> = (0..n)
            .map(|i| ViscoSample {
                displacement: d[i],
                velocity: v[i],
                force: f[i],
            })
            .collect();
        let fit = fit_viscoelastic(&samples)?;
        *out = FinrayViscoFit {
            k: fit.k,
            b: fit.b,
            residual_rms: fit.residual_rms,
        };
        Ok(())
    })
}

/// Default connector insertion gripped by two fingers of stiffness `k`, with
/// the default search strategy.
///
/// # Safety
/// `k` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn finray_scenario_new(k: *const FinrayStiffness, out: *mut *mut FinrayScenario) -> FinrayStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let s = InsertionScenario::new(stiffness_matrix(deref(k, "k")?));
        s.validate()?;
        *out = Box::into_raw(Box::new(FinrayScenario {
            inner: s,
            strategy: StrategyParams::default(),
        }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from [`finray_scenario_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn finray_scenario_free(scenario: *mut FinrayScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Socket offset along one axis, mm. The other axis is reset to zero.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn finray_scenario_set_misalignment(
    scenario: *mut FinrayScenario,
    axis_: FinrayAxis,
    offset: f64,
) -> FinrayStatus {
    guard(|| {
        let s = deref_mut(scenario, "scenario")?;
        let next = s.inner.with_misalignment(axis(axis_), offset);
        next.validate()?;
        s.inner = next;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn finray_scenario_set_clearance(scenario: *mut FinrayScenario, clearance: f64) -> FinrayStatus {
    guard(|| {
        let s = deref_mut(scenario, "scenario")?;
        let mut next = s.inner;
        next.clearance = clearance;
        next.validate()?;
        s.inner = next;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finray_simulate_insert(
    scenario: *const FinrayScenario,
    out: *mut FinrayInsertResult,
) -> FinrayStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let out = deref_mut(out, "out")?;
        let t = simulate_insert(&s.inner, &s.strategy)?;
        *out = FinrayInsertResult {
            outcome: outcome(t.outcome),
            peak_contact_force: t.peak_contact_force,
            insert_depth: t.insert_depth,
        };
        Ok(())
    })
}

/// Misalignment window along `axis_` scanned at `step` mm.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn finray_tolerance_window(
    scenario: *const FinrayScenario,
    axis_: FinrayAxis,
    step: f64,
    out: *mut FinrayWindow,
) -> FinrayStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let out = deref_mut(out, "out")?;
        let w = tolerance_window(&s.inner, &s.strategy, axis(axis_), step)?;
        *out = FinrayWindow {
            min_offset: w.min_offset,
            max_offset: w.max_offset,
            window: w.window,
            limiting_outcome: outcome(w.limiting_outcome),
        };
        Ok(())
    })
}
