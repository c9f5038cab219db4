use super::*;
use crate::geometry::{Element, MemberKind, Support};
use crate::material::{builtin_material, SectionProperties};
use approx::assert_relative_eq;
use nalgebra::{Point2, Rotation2};
use proptest::prelude::*;

const E: f64 = 1900.0;

/// Vertical cantilever of `n` elements, fixed at the origin, tip at the top.
fn cantilever(length: f64, n: usize, thickness: f64) -> PlanarFrame {
    let nodes = (0..=n)
        .map(|i| Point2::new(0.0, length * i as f64 / n as f64))
        .collect();
    let section = SectionProperties::rectangle(thickness, 15.0);
    let elements = (0..n)
        .map(|i| Element {
            node_i: i,
            node_j: i + 1,
            section,
            material: 0,
            kind: MemberKind::Generic,
        })
        .collect();
    PlanarFrame {
        nodes,
        elements,
        materials: vec![builtin_material("PLA+").unwrap()],
        supports: vec![Support::fixed(0)],
        tip_node: n,
    }
}

fn small_plan() -> ProbePlan {
    ProbePlan {
        y_amplitude: 0.5,
        z_amplitude: 0.005,
        ..ProbePlan::default()
    }
}

#[test]
fn principal_axis_closed_form() {
    let k = StiffnessMatrix::new(2.9, 1.2, 40.0, 2.0);
    let p = principal_axis(&k).unwrap();
    // eigenpairs of [[a, c], [c, d]] by hand
    let (a, c, d) = (1.2f64, 2.0f64, 40.0f64);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (d - a).powi(2) + c * c).sqrt();
    let stiff = mean + rad;
    // stiff eigenvector (c, stiff - a): angle from z toward y
    let angle = (c / (stiff - a)).atan().to_degrees();
    assert_relative_eq!(p.k_stiff, stiff, max_relative = 1e-12);
    assert_relative_eq!(p.k_soft, mean - rad, max_relative = 1e-12);
    assert_relative_eq!(p.angle_deg, angle, epsilon = 1e-10);
    assert!((p.angle_deg - 2.95).abs() < 0.01);
}

#[test]
fn decoupled_axis_is_zero() {
    let p = principal_axis(&StiffnessMatrix::new(2.9, 1.2, 40.0, 0.0)).unwrap();
    assert_eq!(p.angle_deg, 0.0);
    assert_relative_eq!(p.k_soft, 1.2);
    assert_relative_eq!(p.k_stiff, 40.0);
}

#[test]
fn indefinite_block_rejected() {
    let k = StiffnessMatrix::new(2.9, 1.0, 4.0, 3.0);
    assert!(matches!(principal_axis(&k), Err(Error::NotPositiveDefinite(_))));
}

proptest! {
    #[test]
    fn principal_axis_scale_invariant_and_bracketing(
        kyy in 0.1f64..10.0, kzz in 10.0f64..100.0, r in -0.9f64..0.9, s in 0.01f64..100.0
    ) {
        let kzy = r * (kyy * kzz).sqrt();
        let k = StiffnessMatrix::new(2.9, kyy, kzz, kzy);
        let p = principal_axis(&k).unwrap();
        let q = principal_axis(&k.scaled(s)).unwrap();
        prop_assert!((p.angle_deg - q.angle_deg).abs() < 1e-9);
        prop_assert!(p.k_soft <= kyy.min(kzz) * (1.0 + 1e-12));
        prop_assert!(p.k_stiff >= kyy.max(kzz) * (1.0 - 1e-12));
    }
}

#[test]
fn cantilever_stiffness_matches_closed_form() {
    let (l, t) = (60.0, 1.2);
    let f = cantilever(l, 12, t);
    let k = identify_stiffness(&f, &small_plan()).unwrap();
    let s = SectionProperties::rectangle(t, 15.0);
    // free tip rotation: lateral 3EI/L³, axial EA/L, no coupling
    assert_relative_eq!(k.kyy, 3.0 * E * s.second_moment / l.powi(3), max_relative = 1e-9);
    assert_relative_eq!(k.kzz, E * s.area / l, max_relative = 1e-9);
    assert!(k.kzy.abs() < 1e-9 * k.kzz);
    assert_eq!(k.kxx, DEFAULT_KXX);
}

#[test]
fn rotated_cantilever_coupling() {
    let (l, t, phi) = (60.0, 1.2, 0.3f64);
    let f = cantilever(l, 12, t);
    let s = SectionProperties::rectangle(t, 15.0);
    let rot = f.rotated(-phi, Point2::origin());
    let k = identify_stiffness(&rot, &small_plan()).unwrap();
    // K' = R diag(kl, ka) Rᵀ with the beam axis at angle phi from z toward +y
    let (kl, ka) = (3.0 * E * s.second_moment / l.powi(3), E * s.area / l);
    let r = Rotation2::new(-phi).into_inner();
    let expect = r * Matrix2::new(kl, 0.0, 0.0, ka) * r.transpose();
    assert_relative_eq!(k.kyy, expect[(0, 0)], max_relative = 1e-6);
    assert_relative_eq!(k.kzz, expect[(1, 1)], max_relative = 1e-6);
    assert_relative_eq!(k.kzy, expect[(0, 1)], max_relative = 1e-6);
    let p = principal_axis(&k).unwrap();
    assert_relative_eq!(p.angle_deg, phi.to_degrees(), epsilon = 1e-6);
}

#[test]
fn identification_invariant_to_amplitude_halving() {
    let f = build_frame(&FingerDesign::new(10.0, 0.2), 2).unwrap();
    let plan = ProbePlan {
        y_amplitude: 2.0,
        z_amplitude: 0.2,
        ..ProbePlan::default()
    };
    let half = ProbePlan {
        y_amplitude: 1.0,
        z_amplitude: 0.1,
        ..plan
    };
    let a = identify_stiffness(&f, &plan).unwrap();
    let b = identify_stiffness(&f, &half).unwrap();
    for (x, y) in [(a.kyy, b.kyy), (a.kzz, b.kzz), (a.kzy, b.kzy)] {
        assert_relative_eq!(x, y, max_relative = 1e-6);
    }
}

#[test]
fn stiffness_scales_with_modulus() {
    let f = build_frame(&FingerDesign::new(0.0, 0.1), 2).unwrap();
    let a = identify_stiffness(&f, &small_plan()).unwrap();
    let mut stiff = f.clone();
    stiff.materials[0].modulus_scale = Some(1e6);
    let b = identify_stiffness(&stiff, &small_plan()).unwrap();
    assert_relative_eq!(b.kyy / a.kyy, 1e6, max_relative = 1e-6);
}

#[test]
fn oversized_probe_reports_amplitude() {
    let f = build_frame(&FingerDesign::new(0.0, 0.1), 2).unwrap();
    let plan = ProbePlan {
        y_amplitude: 50.0,
        ..ProbePlan::default()
    };
    match identify_stiffness(&f, &plan) {
        Err(Error::ProbeNotElastic {
            axis,
            amplitude,
            stress,
        }) => {
            assert_eq!(axis, "y");
            assert!(amplitude.abs() <= 50.0);
            assert!(stress >= f.materials[0].yield_strength);
        }
        other => panic!("expected elastic-range error, got {other:?}"),
    }
    let (_, used) = identify_stiffness_elastic(&f, &plan, 8).unwrap();
    assert!(used.y_amplitude < 50.0);
    assert!(identify_stiffness_elastic(&f, &plan, 0).is_err());
}

#[test]
fn mixed_probe_reactions_are_uniaxial() {
    let f = build_frame(&FingerDesign::new(20.0, 0.2), 2).unwrap();
    let r = probe(&f, Axis::Y, 1.0).unwrap();
    assert_eq!(r.tip_reaction.y, 0.0);
    assert!(r.tip_displacement(f.tip_node).y != 0.0);
}

fn synthetic(k: f64, b: f64) -> Vec<ViscoSample> {
    let mut out = Vec::new();
    for i in 0..20 {
        let t = 0.05 * i as f64;
        for v in [10.0, 50.0, 100.0] {
            let d = v * t * 0.1;
            out.push(ViscoSample {
                displacement: d,
                velocity: v,
                force: k * d + b * v,
            });
        }
    }
    out
}

#[test]
fn viscoelastic_roundtrip() {
    let fit = fit_viscoelastic(&synthetic(1.45, 0.055)).unwrap();
    assert!((fit.k / 1.45 - 1.0).abs() <= 1e-9);
    assert!((fit.b / 0.055 - 1.0).abs() <= 1e-9);
    assert!(fit.residual_rms < 1e-10);
}

#[test]
fn pure_elastic_fit() {
    let fit = fit_viscoelastic(&synthetic(2.0, 0.0)).unwrap();
    assert!(fit.b.abs() <= 1e-9);
    assert_relative_eq!(fit.k, 2.0, max_relative = 1e-9);
}

#[test]
fn viscous_force_at_speed() {
    assert_relative_eq!(viscous_force_estimate(0.055, 100.0), 5.5, max_relative = 1e-12);
    assert!(viscous_force_estimate(0.055, 100.0) > 5.0);
}

#[test]
fn rank_deficient_regressors() {
    let one_speed: Vec<_> = (0..5)
        .map(|i| ViscoSample {
            displacement: i as f64,
            velocity: 3.0,
            force: 1.0,
        })
        .collect();
    assert!(matches!(fit_viscoelastic(&one_speed), Err(Error::RankDeficient(_))));
    let collinear: Vec<_> = (1..5)
        .map(|i| ViscoSample {
            displacement: i as f64,
            velocity: 2.0 * i as f64,
            force: 1.0,
        })
        .collect();
    assert!(matches!(fit_viscoelastic(&collinear), Err(Error::RankDeficient(_))));
    assert!(fit_viscoelastic(&synthetic(1.0, 1.0)[..2]).is_err());
}

#[test]
fn extrapolation_values() {
    let e = extrapolate_stiffness(&[(20.0, 1.533), (30.0, 1.667)], 40.0).unwrap();
    assert_eq!(format!("{:.3}", e.value), "1.801");
    assert_eq!(format!("{:.4}", e.slope), "0.0134");
    let knot = extrapolate_stiffness(&[(20.0, 1.533), (30.0, 1.667)], 30.0).unwrap();
    assert_eq!(knot.value, 1.667);
    assert!(extrapolate_stiffness(&[(20.0, 1.0), (20.0, 2.0)], 30.0).is_err());
    assert!(extrapolate_stiffness(&[(20.0, 1.0)], 30.0).is_err());
}

fn anchor() -> CalibrationAnchor {
    CalibrationAnchor {
        design: FingerDesign::new(0.0, 0.1),
        measured_kyy: 1.2,
    }
}

#[test]
fn calibration_reproduces_anchor() {
    let plan = ProbePlan::default();
    let design = FingerDesign::new(0.0, 0.1);
    let scale = calibrate(&design, &anchor(), &plan, 2).unwrap();
    let material = design.material.calibrated(scale).unwrap();
    let f = build_frame(&design.clone().with_material(material.clone()), 2).unwrap();
    let (k, _) = identify_stiffness_elastic(&f, &plan, 8).unwrap();
    assert!((k.kyy - 1.2).abs() < 1e-9);

    let calibrated = design.with_material(material);
    assert!(matches!(
        calibrate(&calibrated, &anchor(), &plan, 2),
        Err(Error::AlreadyCalibrated(_))
    ));

    let dense = FingerDesign::new(0.0, 0.3).with_material(calibrated.material.clone());
    let (k30, _) = identify_stiffness_elastic(&build_frame(&dense, 2).unwrap(), &plan, 8).unwrap();
    assert!((k30.kyy / 3.0 - 1.0).abs() <= 0.30, "kyy 0/30 = {}", k30.kyy);
}

#[test]
fn calibration_rejects_bad_anchor() {
    let mut a = anchor();
    a.measured_kyy = 0.0;
    assert!(calibrate(&FingerDesign::new(0.0, 0.1), &a, &ProbePlan::default(), 2).is_err());
}

#[test]
fn cantilever_first_yield_deflection() {
    // stiff material keeps the deflection small: root stress 3·E·c·δ/L²
    let (l, t) = (60.0, 1.0);
    let mut f = cantilever(l, 24, t);
    f.materials[0].youngs_modulus *= 1e5;
    let m = &f.materials[0];
    let delta = m.yield_strength * l * l / (3.0 * m.youngs_modulus * 0.5 * t);
    let r = strength_sweep(&f, [1.0, 0.0], &StrengthSettings::default()).unwrap();
    assert_eq!(r.failure_mode, FailureMode::Yield);
    assert_relative_eq!(r.max_deflection, delta, max_relative = 2e-3);
    let force = 3.0 * m.youngs_modulus * SectionProperties::rectangle(t, 15.0).second_moment / l.powi(3) * delta;
    assert_relative_eq!(r.max_force, force, max_relative = 5e-3);
}

#[test]
fn column_push_buckles() {
    // slender column pushed axially with the tip held laterally: clamped-pinned
    // Euler load 2.0457·π²EI/L²
    let (l, t) = (80.0, 0.4);
    let mut f = cantilever(l, 40, t);
    f.materials[0].yield_strength = 1e6;
    f.materials[0].ultimate_strength = 1e6;
    let s = SectionProperties::rectangle(t, 15.0);
    let pcr = 2.0457 * std::f64::consts::PI.powi(2) * E * s.second_moment / (l * l);
    let settings = StrengthSettings {
        travel: 0.5,
        ..StrengthSettings::default()
    };
    // a small lateral imperfection in the push direction triggers the mode
    let dir = Vector2::new(1e-4, -1.0).normalize();
    let r = strength_sweep(&f, [dir.x, dir.y], &settings).unwrap();
    assert_eq!(r.failure_mode, FailureMode::Buckling);
    assert_relative_eq!(r.max_force, pcr, max_relative = 0.05);
}

#[test]
fn strength_force_monotone_in_modulus_scale() {
    let base = build_frame(&FingerDesign::new(10.0, 0.1), 2).unwrap();
    let mut last = 0.0;
    for s in [0.5, 1.0, 2.0] {
        let mut f = base.clone();
        f.materials[0].modulus_scale = Some(s);
        let r = strength_sweep(&f, AXIAL_PUSH, &StrengthSettings::default()).unwrap();
        assert!(r.max_force >= last);
        last = r.max_force;
    }
}

#[test]
fn strength_rejects_non_unit_direction() {
    let f = cantilever(50.0, 5, 1.0);
    assert!(strength_sweep(&f, [1.0, 1.0], &StrengthSettings::default()).is_err());
}
