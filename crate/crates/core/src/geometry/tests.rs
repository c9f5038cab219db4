use super::*;
use crate::error::Error;
use nalgebra::Point2;
use proptest::prelude::*;

fn flat(dir: f64, den: f64) -> FingerDesign {
    let mut d = FingerDesign::new(dir, den);
    d.mount_angle = 0.0;
    d
}

#[test]
fn rib_count_at_zero_direction() {
    let d = FingerDesign::new(0.0, 0.1);
    let f = build_frame(&d, 2).unwrap();
    assert_eq!(rib_count(&f), (d.usable_height() / 4.0).floor() as usize);
}

#[test]
fn zero_direction_ribs_parallel_to_mount() {
    let f = build_frame(&flat(0.0, 0.1), 1).unwrap();
    for e in f.elements.iter().filter(|e| e.kind == MemberKind::Rib) {
        let (a, b) = (f.nodes[e.node_i], f.nodes[e.node_j]);
        assert!((a.y - b.y).abs() < 1e-9);
    }
}

#[test]
fn mirror_symmetric_without_bow() {
    let mut d = flat(0.0, 0.2);
    d.shape.wall_bow = 0.0;
    let f = build_frame(&d, 3).unwrap();
    let key = |p: Point2<f64>| ((p.x * 1e6).round() as i64, (p.y * 1e6).round() as i64);
    let mut a: Vec<_> = (0..f.nodes.len())
        .filter(|&n| n != f.tip_node)
        .map(|n| key(f.nodes[n]))
        .collect();
    let mut b: Vec<_> = a.iter().map(|&(y, z)| (-y, z)).collect();
    a.sort_unstable();
    b.sort_unstable();
    assert_eq!(a, b);
}

#[test]
fn refinement_keeps_member_endpoints() {
    let d = FingerDesign::new(20.0, 0.2);
    let coarse = build_frame(&d, 2).unwrap();
    let fine = build_frame(&d, 4).unwrap();
    let n_junction = coarse
        .nodes
        .iter()
        .zip(&fine.nodes)
        .take_while(|(a, b)| (*a - *b).norm() < 1e-12)
        .count();
    assert!(n_junction > 0);
    // every coarse node on a member end is present in the fine mesh
    for s in &coarse.supports {
        assert!((coarse.nodes[s.node] - fine.nodes[s.node]).norm() < 1e-12);
    }
    assert_eq!(coarse.nodes[coarse.tip_node], fine.nodes[fine.tip_node]);
    assert!(fine.elements.len() > coarse.elements.len());
}

#[test]
fn deterministic_build() {
    let d = FingerDesign::new(30.0, 0.3);
    assert_eq!(build_frame(&d, 2).unwrap(), build_frame(&d, 2).unwrap());
}

#[test]
fn minimum_element_length_respected() {
    for dir in [0.0, 10.0, 20.0, 30.0, 40.0] {
        for den in [0.1, 0.2, 0.3] {
            let f = build_frame(&FingerDesign::new(dir, den), 4).unwrap();
            assert!(f.min_element_length() >= MIN_ELEMENT_LENGTH - 1e-9, "{dir} {den}");
        }
    }
}

#[test]
fn wide_notch_rejected() {
    let mut d = FingerDesign::new(0.0, 0.1);
    d.notch_width = d.shape.tip_width + 1.0;
    assert!(matches!(build_frame(&d, 2), Err(Error::Geometry(_))));
}

#[test]
fn sparse_infill_is_degenerate() {
    let mut d = FingerDesign::new(0.0, 0.001);
    d.envelope.height = 30.0;
    assert!(matches!(build_frame(&d, 2), Err(Error::DegenerateRibLayout(_))));
}

#[test]
fn direction_out_of_range() {
    assert!(matches!(
        build_frame(&FingerDesign::new(45.0, 0.1), 2),
        Err(Error::Domain(_))
    ));
}

#[test]
fn mount_angle_moves_tip_toward_contact_side() {
    let a = build_frame(&flat(0.0, 0.1), 2).unwrap();
    let b = build_frame(&FingerDesign::new(0.0, 0.1), 2).unwrap();
    assert!(b.nodes[b.tip_node].x > a.nodes[a.tip_node].x);
    assert!((a.nodes[a.tip_node].coords.norm() - b.nodes[b.tip_node].coords.norm()).abs() < 1e-9);
}

#[test]
fn fingertip_variants_build() {
    for tip in [
        Fingertip::Rounded,
        Fingertip::Flat,
        Fingertip::NotchedRounded,
        Fingertip::FlatAngled,
        Fingertip::NotchedContactPlane,
    ] {
        let mut d = FingerDesign::new(10.0, 0.2);
        d.fingertip = tip;
        let f = build_frame(&d, 2).unwrap();
        assert!(f.reachable_from_supports()[f.tip_node]);
        d.contact(0.8).validate().unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rib_count_monotone_in_density(dir in 0.0f64..40.0, d1 in 0.08f64..0.3, d2 in 0.08f64..0.3) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = rib_count(&build_frame(&FingerDesign::new(dir, lo), 1).unwrap());
        let b = rib_count(&build_frame(&FingerDesign::new(dir, hi), 1).unwrap());
        prop_assert!(a <= b, "{} ribs at {}, {} at {}", a, lo, b, hi);
    }

    #[test]
    fn frames_are_valid(dir in 0.0f64..40.0, den in 0.05f64..0.5, elems in 1usize..5) {
        let f = build_frame(&FingerDesign::new(dir, den), elems).unwrap();
        prop_assert!(f.validate().is_ok());
        prop_assert!(f.min_element_length() >= MIN_ELEMENT_LENGTH - 1e-9);
    }
}
