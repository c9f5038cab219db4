use std::fmt::Write;

use nalgebra::Point2;

use super::frame::{MemberKind, PlanarFrame};
use crate::error::{Error, Result};

const MARGIN: f64 = 5.0;

fn stroke(kind: MemberKind) -> (&'static str, f64) {
    match kind {
        MemberKind::Wall => ("#1f3a93", 0.6),
        MemberKind::Rib => ("#4d7ea8", 0.3),
        MemberKind::Tip | MemberKind::Link => ("#333333", 0.8),
        MemberKind::Generic => ("#555555", 0.4),
    }
}

/// Wireframe of `frame` as an SVG 1.1 document, one polyline per element.
///
/// With `deflection` (per-node `[dy, dz, rotation]`), a dashed overlay of the
/// deformed frame is added with displacements multiplied by `scale`.
pub fn export_svg(frame: &PlanarFrame, deflection: Option<&[[f64; 3]]>, scale: f64) -> Result<String> {
    if let Some(d) = deflection {
        if d.len() != frame.nodes.len() {
            return Err(Error::Invalid(format!(
                "deflection has {} entries for {} nodes",
                d.len(),
                frame.nodes.len()
            )));
        }
        if !scale.is_finite() {
            return Err(Error::Invalid("deflection scale must be finite".into()));
        }
    }
    let deformed: Option<Vec<Point2<f64>>> = deflection.map(|d| {
        frame
            .nodes
            .iter()
            .zip(d)
            .map(|(p, u)| Point2::new(p.x + scale * u[0], p.y + scale * u[1]))
            .collect()
    });

    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in frame.nodes.iter().chain(deformed.iter().flatten()) {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if frame.nodes.is_empty() {
        lo = Point2::origin();
        hi = Point2::origin();
    }
    let width = hi.x - lo.x + 2.0 * MARGIN;
    let height = hi.y - lo.y + 2.0 * MARGIN;
    // SVG y grows downward; the finger z axis points up
    let map = |p: &Point2<f64>| (p.x - lo.x + MARGIN, hi.y - p.y + MARGIN);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}mm" height="{height:.3}mm" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"<g id="undeformed" fill="none" stroke-linecap="round">"#);
    for e in &frame.elements {
        let (a, b) = (map(&frame.nodes[e.node_i]), map(&frame.nodes[e.node_j]));
        let (color, w) = stroke(e.kind);
        let _ = writeln!(
            out,
            r#"<polyline points="{:.4},{:.4} {:.4},{:.4}" stroke="{color}" stroke-width="{w}"/>"#,
            a.0, a.1, b.0, b.1
        );
    }
    let _ = writeln!(out, "</g>");
    if let Some(nodes) = &deformed {
        let _ = writeln!(
            out,
            r##"<g id="deformed" fill="none" stroke="#c0392b" stroke-width="0.3" stroke-dasharray="1,0.5">"##
        );
        for e in &frame.elements {
            let (a, b) = (map(&nodes[e.node_i]), map(&nodes[e.node_j]));
            let _ = writeln!(
                out,
                r#"<polyline points="{:.4},{:.4} {:.4},{:.4}"/>"#,
                a.0, a.1, b.0, b.1
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let tip = map(&frame.nodes[frame.tip_node]);
    let _ = writeln!(
        out,
        r##"<circle cx="{:.4}" cy="{:.4}" r="0.8" fill="#e67e22"/>"##,
        tip.0, tip.1
    );
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
