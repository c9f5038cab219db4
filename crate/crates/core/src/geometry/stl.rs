use nalgebra::{Point2, Point3, Vector2, Vector3};

use super::design::{build_frame, FingerDesign};
use crate::error::{Error, Result};

pub type Triangle = [Point3<f64>; 3];

/// Closed prism over a simple polygon (counter-clockwise or clockwise), from
/// z = 0 to z = `depth`. Fan triangulation, so the polygon must be convex.
pub fn extrude_polygon(polygon: &[Point2<f64>], depth: f64) -> Result<Vec<Triangle>> {
    let n = polygon.len();
    if n < 3 || !(depth > 0.0) {
        return Err(Error::Geometry(
            "extrusion needs three or more vertices and a positive depth".into(),
        ));
    }
    let area2: f64 = (0..n)
        .map(|i| {
            let (a, b) = (polygon[i], polygon[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    if !(area2.abs() > 1e-12) {
        return Err(Error::Geometry("degenerate polygon".into()));
    }
    // work counter-clockwise so outward normals follow the right-hand rule
    let ring: Vec<Point2<f64>> = if area2 > 0.0 {
        polygon.to_vec()
    } else {
        polygon.iter().rev().copied().collect()
    };
    let lo = |p: Point2<f64>| Point3::new(p.x, p.y, 0.0);
    let hi = |p: Point2<f64>| Point3::new(p.x, p.y, depth);
    let mut tris = Vec::with_capacity(4 * n - 4);
    for i in 1..n - 1 {
        tris.push([hi(ring[0]), hi(ring[i]), hi(ring[i + 1])]);
        tris.push([lo(ring[0]), lo(ring[i + 1]), lo(ring[i])]);
    }
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        tris.push([lo(a), lo(b), hi(b)]);
        tris.push([lo(a), hi(b), hi(a)]);
    }
    Ok(tris)
}

/// Binary little-endian STL: 80-byte header, u32 facet count, 50 bytes per facet.
pub fn write_binary_stl(triangles: &[Triangle]) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * triangles.len());
    let mut header = [0u8; 80];
    let tag = b"finray planar frame extrusion";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(triangles.len() as u32).to_le_bytes());
    for t in triangles {
        let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
        let n = n.try_normalize(0.0).unwrap_or_else(Vector3::zeros);
        for v in std::iter::once(n).chain(t.iter().map(|p| p.coords)) {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

/// Printable solid of a finger design: every member of the unmounted frame
/// extruded as a closed box of its line thickness over the layer depth.
pub fn export_stl(design: &FingerDesign) -> Result<Vec<u8>> {
    let mut flat = design.clone();
    flat.mount_angle = 0.0;
    let frame = build_frame(&flat, 1)?;
    let depth = design.print.layer_depth;
    let mut tris = Vec::new();
    for e in &frame.elements {
        let (a, b) = (frame.nodes[e.node_i], frame.nodes[e.node_j]);
        let axis = b - a;
        let len = axis.norm();
        if !(len > 0.0) {
            return Err(Error::Geometry("zero-length member".into()));
        }
        let n = Vector2::new(-axis.y, axis.x) * (e.section.half_thickness / len);
        tris.extend(extrude_polygon(&[a - n, b - n, b + n, a + n], depth)?);
    }
    Ok(write_binary_stl(&tris))
}
