use std::fmt::Write;

use super::{InsertionScenario, SearchTrace};
use crate::error::{Error, Result};

/// One row per simulated increment.
pub fn trace_csv(trace: &SearchTrace) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "step",
        "phase",
        "gripper_y",
        "gripper_z",
        "plug_y",
        "plug_z",
        "plug_rot_deg",
        "fx",
        "fy",
        "fz",
        "max_contact",
        "contacts",
    ])?;
    for s in &trace.samples {
        w.write_record([
            s.step.to_string(),
            s.phase.as_str().to_string(),
            format!("{:.6}", s.gripper[0]),
            format!("{:.6}", s.gripper[1]),
            format!("{:.6}", s.plug[0]),
            format!("{:.6}", s.plug[1]),
            format!("{:.6}", s.plug[2]),
            format!("{:.6}", s.contact_force[0]),
            format!("{:.6}", s.contact_force[1]),
            format!("{:.6}", s.contact_force[2]),
            format!("{:.6}", s.max_contact),
            s.contacts.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

/// y–z view of the socket, the commanded gripper path and the plug path,
/// with the plug outline at its final pose.
pub fn trace_svg(scenario: &InsertionScenario, trace: &SearchTrace) -> String {
    let s = scenario;
    let m = s.misalignment[1];
    let half = 0.5 * s.opening_y();
    let (d, rim) = (s.socket.depth, s.socket.rim);
    let px = 20.0;
    let lo_y = (m - half - rim - 2.0).min(-s.plug.width_y - 2.0);
    let hi_y = (m + half + rim + 2.0).max(s.plug.width_y + 2.0);
    let top_z = s.plug.height + 3.0;
    let bot_z = -d - 2.0;
    let map = |y: f64, z: f64| ((y - lo_y) * px, (top_z - z) * px);
    let (width, height) = ((hi_y - lo_y) * px, (top_z - bot_z) * px);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(
        out,
        r##"<g id="socket" fill="#bbbbbb" stroke="#555555" stroke-width="1">"##
    );
    for (a, b) in [(m - half - rim, m - half), (m + half, m + half + rim)] {
        let (x0, y0) = map(a, 0.0);
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}"/>"#,
            (b - a) * px,
            d * px
        );
    }
    let (x0, y0) = map(m - half - rim, -d);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}"/>"#,
        (2.0 * (half + rim)) * px,
        1.0 * px
    );
    let _ = writeln!(out, "</g>");

    let path = |pts: Vec<(f64, f64)>| -> String {
        pts.iter()
            .map(|&(y, z)| {
                let (a, b) = map(y, z);
                format!("{a:.2},{b:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let hg = s.plug.grip_height;
    let cmd: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .map(|p| (p.gripper[0], p.gripper[1] - hg))
        .collect();
    let plug: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .map(|p| {
            let r = p.plug[2].to_radians();
            (p.plug[0] + hg * r.sin(), p.plug[1] - hg * r.cos())
        })
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline id="commanded" points="{}" fill="none" stroke="#2980b9" stroke-width="1" stroke-dasharray="4,2"/>"##,
        path(cmd)
    );
    let _ = writeln!(
        out,
        r##"<polyline id="plug-path" points="{}" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##,
        path(plug)
    );
    if let Some(last) = trace.samples.last() {
        let (gy, gz, r) = (last.plug[0], last.plug[1], last.plug[2].to_radians());
        let (c, sn) = (r.cos(), r.sin());
        let w = 0.5 * s.plug.width_y;
        let corners = [(-w, -hg), (w, -hg), (w, s.plug.height - hg), (-w, s.plug.height - hg)];
        let pts: Vec<(f64, f64)> = corners
            .iter()
            .map(|&(a, b)| (gy + c * a - sn * b, gz + sn * a + c * b))
            .collect();
        let _ = writeln!(
            out,
            r##"<polygon id="plug" points="{}" fill="none" stroke="#333333" stroke-width="1"/>"##,
            path(pts)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="4" y="14" font-size="12">{}</text>"#,
        trace.outcome.as_str()
    );
    let _ = writeln!(out, "</svg>");
    out
}
