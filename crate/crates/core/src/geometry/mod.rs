//! Finger geometry: parametric design, planar frame, and exports.

mod design;
mod frame;
mod stl;
mod svg;

pub use design::{
    build_frame, build_frame_with, rib_count, Envelope, FingerDesign, Fingertip, FingertipContact, ShapeParams,
    MIN_ELEMENT_LENGTH,
};
pub use frame::{Element, MemberKind, PlanarFrame, Support};
pub use stl::{export_stl, extrude_polygon, write_binary_stl, Triangle};
pub use svg::export_svg;

#[cfg(test)]
mod tests;
