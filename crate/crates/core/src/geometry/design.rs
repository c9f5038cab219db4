use std::collections::BTreeMap;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use super::frame::{Element, MemberKind, PlanarFrame, Support};
use crate::error::{Error, Result};
use crate::material::{builtin_material, rib_spacing, MaterialModel, PrintParameters, SectionProperties};

/// Default minimum generated element length, mm.
pub const MIN_ELEMENT_LENGTH: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fingertip {
    Rounded,
    Flat,
    NotchedRounded,
    FlatAngled,
    NotchedContactPlane,
}

impl Fingertip {
    pub fn is_notched(self) -> bool {
        matches!(self, Fingertip::NotchedRounded | Fingertip::NotchedContactPlane)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Fingertip::Rounded => "rounded",
            Fingertip::Flat => "flat",
            Fingertip::NotchedRounded => "notched_rounded",
            Fingertip::FlatAngled => "flat_angled",
            Fingertip::NotchedContactPlane => "notched_contact_plane",
        }
    }
}

/// Outer finger dimensions, mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub height: f64,
    pub base_width: f64,
    pub depth: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope {
            height: 80.0,
            base_width: 25.0,
            depth: 15.0,
        }
    }
}

/// Wall and tip shape details not fixed by the design parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeParams {
    /// Distance between the wall centerlines where they meet the tip block, mm.
    pub tip_width: f64,
    /// Lateral bow of both walls at mid height, mm (positive toward the contact side).
    pub wall_bow: f64,
    /// Height of the solid tip block above the wall ends, mm.
    pub tip_height: f64,
    /// Ribs rise toward the outer wall instead of the contact side.
    pub mirror_ribs: bool,
}

impl Default for ShapeParams {
    fn default() -> Self {
        ShapeParams {
            tip_width: 18.0,
            wall_bow: -5.0,
            tip_height: 4.0,
            mirror_ribs: false,
        }
    }
}

/// Design parameter tuple of one finger. Angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerDesign {
    pub infill_direction: f64,
    pub infill_density: f64,
    pub fingertip: Fingertip,
    pub notch_width: f64,
    pub mount_angle: f64,
    pub material: MaterialModel,
    pub print: PrintParameters,
    pub envelope: Envelope,
    #[serde(default)]
    pub shape: ShapeParams,
}

impl FingerDesign {
    /// PLA+ design with default envelope, 10° mount and a 5 mm notched contact plane.
    pub fn new(infill_direction: f64, infill_density: f64) -> FingerDesign {
        FingerDesign {
            infill_direction,
            infill_density,
            fingertip: Fingertip::NotchedContactPlane,
            notch_width: 5.0,
            mount_angle: 10.0,
            material: builtin_material("PLA+").expect("builtin material"),
            print: PrintParameters::default(),
            envelope: Envelope::default(),
            shape: ShapeParams::default(),
        }
    }

    pub fn with_material(mut self, material: MaterialModel) -> FingerDesign {
        self.material = material;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=40.0).contains(&self.infill_direction) {
            return Err(Error::Domain(format!(
                "infill direction must lie in [0, 40] deg, got {}",
                self.infill_direction
            )));
        }
        if !(self.infill_density > 0.0 && self.infill_density <= 1.0) {
            return Err(Error::Domain(format!(
                "infill density must lie in (0, 1], got {}",
                self.infill_density
            )));
        }
        if !self.mount_angle.is_finite() || self.mount_angle.abs() >= 90.0 {
            return Err(Error::Domain(format!("mount angle out of range: {}", self.mount_angle)));
        }
        let e = &self.envelope;
        if !(e.height > 0.0 && e.base_width > 0.0 && e.depth > 0.0) {
            return Err(Error::Geometry(format!("envelope dimensions must be positive: {e:?}")));
        }
        let s = &self.shape;
        if !(s.tip_width > 0.0 && s.tip_height > 0.0 && s.wall_bow.is_finite()) {
            return Err(Error::Geometry(format!("invalid shape parameters: {s:?}")));
        }
        if s.tip_height >= e.height {
            return Err(Error::Geometry("tip block taller than the finger".into()));
        }
        if self.fingertip.is_notched() && !(self.notch_width > 0.0) {
            return Err(Error::Geometry("notched fingertip needs a positive notch width".into()));
        }
        if self.fingertip.is_notched() && self.notch_width >= s.tip_width {
            return Err(Error::Geometry(format!(
                "notch width {} exceeds the fingertip width {}",
                self.notch_width, s.tip_width
            )));
        }
        self.print.validate()?;
        self.material.validate()
    }

    /// Height of the ribbed region between the base and the tip block.
    pub fn usable_height(&self) -> f64 {
        self.envelope.height - self.shape.tip_height
    }

    pub fn rib_pitch(&self) -> Result<f64> {
        rib_spacing(self.infill_density, &self.print)
    }

    /// Contact-surface description of the fingertip.
    pub fn contact(&self, friction_mu: f64) -> FingertipContact {
        let angled = matches!(self.fingertip, Fingertip::FlatAngled | Fingertip::NotchedContactPlane);
        let half_width = match self.fingertip {
            Fingertip::Rounded | Fingertip::NotchedRounded => 0.25 * self.shape.tip_height,
            Fingertip::Flat | Fingertip::FlatAngled => 0.5 * self.shape.tip_height,
            Fingertip::NotchedContactPlane => 0.5 * self.notch_width,
        };
        FingertipContact {
            contact_plane_angle: if angled { self.mount_angle } else { 0.0 },
            contact_half_width: half_width,
            friction_mu,
        }
    }

    /// Contact point in the unrotated finger layout.
    fn contact_point(&self, inner_top: Point2<f64>) -> Point2<f64> {
        let h = self.shape.tip_height;
        let dy = match self.fingertip {
            Fingertip::Rounded => -0.5 * h,
            Fingertip::Flat | Fingertip::FlatAngled => 0.0,
            Fingertip::NotchedRounded | Fingertip::NotchedContactPlane => -self.notch_width,
        };
        Point2::new(inner_top.x + dy, inner_top.y + h)
    }
}

/// Abstraction of the fingertip contact surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingertipContact {
    /// Tilt of the contact plane against the finger axis, deg.
    pub contact_plane_angle: f64,
    pub contact_half_width: f64,
    pub friction_mu: f64,
}

impl FingertipContact {
    pub fn validate(&self) -> Result<()> {
        if self.contact_half_width > 0.0 && self.friction_mu >= 0.0 {
            Ok(())
        } else {
            Err(Error::Geometry(format!("invalid fingertip contact {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Outer,
    Inner,
}

/// Piece of the finger outline a rib endpoint can land on.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Boundary {
    Base,
    Wall(Side),
    Tip,
}

/// Unrotated outline: base at z = 0, walls up to the tip block, contact side at +y.
struct Outline {
    base_half: f64,
    tip_half: f64,
    bow: f64,
    hw: f64,
}

impl Outline {
    fn wall(&self, side: Side, z: f64) -> Point2<f64> {
        let t = z / self.hw;
        let half = self.base_half + (self.tip_half - self.base_half) * t;
        let y = match side {
            Side::Outer => -half,
            Side::Inner => half,
        };
        Point2::new(y + 4.0 * self.bow * t * (1.0 - t), z)
    }

    fn tip(&self, t: f64) -> Point2<f64> {
        let a = self.wall(Side::Outer, self.hw);
        let b = self.wall(Side::Inner, self.hw);
        a + (b - a) * t
    }

    fn base(&self, t: f64) -> Point2<f64> {
        let a = self.wall(Side::Outer, 0.0);
        let b = self.wall(Side::Inner, 0.0);
        a + (b - a) * t
    }

    fn point(&self, b: Boundary, s: f64) -> Point2<f64> {
        match b {
            Boundary::Base => self.base(s),
            Boundary::Wall(side) => self.wall(side, s),
            Boundary::Tip => self.tip(s),
        }
    }

    /// Intersections of the line `n·p = c` with the outline, as (boundary, parameter).
    fn intersect(&self, n: Vector2<f64>, c: f64) -> Vec<(Boundary, f64)> {
        let mut out = Vec::new();
        let f = |p: Point2<f64>| n.dot(&p.coords) - c;
        let mut straight = |b: Boundary| {
            let (fa, fb) = (f(self.point(b, 0.0)), f(self.point(b, 1.0)));
            if fa == fb || fa * fb > 0.0 {
                return;
            }
            let t = fa / (fa - fb);
            if (0.0..=1.0).contains(&t) {
                out.push((b, t));
            }
        };
        straight(Boundary::Base);
        straight(Boundary::Tip);
        const SAMPLES: usize = 256;
        for side in [Side::Outer, Side::Inner] {
            let b = Boundary::Wall(side);
            for k in 0..SAMPLES {
                let (mut lo, mut hi) = (
                    self.hw * k as f64 / SAMPLES as f64,
                    self.hw * (k + 1) as f64 / SAMPLES as f64,
                );
                let (flo, fhi) = (f(self.point(b, lo)), f(self.point(b, hi)));
                if flo == 0.0 && k > 0 {
                    continue;
                }
                if flo * fhi > 0.0 || (flo == 0.0 && fhi == 0.0) {
                    continue;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if f(self.point(b, lo)) * f(self.point(b, mid)) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                out.push((b, 0.5 * (lo + hi)));
            }
        }
        // drop duplicates at shared corners
        let mut unique: Vec<(Boundary, f64)> = Vec::new();
        for (b, s) in out {
            let p = self.point(b, s);
            if !unique.iter().any(|&(b2, s2)| (self.point(b2, s2) - p).norm() < 1e-9) {
                unique.push((b, s));
            }
        }
        unique
    }
}

/// Junction parameters along one boundary, snapped to a minimum spacing.
#[derive(Default)]
struct Junctions {
    params: Vec<f64>,
}

impl Junctions {
    fn with_ends(lo: f64, hi: f64) -> Junctions {
        Junctions { params: vec![lo, hi] }
    }

    /// Inserts `s` unless an existing junction lies within `tol`; returns the used parameter.
    fn snap(&mut self, s: f64, tol: f64) -> f64 {
        if let Some(&near) = self
            .params
            .iter()
            .min_by(|a, b| (*a - s).abs().total_cmp(&(*b - s).abs()))
            .filter(|&&p| (p - s).abs() < tol)
        {
            return near;
        }
        self.params.push(s);
        self.params.sort_by(f64::total_cmp);
        s
    }
}

struct Builder {
    nodes: Vec<Point2<f64>>,
    elements: Vec<Element>,
    index: BTreeMap<(u8, u8, i64), usize>,
}

impl Builder {
    fn key(b: Boundary, s: f64) -> (u8, u8, i64) {
        let (tag, side) = match b {
            Boundary::Base => (0, 0),
            Boundary::Wall(Side::Outer) => (1, 0),
            Boundary::Wall(Side::Inner) => (1, 1),
            Boundary::Tip => (2, 0),
        };
        (tag, side, (s * 1e9).round() as i64)
    }

    fn node_on(&mut self, outline: &Outline, b: Boundary, s: f64) -> usize {
        // wall ends coincide with base and tip corners
        let (b, s) = match b {
            Boundary::Base if s == 0.0 => (Boundary::Wall(Side::Outer), 0.0),
            Boundary::Base if s == 1.0 => (Boundary::Wall(Side::Inner), 0.0),
            Boundary::Tip if s == 0.0 => (Boundary::Wall(Side::Outer), outline.hw),
            Boundary::Tip if s == 1.0 => (Boundary::Wall(Side::Inner), outline.hw),
            _ => (b, s),
        };
        let key = Self::key(b, s);
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.nodes.push(outline.point(b, s));
        self.index.insert(key, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn push_node(&mut self, p: Point2<f64>) -> usize {
        self.nodes.push(p);
        self.nodes.len() - 1
    }

    fn segment_count(length: f64, elems: usize, min_len: f64) -> usize {
        ((length / min_len).floor() as usize).clamp(1, elems)
    }

    fn straight(
        &mut self,
        a: usize,
        b: usize,
        elems: usize,
        min_len: f64,
        section: SectionProperties,
        kind: MemberKind,
    ) {
        let (pa, pb) = (self.nodes[a], self.nodes[b]);
        let n = Self::segment_count((pb - pa).norm(), elems, min_len);
        let mut prev = a;
        for k in 1..=n {
            let next = if k == n {
                b
            } else {
                self.push_node(pa + (pb - pa) * (k as f64 / n as f64))
            };
            self.elements.push(Element {
                node_i: prev,
                node_j: next,
                section,
                material: 0,
                kind,
            });
            prev = next;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn curved(
        &mut self,
        outline: &Outline,
        side: Side,
        (za, zb): (f64, f64),
        elems: usize,
        min_len: f64,
        section: SectionProperties,
    ) {
        let b = Boundary::Wall(side);
        let a = self.node_on(outline, b, za);
        let end = self.node_on(outline, b, zb);
        let length = (outline.point(b, zb) - outline.point(b, za)).norm();
        let n = Self::segment_count(length, elems, min_len);
        let mut prev = a;
        for k in 1..=n {
            let next = if k == n {
                end
            } else {
                self.push_node(outline.point(b, za + (zb - za) * k as f64 / n as f64))
            };
            self.elements.push(Element {
                node_i: prev,
                node_j: next,
                section,
                material: 0,
                kind: MemberKind::Wall,
            });
            prev = next;
        }
    }
}

/// Builds the planar beam frame of a finger with `elems_per_member` elements per member.
pub fn build_frame(design: &FingerDesign, elems_per_member: usize) -> Result<PlanarFrame> {
    build_frame_with(design, elems_per_member, MIN_ELEMENT_LENGTH)
}

pub fn build_frame_with(design: &FingerDesign, elems_per_member: usize, min_len: f64) -> Result<PlanarFrame> {
    design.validate()?;
    if elems_per_member == 0 {
        return Err(Error::Invalid("elems_per_member must be at least 1".into()));
    }
    if !(min_len > 0.0) {
        return Err(Error::Invalid("minimum element length must be positive".into()));
    }
    let pitch = design.rib_pitch()?;
    let hw = design.usable_height();
    if pitch > hw {
        return Err(Error::DegenerateRibLayout(format!(
            "rib pitch {pitch:.3} mm exceeds usable height {hw:.3} mm"
        )));
    }
    let outline = Outline {
        base_half: 0.5 * design.envelope.base_width,
        tip_half: 0.5 * design.shape.tip_width,
        bow: design.shape.wall_bow,
        hw,
    };

    // rib lines n·p = c, ribs rising toward the contact side unless mirrored
    let beta = design.infill_direction.to_radians();
    let lean = if design.shape.mirror_ribs { 1.0 } else { -1.0 };
    let normal = Vector2::new(lean * beta.sin(), beta.cos());
    let corners = [
        outline.base(0.0),
        outline.base(1.0),
        outline.tip(0.0),
        outline.tip(1.0),
        outline.wall(Side::Outer, 0.5 * hw),
        outline.wall(Side::Inner, 0.5 * hw),
    ];
    let (mut cmin, mut cmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=64 {
        for side in [Side::Outer, Side::Inner] {
            let c = normal.dot(&outline.wall(side, hw * k as f64 / 64.0).coords);
            cmin = cmin.min(c);
            cmax = cmax.max(c);
        }
    }
    for p in corners {
        let c = normal.dot(&p.coords);
        cmin = cmin.min(c);
        cmax = cmax.max(c);
    }
    let count = ((cmax - cmin) / pitch).floor() as usize;
    if count == 0 {
        return Err(Error::DegenerateRibLayout("no rib fits inside the finger".into()));
    }
    let first = cmin + 0.5 * ((cmax - cmin) - (count - 1) as f64 * pitch);

    let mut walls = [Junctions::with_ends(0.0, hw), Junctions::with_ends(0.0, hw)];
    let mut tip = Junctions::with_ends(0.0, 1.0);
    let mut base = Junctions::with_ends(0.0, 1.0);
    let tip_len = (outline.tip(1.0) - outline.tip(0.0)).norm();
    let base_len = (outline.base(1.0) - outline.base(0.0)).norm();
    let mut ribs: Vec<[(Boundary, f64); 2]> = Vec::new();
    for k in 0..count {
        let c = first + k as f64 * pitch;
        let mut hits = outline.intersect(normal, c);
        let dir = Vector2::new(normal.y, -normal.x);
        hits.sort_by(|a, b| {
            let pa = dir.dot(&outline.point(a.0, a.1).coords);
            let pb = dir.dot(&outline.point(b.0, b.1).coords);
            pa.total_cmp(&pb)
        });
        for pair in hits.chunks_exact(2) {
            let mut ends = [pair[0], pair[1]];
            for end in &mut ends {
                end.1 = match end.0 {
                    Boundary::Wall(Side::Outer) => walls[0].snap(end.1, min_len),
                    Boundary::Wall(Side::Inner) => walls[1].snap(end.1, min_len),
                    Boundary::Tip => tip.snap(end.1, min_len / tip_len),
                    Boundary::Base => base.snap(end.1, min_len / base_len),
                };
            }
            let (pa, pb) = (outline.point(ends[0].0, ends[0].1), outline.point(ends[1].0, ends[1].1));
            let same_edge = ends[0].0 == ends[1].0 && !matches!(ends[0].0, Boundary::Wall(_));
            if (pb - pa).norm() >= min_len && !same_edge {
                ribs.push(ends);
            }
        }
    }

    let print = &design.print;
    let depth = print.layer_depth;
    let wall_section = SectionProperties::rectangle(print.wall_thickness(), depth);
    let rib_section = SectionProperties::rectangle(print.line_width, depth);
    let tip_section = SectionProperties::rectangle(design.shape.tip_height, depth);

    let mut b = Builder {
        nodes: Vec::new(),
        elements: Vec::new(),
        index: BTreeMap::new(),
    };
    // junction nodes first so member endpoints keep their indices across refinements
    for (side, j) in [(Side::Outer, &walls[0]), (Side::Inner, &walls[1])] {
        for &z in &j.params {
            b.node_on(&outline, Boundary::Wall(side), z);
        }
    }
    for &t in &tip.params {
        b.node_on(&outline, Boundary::Tip, t);
    }
    for &t in &base.params {
        b.node_on(&outline, Boundary::Base, t);
    }
    let inner_top = outline.tip(1.0);
    let contact = b.push_node(design.contact_point(inner_top));

    for (side, j) in [(Side::Outer, &walls[0]), (Side::Inner, &walls[1])] {
        for w in j.params.windows(2) {
            b.curved(&outline, side, (w[0], w[1]), elems_per_member, min_len, wall_section);
        }
    }
    for w in tip.params.windows(2) {
        let (na, nb) = (
            b.node_on(&outline, Boundary::Tip, w[0]),
            b.node_on(&outline, Boundary::Tip, w[1]),
        );
        b.straight(na, nb, elems_per_member, min_len, tip_section, MemberKind::Tip);
    }
    for [ea, eb] in &ribs {
        let na = b.node_on(&outline, ea.0, ea.1);
        let nb = b.node_on(&outline, eb.0, eb.1);
        b.straight(na, nb, elems_per_member, min_len, rib_section, MemberKind::Rib);
    }
    // the notch and tip block are rigid relative to the walls
    let outer_top = b.node_on(&outline, Boundary::Tip, 0.0);
    let inner_top_node = b.node_on(&outline, Boundary::Tip, 1.0);
    for end in [outer_top, inner_top_node] {
        b.elements.push(Element {
            node_i: end,
            node_j: contact,
            section: tip_section,
            material: 0,
            kind: MemberKind::Link,
        });
    }

    let supports = base
        .params
        .iter()
        .map(|&t| Support::fixed(b.node_on(&outline, Boundary::Base, t)))
        .collect();
    let frame = PlanarFrame {
        nodes: b.nodes,
        elements: b.elements,
        materials: vec![design.material.clone()],
        supports,
        tip_node: contact,
    };
    let frame = frame.rotated(-design.mount_angle.to_radians(), Point2::origin());
    frame.validate()?;
    Ok(frame)
}

/// Number of ribs in a frame, counting clipped partial ribs.
pub fn rib_count(frame: &PlanarFrame) -> usize {
    // a rib is a chain of rib elements; interior chain nodes touch exactly two rib elements and nothing else
    let mut rib_degree = vec![0usize; frame.nodes.len()];
    let mut other = vec![false; frame.nodes.len()];
    for e in &frame.elements {
        for n in [e.node_i, e.node_j] {
            if e.kind == MemberKind::Rib {
                rib_degree[n] += 1;
            } else {
                other[n] = true;
            }
        }
    }
    let interior = (0..frame.nodes.len())
        .filter(|&n| rib_degree[n] == 2 && !other[n] && !frame.is_support(n))
        .count();
    let rib_elements = frame.elements.iter().filter(|e| e.kind == MemberKind::Rib).count();
    rib_elements - interior
}
