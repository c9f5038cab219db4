//! Quasi-static planar simulation of a compliant plug insertion following an
//! open-loop approach / slide / insert search, and misalignment windows.
//!
//! The y–z plane is simulated with contact mechanics: the plug is a rigid
//! rectangle pinched across y by two mirrored fingers, the socket a slot of
//! axis-aligned blocks. The x direction is reduced to a kinematic capture rule
//! limited by the plug's free rotation about the pinch axis.

mod contact;
mod export;

use nalgebra::{Matrix3, Vector2};
use serde::{Deserialize, Serialize};

use crate::characterize::{StiffnessMatrix, ViscoelasticFit};
use crate::error::{Error, Result};
use contact::{Anchors, ContactWorld, PlugShape, Pose, Rect, State};

pub use export::{trace_csv, trace_svg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fit {
    Press,
    Running,
    Transition,
}

impl Fit {
    /// Plug-to-socket clearance assumed for the fit class, mm.
    pub fn default_clearance(self) -> f64 {
        match self {
            Fit::Press => 0.0,
            Fit::Transition => 0.05,
            Fit::Running => 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gland {
    Straight,
    RightAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locking {
    Clip,
    Lever,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectorTraits {
    pub fit: Fit,
    /// mm of plug standing out of the seated socket
    pub exposed_after_insert: f64,
    pub gland: Gland,
    /// mm the socket pins stand above the socket floor; negative means recessed
    pub pin_height: f64,
    pub locking: Locking,
}

impl Default for ConnectorTraits {
    fn default() -> Self {
        ConnectorTraits {
            fit: Fit::Running,
            exposed_after_insert: 4.0,
            gland: Gland::Straight,
            pin_height: -0.5,
            locking: Locking::None,
        }
    }
}

/// Rigid plug body. `width_y` is the thickness pinched between the fingers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlugGeometry {
    pub width_y: f64,
    pub width_x: f64,
    pub height: f64,
    /// height of the fingertip contact above the plug's bottom face
    pub grip_height: f64,
}

impl Default for PlugGeometry {
    fn default() -> Self {
        PlugGeometry {
            width_y: 5.0,
            width_x: 10.0,
            height: 8.0,
            grip_height: 6.0,
        }
    }
}

/// Slot socket; the opening is the plug width plus the clearance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocketGeometry {
    pub depth: f64,
    /// wall thickness around the opening
    pub rim: f64,
    /// rounding radius of the socket edges
    #[serde(default = "default_edge_radius")]
    pub edge_radius: f64,
}

fn default_edge_radius() -> f64 {
    0.2
}

impl Default for SocketGeometry {
    fn default() -> Self {
        SocketGeometry {
            depth: 4.0,
            rim: 2.0,
            edge_radius: default_edge_radius(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsertionScenario {
    pub plug: PlugGeometry,
    pub socket: SocketGeometry,
    pub clearance: f64,
    /// plug-on-socket Coulomb coefficient
    pub friction_mu: f64,
    /// single-finger fingertip stiffness; the grip holds the plug between two mirrored fingers
    pub grip_compliance: StiffnessMatrix,
    #[serde(default)]
    pub viscoelastic: Option<ViscoelasticFit>,
    /// socket offset from its nominal position `[dx, dy]`, mm
    pub misalignment: [f64; 2],
    /// plug tilt about the pinch axis at first contact, deg
    pub tilt: f64,
    /// rotation the plug can make inside the pinch before it locks, deg
    pub free_rotation_limit: f64,
    /// in-plane plug rotation past which the pinch no longer holds the plug, deg
    #[serde(default = "default_grasp_rotation_limit")]
    pub grasp_rotation_limit: f64,
    pub connector_traits: ConnectorTraits,
}

fn default_grasp_rotation_limit() -> f64 {
    30.0
}

impl InsertionScenario {
    pub fn new(grip_compliance: StiffnessMatrix) -> InsertionScenario {
        let connector_traits = ConnectorTraits::default();
        InsertionScenario {
            plug: PlugGeometry::default(),
            socket: SocketGeometry::default(),
            clearance: connector_traits.fit.default_clearance(),
            friction_mu: 0.3,
            grip_compliance,
            viscoelastic: None,
            misalignment: [0.0, 0.0],
            tilt: 10.0,
            free_rotation_limit: 35.0,
            grasp_rotation_limit: default_grasp_rotation_limit(),
            connector_traits,
        }
    }

    pub fn with_misalignment(&self, axis: WindowAxis, offset: f64) -> InsertionScenario {
        let mut s = *self;
        s.misalignment = match axis {
            WindowAxis::X => [offset, 0.0],
            WindowAxis::Y => [0.0, offset],
        };
        s
    }

    pub fn opening_y(&self) -> f64 {
        self.plug.width_y + self.clearance
    }

    pub fn opening_x(&self) -> f64 {
        self.plug.width_x + self.clearance
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.plug;
        let positive = [
            p.width_y,
            p.width_x,
            p.height,
            p.grip_height,
            self.socket.depth,
            self.socket.rim,
        ];
        if !positive.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::Invalid("plug and socket dimensions must be positive".into()));
        }
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return Err(Error::Invalid(format!(
                "clearance must be non-negative, got {}",
                self.clearance
            )));
        }
        let r = self.socket.edge_radius;
        if !(r > 0.0 && r < 0.5 * self.socket.rim.min(self.socket.depth)) {
            return Err(Error::Invalid(format!(
                "edge radius must lie in (0, min(rim, depth)/2), got {r}"
            )));
        }
        if !(self.friction_mu >= 0.0 && self.friction_mu.is_finite()) {
            return Err(Error::Invalid("friction coefficient must be non-negative".into()));
        }
        if p.grip_height > p.height {
            return Err(Error::Invalid("grip point lies above the plug".into()));
        }
        if p.grip_height <= self.socket.depth {
            return Err(Error::Invalid(
                "fingertips would enter the socket; grip higher on the exposed part".into(),
            ));
        }
        let t = &self.connector_traits;
        if !(t.exposed_after_insert >= 0.0 && t.pin_height.is_finite()) {
            return Err(Error::Invalid("exposed length must be non-negative".into()));
        }
        if !(self.tilt.is_finite() && self.tilt.abs() < 45.0) {
            return Err(Error::Invalid(format!(
                "tilt must lie in (-45, 45) deg, got {}",
                self.tilt
            )));
        }
        if !(self.free_rotation_limit >= 0.0 && self.free_rotation_limit < 90.0) {
            return Err(Error::Invalid("free rotation limit must lie in [0, 90) deg".into()));
        }
        if !(self.grasp_rotation_limit > 0.0 && self.grasp_rotation_limit < 90.0) {
            return Err(Error::Invalid("grasp rotation limit must lie in (0, 90) deg".into()));
        }
        if !self.misalignment.iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("misalignment must be finite".into()));
        }
        self.grip_compliance.validate()
    }

    /// Grip stiffness on the plug in `(y, z, rotation)` about the grip center.
    ///
    /// Two fingers pinch the plug at `y = ±a`; the second finger is the mirror
    /// image of the first, and both hang tip down, so mount `z` is world `-z`.
    /// The couplings cancel in translation and reappear as a
    /// lateral–rotational term.
    pub fn grip_stiffness(&self) -> Matrix3<f64> {
        let k = &self.grip_compliance;
        let a = 0.5 * self.plug.width_y;
        Matrix3::new(
            2.0 * k.kyy,
            0.0,
            2.0 * a * k.kzy,
            0.0,
            2.0 * k.kzz,
            0.0,
            2.0 * a * k.kzy,
            0.0,
            2.0 * a * a * k.kzz,
        )
    }
}

/// Open-loop search trajectory and simulation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyParams {
    /// commanded increment, mm
    pub step: f64,
    /// plug bottom height above the socket top at the start, mm
    pub approach_clearance: f64,
    /// commanded depth of the plug bottom below the socket top after the approach, mm
    pub press: f64,
    /// how far inside the nominal x edge the leading corner is placed, mm
    pub x_lead: f64,
    /// y of the approach relative to the nominal socket position, mm
    pub y_start: f64,
    /// +y travel of the side-contact slide, mm
    pub slide_y: f64,
    /// commanded travel past the seated position, mm
    pub insert_overtravel: f64,
    /// N
    pub force_limit: f64,
    /// N/mm
    pub contact_stiffness: f64,
    /// insert increments without progress before a wedged plug counts as jammed
    pub jam_steps: usize,
    /// approach speed used for the viscous force estimate, mm/s
    pub approach_speed: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            step: 0.1,
            approach_clearance: 1.0,
            press: 0.3,
            x_lead: 0.5,
            y_start: -5.0,
            slide_y: 6.0,
            insert_overtravel: 0.2,
            force_limit: 60.0,
            contact_stiffness: 1e3,
            jam_steps: 20,
            approach_speed: 100.0,
        }
    }
}

impl StrategyParams {
    pub fn validate(&self) -> Result<()> {
        let v = [
            self.step,
            self.approach_clearance,
            self.press,
            self.x_lead,
            self.y_start,
            self.slide_y,
            self.insert_overtravel,
            self.force_limit,
            self.contact_stiffness,
            self.approach_speed,
        ];
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::Invalid("strategy offsets must be finite".into()));
        }
        if !(self.step > 0.0 && self.force_limit > 0.0 && self.contact_stiffness > 0.0) {
            return Err(Error::Invalid(
                "step, force limit and contact stiffness must be positive".into(),
            ));
        }
        if self.approach_clearance < 0.0 || self.press < 0.0 || self.slide_y < 0.0 || self.insert_overtravel < 0.0 {
            return Err(Error::Invalid("strategy distances must be non-negative".into()));
        }
        if self.jam_steps == 0 || self.approach_speed < 0.0 {
            return Err(Error::Invalid("jam window and approach speed must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Approach,
    SlideX,
    SlideY,
    InsertZ,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Approach => "approach",
            Phase::SlideX => "slide_x",
            Phase::SlideY => "slide_y",
            Phase::InsertZ => "insert_z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Jammed,
    Missed,
    Overforce,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Jammed => "jammed",
            Outcome::Missed => "missed",
            Outcome::Overforce => "overforce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub step: usize,
    pub phase: Phase,
    /// commanded grip center `[y, z]`
    pub gripper: [f64; 2],
    /// plug grip center `[y, z]` and rotation in deg
    pub plug: [f64; 3],
    /// total contact force on the plug `[fx, fy, fz]`
    pub contact_force: [f64; 3],
    /// largest single contact force
    pub max_contact: f64,
    pub contacts: usize,
    /// grip spring plus contact forces, should be zero
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub phases: Vec<Phase>,
    pub samples: Vec<TraceSample>,
    pub outcome: Outcome,
    /// depth of the plug bottom below the socket top, mm
    pub insert_depth: f64,
    pub required_depth: f64,
    pub peak_contact_force: f64,
    /// transverse damper force at the approach speed, when a viscoelastic fit is given
    pub viscous_force: Option<f64>,
    pub viscous_overforce: bool,
}

impl SearchTrace {
    /// Plug grip-center path `[y, z, rotation_deg]`.
    pub fn tip_path(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| s.plug).collect()
    }

    pub fn contact_forces(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| s.contact_force).collect()
    }
}

/// A contact point with the unit direction of the force it exerts on the part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPoint {
    pub point: [f64; 2],
    pub normal: [f64; 2],
}

/// Two-point wedging test: some pair of contacts can push against each other
/// along the line joining them with both forces inside their friction cones,
/// so the part is held by internal forces whatever the applied push.
pub fn jamming_check(contacts: &[ContactPoint], mu: f64) -> bool {
    if !(mu > 0.0) || contacts.len() < 2 {
        return false;
    }
    let half_angle = mu.atan();
    let inside = |n: &[f64; 2], d: &Vector2<f64>| -> bool {
        let n = Vector2::new(n[0], n[1]);
        let (nn, dn) = (n.norm(), d.norm());
        if !(nn > 0.0 && dn > 0.0) {
            return false;
        }
        let cos = (n.dot(d) / (nn * dn)).clamp(-1.0, 1.0);
        cos.acos() < half_angle
    };
    for (i, a) in contacts.iter().enumerate() {
        for b in &contacts[i + 1..] {
            let d = Vector2::new(b.point[0] - a.point[0], b.point[1] - a.point[1]);
            if inside(&a.normal, &d) && inside(&b.normal, &(-d)) {
                return true;
            }
        }
    }
    false
}

/// Transverse damper force of the grip at `speed` mm/s.
pub fn viscous_force_estimate(fit: &ViscoelasticFit, speed: f64) -> Result<f64> {
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(Error::Domain(format!("speed must be non-negative, got {speed}")));
    }
    Ok(fit.viscous_force(speed))
}

/// x capture: the tilted leading corner has to fall into the opening during
/// the x slide, and the remaining offset has to be absorbed by the plug
/// swinging about the pinch axis within its free rotation.
fn x_capture(s: &InsertionScenario, strategy: &StrategyParams) -> Option<Outcome> {
    let w = s.plug.width_x;
    let half = 0.5 * s.opening_x();
    let dx = s.misalignment[0];
    let tilt = s.tilt.to_radians();
    let corner_start = -half + strategy.x_lead;
    let travel = half - strategy.x_lead + 0.5 * w * tilt.cos();
    let corner_end = corner_start + travel;
    if corner_end <= dx - half || corner_start >= dx + half {
        return Some(Outcome::Missed);
    }
    let misfit = dx.abs() - 0.5 * s.clearance;
    if misfit <= 0.0 {
        return None;
    }
    let reach = s.plug.grip_height * s.free_rotation_limit.to_radians().sin();
    if misfit > reach {
        Some(Outcome::Jammed)
    } else {
        None
    }
}

const EQ_TOL: f64 = 1e-7;
const MAX_BISECTIONS: u32 = 12;
const SEAT_TOL: f64 = 0.05;

struct Sim<'a> {
    world: ContactWorld,
    scenario: &'a InsertionScenario,
    strategy: &'a StrategyParams,
    state: State,
    anchors: Anchors,
    command: Pose,
    step: usize,
}

impl Sim<'_> {
    /// Moves the gripper to `target`, bisecting the increment when the
    /// contact solve fails. Stops early once a contact exceeds the force limit.
    fn advance(&mut self, target: Pose, depth: u32) -> Result<()> {
        match self
            .world
            .equilibrate(&self.state.pose, &target, &self.anchors, EQ_TOL, 200)
        {
            Ok(state) => {
                self.anchors = self.world.commit(&state);
                self.state = state;
                self.command = target;
                Ok(())
            }
            Err(residual) => {
                if depth >= MAX_BISECTIONS {
                    return Err(Error::ContactNonConvergent {
                        step: self.step,
                        residual,
                    });
                }
                let mid = 0.5 * (self.command + target);
                self.advance(mid, depth + 1)?;
                if self.overloaded() {
                    return Ok(());
                }
                self.advance(target, depth + 1)
            }
        }
    }

    fn overloaded(&self) -> bool {
        let limit = self.strategy.force_limit;
        self.state.contacts.iter().any(|c| c.force().norm() > limit)
    }

    fn sample(&self, phase: Phase) -> TraceSample {
        let mut total = Vector2::zeros();
        let mut max_contact: f64 = 0.0;
        for c in &self.state.contacts {
            let f = c.force();
            total += f;
            max_contact = max_contact.max(f.norm());
        }
        let p = self.state.pose;
        TraceSample {
            step: self.step,
            phase,
            gripper: [self.command.x, self.command.y],
            plug: [p.x, p.y, p.z.to_degrees()],
            contact_force: [0.0, total.x, total.y],
            max_contact,
            contacts: self.state.contacts.len(),
            residual: self.state.residual,
        }
    }

    fn bottom_corners(&self) -> [Vector2<f64>; 2] {
        let p = self.state.pose;
        let r = nalgebra::Rotation2::new(p.z);
        let c = self.world.plug.corners();
        let g = Vector2::new(p.x, p.y);
        [g + r * c[0], g + r * c[1]]
    }

    fn bottom_center(&self) -> Vector2<f64> {
        let [a, b] = self.bottom_corners();
        0.5 * (a + b)
    }

    /// Depth of the lowest bottom corner below the socket top.
    fn depth(&self) -> f64 {
        let [a, b] = self.bottom_corners();
        (-a.y.min(b.y)).max(0.0)
    }

    fn inside_opening(&self, y: f64) -> bool {
        let m = self.scenario.misalignment[1];
        (y - m).abs() < 0.5 * self.scenario.opening_y()
    }

    fn entered(&self) -> bool {
        self.bottom_corners()
            .iter()
            .any(|c| c.y < -SEAT_TOL && self.inside_opening(c.x))
    }

    fn pin_collision(&self) -> bool {
        let s = self.scenario;
        let pin = s.connector_traits.pin_height;
        if pin <= 0.0 || self.state.contacts.is_empty() {
            return false;
        }
        let top = -s.socket.depth + pin;
        let m = s.misalignment[1];
        let off = (self.bottom_center().x - m).abs();
        let aligned = off <= 0.5 * s.clearance + 1e-6;
        self.bottom_corners()
            .iter()
            .any(|c| c.y < top && self.inside_opening(c.x))
            && !aligned
    }

    fn wedged(&self) -> bool {
        let pts: Vec<ContactPoint> = self
            .state
            .contacts
            .iter()
            .map(|c| ContactPoint {
                point: [c.point.x, c.point.y],
                normal: [c.normal.x, c.normal.y],
            })
            .collect();
        jamming_check(&pts, self.scenario.friction_mu)
    }
}

fn socket_world(s: &InsertionScenario, strategy: &StrategyParams) -> ContactWorld {
    let m = s.misalignment[1];
    let half = 0.5 * s.opening_y();
    let (d, rim) = (s.socket.depth, s.socket.rim);
    let base = d + s.plug.height;
    // walls reach into the floor so a corner in the concave edge feels both
    let wall = |lo: f64, hi: f64| Rect {
        lo: Vector2::new(lo, -d - base),
        hi: Vector2::new(hi, 0.0),
    };
    let blocks = vec![
        wall(m - half - rim, m - half),
        wall(m + half, m + half + rim),
        Rect {
            lo: Vector2::new(m - half - rim, -d - base),
            hi: Vector2::new(m + half + rim, -d),
        },
    ];
    let r = s.socket.edge_radius;
    let edges = [m - half - rim + r, m - half - r, m + half + r, m + half + rim - r]
        .iter()
        .map(|&y| Vector2::new(y, -r))
        .collect();
    ContactWorld {
        blocks,
        edges,
        radius: r,
        plug: PlugShape {
            half_width: 0.5 * s.plug.width_y,
            below: s.plug.grip_height,
            above: s.plug.height - s.plug.grip_height,
        },
        grip: s.grip_stiffness(),
        k_n: strategy.contact_stiffness,
        mu: s.friction_mu,
    }
}

/// Runs the open-loop search and insertion for one socket offset.
pub fn simulate_insert(scenario: &InsertionScenario, strategy: &StrategyParams) -> Result<SearchTrace> {
    scenario.validate()?;
    strategy.validate()?;
    let s = scenario;
    let hg = s.plug.grip_height;
    let y0 = strategy.y_start;
    let start = Pose::new(y0, strategy.approach_clearance + hg, 0.0);
    let world = socket_world(s, strategy);
    let initial = State {
        pose: start,
        contacts: Vec::new(),
        residual: 0.0,
    };
    let mut sim = Sim {
        world,
        scenario: s,
        strategy,
        state: initial,
        anchors: Anchors::new(),
        command: start,
        step: 0,
    };
    // settle at the start pose in case the plug already touches the socket
    sim.advance(start, 0)?;

    let viscous_force = s.viscoelastic.map(|f| f.viscous_force(strategy.approach_speed));
    let viscous_overforce = viscous_force.is_some_and(|f| f > strategy.force_limit);

    let x_half = 0.5 * s.opening_x();
    let x_travel = x_half - strategy.x_lead + 0.5 * s.plug.width_x * s.tilt.to_radians().cos();
    let press_z = -strategy.press + hg;
    let seat_z = -s.socket.depth - strategy.insert_overtravel + hg;
    let legs = [
        (Phase::Approach, Pose::new(y0, press_z, 0.0), start.y - press_z),
        (Phase::SlideX, Pose::new(y0, press_z, 0.0), x_travel),
        (
            Phase::SlideY,
            Pose::new(y0 + strategy.slide_y, press_z, 0.0),
            strategy.slide_y,
        ),
        (
            Phase::InsertZ,
            Pose::new(y0 + strategy.slide_y, seat_z, 0.0),
            press_z - seat_z,
        ),
    ];

    let mut samples = vec![sim.sample(Phase::Approach)];
    let mut phases = Vec::new();
    let mut outcome = None;
    let mut entered = false;
    let mut best_depth = f64::NEG_INFINITY;
    let mut stalled = 0usize;
    let x_failure = x_capture(s, strategy);

    'legs: for (phase, target, length) in legs {
        phases.push(phase);
        let from = sim.command;
        let n = ((length.abs() / strategy.step).ceil() as usize).max(1);
        for i in 1..=n {
            sim.step += 1;
            let t = i as f64 / n as f64;
            sim.advance(from + (target - from) * t, 0)?;
            let sample = sim.sample(phase);
            samples.push(sample);
            entered |= sim.entered();
            if sim.overloaded() || sim.pin_collision() {
                outcome = Some(Outcome::Overforce);
                break 'legs;
            }
            if sim.state.pose.z.abs() > s.grasp_rotation_limit.to_radians() {
                // the plug has turned out of the pinch
                outcome = Some(if entered { Outcome::Jammed } else { Outcome::Missed });
                break 'legs;
            }
            if phase == Phase::SlideX {
                if let Some(fail) = x_failure {
                    outcome = Some(fail);
                    break 'legs;
                }
            }
            if phase == Phase::InsertZ {
                let depth = sim.depth();
                if depth > best_depth + 1e-3 {
                    best_depth = depth;
                    stalled = 0;
                } else {
                    stalled += 1;
                    if stalled >= strategy.jam_steps && entered && sim.wedged() {
                        outcome = Some(Outcome::Jammed);
                        break 'legs;
                    }
                }
            }
        }
    }

    let required_depth = s.socket.depth - SEAT_TOL;
    // a plug that dipped in and slid out again ends outside the opening
    let inside = sim.entered();
    let insert_depth = if inside { sim.depth() } else { 0.0 };
    let outcome = outcome.unwrap_or({
        let seated = inside && insert_depth >= required_depth && sim.inside_opening(sim.bottom_center().x);
        if seated {
            Outcome::Success
        } else if inside {
            Outcome::Jammed
        } else {
            Outcome::Missed
        }
    });
    let peak_contact_force = samples.iter().map(|s| s.max_contact).fold(0.0, f64::max);
    Ok(SearchTrace {
        phases,
        samples,
        outcome,
        insert_depth,
        required_depth,
        peak_contact_force,
        viscous_force,
        viscous_overforce,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowAxis {
    X,
    Y,
}

impl WindowAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            WindowAxis::X => "x",
            WindowAxis::Y => "y",
        }
    }
}

/// Misalignment range that still inserts, scanned outward from zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceWindow {
    pub axis: WindowAxis,
    pub min_offset: f64,
    pub max_offset: f64,
    pub window: f64,
    /// outcome at the first failing offset on the side that failed closer to zero
    pub limiting_outcome: Outcome,
}

/// Offsets beyond this are not scanned, mm.
pub const WINDOW_SCAN_LIMIT: f64 = 30.0;

/// Steps outward from zero in `step` increments on each side until the first
/// failure. An empty window (failure at zero) is reported as `[0, 0]`.
pub fn tolerance_window(
    template: &InsertionScenario,
    strategy: &StrategyParams,
    axis: WindowAxis,
    step: f64,
) -> Result<ToleranceWindow> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!("window step must be positive, got {step}")));
    }
    let run = |offset: f64| -> Result<Outcome> {
        Ok(simulate_insert(&template.with_misalignment(axis, offset), strategy)?.outcome)
    };
    let at_zero = run(0.0)?;
    if at_zero != Outcome::Success {
        return Ok(ToleranceWindow {
            axis,
            min_offset: 0.0,
            max_offset: 0.0,
            window: 0.0,
            limiting_outcome: at_zero,
        });
    }
    let n_max = (WINDOW_SCAN_LIMIT / step).floor() as usize;
    let side = |sign: f64| -> Result<(f64, usize, Outcome)> {
        for i in 1..=n_max {
            let outcome = run(sign * step * i as f64)?;
            if outcome != Outcome::Success {
                return Ok((sign * step * (i - 1) as f64, i, outcome));
            }
        }
        Ok((sign * step * n_max as f64, n_max + 1, Outcome::Missed))
    };
    let (lo, lo_i, lo_out) = side(-1.0)?;
    let (hi, hi_i, hi_out) = side(1.0)?;
    Ok(ToleranceWindow {
        axis,
        min_offset: lo,
        max_offset: hi,
        window: hi - lo,
        limiting_outcome: if hi_i < lo_i { hi_out } else { lo_out },
    })
}
