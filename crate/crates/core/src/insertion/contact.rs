//! Planar penalty contact between a rigid plug held by a linear grip spring
//! and a fixed socket made of rounded rectangular blocks.
//!
//! Every contact is a point-to-rectangle distance: plug corners against the
//! block cores, and the rounded top edges of the socket against the plug.
//! Gap and normal stay continuous outside the rectangle, so a corner resting
//! on a corner has no face to flip between.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Rotation2, Vector2, Vector3};

fn perp(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

fn cross(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rect {
    pub lo: Vector2<f64>,
    pub hi: Vector2<f64>,
}

impl Rect {
    fn shrink(&self, r: f64) -> Rect {
        let d = Vector2::new(r, r);
        Rect {
            lo: self.lo + d,
            hi: self.hi - d,
        }
    }

    /// Closest point, signed distance (negative inside) and outward unit normal.
    fn closest(&self, p: &Vector2<f64>) -> (Vector2<f64>, f64, Vector2<f64>) {
        let q = Vector2::new(p.x.clamp(self.lo.x, self.hi.x), p.y.clamp(self.lo.y, self.hi.y));
        let d = (p - q).norm();
        if d > 0.0 {
            return (q, d, (p - q) / d);
        }
        let faces = [
            (p.x - self.lo.x, Vector2::new(-1.0, 0.0)),
            (self.hi.x - p.x, Vector2::new(1.0, 0.0)),
            (p.y - self.lo.y, Vector2::new(0.0, -1.0)),
            (self.hi.y - p.y, Vector2::new(0.0, 1.0)),
        ];
        let (depth, n) = faces.into_iter().fold(faces[0], |a, b| if b.0 < a.0 { b } else { a });
        (p + n * depth, -depth, n)
    }
}

/// Rigid rectangle; body coordinates are relative to the grip center.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PlugShape {
    pub half_width: f64,
    /// distance from the grip center down to the bottom face
    pub below: f64,
    /// distance from the grip center up to the top face
    pub above: f64,
}

impl PlugShape {
    pub fn corners(&self) -> [Vector2<f64>; 4] {
        let (w, b, a) = (self.half_width, self.below, self.above);
        [
            Vector2::new(-w, -b),
            Vector2::new(w, -b),
            Vector2::new(w, a),
            Vector2::new(-w, a),
        ]
    }

    fn rect(&self) -> Rect {
        Rect {
            lo: Vector2::new(-self.half_width, -self.below),
            hi: Vector2::new(self.half_width, self.above),
        }
    }
}

/// Identity of a contact pair, stable across steps for friction history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum ContactKey {
    /// plug corner `corner` against block `block`
    PlugCorner { corner: usize, block: usize },
    /// rounded socket edge `edge` against the plug
    SocketEdge { edge: usize },
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ContactForce {
    pub key: ContactKey,
    /// point of the plug the force acts on
    pub point: Vector2<f64>,
    /// unit normal of the force acting on the plug
    pub normal: Vector2<f64>,
    pub normal_force: f64,
    pub tangent_force: f64,
    pub tangent: Vector2<f64>,
    /// elastic friction force before saturation
    pub trial: f64,
    /// Coulomb bound
    pub cap: f64,
    anchor: Vector2<f64>,
}

/// Saturation level at which the friction anchor is dragged along.
const SLIP_SATURATION: f64 = 2.65;

const PSEUDO_TIME_ITER: usize = 4000;

const MAX_MOVE: f64 = 0.05;

impl ContactForce {
    pub fn force(&self) -> Vector2<f64> {
        self.normal * self.normal_force + self.tangent * self.tangent_force
    }
}

/// Pose `(y, z, rotation)` of the grip center.
pub(crate) type Pose = Vector3<f64>;

/// Friction anchors: a world point for plug corners, a plug body point for socket edges.
pub(crate) type Anchors = BTreeMap<ContactKey, Vector2<f64>>;

pub(crate) struct ContactWorld {
    pub blocks: Vec<Rect>,
    /// centers of the rounded socket edges
    pub edges: Vec<Vector2<f64>>,
    /// rounding radius of the socket edges
    pub radius: f64,
    pub plug: PlugShape,
    pub grip: Matrix3<f64>,
    pub k_n: f64,
    pub mu: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct State {
    pub pose: Pose,
    pub contacts: Vec<ContactForce>,
    pub residual: f64,
}

fn to_world(pose: &Pose, body: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(pose.x, pose.y) + Rotation2::new(pose.z) * body
}

fn to_body(pose: &Pose, p: &Vector2<f64>) -> Vector2<f64> {
    Rotation2::new(-pose.z) * (p - Vector2::new(pose.x, pose.y))
}

impl ContactWorld {
    /// Active contacts at `pose`. New pairs take their friction anchor from `previous`.
    pub fn contacts(&self, pose: &Pose, anchors: &Anchors, previous: &Pose) -> Vec<ContactForce> {
        let mut out = Vec::new();
        let r = self.radius;
        let k_t = self.k_n;
        // `moved` is the displacement of the plug material point since it stuck
        let mut push = |key, point, normal: Vector2<f64>, gap: f64, moved: Vector2<f64>, anchor| {
            let f_n = self.k_n * (r - gap);
            let tangent = perp(&normal);
            let trial = -k_t * moved.dot(&tangent);
            let cap = self.mu * f_n;
            // smooth saturation keeps Newton away from the stick/slip kink
            let f_t = if cap > 0.0 { cap * (trial / cap).tanh() } else { 0.0 };
            out.push(ContactForce {
                key,
                point,
                normal,
                normal_force: f_n,
                tangent_force: f_t,
                tangent,
                trial,
                cap,
                anchor,
            });
        };
        for (corner, body) in self.plug.corners().iter().enumerate() {
            let p = to_world(pose, body);
            for (block, b) in self.blocks.iter().enumerate() {
                let (_, gap, n) = b.shrink(r).closest(&p);
                if gap >= r {
                    continue;
                }
                let key = ContactKey::PlugCorner { corner, block };
                let anchor = anchors.get(&key).copied().unwrap_or_else(|| to_world(previous, body));
                push(key, p, n, gap, p - anchor, anchor);
            }
        }
        let rect = self.plug.rect();
        let rot = Rotation2::new(pose.z);
        for (edge, c) in self.edges.iter().enumerate() {
            let (q, gap, n) = rect.closest(&to_body(pose, c));
            if gap >= r {
                continue;
            }
            let key = ContactKey::SocketEdge { edge };
            let anchor = anchors.get(&key).copied().unwrap_or_else(|| to_body(previous, c));
            push(
                key,
                to_world(pose, &q),
                -(rot * n),
                gap,
                to_world(pose, &anchor) - c,
                anchor,
            );
        }
        out
    }

    fn residual(
        &self,
        pose: &Pose,
        command: &Pose,
        anchors: &Anchors,
        previous: &Pose,
    ) -> (Vector3<f64>, Vec<ContactForce>) {
        let mut res = -(self.grip * (pose - command));
        let center = Vector2::new(pose.x, pose.y);
        let contacts = self.contacts(pose, anchors, previous);
        for c in &contacts {
            let f = c.force();
            res.x += f.x;
            res.y += f.y;
            res.z += cross(&(c.point - center), &f);
        }
        (res, contacts)
    }

    fn jacobian(&self, q: &Pose, eval: &dyn Fn(&Pose) -> Vector3<f64>) -> Matrix3<f64> {
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let h = 1e-7;
            let mut qp = *q;
            let mut qm = *q;
            qp[j] += h;
            qm[j] -= h;
            jac.set_column(j, &((eval(&qp) - eval(&qm)) / (2.0 * h)));
        }
        jac
    }

    /// Scales `dq` so no point of the plug moves more than `MAX_MOVE` in one
    /// iteration, which keeps corners from tunnelling through thin walls.
    fn limit_step(&self, dq: Vector3<f64>) -> Vector3<f64> {
        let reach = self.plug.half_width.hypot(self.plug.below.max(self.plug.above));
        let travel = dq.x.hypot(dq.y) + reach * dq.z.abs();
        if travel > MAX_MOVE {
            dq * (MAX_MOVE / travel)
        } else {
            dq
        }
    }

    /// Quasi-static equilibrium for gripper pose `command`, starting from `start`.
    ///
    /// Newton with a backtracking line search first; if that stalls, pseudo-time
    /// continuation follows the relaxation path to a stable equilibrium.
    pub fn equilibrate(
        &self,
        start: &Pose,
        command: &Pose,
        anchors: &Anchors,
        tol: f64,
        max_iter: usize,
    ) -> std::result::Result<State, f64> {
        let eval = |q: &Pose| self.residual(q, command, anchors, start);
        let force = |q: &Pose| eval(q).0;
        let norm = |r: &Vector3<f64>| r.amax();
        let done = |q: Pose, r: Vector3<f64>, contacts: Vec<ContactForce>| State {
            pose: q,
            contacts,
            residual: norm(&r),
        };

        let mut q = *start;
        let (mut r, mut contacts) = eval(&q);
        for _ in 0..max_iter {
            if norm(&r) <= tol {
                return Ok(done(q, r, contacts));
            }
            let jac = self.jacobian(&q, &force);
            let Some(dq) = jac.lu().solve(&(-r)) else {
                break;
            };
            let dq = self.limit_step(dq);
            let mut alpha = 1.0;
            loop {
                let trial = q + dq * alpha;
                let (rt, ct) = eval(&trial);
                if norm(&rt) < norm(&r) || alpha < 1e-4 {
                    q = trial;
                    r = rt;
                    contacts = ct;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if norm(&r) <= tol {
            return Ok(done(q, r, contacts));
        }

        // (M/dt - J) dq = r, with rotation scaled by the plug size
        let scale = self.plug.half_width.max(self.plug.below).powi(2);
        let mass = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, scale));
        let mut q = *start;
        let (mut r, mut contacts) = eval(&q);
        let mut dt = 1e-3;
        for _ in 0..PSEUDO_TIME_ITER {
            if norm(&r) <= tol {
                return Ok(done(q, r, contacts));
            }
            let jac = self.jacobian(&q, &force);
            let Some(dq) = (mass / dt - jac).lu().solve(&r) else {
                return Err(norm(&r));
            };
            let dq = self.limit_step(dq);
            let (rt, ct) = eval(&(q + dq));
            let ratio = norm(&r) / norm(&rt).max(1e-300);
            // keep growing through slow bottlenecks near a fold, where the residual stalls
            dt = if ratio >= 0.98 {
                (dt * ratio.clamp(1.2, 4.0)).min(1e6)
            } else {
                dt * (0.5 * ratio).max(0.2)
            };
            q += dq;
            r = rt;
            contacts = ct;
        }
        Err(norm(&r))
    }

    /// Friction anchors after accepting `state`; a slipping contact drags its anchor.
    pub fn commit(&self, state: &State) -> Anchors {
        state
            .contacts
            .iter()
            .map(|c| {
                let limit = SLIP_SATURATION * c.cap;
                let excess = c.trial - c.trial.clamp(-limit, limit);
                let shift = c.tangent * (excess / self.k_n);
                let anchor = match c.key {
                    ContactKey::PlugCorner { .. } => c.anchor - shift,
                    ContactKey::SocketEdge { .. } => c.anchor + Rotation2::new(-state.pose.z) * shift,
                };
                (c.key, anchor)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_distance_is_continuous_across_the_surface() {
        let b = Rect {
            lo: Vector2::new(0.0, 0.0),
            hi: Vector2::new(2.0, 1.0),
        };
        let (_, out, n) = b.closest(&Vector2::new(1.0, 1.0 + 1e-9));
        let (_, inn, m) = b.closest(&Vector2::new(1.0, 1.0 - 1e-9));
        assert!((out - inn).abs() < 1e-8);
        assert_eq!(n, m);
        let (q, d, n) = b.closest(&Vector2::new(3.0, 2.0));
        assert_eq!(q, Vector2::new(2.0, 1.0));
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert!((n - Vector2::new(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn committed_anchor_leaves_the_friction_spring_at_its_limit() {
        let world = ContactWorld {
            blocks: vec![Rect {
                lo: Vector2::new(-10.0, -5.0),
                hi: Vector2::new(10.0, 0.0),
            }],
            edges: vec![Vector2::new(3.0, -0.2)],
            radius: 0.2,
            plug: PlugShape {
                half_width: 1.0,
                below: 2.0,
                above: 1.0,
            },
            grip: Matrix3::identity(),
            k_n: 1000.0,
            mu: 0.3,
        };
        let before = Pose::new(0.0, 1.95, 0.0);
        let after = Pose::new(0.5, 1.95, 0.01);
        let cs = world.contacts(&after, &Anchors::new(), &before);
        assert_eq!(cs.len(), 2);
        let state = State {
            pose: after,
            contacts: cs,
            residual: 0.0,
        };
        let anchors = world.commit(&state);
        for c in world.contacts(&after, &anchors, &after) {
            assert!(
                (c.trial.abs() - SLIP_SATURATION * c.cap).abs() < 1e-6 * c.cap.max(1.0),
                "{c:?}"
            );
        }
    }
}
