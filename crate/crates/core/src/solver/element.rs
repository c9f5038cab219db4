//! Two-node planar Euler-Bernoulli beam in a corotational frame.
//!
//! The local element is linear (axial stretch plus two end rotations measured
//! from the chord); large rigid rotations are carried by the chord angle.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::geometry::{Element, PlanarFrame};

pub type Vec6 = SVector<f64, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;

#[derive(Debug, Clone)]
pub(crate) struct BeamData {
    pub i: usize,
    pub j: usize,
    pub l0: f64,
    pub cos0: f64,
    pub sin0: f64,
    pub ea: f64,
    pub ei: f64,
    pub area: f64,
    pub inertia: f64,
    pub fiber: f64,
    pub yield_strength: f64,
}

impl BeamData {
    pub fn from_frame(frame: &PlanarFrame) -> Vec<BeamData> {
        frame.elements.iter().map(|e| Self::new(frame, e)).collect()
    }

    fn new(frame: &PlanarFrame, e: &Element) -> BeamData {
        let d = frame.nodes[e.node_j] - frame.nodes[e.node_i];
        let l0 = d.norm();
        let mat = &frame.materials[e.material];
        let modulus = mat.effective_modulus();
        // stress follows strain at the nominal modulus, so the calibration
        // scale acts like a larger section rather than a stiffer material
        let scale = modulus / mat.youngs_modulus;
        BeamData {
            i: e.node_i,
            j: e.node_j,
            l0,
            cos0: d.x / l0,
            sin0: d.y / l0,
            ea: modulus * e.section.area,
            ei: modulus * e.section.second_moment,
            area: scale * e.section.area,
            inertia: scale * e.section.second_moment,
            fiber: e.section.half_thickness,
            yield_strength: mat.yield_strength,
        }
    }

    pub fn dofs(&self) -> [usize; 6] {
        let (a, b) = (3 * self.i, 3 * self.j);
        [a, a + 1, a + 2, b, b + 1, b + 2]
    }

    fn local_stiffness(&self) -> Matrix3<f64> {
        let k = self.ei / self.l0;
        Matrix3::new(
            self.ea / self.l0,
            0.0,
            0.0,
            0.0,
            4.0 * k,
            2.0 * k,
            0.0,
            2.0 * k,
            4.0 * k,
        )
    }

    /// Small-displacement stiffness in global coordinates.
    pub fn linear_stiffness(&self) -> Mat6 {
        let b = b_matrix(self.cos0, self.sin0, self.l0);
        b.transpose() * self.local_stiffness() * b
    }

    /// Local forces `(N, M1, M2)` of the small-displacement element.
    pub fn linear_local_forces(&self, ue: &Vec6) -> Vector3<f64> {
        let b = b_matrix(self.cos0, self.sin0, self.l0);
        self.local_stiffness() * (b * ue)
    }

    /// Corotational internal force, tangent stiffness and local forces.
    ///
    /// The chord is formed as reference chord plus relative displacement so that
    /// short stiff members keep full precision far from the origin.
    pub fn corotational(&self, ue: &Vec6) -> (Vec6, Mat6, Vector3<f64>) {
        let (x0, y0) = (self.l0 * self.cos0, self.l0 * self.sin0);
        let (du, dv) = (ue[3] - ue[0], ue[4] - ue[1]);
        let (dx, dy) = (x0 + du, y0 + dv);
        let l = (dx * dx + dy * dy).sqrt();
        let (c, s) = (dx / l, dy / l);
        // rigid rotation of the chord relative to its reference direction
        let alpha = (x0 * dv - y0 * du).atan2(x0 * dx + y0 * dy);
        let stretch = (2.0 * (x0 * du + y0 * dv) + du * du + dv * dv) / (l + self.l0);
        let t1 = wrap_angle(ue[2] - alpha);
        let t2 = wrap_angle(ue[5] - alpha);
        let ql = self.local_stiffness() * Vector3::new(stretch, t1, t2);
        let b = b_matrix(c, s, l);
        let f = b.transpose() * ql;
        let r = Vec6::new(-c, -s, 0.0, c, s, 0.0);
        let z = Vec6::new(s, -c, 0.0, -s, c, 0.0);
        let kt = b.transpose() * self.local_stiffness() * b
            + (ql[0] / l) * (z * z.transpose())
            + ((ql[1] + ql[2]) / (l * l)) * (r * z.transpose() + z * r.transpose());
        (f, kt, ql)
    }

    /// Extreme-fiber stress `|N|/A + |M|·c/I`, maximum over both ends.
    pub fn fiber_stress(&self, local: &Vector3<f64>) -> f64 {
        let axial = local[0].abs() / self.area;
        let m = local[1].abs().max(local[2].abs());
        axial + m * self.fiber / self.inertia
    }
}

fn b_matrix(c: f64, s: f64, l: f64) -> SMatrix<f64, 3, 6> {
    SMatrix::<f64, 3, 6>::from_row_slice(&[
        -c,
        -s,
        0.0,
        c,
        s,
        0.0,
        -s / l,
        c / l,
        1.0,
        s / l,
        -c / l,
        0.0,
        -s / l,
        c / l,
        0.0,
        s / l,
        -c / l,
        1.0,
    ])
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut a = a % two_pi;
    if a > std::f64::consts::PI {
        a -= two_pi;
    } else if a <= -std::f64::consts::PI {
        a += two_pi;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn beam(angle: f64) -> BeamData {
        BeamData {
            i: 0,
            j: 1,
            l0: 2.0,
            cos0: angle.cos(),
            sin0: angle.sin(),
            ea: 100.0,
            ei: 3.0,
            area: 1.0,
            inertia: 1.0 / 12.0,
            fiber: 0.5,
            yield_strength: 1.0,
        }
    }

    #[test]
    fn linear_matches_textbook_frame_element() {
        let k = beam(0.0).linear_stiffness();
        let (ea, ei, l) = (100.0, 3.0, 2.0);
        assert_relative_eq!(k[(0, 0)], ea / l, epsilon = 1e-12);
        assert_relative_eq!(k[(1, 1)], 12.0 * ei / l.powi(3), epsilon = 1e-12);
        assert_relative_eq!(k[(1, 2)], 6.0 * ei / (l * l), epsilon = 1e-12);
        assert_relative_eq!(k[(2, 2)], 4.0 * ei / l, epsilon = 1e-12);
        assert_relative_eq!(k[(2, 5)], 2.0 * ei / l, epsilon = 1e-12);
        assert_relative_eq!(k[(1, 4)], -12.0 * ei / l.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let b = beam(0.4);
        let ue = Vec6::new(0.01, -0.02, 0.1, 0.05, 0.3, -0.2);
        let (_, kt, _) = b.corotational(&ue);
        let h = 1e-6;
        for k in 0..6 {
            let mut up = ue;
            let mut dn = ue;
            up[k] += h;
            dn[k] -= h;
            let (fp, _, _) = b.corotational(&up);
            let (fm, _, _) = b.corotational(&dn);
            let col = (fp - fm) / (2.0 * h);
            for r in 0..6 {
                assert_relative_eq!(kt[(r, k)], col[r], epsilon = 1e-5, max_relative = 1e-5);
            }
        }
        assert_relative_eq!(kt, kt.transpose(), epsilon = 1e-10);
    }

    #[test]
    fn rigid_rotation_is_stress_free() {
        let b = beam(0.0);
        let phi: f64 = 1.1;
        let ue = Vec6::new(0.0, 0.0, phi, 2.0 * phi.cos() - 2.0, 2.0 * phi.sin(), phi);
        let (f, _, q) = b.corotational(&ue);
        assert!(f.norm() < 1e-12);
        assert!(q.norm() < 1e-12);
    }
}
