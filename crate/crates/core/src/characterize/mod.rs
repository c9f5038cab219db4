//! Virtual identification experiments on a finger frame: directional
//! stiffness, principal compliance axes, viscoelastic fits, strength limits,
//! and modulus calibration.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_frame, FingerDesign, PlanarFrame};
use crate::solver::{solve_linear, Equilibrium, LoadCase, NonlinearModel, Prescribed, SolveResult, SolverSettings};

/// Out-of-plane stiffness used when no measurement is supplied, N/mm.
pub const DEFAULT_KXX: f64 = 2.9;

/// Axis convention of a stiffness matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StiffnessFrame {
    /// y transverse toward the contact side, z along the mount normal.
    Mount,
}

/// Fingertip stiffness in N/mm. `kzy` is the symmetric y–z coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessMatrix {
    pub kxx: f64,
    pub kyy: f64,
    pub kzz: f64,
    pub kzy: f64,
    pub frame: StiffnessFrame,
}

impl StiffnessMatrix {
    pub fn new(kxx: f64, kyy: f64, kzz: f64, kzy: f64) -> StiffnessMatrix {
        StiffnessMatrix {
            kxx,
            kyy,
            kzz,
            kzy,
            frame: StiffnessFrame::Mount,
        }
    }

    /// In-plane block `[[kyy, kzy], [kzy, kzz]]`.
    pub fn k2(&self) -> Matrix2<f64> {
        Matrix2::new(self.kyy, self.kzy, self.kzy, self.kzz)
    }

    pub fn ratio(&self) -> f64 {
        self.kzz / self.kyy
    }

    pub fn scaled(&self, factor: f64) -> StiffnessMatrix {
        StiffnessMatrix {
            kxx: self.kxx * factor,
            kyy: self.kyy * factor,
            kzz: self.kzz * factor,
            kzy: self.kzy * factor,
            frame: self.frame,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.kxx, self.kyy, self.kzz, self.kzy].iter().all(|v| v.is_finite());
        if !(all_finite && self.kxx > 0.0 && self.kyy > 0.0 && self.kzz > 0.0) {
            return Err(Error::Invalid(format!("stiffness entries must be positive: {self:?}")));
        }
        if self.kyy * self.kzz - self.kzy * self.kzy <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "in-plane block [[{}, {}], [{}, {}]]",
                self.kyy, self.kzy, self.kzy, self.kzz
            )));
        }
        Ok(())
    }
}

/// Principal axes of the in-plane stiffness block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalAxes {
    /// Angle of the stiff axis measured from z toward y, deg.
    pub angle_deg: f64,
    pub k_soft: f64,
    pub k_stiff: f64,
}

pub fn principal_axis(k: &StiffnessMatrix) -> Result<PrincipalAxes> {
    k.validate()?;
    let theta = 0.5 * (2.0 * k.kzy).atan2(k.kzz - k.kyy);
    let eig = SymmetricEigen::new(k.k2()).eigenvalues;
    Ok(PrincipalAxes {
        angle_deg: theta.to_degrees(),
        k_soft: eig.min(),
        k_stiff: eig.max(),
    })
}

/// Probe schedule for stiffness identification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbePlan {
    /// Largest transverse probe, mm.
    pub y_amplitude: f64,
    /// Largest axial probe, mm.
    pub z_amplitude: f64,
    /// Amplitudes per axis and sign, evenly spaced up to the maximum.
    pub levels: usize,
    /// Lumped out-of-plane stiffness, N/mm.
    pub kxx: f64,
}

impl Default for ProbePlan {
    fn default() -> Self {
        ProbePlan {
            y_amplitude: 10.0,
            z_amplitude: 1.0,
            levels: 5,
            kxx: DEFAULT_KXX,
        }
    }
}

impl ProbePlan {
    fn validate(&self) -> Result<()> {
        if self.y_amplitude > 0.0 && self.z_amplitude > 0.0 && self.levels >= 1 && self.kxx > 0.0 {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid probe plan {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Y,
    Z,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Largest utilisation (stress over yield) of any element.
fn utilisation(frame: &PlanarFrame, r: &SolveResult) -> f64 {
    frame
        .elements
        .iter()
        .zip(&r.element_stresses)
        .map(|(e, s)| s / frame.materials[e.material].yield_strength)
        .fold(0.0, f64::max)
}

/// One probe: the probed axis is prescribed, the other translation and the
/// rotation of the fingertip are free.
fn probe(frame: &PlanarFrame, axis: Axis, amplitude: f64) -> Result<SolveResult> {
    let p = match axis {
        Axis::Y => Prescribed {
            dy: Some(amplitude),
            dz: None,
            rotation: None,
        },
        Axis::Z => Prescribed {
            dy: None,
            dz: Some(amplitude),
            rotation: None,
        },
    };
    solve_linear(frame, &LoadCase::new(1).prescribe(frame.tip_node, p))
}

/// Identifies the fingertip stiffness from mixed-control probes.
///
/// Each axis is probed at `levels` amplitudes of both signs. The in-plane block
/// is the least-squares solution of `F = K δ` over all probes, symmetrized.
pub fn identify_stiffness(frame: &PlanarFrame, plan: &ProbePlan) -> Result<StiffnessMatrix> {
    plan.validate()?;
    let mut deltas = Vec::new();
    let mut forces = Vec::new();
    for (axis, max) in [(Axis::Y, plan.y_amplitude), (Axis::Z, plan.z_amplitude)] {
        for level in 1..=plan.levels {
            let a = max * level as f64 / plan.levels as f64;
            for amp in [a, -a] {
                let r = probe(frame, axis, amp)?;
                let u = utilisation(frame, &r);
                if u >= 1.0 {
                    return Err(Error::ProbeNotElastic {
                        axis: axis.name(),
                        amplitude: amp,
                        stress: r.max_abs_stress,
                    });
                }
                deltas.push(r.tip_displacement(frame.tip_node));
                forces.push(r.tip_reaction);
            }
        }
    }
    // normal equations K (D Dᵀ) = F Dᵀ
    let mut dd = Matrix2::zeros();
    let mut fd = Matrix2::zeros();
    for (d, f) in deltas.iter().zip(&forces) {
        dd += d * d.transpose();
        fd += f * d.transpose();
    }
    let inv = dd
        .try_inverse()
        .ok_or_else(|| Error::SingularSystem("probe displacements do not span the plane".into()))?;
    let k = fd * inv;
    let k = 0.5 * (k + k.transpose());
    let out = StiffnessMatrix::new(plan.kxx, k[(0, 0)], k[(1, 1)], k[(0, 1)]);
    out.validate()?;
    Ok(out)
}

/// Stiffness identification that halves an axis amplitude (up to
/// `max_halvings` times) until its probes stay elastic.
///
/// Returns the matrix and the plan actually used.
pub fn identify_stiffness_elastic(
    frame: &PlanarFrame,
    plan: &ProbePlan,
    max_halvings: usize,
) -> Result<(StiffnessMatrix, ProbePlan)> {
    plan.validate()?;
    let mut used = *plan;
    for (axis, amp) in [(Axis::Y, &mut used.y_amplitude), (Axis::Z, &mut used.z_amplitude)] {
        let mut halvings = 0;
        loop {
            let u = utilisation(frame, &probe(frame, axis, *amp)?);
            if u < 1.0 {
                break;
            }
            if halvings == max_halvings {
                let r = probe(frame, axis, *amp)?;
                return Err(Error::ProbeNotElastic {
                    axis: axis.name(),
                    amplitude: *amp,
                    stress: r.max_abs_stress,
                });
            }
            *amp *= 0.5;
            halvings += 1;
        }
    }
    Ok((identify_stiffness(frame, &used)?, used))
}

/// One force sample of a viscoelastic experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscoSample {
    /// mm
    pub displacement: f64,
    /// mm/s
    pub velocity: f64,
    /// N
    pub force: f64,
}

/// Kelvin-Voigt fit `F = k δ + b δ̇`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscoelasticFit {
    /// N/mm
    pub k: f64,
    /// N·s/mm
    pub b: f64,
    /// N
    pub residual_rms: f64,
}

impl ViscoelasticFit {
    pub fn force(&self, displacement: f64, velocity: f64) -> f64 {
        self.k * displacement + self.b * velocity
    }

    pub fn viscous_force(&self, velocity: f64) -> f64 {
        self.b * velocity
    }
}

/// Viscous force of a damper `b` (N·s/mm) at `velocity` (mm/s).
pub fn viscous_force_estimate(b: f64, velocity: f64) -> f64 {
    b * velocity
}

/// Ordinary least squares of force on `[displacement, velocity]`.
pub fn fit_viscoelastic(samples: &[ViscoSample]) -> Result<ViscoelasticFit> {
    if samples.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|s| !(s.displacement.is_finite() && s.velocity.is_finite() && s.force.is_finite()))
    {
        return Err(Error::Invalid("non-finite sample".into()));
    }
    let v0 = samples[0].velocity;
    if samples.iter().all(|s| s.velocity == v0) {
        return Err(Error::RankDeficient("all samples share one velocity".into()));
    }
    let n = samples.len();
    let a = DMatrix::from_fn(n, 2, |i, j| {
        if j == 0 {
            samples[i].displacement
        } else {
            samples[i].velocity
        }
    });
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.force));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::RankDeficient(
            "displacement and velocity columns are collinear".into(),
        ));
    }
    let x = svd
        .solve(&y, 1e-14 * smax)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let resid = &a * &x - &y;
    let fit = ViscoelasticFit {
        k: x[0],
        b: x[1],
        residual_rms: (resid.norm_squared() / n as f64).sqrt(),
    };
    Ok(fit)
}

/// Failure mode of a strength sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    Yield,
    Buckling,
}

impl FailureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureMode::Yield => "yield",
            FailureMode::Buckling => "buckling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrengthReport {
    /// Tool force along the push direction at the last stable state, N.
    pub max_force: f64,
    /// Tool travel at the last stable state, mm.
    pub max_deflection: f64,
    pub failure_mode: FailureMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrengthSettings {
    /// Initial tool travel, mm. Doubled while no failure occurs.
    pub travel: f64,
    pub steps: usize,
    pub max_travel_doublings: usize,
    /// Bisections of the failing increment.
    pub refinements: usize,
    pub solver: SolverSettings,
}

impl Default for StrengthSettings {
    fn default() -> Self {
        StrengthSettings {
            travel: 40.0,
            steps: 20,
            max_travel_doublings: 3,
            refinements: 40,
            solver: SolverSettings::default(),
        }
    }
}

/// Tool push along the mount z axis toward the base.
pub const AXIAL_PUSH: [f64; 2] = [0.0, -1.0];

/// Pushes the fingertip along `direction` (a `[y, z]` unit vector) with a
/// tool that holds the tip translation and leaves its rotation free, until
/// first yield or loss of stability.
pub fn strength_sweep(frame: &PlanarFrame, direction: [f64; 2], settings: &StrengthSettings) -> Result<StrengthReport> {
    let dir = Vector2::new(direction[0], direction[1]);
    if !((dir.norm() - 1.0).abs() < 1e-9) {
        return Err(Error::Invalid(format!(
            "push direction must be a unit vector, got {direction:?}"
        )));
    }
    if settings.steps == 0 || !(settings.travel > 0.0) {
        return Err(Error::Invalid("strength sweep needs positive travel and steps".into()));
    }
    let tip = frame.tip_node;
    let mut travel = settings.travel;
    for _ in 0..=settings.max_travel_doublings {
        let load =
            LoadCase::new(settings.steps).prescribe(tip, Prescribed::translation(dir.x * travel, dir.y * travel));
        let model = NonlinearModel::new(frame, &load, settings.solver)?;
        let mut stable = model.zero_state();
        let mut failing: Option<Equilibrium> = None;
        for step in 1..=settings.steps {
            let lambda = step as f64 / settings.steps as f64;
            let next = model
                .advance(&stable, lambda)
                .map_err(|residual| Error::Diverged { step, residual })?;
            if next.unstable() || next.yielded() {
                failing = Some(next);
                break;
            }
            stable = next;
        }
        let Some(mut fail) = failing else {
            travel *= 2.0;
            continue;
        };
        let mut hi = fail.load_factor;
        for _ in 0..settings.refinements {
            let mid = 0.5 * (stable.load_factor + hi);
            match model.advance(&stable, mid) {
                Ok(eq) if eq.unstable() || eq.yielded() => {
                    hi = mid;
                    fail = eq;
                }
                Ok(eq) => stable = eq,
                Err(_) => hi = mid,
            }
        }
        let force = model.node_reaction(&stable, tip).dot(&dir);
        let deflection = stable.load_factor * travel;
        if !(force > 0.0 && deflection > 0.0) {
            return Err(Error::Domain(format!(
                "fingertip fails before carrying load (force {force:.3e} N, travel {deflection:.3e} mm)"
            )));
        }
        return Ok(StrengthReport {
            max_force: force,
            max_deflection: deflection,
            failure_mode: if fail.unstable() {
                FailureMode::Buckling
            } else {
                FailureMode::Yield
            },
        });
    }
    Err(Error::Domain(format!("no failure within {travel} mm of tool travel")))
}

/// Straight line through two (angle, stiffness) points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    /// N/mm
    pub value: f64,
    /// N/(mm·deg)
    pub slope: f64,
    pub intercept: f64,
}

pub fn extrapolate_stiffness(points: &[(f64, f64)], target_angle: f64) -> Result<Extrapolation> {
    let [(x0, y0), (x1, y1)] = points else {
        return Err(Error::Invalid(format!("need exactly 2 points, got {}", points.len())));
    };
    if x0 == x1 {
        return Err(Error::Invalid(format!("duplicate angle {x0}")));
    }
    let slope = (y1 - y0) / (x1 - x0);
    let intercept = y0 - slope * x0;
    // evaluate from the nearer knot so a knot target returns its value exactly
    let value = if (target_angle - x1).abs() <= (target_angle - x0).abs() {
        y1 + slope * (target_angle - x1)
    } else {
        y0 + slope * (target_angle - x0)
    };
    Ok(Extrapolation {
        value,
        slope,
        intercept,
    })
}

/// A measured stiffness used to calibrate a material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationAnchor {
    pub design: FingerDesign,
    /// N/mm
    pub measured_kyy: f64,
}

/// Multiplicative modulus scale that makes the anchor design reproduce its
/// measured `kyy` with the material of `design`.
pub fn calibrate(
    design: &FingerDesign,
    anchor: &CalibrationAnchor,
    plan: &ProbePlan,
    elems_per_member: usize,
) -> Result<f64> {
    if design.material.is_calibrated() {
        return Err(Error::AlreadyCalibrated(design.material.name.clone()));
    }
    if !(anchor.measured_kyy > 0.0) {
        return Err(Error::Domain(format!(
            "anchor stiffness must be positive, got {}",
            anchor.measured_kyy
        )));
    }
    let mut probe_design = anchor.design.clone();
    probe_design.material = design.material.clone();
    let frame = build_frame(&probe_design, elems_per_member)?;
    let (k, _) = identify_stiffness_elastic(&frame, plan, 8)?;
    if !(k.kyy > 0.0) {
        return Err(Error::Domain(format!(
            "predicted anchor stiffness is not positive: {}",
            k.kyy
        )));
    }
    Ok(anchor.measured_kyy / k.kyy)
}

#[cfg(test)]
mod tests;
