//! Planar frame solver: small-displacement linear analysis and a corotational
//! geometrically nonlinear path with buckling and first-yield monitoring.

mod banded;
mod element;
mod ordering;

use std::collections::BTreeMap;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

pub use banded::{smallest_eigenvalue, BandMatrix, LdlFactor};
use element::{BeamData, Vec6};

use crate::error::{Error, Result};
use crate::geometry::PlanarFrame;

/// Partial prescribed displacement of one node. `None` leaves the DOF free.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prescribed {
    pub dy: Option<f64>,
    pub dz: Option<f64>,
    #[serde(default)]
    pub rotation: Option<f64>,
}

impl Prescribed {
    pub fn translation(dy: f64, dz: f64) -> Prescribed {
        Prescribed {
            dy: Some(dy),
            dz: Some(dz),
            rotation: None,
        }
    }

    fn values(&self) -> [Option<f64>; 3] {
        [self.dy, self.dz, self.rotation]
    }
}

/// Nodal force (N) and moment (N·mm).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NodalLoad {
    pub fy: f64,
    pub fz: f64,
    #[serde(default)]
    pub moment: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub prescribed_displacements: BTreeMap<usize, Prescribed>,
    pub applied_forces: BTreeMap<usize, NodalLoad>,
    /// Number of load increments of the nonlinear path.
    pub steps: usize,
}

impl LoadCase {
    pub fn new(steps: usize) -> LoadCase {
        LoadCase {
            steps,
            ..Default::default()
        }
    }

    pub fn prescribe(mut self, node: usize, p: Prescribed) -> LoadCase {
        self.prescribed_displacements.insert(node, p);
        self
    }

    pub fn force(mut self, node: usize, fy: f64, fz: f64) -> LoadCase {
        self.applied_forces.insert(node, NodalLoad { fy, fz, moment: 0.0 });
        self
    }

    pub fn scaled(&self, factor: f64) -> LoadCase {
        let mut out = self.clone();
        for p in out.prescribed_displacements.values_mut() {
            p.dy = p.dy.map(|v| v * factor);
            p.dz = p.dz.map(|v| v * factor);
            p.rotation = p.rotation.map(|v| v * factor);
        }
        for f in out.applied_forces.values_mut() {
            f.fy *= factor;
            f.fz *= factor;
            f.moment *= factor;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    Buckled,
    Yielded,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub step: usize,
    pub residual: f64,
}

/// Outcome of a frame solve.
///
/// When a nonlinear run stops early, displacement-like fields (`displacements`,
/// `reactions`, `tip_reaction`, `load_factor`) describe the last stable state,
/// while `max_abs_stress` and `min_tangent_eigenvalue` are the values at the
/// state that tripped the stop condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Per node `(dy, dz, θ)`.
    pub displacements: Vec<[f64; 3]>,
    /// Per constrained node `(fy, fz, m)`: support reactions and probe forces.
    pub reactions: BTreeMap<usize, [f64; 3]>,
    /// Force exerted on the tip node by its constraint or load, `(fy, fz)`.
    pub tip_reaction: Vector2<f64>,
    pub element_stresses: Vec<f64>,
    pub max_abs_stress: f64,
    /// Max stress of the reported (last stable) state.
    pub stable_max_abs_stress: f64,
    pub min_tangent_eigenvalue: f64,
    /// Fraction of the load case reached by the reported state.
    pub load_factor: f64,
    pub steps_completed: usize,
    pub residual_norm: f64,
    /// Load factor at which the minimum tangent eigenvalue crosses zero,
    /// interpolated between the bracketing steps.
    pub critical_load_factor: Option<f64>,
    pub divergence: Option<Divergence>,
}

impl SolveResult {
    pub fn tip_displacement(&self, tip: usize) -> Vector2<f64> {
        let d = self.displacements[tip];
        Vector2::new(d[0], d[1])
    }

    /// Sum of reactions plus applied forces (translational components).
    pub fn equilibrium_error(&self, load: &LoadCase) -> f64 {
        let mut s = Vector2::zeros();
        for r in self.reactions.values() {
            s += Vector2::new(r[0], r[1]);
        }
        for (node, f) in &load.applied_forces {
            if !self.reactions.contains_key(node) {
                s += self.load_factor * Vector2::new(f.fy, f.fz);
            }
        }
        s.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Relative residual tolerance (scaled by the force level, floor 1 N).
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Maximum number of times a non-converging increment is halved.
    pub max_bisections: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            residual_tol: 1e-8,
            max_iterations: 50,
            max_bisections: 6,
        }
    }
}

/// DOF bookkeeping shared by the linear and nonlinear paths.
#[derive(Debug, Clone)]
pub(crate) struct DofMap {
    pub n_dofs: usize,
    /// Equation number of each global DOF, `None` when constrained.
    pub equation: Vec<Option<usize>>,
    pub n_free: usize,
    pub bandwidth: usize,
    /// Constrained global DOFs with their full-load prescribed value.
    pub constrained: BTreeMap<usize, f64>,
}

impl DofMap {
    pub fn new(frame: &PlanarFrame, load: &LoadCase) -> Result<DofMap> {
        let n_nodes = frame.nodes.len();
        let n_dofs = 3 * n_nodes;
        let mut constrained = BTreeMap::new();
        for s in &frame.supports {
            constrained.insert(3 * s.node, 0.0);
            constrained.insert(3 * s.node + 1, 0.0);
            if s.fix_rotation {
                constrained.insert(3 * s.node + 2, 0.0);
            }
        }
        for (&node, p) in &load.prescribed_displacements {
            if node >= n_nodes {
                return Err(Error::Invalid(format!("load references missing node {node}")));
            }
            for (k, v) in p.values().into_iter().enumerate() {
                if let Some(v) = v {
                    let dof = 3 * node + k;
                    if let Some(&existing) = constrained.get(&dof) {
                        if existing != v && frame.is_support(node) {
                            return Err(Error::Invalid(format!(
                                "nonzero displacement prescribed on support node {node}"
                            )));
                        }
                    }
                    constrained.insert(dof, v);
                }
            }
        }
        for &node in load.applied_forces.keys() {
            if node >= n_nodes {
                return Err(Error::Invalid(format!("load references missing node {node}")));
            }
        }
        let order = ordering::reverse_cuthill_mckee(&frame.adjacency());
        let mut equation = vec![None; n_dofs];
        let mut next = 0;
        for node in order {
            for k in 0..3 {
                let dof = 3 * node + k;
                if !constrained.contains_key(&dof) {
                    equation[dof] = Some(next);
                    next += 1;
                }
            }
        }
        let mut bandwidth = 0;
        for e in &frame.elements {
            let eqs: Vec<usize> = [3 * e.node_i, 3 * e.node_j]
                .iter()
                .flat_map(|&b| b..b + 3)
                .filter_map(|d| equation[d])
                .collect();
            if let (Some(lo), Some(hi)) = (eqs.iter().min(), eqs.iter().max()) {
                bandwidth = bandwidth.max(hi - lo);
            }
        }
        // a node without elements still needs its own 3x3 block
        bandwidth = bandwidth.max(2);
        Ok(DofMap {
            n_dofs,
            equation,
            n_free: next,
            bandwidth,
            constrained,
        })
    }

    fn gather(&self, u: &[f64], dofs: &[usize; 6]) -> Vec6 {
        Vec6::from_fn(|k, _| u[dofs[k]])
    }

    fn external(&self, load: &LoadCase) -> Vec<f64> {
        let mut f = vec![0.0; self.n_dofs];
        for (&node, l) in &load.applied_forces {
            f[3 * node] += l.fy;
            f[3 * node + 1] += l.fz;
            f[3 * node + 2] += l.moment;
        }
        f
    }
}

/// Small-displacement Euler-Bernoulli frame solution (3 DOF per node).
pub fn solve_linear(frame: &PlanarFrame, load: &LoadCase) -> Result<SolveResult> {
    frame.validate()?;
    check_load(load)?;
    let dofs = DofMap::new(frame, load)?;
    let beams = BeamData::from_frame(frame);
    let f_ext = dofs.external(load);
    let mut u = vec![0.0; dofs.n_dofs];
    for (&d, &v) in &dofs.constrained {
        u[d] = v;
    }

    let mut k = BandMatrix::zeros(dofs.n_free, dofs.bandwidth);
    let mut rhs = vec![0.0; dofs.n_free];
    for (d, eq) in dofs.equation.iter().enumerate() {
        if let Some(eq) = eq {
            rhs[*eq] = f_ext[d];
        }
    }
    for b in &beams {
        let ke = b.linear_stiffness();
        let ed = b.dofs();
        let ue = dofs.gather(&u, &ed);
        let f_c = ke * ue;
        for r in 0..6 {
            let Some(er) = dofs.equation[ed[r]] else { continue };
            rhs[er] -= f_c[r];
            for c in 0..=r {
                if let Some(ec) = dofs.equation[ed[c]] {
                    k.add(er, ec, ke[(r, c)]);
                }
            }
        }
    }
    let factor = k.clone().factorize()?;
    let x = factor.solve(&rhs);
    for (d, eq) in dofs.equation.iter().enumerate() {
        if let Some(eq) = eq {
            u[d] = x[*eq];
        }
    }

    let mut f_int = vec![0.0; dofs.n_dofs];
    let mut stresses = Vec::with_capacity(beams.len());
    for b in &beams {
        let ed = b.dofs();
        let ue = dofs.gather(&u, &ed);
        let fe = b.linear_stiffness() * ue;
        for r in 0..6 {
            f_int[ed[r]] += fe[r];
        }
        stresses.push(b.fiber_stress(&b.linear_local_forces(&ue)));
    }
    let residual = free_residual_norm(&dofs, &f_int, &f_ext, 1.0);
    let min_eig = if factor.negative_pivots() == 0 {
        smallest_eigenvalue(&k)?
    } else {
        return Err(Error::SingularSystem(
            "stiffness matrix is not positive definite".into(),
        ));
    };
    let max_stress = stresses.iter().copied().fold(0.0, f64::max);
    Ok(assemble_result(
        frame,
        &dofs,
        &u,
        &f_int,
        &f_ext,
        1.0,
        stresses,
        SolveStatus::Converged,
        max_stress,
        max_stress,
        min_eig,
        1,
        residual,
    ))
}

fn check_load(load: &LoadCase) -> Result<()> {
    if load.steps == 0 {
        return Err(Error::Invalid("load case needs at least one step".into()));
    }
    Ok(())
}

fn free_residual_norm(dofs: &DofMap, f_int: &[f64], f_ext: &[f64], lambda: f64) -> f64 {
    dofs.equation
        .iter()
        .enumerate()
        .filter(|(_, eq)| eq.is_some())
        .map(|(d, _)| (f_int[d] - lambda * f_ext[d]).abs())
        .fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
fn assemble_result(
    frame: &PlanarFrame,
    dofs: &DofMap,
    u: &[f64],
    f_int: &[f64],
    f_ext: &[f64],
    lambda: f64,
    stresses: Vec<f64>,
    status: SolveStatus,
    max_abs_stress: f64,
    stable_max_abs_stress: f64,
    min_tangent_eigenvalue: f64,
    steps_completed: usize,
    residual_norm: f64,
) -> SolveResult {
    let n = frame.nodes.len();
    let displacements = (0..n).map(|i| [u[3 * i], u[3 * i + 1], u[3 * i + 2]]).collect();
    let mut reactions = BTreeMap::new();
    for &d in dofs.constrained.keys() {
        let node = d / 3;
        reactions.entry(node).or_insert([0.0; 3]);
    }
    for (&node, r) in reactions.iter_mut() {
        for k in 0..3 {
            let d = 3 * node + k;
            if dofs.constrained.contains_key(&d) {
                r[k] = f_int[d] - lambda * f_ext[d];
            }
        }
    }
    let tip = frame.tip_node;
    let tip_reaction = if reactions.contains_key(&tip) {
        let r = reactions[&tip];
        Vector2::new(r[0], r[1])
    } else {
        lambda * Vector2::new(f_ext[3 * tip], f_ext[3 * tip + 1])
    };
    SolveResult {
        status,
        displacements,
        reactions,
        tip_reaction,
        element_stresses: stresses,
        max_abs_stress,
        stable_max_abs_stress,
        min_tangent_eigenvalue,
        load_factor: lambda,
        steps_completed,
        residual_norm,
        critical_load_factor: None,
        divergence: None,
    }
}

/// Converged equilibrium state on the nonlinear path.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    /// Global displacement vector, 3 entries per node.
    pub u: Vec<f64>,
    pub load_factor: f64,
    pub f_int: Vec<f64>,
    pub stresses: Vec<f64>,
    pub max_stress: f64,
    /// Largest ratio of element stress to its material yield strength.
    pub utilisation: f64,
    pub negative_pivots: usize,
    pub residual: f64,
    pub iterations: usize,
}

impl Equilibrium {
    pub fn yielded(&self) -> bool {
        self.utilisation >= 1.0
    }

    pub fn unstable(&self) -> bool {
        self.negative_pivots > 0
    }
}

/// Corotational model of one frame under one load case, evaluated at
/// arbitrary load factors.
pub struct NonlinearModel<'a> {
    frame: &'a PlanarFrame,
    dofs: DofMap,
    beams: Vec<BeamData>,
    f_ext: Vec<f64>,
    settings: SolverSettings,
}

struct Assembled {
    f_int: Vec<f64>,
    tangent: BandMatrix,
    stresses: Vec<f64>,
    max_stress: f64,
    utilisation: f64,
}

impl<'a> NonlinearModel<'a> {
    pub fn new(frame: &'a PlanarFrame, load: &LoadCase, settings: SolverSettings) -> Result<Self> {
        frame.validate()?;
        check_load(load)?;
        let dofs = DofMap::new(frame, load)?;
        let beams = BeamData::from_frame(frame);
        let f_ext = dofs.external(load);
        Ok(NonlinearModel {
            frame,
            dofs,
            beams,
            f_ext,
            settings,
        })
    }

    pub fn frame(&self) -> &PlanarFrame {
        self.frame
    }

    pub fn zero_state(&self) -> Equilibrium {
        let n = self.dofs.n_dofs;
        Equilibrium {
            u: vec![0.0; n],
            load_factor: 0.0,
            f_int: vec![0.0; n],
            stresses: vec![0.0; self.beams.len()],
            max_stress: 0.0,
            utilisation: 0.0,
            negative_pivots: 0,
            residual: 0.0,
            iterations: 0,
        }
    }

    fn assemble(&self, u: &[f64]) -> Assembled {
        let mut f_int = vec![0.0; self.dofs.n_dofs];
        let mut tangent = BandMatrix::zeros(self.dofs.n_free, self.dofs.bandwidth);
        let mut stresses = Vec::with_capacity(self.beams.len());
        let mut max_stress = 0.0;
        let mut utilisation = 0.0;
        for b in &self.beams {
            let ed = b.dofs();
            let ue = self.dofs.gather(u, &ed);
            let (fe, ke, q) = b.corotational(&ue);
            for r in 0..6 {
                f_int[ed[r]] += fe[r];
                let Some(er) = self.dofs.equation[ed[r]] else { continue };
                for c in 0..=r {
                    if let Some(ec) = self.dofs.equation[ed[c]] {
                        tangent.add(er, ec, ke[(r, c)]);
                    }
                }
            }
            let s = b.fiber_stress(&q);
            max_stress = f64::max(max_stress, s);
            utilisation = f64::max(utilisation, s / b.yield_strength);
            stresses.push(s);
        }
        Assembled {
            f_int,
            tangent,
            stresses,
            max_stress,
            utilisation,
        }
    }

    fn tolerance(&self, f_int: &[f64], lambda: f64) -> f64 {
        let ext = self.f_ext.iter().map(|v| (lambda * v).abs()).fold(0.0, f64::max);
        let reac = self
            .dofs
            .constrained
            .keys()
            .map(|&d| f_int[d].abs())
            .fold(0.0, f64::max);
        self.settings.residual_tol * ext.max(reac).max(1.0)
    }

    /// Newton iterations from `start` to equilibrium at `lambda`.
    pub fn equilibrate(&self, start: &Equilibrium, lambda: f64) -> std::result::Result<Equilibrium, f64> {
        let mut u = start.u.clone();
        for (&d, &v) in &self.dofs.constrained {
            u[d] = lambda * v;
        }
        let mut last_residual = f64::INFINITY;
        for it in 0..=self.settings.max_iterations {
            let a = self.assemble(&u);
            let res = free_residual_norm(&self.dofs, &a.f_int, &self.f_ext, lambda);
            last_residual = res;
            if !res.is_finite() {
                return Err(res);
            }
            let factor = a.tangent.clone().factorize();
            if res <= self.tolerance(&a.f_int, lambda) {
                let negative_pivots = match &factor {
                    Ok(f) => f.negative_pivots(),
                    Err(_) => 1,
                };
                return Ok(Equilibrium {
                    u,
                    load_factor: lambda,
                    f_int: a.f_int,
                    stresses: a.stresses,
                    max_stress: a.max_stress,
                    utilisation: a.utilisation,
                    negative_pivots,
                    residual: res,
                    iterations: it,
                });
            }
            if it == self.settings.max_iterations {
                break;
            }
            let Ok(factor) = factor else { return Err(res) };
            let mut r = vec![0.0; self.dofs.n_free];
            for (d, eq) in self.dofs.equation.iter().enumerate() {
                if let Some(eq) = eq {
                    r[*eq] = lambda * self.f_ext[d] - a.f_int[d];
                }
            }
            let du = factor.solve(&r);
            for (d, eq) in self.dofs.equation.iter().enumerate() {
                if let Some(eq) = eq {
                    u[d] += du[*eq];
                }
            }
        }
        Err(last_residual)
    }

    /// Like [`equilibrate`](Self::equilibrate) but halves the increment on
    /// non-convergence, up to `max_bisections` times.
    pub fn advance(&self, start: &Equilibrium, lambda: f64) -> std::result::Result<Equilibrium, f64> {
        self.advance_depth(start, lambda, 0)
    }

    fn advance_depth(&self, start: &Equilibrium, lambda: f64, depth: usize) -> std::result::Result<Equilibrium, f64> {
        match self.equilibrate(start, lambda) {
            Ok(eq) => Ok(eq),
            Err(res) if depth >= self.settings.max_bisections => Err(res),
            Err(_) => {
                let mid = 0.5 * (start.load_factor + lambda);
                let half = self.advance_depth(start, mid, depth + 1)?;
                self.advance_depth(&half, lambda, depth + 1)
            }
        }
    }

    /// Smallest eigenvalue of the constrained tangent at `state`.
    pub fn min_eigenvalue(&self, state: &Equilibrium) -> Result<f64> {
        let a = self.assemble(&state.u);
        smallest_eigenvalue(&a.tangent)
    }

    /// Force on `node` from its constraint or load at `state`, `(fy, fz)`.
    pub fn node_reaction(&self, state: &Equilibrium, node: usize) -> Vector2<f64> {
        let comp = |d: usize| {
            let applied = state.load_factor * self.f_ext[d];
            if self.dofs.equation[d].is_some() {
                applied
            } else {
                state.f_int[d] - applied
            }
        };
        Vector2::new(comp(3 * node), comp(3 * node + 1))
    }

    fn result(
        &self,
        state: &Equilibrium,
        status: SolveStatus,
        max_abs_stress: f64,
        min_eig: f64,
        steps: usize,
    ) -> SolveResult {
        assemble_result(
            self.frame,
            &self.dofs,
            &state.u,
            &state.f_int,
            &self.f_ext,
            state.load_factor,
            state.stresses.clone(),
            status,
            max_abs_stress,
            state.max_stress,
            min_eig,
            steps,
            state.residual,
        )
    }
}

/// Incremental-iterative corotational solution over `load.steps` equal increments.
pub fn solve_nonlinear(frame: &PlanarFrame, load: &LoadCase, settings: &SolverSettings) -> Result<SolveResult> {
    let model = NonlinearModel::new(frame, load, *settings)?;
    let mut state = model.zero_state();
    let mut prev_eig: Option<f64> = None;
    let steps = load.steps;
    for step in 1..=steps {
        let lambda = step as f64 / steps as f64;
        let next = match model.advance(&state, lambda) {
            Ok(eq) => eq,
            Err(residual) => {
                let eig = model.min_eigenvalue(&state).unwrap_or(f64::NAN);
                let mut r = model.result(&state, SolveStatus::Diverged, state.max_stress, eig, step - 1);
                r.divergence = Some(Divergence { step, residual });
                return Ok(r);
            }
        };
        if next.unstable() {
            let eig_next = model.min_eigenvalue(&next)?.min(0.0);
            let eig_prev = match prev_eig {
                Some(v) => v,
                None => model.min_eigenvalue(&state)?,
            };
            let mut r = model.result(&state, SolveStatus::Buckled, next.max_stress, eig_next, step - 1);
            r.critical_load_factor = Some(interpolate_zero(state.load_factor, eig_prev, lambda, eig_next));
            return Ok(r);
        }
        if next.yielded() {
            let eig = model.min_eigenvalue(&state)?;
            return Ok(model.result(&state, SolveStatus::Yielded, next.max_stress, eig, step - 1));
        }
        prev_eig = None;
        state = next;
    }
    let eig = model.min_eigenvalue(&state)?;
    Ok(model.result(&state, SolveStatus::Converged, state.max_stress, eig, steps))
}

fn interpolate_zero(l0: f64, e0: f64, l1: f64, e1: f64) -> f64 {
    if e0 <= 0.0 || (e0 - e1).abs() < f64::MIN_POSITIVE {
        return l0;
    }
    l0 + (l1 - l0) * e0 / (e0 - e1)
}

/// Smallest eigenvalue of the constrained tangent stiffness at a displacement state.
pub fn tangent_min_eigenvalue(frame: &PlanarFrame, load: &LoadCase, displacements: &[[f64; 3]]) -> Result<f64> {
    let model = NonlinearModel::new(frame, load, SolverSettings::default())?;
    let mut state = model.zero_state();
    for (n, d) in displacements.iter().enumerate() {
        state.u[3 * n..3 * n + 3].copy_from_slice(d);
    }
    model.min_eigenvalue(&state)
}

/// Per-element extreme-fiber stress `|N|/A + |M|·(w/2)/I` of a displacement
/// state, evaluated with the corotational element (exact for small states).
pub fn recover_stresses(frame: &PlanarFrame, displacements: &[[f64; 3]]) -> Vec<f64> {
    BeamData::from_frame(frame)
        .iter()
        .map(|b| {
            let di = displacements[b.i];
            let dj = displacements[b.j];
            let ue = Vec6::new(di[0], di[1], di[2], dj[0], dj[1], dj[2]);
            let (_, _, q) = b.corotational(&ue);
            b.fiber_stress(&q)
        })
        .collect()
}

/// Per-element stresses of the small-displacement element.
pub fn recover_linear_stresses(frame: &PlanarFrame, displacements: &[[f64; 3]]) -> Vec<f64> {
    BeamData::from_frame(frame)
        .iter()
        .map(|b| {
            let di = displacements[b.i];
            let dj = displacements[b.j];
            let ue = Vec6::new(di[0], di[1], di[2], dj[0], dj[1], dj[2]);
            b.fiber_stress(&b.linear_local_forces(&ue))
        })
        .collect()
}

/// Elastic strain energy of a small-displacement state, `Σ ½ ueᵀ ke ue`.
pub fn strain_energy(frame: &PlanarFrame, displacements: &[[f64; 3]]) -> f64 {
    BeamData::from_frame(frame)
        .iter()
        .map(|b| {
            let di = displacements[b.i];
            let dj = displacements[b.j];
            let ue = Vec6::new(di[0], di[1], di[2], dj[0], dj[1], dj[2]);
            0.5 * ue.dot(&(b.linear_stiffness() * ue))
        })
        .sum()
}
