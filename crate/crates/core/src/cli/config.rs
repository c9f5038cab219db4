use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::characterize::StiffnessMatrix;
use crate::characterize::{ProbePlan, StrengthSettings, ViscoelasticFit};
use crate::error::{Error, Result};
use crate::geometry::{FingerDesign, Fingertip};
use crate::insertion::{ConnectorTraits, InsertionScenario, PlugGeometry, SocketGeometry, StrategyParams, WindowAxis};
use crate::material::{builtin_material, MaterialModel, MaterialOverride};

pub const SCHEMA_VERSION: u32 = 1;

/// A complete study: designs, solver settings and insertion scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub schema_version: u32,
    /// Property overrides keyed by builtin material name.
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialOverride>,
    /// `null` runs with nominal moduli.
    #[serde(default = "default_calibration")]
    pub calibration: Option<CalibrationSpec>,
    /// Union of Cartesian blocks.
    #[serde(default)]
    pub grid: Vec<GridBlock>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scenarios: Vec<ScenarioSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Reserved. Every command is deterministic.
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("finray-out")
}

fn default_calibration() -> Option<CalibrationSpec> {
    Some(CalibrationSpec::default())
}

/// Measured transverse stiffness of one design. The resulting modulus scale
/// is applied to every material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSpec {
    pub material: String,
    pub infill_direction: f64,
    pub infill_density: f64,
    pub fingertip: Fingertip,
    pub mount_angle: f64,
    /// N/mm
    pub measured_kyy: f64,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        CalibrationSpec {
            material: "PLA+".into(),
            infill_direction: 0.0,
            infill_density: 0.1,
            fingertip: Fingertip::NotchedContactPlane,
            mount_angle: 10.0,
            measured_kyy: 1.2,
        }
    }
}

impl CalibrationSpec {
    pub fn point(&self) -> DesignPoint {
        DesignPoint {
            material: self.material.clone(),
            infill_direction: self.infill_direction,
            infill_density: self.infill_density,
            fingertip: self.fingertip,
            mount_angle: self.mount_angle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub infill_direction: Vec<f64>,
    pub infill_density: Vec<f64>,
    #[serde(default = "default_materials")]
    pub material: Vec<String>,
    #[serde(default = "default_fingertips")]
    pub fingertip: Vec<Fingertip>,
    #[serde(default = "default_mounts")]
    pub mount_angle: Vec<f64>,
}

fn default_materials() -> Vec<String> {
    vec!["PLA+".into()]
}

fn default_fingertips() -> Vec<Fingertip> {
    vec![Fingertip::NotchedContactPlane]
}

fn default_mounts() -> Vec<f64> {
    vec![10.0]
}

impl GridBlock {
    pub fn new(infill_direction: Vec<f64>, infill_density: Vec<f64>, material: &str) -> GridBlock {
        GridBlock {
            infill_direction,
            infill_density,
            material: vec![material.into()],
            fingertip: default_fingertips(),
            mount_angle: default_mounts(),
        }
    }

    fn validate(&self) -> Result<()> {
        let empty = [
            ("infill_direction", self.infill_direction.is_empty()),
            ("infill_density", self.infill_density.is_empty()),
            ("material", self.material.is_empty()),
            ("fingertip", self.fingertip.is_empty()),
            ("mount_angle", self.mount_angle.is_empty()),
        ];
        for (name, is_empty) in empty {
            if is_empty {
                return Err(Error::Config(format!("grid list `{name}` is empty")));
            }
        }
        if self
            .infill_direction
            .iter()
            .chain(&self.infill_density)
            .chain(&self.mount_angle)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Config("grid values must be finite".into()));
        }
        Ok(())
    }

    fn points(&self) -> impl Iterator<Item = DesignPoint> + '_ {
        self.material.iter().flat_map(move |m| {
            self.infill_direction.iter().flat_map(move |&dir| {
                self.infill_density.iter().flat_map(move |&den| {
                    self.fingertip.iter().flat_map(move |&tip| {
                        self.mount_angle.iter().map(move |&mount| DesignPoint {
                            material: m.clone(),
                            infill_direction: dir,
                            infill_density: den,
                            fingertip: tip,
                            mount_angle: mount,
                        })
                    })
                })
            })
        })
    }
}

/// One point of a design grid. Ordered by material, direction, density,
/// fingertip, mount angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub material: String,
    pub infill_direction: f64,
    pub infill_density: f64,
    pub fingertip: Fingertip,
    pub mount_angle: f64,
}

impl Eq for DesignPoint {}

impl Ord for DesignPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.material
            .cmp(&other.material)
            .then(self.infill_direction.total_cmp(&other.infill_direction))
            .then(self.infill_density.total_cmp(&other.infill_density))
            .then(self.fingertip.cmp(&other.fingertip))
            .then(self.mount_angle.total_cmp(&other.mount_angle))
    }
}

impl PartialOrd for DesignPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn trim(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    format!("{}", r + 0.0)
}

impl DesignPoint {
    /// Identifier used on the command line and in file names, e.g.
    /// `PLA+_0deg_10pct_notched_contact_plane_m10`.
    pub fn id(&self) -> String {
        format!(
            "{}_{}deg_{}pct_{}_m{}",
            self.material,
            trim(self.infill_direction),
            trim(self.infill_density * 100.0),
            self.fingertip.as_str(),
            trim(self.mount_angle)
        )
    }

    pub fn design(&self, material: MaterialModel) -> FingerDesign {
        let mut d = FingerDesign::new(self.infill_direction, self.infill_density).with_material(material);
        d.fingertip = self.fingertip;
        d.mount_angle = self.mount_angle;
        d
    }
}

/// Discretization, probing and load-stepping settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub elems_per_member: usize,
    pub probe: ProbePlan,
    /// Halvings of a probe amplitude allowed to keep it elastic.
    pub max_probe_halvings: usize,
    pub strength: StrengthSettings,
    /// Misalignment step of window sweeps, mm.
    pub window_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            elems_per_member: 2,
            probe: ProbePlan::default(),
            max_probe_halvings: 8,
            strength: StrengthSettings::default(),
            window_step: 0.5,
        }
    }
}

/// Insertion task. Unset fields keep the scenario defaults; the grip
/// compliance comes from each design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: String,
    #[serde(default)]
    pub plug: Option<PlugGeometry>,
    #[serde(default)]
    pub socket: Option<SocketGeometry>,
    #[serde(default)]
    pub connector_traits: Option<ConnectorTraits>,
    #[serde(default)]
    pub clearance: Option<f64>,
    #[serde(default)]
    pub friction_mu: Option<f64>,
    #[serde(default)]
    pub tilt: Option<f64>,
    #[serde(default)]
    pub free_rotation_limit: Option<f64>,
    #[serde(default)]
    pub grasp_rotation_limit: Option<f64>,
    #[serde(default)]
    pub viscoelastic: Option<ViscoelasticFit>,
    #[serde(default)]
    pub strategy: StrategyParams,
    #[serde(default = "default_axis")]
    pub axis: WindowAxis,
    /// Designs swept by this scenario; the study grid when absent.
    #[serde(default)]
    pub designs: Option<Vec<GridBlock>>,
}

fn default_axis() -> WindowAxis {
    WindowAxis::Y
}

impl ScenarioSpec {
    pub fn new(id: &str) -> ScenarioSpec {
        ScenarioSpec {
            id: id.into(),
            plug: None,
            socket: None,
            connector_traits: None,
            clearance: None,
            friction_mu: None,
            tilt: None,
            free_rotation_limit: None,
            grasp_rotation_limit: None,
            viscoelastic: None,
            strategy: StrategyParams::default(),
            axis: WindowAxis::Y,
            designs: None,
        }
    }

    pub fn scenario(&self, grip: StiffnessMatrix) -> Result<InsertionScenario> {
        let mut s = InsertionScenario::new(grip);
        if let Some(p) = self.plug {
            s.plug = p;
        }
        if let Some(p) = self.socket {
            s.socket = p;
        }
        if let Some(t) = self.connector_traits {
            s.connector_traits = t;
            s.clearance = t.fit.default_clearance();
        }
        let set = |field: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *field = v;
            }
        };
        set(&mut s.clearance, self.clearance);
        set(&mut s.friction_mu, self.friction_mu);
        set(&mut s.tilt, self.tilt);
        set(&mut s.free_rotation_limit, self.free_rotation_limit);
        set(&mut s.grasp_rotation_limit, self.grasp_rotation_limit);
        s.viscoelastic = self.viscoelastic;
        s.validate()?;
        self.strategy.validate()?;
        Ok(s)
    }
}

impl StudyConfig {
    /// Default study: PLA+ over five infill directions and three densities,
    /// PETG at 0°, and an insertion sweep over PLA+ 0° densities.
    pub fn builtin() -> StudyConfig {
        let mut insertion = ScenarioSpec::new("insertion");
        insertion.designs = Some(vec![GridBlock::new(vec![0.0], vec![0.1, 0.2, 0.3], "PLA+")]);
        StudyConfig {
            schema_version: SCHEMA_VERSION,
            materials: BTreeMap::new(),
            calibration: default_calibration(),
            grid: vec![
                GridBlock::new(vec![0.0, 10.0, 20.0, 30.0, 40.0], vec![0.1, 0.2, 0.3], "PLA+"),
                GridBlock::new(vec![0.0], vec![0.1, 0.2, 0.3], "PETG"),
            ],
            solver: SolverConfig::default(),
            scenarios: vec![insertion],
            output_dir: default_output_dir(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<StudyConfig> {
        let config: StudyConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<StudyConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        StudyConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let blocks = self
            .grid
            .iter()
            .chain(self.scenarios.iter().flat_map(|s| s.designs.iter().flatten()));
        let mut names = BTreeSet::new();
        for b in blocks {
            b.validate()?;
            names.extend(b.material.iter().cloned());
        }
        if let Some(c) = &self.calibration {
            names.insert(c.material.clone());
            if !(c.measured_kyy > 0.0 && c.measured_kyy.is_finite()) {
                return Err(Error::Config("calibration measured_kyy must be positive".into()));
            }
        }
        names.extend(self.materials.keys().cloned());
        for name in names {
            self.nominal_material(&name)?;
        }
        let s = &self.solver;
        if s.elems_per_member == 0 || !(s.window_step > 0.0) {
            return Err(Error::Config(
                "elems_per_member and window_step must be positive".into(),
            ));
        }
        let mut ids = BTreeSet::new();
        for sc in &self.scenarios {
            if !ids.insert(sc.id.as_str()) {
                return Err(Error::Config(format!("duplicate scenario id `{}`", sc.id)));
            }
            sc.scenario(StiffnessMatrix::new(1.0, 1.0, 10.0, 0.0))
                .map_err(|e| Error::Config(format!("scenario `{}`: {e}", sc.id)))?;
        }
        Ok(())
    }

    /// Builtin material with this study's overrides, before calibration.
    pub fn nominal_material(&self, name: &str) -> Result<MaterialModel> {
        let base = builtin_material(name).map_err(|_| Error::Config(format!("unknown material `{name}`")))?;
        match self.materials.get(name) {
            Some(o) => o
                .apply(&base)
                .map_err(|e| Error::Config(format!("material `{name}`: {e}"))),
            None => Ok(base),
        }
    }

    /// Sorted, de-duplicated points of the study grid.
    pub fn design_points(&self) -> Vec<DesignPoint> {
        expand(&self.grid)
    }

    pub fn scenario(&self, id: &str) -> Result<&ScenarioSpec> {
        self.scenarios
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::UnknownEntity {
                kind: "scenario",
                id: id.into(),
            })
    }

    pub fn scenario_points(&self, spec: &ScenarioSpec) -> Vec<DesignPoint> {
        spec.designs.as_deref().map_or_else(|| self.design_points(), expand)
    }

    /// Looks a design id up in the study grid and every scenario grid.
    pub fn find_design(&self, id: &str) -> Result<DesignPoint> {
        let scenario_blocks = self.scenarios.iter().flat_map(|s| s.designs.iter().flatten());
        let all: Vec<GridBlock> = self.grid.iter().chain(scenario_blocks).cloned().collect();
        expand(&all)
            .into_iter()
            .find(|p| p.id() == id)
            .ok_or_else(|| Error::UnknownEntity {
                kind: "design",
                id: id.into(),
            })
    }
}

fn expand(blocks: &[GridBlock]) -> Vec<DesignPoint> {
    let set: BTreeSet<DesignPoint> = blocks.iter().flat_map(|b| b.points()).collect();
    set.into_iter().collect()
}
