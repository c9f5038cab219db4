use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::DesignPoint;
use crate::characterize::FailureMode;
use crate::error::{Error, Result};
use crate::geometry::Fingertip;
use crate::insertion::{Outcome, WindowAxis};

pub const STATUS_OK: &str = "ok";

/// One characterized design. Quantities a failed run could not produce are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessRow {
    pub material: String,
    pub infill_direction: f64,
    pub infill_density: f64,
    pub fingertip: Fingertip,
    pub mount_angle: f64,
    pub kyy: Option<f64>,
    pub kzz: Option<f64>,
    pub kzy: Option<f64>,
    pub kxx: Option<f64>,
    pub ratio: Option<f64>,
    pub rcc_angle_deg: Option<f64>,
    pub max_force: Option<f64>,
    pub max_deflection: Option<f64>,
    pub failure_mode: Option<FailureMode>,
    /// `ok`, or the error that stopped the run.
    pub status: String,
}

pub const STIFFNESS_COLUMNS: [&str; 15] = [
    "material",
    "infill_direction",
    "infill_density",
    "fingertip",
    "mount_angle",
    "kyy",
    "kzz",
    "kzy",
    "kxx",
    "ratio",
    "rcc_angle_deg",
    "max_force",
    "max_deflection",
    "failure_mode",
    "status",
];

impl StiffnessRow {
    pub fn empty(p: &DesignPoint) -> StiffnessRow {
        StiffnessRow {
            material: p.material.clone(),
            infill_direction: p.infill_direction,
            infill_density: p.infill_density,
            fingertip: p.fingertip,
            mount_angle: p.mount_angle,
            kyy: None,
            kzz: None,
            kzy: None,
            kxx: None,
            ratio: None,
            rcc_angle_deg: None,
            max_force: None,
            max_deflection: None,
            failure_mode: None,
            status: STATUS_OK.into(),
        }
    }

    pub fn ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

/// Misalignment window of one design in one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub material: String,
    pub infill_direction: f64,
    pub infill_density: f64,
    pub fingertip: Fingertip,
    pub mount_angle: f64,
    pub axis: WindowAxis,
    pub min_offset: Option<f64>,
    pub max_offset: Option<f64>,
    pub window_mm: Option<f64>,
    pub limiting_outcome: Option<Outcome>,
    pub status: String,
}

pub const WINDOW_COLUMNS: [&str; 11] = [
    "material",
    "infill_direction",
    "infill_density",
    "fingertip",
    "mount_angle",
    "axis",
    "min_offset",
    "max_offset",
    "window_mm",
    "limiting_outcome",
    "status",
];

impl WindowRow {
    pub fn empty(p: &DesignPoint, axis: WindowAxis) -> WindowRow {
        WindowRow {
            material: p.material.clone(),
            infill_direction: p.infill_direction,
            infill_density: p.infill_density,
            fingertip: p.fingertip,
            mount_angle: p.mount_angle,
            axis,
            min_offset: None,
            max_offset: None,
            window_mm: None,
            limiting_outcome: None,
            status: STATUS_OK.into(),
        }
    }

    pub fn ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

/// CSV text with an explicit header, so an empty report still names its columns.
pub fn to_csv<T: Serialize>(columns: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}

pub fn from_csv<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    from_csv(&std::fs::read_to_string(path)?)
}
