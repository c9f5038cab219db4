//! Filament materials and the mapping from slicer print settings to beam
//! cross-sections.
//!
//! All quantities use the global unit system: mm, N, MPa, g/cm³.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic elastic material of a printed filament.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub name: String,
    /// Young's modulus, MPa.
    pub youngs_modulus: f64,
    /// First-yield stress, MPa.
    pub yield_strength: f64,
    /// Ultimate tensile strength, MPa.
    pub ultimate_strength: f64,
    pub poisson_ratio: f64,
    /// g/cm³
    pub density: f64,
    /// Effective-modulus multiplier set by calibration. `None` means uncalibrated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus_scale: Option<f64>,
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.youngs_modulus > 0.0
            && self.yield_strength > 0.0
            && self.yield_strength <= self.ultimate_strength
            && (0.0..0.5).contains(&self.poisson_ratio)
            && self.density > 0.0
            && self.modulus_scale.is_none_or(|s| s.is_finite() && s > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "material `{}` violates property bounds",
                self.name
            )))
        }
    }

    /// Modulus used by the structural model (nominal modulus times calibration scale).
    /// Stresses are still recovered from strain at the nominal modulus.
    pub fn effective_modulus(&self) -> f64 {
        self.youngs_modulus * self.modulus_scale.unwrap_or(1.0)
    }

    pub fn is_calibrated(&self) -> bool {
        self.modulus_scale.is_some()
    }

    /// Returns a copy carrying the calibration scale. Calibrating twice is an error.
    pub fn calibrated(&self, scale: f64) -> Result<MaterialModel> {
        if self.is_calibrated() {
            return Err(Error::AlreadyCalibrated(self.name.clone()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "calibration scale must be positive, got {scale}"
            )));
        }
        Ok(MaterialModel {
            modulus_scale: Some(scale),
            ..self.clone()
        })
    }
}

/// Partial material override read from a study config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialOverride {
    pub youngs_modulus: Option<f64>,
    pub yield_strength: Option<f64>,
    pub ultimate_strength: Option<f64>,
    pub poisson_ratio: Option<f64>,
    pub density: Option<f64>,
}

impl MaterialOverride {
    pub fn apply(&self, base: &MaterialModel) -> Result<MaterialModel> {
        let m = MaterialModel {
            name: base.name.clone(),
            youngs_modulus: self.youngs_modulus.unwrap_or(base.youngs_modulus),
            yield_strength: self.yield_strength.unwrap_or(base.yield_strength),
            ultimate_strength: self.ultimate_strength.unwrap_or(base.ultimate_strength),
            poisson_ratio: self.poisson_ratio.unwrap_or(base.poisson_ratio),
            density: self.density.unwrap_or(base.density),
            modulus_scale: base.modulus_scale,
        };
        m.validate()?;
        Ok(m)
    }
}

/// PETG is published without a Poisson ratio or yield stress; these fill the gap.
pub const PETG_ASSUMED_POISSON: f64 = 0.37;
pub const PETG_ASSUMED_YIELD_FRACTION: f64 = 0.9;

/// Tabulated properties of the supported filaments (`PLA+`, `PETG`).
pub fn builtin_material(name: &str) -> Result<MaterialModel> {
    match name {
        "PLA+" => Ok(MaterialModel {
            name: "PLA+".into(),
            youngs_modulus: 1900.0,
            yield_strength: 20.04,
            ultimate_strength: 20.9,
            poisson_ratio: 0.36,
            density: 1.14,
            modulus_scale: None,
        }),
        "PETG" => Ok(MaterialModel {
            name: "PETG".into(),
            youngs_modulus: 2050.0,
            yield_strength: PETG_ASSUMED_YIELD_FRACTION * 50.0,
            ultimate_strength: 50.0,
            poisson_ratio: PETG_ASSUMED_POISSON,
            density: 1.27,
            modulus_scale: None,
        }),
        other => Err(Error::UnknownMaterial(other.to_string())),
    }
}

/// Slicer settings that determine the printed line geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrintParameters {
    /// Extruded line width, mm.
    pub line_width: f64,
    pub wall_line_count: u32,
    /// Out-of-plane depth of the planar model, mm.
    pub layer_depth: f64,
}

impl Default for PrintParameters {
    fn default() -> Self {
        PrintParameters {
            line_width: 0.4,
            wall_line_count: 1,
            layer_depth: 15.0,
        }
    }
}

impl PrintParameters {
    pub fn validate(&self) -> Result<()> {
        if self.line_width > 0.0 && self.wall_line_count >= 1 && self.layer_depth > 0.0 {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid print parameters {self:?}")))
        }
    }

    /// Thickness of an outer wall: one line width per wall line.
    pub fn wall_thickness(&self) -> f64 {
        self.line_width * self.wall_line_count as f64
    }
}

/// Rectangular cross-section of a beam member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionProperties {
    /// mm²
    pub area: f64,
    /// In-plane second moment, mm⁴.
    pub second_moment: f64,
    /// Distance from the neutral axis to the extreme fiber, mm.
    pub half_thickness: f64,
}

impl SectionProperties {
    pub fn rectangle(thickness: f64, depth: f64) -> SectionProperties {
        SectionProperties {
            area: thickness * depth,
            second_moment: depth * thickness.powi(3) / 12.0,
            half_thickness: 0.5 * thickness,
        }
    }
}

/// Section of a single extruded line: thickness = line width, depth = layer depth.
pub fn beam_section(params: &PrintParameters) -> Result<SectionProperties> {
    params.validate()?;
    Ok(SectionProperties::rectangle(params.line_width, params.layer_depth))
}

/// Rib pitch of an unconnected-lines infill: one line of width `w` every `w / density`.
pub fn rib_spacing(density: f64, params: &PrintParameters) -> Result<f64> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Domain(format!(
            "infill density must lie in (0, 1], got {density}"
        )));
    }
    params.validate()?;
    Ok(params.line_width / density)
}
