//! Command-line studies: JSON config in, CSV/SVG/STL reports out.

mod config;
mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::characterize::{
    calibrate, fit_viscoelastic, identify_stiffness_elastic, principal_axis, strength_sweep, CalibrationAnchor,
    StiffnessMatrix, ViscoSample, ViscoelasticFit, AXIAL_PUSH,
};
use crate::error::{Error, Result};
use crate::geometry::{build_frame, export_stl, export_svg};
use crate::insertion::{simulate_insert, tolerance_window, trace_csv, trace_svg, SearchTrace, WindowAxis};
use crate::material::MaterialModel;

pub use config::{CalibrationSpec, DesignPoint, GridBlock, ScenarioSpec, SolverConfig, StudyConfig, SCHEMA_VERSION};
pub use report::{from_csv, read_csv, to_csv, StiffnessRow, WindowRow, STATUS_OK, STIFFNESS_COLUMNS, WINDOW_COLUMNS};

pub const STIFFNESS_REPORT: &str = "stiffness_report.csv";
pub const WINDOW_REPORT: &str = "window_report.csv";

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownEntity { .. } => 2,
        Error::Config(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::Invalid(_)
        | Error::UnknownMaterial(_) => 1,
        _ => 3,
    }
}

/// A config with its materials resolved and calibrated.
pub struct Study {
    pub config: StudyConfig,
    /// Modulus scale from the calibration anchor, if any.
    pub scale: Option<f64>,
    materials: BTreeMap<String, MaterialModel>,
}

impl Study {
    pub fn prepare(config: StudyConfig) -> Result<Study> {
        config.validate()?;
        let s = &config.solver;
        let scale = match &config.calibration {
            Some(c) => {
                let design = c.point().design(config.nominal_material(&c.material)?);
                let anchor = CalibrationAnchor {
                    design: design.clone(),
                    measured_kyy: c.measured_kyy,
                };
                Some(calibrate(&design, &anchor, &s.probe, s.elems_per_member)?)
            }
            None => None,
        };
        let mut names: Vec<String> = config.design_points().into_iter().map(|p| p.material).collect();
        for sc in &config.scenarios {
            names.extend(config.scenario_points(sc).into_iter().map(|p| p.material));
        }
        let mut materials = BTreeMap::new();
        for name in names {
            if materials.contains_key(&name) {
                continue;
            }
            let nominal = config.nominal_material(&name)?;
            let m = match scale {
                Some(k) => nominal.calibrated(k)?,
                None => nominal,
            };
            materials.insert(name, m);
        }
        Ok(Study {
            config,
            scale,
            materials,
        })
    }

    fn material(&self, name: &str) -> Result<MaterialModel> {
        match self.materials.get(name) {
            Some(m) => Ok(m.clone()),
            None => self.config.nominal_material(name),
        }
    }

    pub fn stiffness(&self, p: &DesignPoint) -> Result<StiffnessMatrix> {
        let s = &self.config.solver;
        let frame = build_frame(&p.design(self.material(&p.material)?), s.elems_per_member)?;
        Ok(identify_stiffness_elastic(&frame, &s.probe, s.max_probe_halvings)?.0)
    }

    /// Stiffness, compliance center and strength of one design. Errors are
    /// recorded in the row, not returned.
    pub fn characterize(&self, p: &DesignPoint) -> StiffnessRow {
        let mut row = StiffnessRow::empty(p);
        if let Err(e) = self.fill_characterization(p, &mut row) {
            row.status = format!("failed: {e}");
        }
        row
    }

    fn fill_characterization(&self, p: &DesignPoint, row: &mut StiffnessRow) -> Result<()> {
        let s = &self.config.solver;
        let frame = build_frame(&p.design(self.material(&p.material)?), s.elems_per_member)?;
        let (k, _) = identify_stiffness_elastic(&frame, &s.probe, s.max_probe_halvings)?;
        row.kyy = Some(k.kyy);
        row.kzz = Some(k.kzz);
        row.kzy = Some(k.kzy);
        row.kxx = Some(k.kxx);
        row.ratio = Some(k.ratio());
        row.rcc_angle_deg = Some(principal_axis(&k)?.angle_deg);
        let strength = strength_sweep(&frame, AXIAL_PUSH, &s.strength)?;
        row.max_force = Some(strength.max_force);
        row.max_deflection = Some(strength.max_deflection);
        row.failure_mode = Some(strength.failure_mode);
        Ok(())
    }

    /// Tolerance window of one design, plus trajectory plots at both window edges.
    pub fn window(&self, spec: &ScenarioSpec, p: &DesignPoint, axis: WindowAxis, step: f64) -> SweepResult {
        let mut row = WindowRow::empty(p, axis);
        let mut plots = Vec::new();
        let mut run = || -> Result<()> {
            let scenario = spec.scenario(self.stiffness(p)?)?;
            let w = tolerance_window(&scenario, &spec.strategy, axis, step)?;
            row.min_offset = Some(w.min_offset);
            row.max_offset = Some(w.max_offset);
            row.window_mm = Some(w.window);
            row.limiting_outcome = Some(w.limiting_outcome);
            for (tag, offset) in [("min", w.min_offset), ("max", w.max_offset)] {
                let sc = scenario.with_misalignment(axis, offset);
                let trace = simulate_insert(&sc, &spec.strategy)?;
                let name = format!("{}_{}_{}_{}.svg", spec.id, p.id(), axis.as_str(), tag);
                plots.push((name, trace_svg(&sc, &trace)));
            }
            Ok(())
        };
        if let Err(e) = run() {
            row.status = format!("failed: {e}");
        }
        SweepResult { row, plots }
    }
}

pub struct SweepResult {
    pub row: WindowRow,
    /// (file name, SVG text)
    pub plots: Vec<(String, String)>,
}

/// Where and how a command runs.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
    pub verbose: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> RunOptions {
        RunOptions {
            out: out.into(),
            jobs: None,
            verbose: false,
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.unwrap_or(0))
            .build()
            .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&path, bytes)?;
        Ok(path)
    }

    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Writes `<id>.svg` (undeformed frame) and `<id>.stl` for one design.
pub fn cmd_design(config: &StudyConfig, id: &str, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let p = config.find_design(id)?;
    let design = p.design(config.nominal_material(&p.material)?);
    let frame = build_frame(&design, config.solver.elems_per_member)?;
    let svg = export_svg(&frame, None, 1.0)?;
    let stl = export_stl(&design)?;
    Ok(vec![
        opts.write(&format!("{id}.svg"), svg.as_bytes())?,
        opts.write(&format!("{id}.stl"), &stl)?,
    ])
}

/// Characterizes every grid point and writes `stiffness_report.csv`.
pub fn cmd_characterize(config: &StudyConfig, opts: &RunOptions) -> Result<Vec<StiffnessRow>> {
    let points = config.design_points();
    let rows = if points.is_empty() {
        config.validate()?;
        Vec::new()
    } else {
        let study = Study::prepare(config.clone())?;
        if let Some(k) = study.scale {
            opts.log(format!("calibration modulus scale {k:.6}"));
        }
        opts.pool()?.install(|| {
            points
                .par_iter()
                .map(|p| {
                    let row = study.characterize(p);
                    opts.log(format!("{} {}", p.id(), row.status));
                    row
                })
                .collect::<Vec<_>>()
        })
    };
    opts.write(STIFFNESS_REPORT, to_csv(&STIFFNESS_COLUMNS, &rows)?.as_bytes())?;
    Ok(rows)
}

/// Sweeps the misalignment window of every design of a scenario and writes
/// `window_report.csv` plus trajectory plots under `trajectories/`.
pub fn cmd_sweep(
    config: &StudyConfig,
    scenario_id: &str,
    axis: Option<WindowAxis>,
    step: Option<f64>,
    opts: &RunOptions,
) -> Result<Vec<WindowRow>> {
    config.validate()?;
    let spec = config.scenario(scenario_id)?;
    let axis = axis.unwrap_or(spec.axis);
    let step = step.unwrap_or(config.solver.window_step);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("window step must be positive, got {step}")));
    }
    let points = config.scenario_points(spec);
    let results = if points.is_empty() {
        Vec::new()
    } else {
        let study = Study::prepare(config.clone())?;
        opts.pool()?.install(|| {
            points
                .par_iter()
                .map(|p| {
                    let r = study.window(spec, p, axis, step);
                    opts.log(format!("{} {}", p.id(), r.row.status));
                    r
                })
                .collect::<Vec<_>>()
        })
    };
    let rows: Vec<WindowRow> = results.iter().map(|r| r.row.clone()).collect();
    opts.write(WINDOW_REPORT, to_csv(&WINDOW_COLUMNS, &rows)?.as_bytes())?;
    for (name, svg) in results.iter().flat_map(|r| &r.plots) {
        opts.write(&format!("trajectories/{name}"), svg.as_bytes())?;
    }
    Ok(rows)
}

/// Simulates one insertion and writes its trace as CSV and SVG.
pub fn cmd_simulate(
    config: &StudyConfig,
    scenario_id: &str,
    design_id: &str,
    axis: Option<WindowAxis>,
    offset: f64,
    opts: &RunOptions,
) -> Result<SearchTrace> {
    config.validate()?;
    let spec = config.scenario(scenario_id)?;
    let point = config.find_design(design_id)?;
    let axis = axis.unwrap_or(spec.axis);
    let study = Study::prepare(config.clone())?;
    let scenario = spec.scenario(study.stiffness(&point)?)?.with_misalignment(axis, offset);
    let trace = simulate_insert(&scenario, &spec.strategy)?;
    let stem = format!("trace_{scenario_id}_{design_id}");
    opts.write(&format!("{stem}.csv"), trace_csv(&trace)?.as_bytes())?;
    opts.write(&format!("{stem}.svg"), trace_svg(&scenario, &trace).as_bytes())?;
    Ok(trace)
}

/// Fits `F = k δ + b δ̇` to a CSV with columns `displacement,velocity,force`
/// and writes the fit as JSON.
pub fn cmd_fit_visco(samples: &Path, opts: &RunOptions) -> Result<ViscoelasticFit> {
    let text = std::fs::read_to_string(samples)
        .map_err(|e| Error::Config(format!("cannot read samples {}: {e}", samples.display())))?;
    let samples: Vec<ViscoSample> = from_csv(&text)?;
    let fit = fit_viscoelastic(&samples)?;
    let json = serde_json::to_string_pretty(&fit)?;
    opts.write("visco_fit.json", format!("{json}\n").as_bytes())?;
    Ok(fit)
}

#[derive(Parser, Debug)]
#[command(
    name = "finray",
    version,
    about = "Finray finger design, characterization and insertion studies"
)]
struct Cli {
    /// Study config (JSON). Defaults to the builtin study.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Misalignment step of window sweeps, mm.
    #[arg(long, global = true, value_name = "MM")]
    step: Option<f64>,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write frame SVG and STL of a design.
    Design {
        /// Design id, e.g. PLA+_0deg_10pct_notched_contact_plane_m10
        id: String,
    },
    /// Stiffness, compliance center and strength of every grid design.
    Characterize,
    /// Fit a viscoelastic model to displacement,velocity,force samples.
    FitVisco {
        samples: PathBuf,
        /// Report the viscous force at this speed, mm/s.
        #[arg(long, default_value_t = 100.0)]
        speed: f64,
    },
    /// Simulate one insertion.
    Simulate {
        scenario: String,
        design: String,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        /// Misalignment along the axis, mm.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        offset: f64,
    },
    /// Misalignment windows of a scenario's designs.
    Sweep {
        scenario: String,
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
    },
    /// Print the builtin study config.
    DefaultConfig,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum AxisArg {
    X,
    Y,
}

impl From<AxisArg> for WindowAxis {
    fn from(a: AxisArg) -> WindowAxis {
        match a {
            AxisArg::X => WindowAxis::X,
            AxisArg::Y => WindowAxis::Y,
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

// stdout may be a closed pipe (`finray default-config | head`); that is not an error
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn execute(cli: Cli) -> Result<i32> {
    let config = match &cli.config {
        Some(path) => StudyConfig::load(path)?,
        None => StudyConfig::builtin(),
    };
    if cli.jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let opts = RunOptions {
        out: cli.out.clone().unwrap_or_else(|| config.output_dir.clone()),
        jobs: cli.jobs,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Design { id } => {
            for path in cmd_design(&config, &id, &opts)? {
                out!("{}", path.display());
            }
            Ok(0)
        }
        Command::Characterize => {
            let rows = cmd_characterize(&config, &opts)?;
            let failed = rows.iter().filter(|r| !r.ok()).count();
            out!(
                "{} designs, {failed} failed -> {}",
                rows.len(),
                opts.out.join(STIFFNESS_REPORT).display()
            );
            Ok(if !rows.is_empty() && failed == rows.len() { 3 } else { 0 })
        }
        Command::FitVisco { samples, speed } => {
            let fit = cmd_fit_visco(&samples, &opts)?;
            out!(
                "k = {:.6} N/mm, b = {:.6} N*s/mm, rms = {:.3e} N, viscous force at {speed} mm/s = {:.4} N",
                fit.k,
                fit.b,
                fit.residual_rms,
                fit.viscous_force(speed)
            );
            Ok(0)
        }
        Command::Simulate {
            scenario,
            design,
            axis,
            offset,
        } => {
            let trace = cmd_simulate(&config, &scenario, &design, axis.map(Into::into), offset, &opts)?;
            out!(
                "{} (insert depth {:.3} of {:.3} mm, peak contact {:.3} N)",
                trace.outcome.as_str(),
                trace.insert_depth,
                trace.required_depth,
                trace.peak_contact_force
            );
            Ok(0)
        }
        Command::Sweep { scenario, axis } => {
            let rows = cmd_sweep(&config, &scenario, axis.map(Into::into), cli.step, &opts)?;
            for r in &rows {
                let name = format!("{} {} deg {:.3}", r.material, r.infill_direction, r.infill_density);
                match r.window_mm {
                    Some(w) => out!("{name}: {w} mm"),
                    None => out!("{name}: {}", r.status),
                }
            }
            let failed = rows.iter().filter(|r| !r.ok()).count();
            Ok(if !rows.is_empty() && failed == rows.len() { 3 } else { 0 })
        }
        Command::DefaultConfig => {
            out!("{}", StudyConfig::builtin().to_json());
            Ok(0)
        }
    }
}
