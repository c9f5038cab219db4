use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;

use finray_core::cli::{
    cmd_characterize, cmd_design, cmd_sweep, read_csv, GridBlock, RunOptions, StiffnessRow, StudyConfig, WindowRow,
    STIFFNESS_COLUMNS, STIFFNESS_REPORT, WINDOW_REPORT,
};
use finray_core::geometry::{build_frame, rib_count, FingerDesign};
use finray_core::insertion::WindowAxis;
use finray_core::Error;

const ID_0_10: &str = "PLA+_0deg_10pct_notched_contact_plane_m10";

fn finray(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_finray")).args(args).output().unwrap()
}

fn write_config(dir: &Path, config: &StudyConfig) -> String {
    let path = dir.join("study.json");
    std::fs::write(&path, config.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

fn svg_polylines(svg: &str, color: &str) -> Vec<[f64; 4]> {
    svg.lines()
        .filter(|l| l.starts_with("<polyline") && l.contains(&format!("stroke=\"{color}\"")))
        .map(|l| {
            let pts = l.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
            let v: Vec<f64> = pts.split([' ', ',']).map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn design_writes_deterministic_svg_and_stl() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let config = StudyConfig::builtin();
    let first = cmd_design(&config, ID_0_10, &RunOptions::new(&a)).unwrap();
    let second = cmd_design(&config, ID_0_10, &RunOptions::new(&b)).unwrap();
    assert_eq!(first.len(), 2);
    for (x, y) in first.iter().zip(&second) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let exts: BTreeSet<_> = first.iter().map(|p| p.extension().unwrap().to_str().unwrap()).collect();
    assert_eq!(exts, BTreeSet::from(["stl", "svg"]));
}

#[test]
fn zero_degree_svg_shows_one_rib_per_pitch() {
    let dir = tempfile::tempdir().unwrap();
    let paths = cmd_design(&StudyConfig::builtin(), ID_0_10, &RunOptions::new(dir.path())).unwrap();
    let svg = std::fs::read_to_string(paths.iter().find(|p| p.extension().unwrap() == "svg").unwrap()).unwrap();
    let segments = svg_polylines(&svg, "#4d7ea8");
    assert!(!segments.is_empty());

    // 0° ribs are parallel; group segments by the offset of their supporting line
    let d = [segments[0][2] - segments[0][0], segments[0][3] - segments[0][1]];
    let len = d[0].hypot(d[1]);
    let n = [-d[1] / len, d[0] / len];
    let offsets: BTreeSet<i64> = segments
        .iter()
        .map(|s| ((n[0] * s[0] + n[1] * s[1]) * 100.0).round() as i64)
        .collect();
    for s in &segments {
        let e = [s[2] - s[0], s[3] - s[1]];
        assert!((e[0] * n[0] + e[1] * n[1]).abs() < 1e-2, "rib segment not parallel");
    }

    let design = FingerDesign::new(0.0, 0.1);
    let expected = (design.usable_height() / design.rib_pitch().unwrap()).floor() as usize;
    assert_eq!(offsets.len(), expected);
    assert_eq!(rib_count(&build_frame(&design, 2).unwrap()), expected);
}

#[test]
fn design_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = finray(&["design", ID_0_10, "--out", out]);
    assert_eq!(ok.status.code(), Some(0));
    let unknown = finray(&["design", "PLA+_0deg_12pct_flat_m10", "--out", out]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown design"));
    let missing = finray(&["--config", "/nonexistent/study.json", "design", ID_0_10]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read config"));
    assert_eq!(finray(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(finray(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_config_contents_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "grid": [{"infill_direction": [0], "infill_density": []}]}"#,
    )
    .unwrap();
    let out = finray(&["--config", path.to_str().unwrap(), "characterize"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn builtin_grid_report_is_sorted_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let config = StudyConfig::builtin();
    let rows = cmd_characterize(
        &config,
        &RunOptions {
            jobs: Some(1),
            ..RunOptions::new(&a)
        },
    )
    .unwrap();
    cmd_characterize(
        &config,
        &RunOptions {
            jobs: Some(3),
            ..RunOptions::new(&b)
        },
    )
    .unwrap();
    let text = std::fs::read(a.join(STIFFNESS_REPORT)).unwrap();
    assert_eq!(text, std::fs::read(b.join(STIFFNESS_REPORT)).unwrap());

    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r.ok()), "{rows:#?}");
    let keys: Vec<_> = rows
        .iter()
        .map(|r| (r.material.clone(), r.infill_direction, r.infill_density))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2)));
    assert_eq!(keys, sorted);

    let parsed: Vec<StiffnessRow> = read_csv(&a.join(STIFFNESS_REPORT)).unwrap();
    assert_eq!(parsed, rows);
    let anchor = rows
        .iter()
        .find(|r| r.material == "PLA+" && r.infill_direction == 0.0 && r.infill_density == 0.1);
    assert!((anchor.unwrap().kyy.unwrap() - 1.2).abs() < 1e-6);
}

#[test]
fn empty_grid_gives_header_only_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = StudyConfig::builtin();
    config.grid.clear();
    let path = write_config(dir.path(), &config);
    let out = dir.path().join("out");
    let run = finray(&["--config", &path, "--out", out.to_str().unwrap(), "characterize"]);
    assert_eq!(run.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join(STIFFNESS_REPORT)).unwrap();
    assert_eq!(text, format!("{}\n", STIFFNESS_COLUMNS.join(",")));
}

#[test]
fn failed_design_is_flagged_and_only_total_failure_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = StudyConfig::builtin();
    // 0.2 % infill puts the rib pitch beyond the finger height
    config.grid = vec![GridBlock::new(vec![0.0], vec![0.002, 0.1], "PLA+")];
    let path = write_config(dir.path(), &config);
    let out = dir.path().join("out");
    let run = finray(&["--config", &path, "--out", out.to_str().unwrap(), "characterize"]);
    assert_eq!(run.status.code(), Some(0));
    let rows: Vec<StiffnessRow> = read_csv(&out.join(STIFFNESS_REPORT)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].status.starts_with("failed") && rows[0].kyy.is_none());
    assert!(rows[1].ok());

    config.grid = vec![GridBlock::new(vec![0.0], vec![0.002], "PLA+")];
    let path = write_config(dir.path(), &config);
    let run = finray(&["--config", &path, "--out", out.to_str().unwrap(), "characterize"]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn sweep_windows_follow_stiffness_and_refine_consistently() {
    let dir = tempfile::tempdir().unwrap();
    let config = StudyConfig::builtin();
    let coarse_dir = dir.path().join("coarse");
    let coarse = cmd_sweep(&config, "insertion", None, Some(0.5), &RunOptions::new(&coarse_dir)).unwrap();
    let fine = cmd_sweep(
        &config,
        "insertion",
        None,
        Some(0.25),
        &RunOptions::new(dir.path().join("fine")),
    )
    .unwrap();
    assert_eq!(coarse.len(), 3);
    let w: Vec<f64> = coarse.iter().map(|r| r.window_mm.unwrap()).collect();
    assert!(w.windows(2).all(|p| p[1] <= p[0]), "{w:?}");

    let clearance = config
        .scenario("insertion")
        .unwrap()
        .scenario(finray_core::characterize::StiffnessMatrix::new(2.9, 1.0, 10.0, 0.0))
        .unwrap()
        .clearance;
    assert!(w[2] >= clearance);
    for (c, f) in coarse.iter().zip(&fine) {
        assert!(
            (c.window_mm.unwrap() - f.window_mm.unwrap()).abs() <= 0.5,
            "{c:?} vs {f:?}"
        );
    }

    let parsed: Vec<WindowRow> = read_csv(&coarse_dir.join(WINDOW_REPORT)).unwrap();
    assert_eq!(parsed, coarse);
    let plots = std::fs::read_dir(coarse_dir.join("trajectories")).unwrap().count();
    assert_eq!(plots, 2 * coarse.len());
}

#[test]
fn unknown_scenario_is_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = finray(&["sweep", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e = cmd_sweep(
        &StudyConfig::builtin(),
        "nope",
        Some(WindowAxis::Y),
        None,
        &RunOptions::new(dir.path()),
    );
    assert!(matches!(e, Err(Error::UnknownEntity { .. })));
}

#[test]
fn simulate_writes_trace_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = finray(&[
        "simulate",
        "insertion",
        ID_0_10,
        "--offset",
        "-1.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("success"));
    let stem = format!("trace_insertion_{ID_0_10}");
    let csv = std::fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
    assert!(csv.starts_with("step,phase"));
    assert!(dir.path().join(format!("{stem}.svg")).exists());
}

#[test]
fn fit_visco_recovers_generating_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.csv");
    let mut text = String::from("displacement,velocity,force\n");
    for i in 0..20 {
        let (d, v) = (0.2 * i as f64, 2.0 + 0.7 * (i % 7) as f64);
        text += &format!("{d},{v},{}\n", 1.45 * d + 0.055 * v);
    }
    std::fs::write(&samples, text).unwrap();
    let out = finray(&[
        "fit-visco",
        samples.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("visco_fit.json")).unwrap()).unwrap();
    assert!((fit["k"].as_f64().unwrap() - 1.45).abs() < 1e-9);
    assert!((fit["b"].as_f64().unwrap() - 0.055).abs() < 1e-9);
    assert!(String::from_utf8_lossy(&out.stdout).contains("5.5000 N"));
}
