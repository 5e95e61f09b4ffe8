use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cct_core::io::{read_grid, read_markers, write_grid, write_mask};
use cct_core::{Geometry, MaskGrid, ScalarGrid};
use jsonschema::JSONSchema;
use serde_json::Value;

fn cctk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cctk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("cctk runs")
}

fn schema() -> JSONSchema {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json");
    let text = std::fs::read_to_string(path).unwrap();
    JSONSchema::compile(&serde_json::from_str(&text).unwrap()).unwrap()
}

/// Runs a command that must succeed and returns its validated report.
fn report(args: &[&str], dir: &Path) -> Value {
    let out = cctk(args, dir);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    if let Err(errors) = schema().validate(&value) {
        let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
        panic!("{args:?} report violates the schema: {msgs:?}");
    }
    value
}

fn singleton_file(dir: &Path, name: &str) -> PathBuf {
    let mut k = MaskGrid::empty(Geometry::centered(&[41, 41], 1.0).unwrap());
    k.set(&[20, 20], true);
    let path = dir.join(name);
    write_mask(&k, &path, None, 1.0).unwrap();
    path
}

#[test]
fn upper_transform_writes_grid_and_timed_report() {
    let dir = tempfile::tempdir().unwrap();
    singleton_file(dir.path(), "chi.fgrid");
    let r = report(
        &[
            "cct",
            "upper",
            "--in",
            "chi.fgrid",
            "--lambda",
            "0.01",
            "--scheme",
            "moreau",
            "--out",
            "u.fgrid",
        ],
        dir.path(),
    );
    assert_eq!(r["metric"], "cct.upper");
    assert!(r["elapsed_s"].as_f64().unwrap() >= 0.0);
    let u = read_grid(dir.path().join("u.fgrid"), None).unwrap();
    // the closed form at distance 5 from the point is λ(1/√λ − 5)² = 0.25
    assert!((u.get(&[25, 20]) - 0.25).abs() < 1e-12);
    assert!((u.get(&[20, 20]) - 1.0).abs() < 1e-12);
}

#[test]
fn report_file_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    singleton_file(dir.path(), "chi.fgrid");
    let out = cctk(
        &[
            "cct",
            "mixed-ul",
            "--in",
            "chi.fgrid",
            "--lambda",
            "2",
            "--tau",
            "0.5",
            "--report",
            "r.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let value: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(schema().is_valid(&value));
    assert_eq!(value["params"]["tau"], 0.5);
}

#[test]
fn singleton_bench_reports_every_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&["bench", "singleton", "--lambda", "0.01"], dir.path());
    let schemes = r["value"]["schemes"].as_object().unwrap();
    for name in ["moreau", "iter-moreau", "oberman", "biconj"] {
        let row = &schemes[name];
        assert!(
            row["e_inf"].is_number() && row["e_h"].is_number(),
            "{name}: {row}"
        );
    }
    assert_eq!(schemes["moreau"]["e_h"], 0.0);
}

#[test]
fn identical_images_have_exact_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let g =
        ScalarGrid::from_shape_vec(&[4, 5], (0..20).map(|v| (v * 12) as f64).collect()).unwrap();
    write_grid(&g, dir.path().join("a.pgm"), None).unwrap();
    write_grid(&g, dir.path().join("b.pgm"), None).unwrap();
    let r = report(
        &["metric", "psnr", "--in", "a.pgm", "--mask", "b.pgm"],
        dir.path(),
    );
    assert_eq!(r["value"], "exact");

    let shifted = g.map(|v| v + 16.0);
    write_grid(&shifted, dir.path().join("b.pgm"), None).unwrap();
    let r = report(
        &["metric", "psnr", "--in", "a.pgm", "--mask", "b.pgm"],
        dir.path(),
    );
    let want = 10.0 * (255.0f64 * 255.0 / 256.0).log10();
    assert!((r["value"].as_f64().unwrap() - want).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["cct", "sideways"],
        vec!["cct", "lower", "--bogus-flag"],
        vec!["cct", "lower", "--lambda", "1"],
    ] {
        let out = cctk(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    singleton_file(dir.path(), "chi.fgrid");
    for args in [
        vec!["cct", "lower", "--in", "chi.fgrid", "--lambda", "-1"],
        vec!["cct", "lower", "--in", "missing.fgrid", "--lambda", "1"],
        vec![
            "feature",
            "sv",
            "--in",
            "chi.fgrid",
            "--lambda",
            "1",
            "--tau",
            "2",
        ],
        vec![
            "restore",
            "interp",
            "--in",
            "chi.fgrid",
            "--mask",
            "chi.fgrid",
            "--lambda",
            "1",
            "--scheme",
            "biconj",
        ],
    ] {
        let out = cctk(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // two low corners on a plateau: the envelope spreads one cell per sweep
    let g = ScalarGrid::from_fn(Geometry::unit(&[24, 24]).unwrap(), |x| {
        if x[0] == x[1] && (x[0] == 0.0 || x[0] == 23.0) {
            0.0
        } else {
            1.0
        }
    })
    .unwrap();
    write_grid(&g, dir.path().join("g.fgrid"), None).unwrap();
    let out = cctk(
        &[
            "cct",
            "lower",
            "--in",
            "g.fgrid",
            "--lambda",
            "0.001",
            "--scheme",
            "oberman",
            "--tol",
            "1e-14",
            "--max-iters",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("converge"));
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut k = MaskGrid::empty(Geometry::unit(&[40, 30]).unwrap());
    for (i, j) in [(5, 5), (30, 8), (17, 25), (9, 20)] {
        k.set(&[i, j], true);
    }
    write_mask(&k, dir.path().join("k.pgm"), None, 255.0).unwrap();
    let runs = [
        vec!["feature", "mma", "--in", "k.pgm", "--lambda", "0.7"],
        vec![
            "cct", "upper", "--in", "k.pgm", "--lambda", "0.3", "--scheme", "oberman",
        ],
        vec![
            "restore",
            "interp",
            "--in",
            "k.pgm",
            "--mask",
            "k.pgm",
            "--lambda",
            "2",
            "--level-m",
            "300",
            "--scheme",
            "biconj",
            "--dual-h",
            "0.5",
        ],
    ];
    for args in runs {
        let mut bytes = Vec::new();
        for n in 0..2 {
            let name = format!("out{n}.fgrid");
            let mut full = args.clone();
            full.extend(["--out", name.as_str()]);
            report(&full, dir.path());
            bytes.push(std::fs::read(dir.path().join(&name)).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{args:?}");
    }
}

#[test]
fn feature_map_has_json_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    singleton_file(dir.path(), "chi.fgrid");
    report(
        &[
            "feature",
            "sr",
            "--in",
            "chi.fgrid",
            "--lambda",
            "0.5",
            "--tau",
            "0.25",
            "--out",
            "sr.fgrid",
        ],
        dir.path(),
    );
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sr.fgrid.json")).unwrap())
            .unwrap();
    assert_eq!(side["kind"], "stable_ridge");
    assert_eq!(side["params"]["lambda"], 0.5);
    assert_eq!(side["params"]["tau"], 0.25);
    assert_eq!(side["shape"], serde_json::json!([41, 41]));
}

#[test]
fn cross_gives_one_intersection_marker() {
    let dir = tempfile::tempdir().unwrap();
    let k = MaskGrid::from_index_fn(Geometry::unit(&[61, 61]).unwrap(), |i| {
        (i[0] == 30 && (10..=50).contains(&i[1])) || (i[1] == 30 && (10..=50).contains(&i[0]))
    });
    write_mask(&k, dir.path().join("x.pgm"), None, 255.0).unwrap();
    let r = report(
        &[
            "feature",
            "intersect",
            "--in",
            "x.pgm",
            "--lambda",
            "0.05",
            "--out",
            "i.pgm",
            "--markers",
            "m.csv",
        ],
        dir.path(),
    );
    assert_eq!(r["metric"], "feature.intersection");
    assert_eq!(
        read_markers(dir.path().join("m.csv")).unwrap(),
        vec![vec![30, 30]]
    );
    let img = read_grid(dir.path().join("i.pgm"), None).unwrap();
    assert_eq!(img.get(&[30, 30]), 255.0);
}

#[test]
fn edt_matches_direct_search() {
    let dir = tempfile::tempdir().unwrap();
    let geom = Geometry::unit(&[17, 23]).unwrap();
    let sites = [(2usize, 3usize), (14, 19), (8, 11)];
    let mut k = MaskGrid::empty(geom.clone());
    for (i, j) in sites {
        k.set(&[i, j], true);
    }
    write_mask(&k, dir.path().join("k.csv"), None, 1.0).unwrap();
    report(
        &["dist", "edt", "--in", "k.csv", "--sqrt", "--out", "d.fgrid"],
        dir.path(),
    );
    let d = read_grid(dir.path().join("d.fgrid"), None).unwrap();
    for i in 0..17 {
        for j in 0..23 {
            let want = sites
                .iter()
                .map(|&(a, b)| {
                    ((i as f64 - a as f64).powi(2) + (j as f64 - b as f64).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((d.get(&[i, j]) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn hausdorff_of_two_singletons() {
    let dir = tempfile::tempdir().unwrap();
    let geom = Geometry::unit(&[10, 10]).unwrap();
    let mut a = MaskGrid::empty(geom.clone());
    a.set(&[1, 1], true);
    let mut b = MaskGrid::empty(geom);
    b.set(&[4, 5], true);
    write_mask(&a, dir.path().join("a.pgm"), None, 255.0).unwrap();
    write_mask(&b, dir.path().join("b.pgm"), None, 255.0).unwrap();
    let r = report(
        &["metric", "hausdorff", "--in", "a.pgm", "--mask", "b.pgm"],
        dir.path(),
    );
    assert_eq!(r["value"], 5.0);
}

#[test]
fn denoise_keeps_clean_pixels() {
    let dir = tempfile::tempdir().unwrap();
    let clean = ScalarGrid::from_fn(Geometry::unit(&[48, 48]).unwrap(), |x| {
        (100.0 + 40.0 * (x[0] / 7.0).sin() + 2.0 * x[1]).round()
    })
    .unwrap();
    let noisy = ScalarGrid::new(
        clean.geometry().clone(),
        clean
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| match (i * 7919) % 10 {
                0..=2 => 0.0,
                3..=5 => 255.0,
                _ => v,
            })
            .collect(),
    )
    .unwrap();
    write_grid(&clean, dir.path().join("clean.pgm"), None).unwrap();
    write_grid(&noisy, dir.path().join("noisy.pgm"), None).unwrap();
    let r = report(
        &[
            "restore",
            "denoise",
            "--in",
            "noisy.pgm",
            "--ref",
            "clean.pgm",
            "--out",
            "fixed.pgm",
        ],
        dir.path(),
    );
    assert_eq!(r["value"]["eps_k"], 0.0);
    assert!(
        r["value"]["psnr"].as_f64().unwrap() > r["value"]["input_psnr"].as_f64().unwrap() + 15.0
    );
    assert_eq!(r["params"]["lambda"], 20.0);
}

#[test]
fn suplevel_relative_and_absolute() {
    let dir = tempfile::tempdir().unwrap();
    let g = ScalarGrid::from_shape_vec(&[1, 5], vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
    write_grid(&g, dir.path().join("g.csv"), None).unwrap();
    let r = report(
        &["feature", "suplevel", "--in", "g.csv", "--threshold", "2"],
        dir.path(),
    );
    assert_eq!(r["value"]["cells"], 3);
    let r = report(
        &[
            "feature",
            "suplevel",
            "--in",
            "g.csv",
            "--threshold",
            "0.75",
            "--relative",
        ],
        dir.path(),
    );
    assert_eq!(r["value"]["cells"], 2);
    let r = report(
        &["feature", "suplevel", "--in", "g.csv", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(r["value"]["cells"], 4);
    assert_eq!(
        read_grid(dir.path().join("s.csv"), None).unwrap().values(),
        &[0.0, 1.0, 1.0, 1.0, 1.0]
    );
}

#[test]
fn every_bench_runs() {
    let dir = tempfile::tempdir().unwrap();
    let r = report(&["bench", "corner"], dir.path());
    assert_eq!(r["value"]["half_plane_max"], 0.5);
    let r = report(&["bench", "mma-two-point"], dir.path());
    assert!((r["value"]["midpoint"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    let r = report(&["bench", "sp-noise", "--size", "64"], dir.path());
    assert_eq!(r["value"]["eps_k"], 0.0);
}
