use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn wulffkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wulffkit"))
        .args(args)
        .env("WULFFKIT_THREADS", "1")
        .output()
        .expect("spawn wulffkit")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn compare_prefers_fcc() {
    let v = json_of(&wulffkit(&["compare"]));
    assert_eq!(v["verdict"], "fcc");
    let m_fcc = v["m_fcc"].as_f64().unwrap();
    let m_hcp = v["m_hcp"].as_f64().unwrap();
    assert!((m_fcc - 12.0 * 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
    assert!((m_hcp - 3.0 * 2f64.powf(2.0 / 3.0) * 65f64.cbrt()).abs() < 1e-12);
}

#[test]
fn hcp_report_to_stdout() {
    let v = json_of(&wulffkit(&["wulff", "--lattice", "hcp", "--report", "-"]));
    assert_eq!(v["volume"].as_f64().unwrap(), 260.0);
    assert_eq!(v["surface_integral"].as_f64().unwrap(), 780.0);
    assert_eq!(v["facets"].as_array().unwrap().len(), 20);
}

#[test]
fn phi_of_a_cube_normal() {
    let v = json_of(&wulffkit(&["phi", "--lattice", "fcc", "--nu", "1,0,0"]));
    assert_eq!(v["value"].as_f64().unwrap(), 4.0);
    assert_eq!(v["method"], "closed");
}

#[test]
fn phi_routes_agree_and_scale() {
    let closed = json_of(&wulffkit(&["phi", "--lattice", "hcp", "--nu=-2,1,3"]));
    let cell = json_of(&wulffkit(&[
        "phi",
        "--lattice",
        "hcp",
        "--nu=-2,1,3",
        "--method",
        "cell",
    ]));
    let a = closed["value"].as_f64().unwrap();
    let b = cell["value"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    let doubled = json_of(&wulffkit(&["phi", "--lattice", "hcp", "--nu=-4,2,6"]));
    assert!((doubled["value"].as_f64().unwrap() - 2.0 * a).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let out = wulffkit(&["phi", "--nu", "1,0,0", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--frobnicate"));

    let out = wulffkit(&["phi", "--nu", "1,0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = wulffkit(&["anneal", "--N", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_threads_variable_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_wulffkit"))
        .arg("compare")
        .env("WULFFKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_lattice_file_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.lat");
    fs::write(
        &path,
        "basis\n1 0 0\n0 1 0\n0 0 1\noffset 0 0 0\n\
         stencil 0: 0.9 0 0\nstencil 0: -0.9 0 0\nmax_coordination 2\n",
    )
    .unwrap();
    let sel = format!("file:{}", path.display());
    let out = wulffkit(&["validate", "--lattice", &sel]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("norm 0.9"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn cubic_lattice_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cubic.lat");
    fs::write(
        &path,
        "basis\n1 0 0\n0 1 0\n0 0 1\noffset 0 0 0\n\
         stencil 0: 1 0 0\nstencil 0: -1 0 0\nstencil 0: 0 1 0\n\
         stencil 0: 0 -1 0\nstencil 0: 0 0 1\nstencil 0: 0 0 -1\nmax_coordination 6\n",
    )
    .unwrap();
    let sel = format!("file:{}", path.display());
    // phi = |x| + |y| + |z| for the simple cubic lattice
    let v = json_of(&wulffkit(&[
        "phi",
        "--lattice",
        &sel,
        "--nu",
        "1,2,-2",
        "--method",
        "cell",
    ]));
    assert!((v["value"].as_f64().unwrap() - 5.0).abs() < 1e-9);
}

#[test]
fn anneal_is_deterministic_and_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("best.cfg");
    let cfg_s = cfg.to_str().unwrap();
    let args = [
        "anneal", "--N", "40", "--seeds", "2", "--sweeps", "15", "--seed", "7",
    ];
    let a = wulffkit(&[&args[..], &["--save-config", cfg_s]].concat());
    let b = wulffkit(&args);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);

    let run = json_of(&a);
    let best = run["best"]["energy"].as_f64().unwrap();
    let e = json_of(&wulffkit(&[
        "energy",
        "--config",
        cfg_s,
        "--lattice",
        "fcc",
    ]));
    assert_eq!(e["N"], 40);
    assert_eq!(e["energy"].as_f64().unwrap(), best);
    let bonds = e["bonds"].as_f64().unwrap();
    assert_eq!(best, 12.0 * 40.0 - 2.0 * bonds);
}

#[test]
fn scaling_csv_has_one_row_per_run() {
    let out = wulffkit(&[
        "scaling",
        "--Ns",
        "20,30",
        "--seeds",
        "2",
        "--sweeps",
        "10",
        "--no-shape",
        "--out",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "N,seed,energy,excess,initial_energy,accepted,proposed,symdiff"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("20,0,"));
    assert!(lines[4].starts_with("30,1,"));
}

#[test]
fn voronoi_off_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cell.off");
    let v = json_of(&wulffkit(&[
        "voronoi",
        "--lattice",
        "fcc",
        "--export",
        "off",
        path.to_str().unwrap(),
    ]));
    assert_eq!(v["faces"].as_array().unwrap().len(), 12);
    assert!((v["volume"].as_f64().unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-12);

    let off = fs::read_to_string(&path).unwrap();
    let mut lines = off.lines();
    assert_eq!(lines.next(), Some("OFF"));
    assert_eq!(lines.next(), Some("14 12 0"));
    let faces: Vec<&str> = off.lines().skip(2 + 14).collect();
    assert_eq!(faces.len(), 12);
    assert!(faces.iter().all(|f| f.starts_with("4 ")));
}

#[test]
fn wulff_export_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("w.obj");
    let report = dir.path().join("w.json");
    let out = wulffkit(&[
        "wulff",
        "--export",
        "obj",
        mesh.to_str().unwrap(),
        "--report",
        "json",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let obj = fs::read_to_string(&mesh).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("v ")));
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["lattice"], "fcc");
    assert_eq!(v["volume"].as_f64().unwrap(), 256.0);
}

#[test]
fn sweep_csv_matches_closed_forms() {
    let out = wulffkit(&["phi", "sweep", "--grid", "icosphere:1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("nu_x,nu_y,nu_z,phi,phi_polar"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 42);
    for r in rows {
        // phi(nu) * phi_polar(nu) >= |nu|^2 = 1
        assert!(r[3] * r[4] >= 1.0 - 1e-12);
    }
}

#[test]
fn every_subcommand_help_lists_defaults() {
    for sub in ["phi", "voronoi", "wulff", "anneal", "scaling", "validate"] {
        let out = wulffkit(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("[default:"), "{sub}: {text}");
    }
}

#[test]
fn validate_passes_with_min_cut_at_t10() {
    let out = wulffkit(&["validate", "--T", "10", "--directions", "30"]);
    let v = json_of(&out);
    assert_eq!(v["passed"], true);
    for c in v["checks"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let dev = c["deviation"].as_f64().unwrap();
        if name.contains("min-cut") {
            assert!(dev < 0.25, "{name}: {dev}");
        } else if !name.contains("polar") {
            assert!(dev < 1e-9, "{name}: {dev}");
        }
    }
}
