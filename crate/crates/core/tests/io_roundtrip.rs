use std::path::Path;

use nppac::diagnostics::{self, DiagRecord};
use nppac::io::{config, csv, pgm, vtk};
use nppac::{Field, Mesh, Params, Stepper};

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn vtk_matches_golden_file() {
    let mesh = Mesh::build_rectangle(1.0, 1.0, 2, 2).unwrap();
    let u = Field::from_fn(&mesh, |x, _| x);
    let c = Field::from_fn(&mesh, |_, y| 1.0 - y);
    let phi = Field::from_fn(&mesh, |x, _| -0.5 + 0.25 * x);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.vtk");
    vtk::write_vtk(&path, &mesh, 0.5, &u, &c, &phi).unwrap();
    let written = std::fs::read(&path).unwrap();
    let golden = std::fs::read(fixture("state_2x2.vtk")).unwrap();
    assert_eq!(String::from_utf8(written).unwrap(), String::from_utf8(golden).unwrap());
}

#[test]
fn vtk_node_count_parses_back() {
    let p = Params {
        nx: 7,
        ny: 5,
        ..Params::default()
    };
    let stepper = Stepper::new(p).unwrap();
    let s = stepper.initial_state().unwrap();
    let phi = stepper.full_potential(&s.phi_bar).unwrap();
    let text = vtk::vtk_string(stepper.mesh(), "x", &[("u", &s.u), ("c", &s.c), ("phi", &phi)]).unwrap();
    let points: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("POINTS "))
        .and_then(|r| r.split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(points, stepper.mesh().num_nodes());
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.iter().position(|l| *l == "SCALARS phi double 1").unwrap() + 2;
    let parsed: Vec<f64> = lines[start..start + points].iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(parsed, phi.to_vec());
}

fn short_run(steps: usize) -> Vec<DiagRecord> {
    let p = Params {
        nx: 12,
        ny: 12,
        ..Params::default()
    };
    let stepper = Stepper::new(p).unwrap();
    let init = stepper.initial_state().unwrap();
    diagnostics::run_recorded(&stepper, init, steps, |_, _| Ok(())).unwrap().1
}

#[test]
fn csv_of_k_steps_has_k_plus_one_rows_and_round_trips() {
    let records = short_run(6);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    csv::write_csv(&path, &records).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 7);
    assert!(text.starts_with("t,k,energy,"));
    assert_eq!(csv::read_csv(&path).unwrap(), records);
}

#[test]
fn config_file_round_trip() {
    let text = "# pilot settings\nnx = 40\nny = 20\ndelta = 0.02\nmu = 0.5 # weaker coupling\n\
                snapshot_times = 0.061, 0.122\nforcing_sign = plus\nhalf_domain = true\n";
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.cfg");
    std::fs::write(&path, text).unwrap();
    let p = config::load_config(&path).unwrap();
    assert_eq!(p.nx, 40);
    assert_eq!(p.aniso.delta, 0.02);
    assert_eq!(p.material.mu, 0.5);
    assert_eq!(p.snapshot_times, vec![0.061, 0.122]);
    let again = config::parse_config(&config::serialize_config(&p)).unwrap();
    assert_eq!(again, p);
    assert_eq!(config::serialize_config(&again), config::serialize_config(&p));
}

#[test]
fn config_errors_name_key_and_line() {
    let err = config::parse_config("nx = 8\n\ndelta = banana\n").unwrap_err().to_string();
    assert!(err.contains("line 3") && err.contains("delta"), "{err}");
    let err = config::parse_config("detla = 0.1\n").unwrap_err().to_string();
    assert!(err.contains("detla"), "{err}");
    let err = config::parse_config("nx 8\n").unwrap_err().to_string();
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn pgm_ramp_file() {
    let mesh = Mesh::build_rectangle(1.0, 1.0, 4, 4).unwrap();
    let x = Field::from_fn(&mesh, |x, _| x);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.pgm");
    pgm::write_pgm(&path, &mesh, &x, (0.0, 1.0)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("5 5"));
    assert_eq!(lines.next(), Some("255"));
    for row in lines {
        assert_eq!(row, "0 64 128 191 255");
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let default = config::load_config(&dir.join("default.cfg")).unwrap();
    assert_eq!(default, Params::default());
    for name in ["isotropic.cfg", "quick.cfg"] {
        config::load_config(&dir.join(name)).unwrap();
    }
}
