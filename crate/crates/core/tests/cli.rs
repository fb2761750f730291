//! End-to-end runs of the command-line front end through `cli::run`.

use std::path::{Path, PathBuf};

use locc_disc::cli::{run, OperatorFile, EXIT_INPUT, EXIT_OK, EXIT_VERIFY};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn exec(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("locc-disc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write_op(dir: &TempDir, name: &str, dims: &[usize], diag: &[[f64; 2]]) -> PathBuf {
    let n = diag.len();
    let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { diag[i] } else { [0.0, 0.0] }).collect()).collect();
    write_file(dir, name, &OperatorFile { dims: dims.to_vec(), matrix, name: None })
}

fn write_file(dir: &TempDir, name: &str, file: &OperatorFile) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(file).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const ONE: [f64; 2] = [1.0, 0.0];
const I: [f64; 2] = [0.0, 1.0];
const MINUS: [f64; 2] = [-1.0, 0.0];

/// I, σz ⊗ I and diag(1, i, i, −1) on two qubits.
fn fixtures() -> (TempDir, PathBuf, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let id = write_op(&dir, "id.json", &[2, 2], &[ONE; 4]);
    let z = write_op(&dir, "z.json", &[2, 2], &[ONE, ONE, MINUS, MINUS]);
    let worked = write_op(&dir, "worked.json", &[2, 2], &[ONE, I, I, MINUS]);
    (dir, id, z, worked)
}

/// I − 2|Φ⟩⟨Φ| with Φ maximally entangled on two qutrits.
fn qutrit_reflection(dir: &TempDir) -> PathBuf {
    let matrix = (0..9)
        .map(|r| {
            (0..9)
                .map(|c| {
                    let phi = if r % 4 == 0 && c % 4 == 0 { 2.0 / 3.0 } else { 0.0 };
                    [if r == c { 1.0 - phi } else { -phi }, 0.0]
                })
                .collect()
        })
        .collect();
    write_file(dir, "reflect.json", &OperatorFile { dims: vec![3, 3], matrix, name: None })
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn analyze_reports_the_branch() {
    let (_dir, id, z, worked) = fixtures();
    let r = exec(&["analyze", s(&id), s(&z)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(json(&r.out)["verdict"], "trace-zero; single-run available");

    let r = exec(&["analyze", s(&id), s(&worked)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v = json(&r.out);
    assert_eq!(v["verdict"], "non-Hermitian up to phase; parallel branch");
    assert!((v["local_min"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn analyze_rejects_a_pair_equal_up_to_phase() {
    let dir = TempDir::new().unwrap();
    let id = write_op(&dir, "id.json", &[2, 2], &[ONE; 4]);
    let ph = write_op(&dir, "ph.json", &[2, 2], &[I; 4]);
    let r = exec(&["analyze", s(&id), s(&ph)]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("identical up to a global phase"), "{}", r.err);
}

#[test]
fn malformed_inputs_exit_with_the_input_code() {
    let dir = TempDir::new().unwrap();
    let id = write_op(&dir, "id.json", &[2, 2], &[ONE; 4]);
    let bad = write_op(&dir, "bad.json", &[2, 2], &[ONE, ONE, ONE, [2.0, 0.0]]);
    assert_eq!(exec(&["plan", s(&id), s(&bad)]).code, EXIT_INPUT);
    let qubit = write_op(&dir, "q.json", &[4], &[ONE; 4]);
    assert_eq!(exec(&["plan", s(&id), s(&qubit)]).code, EXIT_INPUT);
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"dims\": [2], \"matrix\": [], \"extra\": 1}").unwrap();
    assert_eq!(exec(&["analyze", s(&id), s(&junk)]).code, EXIT_INPUT);
    assert_eq!(exec(&["analyze", s(&id), "/nonexistent/op.json"]).code, EXIT_INPUT);
    assert_eq!(exec(&["frobnicate"]).code, EXIT_INPUT);
}

#[test]
fn plan_picks_the_expected_scheme() {
    let (dir, id, z, worked) = fixtures();
    let r = exec(&["plan", s(&id), s(&worked)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v = json(&r.out);
    assert_eq!(v["kind"], "parallel");
    assert_eq!(v["N"], 2);
    assert!(r.err.contains("parallel scheme, N = 2"), "{}", r.err);

    let r = exec(&["plan", s(&id), s(&z)]);
    assert_eq!(json(&r.out)["kind"], "single_run");

    let reflect = qutrit_reflection(&dir);
    let id3 = write_op(&dir, "id3.json", &[3, 3], &[ONE; 9]);
    let r = exec(&["plan", s(&id3), s(&reflect)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v = json(&r.out);
    assert_eq!(v["kind"], "sequential_parallel");
    assert!(v["residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn verify_round_trips_a_planned_scheme() {
    let (dir, id, _z, worked) = fixtures();
    let scheme = dir.path().join("scheme.json");
    let r = exec(&["plan", s(&id), s(&worked), "--out", s(&scheme)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.is_empty());
    let planned = json(&std::fs::read_to_string(&scheme).unwrap());

    let r = exec(&["verify", s(&scheme), s(&id), s(&worked)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v = json(&r.out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["report"]["residual"], planned["residual"]);
}

#[test]
fn verify_rejects_a_scheme_for_other_unitaries() {
    let (dir, id, z, worked) = fixtures();
    let scheme = dir.path().join("scheme.json");
    assert_eq!(exec(&["plan", s(&id), s(&z), "--out", s(&scheme)]).code, EXIT_OK);
    // A σz ⊗ I scheme says nothing useful about the worked pair.
    let r = exec(&["verify", s(&scheme), s(&id), s(&worked)]);
    assert_eq!(r.code, EXIT_VERIFY, "{}", r.out);
    assert_eq!(json(&r.out)["pass"], false);
}

#[test]
fn verify_rejects_a_tampered_scheme() {
    let (dir, id, _z, worked) = fixtures();
    let scheme = dir.path().join("scheme.json");
    assert_eq!(exec(&["plan", s(&id), s(&worked), "--out", s(&scheme)]).code, EXIT_OK);
    let mut v = json(&std::fs::read_to_string(&scheme).unwrap());
    v["N"] = 7.into();
    std::fs::write(&scheme, v.to_string()).unwrap();
    assert_eq!(exec(&["verify", s(&scheme), s(&id), s(&worked)]).code, EXIT_VERIFY);
}

#[test]
fn verify_with_the_grid_oracle() {
    let (dir, id, z, _worked) = fixtures();
    let scheme = dir.path().join("scheme.json");
    assert_eq!(exec(&["plan", s(&id), s(&z), "--out", s(&scheme)]).code, EXIT_OK);
    let r = exec(&["verify", s(&scheme), s(&id), s(&z), "--oracle"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v = json(&r.out);
    assert_eq!(v["oracle"]["grid"]["consistent"], true);
    assert_eq!(v["oracle"]["dense_referee"], "ran");
}

fn csv_points(text: &str) -> Vec<(f64, f64, String)> {
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    rows.records()
        .map(|r| {
            let r = r.unwrap();
            (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].to_string())
        })
        .collect()
}

#[test]
fn range_writes_boundary_and_local_samples() {
    let dir = TempDir::new().unwrap();
    let z1 = write_op(&dir, "z1.json", &[2], &[ONE, MINUS]);
    let r = exec(&["range", s(&z1), "--samples", "4"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.starts_with("angle,re,im,kind"));
    let pts = csv_points(&r.out);
    assert!(pts.len() >= 4);
    assert!(pts.iter().all(|(re, im, kind)| (re.abs() - 1.0).abs() < 1e-12 && im.abs() < 1e-12 && kind == "boundary"));

    let worked = write_op(&dir, "worked.json", &[2, 2], &[ONE, I, I, MINUS]);
    let out = dir.path().join("local.csv");
    let r = exec(&["range", s(&worked), "--local", "--samples", "200", "--out", s(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let pts = csv_points(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(pts.len(), 200);
    assert!(pts.iter().all(|(re, im, kind)| re.hypot(*im) >= 0.49 && kind == "local_sample"));

    let id = write_op(&dir, "id.json", &[2], &[ONE, ONE]);
    let pts = csv_points(&exec(&["range", s(&id), "--samples", "8"]).out);
    assert!(pts.iter().all(|(re, im, _)| (re - 1.0).abs() < 1e-12 && im.abs() < 1e-12));
    assert_eq!(exec(&["range", s(&id), "--samples", "0"]).code, EXIT_INPUT);
}

#[test]
fn basis_lists_states_and_paulis() {
    let r = exec(&["basis", "--dims", "2"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v = json(&r.out);
    assert_eq!(v["states"].as_array().unwrap().len(), 4);
    assert_eq!(v["paulis"].as_array().unwrap().len(), 4);

    let v = json(&exec(&["basis", "--dims", "2,2"]).out);
    assert_eq!(v["states"].as_array().unwrap().len(), 16);
    assert_eq!(v["paulis"].as_array().unwrap().len(), 16);
    assert_eq!(v["paulis"][0]["label"], "X^0 Z^0 ⊗ X^0 Z^0");
    assert_eq!(v["paulis"][1]["label"], "X^0 Z^0 ⊗ X^1 Z^0");

    assert_eq!(exec(&["basis", "--dims", "0"]).code, EXIT_INPUT);
}

#[test]
fn seeded_runs_are_reproducible() {
    let (_dir, id, _z, worked) = fixtures();
    let a = exec(&["plan", s(&id), s(&worked), "--seed", "11"]);
    let b = exec(&["plan", s(&id), s(&worked), "--seed", "11"]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.out, b.out);
    let a = exec(&["range", s(&worked), "--local", "--samples", "30", "--seed", "5"]);
    let b = exec(&["range", s(&worked), "--local", "--samples", "30", "--seed", "5"]);
    assert_eq!(a.out, b.out);
}

#[test]
fn help_goes_to_stdout() {
    let r = exec(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("plan"));
}
