//! Command-line front end: operator and scheme files, reports, plot data.
//!
//! Exit codes: 0 success, 2 input error, 3 planner or search failure,
//! 4 verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hermbasis::{build_lattice, canonical_phase, colinear, generalized_paulis, hermitian_basis, COLINEAR_TOL};
use crate::localrange::{local_samples, min_abs_local_with, ProductState, LOCAL_ZERO_TOL};
use crate::matrixcore::{total_dim, CMatrix, PartitionedOperator, StateVector};
use crate::numrange::range_boundary;
use crate::oracle::{grid_min_local, GridMinimum, GridSpec, MAX_GRID_PARAMS};
use crate::schemes::{
    plan_discrimination_with, verify_scheme, DiscriminationScheme, PlanOptions, VerificationReport, INPUT_UNITARY_TOL,
    SCHEME_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PLANNER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Operator on disk: party dims and a row-major matrix of [re, im] pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl OperatorFile {
    pub fn from_operator(a: &PartitionedOperator, name: Option<String>) -> Self {
        let m = a.matrix();
        let matrix = (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect();
        OperatorFile { dims: a.party_dims().to_vec(), matrix, name }
    }

    pub fn to_operator(&self) -> crate::Result<PartitionedOperator> {
        let n = total_dim(&self.dims)?;
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("matrix must be {n}x{n} for dims {:?}", self.dims)));
        }
        if self.matrix.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Argument("matrix has non-finite entries".into()));
        }
        let rows: Vec<Vec<C64>> = self.matrix.iter().map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect()).collect();
        PartitionedOperator::new(CMatrix::from_rows(&rows)?, self.dims.clone())
    }
}

#[derive(Debug, Parser)]
#[command(name = "locc-disc", version, about = "Perfect LOCC discrimination of multipartite unitaries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a pair of unitaries and report which planner branch applies.
    Analyze {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, env = "LOCC_DISC_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Plan a discrimination scheme and write it as JSON.
    Plan {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, env = "LOCC_DISC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SCHEME_TOL)]
        tol: f64,
        /// Deepest interleaved sequence to try.
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        /// See-saw multistarts.
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a scheme's output overlap against the two unitaries.
    Verify {
        scheme: PathBuf,
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, default_value_t = SCHEME_TOL)]
        tol: f64,
        /// Also run the brute-force referees.
        #[arg(long)]
        oracle: bool,
    },
    /// Emit numerical-range plot data as CSV (angle,re,im,kind).
    Range {
        file: PathBuf,
        #[arg(long, default_value_t = 360)]
        samples: usize,
        /// Sample random product states instead of the boundary.
        #[arg(long)]
        local: bool,
        #[arg(long, env = "LOCC_DISC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the Hermitian basis states and generalized Paulis for `--dims`.
    Basis {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
}

/// A failed command with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Exit code for a library error raised while planning.
fn planner_code(e: &Error) -> i32 {
    match e {
        Error::Shape(_)
        | Error::Argument(_)
        | Error::NotUnitary { .. }
        | Error::IdenticalUpToPhase
        | Error::Index { .. }
        | Error::SizeLimit { .. } => EXIT_INPUT,
        _ => EXIT_PLANNER,
    }
}

fn from_error(e: Error) -> Failure {
    Failure { code: planner_code(&e), message: e.to_string() }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::result::Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_operator(path: &Path) -> std::result::Result<PartitionedOperator, Failure> {
    let file: OperatorFile = read_json(path)?;
    file.to_operator().map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_unitary(path: &Path) -> std::result::Result<PartitionedOperator, Failure> {
    let u = load_operator(path)?;
    let defect = u.matrix().unitarity_defect();
    if defect > INPUT_UNITARY_TOL {
        return Err(Failure::input(format!(
            "{}: not unitary, ‖U†U − I‖_F = {defect:e} exceeds {INPUT_UNITARY_TOL:e}",
            path.display()
        )));
    }
    Ok(u)
}

fn load_pair(file1: &Path, file2: &Path) -> std::result::Result<(PartitionedOperator, PartitionedOperator), Failure> {
    let u1 = load_unitary(file1)?;
    let u2 = load_unitary(file2)?;
    if u1.party_dims() != u2.party_dims() {
        return Err(Failure::input(format!("party dims {:?} and {:?} differ", u1.party_dims(), u2.party_dims())));
    }
    Ok((u1, u2))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => writeln!(out, "{text}").map_err(|e| Failure::input(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

#[derive(Debug, Serialize)]
struct LatticeSummary {
    points: usize,
    min_modulus: f64,
    /// Common ray angle when every nonzero value lies on one ray.
    colinear_angle: Option<f64>,
    first_zero: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    verdict: String,
    party_dims: Vec<usize>,
    difference: f64,
    trace: C64,
    hermitian_up_to_phase: bool,
    phase: Option<f64>,
    local_min: f64,
    local_min_starts: usize,
    local_min_state: ProductState,
    lattice: Option<LatticeSummary>,
}

fn cmd_analyze(out: &mut dyn Write, file1: &Path, file2: &Path, seed: u64) -> CmdResult {
    let (u1, u2) = load_pair(file1, file2)?;
    let a = u1.with_matrix(&u1.matrix().adjoint() * u2.matrix()).map_err(from_error)?;
    let d = a.dim() as f64;
    let trace = a.matrix().trace();
    let difference = (a.matrix() - &CMatrix::identity(a.dim()).scale(trace / d)).frobenius_norm();
    if difference <= 1e-10 {
        return Err(from_error(Error::IdenticalUpToPhase));
    }
    let phase = canonical_phase(a.matrix()).map_err(from_error)?;
    let local = min_abs_local_with(&a, &PlanOptions::with_seed(seed).see_saw()).map_err(from_error)?;
    let lattice = match build_lattice(&a) {
        Ok(l) => Some(LatticeSummary {
            points: l.len(),
            min_modulus: l.values().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min),
            colinear_angle: colinear(l.values(), COLINEAR_TOL),
            first_zero: l.first_zero().map(|i| l.tuple(i)),
        }),
        Err(Error::SizeLimit { .. }) => None,
        Err(e) => return Err(from_error(e)),
    };
    let verdict = if trace.norm() <= 1e-10 {
        "trace-zero; single-run available"
    } else if local.modulus() <= LOCAL_ZERO_TOL {
        "zero in the local range; single-run available"
    } else if phase.is_some() && a.party_dims() == [2, 2] {
        "Hermitian up to phase; single-run on two qubits"
    } else if phase.is_some() {
        "Hermitian up to phase; sequential then parallel branch"
    } else {
        "non-Hermitian up to phase; parallel branch"
    };
    let report = AnalyzeReport {
        verdict: verdict.into(),
        party_dims: a.party_dims().to_vec(),
        difference,
        trace,
        hermitian_up_to_phase: phase.is_some(),
        phase: phase.map(|p| p.theta),
        local_min: local.modulus(),
        local_min_starts: local.starts,
        local_min_state: local.state,
        lattice,
    };
    emit(out, None, &to_json(&report))
}

fn cmd_plan(
    out: &mut dyn Write,
    err: &mut dyn Write,
    file1: &Path,
    file2: &Path,
    opts: &PlanOptions,
    dest: Option<&Path>,
) -> CmdResult {
    let (u1, u2) = load_pair(file1, file2)?;
    let scheme = plan_discrimination_with(&u1, &u2, opts).map_err(from_error)?;
    emit(out, dest, &to_json(&scheme))?;
    let _ = writeln!(err, "{} scheme, N = {}, residual {:e}", kind_name(&scheme), scheme.copies, scheme.residual);
    Ok(())
}

fn kind_name(s: &DiscriminationScheme) -> String {
    serde_json::to_value(s.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct GridCheck {
    minimum: GridMinimum,
    /// Residual of the scheme's own product state.
    scheme_value: f64,
    /// scheme_value ≥ minimum − lipschitz_bound.
    consistent: bool,
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    pass: bool,
    tol: f64,
    report: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleOutput>,
}

#[derive(Debug, Serialize)]
struct OracleOutput {
    dense_referee: &'static str,
    grid: Option<GridCheck>,
    grid_note: Option<String>,
}

fn grid_check(u1: &PartitionedOperator, u2: &PartitionedOperator, s: &DiscriminationScheme) -> (Option<GridCheck>, Option<String>) {
    let Some(state) = s.single_copy_state() else {
        return (None, Some("grid scan applies to single-run schemes".into()));
    };
    if !s.interleaved_locals.is_empty() {
        return (None, Some("grid scan applies to single-run schemes".into()));
    }
    let params: usize = u1.party_dims().iter().map(|&d| if d == 2 { 2 } else if d == 3 { 4 } else { usize::MAX / 8 }).sum();
    if params > MAX_GRID_PARAMS {
        return (None, Some(format!("party dims {:?} exceed the grid scan", u1.party_dims())));
    }
    let a = match u1.with_matrix(&u1.matrix().adjoint() * u2.matrix()) {
        Ok(a) => a,
        Err(e) => return (None, Some(e.to_string())),
    };
    match grid_min_local(&a, &GridSpec::finest(params)) {
        Ok(minimum) => {
            let scheme_value = crate::localrange::local_value(&a, &state).map(|z| z.norm()).unwrap_or(f64::NAN);
            let consistent = scheme_value >= minimum.value - minimum.lipschitz_bound;
            (Some(GridCheck { minimum, scheme_value, consistent }), None)
        }
        Err(e) => (None, Some(e.to_string())),
    }
}

fn cmd_verify(out: &mut dyn Write, scheme: &Path, file1: &Path, file2: &Path, tol: f64, oracle: bool) -> CmdResult {
    let s: DiscriminationScheme = read_json(scheme)?;
    let (u1, u2) = load_pair(file1, file2)?;
    let report = match verify_scheme(&u1, &u2, &s) {
        Ok(r) => r,
        Err(e @ Error::Validation(_)) => return Err(Failure { code: EXIT_VERIFY, message: e.to_string() }),
        Err(e) => return Err(from_error(e)),
    };
    let mut pass = report.passes(tol);
    let oracle = oracle.then(|| {
        let (grid, grid_note) = grid_check(&u1, &u2, &s);
        pass &= grid.as_ref().is_none_or(|g| g.consistent);
        let dense_referee = match report.disagreement {
            Some(_) => "ran",
            None => "skipped: dense space above 4096",
        };
        OracleOutput { dense_referee, grid, grid_note }
    });
    let output = VerifyOutput { pass, tol, report, oracle };
    emit(out, None, &to_json(&output))?;
    if pass {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY, message: format!("verification failed: residual {:e}", output.report.residual) })
    }
}

fn cmd_range(out: &mut dyn Write, file: &Path, samples: usize, local: bool, seed: u64, dest: Option<&Path>) -> CmdResult {
    let a = load_operator(file)?;
    if samples == 0 {
        return Err(Failure::input("--samples must be positive"));
    }
    let rows: Vec<(f64, C64, &str)> = if local {
        let values = local_samples(&a, samples, seed).map_err(from_error)?;
        values.into_iter().map(|(z, _)| (z.arg().rem_euclid(std::f64::consts::TAU), z, "local_sample")).collect()
    } else {
        let b = range_boundary(a.matrix(), samples).map_err(from_error)?;
        b.directions.iter().zip(&b.values).map(|(&phi, &z)| (phi, z, "boundary")).collect()
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::input(format!("csv: {e}"));
    w.write_record(["angle", "re", "im", "kind"]).map_err(io)?;
    for (angle, z, kind) in rows {
        w.write_record([angle.to_string(), z.re.to_string(), z.im.to_string(), kind.to_string()]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::input(format!("csv: {e}")))?;
    let text = String::from_utf8(bytes).expect("csv output is UTF-8");
    emit(out, dest, text.trim_end())
}

#[derive(Debug, Serialize)]
struct BasisEntry {
    index: Vec<usize>,
    state: StateVector,
}

#[derive(Debug, Serialize)]
struct PauliEntry {
    label: String,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize)]
struct BasisListing {
    dims: Vec<usize>,
    states: Vec<BasisEntry>,
    paulis: Vec<PauliEntry>,
}

fn cmd_basis(out: &mut dyn Write, dims: &[usize]) -> CmdResult {
    let bases: Vec<Vec<StateVector>> = dims.iter().map(|&d| hermitian_basis(d)).collect::<crate::Result<_>>().map_err(from_error)?;
    let shape: Vec<usize> = bases.iter().map(Vec::len).collect();
    let count: usize = shape.iter().product();
    if count > crate::hermbasis::LATTICE_CAP {
        return Err(from_error(Error::SizeLimit { requested: count, cap: crate::hermbasis::LATTICE_CAP }));
    }
    let states = (0..count)
        .map(|mut flat| {
            let mut index = vec![0; shape.len()];
            for k in (0..shape.len()).rev() {
                index[k] = flat % shape[k];
                flat /= shape[k];
            }
            let parts = index.iter().enumerate().map(|(k, &i)| bases[k][i].clone()).collect();
            let state = ProductState::new(parts).and_then(|p| p.to_dense()).map_err(from_error)?;
            Ok(BasisEntry { index, state })
        })
        .collect::<std::result::Result<Vec<_>, Failure>>()?;
    let paulis = generalized_paulis(dims).map_err(from_error)?;
    let labels = pauli_labels(dims);
    let paulis = paulis
        .iter()
        .zip(labels)
        .map(|(m, label)| PauliEntry {
            label,
            matrix: (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect(),
        })
        .collect();
    emit(out, None, &to_json(&BasisListing { dims: dims.to_vec(), states, paulis }))
}

/// "X^a Z^b" per party in the order `generalized_paulis` produces them.
fn pauli_labels(dims: &[usize]) -> Vec<String> {
    let mut labels = vec![String::new()];
    for &d in dims {
        let mut next = Vec::with_capacity(labels.len() * d * d);
        for prefix in &labels {
            for b in 0..d {
                for a in 0..d {
                    let sep = if prefix.is_empty() { "" } else { " ⊗ " };
                    next.push(format!("{prefix}{sep}X^{a} Z^{b}"));
                }
            }
        }
        labels = next;
    }
    labels
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Analyze { file1, file2, seed } => cmd_analyze(out, &file1, &file2, seed),
        Command::Plan { file1, file2, seed, tol, max_n, starts, out: dest } => {
            if !(tol > 0.0) || max_n < 2 || starts == 0 {
                return Err(Failure::input("--tol must be positive, --max-n at least 2 and --starts positive"));
            }
            let opts = PlanOptions { seed, tol, n_max: max_n, starts, ..PlanOptions::default() };
            cmd_plan(out, err, &file1, &file2, &opts, dest.as_deref())
        }
        Command::Verify { scheme, file1, file2, tol, oracle } => cmd_verify(out, &scheme, &file1, &file2, tol, oracle),
        Command::Range { file, samples, local, seed, out: dest } => cmd_range(out, &file, samples, local, seed, dest.as_deref()),
        Command::Basis { dims } => cmd_basis(out, &dims),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
