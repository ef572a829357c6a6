//! Command-line front end: model ingestion, dispatch and CSV/JSON/SVG output.
//!
//! Exit codes: 0 on success, 1 on a domain error (a JSON object with `code`,
//! `message` and `field` is written to standard error), 2 on a usage error.

pub mod heatmap;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use effham_core::ddfs::{ddfs_check, ddfs_check_generalized};
use effham_core::generalized::{
    generalized_damping_basis, propagate_blocks_trajectory, GeneralizedLindbladModel,
};
use effham_core::geometric::{
    default_initial_invariant, geometric_phase_adiabatic, geometric_phase_cyclic,
    geometric_phase_noncyclic, propagate_invariant, PhaseResult,
};
use effham_core::io::{
    matrix_to_json, read_json, square_from_json, write_json, GeneralizedModelFile, GeneratorFile,
    MatrixJson, ModelFile,
};
use effham_core::lindblad::{
    damping_basis, propagate_trajectory, steady_states, vectorize, LindbladModel,
};
use effham_core::numerics::{CMatrix, C64};
use effham_core::scan::{fmt_f64, scan_with_jobs, ScanConfig};
use effham_core::two_band::{build_model, TwoBandParams};
use effham_core::Error;
use heatmap::{render_heatmap, HeatmapStyle, Quantity};
use serde::Serialize;
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(
    name = "effham",
    version,
    about = "Effective-Hamiltonian solver for Lindblad master equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Propagate a density matrix (or generalized components) and write a CSV trajectory.
    Solve(SolveArgs),
    /// Write the steady states of a model as JSON.
    Steady(ModelOut),
    /// Write eigenvalues and right/left eigenoperators as JSON.
    DampingBasis(ModelOut),
    /// Check whether a set of states spans a decoherence-free subspace.
    DdfsCheck(DdfsArgs),
    /// Geometric phases along the eigen-tracks of a dynamical invariant.
    GeomPhase(GeomArgs),
    /// Adiabaticity scan of the two-band model over (gamma1(T), dgamma1(T)).
    Scan(ScanArgs),
    /// Propagate the two-band model from a diagonal initial state.
    TwoBand(TwoBandArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    /// Density matrix, or a list of component matrices for a generalized model.
    #[arg(long)]
    initial: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long)]
    t1: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ModelOut {
    #[arg(long)]
    model: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DdfsArgs {
    #[arg(long)]
    model: PathBuf,
    /// JSON list of N x N matrices spanning the candidate subspace.
    #[arg(long)]
    basis: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PhaseMode {
    Cyclic,
    Noncyclic,
    Adiabatic,
}

#[derive(Args, Debug)]
struct GeomArgs {
    #[arg(long)]
    generator: PathBuf,
    /// Initial invariant; defaults to the generator at the first time.
    #[arg(long)]
    invariant: Option<PathBuf>,
    /// Single track index; all non-degenerate tracks when omitted.
    #[arg(long)]
    track: Option<usize>,
    #[arg(long, value_enum, default_value_t = PhaseMode::Cyclic)]
    mode: PhaseMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Heatmap of Gamma.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Heatmap of 1 - F.
    #[arg(long)]
    svg_fidelity: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
}

#[derive(Args, Debug)]
struct TwoBandArgs {
    #[arg(long)]
    gamma1: f64,
    #[arg(long)]
    gamma2: f64,
    /// Weight p of the initial state: rho1(0) = p|e><e|, rho2(0) = (1 - p)|g><g|.
    #[arg(long, default_value_t = 1.0)]
    initial_upper: f64,
    #[arg(long)]
    t1: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Structured domain error written to standard error.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub field: Option<String>,
}

impl CliError {
    fn new(code: &str, message: impl Into<String>, field: Option<&str>) -> Self {
        CliError {
            code: code.into(),
            message: message.into(),
            field: field.map(str::to_owned),
        }
    }

    fn invalid(field: &str, message: impl Into<String>) -> Self {
        CliError::new("invalid_argument", message, Some(field))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(e.code(), e.to_string(), e.field())
    }
}

/// Errors tied to one input file: JSON and IO failures name the flag.
fn at(flag: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| {
        let mut c = CliError::from(e);
        if c.field.is_none() {
            c.field = Some(flag.to_owned());
        }
        c
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e).expect("serializable error"));
            1
        }
    }
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Solve(a) => solve(a),
        Command::Steady(a) => steady(a),
        Command::DampingBasis(a) => damping(a),
        Command::DdfsCheck(a) => ddfs(a),
        Command::GeomPhase(a) => geom_phase(a),
        Command::Scan(a) => scan(a),
        Command::TwoBand(a) => two_band(a),
    }
}

enum AnyModel {
    Markovian(LindbladModel),
    Generalized(GeneralizedLindbladModel),
}

/// A file with a `components` key is a generalized model.
fn load_model(path: &Path) -> CliResult<AnyModel> {
    let v: Value = read_json(path).map_err(at("model"))?;
    let generalized = v.get("components").is_some();
    let parse = |e: serde_json::Error| CliError::new("invalid_model", e.to_string(), Some("model"));
    if generalized {
        let f: GeneralizedModelFile = serde_json::from_value(v).map_err(parse)?;
        Ok(AnyModel::Generalized(f.to_model()?))
    } else {
        let f: ModelFile = serde_json::from_value(v).map_err(parse)?;
        Ok(AnyModel::Markovian(f.to_model()?))
    }
}

/// A single matrix, or a list of matrices.
fn load_matrices(path: &Path, flag: &str) -> CliResult<Vec<CMatrix>> {
    let v: Value = read_json(path).map_err(at(flag))?;
    let bad = |e: serde_json::Error| CliError::new("invalid_state", e.to_string(), Some(flag));
    let is_single = v
        .get(0)
        .and_then(|r| r.get(0))
        .and_then(|z| z.get(0))
        .is_some_and(Value::is_number);
    if is_single {
        let m: MatrixJson = serde_json::from_value(v).map_err(bad)?;
        Ok(vec![square_from_json(&m, flag)?])
    } else {
        let ms: Vec<MatrixJson> = serde_json::from_value(v).map_err(bad)?;
        ms.iter()
            .enumerate()
            .map(|(k, m)| Ok(square_from_json(m, &format!("{flag}[{k}]"))?))
            .collect()
    }
}

fn write_text(path: &Path, text: &str, flag: &str) -> CliResult {
    fs::write(path, text).map_err(|e| at(flag)(Error::from(e)))
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult {
    match out {
        Some(p) => write_json(p, value).map_err(at("out")),
        None => {
            println!(
                "{}",
                serde_json::to_string_pretty(value).expect("serializable output")
            );
            Ok(())
        }
    }
}

fn check_finite(field: &str, x: f64) -> CliResult {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(field, format!("must be finite, got {x}")))
    }
}

fn entry_header(h: &mut String, prefix: &str, n: usize) {
    for m in 0..n {
        for k in 0..n {
            let _ = write!(h, ",re_{prefix}{m}_{k},im_{prefix}{m}_{k}");
        }
    }
}

fn entry_row(line: &mut String, rho: &CMatrix) {
    for z in rho.data() {
        let _ = write!(line, ",{},{}", fmt_f64(z.re), fmt_f64(z.im));
    }
}

fn solve(a: SolveArgs) -> CliResult {
    check_finite("t0", a.t0)?;
    check_finite("t1", a.t1)?;
    if a.t1 < a.t0 {
        return Err(CliError::invalid("t1", "must not be smaller than t0"));
    }
    let model = load_model(&a.model)?;
    let rhos = load_matrices(&a.initial, "initial")?;
    let steps = a.steps as usize;
    let dt = a.t1 - a.t0;
    let traj: Vec<(f64, Vec<CMatrix>)> = match &model {
        AnyModel::Markovian(m) => {
            if rhos.len() != 1 {
                return Err(CliError::invalid(
                    "initial",
                    "expected a single density matrix",
                ));
            }
            propagate_trajectory(m, &rhos[0], dt, steps)
                .map_err(at("initial"))?
                .into_iter()
                .map(|(t, r)| (t, vec![r]))
                .collect()
        }
        AnyModel::Generalized(m) => {
            propagate_blocks_trajectory(m, &rhos, dt, steps).map_err(at("initial"))?
        }
    };
    let n = rhos[0].rows();
    let mut csv = String::from("t");
    if rhos.len() == 1 {
        entry_header(&mut csv, "", n);
    } else {
        for k in 0..rhos.len() {
            entry_header(&mut csv, &format!("{k}_"), n);
        }
    }
    csv.push('\n');
    for (t, comps) in &traj {
        csv.push_str(&fmt_f64(a.t0 + t));
        for c in comps {
            entry_row(&mut csv, c);
        }
        csv.push('\n');
    }
    write_text(&a.out, &csv, "out")
}

#[derive(Serialize)]
struct SteadyRecord {
    /// One matrix for Markovian models, one per component otherwise.
    components: Vec<MatrixJson>,
    traceless: bool,
}

const ZERO_TOL: f64 = 1e-9;

fn steady(a: ModelOut) -> CliResult {
    let records: Vec<SteadyRecord> = match load_model(&a.model)? {
        AnyModel::Markovian(m) => steady_states(&m)
            .into_iter()
            .map(|s| SteadyRecord {
                components: vec![matrix_to_json(&s.rho)],
                traceless: s.traceless,
            })
            .collect(),
        AnyModel::Generalized(m) => {
            let db = generalized_damping_basis(&m)?;
            (0..db.len())
                .filter(|&i| db.eigenvalues[i].norm() <= ZERO_TOL)
                .map(|i| {
                    let comps = &db.right_ops[i];
                    let tr: C64 = comps.iter().map(CMatrix::trace).sum();
                    let traceless = tr.norm() <= ZERO_TOL;
                    let s = if traceless {
                        C64::new(1.0, 0.0)
                    } else {
                        tr.inv()
                    };
                    SteadyRecord {
                        components: comps.iter().map(|c| matrix_to_json(&c.scale(s))).collect(),
                        traceless,
                    }
                })
                .collect()
        }
    };
    emit(a.out.as_deref(), &records)
}

#[derive(Serialize)]
struct DampingRecord {
    eigenvalue: [f64; 2],
    cluster: usize,
    /// Right eigenoperators `A`, one per component.
    right: Vec<MatrixJson>,
    /// Dual operators `B` with `sum_k Tr(A_k B_k) = delta`.
    left: Vec<MatrixJson>,
}

fn cluster_index(clusters: &[std::ops::Range<usize>], i: usize) -> usize {
    clusters.iter().position(|c| c.contains(&i)).unwrap_or(0)
}

fn damping(a: ModelOut) -> CliResult {
    let js = |ms: &[CMatrix]| ms.iter().map(matrix_to_json).collect::<Vec<_>>();
    let records: Vec<DampingRecord> = match load_model(&a.model)? {
        AnyModel::Markovian(m) => {
            let db = damping_basis(&m)?;
            (0..db.eigenvalues.len())
                .map(|i| DampingRecord {
                    eigenvalue: [db.eigenvalues[i].re, db.eigenvalues[i].im],
                    cluster: cluster_index(&db.clusters, i),
                    right: js(std::slice::from_ref(&db.right_ops[i])),
                    left: js(std::slice::from_ref(&db.left_ops[i])),
                })
                .collect()
        }
        AnyModel::Generalized(m) => {
            let db = generalized_damping_basis(&m)?;
            (0..db.len())
                .map(|i| DampingRecord {
                    eigenvalue: [db.eigenvalues[i].re, db.eigenvalues[i].im],
                    cluster: cluster_index(&db.clusters, i),
                    right: js(&db.right_ops[i]),
                    left: js(&db.left_ops[i]),
                })
                .collect()
        }
    };
    emit(a.out.as_deref(), &records)
}

fn ddfs(a: DdfsArgs) -> CliResult {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(CliError::invalid("tol", "must be positive"));
    }
    let model = load_model(&a.model)?;
    let basis = load_matrices(&a.basis, "basis")?
        .iter()
        .map(vectorize)
        .collect::<Result<Vec<_>, _>>()
        .map_err(at("basis"))?;
    let report = match &model {
        AnyModel::Markovian(m) => ddfs_check(m, &basis, a.tol),
        AnyModel::Generalized(m) => ddfs_check_generalized(m, &basis, a.tol),
    }
    .map_err(at("basis"))?;
    emit(a.out.as_deref(), &report)
}

#[derive(Serialize)]
struct PhaseRecord {
    track: usize,
    geometric: f64,
    geometric_im: f64,
    dynamical_re: f64,
    dynamical_im: f64,
    noncyclic: f64,
}

impl From<PhaseResult> for PhaseRecord {
    fn from(p: PhaseResult) -> Self {
        PhaseRecord {
            track: p.track_index,
            geometric: p.geometric.re,
            geometric_im: p.geometric.im,
            dynamical_re: p.dynamical.re,
            dynamical_im: p.dynamical.im,
            noncyclic: p.noncyclic_correction,
        }
    }
}

fn geom_phase(a: GeomArgs) -> CliResult {
    let file: GeneratorFile = read_json(&a.generator).map_err(at("generator"))?;
    let gen = file.to_trajectory().map_err(at("generator"))?;
    let n = gen.dim();
    let phase: Box<dyn Fn(usize) -> effham_core::Result<PhaseResult>> = match a.mode {
        PhaseMode::Adiabatic => Box::new(|j| geometric_phase_adiabatic(&gen, j)),
        mode => {
            let i0 = match &a.invariant {
                Some(p) => {
                    let m = load_matrices(p, "invariant")?;
                    if m.len() != 1 || m[0].rows() != n {
                        return Err(CliError::invalid(
                            "invariant",
                            format!("expected one {n} x {n} matrix"),
                        ));
                    }
                    m.into_iter().next().expect("one matrix")
                }
                None => default_initial_invariant(&gen),
            };
            let traj = propagate_invariant(&gen, &i0)?;
            match mode {
                PhaseMode::Noncyclic => Box::new(move |j| geometric_phase_noncyclic(&traj, j)),
                _ => Box::new(move |j| geometric_phase_cyclic(&traj, j)),
            }
        }
    };
    let records: Vec<PhaseRecord> = match a.track {
        Some(j) => vec![phase(j).map_err(at("track"))?.into()],
        None => {
            let mut out = Vec::new();
            for j in 0..n {
                match phase(j) {
                    Ok(p) => out.push(p.into()),
                    Err(Error::DegenerateTrack(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            out
        }
    };
    emit(a.out.as_deref(), &records)
}

fn scan(a: ScanArgs) -> CliResult {
    let cfg: ScanConfig = read_json(&a.config).map_err(at("config"))?;
    let grid = scan_with_jobs(&cfg, a.jobs as usize).map_err(at("config"))?;
    write_text(&a.out, &grid.to_csv(), "out")?;
    let style = HeatmapStyle::default();
    if let Some(p) = &a.svg {
        write_text(p, &render_heatmap(&grid, Quantity::Gamma, &style)?, "svg")?;
    }
    if let Some(p) = &a.svg_fidelity {
        write_text(
            p,
            &render_heatmap(&grid, Quantity::OneMinusF, &style)?,
            "svg-fidelity",
        )?;
    }
    for e in &grid.errors {
        eprintln!(
            "{}",
            serde_json::to_string(e).expect("serializable cell error")
        );
    }
    Ok(())
}

fn two_band(a: TwoBandArgs) -> CliResult {
    check_finite("t1", a.t1)?;
    if a.t1 < 0.0 {
        return Err(CliError::invalid("t1", "must be non-negative"));
    }
    if !(0.0..=1.0).contains(&a.initial_upper) {
        return Err(CliError::invalid("initial-upper", "must lie in [0, 1]"));
    }
    let p = TwoBandParams::new(a.gamma1, a.gamma2)?;
    let p_up = a.initial_upper;
    let rho1 = CMatrix::diag(&[C64::new(p_up, 0.0), C64::new(0.0, 0.0)]);
    let rho2 = CMatrix::diag(&[C64::new(0.0, 0.0), C64::new(1.0 - p_up, 0.0)]);
    let traj = propagate_blocks_trajectory(&build_model(p), &[rho1, rho2], a.t1, a.steps as usize)?;
    let mut csv = String::from(
        "t,rho1_ee,rho1_gg,rho2_ee,rho2_gg,re_rho1_eg,im_rho1_eg,re_rho2_eg,im_rho2_eg\n",
    );
    for (t, c) in &traj {
        let cols = [
            *t,
            c[0][(0, 0)].re,
            c[0][(1, 1)].re,
            c[1][(0, 0)].re,
            c[1][(1, 1)].re,
            c[0][(0, 1)].re,
            c[0][(0, 1)].im,
            c[1][(0, 1)].re,
            c[1][(0, 1)].im,
        ];
        let line: Vec<String> = cols.iter().map(|&x| fmt_f64(x)).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    write_text(&a.out, &csv, "out")
}
