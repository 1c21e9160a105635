//! `corrlab` command-line front end.
//!
//! Exit codes: 0 success, 2 validation failure, 3 non-convergence under
//! `--strict`, 64 usage error, 66 unreadable input, 73 unwritable output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use corrlab::certificate::{certificate_with_tol, CERT_TOL};
use corrlab::fit::retraction::RetractionRegistry;
use corrlab::fit::{
    fit, residual_sweep, FitProblem, SweepOptions, DEFAULT_GRAD_TOL, DEFAULT_MAX_ITER, DEFAULT_RESTARTS,
};
use corrlab::gram::{gram_of, GRAM_TOL};
use corrlab::io::{GramFile, OperatorFile};
use corrlab::pipeline::{pipeline_check, PipelineOptions};
use corrlab::witness::{build_witness_tuple, limit_gram, WitnessSpec};
use corrlab::{compute_gram, Error, GramMatrix, TracialAlgebra};

const THREADS_VAR: &str = "CORRLAB_THREADS";

#[derive(Debug)]
enum Failure {
    Validation(String),
    NotConverged(String),
    Usage(String),
    Input(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::NotConverged(_) => 3,
            Failure::Usage(_) => 64,
            Failure::Input(_) => 66,
            Failure::Output(_) => 73,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m)
            | Failure::NotConverged(m)
            | Failure::Usage(m)
            | Failure::Input(m)
            | Failure::Output(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            Error::Format(_) | Error::Json(_) => Failure::Input(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "corrlab",
    version,
    about = "Correlation matrices of unitary tuples in finite-dimensional tracial algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the eight-unitary witness tuple at a finite dimension.
    Witness(WitnessArgs),
    /// Gram matrix of an operator file.
    Gram(GramArgs),
    /// Certificate values of a Gram matrix at a phase κ.
    Certify(CertifyArgs),
    /// Fit a unitary tuple in a fixed algebra to a target Gram matrix.
    Fit(FitArgs),
    /// Best residual per single-block dimension, warm-started.
    Sweep(SweepArgs),
    /// Exact limit Gram matrix of the witness family.
    Limit(LimitArgs),
    /// Check Gram matrix invariants or operator unitarity.
    Validate(ValidateArgs),
    /// End-to-end witness sweep with certificates and determinant checks.
    Check(CheckArgs),
}

#[derive(Args, Debug, Serialize)]
struct WitnessArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the limit Gram matrix here.
    #[arg(long)]
    limit: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GramArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[arg(long)]
    gram: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, default_value_t = CERT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[arg(long)]
    gram: PathBuf,
    #[arg(long, conflicts_with = "blocks", required_unless_present = "blocks")]
    dim: Option<usize>,
    /// Block dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
    /// Block weights; defaults to d_k / Σ d.
    #[arg(long, value_delimiter = ',', requires = "blocks")]
    weights: Option<Vec<f64>>,
    /// Must match the target size when given.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_GRAD_TOL)]
    grad_tol: f64,
    #[arg(long, default_value = "polar")]
    retraction: String,
    /// Phase for the certificate of the result; defaults to the target's meta kappa.
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Exit 3 when the best restart did not converge.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    gram: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_GRAD_TOL)]
    grad_tol: f64,
    #[arg(long, default_value = "polar")]
    retraction: String,
    /// Phase for the c1..c4 columns; defaults to the target's meta kappa, else 0.
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct LimitArgs {
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    #[arg(long, conflicts_with = "ops", required_unless_present = "ops")]
    gram: Option<PathBuf>,
    #[arg(long)]
    ops: Option<PathBuf>,
    /// Defaults to 1e-8 for Gram matrices and 1e-8·d for operators.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CheckArgs {
    #[arg(long, allow_negative_numbers = true, default_value_t = std::f64::consts::SQRT_2 - 1.0)]
    kappa: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256, 512])]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long)]
    csv: PathBuf,
}

fn meta(command: &str, config: &impl Serialize, extra: Value) -> Value {
    let mut m = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    if let (Value::Object(m), Value::Object(extra)) = (&mut m, extra) {
        m.extend(extra);
    }
    m
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_gram(path: &Path) -> CliResult<(GramMatrix, Option<Value>)> {
    let file =
        GramFile::from_json(&read_input(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let g = file
        .to_gram()
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((g, file.meta))
}

fn meta_kappa(meta: &Option<Value>) -> Option<f64> {
    meta.as_ref()?.get("kappa")?.as_f64()
}

/// Temp file in the destination directory, then rename.
fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| Failure::Output(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json_line(v: &impl Serialize) -> CliResult<String> {
    serde_json::to_string(v)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Output(e.to_string()))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Output(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Failure::Output(e.to_string()))
}

fn sidecar(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn run_witness(a: &WitnessArgs) -> CliResult<()> {
    let spec = WitnessSpec::new(a.kappa, a.n, a.dim)?;
    let q = spec.quadruple();
    let t = build_witness_tuple(&spec)?;
    let m = meta(
        "witness",
        a,
        json!({ "kappa": a.kappa, "phase_index": spec.phase_index(), "theta": q.theta() }),
    );
    let file = OperatorFile::from_parts(t.algebra(), t.unitaries()).with_meta(m.clone());
    write_atomic(&a.out, file.to_json()?.as_bytes())?;
    if let Some(path) = &a.limit {
        let g = GramFile::from_gram(&limit_gram(a.kappa, a.n)?).with_meta(m);
        write_atomic(path, g.to_json()?.as_bytes())?;
    }
    Ok(())
}

fn run_gram(a: &GramArgs) -> CliResult<()> {
    let file = OperatorFile::from_json(&read_input(&a.input)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.input.display())))?;
    let (alg, ops) = file.to_parts()?;
    let t = corrlab::UnitaryTuple::new(alg, ops)?;
    let mut extra = json!({ "near_unitary": t.near_unitary() });
    if let Some(k) = meta_kappa(&file.meta) {
        extra["kappa"] = json!(k);
    }
    let g = GramFile::from_gram(&compute_gram(&t)).with_meta(meta("gram", a, extra));
    emit(a.out.as_deref(), &g.to_json()?)
}

fn run_certify(a: &CertifyArgs) -> CliResult<()> {
    let (g, _) = read_gram(&a.gram)?;
    let report = certificate_with_tol(&g, a.kappa, a.tol)?;
    let mut v = serde_json::to_value(&report).map_err(|e| Failure::Output(e.to_string()))?;
    v["meta"] = meta("certify", a, json!({}));
    emit(a.out.as_deref(), &to_json_line(&v)?)
}

fn shape(a: &FitArgs) -> CliResult<TracialAlgebra> {
    match (&a.blocks, a.dim) {
        (Some(dims), _) => {
            let weights = match &a.weights {
                Some(w) => w.clone(),
                None => {
                    let total: usize = dims.iter().sum();
                    dims.iter().map(|&d| d as f64 / total as f64).collect()
                }
            };
            Ok(TracialAlgebra::new(dims.clone(), weights).map_err(|e| Failure::Usage(e.to_string()))?)
        }
        (None, Some(d)) => TracialAlgebra::single(d).map_err(|e| Failure::Usage(e.to_string())),
        (None, None) => Err(Failure::Usage("one of --dim or --blocks is required".into())),
    }
}

fn run_fit(a: &FitArgs) -> CliResult<()> {
    let (target, target_meta) = read_gram(&a.gram)?;
    if let Some(n) = a.n {
        if n != target.n() {
            return Err(Failure::Usage(format!(
                "--n {n} does not match the target size {}",
                target.n()
            )));
        }
    }
    let alg = shape(a)?;
    let retraction = RetractionRegistry::builtin().get(&a.retraction)?;
    let kappa = a.kappa.or(meta_kappa(&target_meta));
    let p = FitProblem::new(target, alg)
        .with_seed(a.seed)
        .with_restarts(a.restarts)
        .with_max_iter(a.max_iter)
        .with_grad_tol(a.grad_tol)
        .with_retraction(retraction)
        .with_kappa(kappa);
    let r = fit(&p)?;
    let m = meta(
        "fit",
        a,
        json!({ "shape": { "dims": p.shape.dims(), "weights": p.shape.weights() }, "kappa": kappa, "armijo": r.armijo }),
    );
    let tuple = OperatorFile::from_parts(r.tuple.algebra(), r.tuple.unitaries());
    let out = json!({
        "residual": r.residual,
        "iterations": r.iterations,
        "grad_norm": r.grad_norm,
        "converged": r.converged,
        "restart": r.restart,
        "restart_residuals": r.restart_residuals,
        "retraction": r.retraction,
        "certificate_at_kappa": r.certificate_at_kappa,
        "tuple": tuple,
        "meta": m,
    });
    write_atomic(&a.out, to_json_line(&out)?.as_bytes())?;
    if a.strict && !r.converged {
        return Err(Failure::NotConverged(format!(
            "best restart stopped with gradient norm {:e} > {:e}",
            r.grad_norm, a.grad_tol
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepCsvRow {
    d: usize,
    residual: f64,
    iterations: usize,
    grad_norm: f64,
    c1: Option<f64>,
    c2: Option<f64>,
    c3: Option<f64>,
    c4: Option<f64>,
}

fn run_sweep(a: &SweepArgs) -> CliResult<()> {
    let (target, target_meta) = read_gram(&a.gram)?;
    let kappa = a.kappa.or(meta_kappa(&target_meta)).unwrap_or(0.0);
    let opts = SweepOptions {
        restarts: a.restarts,
        max_iter: a.max_iter,
        grad_tol: a.grad_tol,
        retraction: RetractionRegistry::builtin().get(&a.retraction)?,
        kappa: Some(kappa),
    };
    let rows = residual_sweep(&target, &a.dims, a.seed, &opts)?;
    let csv_rows: Vec<SweepCsvRow> = rows
        .iter()
        .map(|r| {
            let c = r.certificate.map(|c| c.map(Some)).unwrap_or([None; 4]);
            SweepCsvRow {
                d: r.d,
                residual: r.residual,
                iterations: r.iterations,
                grad_norm: r.grad_norm,
                c1: c[0],
                c2: c[1],
                c3: c[2],
                c4: c[3],
            }
        })
        .collect();
    write_atomic(&a.csv, &csv_bytes(&csv_rows)?)?;
    let converged: Vec<bool> = rows.iter().map(|r| r.converged).collect();
    let m = meta("sweep", a, json!({ "kappa": kappa, "converged": converged }));
    write_atomic(&sidecar(&a.csv), to_json_line(&m)?.as_bytes())?;
    if a.strict && converged.iter().any(|c| !c) {
        return Err(Failure::NotConverged("some sweep points did not converge".into()));
    }
    Ok(())
}

fn run_limit(a: &LimitArgs) -> CliResult<()> {
    let g = GramFile::from_gram(&limit_gram(a.kappa, a.n)?).with_meta(meta("limit", a, json!({ "kappa": a.kappa })));
    write_atomic(&a.out, g.to_json()?.as_bytes())
}

fn run_validate(a: &ValidateArgs) -> CliResult<()> {
    let (report, passes) = if let Some(path) = &a.gram {
        let (g, _) = read_gram(path)?;
        let rep = g.validate(a.tol.unwrap_or(GRAM_TOL));
        let passes = rep.passes;
        (json!({ "gram": rep }), passes)
    } else {
        let path = a.ops.as_ref().expect("clap requires --gram or --ops");
        let file = OperatorFile::from_json(&read_input(path)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let (alg, ops) = file.to_parts()?;
        let tol = a
            .tol
            .unwrap_or(corrlab::gram::TUPLE_UNITARY_TOL_PER_DIM * alg.max_dim() as f64);
        let defects = ops
            .iter()
            .map(|u| alg.unitarity_defect(u))
            .collect::<corrlab::Result<Vec<f64>>>()?;
        let bad: Vec<usize> = defects
            .iter()
            .enumerate()
            .filter(|(_, d)| !(**d <= tol))
            .map(|(i, _)| i + 1)
            .collect();
        let alg_rep = alg.validate();
        let passes = bad.is_empty();
        // Gram invariants only make sense once every entry is unitary.
        let gram = if passes {
            Some(gram_of(&alg, &ops)?.validate(GRAM_TOL))
        } else {
            None
        };
        (
            json!({ "algebra": alg_rep, "unitarity_defects": defects, "tol": tol, "not_unitary": bad, "gram": gram }),
            passes,
        )
    };
    let mut v = report;
    v["passes"] = json!(passes);
    v["meta"] = meta("validate", a, json!({}));
    print!("{}", to_json_line(&v)?);
    if passes {
        Ok(())
    } else {
        Err(Failure::Validation("validation failed".into()))
    }
}

fn run_check(a: &CheckArgs) -> CliResult<()> {
    let report = pipeline_check(&PipelineOptions {
        kappa: a.kappa,
        dims: a.dims.clone(),
        n: a.n,
    })?;
    write_atomic(&a.csv, &csv_bytes(&report.rows)?)?;
    let m = meta(
        "check",
        a,
        json!({
            "convergence_non_increasing": report.convergence_non_increasing,
            "certificates_at_theta": report.certificates_at_theta,
            "determinants_pm_one": report.determinants_pm_one,
            "obstruction_everywhere": report.obstruction_everywhere,
            "ok": report.ok(),
        }),
    );
    write_atomic(&sidecar(&a.csv), to_json_line(&m)?.as_bytes())?;
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::Validation(
            "pipeline invariants violated; see the meta sidecar".into(),
        ))
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("{THREADS_VAR}: {e}")))
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Witness(a) => run_witness(a),
        Command::Gram(a) => run_gram(a),
        Command::Certify(a) => run_certify(a),
        Command::Fit(a) => run_fit(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Limit(a) => run_limit(a),
        Command::Validate(a) => run_validate(a),
        Command::Check(a) => run_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(64)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("corrlab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
