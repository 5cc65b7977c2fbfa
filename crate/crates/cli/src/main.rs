use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use apocalift::harness::{read_matrix, run_experiment, ExperimentConfig, ExperimentSummary};
use apocalift::linalg::{DEFAULT_RANK_TOL, RANK_TOL_ENV};
use apocalift::lowrank::{polar_tangent_cone_projection, project_tangent_cone, tangent_cone_at, truncated_svd_projection};
use apocalift::tensorlifts::{tt_apply, tt_svd_traced, tucker_apply, tucker_hosvd};
use apocalift::{DenseTensor, Error, LiftKind, Mat, SolverKind};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "apocalift", version, about = "Stationarity on bounded-rank matrices: P2GD, lifts and trust regions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a canned experiment.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Run experiments described by JSON config files.
    Run {
        #[arg(long = "config", required = true, num_args = 1..)]
        configs: Vec<PathBuf>,
        /// Number of configs processed in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Project a matrix onto the tangent cone of the rank-bounded set and print stationarity measures.
    Project {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rank: usize,
        /// Base point of the tangent cone, defaults to the best rank-r approximation of the matrix.
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Normalize a dense tensor into Tucker or tensor-train parameters.
    Tensor {
        #[arg(value_enum)]
        method: TensorMethod,
        #[arg(long)]
        tensor: PathBuf,
        /// Tucker: one rank per mode. TT: the d-1 inner ranks.
        #[arg(long, value_delimiter = ',', required = true)]
        ranks: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// P2GD or the hooked trust-region method on the 3x3 apocalypse instance.
    Apocalypse {
        #[arg(long, value_enum, default_value_t = SolverArg::P2gd)]
        solver: SolverArg,
        #[arg(long, value_enum)]
        lift: Option<LiftArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    P2gd,
    Hrtr,
}

#[derive(Clone, Copy, ValueEnum)]
enum LiftArg {
    Lr,
    Stiefel,
}

#[derive(Clone, Copy, ValueEnum)]
enum TensorMethod {
    Hosvd,
    Ttsvd,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_config() { 1 } else { 2 }, message: e.to_string() }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn rank_tol() -> Result<f64, Failure> {
    match std::env::var(RANK_TOL_ENV) {
        Err(_) => Ok(DEFAULT_RANK_TOL),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t < 1.0 => Ok(t),
            _ => Err(config_error(format!("{RANK_TOL_ENV} must be a number in (0, 1), got '{raw}'"))),
        },
    }
}

fn rows(x: &Mat) -> Vec<Vec<f64>> {
    (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect()
}

fn report(summary: &ExperimentSummary, out: &Path) {
    println!(
        "{}: status={} iterations={} f={} mu1={:e} sigma_r={:e}",
        out.display(),
        summary.status,
        summary.iterations,
        summary.final_f,
        summary.final_mu1,
        summary.final_sigma_r
    );
    if let Some(c) = &summary.classification {
        println!("  limit: behavior={:?} mu1_at_limit={}", c.behavior, c.limit_mu1);
    }
    if let Some(c) = &summary.sequence_classification {
        println!("  constructed sequence: behavior={:?} mu1_at_limit={}", c.behavior, c.limit_mu1);
    }
    if let Some(c) = &summary.certificate {
        println!("  certificate: bound_op={:e} bound_proj={:e}", c.bound_op, c.bound_proj);
    }
}

fn demo(solver: SolverArg, lift: Option<LiftArg>, out: Option<PathBuf>) -> Result<(), Failure> {
    let solver = match solver {
        SolverArg::P2gd => SolverKind::P2gd,
        SolverArg::Hrtr => SolverKind::Hrtr,
    };
    if solver == SolverKind::P2gd && lift.is_some() {
        return Err(config_error("--lift applies to --solver hrtr only"));
    }
    let lift = match lift {
        Some(LiftArg::Stiefel) => LiftKind::Stiefel,
        _ => LiftKind::Lr,
    };
    let mut cfg = ExperimentConfig::apocalypse_demo(solver, lift);
    let tol = rank_tol()?;
    cfg.p2gd.rank_tol = tol;
    cfg.hrtr.rank_tol = tol;
    if let Some(out) = out {
        cfg.output = out;
    }
    let summary = run_experiment(&cfg)?;
    report(&summary, &cfg.output);
    Ok(())
}

fn run(configs: &[PathBuf], jobs: usize) -> Result<(), Failure> {
    if jobs == 0 {
        return Err(config_error("--jobs must be at least 1"));
    }
    let tol = rank_tol()?;
    let mut parsed = Vec::with_capacity(configs.len());
    for path in configs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let cfg = ExperimentConfig::from_json_with_rank_tol(&text, tol)
            .map_err(|e| {
                let f = Failure::from(e);
                Failure { message: format!("{}: {}", path.display(), f.message), ..f }
            })?;
        if parsed.iter().any(|c: &ExperimentConfig| c.output == cfg.output) {
            return Err(config_error(format!("{}: output {} is shared with another config", path.display(), cfg.output.display())));
        }
        parsed.push(cfg);
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ExperimentSummary, Failure>>>> =
        Mutex::new((0..parsed.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(parsed.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cfg) = parsed.get(i) else { break };
                let outcome = run_experiment(cfg).map_err(Failure::from);
                results.lock().expect("result slot lock")[i] = Some(outcome);
            });
        }
    });

    let mut worst: Option<Failure> = None;
    for (i, outcome) in results.into_inner().expect("result slot lock").into_iter().enumerate() {
        match outcome.expect("every config ran") {
            Ok(summary) => report(&summary, &parsed[i].output),
            Err(f) => {
                eprintln!("error: {}: {}", configs[i].display(), f.message);
                if worst.as_ref().is_none_or(|w| f.code > w.code) {
                    worst = Some(f);
                }
            }
        }
    }
    match worst {
        None => Ok(()),
        Some(f) => Err(Failure { code: f.code, message: "one or more runs failed".into() }),
    }
}

fn project(matrix: &Path, rank: usize, point: Option<&Path>) -> Result<(), Failure> {
    let tol = rank_tol()?;
    let m = read_matrix(matrix)?;
    if rank == 0 || rank > m.nrows().min(m.ncols()) {
        return Err(config_error(format!("rank must lie in [1, {}]", m.nrows().min(m.ncols()))));
    }
    let x = match point {
        Some(p) => read_matrix(p)?,
        None => truncated_svd_projection(&m, rank),
    };
    let cone = tangent_cone_at(&x, rank, tol)?;
    let (proj, mu1) = project_tangent_cone(&cone, &m)?;
    let polar = polar_tangent_cone_projection(&cone, &m)?;
    let out = json!({
        "rank_bound": rank,
        "point_rank": cone.s(),
        "point": rows(&x),
        "tangent_projection": rows(&proj),
        "polar_projection": rows(&polar),
        "mu1": mu1,
        "mu2": (&m - &polar).norm(),
    });
    emit(&out)
}

fn tensor(method: TensorMethod, path: &Path, ranks: &[usize]) -> Result<(), Failure> {
    let tol = rank_tol()?;
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let t = DenseTensor::parse(&text)?;
    let out = match method {
        TensorMethod::Hosvd => {
            let p = tucker_hosvd(&t, ranks, tol)?;
            let back = tucker_apply(&p)?;
            json!({
                "method": "hosvd",
                "shape": t.shape(),
                "ranks": ranks,
                "core": { "shape": p.core.shape(), "values": p.core.values() },
                "factors": p.factors.iter().map(rows).collect::<Vec<_>>(),
                "tensor_norm": t.norm(),
                "core_norm": p.core.norm(),
                "approximation_error": residual(&t, &back),
            })
        }
        TensorMethod::Ttsvd => {
            let trace = tt_svd_traced(&t, ranks, tol)?;
            let back = tt_apply(&trace.params)?;
            json!({
                "method": "ttsvd",
                "shape": t.shape(),
                "ranks": trace.params.ranks(),
                "cores": trace.params.cores.iter()
                    .map(|c| json!({ "shape": c.shape(), "values": c.values() }))
                    .collect::<Vec<_>>(),
                "tensor_norm": t.norm(),
                "stage_norms": trace.stage_norms,
                "approximation_error": residual(&t, &back),
            })
        }
    };
    emit(&out)
}

/// Pretty-prints `value` to stdout; a closed pipe downstream is not an error.
fn emit(value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("json values are finite or null");
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure { code: 2, message: format!("writing output: {e}") })
        }
        _ => Ok(()),
    }
}

fn residual(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let informational = !e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if informational { 0 } else { 1 });
        }
    };
    let outcome = match &cli.command {
        Command::Demo { which: Demo::Apocalypse { solver, lift, out } } => demo(*solver, *lift, out.clone()),
        Command::Run { configs, jobs } => run(configs, *jobs),
        Command::Project { matrix, rank, point } => project(matrix, *rank, point.as_deref()),
        Command::Tensor { method, tensor: path, ranks } => tensor(*method, path, ranks),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
