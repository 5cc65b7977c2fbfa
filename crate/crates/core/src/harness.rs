//! Experiment configuration, matrix text I/O, JSONL traces and summaries.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::{apocalypse_cost, linear_cost, quadratic_distance_cost, CostModel, LinearCost};
use crate::error::{Error, Result};
use crate::hrtr::{complexity_bound, gamma_min, max_consecutive_failures_bound, tr_run, StepType, TrConfig, TrRun};
use crate::lifts::{certify_stationarity, lift_apply, Certificate, LiftKind, LiftPoint};
use crate::linalg::{diag, Mat, SvdFactors, Vector};
use crate::lowrank::{classify_limit_behavior, LimitBehavior};
use crate::p2gd::{p2gd_run, P2gdConfig, P2gdTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// 3×3 cost whose P²GD iterates converge to a non-stationary point.
    Apocalypse,
    /// `u^T X v` started at a rank-deficient point with `u ⊥ col(X)`, `v ⊥ row(X)`.
    Linear,
    /// `½‖X - A‖²` with a random target `A`.
    QuadraticDistance,
    /// `½‖X‖²` at `diag(ε^{2/3}, 0, ...)`, where the certification bounds are tight.
    #[serde(rename = "appendix_e")]
    TightCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    P2gd,
    Hrtr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    /// Lift of the trust-region solver, `lr` when omitted. Rejected for P²GD.
    pub lift: Option<LiftKind>,
    pub rank: usize,
    /// Ambient shape for problems without a fixed shape.
    pub m: usize,
    pub n: usize,
    /// Seeds random problem instances only.
    pub seed: u64,
    /// Directory receiving `trace.jsonl` and `summary.json`.
    pub output: PathBuf,
    pub p2gd: P2gdConfig,
    pub hrtr: TrConfig,
    /// Threshold of the limit classification.
    pub classify_eps: f64,
    /// Singular values below this are dropped when guessing the limit of a P²GD run.
    pub limit_sigma_tol: f64,
    /// `ε` of the `appendix_e` instance.
    pub epsilon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemKind::Apocalypse,
            solver: SolverKind::P2gd,
            lift: None,
            rank: 2,
            m: 4,
            n: 4,
            seed: 0,
            output: PathBuf::from("out"),
            p2gd: P2gdConfig::default(),
            hrtr: TrConfig::default(),
            classify_eps: 1e-4,
            limit_sigma_tol: 1e-3,
            epsilon: 1e-3,
        }
    }
}

impl ExperimentConfig {
    /// Canned run on the apocalypse cost from `diag(2, 1, 0)`.
    ///
    /// P²GD uses the fixed step 8/5 with `τ = 1/5` for 30 iterations. The
    /// trust-region run adds truncated CG and raises `γ̄` to `10³` so that the
    /// flat valley of minimizers is crossed within the iteration budget.
    pub fn apocalypse_demo(solver: SolverKind, lift: LiftKind) -> Self {
        ExperimentConfig {
            problem: ProblemKind::Apocalypse,
            solver,
            lift: (solver == SolverKind::Hrtr).then_some(lift),
            rank: 2,
            m: 3,
            n: 3,
            output: PathBuf::from("out/apocalypse"),
            p2gd: P2gdConfig {
                tau: 0.2,
                alpha_init: 1.6,
                max_iters: 30,
                stop_mu1: 0.0,
                keep_iterates: true,
                ..P2gdConfig::default()
            },
            hrtr: TrConfig { truncated_cg: true, gamma_hi: 1e3, ..TrConfig::default() },
            ..ExperimentConfig::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with_rank_tol(text, crate::linalg::DEFAULT_RANK_TOL)
    }

    /// Parse a config whose solver blocks fall back to `rank_tol` when they omit one.
    pub fn from_json_with_rank_tol(text: &str, rank_tol: f64) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value.as_object_mut().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        for block in ["p2gd", "hrtr"] {
            let entry = obj.entry(block).or_insert_with(|| serde_json::json!({}));
            if let Some(inner) = entry.as_object_mut() {
                inner.entry("rank_tol").or_insert_with(|| serde_json::json!(rank_tol));
            }
        }
        let cfg: ExperimentConfig = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn lift_kind(&self) -> LiftKind {
        self.lift.unwrap_or(LiftKind::Lr)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Config("rank must be at least 1".into()));
        }
        let (m, n) = self.shape();
        if m == 0 || n == 0 {
            return Err(Error::Config("m and n must be positive".into()));
        }
        if self.rank > m.min(n) {
            return Err(Error::Config(format!("rank {} exceeds min({m}, {n})", self.rank)));
        }
        if self.solver == SolverKind::P2gd && self.lift.is_some() {
            return Err(Error::Config("lift applies to the hrtr solver only".into()));
        }
        if !(self.classify_eps > 0.0 && self.limit_sigma_tol > 0.0 && self.epsilon > 0.0) {
            return Err(Error::Config("classify_eps, limit_sigma_tol and epsilon must be positive".into()));
        }
        match self.solver {
            SolverKind::P2gd => self.p2gd.validate(),
            SolverKind::Hrtr => self.hrtr.validate(),
        }
    }

    /// Effective ambient shape.
    pub fn shape(&self) -> (usize, usize) {
        match self.problem {
            ProblemKind::Apocalypse => (3, 3),
            _ => (self.m, self.n),
        }
    }
}

/// A problem instance: cost, starting point and optional reference data.
pub struct Instance {
    pub cost: Box<dyn CostModel>,
    pub start: Mat,
    /// Rank-deficient reference point, when the problem has one.
    pub reference: Option<Mat>,
    /// The linear cost itself for the `linear` problem.
    pub linear: Option<LinearCost>,
}

fn uniform_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Mat {
    Mat::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
}

fn orthonormal_columns(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Mat {
    loop {
        let q = uniform_matrix(rng, m, k).qr().q();
        if q.ncols() == k {
            return q;
        }
    }
}

pub fn build_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let (m, n) = cfg.shape();
    let r = cfg.rank;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.problem {
        ProblemKind::Apocalypse => {
            Ok(Instance {
                cost: Box::new(apocalypse_cost()),
                start: diag(&[2., 1., 0.]),
                reference: Some(diag(&[1., 0., 0.])),
                linear: None,
            })
        }
        ProblemKind::Linear => {
            let (cost, limit) = linear_limit(&mut rng, m, n, r);
            Ok(Instance { cost: Box::new(cost.clone()), start: limit.clone(), reference: Some(limit), linear: Some(cost) })
        }
        ProblemKind::QuadraticDistance => {
            let target = uniform_matrix(&mut rng, m, n);
            let start = uniform_matrix(&mut rng, m, r) * uniform_matrix(&mut rng, n, r).transpose() * 0.1;
            Ok(Instance { cost: Box::new(quadratic_distance_cost(target)), start, reference: None, linear: None })
        }
        ProblemKind::TightCertificate => {
            let mut x = Mat::zeros(m, n);
            x[(0, 0)] = cfg.epsilon.powf(2.0 / 3.0);
            Ok(Instance {
                cost: Box::new(quadratic_distance_cost(Mat::zeros(m, n))),
                start: x.clone(),
                reference: Some(x),
                linear: None,
            })
        }
    }
}

/// Random rank-`(r-1)` point `X̄` and the cost `u^T X v` with unit `u ⊥ col(X̄)`, `v ⊥ row(X̄)`.
fn linear_limit(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> (LinearCost, Mat) {
    let s = r - 1;
    let qu = orthonormal_columns(rng, m, s + 1);
    let qv = orthonormal_columns(rng, n, s + 1);
    let sigmas: Vec<f64> = (0..s).map(|i| 1.0 + rng.gen_range(0.0..1.0) + (s - i) as f64).collect();
    let mut x = Mat::zeros(m, n);
    for (i, sig) in sigmas.iter().enumerate() {
        x += *sig * qu.column(i) * qv.column(i).transpose();
    }
    let u: Vector = qu.column(s).into_owned();
    let v: Vector = qv.column(s).into_owned();
    (linear_cost(u, v), x)
}

/// Sequence `X_k = X̄ + (1/k) a b^T` with `a ⊥ col(X̄)`, `b ⊥ row(X̄)` and
/// `a ⊥ u`, `b ⊥ v`, so every `X_k` has rank `r` and `‖Proj_{T_{X_k}}(-uv^T)‖ = 0`.
/// Needs `min(m, n) ≥ r + 1`.
pub fn linear_apocalypse_sequence(limit: &Mat, cost: &LinearCost, len: usize) -> Result<Vec<Mat>> {
    let (m, n) = limit.shape();
    let svd = SvdFactors::new(limit, crate::linalg::DEFAULT_RANK_TOL);
    let s = svd.rank;
    if m.min(n) < s + 2 {
        return Err(Error::Config(format!("sequence needs min(m, n) >= {} for rank {}", s + 2, s)));
    }
    let mut left = svd.u.columns(0, s).into_owned();
    left = left.insert_column(s, 0.0);
    left.set_column(s, &cost.u);
    let a = crate::linalg::complete_orthonormal(&left, s + 2).column(s + 1).into_owned();
    let mut right = svd.v.columns(0, s).into_owned();
    right = right.insert_column(s, 0.0);
    right.set_column(s, &cost.v);
    let b = crate::linalg::complete_orthonormal(&right, s + 2).column(s + 1).into_owned();
    Ok((1..=len).map(|k| limit + (&a * b.transpose()) / k as f64).collect())
}

/// One JSONL trace line. Fields that do not apply to a solver are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub f: f64,
    pub mu1: f64,
    pub sigma_r: f64,
    pub grad_norm_lift: Option<f64>,
    pub lambda_min: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub gamma: Option<f64>,
    pub step_type: Option<String>,
    pub success: Option<bool>,
    /// P²GD step size.
    pub alpha: Option<f64>,
}

pub fn p2gd_records(trace: &P2gdTrace) -> Vec<TraceRecord> {
    trace
        .rows
        .iter()
        .map(|r| TraceRecord {
            iter: r.iter,
            f: r.f,
            mu1: r.mu1,
            sigma_r: r.sigma_r,
            grad_norm_lift: None,
            lambda_min: None,
            delta: None,
            rho: None,
            gamma: None,
            step_type: None,
            success: r.accepted,
            alpha: r.alpha,
        })
        .collect()
}

pub fn tr_records(run: &TrRun) -> Vec<TraceRecord> {
    run.rows
        .iter()
        .map(|r| TraceRecord {
            iter: r.iter,
            f: r.f,
            mu1: r.mu1,
            sigma_r: r.sigma_r,
            grad_norm_lift: Some(r.grad_norm),
            lambda_min: Some(r.lambda_min),
            delta: r.delta,
            rho: r.rho,
            gamma: Some(r.gamma),
            step_type: r.step_type.map(|t| match t {
                StepType::K1 => "k1".to_string(),
                StepType::K2 => "k2".to_string(),
            }),
            success: r.success,
            alpha: None,
        })
        .collect()
}

pub fn write_jsonl(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(text: &str) -> Result<Vec<TraceRecord>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub behavior: LimitBehavior,
    pub limit_mu1: f64,
    pub tail_mu1: f64,
    /// Largest `‖Proj_{T_{X_k}}(-∇f(limit))‖` over the last tenth of the sequence.
    pub tail_limit_gradient_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub g0: f64,
    pub gmin: f64,
    pub measured_l1: f64,
    pub measured_l2: f64,
    pub gamma_min: f64,
    pub min_gamma_seen: f64,
    pub max_consecutive_failures: usize,
    pub consecutive_failure_bound: usize,
    pub violating_iterates: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    pub lift: Option<LiftKind>,
    pub rank: usize,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub status: String,
    pub iterations: usize,
    pub final_f: f64,
    pub final_mu1: f64,
    pub final_sigma_r: f64,
    pub final_grad_norm_lift: Option<f64>,
    pub final_lambda_min: Option<f64>,
    pub final_point: Vec<Vec<f64>>,
    /// Limit guess for P²GD runs and the comparison of the run against it.
    pub classification: Option<Classification>,
    /// Classification of the constructed rank-`r` sequence of the linear problem.
    pub sequence_classification: Option<Classification>,
    pub certificate: Option<Certificate>,
    pub complexity: Option<ComplexityReport>,
}

fn rows_of(x: &Mat) -> Vec<Vec<f64>> {
    (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect()
}

fn classification_of(
    seq: &[Mat],
    limit: &Mat,
    r: usize,
    cost: &dyn CostModel,
    eps: f64,
    rank_tol: f64,
) -> Result<Classification> {
    let d = classify_limit_behavior(seq, limit, r, cost, eps, rank_tol)?;
    let tail = seq.len().div_ceil(10);
    let start = seq.len() - tail;
    Ok(Classification {
        behavior: d.behavior,
        limit_mu1: d.limit_mu1,
        tail_mu1: d.sequence_mu1[start..].iter().copied().fold(0.0, f64::max),
        tail_limit_gradient_proxy: d.limit_gradient_proxy[start..].iter().copied().fold(0.0, f64::max),
    })
}

/// Run the configured experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<(ExperimentSummary, Vec<TraceRecord>)> {
    cfg.validate()?;
    let inst = build_instance(cfg)?;
    let (m, n) = cfg.shape();
    let r = cfg.rank;
    let cost: &dyn CostModel = inst.cost.as_ref();

    let sequence_classification = match (&inst.linear, &inst.reference) {
        (Some(linear), Some(limit)) if m.min(n) > r => {
            let seq = linear_apocalypse_sequence(limit, linear, 40)?;
            Some(classification_of(&seq, limit, r, cost, cfg.classify_eps, cfg.p2gd.rank_tol)?)
        }
        _ => None,
    };

    let mut summary = ExperimentSummary {
        problem: cfg.problem,
        solver: cfg.solver,
        lift: None,
        rank: r,
        m,
        n,
        seed: cfg.seed,
        status: String::new(),
        iterations: 0,
        final_f: 0.0,
        final_mu1: 0.0,
        final_sigma_r: 0.0,
        final_grad_norm_lift: None,
        final_lambda_min: None,
        final_point: Vec::new(),
        classification: None,
        sequence_classification,
        certificate: None,
        complexity: None,
    };

    let records = match cfg.solver {
        SolverKind::P2gd => {
            let p2 = P2gdConfig { keep_iterates: true, ..cfg.p2gd.clone() };
            let trace = p2gd_run(&inst.start, r, cost, &p2)?;
            let last = trace.rows.last().expect("trace has a row");
            summary.status = serde_json::to_value(trace.status)?.as_str().unwrap_or_default().to_string();
            summary.iterations = trace.iterations();
            summary.final_f = last.f;
            summary.final_mu1 = last.mu1;
            summary.final_sigma_r = last.sigma_r;
            summary.final_point = rows_of(&trace.final_x);

            let svd = SvdFactors::new(&trace.final_x, p2.rank_tol);
            let keep = svd.sigma.iter().filter(|&&s| s > cfg.limit_sigma_tol * svd.sigma_max()).count();
            let limit = svd.truncate(keep);
            summary.classification =
                Some(classification_of(&trace.iterates, &limit, r, cost, cfg.classify_eps, p2.rank_tol)?);
            p2gd_records(&trace)
        }
        SolverKind::Hrtr => {
            let lift = cfg.lift_kind();
            summary.lift = Some(lift);
            let y0 = LiftPoint::from_matrix(lift, &inst.start, r)?;
            let run = tr_run(&y0, cost, &cfg.hrtr)?;
            let last = run.final_row();
            summary.status = serde_json::to_value(run.status)?.as_str().unwrap_or_default().to_string();
            summary.iterations = run.iterations();
            summary.final_f = last.f;
            summary.final_mu1 = last.mu1;
            summary.final_sigma_r = last.sigma_r;
            summary.final_grad_norm_lift = Some(last.grad_norm);
            summary.final_lambda_min = Some(last.lambda_min);
            summary.final_point = rows_of(&lift_apply(&run.final_point));

            if lift == LiftKind::Lr && cost.lipschitz_grad().is_some() {
                let (eps1, eps2) = match run.status {
                    crate::hrtr::TrStatus::Converged => (cfg.hrtr.stop_eps1, cfg.hrtr.stop_eps2),
                    crate::hrtr::TrStatus::MaxIters => (last.grad_norm, (-last.lambda_min).max(0.0)),
                };
                summary.certificate =
                    Some(certify_stationarity(&run.final_point, cost, eps1, eps2, cfg.hrtr.rank_tol)?);
            }
            let gmin = run.rows.iter().map(|r| r.f).fold(f64::INFINITY, f64::min);
            let gm = gamma_min(run.measured_l1, run.measured_l2, &cfg.hrtr);
            let bound = if cfg.hrtr.stop_eps1 > 0.0 && cfg.hrtr.stop_eps2 > 0.0 {
                complexity_bound(
                    run.g0,
                    gmin,
                    run.measured_l1,
                    run.measured_l2,
                    &cfg.hrtr,
                    cfg.hrtr.stop_eps1,
                    cfg.hrtr.stop_eps2,
                )?
                .total
            } else {
                f64::INFINITY
            };
            summary.complexity = Some(ComplexityReport {
                g0: run.g0,
                gmin,
                measured_l1: run.measured_l1,
                measured_l2: run.measured_l2,
                gamma_min: gm,
                min_gamma_seen: run.gammas.iter().copied().fold(f64::INFINITY, f64::min),
                max_consecutive_failures: run.max_consecutive_failures,
                consecutive_failure_bound: max_consecutive_failures_bound(gm, &cfg.hrtr),
                violating_iterates: run.violating_iterates,
                bound,
            });
            tr_records(&run)
        }
    };

    if cfg.problem == ProblemKind::TightCertificate {
        // certification at the instance itself with its exact (ε1, ε2)
        let y = LiftPoint::balanced_lr(&inst.start, r)?;
        let eps = cfg.epsilon;
        summary.certificate =
            Some(certify_stationarity(&y, cost, 2f64.sqrt() * eps, eps.powf(2.0 / 3.0), cfg.p2gd.rank_tol)?);
    }
    Ok((summary, records))
}

/// Run the experiment and write `trace.jsonl` and `summary.json` into `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let (summary, records) = execute(cfg)?;
    fs::create_dir_all(&cfg.output)?;
    write_jsonl(&cfg.output.join("trace.jsonl"), &records)?;
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(cfg.output.join("summary.json"), text)?;
    Ok(summary)
}

/// Matrix text form: `m n` on the first line, then `m` rows of `n` numbers.
pub fn format_matrix(x: &Mat) -> String {
    let mut out = format!("{} {}\n", x.nrows(), x.ncols());
    for i in 0..x.nrows() {
        let row: Vec<String> = x.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        let tok = tokens.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?;
        tok.parse::<usize>().map_err(|_| Error::Parse(format!("invalid {what} '{tok}'")))
    };
    let m = dim("row count")?;
    let n = dim("column count")?;
    let values = tokens
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("invalid value '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != m * n {
        return Err(Error::Parse(format!("expected {} values for a {m}x{n} matrix, found {}", m * n, values.len())));
    }
    Ok(Mat::from_row_slice(m, n, &values))
}

pub fn read_matrix(path: &Path) -> Result<Mat> {
    parse_matrix(&fs::read_to_string(path)?)
}
