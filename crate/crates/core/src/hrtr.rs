//! Hooked Riemannian trust-region method on a lift.
//!
//! Each iteration builds the quadratic model of the pullback `g ∘ R_y`,
//! picks a gradient-based (`K1`) or curvature-based (`K2`) radius, takes a
//! step that is at least as good as the Cauchy step, and on success applies
//! the hook (rebalancing map) to the retracted point.

use serde::{Deserialize, Serialize};

use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::lifts::{lift_apply, rebalance, LiftPoint, PullbackModel, Tangent};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::lowrank::{report_from, tangent_cone_at};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrConfig {
    /// Radius contraction factor on failure.
    pub gamma_c: f64,
    /// Acceptance threshold on the ratio of actual to predicted decrease.
    pub eta: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub gamma0: f64,
    pub max_iters: usize,
    pub stop_eps1: f64,
    pub stop_eps2: f64,
    /// Refine the Cauchy step with truncated conjugate gradients.
    pub truncated_cg: bool,
    pub cg_max_iters: usize,
    /// Rank tolerance for the variety-side diagnostics.
    pub rank_tol: f64,
}

impl Default for TrConfig {
    fn default() -> Self {
        TrConfig {
            gamma_c: 0.5,
            eta: 0.1,
            gamma_lo: 1e-6,
            gamma_hi: 10.0,
            gamma0: 1.0,
            max_iters: 500,
            stop_eps1: 1e-6,
            stop_eps2: 1e-6,
            truncated_cg: false,
            cg_max_iters: 200,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl TrConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.gamma_c) || !open_unit(self.eta) {
            return Err(Error::Config(format!(
                "gamma_c and eta must lie in (0, 1), got {} and {}",
                self.gamma_c, self.eta
            )));
        }
        if !(self.gamma_lo > 0.0 && self.gamma_lo <= self.gamma_hi && self.gamma_hi.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < gamma_lo <= gamma_hi < inf, got [{}, {}]",
                self.gamma_lo, self.gamma_hi
            )));
        }
        if !(self.gamma0 >= self.gamma_lo && self.gamma0 <= self.gamma_hi) {
            return Err(Error::Config(format!(
                "gamma0 = {} must lie in [{}, {}]",
                self.gamma0, self.gamma_lo, self.gamma_hi
            )));
        }
        if !(self.stop_eps1 >= 0.0 && self.stop_eps2 >= 0.0) {
            return Err(Error::Config("stop tolerances must be nonnegative".into()));
        }
        if !open_unit(self.rank_tol) {
            return Err(Error::Config(format!("rank_tol must lie in (0, 1), got {}", self.rank_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepType {
    /// Radius proportional to the gradient norm.
    K1,
    /// Radius proportional to the negative curvature.
    K2,
}

/// Current point with its model data.
pub struct TrIterate<'a, C: CostModel + ?Sized> {
    pub model: PullbackModel<'a, C>,
    pub gamma: f64,
    pub grad: Tangent,
    /// Smallest eigenvalue of the model Hessian.
    pub lambda_min: f64,
    /// Unit eigenvector for `lambda_min` with `⟨e, grad⟩ ≤ 0`.
    pub eigvec: Tangent,
    pub hess_norm: f64,
    pub step_type: StepType,
}

impl<'a, C: CostModel + ?Sized> TrIterate<'a, C> {
    pub fn new(y: LiftPoint, cost: &'a C, gamma: f64) -> Result<Self> {
        let model = PullbackModel::new(y, cost)?;
        let grad = model.grad();
        let dense = model.dense_hessian()?;
        let (lambda_min, mut eigvec) = dense
            .min_eigenpair()
            .ok_or_else(|| Error::Config("tangent space has dimension zero".into()))?;
        if eigvec.inner(&grad) > 0.0 {
            eigvec = eigvec.scale(-1.0);
        }
        let g2 = grad.inner(&grad);
        let step_type = if lambda_min < 0.0 && g2 < (-lambda_min).powi(3) { StepType::K2 } else { StepType::K1 };
        Ok(TrIterate { hess_norm: dense.op_norm(), model, gamma, grad, lambda_min, eigvec, step_type })
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.norm()
    }

    /// `|min(λ, 0)|`.
    pub fn neg_curvature(&self) -> f64 {
        (-self.lambda_min).max(0.0)
    }

    /// Trust-region radius for this iterate.
    pub fn delta(&self) -> f64 {
        match self.step_type {
            StepType::K1 => self.gamma * self.grad_norm(),
            StepType::K2 => self.gamma * self.neg_curvature(),
        }
    }

    pub fn value(&self) -> f64 {
        self.model.value()
    }
}

/// Minimizer of the model along `-∇g` (K1) or the eigenvector (K2) within the radius.
pub fn cauchy_step<C: CostModel + ?Sized>(it: &TrIterate<'_, C>) -> Result<Tangent> {
    let u = match it.step_type {
        StepType::K1 => it.grad.scale(-1.0),
        StepType::K2 => it.eigvec.clone(),
    };
    let delta = it.delta();
    let unorm = u.norm();
    if delta == 0.0 || unorm == 0.0 {
        return Ok(u.scale(0.0));
    }
    let hu = it.model.hess_vec(&u)?;
    let curvature = u.inner(&hu);
    let slope = u.inner(&it.grad);
    let t_max = delta / unorm;
    let t = if curvature > 0.0 { (-slope / curvature).clamp(0.0, t_max) } else { t_max };
    Ok(u.scale(t))
}

/// `m(0) - m(s)`.
pub fn model_decrease<C: CostModel + ?Sized>(it: &TrIterate<'_, C>, s: &Tangent) -> Result<f64> {
    let hs = it.model.hess_vec(s)?;
    Ok(-s.inner(&it.grad) - 0.5 * s.inner(&hs))
}

/// Steihaug-Toint truncated CG on the model within radius `delta`.
fn truncated_cg<C: CostModel + ?Sized>(it: &TrIterate<'_, C>, delta: f64, max_iters: usize) -> Result<Tangent> {
    let mut z = it.grad.scale(0.0);
    let mut res = it.grad.clone();
    let mut dir = res.scale(-1.0);
    let r0 = res.norm();
    if r0 == 0.0 || delta == 0.0 {
        return Ok(z);
    }
    let to_boundary = |z: &Tangent, d: &Tangent| {
        // largest tau >= 0 with ‖z + tau d‖ = delta
        let a = d.inner(d);
        let b = 2.0 * z.inner(d);
        let c = z.inner(z) - delta * delta;
        let tau = (-b + (b * b - 4.0 * a * c).max(0.0).sqrt()) / (2.0 * a);
        z + &d.scale(tau)
    };
    for _ in 0..max_iters {
        let hd = it.model.hess_vec(&dir)?;
        let kappa = dir.inner(&hd);
        if kappa <= 0.0 {
            return Ok(to_boundary(&z, &dir));
        }
        let rr = res.inner(&res);
        let alpha = rr / kappa;
        let z_next = &z + &dir.scale(alpha);
        if z_next.norm() >= delta {
            return Ok(to_boundary(&z, &dir));
        }
        z = z_next;
        res = &res + &hd.scale(alpha);
        let rr_next = res.inner(&res);
        if rr_next.sqrt() <= r0 * (r0.sqrt().min(0.1)) {
            break;
        }
        dir = &res.scale(-1.0) + &dir.scale(rr_next / rr);
    }
    Ok(z)
}

/// One row of the trust-region trace, describing `y_k` and the step from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrTraceRow {
    pub iter: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub lambda_min: f64,
    pub gamma: f64,
    pub mu1: f64,
    pub sigma_r: f64,
    pub step_type: Option<StepType>,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub success: Option<bool>,
    pub step_norm: Option<f64>,
    pub model_decrease: Option<f64>,
}

/// Result of one trust-region iteration.
pub struct TrStepOutcome {
    pub next_point: LiftPoint,
    pub next_gamma: f64,
    pub row: TrTraceRow,
    /// `2|g(R s) - g - ⟨s, ∇g⟩| / ‖s‖²`, when `s ≠ 0`.
    pub l1_sample: Option<f64>,
    /// `6|g(R s) - m(s)| / ‖s‖³`, when `s ≠ 0`.
    pub l2_sample: Option<f64>,
}

fn row_for<C: CostModel + ?Sized>(it: &TrIterate<'_, C>, iter: usize, rank_tol: f64) -> Result<TrTraceRow> {
    let (_, _, r) = it.model.y.dims();
    let cone = tangent_cone_at(&it.model.x, r, rank_tol)?;
    let rep = report_from(&cone, &-&it.model.ambient_grad);
    Ok(TrTraceRow {
        iter,
        f: it.value(),
        grad_norm: it.grad_norm(),
        lambda_min: it.lambda_min,
        gamma: it.gamma,
        mu1: rep.mu1,
        sigma_r: rep.sigma_r,
        step_type: None,
        delta: None,
        rho: None,
        success: None,
        step_norm: None,
        model_decrease: None,
    })
}

pub fn tr_iteration<C, H>(it: &TrIterate<'_, C>, iter: usize, hook: &H, cfg: &TrConfig) -> Result<TrStepOutcome>
where
    C: CostModel + ?Sized,
    H: Fn(&LiftPoint) -> LiftPoint + ?Sized,
{
    let delta = it.delta();
    let s_cauchy = cauchy_step(it)?;
    let mut s = s_cauchy.clone();
    let mut decrease = model_decrease(it, &s_cauchy)?;
    if cfg.truncated_cg {
        let s_cg = truncated_cg(it, delta, cfg.cg_max_iters)?;
        let dec_cg = model_decrease(it, &s_cg)?;
        if dec_cg > decrease && s_cg.norm() <= delta * (1.0 + 1e-12) {
            s = s_cg;
            decrease = dec_cg;
        }
    }

    let trial = it.model.retract(&s);
    let trial_value = it.model.cost.value(&lift_apply(&trial));
    let actual = it.value() - trial_value;
    let rho = if decrease == 0.0 { 1.0 } else { actual / decrease };
    let success = rho >= cfg.eta;
    let (next_point, next_gamma) = if success {
        (hook(&trial), (it.gamma / cfg.gamma_c).clamp(cfg.gamma_lo, cfg.gamma_hi))
    } else {
        (it.model.y.clone(), cfg.gamma_c * it.gamma)
    };

    let step_norm = s.norm();
    let (l1_sample, l2_sample) = if step_norm > 0.0 {
        let linear = trial_value - it.value() - s.inner(&it.grad);
        let model_err = trial_value - (it.value() - decrease);
        (Some(2.0 * linear.abs() / step_norm.powi(2)), Some(6.0 * model_err.abs() / step_norm.powi(3)))
    } else {
        (None, None)
    };

    let mut row = row_for(it, iter, cfg.rank_tol)?;
    row.step_type = Some(it.step_type);
    row.delta = Some(delta);
    row.rho = Some(rho);
    row.success = Some(success);
    row.step_norm = Some(step_norm);
    row.model_decrease = Some(decrease);
    Ok(TrStepOutcome { next_point, next_gamma, row, l1_sample, l2_sample })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrStatus {
    /// `‖∇g‖ ≤ stop_eps1` and `λ_min ≥ -stop_eps2`.
    Converged,
    MaxIters,
}

#[derive(Debug, Clone)]
pub struct TrRun {
    pub rows: Vec<TrTraceRow>,
    pub final_point: LiftPoint,
    pub status: TrStatus,
    /// `g` at the hooked initial point.
    pub g0: f64,
    pub gammas: Vec<f64>,
    pub max_consecutive_failures: usize,
    /// Visited iterates with `‖∇g‖ > stop_eps1` or `|λ₋| > stop_eps2`.
    pub violating_iterates: usize,
    /// `max_k max(‖∇²ĝ_k(0)‖, first-order remainder ratio)`.
    pub measured_l1: f64,
    /// `max_k` third-order model error ratio.
    pub measured_l2: f64,
}

impl TrRun {
    pub fn iterations(&self) -> usize {
        self.rows.iter().filter(|r| r.rho.is_some()).count()
    }

    pub fn final_row(&self) -> &TrTraceRow {
        self.rows.last().expect("a run records at least one row")
    }
}

/// Run with the lift's own rebalancing map as the hook.
pub fn tr_run<C: CostModel + ?Sized>(y0: &LiftPoint, cost: &C, cfg: &TrConfig) -> Result<TrRun> {
    tr_run_with_hook(y0, cost, &rebalance, cfg)
}

pub fn tr_run_with_hook<C, H>(y0: &LiftPoint, cost: &C, hook: &H, cfg: &TrConfig) -> Result<TrRun>
where
    C: CostModel + ?Sized,
    H: Fn(&LiftPoint) -> LiftPoint + ?Sized,
{
    cfg.validate()?;
    let mut it = TrIterate::new(hook(y0), cost, cfg.gamma0)?;
    let g0 = it.value();
    let mut rows = Vec::new();
    let mut gammas = Vec::new();
    let (mut consecutive, mut max_consecutive, mut violating) = (0usize, 0usize, 0usize);
    let (mut l1, mut l2) = (0.0f64, 0.0f64);
    let mut k = 0;
    let status = loop {
        gammas.push(it.gamma);
        l1 = l1.max(it.hess_norm);
        let grad_norm = it.grad_norm();
        let converged = grad_norm <= cfg.stop_eps1 && it.neg_curvature() <= cfg.stop_eps2;
        if !converged {
            violating += 1;
        }
        // a zero gradient with nonnegative curvature admits only the zero step
        let two_critical = grad_norm == 0.0 && it.lambda_min >= 0.0;
        if converged || two_critical {
            rows.push(row_for(&it, k, cfg.rank_tol)?);
            break TrStatus::Converged;
        }
        if k == cfg.max_iters {
            rows.push(row_for(&it, k, cfg.rank_tol)?);
            break TrStatus::MaxIters;
        }
        let out = tr_iteration(&it, k, hook, cfg)?;
        if let Some(v) = out.l1_sample {
            l1 = l1.max(v);
        }
        if let Some(v) = out.l2_sample {
            l2 = l2.max(v);
        }
        let success = out.row.success == Some(true);
        rows.push(out.row);
        if success {
            consecutive = 0;
            it = TrIterate::new(out.next_point, cost, out.next_gamma)?;
        } else {
            consecutive += 1;
            max_consecutive = max_consecutive.max(consecutive);
            // same point, same model: only the radius changes
            it.gamma = out.next_gamma;
        }
        k += 1;
    };
    Ok(TrRun {
        rows,
        final_point: it.model.y.clone(),
        status,
        g0,
        gammas,
        max_consecutive_failures: max_consecutive,
        violating_iterates: violating,
        measured_l1: l1,
        measured_l2: l2,
    })
}

/// `min(γ̲, γ_c/(1+L1), γ_c(1-η)/(2 L1), 3 γ_c (1-η)/L2)`, omitting the
/// terms whose constant is zero.
pub fn gamma_min(l1: f64, l2: f64, cfg: &TrConfig) -> f64 {
    let mut g = cfg.gamma_lo.min(cfg.gamma_c / (1.0 + l1));
    if l1 > 0.0 {
        g = g.min(cfg.gamma_c * (1.0 - cfg.eta) / (2.0 * l1));
    }
    if l2 > 0.0 {
        g = g.min(3.0 * cfg.gamma_c * (1.0 - cfg.eta) / l2);
    }
    g
}

/// Largest number of consecutive unsuccessful iterations allowed by the analysis.
pub fn max_consecutive_failures_bound(gamma_min: f64, cfg: &TrConfig) -> usize {
    ((gamma_min / cfg.gamma_hi).ln() / cfg.gamma_c.ln()).ceil().max(0.0) as usize
}

/// Worst-case count of iterates that are not `(eps1, eps2)`-approximately 2-critical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityBound {
    pub gamma_min: f64,
    pub kappa_min: f64,
    /// `⌈log_{γ_c}(γ_min/γ̄) + 1⌉`.
    pub failure_factor: f64,
    /// `⌊(g0 - gmin)/κ_min · max(1/eps1², 1/eps2³)⌋`.
    pub success_budget: f64,
    /// Product of the two factors. Integer valued; kept as `f64` because it
    /// routinely exceeds `u64::MAX`.
    pub total: f64,
}

pub fn complexity_bound(
    g0: f64,
    gmin: f64,
    l1: f64,
    l2: f64,
    cfg: &TrConfig,
    eps1: f64,
    eps2: f64,
) -> Result<ComplexityBound> {
    cfg.validate()?;
    if !(gmin <= g0) {
        return Err(Error::Config(format!("need gmin <= g0, got {gmin} > {g0}")));
    }
    if !(l1 >= 0.0 && l2 >= 0.0) {
        return Err(Error::Config("L1 and L2 must be nonnegative".into()));
    }
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(Error::Config("eps1 and eps2 must be positive".into()));
    }
    let gamma_min = gamma_min(l1, l2, cfg);
    let kappa_min = 0.5 * cfg.eta * gamma_min * gamma_min;
    let failure_factor = ((gamma_min / cfg.gamma_hi).ln() / cfg.gamma_c.ln() + 1.0).ceil();
    let rate = (1.0 / (eps1 * eps1)).max(1.0 / eps2.powi(3));
    let success_budget = ((g0 - gmin) / kappa_min * rate).floor();
    Ok(ComplexityBound { gamma_min, kappa_min, failure_factor, success_budget, total: failure_factor * success_budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{apocalypse_cost, quadratic_distance_cost};
    use crate::linalg::{diag, Mat};

    #[test]
    fn cauchy_step_matches_grid_search() {
        let target = Mat::from_row_slice(3, 3, &[2., 0.5, 0., 0.1, 1., 0.3, 0., 0.2, 0.4]);
        let f = quadratic_distance_cost(target);
        let y = LiftPoint::balanced_lr(&diag(&[1., 0.5, 0.]), 2).unwrap();
        for gamma in [0.05, 0.5, 10.0] {
            let it = TrIterate::new(y.clone(), &f, gamma).unwrap();
            assert_eq!(it.step_type, StepType::K1);
            let s = cauchy_step(&it).unwrap();
            assert!(s.norm() <= it.delta() * (1.0 + 1e-12));
            let u = it.grad.scale(-1.0 / it.grad_norm());
            let best = (0..=10_000)
                .map(|i| model_decrease(&it, &u.scale(it.delta() * i as f64 / 10_000.0)).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let ours = model_decrease(&it, &s).unwrap();
            assert!(ours >= best - 1e-9);
            // decrease lower bound for K1 steps
            let lower = 0.5 * (1.0 / (1.0 + it.hess_norm)).min(gamma) * it.grad_norm().powi(2);
            assert!(ours >= lower - 1e-12);
        }
    }

    #[test]
    fn k2_step_goes_to_the_boundary() {
        let f = apocalypse_cost();
        let y = LiftPoint::balanced_lr(&diag(&[1., 0., 0.]), 2).unwrap();
        let it = TrIterate::new(y, &f, 1.0).unwrap();
        assert_eq!(it.step_type, StepType::K2);
        assert!(it.lambda_min <= -1.0 + 1e-12);
        let s = cauchy_step(&it).unwrap();
        assert!((s.norm() - it.delta()).abs() < 1e-12);
        let dec = model_decrease(&it, &s).unwrap();
        assert!(dec >= 0.5 * it.gamma.powi(2) * it.neg_curvature().powi(3) - 1e-12);
        assert!(it.eigvec.inner(&it.grad) <= 0.0);
    }

    #[test]
    fn two_critical_point_gives_zero_step() {
        // square singular values keep the balanced factors exact
        let target = diag(&[4., 1., 0.]);
        let f = quadratic_distance_cost(target.clone());
        let y = LiftPoint::balanced_lr(&target, 2).unwrap();
        let it = TrIterate::new(y.clone(), &f, 1.0).unwrap();
        assert_eq!(it.grad_norm(), 0.0);
        let s = cauchy_step(&it).unwrap();
        assert_eq!(s.norm(), 0.0);
        assert_eq!(model_decrease(&it, &s).unwrap(), 0.0);
        let run = tr_run(&y, &f, &TrConfig::default()).unwrap();
        assert_eq!(run.status, TrStatus::Converged);
        assert_eq!(run.iterations(), 0);
    }

    #[test]
    fn failure_shrinks_radius_and_keeps_point() {
        let f = apocalypse_cost();
        let y = LiftPoint::balanced_lr(&diag(&[2., 1., 0.]), 2).unwrap();
        let it = TrIterate::new(y.clone(), &f, 10.0).unwrap();
        let cfg = TrConfig { eta: 0.99, gamma0: 10.0, ..Default::default() };
        let out = tr_iteration(&it, 0, &rebalance, &cfg).unwrap();
        if out.row.success == Some(false) {
            assert_eq!(out.next_point, y);
            assert!((out.next_gamma - 5.0).abs() < 1e-15);
        } else {
            assert!(f.value(&lift_apply(&out.next_point)) <= it.value());
        }
    }

    #[test]
    fn rho_tends_to_one_for_small_radius() {
        let target = Mat::from_row_slice(3, 4, &[1., 2., 0., 1., 0., 1., 1., 0., 2., 0., 1., 1.]);
        let f = quadratic_distance_cost(target);
        let y = LiftPoint::balanced_lr(&diag(&[1., 0.5, 0.]).insert_column(3, 0.0), 2).unwrap();
        let mut last = f64::INFINITY;
        for gamma in [1e-2, 1e-3, 1e-4] {
            let it = TrIterate::new(y.clone(), &f, gamma).unwrap();
            let out = tr_iteration(&it, 0, &rebalance, &TrConfig::default()).unwrap();
            let gap = (out.row.rho.unwrap() - 1.0).abs();
            assert!(gap <= last + 1e-12);
            last = gap;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn complexity_bound_shapes() {
        let cfg = TrConfig::default();
        let b = complexity_bound(1.0, 0.0, 2.0, 3.0, &cfg, 1e-3, 1e-2).unwrap();
        assert_eq!(b.gamma_min, 1e-6);
        assert!((b.kappa_min - 0.5 * 0.1 * 1e-12).abs() < 1e-25);
        let b2 = complexity_bound(2.0, 0.0, 2.0, 3.0, &cfg, 1e-3, 1e-2).unwrap();
        assert!((b2.success_budget / b.success_budget - 2.0).abs() < 1e-9);
        let inf = complexity_bound(1.0, 0.0, 2.0, 3.0, &cfg, f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(inf.total, 0.0);
        assert!(complexity_bound(0.0, 1.0, 0.0, 0.0, &cfg, 1.0, 1.0).is_err());
        assert_eq!(gamma_min(0.0, 0.0, &TrConfig { gamma_lo: 1.0, gamma0: 1.0, ..cfg.clone() }), 0.5);
        assert_eq!(max_consecutive_failures_bound(1.0, &cfg), 4);
    }

    #[test]
    fn escapes_the_apocalypse_on_the_lr_lift() {
        let f = apocalypse_cost();
        let y0 = LiftPoint::balanced_lr(&diag(&[2., 1., 0.]), 2).unwrap();
        let cfg = TrConfig { truncated_cg: true, gamma_hi: 1e3, ..Default::default() };
        let run = tr_run(&y0, &f, &cfg).unwrap();
        assert_eq!(run.status, TrStatus::Converged);
        assert!(run.iterations() <= 500);
        assert!(run.final_row().f <= -1.9);
        let gs: Vec<f64> = run.rows.iter().map(|r| r.f).collect();
        assert!(gs.windows(2).all(|w| w[1] <= w[0]));
        assert!(run.rows.iter().any(|r| r.step_type == Some(StepType::K2)));
    }

    #[test]
    fn invalid_config() {
        assert!(TrConfig { gamma0: 20.0, ..Default::default() }.validate().is_err());
        assert!(TrConfig { eta: 1.0, ..Default::default() }.validate().is_err());
    }
}
