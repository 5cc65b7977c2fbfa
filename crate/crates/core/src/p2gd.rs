//! Projected-projected gradient descent with Armijo backtracking.
//!
//! Each step projects `-∇f(X)` onto the tangent cone, moves along it and maps
//! back to the variety by truncated SVD. The step size restarts from
//! `alpha_init` at every iteration.

use serde::{Deserialize, Serialize};

use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::linalg::{Mat, DEFAULT_RANK_TOL};
use crate::lowrank::{project_tangent_cone, report_from, tangent_cone_at, truncated_svd_projection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct P2gdConfig {
    pub tau: f64,
    pub alpha_init: f64,
    pub backtrack_factor: f64,
    pub max_iters: usize,
    /// Zero disables the stationarity stop.
    pub stop_mu1: f64,
    pub max_backtracks: usize,
    pub rank_tol: f64,
    /// Store every iterate in the trace.
    pub keep_iterates: bool,
}

impl Default for P2gdConfig {
    fn default() -> Self {
        P2gdConfig {
            tau: 1e-4,
            alpha_init: 1.0,
            backtrack_factor: 0.5,
            max_iters: 1000,
            stop_mu1: 1e-8,
            max_backtracks: 50,
            rank_tol: DEFAULT_RANK_TOL,
            keep_iterates: false,
        }
    }
}

impl P2gdConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.tau) {
            return Err(Error::Config(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.alpha_init > 0.0 && self.alpha_init.is_finite()) {
            return Err(Error::Config(format!("alpha_init must be positive, got {}", self.alpha_init)));
        }
        if !open_unit(self.backtrack_factor) {
            return Err(Error::Config(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.max_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::Config("max_iters and max_backtracks must be positive".into()));
        }
        if !(self.stop_mu1 >= 0.0) {
            return Err(Error::Config(format!("stop_mu1 must be nonnegative, got {}", self.stop_mu1)));
        }
        if !open_unit(self.rank_tol) {
            return Err(Error::Config(format!("rank_tol must lie in (0, 1), got {}", self.rank_tol)));
        }
        Ok(())
    }
}

/// Outcome of one backtracking line search.
#[derive(Debug, Clone)]
pub struct P2gdStep {
    pub x_next: Mat,
    /// Last trial step size.
    pub alpha: f64,
    pub accepted: bool,
    pub backtracks: usize,
    /// `f(X) - f(X_next)`.
    pub decrease: f64,
    /// `‖Proj_{T_X}(-∇f(X))‖`.
    pub mu1: f64,
}

pub fn p2gd_step<C: CostModel + ?Sized>(x: &Mat, r: usize, cost: &C, cfg: &P2gdConfig) -> Result<P2gdStep> {
    let t = tangent_cone_at(x, r, cfg.rank_tol)?;
    let (dir, mu1) = project_tangent_cone(&t, &-cost.grad(x))?;
    step_along(x, r, cost, cfg, &dir, mu1)
}

fn step_along<C: CostModel + ?Sized>(
    x: &Mat,
    r: usize,
    cost: &C,
    cfg: &P2gdConfig,
    dir: &Mat,
    mu1: f64,
) -> Result<P2gdStep> {
    if mu1 == 0.0 {
        return Ok(P2gdStep {
            x_next: x.clone(),
            alpha: cfg.alpha_init,
            accepted: true,
            backtracks: 0,
            decrease: 0.0,
            mu1,
        });
    }
    let f0 = cost.value(x);
    let mut alpha = cfg.alpha_init;
    for backtracks in 0..=cfg.max_backtracks {
        let candidate = truncated_svd_projection(&(x + dir * alpha), r);
        let decrease = f0 - cost.value(&candidate);
        if decrease >= cfg.tau * alpha * mu1 * mu1 {
            return Ok(P2gdStep { x_next: candidate, alpha, accepted: true, backtracks, decrease, mu1 });
        }
        if backtracks < cfg.max_backtracks {
            alpha *= cfg.backtrack_factor;
        }
    }
    Ok(P2gdStep {
        x_next: x.clone(),
        alpha,
        accepted: false,
        backtracks: cfg.max_backtracks,
        decrease: 0.0,
        mu1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P2gdStatus {
    ReachedStopMu1,
    MaxIters,
    LineSearchFailed,
}

/// State at `X_k` and the step taken from it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct P2gdTraceRow {
    pub iter: usize,
    pub f: f64,
    pub mu1: f64,
    pub sigma_r: f64,
    pub alpha: Option<f64>,
    pub accepted: Option<bool>,
    pub backtracks: Option<usize>,
    pub decrease: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct P2gdTrace {
    pub rows: Vec<P2gdTraceRow>,
    pub status: P2gdStatus,
    pub final_x: Mat,
    /// `X_0, X_1, ...` when `keep_iterates` is set, otherwise empty.
    pub iterates: Vec<Mat>,
}

impl P2gdTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.rows.iter().filter(|r| r.alpha.is_some()).count()
    }
}

pub fn p2gd_run<C: CostModel + ?Sized>(x0: &Mat, r: usize, cost: &C, cfg: &P2gdConfig) -> Result<P2gdTrace> {
    cfg.validate()?;
    if let Some(shape) = cost.shape() {
        if shape != x0.shape() {
            return Err(Error::shape(format!("{}x{}", shape.0, shape.1), crate::linalg::shape_str(x0)));
        }
    }
    let mut x = x0.clone();
    let mut rows = Vec::new();
    let mut iterates = Vec::new();
    let mut k = 0;
    let status = loop {
        if cfg.keep_iterates {
            iterates.push(x.clone());
        }
        let t = tangent_cone_at(&x, r, cfg.rank_tol)?;
        let neg_grad = -cost.grad(&x);
        let report = report_from(&t, &neg_grad);
        let mut row = P2gdTraceRow {
            iter: k,
            f: cost.value(&x),
            mu1: report.mu1,
            sigma_r: report.sigma_r,
            alpha: None,
            accepted: None,
            backtracks: None,
            decrease: None,
        };
        if cfg.stop_mu1 > 0.0 && report.mu1 <= cfg.stop_mu1 {
            rows.push(row);
            break P2gdStatus::ReachedStopMu1;
        }
        if k == cfg.max_iters {
            rows.push(row);
            break P2gdStatus::MaxIters;
        }
        let (dir, mu1) = project_tangent_cone(&t, &neg_grad)?;
        let step = step_along(&x, r, cost, cfg, &dir, mu1)?;
        row.alpha = Some(step.alpha);
        row.accepted = Some(step.accepted);
        row.backtracks = Some(step.backtracks);
        row.decrease = Some(step.decrease);
        rows.push(row);
        if !step.accepted {
            break P2gdStatus::LineSearchFailed;
        }
        x = step.x_next;
        k += 1;
    };
    Ok(P2gdTrace { rows, status, final_x: x, iterates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{apocalypse_cost, quadratic_distance_cost};
    use crate::linalg::diag;

    fn canned() -> P2gdConfig {
        P2gdConfig { tau: 0.2, alpha_init: 1.6, stop_mu1: 0.0, max_iters: 30, ..Default::default() }
    }

    #[test]
    fn one_step_matches_closed_form() {
        let f = apocalypse_cost();
        let step = p2gd_step(&diag(&[2., 1., 0.]), 2, &f, &canned()).unwrap();
        assert!(step.accepted);
        assert_eq!(step.backtracks, 0);
        assert!((step.x_next - diag(&[0.4, 0.6, 0.])).norm() < 1e-14);
        // decrease is 2/5 while tau * alpha * mu1^2 is 17/50
        assert!((step.decrease - 0.4).abs() < 1e-14);
        assert!((0.2 * 1.6 * step.mu1 * step.mu1 - 0.34).abs() < 1e-14);
    }

    #[test]
    fn stationary_point_is_fixed() {
        let x0 = diag(&[1., 0.5, 0.]);
        let q = quadratic_distance_cost(x0.clone());
        let step = p2gd_step(&x0, 2, &q, &P2gdConfig::default()).unwrap();
        assert!(step.accepted);
        assert_eq!(step.x_next, x0);
    }

    #[test]
    fn runs_to_stop_on_apocalypse() {
        let f = apocalypse_cost();
        let cfg = P2gdConfig { stop_mu1: 1e-6, max_iters: 200, ..canned() };
        let trace = p2gd_run(&diag(&[2., 1., 0.]), 2, &f, &cfg).unwrap();
        assert_eq!(trace.status, P2gdStatus::ReachedStopMu1);
        assert!((trace.final_x.clone() - diag(&[1., 0., 0.])).norm() < 1e-5);
        let fs: Vec<f64> = trace.rows.iter().map(|r| r.f).collect();
        assert!(fs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn line_search_failure_keeps_point() {
        let x0 = diag(&[2., 1., 0.]);
        let f = apocalypse_cost();
        // huge step overshoots and the tiny budget cannot recover
        let cfg = P2gdConfig { alpha_init: 1e3, max_backtracks: 1, ..canned() };
        let trace = p2gd_run(&x0, 2, &f, &cfg).unwrap();
        assert_eq!(trace.status, P2gdStatus::LineSearchFailed);
        assert_eq!(trace.final_x, x0);
    }

    #[test]
    fn invalid_configs() {
        let bad = P2gdConfig { tau: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = P2gdConfig { backtrack_factor: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let f = apocalypse_cost();
        assert!(p2gd_run(&Mat::zeros(2, 2), 1, &f, &P2gdConfig::default()).is_err());
    }
}
