//! Geometry of the bounded-rank variety `R^{m×n}_{≤r}`.
//!
//! With `X = U Σ V^T` of rank `s ≤ r`, the tangent cone at `X` is
//!
//! ```text
//! T_X = { U_s A V_s^T + U_s B^T + C V_s^T + E : U_s^T E = 0, E V_s = 0, rank E ≤ r - s }
//! ```
//!
//! and a projection of `M` onto it keeps everything outside the corner block
//! `B = (I - U_s U_s^T) M (I - V_s V_s^T)` and replaces `B` by a best rank
//! `r - s` approximation. When `s = r` the cone is a linear space and its
//! polar is the orthogonal complement; when `s < r` the polar is `{0}`.

use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::linalg::{shape_str, Mat, SvdFactors};

/// Nearest matrix of rank at most `r` in Frobenius norm.
pub fn truncated_svd_projection(m: &Mat, r: usize) -> Mat {
    if r == 0 {
        return Mat::zeros(m.nrows(), m.ncols());
    }
    // the tolerance only affects the rank count, not the truncation
    SvdFactors::new(m, crate::linalg::DEFAULT_RANK_TOL).truncate(r)
}

/// Data needed to project onto `T_X R^{m×n}_{≤r}` and onto its polar.
#[derive(Debug, Clone)]
pub struct TangentConeData {
    pub svd: SvdFactors,
    pub r: usize,
    pub m: usize,
    pub n: usize,
}

impl TangentConeData {
    /// Numerical rank `s` of the base point.
    pub fn s(&self) -> usize {
        self.svd.rank
    }

    /// True when `s = r`, so the cone is the tangent space of the rank-r manifold.
    pub fn is_linear(&self) -> bool {
        self.s() == self.r
    }

    /// `σ_r(X)`, zero when `s < r`.
    pub fn sigma_r(&self) -> f64 {
        if self.r == 0 || self.s() < self.r {
            0.0
        } else {
            self.svd.sigma_at(self.r - 1)
        }
    }

    fn u_s(&self) -> Mat {
        self.svd.u.columns(0, self.s()).into_owned()
    }

    fn v_s(&self) -> Mat {
        self.svd.v.columns(0, self.s()).into_owned()
    }

    fn check(&self, m: &Mat) -> Result<()> {
        if m.shape() != (self.m, self.n) {
            return Err(Error::shape(format!("{}x{}", self.m, self.n), shape_str(m)));
        }
        Ok(())
    }

    /// Corner block `(I - U_s U_s^T) M (I - V_s V_s^T)`.
    pub fn corner(&self, m: &Mat) -> Mat {
        let u = self.u_s();
        let v = self.v_s();
        let left = m - &u * (u.transpose() * m);
        &left - (&left * &v) * v.transpose()
    }
}

/// SVD of `X` plus the rank bound. Fails when `X` has numerical rank above `r`.
pub fn tangent_cone_at(x: &Mat, r: usize, rank_tol: f64) -> Result<TangentConeData> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::Config(format!("rank_tol must lie in (0, 1), got {rank_tol}")));
    }
    let (m, n) = x.shape();
    if r > m.min(n) {
        return Err(Error::Config(format!("rank bound {r} exceeds min({m}, {n})")));
    }
    let svd = SvdFactors::new(x, rank_tol);
    if svd.rank > r {
        return Err(Error::Infeasible { rank: svd.rank, bound: r });
    }
    Ok(TangentConeData { svd, r, m, n })
}

/// A projection of `M` onto the tangent cone and its norm
/// `sqrt(‖M - B‖² + ‖P_{≤ r-s}(B)‖²)`.
pub fn project_tangent_cone(t: &TangentConeData, m: &Mat) -> Result<(Mat, f64)> {
    t.check(m)?;
    let corner = t.corner(m);
    let outside = m - &corner;
    let kept = truncated_svd_projection(&corner, t.r - t.s());
    let norm = (outside.norm_squared() + kept.norm_squared()).sqrt();
    Ok((outside + kept, norm))
}

/// Projection of `M` onto the polar cone: the corner block when `s = r`,
/// zero otherwise.
pub fn polar_tangent_cone_projection(t: &TangentConeData, m: &Mat) -> Result<Mat> {
    t.check(m)?;
    if t.is_linear() {
        Ok(t.corner(m))
    } else {
        Ok(Mat::zeros(t.m, t.n))
    }
}

/// Stationarity measures of `f` at `X` on `R^{m×n}_{≤r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport {
    /// `‖Proj_{T_X}(-∇f(X))‖`
    pub mu1: f64,
    /// `dist(-∇f(X), (T_X)°)`
    pub mu2: f64,
    pub grad_norm: f64,
    pub sigma_r: f64,
}

pub fn stationarity_report<C: CostModel + ?Sized>(
    x: &Mat,
    r: usize,
    cost: &C,
    rank_tol: f64,
) -> Result<StationarityReport> {
    let t = tangent_cone_at(x, r, rank_tol)?;
    let neg_grad = -cost.grad(x);
    Ok(report_from(&t, &neg_grad))
}

pub(crate) fn report_from(t: &TangentConeData, neg_grad: &Mat) -> StationarityReport {
    let (_, mu1) = project_tangent_cone(t, neg_grad).expect("shape checked by caller");
    let grad_norm = neg_grad.norm();
    let mu2 = if t.is_linear() {
        (neg_grad - t.corner(neg_grad)).norm()
    } else {
        grad_norm
    };
    StationarityReport { mu1, mu2, grad_norm, sigma_r: t.sigma_r() }
}

/// Outcome of [`classify_limit_behavior`]. This is a finite-sequence heuristic:
/// thresholds are `eps` and a factor of ten around it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitBehavior {
    ApocalypseLike,
    SerendipityLike,
    Regular,
}

#[derive(Debug, Clone)]
pub struct LimitDiagnostics {
    pub behavior: LimitBehavior,
    /// `mu1` at each sequence point.
    pub sequence_mu1: Vec<f64>,
    pub limit_mu1: f64,
    /// `‖Proj_{T_{x_k}}(-∇f(limit))‖` per point: vanishes along an apocalypse.
    pub limit_gradient_proxy: Vec<f64>,
}

/// Compare stationarity along a sequence with stationarity at its limit.
///
/// Apocalypse-like: the last `⌈len/10⌉` points have `mu1 < eps` while the
/// limit has `mu1 > 10 eps`. Serendipity-like: every point has `mu1 > eps`
/// while the limit has `mu1 < eps / 10`.
pub fn classify_limit_behavior<C: CostModel + ?Sized>(
    sequence: &[Mat],
    limit: &Mat,
    r: usize,
    cost: &C,
    eps: f64,
    rank_tol: f64,
) -> Result<LimitDiagnostics> {
    if sequence.is_empty() {
        return Err(Error::Config("sequence must be nonempty".into()));
    }
    let limit_cone = tangent_cone_at(limit, r, rank_tol)?;
    let limit_neg_grad = -cost.grad(limit);
    let limit_mu1 = project_tangent_cone(&limit_cone, &limit_neg_grad)?.1;

    let mut sequence_mu1 = Vec::with_capacity(sequence.len());
    let mut proxy = Vec::with_capacity(sequence.len());
    for x in sequence {
        let t = tangent_cone_at(x, r, rank_tol)?;
        sequence_mu1.push(project_tangent_cone(&t, &-cost.grad(x))?.1);
        proxy.push(project_tangent_cone(&t, &limit_neg_grad)?.1);
    }

    let tail = sequence.len().div_ceil(10);
    let tail_small = sequence_mu1[sequence.len() - tail..].iter().all(|&m| m < eps);
    let behavior = if tail_small && limit_mu1 > 10.0 * eps {
        LimitBehavior::ApocalypseLike
    } else if sequence_mu1.iter().all(|&m| m > eps) && limit_mu1 < eps / 10.0 {
        LimitBehavior::SerendipityLike
    } else {
        LimitBehavior::Regular
    };
    Ok(LimitDiagnostics { behavior, sequence_mu1, limit_mu1, limit_gradient_proxy: proxy })
}
