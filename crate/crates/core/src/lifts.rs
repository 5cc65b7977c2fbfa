//! Smooth lifts of the bounded-rank variety and calculus of their pullbacks.
//!
//! Two parameterizations are supported:
//!
//! * `Lr`: `(L, R) ∈ R^{m×r} × R^{n×r}`, `φ(L, R) = L R^T`, Euclidean metric,
//!   retraction `y + s`, rebalancing to the balanced factorization
//!   `(U Σ^½, V Σ^½)`.
//! * `Stiefel`: `(U, W) ∈ St(m, r) × R^{n×r}`, `φ(U, W) = U W^T`, metric
//!   inherited from the embedding, polar retraction on the `U` factor,
//!   identity rebalancing.
//!
//! Both retractions are second order, so the Hessian of `g ∘ R_y` at the
//! origin equals the Riemannian Hessian of `g = f ∘ φ` at `y`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::linalg::{
    complete_orthonormal, op_norm, polar_factor, sym, sym_eigen_ascending, Mat, SvdFactors,
};
use crate::lowrank::{project_tangent_cone, tangent_cone_at};

/// Largest tangent-space dimension for which a dense Hessian is built.
pub const DENSE_HESSIAN_LIMIT: usize = 400;
/// Tolerance on `U^T ΔU + ΔU^T U` for Stiefel tangent vectors.
pub const TANGENCY_TOL: f64 = 1e-8;
/// Relative tolerance on `L^T L - R^T R` for balanced LR points.
pub const BALANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftKind {
    Lr,
    Stiefel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LiftPoint {
    Lr { l: Mat, r: Mat },
    Stiefel { u: Mat, w: Mat },
}

/// Tangent vector: directions for the left (`m×r`) and right (`n×r`) factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub left: Mat,
    pub right: Mat,
}

impl Tangent {
    pub fn new(left: Mat, right: Mat) -> Self {
        Tangent { left, right }
    }

    pub fn zeros(m: usize, n: usize, r: usize) -> Self {
        Tangent { left: Mat::zeros(m, r), right: Mat::zeros(n, r) }
    }

    pub fn inner(&self, other: &Tangent) -> f64 {
        self.left.dot(&other.left) + self.right.dot(&other.right)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, a: f64) -> Tangent {
        Tangent { left: &self.left * a, right: &self.right * a }
    }
}

impl Add for &Tangent {
    type Output = Tangent;
    fn add(self, o: &Tangent) -> Tangent {
        Tangent { left: &self.left + &o.left, right: &self.right + &o.right }
    }
}

impl Sub for &Tangent {
    type Output = Tangent;
    fn sub(self, o: &Tangent) -> Tangent {
        Tangent { left: &self.left - &o.left, right: &self.right - &o.right }
    }
}

impl Neg for &Tangent {
    type Output = Tangent;
    fn neg(self) -> Tangent {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Tangent {
    type Output = Tangent;
    fn mul(self, a: f64) -> Tangent {
        self.scale(a)
    }
}

/// `Z - U sym(U^T Z)`: orthogonal projection onto `T_U St(m, r)`.
fn stiefel_project(u: &Mat, z: &Mat) -> Mat {
    z - u * sym(&(u.transpose() * z))
}

impl LiftPoint {
    pub fn lr(l: Mat, r: Mat) -> Result<Self> {
        if l.ncols() != r.ncols() {
            return Err(Error::shape(format!("{} columns", l.ncols()), format!("{} columns", r.ncols())));
        }
        Ok(LiftPoint::Lr { l, r })
    }

    pub fn stiefel(u: Mat, w: Mat) -> Result<Self> {
        if u.ncols() != w.ncols() {
            return Err(Error::shape(format!("{} columns", u.ncols()), format!("{} columns", w.ncols())));
        }
        let k = u.ncols();
        let defect = (u.transpose() * &u - Mat::identity(k, k)).norm();
        if defect > 1e-10 {
            return Err(Error::Config(format!("U does not have orthonormal columns (defect {defect:e})")));
        }
        Ok(LiftPoint::Stiefel { u, w })
    }

    /// Balanced factorization of `x` with `r` columns.
    pub fn balanced_lr(x: &Mat, r: usize) -> Result<Self> {
        check_rank_bound(x, r)?;
        Ok(balanced_from_svd(&SvdFactors::new(x, crate::linalg::DEFAULT_RANK_TOL), r))
    }

    /// `U` = leading `r` left singular vectors of `x`, completed to `r`
    /// orthonormal columns, and `W = x^T U`.
    pub fn stiefel_from_matrix(x: &Mat, r: usize) -> Result<Self> {
        check_rank_bound(x, r)?;
        let svd = SvdFactors::new(x, crate::linalg::DEFAULT_RANK_TOL);
        let lead = svd.u.columns(0, svd.rank.min(r)).into_owned();
        let u = complete_orthonormal(&lead, r);
        let w = x.transpose() * &u;
        Ok(LiftPoint::Stiefel { u, w })
    }

    /// Lift of `x` in the requested parameterization.
    pub fn from_matrix(kind: LiftKind, x: &Mat, r: usize) -> Result<Self> {
        match kind {
            LiftKind::Lr => Self::balanced_lr(x, r),
            LiftKind::Stiefel => Self::stiefel_from_matrix(x, r),
        }
    }

    pub fn kind(&self) -> LiftKind {
        match self {
            LiftPoint::Lr { .. } => LiftKind::Lr,
            LiftPoint::Stiefel { .. } => LiftKind::Stiefel,
        }
    }

    /// `(m, n, r)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let (a, b) = self.factors();
        (a.nrows(), b.nrows(), a.ncols())
    }

    pub fn factors(&self) -> (&Mat, &Mat) {
        match self {
            LiftPoint::Lr { l, r } => (l, r),
            LiftPoint::Stiefel { u, w } => (u, w),
        }
    }

    /// Squared norm of the parameter pair.
    pub fn norm_squared(&self) -> f64 {
        let (a, b) = self.factors();
        a.norm_squared() + b.norm_squared()
    }

    /// Dimension of the tangent space.
    pub fn tangent_dim(&self) -> usize {
        let (m, n, r) = self.dims();
        match self {
            LiftPoint::Lr { .. } => (m + n) * r,
            LiftPoint::Stiefel { .. } => m * r - r * (r + 1) / 2 + n * r,
        }
    }

    pub fn retract(&self, s: &Tangent) -> LiftPoint {
        match self {
            LiftPoint::Lr { l, r } => LiftPoint::Lr { l: l + &s.left, r: r + &s.right },
            LiftPoint::Stiefel { u, w } => LiftPoint::Stiefel { u: polar_factor(&(u + &s.left)), w: w + &s.right },
        }
    }

    /// Orthogonal projection of an ambient pair onto the tangent space.
    pub fn project_tangent(&self, t: &Tangent) -> Tangent {
        match self {
            LiftPoint::Lr { .. } => t.clone(),
            LiftPoint::Stiefel { u, .. } => Tangent { left: stiefel_project(u, &t.left), right: t.right.clone() },
        }
    }

    /// `‖U^T ΔU + ΔU^T U‖`, zero for LR points.
    pub fn tangency_defect(&self, t: &Tangent) -> f64 {
        match self {
            LiftPoint::Lr { .. } => 0.0,
            LiftPoint::Stiefel { u, .. } => {
                let a = u.transpose() * &t.left;
                (&a + a.transpose()).norm()
            }
        }
    }

    fn check_tangent(&self, t: &Tangent) -> Result<()> {
        let (m, n, r) = self.dims();
        if t.left.shape() != (m, r) || t.right.shape() != (n, r) {
            return Err(Error::shape(
                format!("({m}x{r}, {n}x{r})"),
                format!("({}x{}, {}x{})", t.left.nrows(), t.left.ncols(), t.right.nrows(), t.right.ncols()),
            ));
        }
        let defect = self.tangency_defect(t);
        if defect > TANGENCY_TOL * t.left.norm().max(1.0) {
            return Err(Error::NotTangent { defect });
        }
        Ok(())
    }

    /// `‖L^T L - R^T R‖`, zero for Stiefel points.
    pub fn balance_gap(&self) -> f64 {
        match self {
            LiftPoint::Lr { l, r } => (l.transpose() * l - r.transpose() * r).norm(),
            LiftPoint::Stiefel { .. } => 0.0,
        }
    }
}

fn check_rank_bound(x: &Mat, r: usize) -> Result<()> {
    let (m, n) = x.shape();
    if r == 0 || r > m.min(n) {
        return Err(Error::Config(format!("rank bound {r} must lie in [1, min({m}, {n})]")));
    }
    Ok(())
}

fn balanced_from_svd(svd: &SvdFactors, r: usize) -> LiftPoint {
    let mut l = svd.u.columns(0, r).into_owned();
    let mut rr = svd.v.columns(0, r).into_owned();
    for j in 0..r {
        let s = svd.sigma_at(j).sqrt();
        l.column_mut(j).scale_mut(s);
        rr.column_mut(j).scale_mut(s);
    }
    LiftPoint::Lr { l, r: rr }
}

/// `φ(y)`.
pub fn lift_apply(y: &LiftPoint) -> Mat {
    let (a, b) = y.factors();
    a * b.transpose()
}

/// Rebalancing map: balanced factorization of `φ(y)` for LR, identity for Stiefel.
pub fn rebalance(y: &LiftPoint) -> LiftPoint {
    match y {
        LiftPoint::Lr { l, .. } => {
            let x = lift_apply(y);
            balanced_from_svd(&SvdFactors::new(&x, crate::linalg::DEFAULT_RANK_TOL), l.ncols())
        }
        LiftPoint::Stiefel { .. } => y.clone(),
    }
}

/// Pullback `g = f ∘ φ` around a fixed point `y`, with `φ(y)` and `∇f(φ(y))` cached.
pub struct PullbackModel<'a, C: CostModel + ?Sized> {
    pub y: LiftPoint,
    pub cost: &'a C,
    pub x: Mat,
    pub ambient_grad: Mat,
    value: f64,
}

impl<'a, C: CostModel + ?Sized> PullbackModel<'a, C> {
    pub fn new(y: LiftPoint, cost: &'a C) -> Result<Self> {
        let x = lift_apply(&y);
        if let Some(shape) = cost.shape() {
            if shape != x.shape() {
                return Err(Error::shape(format!("{}x{}", shape.0, shape.1), crate::linalg::shape_str(&x)));
            }
        }
        let ambient_grad = cost.grad(&x);
        let value = cost.value(&x);
        Ok(PullbackModel { y, cost, x, ambient_grad, value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Riemannian gradient of `g` at `y`.
    pub fn grad(&self) -> Tangent {
        let g = &self.ambient_grad;
        match &self.y {
            LiftPoint::Lr { l, r } => Tangent { left: g * r, right: g.transpose() * l },
            LiftPoint::Stiefel { u, w } => Tangent {
                left: stiefel_project(u, &(g * w)),
                right: g.transpose() * u,
            },
        }
    }

    /// `∇²ĝ_y(0)[s]` for `ĝ = g ∘ R_y`.
    pub fn hess_vec(&self, s: &Tangent) -> Result<Tangent> {
        self.y.check_tangent(s)?;
        Ok(self.hess_vec_unchecked(s))
    }

    fn hess_vec_unchecked(&self, s: &Tangent) -> Tangent {
        let g = &self.ambient_grad;
        let (a, b) = self.y.factors();
        let delta = &s.left * b.transpose() + a * s.right.transpose();
        let h = self.cost.hess_vec(&self.x, &delta);
        let left = &h * b + g * &s.right;
        let right = h.transpose() * a + g.transpose() * &s.left;
        match &self.y {
            LiftPoint::Lr { .. } => Tangent { left, right },
            LiftPoint::Stiefel { u, w } => {
                let curvature = &s.left * sym(&(u.transpose() * g * w));
                Tangent { left: stiefel_project(u, &(left - curvature)), right }
            }
        }
    }

    pub fn retract(&self, s: &Tangent) -> LiftPoint {
        self.y.retract(s)
    }

    /// Second-order model `g(y) + ⟨s, ∇g⟩ + ½⟨s, H s⟩`, given `H s`.
    pub fn model_value(&self, grad: &Tangent, s: &Tangent, hs: &Tangent) -> f64 {
        self.value + s.inner(grad) + 0.5 * s.inner(hs)
    }

    /// Hessian materialized in an orthonormal basis of the tangent space.
    pub fn dense_hessian(&self) -> Result<DenseHessian> {
        let dim = self.y.tangent_dim();
        if dim > DENSE_HESSIAN_LIMIT {
            return Err(Error::TooLarge { dim, limit: DENSE_HESSIAN_LIMIT });
        }
        let basis = tangent_basis(&self.y);
        debug_assert_eq!(basis.len(), dim);
        let images: Vec<Tangent> = basis.iter().map(|b| self.hess_vec_unchecked(b)).collect();
        let mut matrix = Mat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                matrix[(i, j)] = basis[i].inner(&images[j]);
            }
        }
        Ok(DenseHessian { matrix: sym(&matrix), basis })
    }
}

/// Symmetric Hessian matrix and the orthonormal tangent basis it is expressed in.
#[derive(Debug, Clone)]
pub struct DenseHessian {
    pub matrix: Mat,
    pub basis: Vec<Tangent>,
}

impl DenseHessian {
    /// Smallest eigenvalue and a unit eigenvector, or `None` for a zero-dimensional space.
    pub fn min_eigenpair(&self) -> Option<(f64, Tangent)> {
        let first = self.basis.first()?;
        let (vals, vecs) = sym_eigen_ascending(&self.matrix);
        let mut e = first.scale(0.0);
        for (i, b) in self.basis.iter().enumerate() {
            e = &e + &b.scale(vecs[(i, 0)]);
        }
        let nrm = e.norm();
        Some((vals[0], e.scale(1.0 / nrm)))
    }

    /// Operator norm of the Hessian.
    pub fn op_norm(&self) -> f64 {
        if self.basis.is_empty() {
            return 0.0;
        }
        let (vals, _) = sym_eigen_ascending(&self.matrix);
        vals[0].abs().max(vals[vals.len() - 1].abs())
    }
}

/// Orthonormal basis of `T_y M` in the metric of the lift.
pub fn tangent_basis(y: &LiftPoint) -> Vec<Tangent> {
    let (m, n, r) = y.dims();
    let mut basis = Vec::with_capacity(y.tangent_dim());
    let unit = |rows: usize, i: usize, j: usize| {
        let mut e = Mat::zeros(rows, r);
        e[(i, j)] = 1.0;
        e
    };
    match y {
        LiftPoint::Lr { .. } => {
            for j in 0..r {
                for i in 0..m {
                    basis.push(Tangent::new(unit(m, i, j), Mat::zeros(n, r)));
                }
            }
        }
        LiftPoint::Stiefel { u, .. } => {
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..r {
                for j in (i + 1)..r {
                    let mut skew = Mat::zeros(r, r);
                    skew[(i, j)] = inv_sqrt2;
                    skew[(j, i)] = -inv_sqrt2;
                    basis.push(Tangent::new(u * skew, Mat::zeros(n, r)));
                }
            }
            let full = complete_orthonormal(u, m);
            for a in r..m {
                for j in 0..r {
                    let mut left = Mat::zeros(m, r);
                    left.set_column(j, &full.column(a));
                    basis.push(Tangent::new(left, Mat::zeros(n, r)));
                }
            }
        }
    }
    for j in 0..r {
        for i in 0..n {
            basis.push(Tangent::new(Mat::zeros(m, r), unit(n, i, j)));
        }
    }
    basis
}

pub fn pullback_grad<C: CostModel + ?Sized>(y: &LiftPoint, cost: &C) -> Result<Tangent> {
    Ok(PullbackModel::new(y.clone(), cost)?.grad())
}

pub fn pullback_hess_vec<C: CostModel + ?Sized>(y: &LiftPoint, cost: &C, s: &Tangent) -> Result<Tangent> {
    PullbackModel::new(y.clone(), cost)?.hess_vec(s)
}

/// Bounds on stationarity of `X = L R^T` implied by approximate 2-criticality
/// of a balanced `(L, R)`, together with the observed quantities they bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Upper bound on `‖∇f(X)‖_op`.
    pub bound_op: f64,
    /// Upper bound on `‖Proj_{T_X}(-∇f(X))‖`.
    pub bound_proj: f64,
    pub sigma_r: f64,
    pub grad_rank: usize,
    pub grad_op_norm: f64,
    pub mu1: f64,
}

/// Bounds for a balanced LR point that is `(eps1, eps2)`-approximately
/// 2-critical: `eps2 + 2 L_f σ_r` on the operator norm of the gradient and
/// `min(sqrt(2/σ_r) eps1, sqrt(rank ∇f) (eps2 + 2 L_f σ_r))` on the
/// projected gradient. The first term of the minimum is infinite when
/// `σ_r ≤ rank_tol σ_1`.
pub fn certify_stationarity<C: CostModel + ?Sized>(
    y: &LiftPoint,
    cost: &C,
    eps1: f64,
    eps2: f64,
    rank_tol: f64,
) -> Result<Certificate> {
    let LiftPoint::Lr { l, .. } = y else {
        return Err(Error::Config("certification requires an LR point".into()));
    };
    if !(eps1 >= 0.0 && eps2 >= 0.0) {
        return Err(Error::Config("eps1 and eps2 must be nonnegative".into()));
    }
    let lipschitz = cost.lipschitz_grad().ok_or(Error::MissingLipschitz)?;
    let gap = y.balance_gap();
    if gap > BALANCE_TOL * (l.transpose() * l).norm().max(1.0) {
        return Err(Error::Unbalanced { gap });
    }
    let r = l.ncols();
    let x = lift_apply(y);
    let svd = SvdFactors::new(&x, rank_tol);
    let sigma_r = svd.sigma_at(r - 1);
    let grad = cost.grad(&x);
    let grad_svd = SvdFactors::new(&grad, rank_tol);
    let grad_rank = grad_svd.rank;

    let bound_op = eps2 + 2.0 * lipschitz * sigma_r;
    let first = if sigma_r <= rank_tol * svd.sigma_max() || sigma_r == 0.0 {
        f64::INFINITY
    } else {
        (2.0 / sigma_r).sqrt() * eps1
    };
    let bound_proj = first.min((grad_rank as f64).sqrt() * bound_op);

    let cone = tangent_cone_at(&x, r, rank_tol)?;
    let (_, mu1) = project_tangent_cone(&cone, &-&grad)?;
    Ok(Certificate { bound_op, bound_proj, sigma_r, grad_rank, grad_op_norm: op_norm(&grad), mu1 })
}

/// Numerical rank of `x` under `rank_tol`.
pub fn matrix_rank(x: &Mat, rank_tol: f64) -> usize {
    SvdFactors::new(x, rank_tol).rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{apocalypse_cost, linear_cost, quadratic_distance_cost};
    use crate::linalg::{diag, nuclear_norm, Vector, DEFAULT_RANK_TOL};

    fn sample_lr() -> LiftPoint {
        LiftPoint::lr(
            Mat::from_row_slice(3, 2, &[1.0, 0.2, -0.3, 0.8, 0.5, 0.1]),
            Mat::from_row_slice(4, 2, &[0.4, -1.0, 0.9, 0.3, 0.0, 0.7, -0.2, 0.5]),
        )
        .unwrap()
    }

    #[test]
    fn apply_and_rebalance() {
        let y = sample_lr();
        let x = lift_apply(&y);
        let b = rebalance(&y);
        assert!((lift_apply(&b) - &x).norm() < 1e-12);
        assert!(b.balance_gap() < 1e-12);
        assert!((b.norm_squared() - 2.0 * nuclear_norm(&x)).abs() < 1e-12);
        assert!(b.norm_squared() <= 2.0 * 2f64.sqrt() * x.norm() + 1e-12);

        let zero = LiftPoint::lr(Mat::zeros(3, 2), Mat::zeros(4, 2)).unwrap();
        assert_eq!(lift_apply(&zero), Mat::zeros(3, 4));
    }

    #[test]
    fn stiefel_point_reproduces_matrix() {
        let x = diag(&[2., 1., 0.]);
        let y = LiftPoint::stiefel_from_matrix(&x, 2).unwrap();
        assert!((lift_apply(&y) - &x).norm() < 1e-12);
        let (_, w) = y.factors();
        assert!((w.norm() - x.norm()).abs() < 1e-12);
        assert_eq!(rebalance(&y), y);
        assert!(LiftPoint::stiefel(Mat::from_element(3, 1, 1.0), Mat::zeros(3, 1)).is_err());
    }

    #[test]
    fn basis_is_orthonormal_and_tangent() {
        let ys = [
            sample_lr(),
            LiftPoint::stiefel_from_matrix(&Mat::from_row_slice(3, 3, &[1., 2., 0., 0., 1., 1., 1., 0., 1.]), 2).unwrap(),
        ];
        for y in &ys {
            let basis = tangent_basis(y);
            assert_eq!(basis.len(), y.tangent_dim());
            for (i, a) in basis.iter().enumerate() {
                assert!(y.tangency_defect(a) < 1e-12);
                for (j, b) in basis.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((a.inner(b) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_tangent_direction_is_rejected() {
        let y = LiftPoint::stiefel_from_matrix(&diag(&[2., 1., 0.]), 2).unwrap();
        let (u, _) = y.factors();
        let bad = Tangent::new(u.clone(), Mat::zeros(3, 2));
        let f = apocalypse_cost();
        assert!(matches!(pullback_hess_vec(&y, &f, &bad), Err(Error::NotTangent { .. })));
    }

    #[test]
    fn corner_point_gradient_norm() {
        let eps: f64 = 1e-3;
        let a = eps.powf(1.0 / 3.0);
        let mut l = Mat::zeros(4, 1);
        l[(0, 0)] = a;
        let mut r = Mat::zeros(5, 1);
        r[(0, 0)] = a;
        let y = LiftPoint::lr(l, r).unwrap();
        let f = quadratic_distance_cost(Mat::zeros(4, 5));
        let g = pullback_grad(&y, &f).unwrap();
        assert!((g.norm() - 2f64.sqrt() * eps).abs() < 1e-15);
    }

    #[test]
    fn linear_cost_hessian_form() {
        let u = Vector::from_vec(vec![1., -1., 2.]);
        let v = Vector::from_vec(vec![0., 1., 1., -1.]);
        let f = linear_cost(u.clone(), v.clone());
        let y = sample_lr();
        let s = Tangent::new(
            Mat::from_row_slice(3, 2, &[0.1, 0.5, -0.2, 0.3, 0.7, -0.4]),
            Mat::from_row_slice(4, 2, &[1.0, 0.0, 0.2, -0.3, 0.6, 0.1, -0.5, 0.9]),
        );
        let hs = pullback_hess_vec(&y, &f, &s).unwrap();
        let expected = 2.0 * (&u * v.transpose()).dot(&(&s.left * s.right.transpose()));
        assert!((s.inner(&hs) - expected).abs() < 1e-12);
    }

    #[test]
    fn escape_direction_at_apocalyptic_limit() {
        let f = apocalypse_cost();
        let y = LiftPoint::balanced_lr(&diag(&[1., 0., 0.]), 2).unwrap();
        let model = PullbackModel::new(y, &f).unwrap();
        // L w = 0 for w = e2, so ΔL = e3 w^T, ΔR = e3 w^T gives Δ = 0 and the
        // form reduces to 2⟨∇f, ΔL ΔR^T⟩ = 2 ∇f[2,2] = -2
        let mut dl = Mat::zeros(3, 2);
        dl[(2, 1)] = 1.0;
        let s = Tangent::new(dl.clone(), dl);
        let hs = model.hess_vec(&s).unwrap();
        assert!((s.inner(&hs) + 2.0).abs() < 1e-14);
        let dense = model.dense_hessian().unwrap();
        assert_eq!(dense.matrix.nrows(), 12);
        let (lambda, e) = dense.min_eigenpair().unwrap();
        assert!(lambda <= -1.0 + 1e-12);
        assert!((e.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dense_hessian_size_limit() {
        let f = quadratic_distance_cost(Mat::zeros(150, 150));
        let y = LiftPoint::balanced_lr(&Mat::zeros(150, 150), 2).unwrap();
        let model = PullbackModel::new(y, &f).unwrap();
        assert!(matches!(model.dense_hessian(), Err(Error::TooLarge { dim: 600, .. })));
    }

    #[test]
    fn certification_errors_and_exact_point() {
        let target = diag(&[3., 1., 0.]);
        let f = quadratic_distance_cost(target.clone());
        let y = LiftPoint::balanced_lr(&target, 2).unwrap();
        let cert = certify_stationarity(&y, &f, 0.0, 0.0, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(cert.bound_proj, 0.0);
        assert!((cert.bound_op - 2.0).abs() < 1e-12);

        let unbalanced = LiftPoint::lr(Mat::from_element(3, 1, 2.0), Mat::from_element(3, 1, 0.5)).unwrap();
        let g = quadratic_distance_cost(Mat::zeros(3, 3));
        assert!(matches!(
            certify_stationarity(&unbalanced, &g, 0.1, 0.1, DEFAULT_RANK_TOL),
            Err(Error::Unbalanced { .. })
        ));
        let no_l = crate::costs::ApocalypseCost::with_lipschitz(None);
        let y3 = LiftPoint::balanced_lr(&diag(&[1., 0., 0.]), 2).unwrap();
        assert!(matches!(
            certify_stationarity(&y3, &no_l, 0.1, 0.1, DEFAULT_RANK_TOL),
            Err(Error::MissingLipschitz)
        ));
        assert_eq!(matrix_rank(&target, DEFAULT_RANK_TOL), 2);
    }
}
