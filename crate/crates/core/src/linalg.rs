//! Dense linear algebra helpers shared by every module.
//!
//! All matrices are `nalgebra::DMatrix<f64>`. The singular value
//! decomposition here fixes one global convention so that every map built
//! on top of it (metric projection, rebalancing, HOSVD, TT-SVD) is a
//! deterministic function of its input:
//!
//! * singular values are sorted nonincreasing, ties keep the order produced
//!   by the backend;
//! * each left singular vector is flipped so that its largest-magnitude
//!   entry is positive (first index on ties), and the matching right
//!   singular vector follows.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative threshold under which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Environment variable overriding [`DEFAULT_RANK_TOL`].
pub const RANK_TOL_ENV: &str = "APOCALIFT_RANK_TOL";

/// Rank tolerance from the environment, falling back to the default.
pub fn rank_tol_from_env() -> f64 {
    std::env::var(RANK_TOL_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| *t > 0.0 && *t < 1.0)
        .unwrap_or(DEFAULT_RANK_TOL)
}

/// Thin SVD `X = U diag(sigma) V^T` with `k = min(m, n)` triples and a
/// numerical rank.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Mat,
    pub sigma: Vector,
    pub v: Mat,
    /// Number of singular values above `rank_tol * sigma_1`.
    pub rank: usize,
}

impl SvdFactors {
    pub fn new(x: &Mat, rank_tol: f64) -> Self {
        let (m, n) = x.shape();
        let k = m.min(n);
        if k == 0 {
            return SvdFactors {
                u: Mat::zeros(m, 0),
                sigma: Vector::zeros(0),
                v: Mat::zeros(n, 0),
                rank: 0,
            };
        }
        let (mut u, s_raw, mut v) = thin_svd(x);
        let mut sigma = Vector::zeros(k);
        for j in 0..k {
            sigma[j] = s_raw[j].max(0.0);
            if sign_of_dominant(u.column(j).as_slice()) < 0.0 {
                u.column_mut(j).neg_mut();
                v.column_mut(j).neg_mut();
            }
        }

        let rank = numerical_rank(sigma.as_slice(), rank_tol);
        SvdFactors { u, sigma, v, rank }
    }

    /// i-th singular value (0-based), zero beyond the stored ones.
    pub fn sigma_at(&self, i: usize) -> f64 {
        if i < self.sigma.len() {
            self.sigma[i]
        } else {
            0.0
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_at(0)
    }

    /// Sum of the first `r` rank-one terms.
    pub fn truncate(&self, r: usize) -> Mat {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let r = r.min(self.sigma.len());
        let mut out = Mat::zeros(m, n);
        for i in 0..r {
            if self.sigma[i] == 0.0 {
                continue;
            }
            out += self.sigma[i] * self.u.column(i) * self.v.column(i).transpose();
        }
        out
    }

    pub fn reconstruct(&self) -> Mat {
        self.truncate(self.sigma.len())
    }
}

fn to_faer(x: &Mat) -> faer::Mat<f64> {
    faer::Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

fn from_faer(x: faer::MatRef<'_, f64>) -> Mat {
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

/// Backend thin SVD with singular values in nonincreasing order.
fn thin_svd(x: &Mat) -> (Mat, Vec<f64>, Mat) {
    let svd = to_faer(x).thin_svd().expect("SVD of a finite matrix converges");
    let sigma = svd.S().column_vector().iter().copied().collect();
    (from_faer(svd.U()), sigma, from_faer(svd.V()))
}

fn singular_values(x: &Mat) -> Vec<f64> {
    to_faer(x).singular_values().expect("SVD of a finite matrix converges")
}

fn sign_of_dominant(col: &[f64]) -> f64 {
    let mut best = 0usize;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > col[best].abs() {
            best = i;
        }
    }
    if col.is_empty() || col[best] >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Count of singular values strictly above `rank_tol * sigma_1`.
pub fn numerical_rank(sigma: &[f64], rank_tol: f64) -> usize {
    let s1 = sigma.iter().cloned().fold(0.0, f64::max);
    if s1 == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rank_tol * s1).count()
}

/// Largest singular value.
pub fn op_norm(x: &Mat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    singular_values(x).first().copied().unwrap_or(0.0)
}

/// Nuclear norm.
pub fn nuclear_norm(x: &Mat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    singular_values(x).iter().sum()
}

/// Frobenius inner product.
pub fn inner(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending.
pub fn sym_eigen_ascending(h: &Mat) -> (Vector, Mat) {
    let eig = to_faer(&sym(h))
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition of a finite symmetric matrix converges");
    let vals = Vector::from_iterator(h.nrows(), eig.S().column_vector().iter().copied());
    (vals, from_faer(eig.U()))
}

/// Extend the orthonormal columns of `q` to `k` orthonormal columns by
/// Gram-Schmidt against the standard basis, visited in index order.
pub fn complete_orthonormal(q: &Mat, k: usize) -> Mat {
    let m = q.nrows();
    assert!(k <= m, "cannot fit {k} orthonormal columns in R^{m}");
    let mut cols: Vec<Vector> = q.column_iter().map(|c| c.into_owned()).collect();
    cols.truncate(k);
    let mut e = 0;
    while cols.len() < k && e < m {
        let mut cand = Vector::zeros(m);
        cand[e] = 1.0;
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dot(&cand);
                cand -= c * proj;
            }
        }
        let nrm = cand.norm();
        if nrm > 1e-8 {
            cols.push(cand / nrm);
        }
        e += 1;
    }
    let mut out = Mat::zeros(m, k);
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Polar factor `P Q^T` of `A = P S Q^T`.
pub fn polar_factor(a: &Mat) -> Mat {
    let (p, _, q) = thin_svd(a);
    p * q.transpose()
}

pub fn diag(entries: &[f64]) -> Mat {
    Mat::from_diagonal(&Vector::from_column_slice(entries))
}

pub fn shape_str(x: &Mat) -> String {
    format!("{}x{}", x.nrows(), x.ncols())
}
