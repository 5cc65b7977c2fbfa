//! Smooth cost functions on the ambient matrix space.

use crate::linalg::{Mat, Vector};

/// Evaluation contract for a smooth `f: R^{m×n} -> R`.
///
/// Implementations hold no mutable state and may be evaluated concurrently.
pub trait CostModel: Send + Sync {
    fn value(&self, x: &Mat) -> f64;
    fn grad(&self, x: &Mat) -> Mat;
    /// `∇²f(X)[dir]`, linear in `dir` and self-adjoint.
    fn hess_vec(&self, x: &Mat, dir: &Mat) -> Mat;
    /// A Lipschitz constant of `∇f` on the region of interest, when known.
    fn lipschitz_grad(&self) -> Option<f64>;
    /// Ambient shape when the cost only makes sense for one shape.
    fn shape(&self) -> Option<(usize, usize)> {
        None
    }
}

impl<C: CostModel + ?Sized> CostModel for Box<C> {
    fn value(&self, x: &Mat) -> f64 {
        (**self).value(x)
    }
    fn grad(&self, x: &Mat) -> Mat {
        (**self).grad(x)
    }
    fn hess_vec(&self, x: &Mat, dir: &Mat) -> Mat {
        (**self).hess_vec(x, dir)
    }
    fn lipschitz_grad(&self) -> Option<f64> {
        (**self).lipschitz_grad()
    }
    fn shape(&self) -> Option<(usize, usize)> {
        (**self).shape()
    }
}

/// Cost on `R^{3×3}` whose P²GD iterates converge to a non-stationary point.
///
/// `f(X) = ½‖D (Y - Y*)‖² - (x + 1)²/2 + x⁴/4` with `Y` the leading 2×2 block,
/// `x = X[2,2]`, `D = diag(1, 1/2)` acting on rows and `Y* = diag(1, 0)`.
/// All other entries do not enter `f`.
#[derive(Debug, Clone)]
pub struct ApocalypseCost {
    lipschitz: Option<f64>,
}

const ROW_WEIGHTS_SQ: [f64; 2] = [1.0, 0.25];

/// One-variable part `x ↦ -(x + 1)²/2 + x⁴/4`.
pub fn apocalypse_quartic(x: f64) -> f64 {
    -(x + 1.0).powi(2) / 2.0 + x.powi(4) / 4.0
}

/// Positive real root of `x³ - x - 1`, the minimizer of [`apocalypse_quartic`].
pub fn apocalypse_quartic_minimizer() -> f64 {
    bisect(|x| x * x * x - x - 1.0, 1.0, 2.0)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    debug_assert!(f_lo * f(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl ApocalypseCost {
    /// Level of `f` at the canonical start `diag(2, 1, 0)`.
    pub const START_LEVEL: f64 = 0.125;

    /// `f` is quartic in one entry, so `∇f` is only Lipschitz on bounded sets.
    /// The default constant bounds `‖∇²f‖` on the sublevel set `{f ≤ 1/8}`:
    /// there `|x| ≤ ρ` with `ρ` the largest root of `quartic(x) = 1/8`, and
    /// `‖∇²f‖ ≤ max(1, 3ρ² - 1)`.
    pub fn new() -> Self {
        let rho = bisect(|x| apocalypse_quartic(x) - Self::START_LEVEL, 1.5, 4.0);
        ApocalypseCost { lipschitz: Some((3.0 * rho * rho - 1.0).max(1.0)) }
    }

    pub fn with_lipschitz(lipschitz: Option<f64>) -> Self {
        ApocalypseCost { lipschitz }
    }
}

impl Default for ApocalypseCost {
    fn default() -> Self {
        Self::new()
    }
}

impl CostModel for ApocalypseCost {
    fn value(&self, x: &Mat) -> f64 {
        let mut q = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                q += ROW_WEIGHTS_SQ[i] * (x[(i, j)] - target).powi(2);
            }
        }
        0.5 * q + apocalypse_quartic(x[(2, 2)])
    }

    fn grad(&self, x: &Mat) -> Mat {
        let mut g = Mat::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                g[(i, j)] = ROW_WEIGHTS_SQ[i] * (x[(i, j)] - target);
            }
        }
        let z = x[(2, 2)];
        g[(2, 2)] = z.powi(3) - z - 1.0;
        g
    }

    fn hess_vec(&self, x: &Mat, dir: &Mat) -> Mat {
        let mut h = Mat::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                h[(i, j)] = ROW_WEIGHTS_SQ[i] * dir[(i, j)];
            }
        }
        let z = x[(2, 2)];
        h[(2, 2)] = (3.0 * z * z - 1.0) * dir[(2, 2)];
        h
    }

    fn lipschitz_grad(&self) -> Option<f64> {
        self.lipschitz
    }

    fn shape(&self) -> Option<(usize, usize)> {
        Some((3, 3))
    }
}

pub fn apocalypse_cost() -> ApocalypseCost {
    ApocalypseCost::new()
}

/// `f(X) = u^T X v`.
#[derive(Debug, Clone)]
pub struct LinearCost {
    pub u: Vector,
    pub v: Vector,
}

impl CostModel for LinearCost {
    fn value(&self, x: &Mat) -> f64 {
        (self.u.transpose() * x * &self.v)[(0, 0)]
    }

    fn grad(&self, _x: &Mat) -> Mat {
        &self.u * self.v.transpose()
    }

    fn hess_vec(&self, _x: &Mat, dir: &Mat) -> Mat {
        Mat::zeros(dir.nrows(), dir.ncols())
    }

    fn lipschitz_grad(&self) -> Option<f64> {
        Some(0.0)
    }

    fn shape(&self) -> Option<(usize, usize)> {
        Some((self.u.len(), self.v.len()))
    }
}

pub fn linear_cost(u: Vector, v: Vector) -> LinearCost {
    LinearCost { u, v }
}

/// `f(X) = ½‖X - target‖²`.
#[derive(Debug, Clone)]
pub struct QuadraticDistanceCost {
    pub target: Mat,
}

impl CostModel for QuadraticDistanceCost {
    fn value(&self, x: &Mat) -> f64 {
        0.5 * (x - &self.target).norm_squared()
    }

    fn grad(&self, x: &Mat) -> Mat {
        x - &self.target
    }

    fn hess_vec(&self, _x: &Mat, dir: &Mat) -> Mat {
        dir.clone()
    }

    fn lipschitz_grad(&self) -> Option<f64> {
        Some(1.0)
    }

    fn shape(&self) -> Option<(usize, usize)> {
        Some(self.target.shape())
    }
}

pub fn quadratic_distance_cost(target: Mat) -> QuadraticDistanceCost {
    QuadraticDistanceCost { target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;

    #[test]
    fn apocalypse_values() {
        let f = apocalypse_cost();
        // Q(Y0) = ½(1 + 1/4), quartic(0) = -1/2
        assert!((f.value(&diag(&[2., 1., 0.])) - 0.125).abs() < 1e-15);
        assert!((f.value(&diag(&[1., 0., 0.])) + 0.5).abs() < 1e-15);
        let y = Mat::from_row_slice(3, 3, &[1.3, 0.2, 0., -0.4, 0.7, 0., 0., 0., 0.]);
        let g = f.grad(&y);
        assert!((g[(0, 0)] - 0.3).abs() < 1e-15);
        assert!((g[(0, 1)] - 0.2).abs() < 1e-15);
        assert!((g[(1, 0)] + 0.1).abs() < 1e-15);
        assert!((g[(1, 1)] - 0.175).abs() < 1e-15);
        assert_eq!(g[(2, 2)], -1.0);
        assert_eq!(g[(0, 2)], 0.0);
    }

    #[test]
    fn apocalypse_minimizer() {
        let x0 = apocalypse_quartic_minimizer();
        assert!((x0.powi(3) - x0 - 1.0).abs() < 1e-14);
        assert!((x0 - 1.324_717_957_244_746).abs() < 1e-13);
        let f = apocalypse_cost();
        let fmin = f.value(&diag(&[1., 0., x0]));
        assert!((fmin - apocalypse_quartic(x0)).abs() < 1e-15);
        assert!((fmin + 1.932).abs() < 1e-3);
        let grid_min = (0..=40_000)
            .map(|i| apocalypse_quartic(-3.0 + 6.0 * i as f64 / 40_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(fmin <= grid_min + 1e-12);
    }

    #[test]
    fn apocalypse_lipschitz_bound_covers_sublevel_set() {
        let l = apocalypse_cost().lipschitz_grad().unwrap();
        for i in 0..=10_000 {
            let x = -4.0 + 8.0 * i as f64 / 10_000.0;
            if apocalypse_quartic(x) <= ApocalypseCost::START_LEVEL {
                assert!((3.0 * x * x - 1.0).abs() <= l + 1e-12);
            }
        }
        assert!(l > 11.0 && l < 14.0);
    }

    #[test]
    fn linear_and_quadratic() {
        let u = Vector::from_vec(vec![1., 2.]);
        let v = Vector::from_vec(vec![0., 1., -1.]);
        let f = linear_cost(u, v);
        assert_eq!(f.value(&Mat::zeros(2, 3)), 0.0);
        assert_eq!(f.grad(&Mat::zeros(2, 3)), f.grad(&Mat::identity(2, 3)));
        assert_eq!(f.hess_vec(&Mat::zeros(2, 3), &Mat::identity(2, 3)), Mat::zeros(2, 3));

        let x0 = diag(&[1., 2.]);
        let q = quadratic_distance_cost(x0.clone());
        assert_eq!(q.value(&x0), 0.0);
        assert_eq!(q.grad(&x0), Mat::zeros(2, 2));
        assert_eq!(q.lipschitz_grad(), Some(1.0));
    }
}
