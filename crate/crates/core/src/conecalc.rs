//! Closed cones made of finitely many rays, and the two stationarity
//! measures attached to a cone.
//!
//! For a closed (possibly nonconvex) cone `K` and a vector `v`:
//!
//! * `mu1 = ‖Proj_K(v)‖ = max(0, max_{z ∈ K, ‖z‖ = 1} ⟨v, z⟩)`;
//! * `mu2 = dist(v, K°) = ‖Proj_{K°°}(v)‖` where `K°°` is the closed convex
//!   hull of `K`.
//!
//! `mu1 ≤ mu2` always, with equality when `K` is convex, and both vanish
//! together. Ray cones are small enough here that the convex-hull projection
//! is done by enumerating faces.

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

/// Largest generator count accepted by [`mu_measures_ray_cone`].
pub const MAX_HULL_GENERATORS: usize = 8;

/// Union of the closed rays `{αz : α ≥ 0}` over a list of generators.
#[derive(Debug, Clone)]
pub struct RayCone {
    generators: Vec<Vector>,
    dim: usize,
}

impl RayCone {
    pub fn new(dim: usize, generators: Vec<Vector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("ray cone dimension must be positive".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.len() != dim {
                return Err(Error::shape(format!("generator of length {dim}"), format!("generator {i} of length {}", g.len())));
            }
            if !(g.norm() > 0.0) {
                return Err(Error::Config(format!("generator {i} has zero norm")));
            }
        }
        Ok(RayCone { generators, dim })
    }

    pub fn from_rows(dim: usize, rows: &[&[f64]]) -> Result<Self> {
        Self::new(dim, rows.iter().map(|r| Vector::from_column_slice(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    fn check(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::shape(format!("vector of length {}", self.dim), format!("length {}", v.len())));
        }
        Ok(())
    }
}

/// One projection of `v` onto a ray cone.
#[derive(Debug, Clone)]
pub struct ConeProjection {
    pub point: Vector,
    pub norm: f64,
    /// `⟨v, point⟩`, equal to `norm²`.
    pub inner_vu: f64,
}

/// Project `v` onto the nearest ray. Equidistant rays resolve to the lowest
/// generator index; an empty cone projects everything to zero.
pub fn project_ray_cone(cone: &RayCone, v: &Vector) -> Result<ConeProjection> {
    cone.check(v)?;
    let mut best: Option<(f64, Vector)> = None;
    for z in cone.generators() {
        let zhat = z / z.norm();
        let alpha = v.dot(&zhat).max(0.0);
        let cand = zhat * alpha;
        let dist = (v - &cand).norm();
        match &best {
            Some((d, _)) if *d <= dist => {}
            _ => best = Some((dist, cand)),
        }
    }
    let point = best.map(|(_, p)| p).unwrap_or_else(|| Vector::zeros(cone.dim()));
    let norm = point.norm();
    let inner_vu = v.dot(&point);
    Ok(ConeProjection { point, norm, inner_vu })
}

/// `w ∈ K°` up to a relative tolerance: `⟨w, z_i⟩ ≤ tol ‖w‖ ‖z_i‖` for all i.
pub fn polar_membership_ray_cone(cone: &RayCone, w: &Vector, tol: f64) -> Result<bool> {
    cone.check(w)?;
    let wn = w.norm();
    Ok(cone
        .generators()
        .iter()
        .all(|z| w.dot(z) <= tol * wn * z.norm()))
}

/// Projection of `v` onto the convex hull cone of the generators.
///
/// The projection lies in the relative interior of a face spanned by a
/// linearly independent subset with positive weights, so every such subset
/// is tried and the closest feasible candidate wins.
pub fn project_convex_hull(cone: &RayCone, v: &Vector) -> Result<Vector> {
    cone.check(v)?;
    let gens = cone.generators();
    let p = gens.len();
    if p > MAX_HULL_GENERATORS {
        return Err(Error::Config(format!(
            "convex hull projection supports at most {MAX_HULL_GENERATORS} generators, got {p}"
        )));
    }
    let d = cone.dim();
    let mut best = Vector::zeros(d);
    let mut best_dist = v.norm();
    for mask in 1u32..(1u32 << p) {
        let idx: Vec<usize> = (0..p).filter(|i| mask & (1 << i) != 0).collect();
        if idx.len() > d {
            continue;
        }
        let mut g = Mat::zeros(d, idx.len());
        for (j, &i) in idx.iter().enumerate() {
            g.set_column(j, &(&gens[i] / gens[i].norm()));
        }
        let gram = g.transpose() * &g;
        let Some(chol) = gram.clone().cholesky() else { continue };
        // reject nearly dependent subsets; a smaller subset covers them
        let min_diag = (0..idx.len()).map(|i| chol.l()[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_diag < 1e-10 {
            continue;
        }
        let coef = chol.solve(&(g.transpose() * v));
        if coef.iter().any(|&c| c <= 0.0) {
            continue;
        }
        let cand = &g * coef;
        let dist = (v - &cand).norm();
        if dist < best_dist {
            best_dist = dist;
            best = cand;
        }
    }
    Ok(best)
}

/// `(mu1, mu2)` for the ray cone.
pub fn mu_measures_ray_cone(cone: &RayCone, v: &Vector) -> Result<(f64, f64)> {
    let mu1 = project_ray_cone(cone, v)?.norm;
    let mu2 = project_convex_hull(cone, v)?.norm();
    Ok((mu1, mu2))
}
