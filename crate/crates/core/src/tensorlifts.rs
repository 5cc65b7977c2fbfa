//! Tucker and tensor-train parameterizations of dense tensors, with the
//! HOSVD and TT-SVD normalizations as rebalancing maps.
//!
//! Tensors are stored in row-major (lexicographic) order: the last index
//! varies fastest. Every reshape in this module keeps that flat layout.

use crate::error::{Error, Result};
use crate::linalg::{complete_orthonormal, Mat, SvdFactors};

pub const MAX_ORDER: usize = 6;
pub const MAX_ENTRIES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > MAX_ORDER {
            return Err(Error::Config(format!("tensor order must lie in [1, {MAX_ORDER}], got {}", shape.len())));
        }
        if shape.contains(&0) {
            return Err(Error::Config(format!("tensor dimensions must be positive, got {shape:?}")));
        }
        let size = shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        match size {
            Some(s) if s <= MAX_ENTRIES => {
                if s != values.len() {
                    return Err(Error::shape(format!("{s} values"), format!("{} values", values.len())));
                }
            }
            _ => return Err(Error::Config(format!("tensor of shape {shape:?} exceeds {MAX_ENTRIES} entries"))),
        }
        Ok(DenseTensor { shape, values })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let size = shape.iter().product();
        Self::new(shape, vec![0.0; size])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.shape.len()];
        for k in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.shape[k + 1];
        }
        strides
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let strides = self.strides();
        self.values[index.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Row-major reshape into a `rows × cols` matrix.
    pub fn as_matrix(&self, rows: usize) -> Mat {
        let cols = self.values.len() / rows;
        Mat::from_row_slice(rows, cols, &self.values)
    }

    /// Mode-`k` flattening: row `i_k`, columns indexed lexicographically by
    /// the remaining indices.
    pub fn flatten(&self, k: usize) -> Mat {
        let nk = self.shape[k];
        let outer: usize = self.shape[..k].iter().product();
        let inner: usize = self.shape[k + 1..].iter().product();
        let mut out = Mat::zeros(nk, outer * inner);
        for a in 0..outer {
            for i in 0..nk {
                for b in 0..inner {
                    out[(i, a * inner + b)] = self.values[(a * nk + i) * inner + b];
                }
            }
        }
        out
    }

    /// `self ×_k m` for `m` of shape `p × n_k`.
    pub fn mode_product(&self, k: usize, m: &Mat) -> Result<DenseTensor> {
        if k >= self.order() || m.ncols() != self.shape[k] {
            return Err(Error::shape(
                format!("matrix with {} columns for mode {k}", self.shape.get(k).copied().unwrap_or(0)),
                crate::linalg::shape_str(m),
            ));
        }
        let nk = self.shape[k];
        let p = m.nrows();
        let outer: usize = self.shape[..k].iter().product();
        let inner: usize = self.shape[k + 1..].iter().product();
        let mut values = vec![0.0; outer * p * inner];
        for a in 0..outer {
            for q in 0..p {
                for i in 0..nk {
                    let c = m[(q, i)];
                    if c == 0.0 {
                        continue;
                    }
                    let src = (a * nk + i) * inner;
                    let dst = (a * p + q) * inner;
                    for b in 0..inner {
                        values[dst + b] += c * self.values[src + b];
                    }
                }
            }
        }
        let mut shape = self.shape.clone();
        shape[k] = p;
        DenseTensor::new(shape, values)
    }

    /// Text form: `d n1 ... nd` on the first line, then the values with
    /// `n_d` entries per line.
    pub fn to_text(&self) -> String {
        let mut out = self.order().to_string();
        for n in &self.shape {
            out.push(' ');
            out.push_str(&n.to_string());
        }
        out.push('\n');
        let last = *self.shape.last().expect("order is positive");
        for row in self.values.chunks(last) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            let tok = tokens.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?;
            tok.parse::<usize>().map_err(|_| Error::Parse(format!("invalid {what} '{tok}'")))
        };
        let d = next_usize("tensor order")?;
        if d == 0 || d > MAX_ORDER {
            return Err(Error::Parse(format!("tensor order must lie in [1, {MAX_ORDER}], got {d}")));
        }
        let shape = (0..d).map(|k| next_usize(&format!("dimension {}", k + 1))).collect::<Result<Vec<_>>>()?;
        let values = tokens
            .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("invalid value '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        DenseTensor::new(shape, values).map_err(|e| match e {
            Error::DimensionMismatch { expected, got } => Error::Parse(format!("expected {expected}, found {got}")),
            other => other,
        })
    }
}

/// Core tensor and one factor matrix per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerParams {
    pub core: DenseTensor,
    pub factors: Vec<Mat>,
}

impl TuckerParams {
    /// Euclidean norm of the parameter tuple.
    pub fn norm(&self) -> f64 {
        (self.core.norm().powi(2) + self.factors.iter().map(|m| m.norm_squared()).sum::<f64>()).sqrt()
    }
}

/// Three-way cores of shape `r_{k-1} × n_k × r_k` with `r_0 = r_d = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TTParams {
    pub cores: Vec<DenseTensor>,
}

impl TTParams {
    pub fn norm(&self) -> f64 {
        self.cores.iter().map(|c| c.norm().powi(2)).sum::<f64>().sqrt()
    }

    /// `r_0, ..., r_d`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![self.cores[0].shape()[0]];
        ranks.extend(self.cores.iter().map(|c| c.shape()[2]));
        ranks
    }

    /// Matrix slice `G^(k)(i)` of shape `r_{k-1} × r_k`.
    pub fn slice(&self, k: usize, i: usize) -> Mat {
        let c = &self.cores[k];
        let (a, b) = (c.shape()[0], c.shape()[2]);
        Mat::from_fn(a, b, |p, q| c.get(&[p, i, q]))
    }
}

pub fn tucker_apply(p: &TuckerParams) -> Result<DenseTensor> {
    if p.factors.len() != p.core.order() {
        return Err(Error::shape(format!("{} factors", p.core.order()), format!("{} factors", p.factors.len())));
    }
    let mut t = p.core.clone();
    for (k, m) in p.factors.iter().enumerate() {
        t = t.mode_product(k, m)?;
    }
    Ok(t)
}

/// `r` orthonormal columns spanning the dominant left singular space of `a`;
/// fails when `σ_{r+1} > rank_tol σ_1`.
fn leading_left(a: &Mat, r: usize, rank_tol: f64, stage: usize) -> Result<Mat> {
    let svd = SvdFactors::new(a, rank_tol);
    let sigma_next = svd.sigma_at(r);
    let threshold = rank_tol * svd.sigma_max();
    if sigma_next > threshold {
        return Err(Error::RankViolation { stage, sigma: sigma_next, tol: threshold });
    }
    let kept = svd.rank.min(r);
    Ok(complete_orthonormal(&svd.u.columns(0, kept).into_owned(), r))
}

/// HOSVD of a tensor with multilinear rank at most `ranks`.
pub fn tucker_hosvd(t: &DenseTensor, ranks: &[usize], rank_tol: f64) -> Result<TuckerParams> {
    if ranks.len() != t.order() {
        return Err(Error::Config(format!("expected {} Tucker ranks, got {}", t.order(), ranks.len())));
    }
    for (k, (&r, &n)) in ranks.iter().zip(t.shape()).enumerate() {
        if r == 0 || r > n {
            return Err(Error::Config(format!("Tucker rank {r} of mode {} must lie in [1, {n}]", k + 1)));
        }
    }
    let mut factors = Vec::with_capacity(ranks.len());
    for (k, &r) in ranks.iter().enumerate() {
        factors.push(leading_left(&t.flatten(k), r, rank_tol, k + 1)?);
    }
    let mut core = t.clone();
    for (k, u) in factors.iter().enumerate() {
        core = core.mode_product(k, &u.transpose())?;
    }
    Ok(TuckerParams { core, factors })
}

pub fn tt_apply(p: &TTParams) -> Result<DenseTensor> {
    let d = p.cores.len();
    if d == 0 {
        return Err(Error::Config("tensor train needs at least one core".into()));
    }
    for (k, c) in p.cores.iter().enumerate() {
        if c.order() != 3 {
            return Err(Error::shape("three-way core", format!("order {} at core {}", c.order(), k + 1)));
        }
    }
    if p.cores[0].shape()[0] != 1 || p.cores[d - 1].shape()[2] != 1 {
        return Err(Error::shape("boundary ranks 1", format!("{:?}", p.ranks())));
    }
    for k in 1..d {
        let (prev, cur) = (p.cores[k - 1].shape()[2], p.cores[k].shape()[0]);
        if prev != cur {
            return Err(Error::shape(format!("rank {prev} entering core {}", k + 1), cur.to_string()));
        }
    }
    // acc has shape (n_1 ... n_k) × r_k
    let mut acc = Mat::from_element(1, 1, 1.0);
    for c in &p.cores {
        let (a, n, b) = (c.shape()[0], c.shape()[1], c.shape()[2]);
        let prod = &acc * c.as_matrix(a);
        // row-major reshape of (P × n b) into (P n × b)
        let rows = prod.nrows() * n;
        acc = Mat::from_fn(rows, b, |row, col| prod[(row / n, (row % n) * b + col)]);
    }
    let shape = p.cores.iter().map(|c| c.shape()[1]).collect();
    DenseTensor::new(shape, acc.column(0).iter().copied().collect())
}

/// Output of [`tt_svd_traced`]: the cores and the Frobenius norm of the
/// working matrix after each stage.
#[derive(Debug, Clone)]
pub struct TtSvdTrace {
    pub params: TTParams,
    pub stage_norms: Vec<f64>,
}

/// TT-SVD with inner ranks `r_1, ..., r_{d-1}`.
pub fn tt_svd(t: &DenseTensor, ranks: &[usize], rank_tol: f64) -> Result<TTParams> {
    Ok(tt_svd_traced(t, ranks, rank_tol)?.params)
}

pub fn tt_svd_traced(t: &DenseTensor, ranks: &[usize], rank_tol: f64) -> Result<TtSvdTrace> {
    let d = t.order();
    if ranks.len() + 1 != d {
        return Err(Error::Config(format!("expected {} TT ranks, got {}", d - 1, ranks.len())));
    }
    let dims = t.shape();
    let mut prev = 1usize;
    for (k, &r) in ranks.iter().enumerate() {
        if r == 0 || r > prev * dims[k] {
            return Err(Error::Config(format!(
                "TT rank r_{} = {r} must lie in [1, r_{} n_{}] = [1, {}]",
                k + 1,
                k,
                k + 1,
                prev * dims[k]
            )));
        }
        prev = r;
    }

    let mut cores = Vec::with_capacity(d);
    let mut stage_norms = vec![t.norm()];
    // working matrix, stored row-major as a flat vector with `rows` rows
    let mut work: Vec<f64> = t.values().to_vec();
    let mut prev = 1usize;
    for k in 0..d - 1 {
        let rows = prev * dims[k];
        let a = Mat::from_row_slice(rows, work.len() / rows, &work);
        let r = ranks[k];
        let u = leading_left(&a, r, rank_tol, k + 1)?;
        let reduced = u.transpose() * &a;
        work = row_major(&reduced);
        stage_norms.push(reduced.norm());
        cores.push(DenseTensor::new(vec![prev, dims[k], r], row_major(&u))?);
        prev = r;
    }
    cores.push(DenseTensor::new(vec![prev, dims[d - 1], 1], work)?);
    Ok(TtSvdTrace { params: TTParams { cores }, stage_norms })
}

fn row_major(m: &Mat) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}
