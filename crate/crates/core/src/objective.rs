//! Least-squares SEM loss, the two smooth acyclicity measures, and the
//! composite objectives minimized by the learners.
//!
//! Data is stored `n x d` (one sample per row), so the loss
//! `(1/2n) ||X - A^T X||_F^2` of the column-sample convention reads
//! `(1/2n) ||x - x a||_F^2` here. The hot paths use the Gram matrix
//! `S = x^T x / n`, for which the loss is `tr((I-A)^T S (I-A)) / 2` and its
//! gradient `-S (I - A)`.

use serde::{Deserialize, Serialize};

use crate::dag::{gamma_parts, relu_grad, SkewParams};
use crate::error::{arg_err, dim_err, Error, Result};
use crate::flow::Potential;
use crate::linalg::expm;
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone)]
pub struct Dataset {
    x: DenseMatrix,
    gram: DenseMatrix,
}

impl Dataset {
    pub fn new(x: DenseMatrix) -> Result<Self> {
        if x.rows() < 1 || x.cols() < 2 {
            return arg_err(format!("dataset needs n >= 1 and d >= 2, got {}x{}", x.rows(), x.cols()));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("dataset contains non-finite values".into()));
        }
        let gram = x.transpose().matmul(&x)?.scale(1.0 / x.rows() as f64);
        Ok(Self { x, gram })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    /// `x^T x / n`.
    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }
}

/// Objective value and gradient in the caller's parameter layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HKind {
    /// `tr[(I + A o A / d)^d] - d`
    #[default]
    Poly,
    /// `tr(exp(A o A)) - d`
    Expm,
}

impl std::str::FromStr for HKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly" => Ok(HKind::Poly),
            "expm" => Ok(HKind::Expm),
            other => arg_err(format!("unknown acyclicity measure {other:?} (expected poly or expm)")),
        }
    }
}

fn check_square(a: &DenseMatrix, d: usize) -> Result<()> {
    if a.rows() != d || a.cols() != d {
        return dim_err(format!("expected {d}x{d} adjacency, got {}x{}", a.rows(), a.cols()));
    }
    Ok(())
}

/// `(1/2n) sum_k ||x_k - x_k a||^2`, evaluated sample by sample.
///
/// Per-sample terms are summed in sorted order, so the value does not depend
/// on the order of the samples.
pub fn least_squares_loss(a: &DenseMatrix, data: &Dataset) -> Result<f64> {
    check_square(a, data.d())?;
    let residual = data.x.sub(&data.x.matmul(a)?)?;
    let mut terms: Vec<f64> = (0..residual.rows())
        .map(|k| residual.row(k).iter().map(|r| r * r).sum())
        .collect();
    terms.sort_by(f64::total_cmp);
    Ok(terms.iter().sum::<f64>() / (2.0 * data.n() as f64))
}

/// `-(1/n) x^T (x - x a)`.
pub fn least_squares_grad(a: &DenseMatrix, data: &Dataset) -> Result<DenseMatrix> {
    check_square(a, data.d())?;
    Ok(ls_value_grad(a, &data.gram).1)
}

/// Loss and gradient through the Gram matrix.
pub(crate) fn ls_value_grad(a: &DenseMatrix, gram: &DenseMatrix) -> (f64, DenseMatrix) {
    let d = a.rows();
    let r = DenseMatrix::identity(d).sub(a).expect("same shape");
    let sr = gram.matmul(&r).expect("same shape");
    let value = 0.5 * r.as_slice().iter().zip(sr.as_slice()).map(|(x, y)| x * y).sum::<f64>();
    (value, sr.scale(-1.0))
}

fn h_poly_value_grad(a: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
    if !a.is_square() {
        return dim_err("acyclicity measure of a non-square matrix");
    }
    let d = a.rows();
    if d == 0 {
        return Ok((0.0, a.clone()));
    }
    let inv_d = 1.0 / d as f64;
    let mut m = a.map(|v| v * v * inv_d);
    for i in 0..d {
        m[(i, i)] += 1.0;
    }
    let pow = m.matrix_power(d as u32 - 1)?;
    // tr(P M) without forming the product
    let mut trace = 0.0;
    for i in 0..d {
        for j in 0..d {
            trace += pow[(i, j)] * m[(j, i)];
        }
    }
    let grad = DenseMatrix::from_fn(d, d, |i, j| pow[(j, i)] * 2.0 * a[(i, j)]);
    Ok((trace - d as f64, grad))
}

fn h_expm_value_grad(a: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
    if !a.is_square() {
        return dim_err("acyclicity measure of a non-square matrix");
    }
    let d = a.rows();
    let e = expm(&a.map(|v| v * v))?;
    let grad = DenseMatrix::from_fn(d, d, |i, j| e[(j, i)] * 2.0 * a[(i, j)]);
    Ok((e.trace() - d as f64, grad))
}

/// `tr[(I + A o A / d)^d] - d`.
pub fn h_poly(a: &DenseMatrix) -> Result<f64> {
    Ok(h_poly_value_grad(a)?.0)
}

/// `[(I + A o A / d)^(d-1)]^T o 2A`.
pub fn h_poly_grad(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(h_poly_value_grad(a)?.1)
}

/// `tr(exp(A o A)) - d`.
pub fn h_expm(a: &DenseMatrix) -> Result<f64> {
    Ok(h_expm_value_grad(a)?.0)
}

/// `exp(A o A)^T o 2A`.
pub fn h_expm_grad(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(h_expm_value_grad(a)?.1)
}

pub fn h_value_grad(a: &DenseMatrix, kind: HKind) -> Result<(f64, DenseMatrix)> {
    match kind {
        HKind::Poly => h_poly_value_grad(a),
        HKind::Expm => h_expm_value_grad(a),
    }
}

pub fn h_value(a: &DenseMatrix, kind: HKind) -> Result<f64> {
    Ok(h_value_grad(a, kind)?.0)
}

fn unflatten(a_flat: &[f64], d: usize) -> Result<DenseMatrix> {
    DenseMatrix::from_vec(d, d, a_flat.to_vec())
}

/// `F(A) + lambda h(A)` over all `d^2` entries of `A`, diagonal included.
pub fn step1_objective(a_flat: &[f64], data: &Dataset, lambda: f64, h_kind: HKind) -> Result<ObjectiveEval> {
    if !(lambda > 0.0) {
        return arg_err(format!("penalty coefficient must be positive, got {lambda}"));
    }
    penalized_objective(a_flat, data, h_kind, |h| (lambda * h, lambda))
}

/// `F(A) + (rho/2) h(A)^2 + alpha h(A)`, the augmented Lagrangian subproblem.
pub fn augmented_lagrangian_objective(
    a_flat: &[f64],
    data: &Dataset,
    rho: f64,
    alpha: f64,
    h_kind: HKind,
) -> Result<ObjectiveEval> {
    penalized_objective(a_flat, data, h_kind, |h| (0.5 * rho * h * h + alpha * h, rho * h + alpha))
}

/// `F(A) + phi(h(A))` where `penalty(h)` returns `(phi(h), phi'(h))`.
fn penalized_objective(
    a_flat: &[f64],
    data: &Dataset,
    h_kind: HKind,
    penalty: impl Fn(f64) -> (f64, f64),
) -> Result<ObjectiveEval> {
    let d = data.d();
    if a_flat.len() != d * d {
        return dim_err(format!("expected {} parameters, got {}", d * d, a_flat.len()));
    }
    let a = unflatten(a_flat, d)?;
    let (f, gf) = ls_value_grad(&a, &data.gram);
    let (h, gh) = h_value_grad(&a, h_kind)?;
    let (pen, slope) = penalty(h);
    let gradient = gf.as_slice().iter().zip(gh.as_slice()).map(|(x, y)| x + slope * y).collect();
    Ok(ObjectiveEval { value: f + pen, gradient })
}

/// Chain rule from `dF/dA` to the free upper entries of `W` for
/// `A = W o r` with `r = relu(grad p)`.
fn w_gradient(g: &DenseMatrix, r: &DenseMatrix) -> Vec<f64> {
    let d = g.rows();
    let mut out = Vec::with_capacity(SkewParams::len_for(d));
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(g[(i, j)] * r[(i, j)] - g[(j, i)] * r[(j, i)]);
        }
    }
    out
}

fn check_w_p(w: &SkewParams, p: &Potential, data: &Dataset) -> Result<()> {
    if w.dim() != data.d() || p.dim() != data.d() {
        return dim_err(format!("W dim {}, p dim {}, data has {} variables", w.dim(), p.dim(), data.d()));
    }
    Ok(())
}

/// `F(gamma(W, p_fixed))` as a function of the upper triangle of `W`.
pub fn w_objective(w: &SkewParams, p_fixed: &Potential, data: &Dataset) -> Result<ObjectiveEval> {
    check_w_p(w, p_fixed, data)?;
    let r = relu_grad(p_fixed);
    let a = gamma_parts(&w.unpack(), p_fixed);
    let (value, g) = ls_value_grad(&a, &data.gram);
    Ok(ObjectiveEval { value, gradient: w_gradient(&g, &r) })
}

/// `F(gamma(W, p))` jointly in `(W, p)`; the gradient is laid out as the
/// upper triangle of `W` followed by `p`. The ReLU kink gets subgradient 0.
pub fn joint_objective(w: &SkewParams, p: &Potential, data: &Dataset) -> Result<ObjectiveEval> {
    check_w_p(w, p, data)?;
    let d = data.d();
    let wf = w.unpack();
    let r = relu_grad(p);
    let a = gamma_parts(&wf, p);
    let (value, g) = ls_value_grad(&a, &data.gram);
    let mut gradient = w_gradient(&g, &r);

    let pv = p.values();
    let mut gp = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            if pv[j] - pv[i] > 0.0 {
                let m = g[(i, j)] * wf.get(i, j);
                gp[j] += m;
                gp[i] -= m;
            }
        }
    }
    gradient.extend(gp);
    Ok(ObjectiveEval { value, gradient })
}
