//! Functions on the vertices, edges and triangles of the complete graph.
//!
//! Edge flows are alternating (skew-symmetric) and triangle flows are
//! alternating in all three indices. Both are only constructible through
//! functions that write each independent value once and mirror it, so the
//! symmetry invariants hold bitwise.

use crate::error::{arg_err, dim_err, Error, Result};
use crate::matrix::DenseMatrix;

/// A real value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    values: Vec<f64>,
}

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("potential entry {v}")));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { values: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Skew-symmetric `dim x dim` matrix: an alternating function on edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFlow {
    matrix: DenseMatrix,
}

impl EdgeFlow {
    pub fn zeros(dim: usize) -> Self {
        Self { matrix: DenseMatrix::zeros(dim, dim) }
    }

    /// Builds a flow from its strict upper triangle; `f(i, j)` is called once
    /// per pair `i < j` and the lower triangle is its negation.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        Self { matrix: m }
    }

    /// The skew part `(M - M^T) / 2` of an arbitrary square matrix.
    pub fn skew_part(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return dim_err(format!("skew part of non-square {}x{}", m.rows(), m.cols()));
        }
        Ok(Self::from_upper_fn(m.rows(), |i, j| 0.5 * (m[(i, j)] - m[(j, i)])))
    }

    /// Accepts a matrix that is already exactly skew-symmetric.
    pub fn try_from_matrix(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return dim_err("edge flow must be square");
        }
        let d = m.rows();
        for i in 0..d {
            if m[(i, i)] != 0.0 {
                return arg_err(format!("edge flow diagonal ({i},{i}) is {}", m[(i, i)]));
            }
            for j in (i + 1)..d {
                if m[(i, j)] != -m[(j, i)] {
                    return arg_err(format!("entries ({i},{j}) and ({j},{i}) are not negatives"));
                }
            }
        }
        Ok(Self { matrix: m })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    /// `<Y, Z> = sum_ij Y(i,j) Z(i,j)` over all ordered pairs.
    pub fn inner(&self, other: &Self) -> f64 {
        self.matrix.as_slice().iter().zip(other.matrix.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return dim_err("edge flow dimensions differ");
        }
        Ok(Self::from_upper_fn(self.dim(), |i, j| self.get(i, j) - other.get(i, j)))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_upper_fn(self.dim(), |i, j| s * self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }
}

/// Largest dimension for which a [`TriangleFlow`] is stored densely.
pub const MAX_TRIANGLE_DIM: usize = 32;

/// Alternating function on ordered vertex triples, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleFlow {
    dim: usize,
    values: Vec<f64>,
}

impl TriangleFlow {
    /// Builds the flow from its values on sorted triples `i < j < k`; every
    /// permutation gets the value times the permutation's sign.
    pub fn from_sorted_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        if dim > MAX_TRIANGLE_DIM {
            return arg_err(format!("dense triangle flows are limited to dim <= {MAX_TRIANGLE_DIM}"));
        }
        let mut t = Self { dim, values: vec![0.0; dim * dim * dim] };
        for i in 0..dim {
            for j in (i + 1)..dim {
                for k in (j + 1)..dim {
                    let v = f(i, j, k);
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        let pos = t.offset(a, b, c);
                        t.values[pos] = v;
                    }
                    for (a, b, c) in [(j, i, k), (i, k, j), (k, j, i)] {
                        let pos = t.offset(a, b, c);
                        t.values[pos] = -v;
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_sorted_fn(dim, |_, _, _| 0.0)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.offset(i, j, k)]
    }
}

/// The `(W, p)` pair parameterizing a DAG through `W o relu(grad p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DagParams {
    pub w: EdgeFlow,
    pub p: Potential,
}

impl DagParams {
    pub fn new(w: EdgeFlow, p: Potential) -> Result<Self> {
        if w.dim() != p.dim() {
            return dim_err(format!("W is {0}x{0} but p has length {1}", w.dim(), p.dim()));
        }
        Ok(Self { w, p })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }
}
