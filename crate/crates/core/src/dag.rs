//! The DAG parameterization `gamma(W, p) = W o relu(grad p)` and its inverse
//! maps, plus acyclicity checks and thresholding.

use std::collections::VecDeque;

use crate::calculus::{connectivity, grad, hodge_potential};
use crate::error::{arg_err, dim_err, Result};
use crate::flow::{DagParams, EdgeFlow, Potential};
use crate::matrix::DenseMatrix;
use crate::objective::h_poly;

/// The strict upper triangle of a skew-symmetric `W`, row-major.
///
/// Pair `(i, j)` with `i < j` lives at index `i*d - i*(i+1)/2 + (j - i - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewParams {
    dim: usize,
    upper: Vec<f64>,
}

impl SkewParams {
    pub fn len_for(dim: usize) -> usize {
        dim * dim.saturating_sub(1) / 2
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, upper: vec![0.0; Self::len_for(dim)] }
    }

    pub fn from_vec(dim: usize, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != Self::len_for(dim) {
            return dim_err(format!(
                "dim {dim} needs {} upper entries, got {}",
                Self::len_for(dim),
                upper.len()
            ));
        }
        Ok(Self { dim, upper })
    }

    pub fn pack(w: &EdgeFlow) -> Self {
        let d = w.dim();
        let mut upper = Vec::with_capacity(Self::len_for(d));
        for i in 0..d {
            for j in (i + 1)..d {
                upper.push(w.get(i, j));
            }
        }
        Self { dim: d, upper }
    }

    pub fn unpack(&self) -> EdgeFlow {
        let mut it = self.upper.iter();
        EdgeFlow::from_upper_fn(self.dim, |_, _| *it.next().expect("length checked"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.upper
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.upper
    }
}

/// Positive part of an edge flow; ties `y(i,j) = 0` give no edge.
pub fn relu_flow(y: &EdgeFlow) -> DenseMatrix {
    y.as_matrix().map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Weighted adjacency matrix `W o relu(grad p)`; acyclic for every input.
pub fn gamma(params: &DagParams) -> DenseMatrix {
    gamma_parts(&params.w, &params.p)
}

pub(crate) fn gamma_parts(w: &EdgeFlow, p: &Potential) -> DenseMatrix {
    let d = p.dim();
    let pv = p.values();
    DenseMatrix::from_fn(d, d, |i, j| {
        let g = pv[j] - pv[i];
        if g > 0.0 {
            w.get(i, j) * g
        } else {
            0.0
        }
    })
}

/// Potential encoding the topological order of `a`: the projection of the
/// skew part of its connectivity matrix. Works for cyclic input too.
pub fn topo_potential(a: &DenseMatrix) -> Result<Potential> {
    if !a.is_square() {
        return dim_err("topological potential of a non-square matrix");
    }
    if a.rows() < 2 {
        return Ok(Potential::zeros(a.rows()));
    }
    let c = connectivity(a);
    hodge_potential(&EdgeFlow::skew_part(&c)?)
}

/// Skew `W` with `W o relu(grad p) = a` whenever `a` is a DAG ordered by `p`.
///
/// Pairs with equal potentials, no edge, or edges in both directions get
/// `W = 0`, so 2-cycles in `a` are dropped.
pub fn closed_form_w(a: &DenseMatrix, p: &Potential) -> Result<EdgeFlow> {
    if !a.is_square() || a.rows() != p.dim() {
        return dim_err(format!("a is {}x{}, p has length {}", a.rows(), a.cols(), p.dim()));
    }
    let pv = p.values();
    Ok(EdgeFlow::from_upper_fn(p.dim(), |i, j| {
        let gap = pv[j] - pv[i];
        // exact comparison: potentials from topo_potential tie exactly
        if pv[i] == pv[j] {
            return 0.0;
        }
        match (a[(i, j)] != 0.0, a[(j, i)] != 0.0) {
            (true, false) => a[(i, j)] / gap,
            (false, true) => a[(j, i)] / gap,
            _ => 0.0,
        }
    }))
}

/// Result of Kahn's algorithm.
#[derive(Debug, Clone, PartialEq)]
pub enum TopoOrder {
    Order(Vec<usize>),
    /// Vertices that could not be ordered; each lies on or downstream of a cycle.
    Cycle(Vec<usize>),
}

pub fn topological_sort(a: &DenseMatrix) -> Result<TopoOrder> {
    if !a.is_square() {
        return dim_err("topological sort of a non-square matrix");
    }
    let d = a.rows();
    let mut indeg = vec![0usize; d];
    for i in 0..d {
        for j in 0..d {
            if a[(i, j)] != 0.0 {
                indeg[j] += 1;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..d).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for j in 0..d {
            if a[(v, j)] != 0.0 {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
    }
    if order.len() == d {
        Ok(TopoOrder::Order(order))
    } else {
        Ok(TopoOrder::Cycle((0..d).filter(|&v| indeg[v] > 0).collect()))
    }
}

/// True iff the nonzero pattern of `a` admits a topological order.
pub fn is_dag(a: &DenseMatrix) -> bool {
    matches!(topological_sort(a), Ok(TopoOrder::Order(_)))
}

/// Zeroes every entry with `|a(i,j)| < eps`.
pub fn threshold(a: &DenseMatrix, eps: f64) -> DenseMatrix {
    a.map(|v| if v.abs() < eps { 0.0 } else { v })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementalThreshold {
    pub matrix: DenseMatrix,
    pub eps: f64,
    /// Set when the loop ran past the largest entry and returned the empty graph.
    pub exhausted: bool,
}

/// Raises the threshold from `start` in steps of `step` until the polynomial
/// acyclicity measure of the result drops below `1e-8` and the remaining
/// edges form a DAG. Long weak cycles can pass the first test alone.
pub fn incremental_threshold(a: &DenseMatrix, start: f64, step: f64) -> Result<IncrementalThreshold> {
    if !(start >= 0.0) || !(step > 0.0) {
        return arg_err(format!("incremental threshold needs start >= 0 and step > 0, got {start}, {step}"));
    }
    if !a.is_square() {
        return dim_err("incremental threshold of a non-square matrix");
    }
    let limit = a.max_abs() + step;
    let mut k = 0u32;
    loop {
        let eps = start + step * f64::from(k);
        if eps > limit {
            return Ok(IncrementalThreshold {
                matrix: DenseMatrix::zeros(a.rows(), a.cols()),
                eps,
                exhausted: true,
            });
        }
        let t = threshold(a, eps);
        if h_poly(&t)? < 1e-8 && is_dag(&t) {
            return Ok(IncrementalThreshold { matrix: t, eps, exhausted: false });
        }
        k += 1;
    }
}

/// `grad p` restricted to its positive part, used by the objectives.
pub(crate) fn relu_grad(p: &Potential) -> DenseMatrix {
    relu_flow(&grad(p))
}
