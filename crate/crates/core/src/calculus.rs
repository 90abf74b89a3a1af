//! Exterior calculus on the complete graph: gradient, divergence, curl and
//! their adjoints, the two Laplacians, the projection onto gradient flows,
//! and directed reachability.

use crate::error::{arg_err, Result};
use crate::flow::{EdgeFlow, Potential, TriangleFlow};
use crate::matrix::DenseMatrix;

/// `(grad p)(i, j) = p(j) - p(i)`.
pub fn grad(p: &Potential) -> EdgeFlow {
    let v = p.values();
    EdgeFlow::from_upper_fn(p.dim(), |i, j| v[j] - v[i])
}

/// `(div Y)(i) = sum_j Y(i, j)`.
pub fn divergence(y: &EdgeFlow) -> Potential {
    let m = y.as_matrix();
    let values = (0..y.dim()).map(|i| m.row(i).iter().sum()).collect();
    Potential::new(values).expect("row sums of a finite flow are finite")
}

/// Adjoint of `grad`, the negated divergence.
pub fn grad_adjoint(y: &EdgeFlow) -> Potential {
    let div = divergence(y);
    Potential::new(div.values().iter().map(|v| -v).collect()).expect("finite")
}

#[inline]
fn curl_unchecked(y: &EdgeFlow, i: usize, j: usize, k: usize) -> f64 {
    y.get(i, j) + y.get(j, k) + y.get(k, i)
}

/// `Y(i,j) + Y(j,k) + Y(k,i)` for three distinct vertices.
pub fn curl_at(y: &EdgeFlow, i: usize, j: usize, k: usize) -> Result<f64> {
    let d = y.dim();
    if i >= d || j >= d || k >= d {
        return arg_err(format!("triangle ({i},{j},{k}) out of range for dim {d}"));
    }
    if i == j || j == k || i == k {
        return arg_err(format!("triangle ({i},{j},{k}) repeats a vertex"));
    }
    Ok(curl_unchecked(y, i, j, k))
}

/// Largest absolute curl over all triangles, evaluated on the fly.
pub fn curl_max(y: &EdgeFlow) -> f64 {
    let d = y.dim();
    let mut best = 0.0_f64;
    for i in 0..d {
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                best = best.max(curl_unchecked(y, i, j, k).abs());
            }
        }
    }
    best
}

/// Dense curl; limited to small dimensions.
pub fn curl(y: &EdgeFlow) -> Result<TriangleFlow> {
    TriangleFlow::from_sorted_fn(y.dim(), |i, j, k| curl_unchecked(y, i, j, k))
}

/// `(curl* T)(i, j) = sum_k T(i, j, k)`.
pub fn curl_adjoint(theta: &TriangleFlow) -> EdgeFlow {
    let d = theta.dim();
    EdgeFlow::from_upper_fn(d, |i, j| (0..d).map(|k| theta.get(i, j, k)).sum())
}

/// Graph Laplacian on vertices: `d p(i) - sum_j p(j)`.
pub fn laplacian0_apply(p: &Potential) -> Potential {
    let d = p.dim() as f64;
    let total: f64 = p.values().iter().sum();
    Potential::new(p.values().iter().map(|v| d * v - total).collect()).expect("finite")
}

/// Helmholtzian on edges, `grad grad* Y + curl* curl Y`, with the curl summed
/// on the fly so it works at any dimension.
pub fn helmholtzian_apply(y: &EdgeFlow) -> EdgeFlow {
    let d = y.dim();
    let lower = grad(&grad_adjoint(y));
    EdgeFlow::from_upper_fn(d, |i, j| {
        // repeated-index terms vanish
        let upper: f64 = (0..d).filter(|&k| k != i && k != j).map(|k| curl_unchecked(y, i, j, k)).sum();
        lower.get(i, j) + upper
    })
}

/// Potential `phi` of the L2 projection of `y` onto gradient flows, pinned to
/// `phi(d-1) = 0`.
///
/// Solves `Laplacian0 phi = -div y` on the first `d - 1` vertices. The pinned
/// Laplacian there is `d I - J`, whose inverse is `(I + J) / d`, so
/// `phi(i) = -(v(i) + sum_{j < d-1} v(j)) / d` with `v = div y`.
pub fn hodge_potential(y: &EdgeFlow) -> Result<Potential> {
    let d = y.dim();
    if d < 2 {
        return arg_err(format!("projection needs at least 2 vertices, got {d}"));
    }
    let v = divergence(y);
    let v = v.values();
    let head: f64 = v[..d - 1].iter().sum();
    let inv_d = 1.0 / d as f64;
    let mut phi: Vec<f64> = v[..d - 1].iter().map(|vi| -(vi + head) * inv_d).collect();
    phi.push(0.0);
    Potential::new(phi)
}

/// L2 projection of `y` onto the gradient flows.
pub fn hodge_project(y: &EdgeFlow) -> EdgeFlow {
    if y.dim() < 2 {
        return EdgeFlow::zeros(y.dim());
    }
    grad(&hodge_potential(y).expect("dim >= 2"))
}

/// Reachability matrix: entry `(i, j)` is 1 iff a directed path of length at
/// least one leads from `i` to `j`. Any nonzero entry of `a` is an edge.
pub fn connectivity(a: &DenseMatrix) -> DenseMatrix {
    assert!(a.is_square(), "connectivity of a non-square matrix");
    let d = a.rows();
    let mut reach: Vec<bool> = a.as_slice().iter().map(|v| *v != 0.0).collect();
    // Warshall
    for k in 0..d {
        for i in 0..d {
            if !reach[i * d + k] {
                continue;
            }
            for j in 0..d {
                if reach[k * d + j] {
                    reach[i * d + j] = true;
                }
            }
        }
    }
    DenseMatrix::from_vec(d, d, reach.into_iter().map(|r| if r { 1.0 } else { 0.0 }).collect())
        .expect("shape preserved")
}
