//! Small dense solvers: LU with partial pivoting, Cholesky, and the matrix
//! exponential by scaling and squaring with a degree-13 Padé approximant.

use crate::error::{dim_err, Error, Result};
use crate::matrix::DenseMatrix;

/// Solves `a x = b` for a square `a` and any number of right-hand columns.
pub fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return dim_err(format!("lu_solve: {}x{} with rhs {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
    }
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].abs().total_cmp(&lu[(j, col)].abs()))
            .expect("non-empty range");
        if lu[(pivot, col)] == 0.0 {
            return Err(Error::InvalidArgument("lu_solve: singular matrix".into()));
        }
        if pivot != col {
            for k in 0..n {
                let t = lu[(col, k)];
                lu[(col, k)] = lu[(pivot, k)];
                lu[(pivot, k)] = t;
            }
            for k in 0..m {
                let t = x[(col, k)];
                x[(col, k)] = x[(pivot, k)];
                x[(pivot, k)] = t;
            }
        }
        let diag = lu[(col, col)];
        for i in (col + 1)..n {
            let f = lu[(i, col)] / diag;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                lu[(i, k)] -= f * lu[(col, k)];
            }
            for k in 0..m {
                x[(i, k)] -= f * x[(col, k)];
            }
        }
    }
    for col in (0..n).rev() {
        let diag = lu[(col, col)];
        for k in 0..m {
            let mut s = x[(col, k)];
            for j in (col + 1)..n {
                s -= lu[(col, j)] * x[(j, k)];
            }
            x[(col, k)] = s / diag;
        }
    }
    Ok(x)
}

/// Lower-triangular `L` with `a = L L^T` for symmetric positive definite `a`.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return dim_err("cholesky of a non-square matrix");
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut s = a[(j, j)];
        for k in 0..j {
            s -= l[(j, k)] * l[(j, k)];
        }
        if !(s > 0.0) {
            return Err(Error::InvalidArgument("cholesky: matrix is not positive definite".into()));
        }
        let diag = s.sqrt();
        l[(j, j)] = diag;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / diag;
        }
    }
    Ok(l)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &DenseMatrix) -> f64 {
    (0..a.cols()).map(|j| (0..a.rows()).map(|i| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn lincomb(terms: &[(f64, &DenseMatrix)]) -> DenseMatrix {
    let (r, c) = (terms[0].1.rows(), terms[0].1.cols());
    let mut out = DenseMatrix::zeros(r, c);
    for (s, m) in terms {
        for (o, v) in out.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *o += s * v;
        }
    }
    out
}

/// Matrix exponential of a square matrix.
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return dim_err("expm of a non-square matrix");
    }
    let n = a.rows();
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(0.5_f64.powi(squarings));
    let b = &PADE13;
    let ident = DenseMatrix::identity(n);
    let a2 = a.matmul(&a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let inner_u = a6.matmul(&lincomb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]))?;
    let u = a.matmul(&lincomb(&[
        (1.0, &inner_u),
        (b[7], &a6),
        (b[5], &a4),
        (b[3], &a2),
        (b[1], &ident),
    ]))?;
    let inner_v = a6.matmul(&lincomb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]))?;
    let v = lincomb(&[(1.0, &inner_v), (b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)]);

    let mut r = lu_solve(&v.sub(&u)?, &v.add(&u)?)?;
    for _ in 0..squarings {
        r = r.matmul(&r)?;
    }
    Ok(r)
}
