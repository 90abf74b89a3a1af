//! Structural Hamming distance and score difference against a ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::matrix::DenseMatrix;
use crate::objective::{least_squares_loss, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ShdReport {
    pub shd: usize,
    pub extra: usize,
    pub missing: usize,
    pub reverse: usize,
}

/// Compares nonzero patterns. A predicted edge whose flipped version is a true
/// edge counts as reversed; other predicted edges absent from the truth in
/// both directions are extra; true edges absent in both directions from the
/// prediction are missing.
pub fn shd(a_hat: &DenseMatrix, a_true: &DenseMatrix) -> Result<ShdReport> {
    if a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols() || !a_hat.is_square() {
        return dim_err(format!(
            "shd of {}x{} against {}x{}",
            a_hat.rows(),
            a_hat.cols(),
            a_true.rows(),
            a_true.cols()
        ));
    }
    let d = a_hat.rows();
    let pred = |i: usize, j: usize| a_hat[(i, j)] != 0.0;
    let truth = |i: usize, j: usize| a_true[(i, j)] != 0.0;
    let mut r = ShdReport::default();
    for i in 0..d {
        for j in 0..d {
            if pred(i, j) && !truth(i, j) {
                if truth(j, i) {
                    r.reverse += 1;
                } else {
                    r.extra += 1;
                }
            }
            if truth(i, j) && !pred(i, j) && !pred(j, i) {
                r.missing += 1;
            }
        }
    }
    r.shd = r.extra + r.missing + r.reverse;
    Ok(r)
}

/// `F(a_hat) - F(a_true)` under the least-squares loss.
pub fn delta_f(a_hat: &DenseMatrix, a_true: &DenseMatrix, data: &Dataset) -> Result<f64> {
    Ok(least_squares_loss(a_hat, data)? - least_squares_loss(a_true, data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn truth() -> DenseMatrix {
        mat(&[&[0., 1., 1.], &[0., 0., -2.], &[0., 0., 0.]])
    }

    #[test]
    fn examples() {
        assert_eq!(shd(&truth(), &truth()).unwrap(), ShdReport::default());
        let flipped = mat(&[&[0., 1., 1.], &[0., 0., 0.], &[0., 3., 0.]]);
        assert_eq!(shd(&flipped, &truth()).unwrap(), ShdReport { shd: 1, extra: 0, missing: 0, reverse: 1 });
        assert_eq!(
            shd(&DenseMatrix::zeros(3, 3), &truth()).unwrap(),
            ShdReport { shd: 3, extra: 0, missing: 3, reverse: 0 }
        );
        assert!(shd(&DenseMatrix::zeros(2, 2), &truth()).is_err());
    }

    #[test]
    fn delta_f_examples() {
        let x = mat(&[&[1.0, 2.0, 0.5], &[-1.0, 0.0, 3.0]]);
        let ds = Dataset::new(x).unwrap();
        assert_eq!(delta_f(&truth(), &truth(), &ds).unwrap(), 0.0);
    }
}
