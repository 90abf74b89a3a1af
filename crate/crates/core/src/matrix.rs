//! Row-major dense matrices and the handful of primitives the rest of the
//! crate needs: products, Hadamard products, powers, norms and CSV I/O.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::ops::{Index, IndexMut};
use std::path::Path;

use crate::error::{dim_err, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data. Rejects wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return dim_err(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "entry ({}, {}) is {}",
                pos / cols.max(1),
                pos % cols.max(1),
                data[pos]
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return dim_err(format!("row {i} has {} entries, expected {cols}", r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return dim_err(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, op: &str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other, op)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "hadamard", |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return dim_err(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; n * p];
        for i in 0..n {
            let out_row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * p..(k + 1) * p];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { rows: n, cols: p, data: out })
    }

    /// `k`-fold product by binary exponentiation; `k = 0` yields the identity.
    pub fn matrix_power(&self, k: u32) -> Result<Self> {
        if !self.is_square() {
            return dim_err(format!("matrix_power of non-square {}x{}", self.rows, self.cols));
        }
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = k;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result.matmul(&base)? };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of entries that are exactly nonzero.
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Plain CSV: one row per line, no header, shortest round-trip decimal
    /// representation of every entry.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(self.data.len() * 8);
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{v}").expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut data = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Csv { row: i + 1, col: 0, msg: e.to_string() })?;
            if record.len() == 1 && record[0].is_empty() {
                continue;
            }
            match cols {
                None => cols = Some(record.len()),
                Some(c) if c != record.len() => {
                    return Err(Error::Csv {
                        row: i + 1,
                        col: record.len().min(c) + 1,
                        msg: format!("expected {c} fields, found {}", record.len()),
                    })
                }
                _ => {}
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Csv {
                    row: i + 1,
                    col: j + 1,
                    msg: format!("cannot parse {field:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Csv { row: i + 1, col: j + 1, msg: format!("non-finite value {field}") });
                }
                data.push(v);
            }
            rows += 1;
        }
        Self::from_vec(rows, cols.unwrap_or(0), data)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(f))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn hadamard_examples() {
        let a = m(&[&[1., 2.], &[3., 4.]]);
        assert_eq!(a.hadamard(&DenseMatrix::identity(2)).unwrap(), m(&[&[1., 0.], &[0., 4.]]));
        assert_eq!(a.hadamard(&DenseMatrix::zeros(2, 2)).unwrap(), DenseMatrix::zeros(2, 2));
        let b = m(&[&[0., 2.], &[3., 0.]]);
        let c = m(&[&[0., -1.], &[1., 0.]]);
        assert_eq!(b.hadamard(&c).unwrap(), m(&[&[0., -2.], &[3., 0.]]));
        assert!(a.hadamard(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn power_examples() {
        let a = m(&[&[0.3, -1.], &[2., 0.5]]);
        assert_eq!(a.matrix_power(0).unwrap(), DenseMatrix::identity(2));
        assert_eq!(DenseMatrix::identity(3).matrix_power(7).unwrap(), DenseMatrix::identity(3));

        // repeated multiplication oracle
        let j = m(&[&[1., 1.], &[0., 1.]]);
        let direct = j.matmul(&j).unwrap().matmul(&j).unwrap();
        assert_eq!(direct, m(&[&[1., 3.], &[0., 1.]]));
        assert_eq!(j.matrix_power(3).unwrap(), direct);
        assert!(DenseMatrix::zeros(2, 3).matrix_power(2).is_err());
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let a = m(&[&[0.1, -1.0 / 3.0, 1e-300], &[12345.678901234567, 0.0, -2.5e17]]);
        let back = DenseMatrix::from_csv_reader(a.to_csv_string().as_bytes()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn csv_errors_name_position() {
        let err = DenseMatrix::from_csv_reader("1,2\n3,abc\n".as_bytes()).unwrap_err();
        match err {
            Error::Csv { row, col, .. } => assert_eq!((row, col), (2, 2)),
            e => panic!("unexpected {e}"),
        }
        let err = DenseMatrix::from_csv_reader("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { row: 2, .. }));
    }
}
