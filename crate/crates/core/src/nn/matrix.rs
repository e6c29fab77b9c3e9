use std::fmt;

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix. Column vectors are `n × 1`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{})", self.rows, self.cols)?;
        if self.data.len() <= 64 {
            write!(f, " {:?}", self.data)?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn column(values: &[f64]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Copy of column `c` as a column vector.
    pub fn col(&self, c: usize) -> Matrix {
        Matrix::column(&(0..self.rows).map(|r| self.get(r, c)).collect::<Vec<_>>())
    }

    /// New matrix made of the given columns, in order.
    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, indices.len());
        for r in 0..self.rows {
            let src = self.row(r);
            let dst = &mut out.data[r * indices.len()..(r + 1) * indices.len()];
            for (d, &i) in dst.iter_mut().zip(indices) {
                *d = src[i];
            }
        }
        out
    }

    /// Columns `start..end`.
    pub fn column_range(&self, start: usize, end: usize) -> Matrix {
        let width = end - start;
        let mut out = Matrix::zeros(self.rows, width);
        for r in 0..self.rows {
            out.data[r * width..(r + 1) * width].copy_from_slice(&self.row(r)[start..end]);
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn map_in_place(&mut self, f: impl Fn(f64) -> f64) {
        self.data.iter_mut().for_each(|v| *v = f(*v));
    }

    /// Sum of each row, as a column vector.
    pub fn row_sums(&self) -> Matrix {
        Matrix::column(
            &(0..self.rows)
                .map(|r| self.row(r).iter().sum())
                .collect::<Vec<_>>(),
        )
    }

    /// Adds column vector `bias` to every column.
    pub fn add_column_in_place(&mut self, bias: &Matrix) -> Result<()> {
        if bias.cols != 1 || bias.rows != self.rows {
            return Err(Error::contract(format!(
                "cannot broadcast {:?} over {:?}",
                bias.shape(),
                self.shape()
            )));
        }
        for r in 0..self.rows {
            let b = bias.data[r];
            self.data[r * self.cols..(r + 1) * self.cols]
                .iter_mut()
                .for_each(|v| *v += b);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        check_mul(self.shape(), rhs.shape())?;
        Ok(gemm(
            (self.rows, self.cols),
            &self.data,
            (self.cols as isize, 1),
            &rhs.data,
            (rhs.cols as isize, 1),
            rhs.cols,
        ))
    }

    /// `selfᵀ · rhs` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        check_mul((self.cols, self.rows), rhs.shape())?;
        Ok(gemm(
            (self.cols, self.rows),
            &self.data,
            (1, self.cols as isize),
            &rhs.data,
            (rhs.cols as isize, 1),
            rhs.cols,
        ))
    }

    /// `self · rhsᵀ` without materializing the transpose.
    pub fn matmul_t(&self, rhs: &Matrix) -> Result<Matrix> {
        check_mul(self.shape(), (rhs.cols, rhs.rows))?;
        Ok(gemm(
            (self.rows, self.cols),
            &self.data,
            (self.cols as isize, 1),
            &rhs.data,
            (1, rhs.cols as isize),
            rhs.rows,
        ))
    }
}

fn check_mul(lhs: (usize, usize), rhs: (usize, usize)) -> Result<()> {
    if lhs.1 != rhs.0 {
        return Err(Error::contract(format!(
            "cannot multiply {}x{} by {}x{}",
            lhs.0, lhs.1, rhs.0, rhs.1
        )));
    }
    Ok(())
}

/// C = A·B for an m×k A and k×n B given by row/column strides.
fn gemm(
    (m, k): (usize, usize),
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    n: usize,
) -> Matrix {
    let mut c = Matrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: strides describe exactly the m×k and k×n views of `a` and `b`,
    // whose lengths the callers checked through the matrix shapes, and `c`
    // is a fresh m×n row-major buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    c
}
