//! Symmetric positive definite systems used by the solvers: the dense
//! nonlocal matrix and the tridiagonal second-difference matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Linear part `A` of the discrete equation `A u + b + f(u) = 0`.
pub trait SpdSystem {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn matvec(&self, x: &[f64], y: &mut [f64]);

    /// Solves `(A + diag(d)) x = rhs` with `x_i = 0` forced where `pinned[i]`.
    fn solve_shifted(&self, d: &[f64], pinned: &[bool], rhs: &[f64]) -> Result<Vec<f64>>;

    /// Upper bound on the largest eigenvalue.
    fn gershgorin(&self) -> f64;
}

/// Dense symmetric matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseSym {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl SpdSystem for DenseSym {
    fn dim(&self) -> usize {
        self.n
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn solve_shifted(&self, d: &[f64], pinned: &[bool], rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut m = DMatrix::<f64>::from_row_slice(n, n, &self.data);
        let mut b = DVector::<f64>::from_column_slice(rhs);
        for i in 0..n {
            if pinned[i] {
                m.row_mut(i).fill(0.0);
                m.column_mut(i).fill(0.0);
                m[(i, i)] = 1.0;
                b[i] = 0.0;
            } else {
                m[(i, i)] += d[i];
            }
        }
        let chol = m
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("matrix is not positive definite".into()))?;
        Ok(chol.solve(&b).as_slice().to_vec())
    }

    fn gershgorin(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Symmetric tridiagonal matrix: `diag` on the diagonal, `off` above and below.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl SpdSystem for Tridiag {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off * x[i - 1];
            }
            if i + 1 < n {
                v += self.off * x[i + 1];
            }
            y[i] = v;
        }
    }

    fn solve_shifted(&self, d: &[f64], pinned: &[bool], rhs: &[f64]) -> Result<Vec<f64>> {
        // Thomas algorithm; pinned rows become identity rows with zero coupling.
        let n = self.diag.len();
        let lower = |i: usize| if pinned[i] || pinned[i - 1] { 0.0 } else { self.off };
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut prev_c = 0.0;
        let mut prev_y = 0.0;
        for i in 0..n {
            let (di, ri) = if pinned[i] { (1.0, 0.0) } else { (self.diag[i] + d[i], rhs[i]) };
            let l = if i > 0 { lower(i) } else { 0.0 };
            let piv = di - l * prev_c;
            if !(piv > 0.0) {
                return Err(Error::LinearSolve("non-positive pivot".into()));
            }
            let up = if i + 1 < n { lower(i + 1) } else { 0.0 };
            c[i] = up / piv;
            y[i] = (ri - l * prev_y) / piv;
            prev_c = c[i];
            prev_y = y[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        Ok(y)
    }

    fn gershgorin(&self) -> f64 {
        self.diag.iter().map(|d| d.abs() + 2.0 * self.off.abs()).fold(0.0, f64::max)
    }
}
