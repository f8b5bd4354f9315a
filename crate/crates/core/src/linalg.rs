//! Small dense symmetric linear algebra: cyclic Jacobi eigendecomposition,
//! spectral matrix functions and a clipped PSD factorization.
//!
//! Sized for `p <= 16`; matrices are stored row-major in a flat `Vec`.

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `self * other^T`.
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = (0..n).map(|k| self[(i, k)] * other[(j, k)]).sum();
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `Q diag(d) Q^T` with `Q` taken from the columns of `self`.
    pub fn congruence_diag(&self, d: &[f64]) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| self[(i, k)] * d[k] * self[(j, k)]).sum();
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Real symmetric matrix. Symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrixState(Matrix);

impl SymmetricMatrixState {
    /// Averages `m` with its transpose.
    pub fn new(m: Matrix) -> Self {
        let n = m.n;
        let mut m = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymmetricMatrixState(m)
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        Ok(Self::new(Matrix::from_row_major(n, data)?))
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrixState(Matrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrixState(Matrix::identity(n))
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        SymmetricMatrixState(m)
    }

    pub fn dim(&self) -> usize {
        self.0.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)]).sum()
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn reconstruct(&self) -> Matrix {
        self.vectors.congruence_diag(&self.values)
    }
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eigen(y: &SymmetricMatrixState) -> SymEigen {
    let n = y.dim();
    let mut a = y.matrix().clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();
    if n <= 1 || scale == 0.0 {
        return SymEigen { values: (0..n).map(|i| a[(i, i)]).collect(), vectors: v };
    }

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-16 * scale {
            break;
        }
        // First sweeps skip rotations on entries that are already small.
        let threshold = if sweep < 3 { 0.2 * off.sqrt() / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if sweep > 3 && apq.abs() < f64::EPSILON * 1e-2 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, t);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    SymEigen { values, vectors }
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.n;
    let apq = a[(p, q)];
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        a[(k, p)] = np;
        a[(p, k)] = np;
        a[(k, q)] = nq;
        a[(q, k)] = nq;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Applies `f` to the spectrum: `Q diag(f(lambda)) Q^T`.
pub fn spectral_map(y: &SymmetricMatrixState, f: impl Fn(f64) -> f64) -> SymmetricMatrixState {
    let eig = sym_eigen(y);
    let d: Vec<f64> = eig.values.iter().map(|&l| f(l)).collect();
    SymmetricMatrixState(eig.vectors.congruence_diag(&d))
}

/// `sqrt(|Y|)` with the absolute value taken on eigenvalues.
pub fn matrix_abs_sqrt(y: &SymmetricMatrixState) -> SymmetricMatrixState {
    spectral_map(y, |l| l.abs().sqrt())
}

/// Relative tolerance on negative eigenvalues accepted (and clipped) by
/// [`psd_factor`].
pub const TOL_PSD: f64 = 1e-9;

/// Lower-triangular `L` with `L L^T = S_+`, where `S_+` clips the negative
/// eigenvalues of `S` to zero.
///
/// Fails when an eigenvalue is below `-TOL_PSD * ||S||`.
pub fn psd_factor(s: &SymmetricMatrixState) -> Result<Matrix> {
    let n = s.dim();
    let norm = s.matrix().frobenius_norm();
    if norm == 0.0 {
        return Ok(Matrix::zeros(n));
    }
    let eig = sym_eigen(s);
    let min = eig.values[0];
    if min < -TOL_PSD * norm {
        return Err(Error::NotPsd { min_eigenvalue: min, norm });
    }
    let clipped = if min < 0.0 {
        let d: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
        eig.vectors.congruence_diag(&d)
    } else {
        s.matrix().clone()
    };
    Ok(semidefinite_cholesky(&clipped, norm))
}

/// Cholesky that zeroes a column when its pivot is numerically zero.
fn semidefinite_cholesky(a: &Matrix, norm: f64) -> Matrix {
    let n = a.n;
    let mut l = Matrix::zeros(n);
    let pivot_floor = 64.0 * f64::EPSILON * norm;
    for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d <= pivot_floor {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let v = a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / ljj;
        }
    }
    l
}
