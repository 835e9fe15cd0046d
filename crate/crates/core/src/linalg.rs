//! Small dense complex matrices for the test oracles.

use num_complex::Complex64;
use std::ops::{Index, IndexMut, Mul};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn from_columns(rows: usize, cols: &[Vec<C64>]) -> Self {
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &x) in col.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Matrix {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference after removing the global phase that best
    /// aligns `other` with `self`.
    pub fn max_abs_diff_up_to_phase(&self, other: &Matrix) -> f64 {
        let overlap: C64 = self.data.iter().zip(&other.data).map(|(a, b)| b.conj() * a).sum();
        if overlap.norm() < 1e-300 {
            return self.max_abs_diff(other);
        }
        let phase = overlap / overlap.norm();
        self.max_abs_diff(&other.scale(phase))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && (self.adjoint() * self).max_abs_diff(&Matrix::identity(self.rows)) <= tol
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul<&Matrix> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        let mut m = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    m.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

impl Mul<&Matrix> for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        &self * rhs
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Orthonormalizes a list of vectors with modified Gram-Schmidt, dropping
/// vectors that are linearly dependent on earlier ones.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let c = inner(u, &w);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= c * ui;
            }
        }
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol {
            out.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Projector onto the span of orthonormal columns.
pub fn projector(dim: usize, orthonormal: &[Vec<C64>]) -> Matrix {
    let mut p = Matrix::zeros(dim, dim);
    for v in orthonormal {
        for i in 0..dim {
            if v[i] == ZERO {
                continue;
            }
            for j in 0..dim {
                p[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_and_adjoint() {
        let x = Matrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]);
        let i = Matrix::identity(2);
        let xi = x.kron(&i);
        assert_eq!(xi[(0, 2)], ONE);
        assert!(xi.is_unitary(1e-12));
        assert_eq!(xi.adjoint(), xi);
    }

    #[test]
    fn gram_schmidt_drops_dependent() {
        let a = vec![ONE, ZERO];
        let b = vec![ONE.scale(2.0), ZERO];
        let c = vec![ONE, ONE];
        let o = orthonormalize(&[a, b, c], 1e-9);
        assert_eq!(o.len(), 2);
        assert!(projector(2, &o).max_abs_diff(&Matrix::identity(2)) < 1e-12);
    }

    #[test]
    fn phase_insensitive_diff() {
        let x = Matrix::identity(2);
        let y = x.scale(C64::from_polar(1.0, 0.7));
        assert!(x.max_abs_diff(&y) > 0.1);
        assert!(x.max_abs_diff_up_to_phase(&y) < 1e-12);
    }
}
