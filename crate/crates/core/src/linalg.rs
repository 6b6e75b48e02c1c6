//! Small dense symmetric linear algebra.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major square symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    /// Leading `k × k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `xᵀ M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigen-decomposition `M = V diag(λ) Vᵀ`, eigenvalues ascending; column
/// `k` of `vectors` (stored row-major) belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: SymMatrix,
}

pub fn sym_eigen(m: &SymMatrix) -> SymEigen {
    let n = m.dim();
    let eig = nalgebra::DMatrix::from_row_slice(n, n, &m.data).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = SymMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.data[row * n + col] = eig.eigenvectors[(row, src)];
        }
    }
    SymEigen { values, vectors }
}

/// Minimum-norm least-squares solution of `M x = b` through the spectral
/// pseudo-inverse; eigenvalues below `rel_threshold · λ_max` are dropped.
#[derive(Debug, Clone)]
pub struct PseudoSolve {
    pub x: Vec<f64>,
    pub rank: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

pub fn pseudo_solve(m: &SymMatrix, b: &[f64], rel_threshold: f64) -> PseudoSolve {
    let n = m.dim();
    let eig = sym_eigen(m);
    let max_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
    let min_eigenvalue = eig.values.first().copied().unwrap_or(0.0);
    let cut = rel_threshold * max_eigenvalue.abs();
    let mut x = vec![0.0; n];
    let mut rank = 0;
    for k in 0..n {
        let lambda = eig.values[k];
        if !(lambda > cut) {
            continue;
        }
        rank += 1;
        let proj: f64 = (0..n).map(|i| eig.vectors.get(i, k) * b[i]).sum();
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += eig.vectors.get(i, k) * proj / lambda;
        }
    }
    PseudoSolve { x, rank, min_eigenvalue, max_eigenvalue }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(n: usize) -> SymMatrix {
        SymMatrix::from_fn(n, |i, j| 1.0 / (i + j + 1) as f64)
    }

    #[test]
    fn eigen_reconstructs() {
        let m = SymMatrix::from_fn(4, |i, j| if i == j { 4.0 + i as f64 } else { 1.0 / (1 + i + j) as f64 });
        let e = sym_eigen(&m);
        for i in 0..4 {
            for j in 0..4 {
                let r: f64 = (0..4).map(|k| e.vectors.get(i, k) * e.values[k] * e.vectors.get(j, k)).sum();
                assert!((r - m.get(i, j)).abs() < 1e-13);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = SymMatrix::from_fn(2, |i, j| [[2.0, 1.0], [1.0, 2.0]][i][j]);
        let e = sym_eigen(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn solve_well_conditioned() {
        let m = hilbert(5);
        let x_true = [1.0, -2.0, 0.5, 3.0, -1.0];
        let b = m.mul_vec(&x_true);
        let s = pseudo_solve(&m, &b, 1e-14);
        assert_eq!(s.rank, 5);
        for (a, b) in s.x.iter().zip(x_true) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_gives_minimum_norm() {
        // rank one: [[1,1],[1,1]] x = [2,2] has minimum-norm solution [1,1]
        let m = SymMatrix::from_fn(2, |_, _| 1.0);
        let s = pseudo_solve(&m, &[2.0, 2.0], 1e-12);
        assert_eq!(s.rank, 1);
        assert!((s.x[0] - 1.0).abs() < 1e-14 && (s.x[1] - 1.0).abs() < 1e-14);
    }
}
