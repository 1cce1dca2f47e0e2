//! Small dense complex matrices.
//!
//! Everything in the gate/channel layer lives in dimension 2, 4, or 16, so a
//! plain row-major `Vec<Complex64>` is all we need. The density-matrix engine
//! has its own strided storage; this module only covers the "small" math:
//! gate matrices, Kraus operators, superoperators and the helpers the tests
//! use to compare them.

use num_complex::Complex;
use std::fmt;
use std::ops::{Index, IndexMut};

pub type Complex64 = Complex<f64>;

pub const ZERO: Complex64 = Complex::new(0.0, 0.0);
pub const ONE: Complex64 = Complex::new(1.0, 0.0);
pub const I: Complex64 = Complex::new(0.0, 1.0);

/// Square row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data length must be dim^2");
        Matrix { dim, data }
    }

    /// Build from real entries; handy for Pauli-style constants in tests.
    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        Matrix::from_vec(dim, entries.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let (n, m) = (self.dim, rhs.dim);
        let mut out = Matrix::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![ZERO; self.dim];
        for i in 0..self.dim {
            let mut acc = ZERO;
            for j in 0..self.dim {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.dagger().mul(self).max_abs_diff(&Matrix::identity(self.dim)) <= tol
    }

    /// True when `self == e^{i phi} rhs` for some real `phi`.
    pub fn eq_up_to_global_phase(&self, rhs: &Matrix, tol: f64) -> bool {
        if self.dim != rhs.dim {
            return false;
        }
        // Fix the phase on the largest entry of rhs, then compare directly.
        let (mut best, mut idx) = (0.0f64, 0usize);
        for (k, z) in rhs.data.iter().enumerate() {
            if z.norm() > best {
                best = z.norm();
                idx = k;
            }
        }
        if best <= tol {
            return self.max_abs() <= tol;
        }
        let phase = self.data[idx] / rhs.data[idx];
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        self.max_abs_diff(&rhs.scale(phase)) <= tol
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix(dim={})", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|z| format!("{:.4}{:+.4}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn pauli_i() -> Matrix {
    Matrix::identity(2)
}

pub fn pauli_x() -> Matrix {
    Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> Matrix {
    Matrix::from_vec(2, vec![ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
}

/// The sixteen two-qubit Pauli products `P ⊗ Q` in row-major order of
/// `(P, Q) ∈ {I,X,Y,Z}²`, with the first factor acting on the higher bit.
pub fn two_qubit_paulis() -> Vec<Matrix> {
    let singles = [pauli_i(), pauli_x(), pauli_y(), pauli_z()];
    let mut out = Vec::with_capacity(16);
    for p in &singles {
        for q in &singles {
            out.push(p.kron(q));
        }
    }
    out
}

/// Embed a 1- or 2-qubit gate into the full `2^n` unitary.
///
/// Qubit 0 is the least significant bit of a basis index. For two-qubit gates
/// the local matrix is indexed with `qubits[0]` as the low bit and `qubits[1]`
/// as the high bit of the local 2-bit index.
pub fn embed(n_qubits: usize, gate: &Matrix, qubits: &[usize]) -> Matrix {
    let dim = 1usize << n_qubits;
    for &q in qubits {
        assert!(q < n_qubits, "qubit index out of range in embed");
    }
    match qubits {
        [q] => {
            assert_eq!(gate.dim(), 2);
            let mut out = Matrix::zeros(dim);
            let mask = 1usize << q;
            for col in 0..dim {
                let cb = (col & mask != 0) as usize;
                for rb in 0..2 {
                    let row = (col & !mask) | (rb << q);
                    out[(row, col)] = gate[(rb, cb)];
                }
            }
            out
        }
        [a, b] => {
            assert_eq!(gate.dim(), 4);
            assert_ne!(a, b, "two-qubit gate needs distinct qubits");
            let (ma, mb) = (1usize << a, 1usize << b);
            let mut out = Matrix::zeros(dim);
            for col in 0..dim {
                let clocal = ((col & ma != 0) as usize) | (((col & mb != 0) as usize) << 1);
                let base = col & !(ma | mb);
                for rlocal in 0..4 {
                    let row = base | ((rlocal & 1) * ma) | (((rlocal >> 1) & 1) * mb);
                    out[(row, col)] = gate[(rlocal, clocal)];
                }
            }
            out
        }
        _ => panic!("embed supports 1- or 2-qubit gates"),
    }
}
