//! Exact density-matrix state with strided superoperator kernels.
//!
//! The state is the full `2^n x 2^n` matrix, row major. Gates and channels
//! are applied as superoperators on one- or two-qubit blocks: for each
//! combination of the untouched row/column bits, the relevant 4 (or 16)
//! entries are gathered, multiplied by the superoperator, and scattered
//! back. A pass over the state therefore costs one read and one write of
//! every entry regardless of the channel, which is what makes fusing
//! channels into few passes worthwhile (see [`crate::sim`]).
//!
//! Parallelism splits the row space; every (row, column) entry belongs to
//! exactly one task and each output is a fixed-order sum, so results are
//! bitwise reproducible for any thread count.
//!
//! Generic over `f64`/`f32` storage: single precision halves the footprint
//! when the full double-precision state would not fit in memory.

use crate::linalg::{Complex64, Matrix};
use num_complex::Complex;
use rayon::prelude::*;

/// Storage scalar for the density matrix.
pub trait Real:
    num_traits::Float + Copy + Send + Sync + std::fmt::Debug + std::iter::Sum + 'static
{
    const COMPLEX_BYTES: usize;
    fn from_f64(v: f64) -> Self;
    fn into_f64(self) -> f64;
}

impl Real for f64 {
    const COMPLEX_BYTES: usize = 16;
    fn from_f64(v: f64) -> Self {
        v
    }
    fn into_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const COMPLEX_BYTES: usize = 8;
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn into_f64(self) -> f64 {
        self as f64
    }
}

/// Bytes needed for an `n`-qubit density matrix at the given storage width;
/// `None` on overflow.
pub fn density_matrix_bytes(n_qubits: usize, complex_bytes: usize) -> Option<u128> {
    if n_qubits >= 32 {
        return None;
    }
    Some((1u128 << (2 * n_qubits)) * complex_bytes as u128)
}

/// Insert a zero bit at the position given by `mask` (a power of two),
/// shifting higher bits up.
#[inline(always)]
fn insert_bit(v: usize, mask: usize) -> usize {
    ((v & !(mask - 1)) << 1) | (v & (mask - 1))
}

/// Superoperator rows with explicit zeros dropped. Gate superoperators are
/// mostly permutations or diagonals, so this saves most of the arithmetic.
struct SparseRows<T> {
    rows: Vec<Vec<(usize, Complex<T>)>>,
}

impl<T: Real> SparseRows<T> {
    fn from_matrix(s: &Matrix) -> Self {
        let d = s.dim();
        let rows = (0..d)
            .map(|r| {
                (0..d)
                    .filter_map(|c| {
                        let z = s[(r, c)];
                        if z.re == 0.0 && z.im == 0.0 {
                            None
                        } else {
                            Some((c, Complex::new(T::from_f64(z.re), T::from_f64(z.im))))
                        }
                    })
                    .collect()
            })
            .collect();
        SparseRows { rows }
    }
}

/// Raw pointer wrapper so a partitioned index space can be written from
/// rayon tasks. Safety rests on the partition: no two tasks touch the same
/// index.
#[derive(Clone, Copy)]
struct SendPtr<T>(*mut Complex<T>);
unsafe impl<T> Send for SendPtr<T> {}
unsafe impl<T> Sync for SendPtr<T> {}

/// Below this many tasks the rayon dispatch overhead dominates; run serial.
const PARALLEL_CUTOFF: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    /// All qubits in |0>.
    pub fn ground(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        data[0] = Complex::new(T::one(), T::zero());
        DensityMatrix { n: n_qubits, data }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    /// Apply a 4x4 superoperator to one qubit.
    pub fn apply_superop1(&mut self, qubit: usize, superop: &Matrix) {
        assert_eq!(superop.dim(), 4);
        assert!(qubit < self.n);
        let s = SparseRows::<T>::from_matrix(superop);
        let dim = self.dim();
        let mask = 1usize << qubit;
        let half = dim >> 1;
        let ptr = SendPtr(self.data.as_mut_ptr());

        let task = |r_rest: usize| {
            let ptr = ptr;
            let r0 = insert_bit(r_rest, mask);
            let r1 = r0 | mask;
            let bases = [r0 * dim, r1 * dim];
            for c_rest in 0..half {
                let c0 = insert_bit(c_rest, mask);
                let cols = [c0, c0 | mask];
                // SAFETY: rows r0 and r1 are uniquely owned by this task
                // (r_rest determines them bijectively); columns are fully
                // enumerated inside it.
                unsafe {
                    let mut v = [Complex::new(T::zero(), T::zero()); 4];
                    for r in 0..2 {
                        for c in 0..2 {
                            v[r * 2 + c] = *ptr.0.add(bases[r] + cols[c]);
                        }
                    }
                    for r in 0..2 {
                        for c in 0..2 {
                            let mut acc = Complex::new(T::zero(), T::zero());
                            for &(j, coef) in &s.rows[r * 2 + c] {
                                acc = acc + coef * v[j];
                            }
                            *ptr.0.add(bases[r] + cols[c]) = acc;
                        }
                    }
                }
            }
        };

        if half >= PARALLEL_CUTOFF {
            (0..half).into_par_iter().for_each(task);
        } else {
            (0..half).for_each(task);
        }
    }

    /// Apply a 16x16 superoperator to a qubit pair; `a` is the low local
    /// bit, matching [`crate::linalg::embed`].
    pub fn apply_superop2(&mut self, a: usize, b: usize, superop: &Matrix) {
        assert_eq!(superop.dim(), 16);
        assert!(a < self.n && b < self.n && a != b);
        let s = SparseRows::<T>::from_matrix(superop);
        let dim = self.dim();
        let mask_a = 1usize << a;
        let mask_b = 1usize << b;
        let (lo, hi) = (mask_a.min(mask_b), mask_a.max(mask_b));
        let quarter = dim >> 2;
        let ptr = SendPtr(self.data.as_mut_ptr());

        let task = |r_rest: usize| {
            let ptr = ptr;
            let r00 = insert_bit(insert_bit(r_rest, lo), hi);
            // local index = bit(a) + 2*bit(b)
            let rows = [r00, r00 | mask_a, r00 | mask_b, r00 | mask_a | mask_b];
            let bases = [rows[0] * dim, rows[1] * dim, rows[2] * dim, rows[3] * dim];
            for c_rest in 0..quarter {
                let c00 = insert_bit(insert_bit(c_rest, lo), hi);
                let cols = [c00, c00 | mask_a, c00 | mask_b, c00 | mask_a | mask_b];
                // SAFETY: the four rows are uniquely owned by this task.
                unsafe {
                    let mut v = [Complex::new(T::zero(), T::zero()); 16];
                    for r in 0..4 {
                        for c in 0..4 {
                            v[r * 4 + c] = *ptr.0.add(bases[r] + cols[c]);
                        }
                    }
                    for r in 0..4 {
                        for c in 0..4 {
                            let mut acc = Complex::new(T::zero(), T::zero());
                            for &(j, coef) in &s.rows[r * 4 + c] {
                                acc = acc + coef * v[j];
                            }
                            *ptr.0.add(bases[r] + cols[c]) = acc;
                        }
                    }
                }
            }
        };

        if quarter >= PARALLEL_CUTOFF {
            (0..quarter).into_par_iter().for_each(task);
        } else {
            (0..quarter).for_each(task);
        }
    }

    /// Trace, accumulated in f64 regardless of storage precision.
    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..dim {
            let z = self.data[i * dim + i];
            re += z.re.into_f64();
            im += z.im.into_f64();
        }
        Complex64::new(re, im)
    }

    /// Real parts of the diagonal: outcome probabilities over all qubits.
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i].re.into_f64()).collect()
    }

    /// Marginal outcome distribution: output bit `j` reads qubit
    /// `bit_sources[j]`; all other qubits are summed out.
    pub fn marginal(&self, bit_sources: &[usize]) -> Vec<f64> {
        let k = bit_sources.len();
        let mut out = vec![0.0f64; 1 << k];
        for (x, p) in self.diagonal().into_iter().enumerate() {
            let mut y = 0usize;
            for (j, &q) in bit_sources.iter().enumerate() {
                if x >> q & 1 == 1 {
                    y |= 1 << j;
                }
            }
            out[y] += p;
        }
        out
    }

    /// Largest deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                let a = self.data[r * dim + c];
                let b = self.data[c * dim + r];
                let dre = a.re.into_f64() - b.re.into_f64();
                let dim_ = a.im.into_f64() + b.im.into_f64();
                worst = worst.max((dre * dre + dim_ * dim_).sqrt());
            }
        }
        worst
    }

    /// Dense copy as an f64 matrix; for cross-checks on small states.
    pub fn to_matrix(&self) -> Matrix {
        let dim = self.dim();
        assert!(self.n <= 12, "dense copy only intended for small states");
        let data = self
            .data
            .iter()
            .map(|z| Complex64::new(z.re.into_f64(), z.im.into_f64()))
            .collect();
        Matrix::from_vec(dim, data)
    }

    /// Largest elementwise difference against an f64 reference matrix.
    pub fn max_abs_diff(&self, reference: &Matrix) -> f64 {
        let dim = self.dim();
        assert_eq!(reference.dim(), dim);
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let z = self.data[r * dim + c];
                let d = Complex64::new(z.re.into_f64(), z.im.into_f64()) - reference[(r, c)];
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}
