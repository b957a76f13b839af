//! Small dense matrices and Jacobi eigensolvers.
//!
//! Every matrix in this crate has dimension at most a few tens, so storage is
//! a flat row-major `Vec` and all products are naive triple loops.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{Entry, Real};

/// Hard cap on Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Absolute off-diagonal Frobenius norm at which a Jacobi iteration stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Copy> Matrix<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<E>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self {
            rows: n,
            cols: m,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<E> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<F: Copy>(&self, f: impl Fn(E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        &mut self.data[i * self.cols + j]
    }
}

impl<E> Matrix<E> {
    pub fn zeros<T: Real>(rows: usize, cols: usize) -> Self
    where
        E: Entry<T>,
    {
        Self {
            rows,
            cols,
            data: vec![E::zero(); rows * cols],
        }
    }

    pub fn identity<T: Real>(n: usize) -> Self
    where
        E: Entry<T>,
    {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    pub fn matmul<T: Real>(&self, rhs: &Self) -> Self
    where
        E: Entry<T>,
    {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == E::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mat_vec<T: Real>(&self, v: &[E]) -> Vec<E>
    where
        E: Entry<T>,
    {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mat_vec");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(E::zero(), |acc, (&a, &x)| acc + a * x)
            })
            .collect()
    }

    pub fn add<T: Real>(&self, rhs: &Self) -> Self
    where
        E: Entry<T>,
    {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub<T: Real>(&self, rhs: &Self) -> Self
    where
        E: Entry<T>,
    {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale<T: Real>(&self, x: T) -> Self
    where
        E: Entry<T>,
    {
        self.map(|a| a.scale(x))
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron<T: Real>(&self, rhs: &Self) -> Self
    where
        E: Entry<T>,
    {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    /// Conjugate transpose.
    pub fn adjoint<T: Real>(&self) -> Self
    where
        E: Entry<T>,
    {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace<T: Real>(&self) -> E
    where
        E: Entry<T>,
    {
        (0..self.rows.min(self.cols)).fold(E::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff<T: Real>(&self, rhs: &Self) -> T
    where
        E: Entry<T>,
    {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs<T: Real>(&self) -> T
    where
        E: Entry<T>,
    {
        self.data.iter().map(|&a| a.modulus()).fold(T::zero(), T::max)
    }

    pub fn frobenius_norm<T: Real>(&self) -> T
    where
        E: Entry<T>,
    {
        self.data
            .iter()
            .map(|&a| {
                let m = a.modulus();
                m * m
            })
            .sum::<T>()
            .sqrt()
    }

    /// Largest deviation from `self = self†`.
    pub fn hermiticity_error<T: Real>(&self) -> T
    where
        E: Entry<T>,
    {
        self.max_abs_diff(&self.adjoint())
    }
}

impl<T: Real> Matrix<T> {
    pub fn to_complex(&self) -> Matrix<Complex<T>> {
        self.map(|x| Complex::new(x, T::zero()))
    }
}

/// Inner product `⟨u|v⟩` with the first argument conjugated.
pub fn inner<T: Real, E: Entry<T>>(u: &[E], v: &[E]) -> E {
    u.iter()
        .zip(v)
        .fold(E::zero(), |acc, (&a, &b)| acc + a.conj() * b)
}

pub fn norm<T: Real, E: Entry<T>>(v: &[E]) -> T {
    v.iter()
        .map(|&a| {
            let m = a.modulus();
            m * m
        })
        .sum::<T>()
        .sqrt()
}

/// Spectral decomposition with eigenvalues ascending and eigenvectors in the
/// matching columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigen<T, E> {
    pub values: Vec<T>,
    pub vectors: Matrix<E>,
    pub sweeps: usize,
}

impl<T: Real, E: Entry<T>> Eigen<T, E> {
    pub fn vector(&self, k: usize) -> Vec<E> {
        self.vectors.column(k)
    }

    /// `V Λ V†`
    pub fn reconstruct(&self) -> Matrix<E> {
        let n = self.values.len();
        let scaled = Matrix::from_fn(n, n, |i, j| self.vectors[(i, j)].scale(self.values[j]));
        scaled.matmul(&self.vectors.adjoint())
    }
}

fn convergence_threshold<T: Real>(norm: T) -> T {
    T::lit(OFF_DIAGONAL_TOL).max(T::epsilon() * norm)
}

fn off_diagonal_norm<T: Real, E: Entry<T>>(a: &Matrix<E>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let m = a[(i, j)].modulus();
                acc = acc + m * m;
            }
        }
    }
    acc.sqrt()
}

/// Rotation parameters `(t, c, s)` annihilating a real off-diagonal entry.
#[inline]
fn jacobi_rotation<T: Real>(app: T, aqq: T, apq: T) -> (T, T, T) {
    let theta = (aqq - app) / (apq + apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(T::one()));
    let c = T::one() / t.hypot(T::one());
    (t, c, t * c)
}

/// Applies the plane rotation to rows/columns `p, q` of a Hermitian matrix
/// whose `(p, q)` entry is real and equal to `apq`, and to the columns of `v`.
fn rotate<T: Real, E: Entry<T> + DiagonalPart<T>>(a: &mut Matrix<E>, v: &mut Matrix<E>, p: usize, q: usize, apq: T) {
    let n = a.rows();
    let (app, aqq) = (a[(p, p)].real_part(), a[(q, q)].real_part());
    let (t, c, s) = jacobi_rotation(app, aqq, apq);
    let app = app - t * apq;
    let aqq = aqq + t * apq;
    a[(p, p)] = E::from_real(app);
    a[(q, q)] = E::from_real(aqq);
    a[(p, q)] = E::zero();
    a[(q, p)] = E::zero();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = arp.scale(c) - arq.scale(s);
        let new_rq = arp.scale(s) + arq.scale(c);
        a[(r, p)] = new_rp;
        a[(r, q)] = new_rq;
        a[(p, r)] = new_rp.conj();
        a[(q, r)] = new_rq.conj();
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp.scale(c) - vrq.scale(s);
        v[(r, q)] = vrp.scale(s) + vrq.scale(c);
    }
}

/// Reads the (real) diagonal of a Hermitian matrix generically.
trait DiagonalPart<T> {
    fn real_part(self) -> T;
}

impl<T: Real> DiagonalPart<T> for T {
    fn real_part(self) -> T {
        self
    }
}

impl<T: Real> DiagonalPart<T> for Complex<T> {
    fn real_part(self) -> T {
        self.re
    }
}

fn sort_ascending<T: Real, E: Entry<T>>(values: Vec<T>, vectors: Matrix<E>, sweeps: usize) -> Eigen<T, E> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    Eigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: Matrix::from_fn(n, n, |i, j| vectors[(i, order[j])]),
        sweeps,
    }
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
pub fn jacobi_eigh<T: Real>(matrix: &Matrix<T>) -> Result<Eigen<T, T>> {
    if !matrix.is_square() || matrix.max_abs_diff(&matrix.transpose()) > T::zero() {
        return Err(Error::NotSymmetric {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let n = matrix.rows();
    let mut a = matrix.clone();
    let mut v = Matrix::<T>::identity(n);
    let threshold = convergence_threshold(matrix.frobenius_norm());
    for sweep in 0..=MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off < threshold {
            let values = (0..n).map(|i| a[(i, i)]).collect();
            return Ok(sort_ascending(values, v, sweep));
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off_norm: off.as_f64(),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq != T::zero() {
                    rotate(&mut a, &mut v, p, q, apq);
                }
            }
        }
    }
    unreachable!()
}

/// Cyclic Jacobi eigensolver for a complex Hermitian matrix.
///
/// Each pivot is first rephased so the `(p, q)` entry becomes real and
/// positive; the remaining step is the real plane rotation.
pub fn jacobi_eigh_hermitian<T: Real>(matrix: &Matrix<Complex<T>>) -> Result<Eigen<T, Complex<T>>> {
    let norm = matrix.frobenius_norm();
    if !matrix.is_square() || matrix.hermiticity_error() > T::tol(1e-14) * norm.max(T::one()) {
        return Err(Error::NotSymmetric {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let n = matrix.rows();
    // Symmetrize exactly so the update below may rely on a_qp = conj(a_pq).
    let mut a = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::new(matrix[(i, i)].re, T::zero())
        } else {
            let half = T::lit(0.5);
            (matrix[(i, j)] + matrix[(j, i)].conj()) * half
        }
    });
    let mut v = Matrix::<Complex<T>>::identity(n);
    let threshold = convergence_threshold(norm);
    for sweep in 0..=MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off < threshold {
            let values = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok(sort_ascending(values, v, sweep));
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps: MAX_SWEEPS,
                off_norm: off.as_f64(),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let modulus = apq.norm();
                if modulus == T::zero() {
                    continue;
                }
                // Column q times conj(phase), row q times phase.
                let phase = apq / modulus;
                let phase_c = phase.conj();
                for r in 0..n {
                    a[(r, q)] = a[(r, q)] * phase_c;
                    v[(r, q)] = v[(r, q)] * phase_c;
                }
                for r in 0..n {
                    a[(q, r)] = a[(q, r)] * phase;
                }
                a[(p, q)] = Complex::new(modulus, T::zero());
                a[(q, p)] = Complex::new(modulus, T::zero());
                rotate(&mut a, &mut v, p, q, modulus);
            }
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
        let mut m = Matrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = rng.gen_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    #[test]
    fn one_by_one() {
        let m = Matrix::from_rows(&[vec![3.5]]);
        let e = jacobi_eigh(&m).unwrap();
        assert_eq!(e.values, vec![3.5]);
        assert_eq!(e.vector(0), vec![1.0]);
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(jacobi_eigh(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn random_eight_by_eight_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_symmetric(&mut rng, 8);
            let e = jacobi_eigh(&m).unwrap();
            assert!(e.reconstruct().max_abs_diff(&m) < 1e-12);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let vtv = e.vectors.transpose().matmul(&e.vectors);
            assert!(vtv.max_abs_diff(&Matrix::identity(8)) < 1e-13);
            let scale = m.frobenius_norm();
            for k in 0..8 {
                let v = e.vector(k);
                let hv = m.mat_vec(&v);
                let res: f64 = hv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - e.values[k] * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-13 * scale, "residual {res}");
            }
        }
    }

    #[test]
    fn hermitian_random_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 4, 8] {
            let mut m = Matrix::<Complex<f64>>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = Complex::new(rng.gen_range(-1.0..1.0), 0.0);
                for j in i + 1..n {
                    let z = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
            let e = jacobi_eigh_hermitian(&m).unwrap();
            assert!(e.reconstruct().max_abs_diff(&m) < 1e-12);
            let vv = e.vectors.adjoint().matmul(&e.vectors);
            assert!(vv.max_abs_diff(&Matrix::identity(n)) < 1e-13);
        }
    }

    #[test]
    fn single_precision_solver() {
        let m = Matrix::from_rows(&[vec![2.0f32, 1.0], vec![1.0, 2.0]]);
        let e = jacobi_eigh(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-6);
        assert!((e.values[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = Matrix::<f64>::identity(2);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert_eq!(k[(0, 2)], 2.0);
        assert_eq!(k[(3, 1)], 3.0);
        assert_eq!(k[(0, 1)], 0.0);
    }
}
