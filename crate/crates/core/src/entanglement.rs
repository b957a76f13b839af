//! Electron-nuclear entanglement of pure product-basis states.
//!
//! Entropies are in bits. A state is addressed by its amplitudes over the
//! [`ProductBasis`]; reshaping gives the `2 × (2I+1)` coefficient matrix
//! `C[s][i]` with rows indexed by `m_S` and columns by `m_I`, both descending.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{golden_section_min, Grid, SweepAxis};
use crate::hamiltonian::{AtomParams, ProductBasis, ELECTRON_SPIN};
use crate::linalg::{jacobi_eigh_hermitian, norm, Matrix};
use crate::num::Real;
use crate::spectra::{level_at, level_ids, levels_at, EigenLevel, LevelId};
use crate::spin_algebra::HalfInteger;

/// Largest accepted deviation of a state norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Schmidt weights below this are dropped; weights closer than
/// [`DEGENERACY_TOLERANCE`] are treated as equal.
pub const WEIGHT_FLOOR: f64 = 1e-14;
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    Electron,
    Nuclear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensity<T> {
    pub subsystem: Subsystem,
    pub matrix: Matrix<Complex<T>>,
}

impl<T: Real> ReducedDensity<T> {
    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(jacobi_eigh_hermitian(&self.matrix)?.values)
    }
}

fn checked_state<T: Real>(state: &[Complex<T>], basis: &ProductBasis) -> Result<()> {
    if state.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            actual: state.len(),
        });
    }
    let n = norm::<T, Complex<T>>(state);
    if (n - T::one()).abs() > T::lit(NORM_TOLERANCE) {
        return Err(Error::NotNormalized { norm: n.as_f64() });
    }
    Ok(())
}

/// The coefficient matrix `C[s][i] = ⟨m_S, m_I|ψ⟩`.
pub fn coefficient_matrix<T: Real>(state: &[Complex<T>], basis: &ProductBasis) -> Result<Matrix<Complex<T>>> {
    checked_state(state, basis)?;
    let ni = basis.nuclear_spin().multiplicity();
    let mut c = Matrix::zeros(ELECTRON_SPIN.multiplicity(), ni);
    for (k, amp) in state.iter().enumerate() {
        let e = basis.entries()[k];
        let s = ELECTRON_SPIN.index_of(e.m_s).expect("valid m_S");
        let i = basis.nuclear_spin().index_of(e.m_i).expect("valid m_I");
        c[(s, i)] = *amp;
    }
    Ok(c)
}

/// Partial trace of `|ψ⟩⟨ψ|` over the complementary subsystem.
pub fn reduced_density<T: Real>(
    state: &[Complex<T>],
    basis: &ProductBasis,
    subsystem: Subsystem,
) -> Result<ReducedDensity<T>> {
    let c = coefficient_matrix(state, basis)?;
    let ca = c.adjoint();
    let matrix = match subsystem {
        Subsystem::Electron => c.matmul(&ca),
        Subsystem::Nuclear => ca.matmul(&c).transpose(),
    };
    Ok(ReducedDensity { subsystem, matrix })
}

/// `-Σ λ log₂ λ` over eigenvalues clipped to `[0, 1]`, with `0 log 0 = 0`.
pub fn entropy_of_weights<T: Real>(weights: &[T]) -> T {
    weights
        .iter()
        .map(|&w| w.max(T::zero()).min(T::one()))
        .filter(|&w| w > T::zero())
        .map(|w| -w * w.log2())
        .sum::<T>()
        .max(T::zero())
}

pub fn von_neumann_entropy<T: Real>(rho: &ReducedDensity<T>) -> Result<T> {
    Ok(entropy_of_weights(&rho.eigenvalues()?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchmidtDecomposition<T> {
    /// Weights `p_i`, descending; only nonzero terms are kept.
    pub coefficients: Vec<T>,
    pub electron_vectors: Vec<Vec<Complex<T>>>,
    pub nuclear_vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> SchmidtDecomposition<T> {
    /// Number of terms `M`.
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn entropy(&self) -> T {
        entropy_of_weights(&self.coefficients)
    }

    /// `Σ √p_i |e_i⟩ ⊗ |f_i⟩` in product-basis order.
    pub fn reconstruct(&self, basis: &ProductBasis) -> Vec<Complex<T>> {
        basis
            .entries()
            .iter()
            .map(|e| {
                let s = ELECTRON_SPIN.index_of(e.m_s).expect("valid m_S");
                let i = basis.nuclear_spin().index_of(e.m_i).expect("valid m_I");
                self.coefficients
                    .iter()
                    .zip(&self.electron_vectors)
                    .zip(&self.nuclear_vectors)
                    .map(|((&p, ev), nv)| ev[s] * nv[i] * p.sqrt())
                    .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
            })
            .collect()
    }

    /// Vectors of one subsystem.
    pub fn vectors(&self, subsystem: Subsystem) -> &[Vec<Complex<T>>] {
        match subsystem {
            Subsystem::Electron => &self.electron_vectors,
            Subsystem::Nuclear => &self.nuclear_vectors,
        }
    }
}

/// Rotates `v` so that its largest-magnitude component (first on near-ties)
/// is real and positive; returns the applied unit phase.
fn fix_gauge<T: Real>(v: &mut [Complex<T>]) -> Complex<T> {
    let max = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
    let lead = v
        .iter()
        .position(|z| z.norm() >= max - T::tol(DEGENERACY_TOLERANCE))
        .expect("nonempty vector");
    let phase = v[lead].conj() / v[lead].norm();
    v.iter_mut().for_each(|z| *z = *z * phase);
    phase
}

/// Schmidt decomposition from the eigenvectors of the electron density.
///
/// Equal weights fall back to the `m_S` basis, ordered by descending `m_S`.
/// Each electron vector is gauge-fixed; its nuclear partner absorbs the
/// compensating phase.
pub fn schmidt<T: Real>(state: &[Complex<T>], basis: &ProductBasis) -> Result<SchmidtDecomposition<T>> {
    let c = coefficient_matrix(state, basis)?;
    let rho = c.matmul(&c.adjoint());
    let eig = jacobi_eigh_hermitian(&rho)?;
    let dim = eig.values.len();
    let mut order: Vec<usize> = (0..dim).rev().collect();
    let degenerate = (eig.values[dim - 1] - eig.values[0]).abs() < T::lit(DEGENERACY_TOLERANCE);
    let electron_basis: Vec<Vec<Complex<T>>> = if degenerate {
        order = (0..dim).collect();
        (0..dim)
            .map(|k| {
                let mut v = vec![Complex::new(T::zero(), T::zero()); dim];
                v[k] = Complex::new(T::one(), T::zero());
                v
            })
            .collect()
    } else {
        (0..dim).map(|k| eig.vector(k)).collect()
    };

    let mut out = SchmidtDecomposition {
        coefficients: Vec::new(),
        electron_vectors: Vec::new(),
        nuclear_vectors: Vec::new(),
    };
    let ni = c.cols();
    for k in order {
        let mut e = electron_basis[k].clone();
        fix_gauge(&mut e);
        // |f⟩ ∝ (⟨e| ⊗ 1)|ψ⟩
        let mut f: Vec<Complex<T>> = (0..ni)
            .map(|i| {
                (0..dim).fold(Complex::new(T::zero(), T::zero()), |acc, s| acc + e[s].conj() * c[(s, i)])
            })
            .collect();
        let weight = norm::<T, Complex<T>>(&f).powi(2);
        if weight <= T::lit(WEIGHT_FLOOR) {
            continue;
        }
        let scale = T::one() / weight.sqrt();
        f.iter_mut().for_each(|z| *z = *z * scale);
        out.coefficients.push(weight);
        out.electron_vectors.push(e);
        out.nuclear_vectors.push(f);
    }
    // Normalise the weights so Σp = 1 holds to rounding.
    let total: T = out.coefficients.iter().copied().sum();
    out.coefficients.iter_mut().for_each(|p| *p = *p / total);
    Ok(out)
}

/// Electron-spin entropy of an eigenlevel.
pub fn level_entropy<T: Real>(level: &EigenLevel<T>, basis: &ProductBasis) -> Result<T> {
    let rho = reduced_density(&level.complex_amplitudes(), basis, Subsystem::Electron)?;
    von_neumann_entropy(&rho)
}

/// `p_max - p_min` of the electron density: zero exactly at maximal mixing
/// and strictly decreasing in the entropy for two-term states.
fn schmidt_spread<T: Real>(level: &EigenLevel<T>, basis: &ProductBasis) -> Result<T> {
    let rho = reduced_density(&level.complex_amplitudes(), basis, Subsystem::Electron)?;
    let ev = rho.eigenvalues()?;
    Ok(ev[ev.len() - 1] - ev[0])
}

/// Entropy of one level along a sweep.
pub fn entropy_sweep<T: Real>(atom: &AtomParams<T>, id: LevelId, axis: SweepAxis<T>, grid: &Grid<T>) -> Result<Vec<T>> {
    let basis = atom.basis();
    grid.values()
        .par_iter()
        .map(|&x| level_entropy(&level_at(atom, axis.point(x), id)?, &basis))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyTable<T> {
    pub axis: SweepAxis<T>,
    pub parameter: Vec<T>,
    pub ids: Vec<LevelId>,
    /// One row per grid point, columns in `ids` order.
    pub entropy: Vec<Vec<T>>,
}

/// Entropy of every level along a sweep.
pub fn entropy_table<T: Real>(atom: &AtomParams<T>, axis: SweepAxis<T>, grid: &Grid<T>) -> Result<EntropyTable<T>> {
    let basis = atom.basis();
    let parameter = grid.values();
    let entropy = parameter
        .par_iter()
        .map(|&x| {
            levels_at(atom, axis.point(x))?
                .iter()
                .map(|l| level_entropy(l, &basis))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    Ok(EntropyTable {
        axis,
        parameter,
        ids: level_ids(atom),
        entropy,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyPeak<T> {
    pub location: T,
    pub entropy: T,
}

/// Interior entropy maxima of one level along a sweep, refined by
/// golden-section search on the Schmidt spread to `x_tol`.
pub fn entropy_maxima<T: Real>(
    atom: &AtomParams<T>,
    id: LevelId,
    axis: SweepAxis<T>,
    grid: &Grid<T>,
    x_tol: T,
) -> Result<Vec<EntropyPeak<T>>> {
    let basis = atom.basis();
    let spread_at = |x: T| -> Result<T> { schmidt_spread(&level_at(atom, axis.point(x), id)?, &basis) };
    let xs = grid.values();
    let spread: Vec<T> = xs.iter().map(|&x| spread_at(x)).collect::<Result<_>>()?;
    let mut peaks = Vec::new();
    for k in 1..xs.len() - 1 {
        if spread[k] < spread[k - 1] && spread[k] <= spread[k + 1] {
            let (x, _) = golden_section_min(
                |x| spread_at(x).unwrap_or_else(|_| T::infinity()),
                xs[k - 1],
                xs[k + 1],
                x_tol,
            );
            let entropy = level_entropy(&level_at(atom, axis.point(x), id)?, &basis)?;
            peaks.push(EntropyPeak { location: x, entropy });
        }
    }
    Ok(peaks)
}

/// The sharp projection carried by a subsystem vector, if it has one.
pub fn sharp_projection<T: Real>(v: &[Complex<T>], spin: HalfInteger) -> Option<HalfInteger> {
    let tiny = T::lit(1e-12);
    let mut found = None;
    for (k, m) in spin.projections().enumerate() {
        if v[k].norm() > tiny {
            if found.is_some() {
                return None;
            }
            found = Some(m);
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::FieldPoint;
    use crate::linalg::inner;
    use crate::spectra::sodium_closed_form;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn hydrogen_basis() -> ProductBasis {
        ProductBasis::new(HalfInteger::HALF)
    }

    #[test]
    fn product_state_density() {
        let b = hydrogen_basis();
        let state = [c(1.0), c(0.0), c(0.0), c(0.0)];
        let rho = reduced_density(&state, &b, Subsystem::Electron).unwrap();
        assert_eq!(rho.matrix, Matrix::from_rows(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]]));
        assert_eq!(von_neumann_entropy(&rho).unwrap(), 0.0);
        let s = schmidt(&state, &b).unwrap();
        assert_eq!(s.rank(), 1);
        assert_eq!(s.coefficients, vec![1.0]);
    }

    #[test]
    fn singlet_is_maximally_mixed() {
        let b = hydrogen_basis();
        let r = 0.5f64.sqrt();
        let state = [c(0.0), c(-r), c(r), c(0.0)];
        for sub in [Subsystem::Electron, Subsystem::Nuclear] {
            let rho = reduced_density(&state, &b, sub).unwrap();
            assert!((rho.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
            assert!(rho.matrix[(0, 1)].norm() < 1e-15);
            assert!((von_neumann_entropy(&rho).unwrap() - 1.0).abs() < 1e-14);
        }
        // Degenerate weights use the m_S basis, m_S = +1/2 first.
        let s = schmidt(&state, &b).unwrap();
        assert_eq!(s.electron_vectors[0], vec![c(1.0), c(0.0)]);
        assert_eq!(s.electron_vectors[1], vec![c(0.0), c(1.0)]);
        assert!(s.nuclear_vectors[0][1].re < 0.0);
        let back = s.reconstruct(&b);
        for (x, y) in back.iter().zip(&state) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_unnormalised_and_misshapen_states() {
        let b = hydrogen_basis();
        assert!(matches!(
            reduced_density(&[c(1.0), c(1.0), c(0.0), c(0.0)], &b, Subsystem::Electron),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            reduced_density(&[c(1.0)], &b, Subsystem::Electron),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn entropy_formula_for_mixing_angle() {
        let hy = AtomParams::<f64>::hydrogen();
        let b = hy.basis();
        for &field in &[0.0, 0.01, -0.03, 0.2] {
            for level in levels_at(&hy, FieldPoint::new(field, 1.0)).unwrap() {
                let s = level_entropy(&level, &b).unwrap();
                let expected = match level.alpha {
                    Some(a) => {
                        let (u, v) = ((1.0 + a.cos()) / 2.0, (1.0 - a.cos()) / 2.0);
                        entropy_of_weights(&[u, v])
                    }
                    None => 0.0,
                };
                assert!((s - expected).abs() < 1e-12, "{} at {field}", level.id);
            }
        }
    }

    #[test]
    fn sodium_nuclear_density_eigenvalues() {
        let na = AtomParams::<f64>::sodium();
        let b = na.basis();
        let levels = sodium_closed_form(&na, FieldPoint::new(0.02, 1.0)).unwrap();
        let e1m = &levels[2];
        let a1 = e1m.alpha.unwrap();
        let rho = reduced_density(&e1m.complex_amplitudes(), &b, Subsystem::Nuclear).unwrap();
        let ev = rho.eigenvalues().unwrap();
        let mut expected = [0.0, 0.0, (a1 / 2.0).sin().powi(2), (a1 / 2.0).cos().powi(2)];
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in ev.iter().zip(expected) {
            assert!((x - y).abs() < 1e-14);
        }
        let s = schmidt(&e1m.complex_amplitudes(), &b).unwrap();
        assert_eq!(s.rank(), 2);
        // p(m_I = 1/2) = sin²(α₁/2), p(m_I = 3/2) = cos²(α₁/2)
        for (p, nv) in s.coefficients.iter().zip(&s.nuclear_vectors) {
            let m = sharp_projection(nv, na.nuclear_spin).unwrap();
            let expected = if m == HalfInteger::HALF {
                (a1 / 2.0).sin().powi(2)
            } else {
                assert_eq!(m, HalfInteger::from_twice(3));
                (a1 / 2.0).cos().powi(2)
            };
            assert!((p - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn schmidt_gauge_and_orthonormality() {
        let b = ProductBasis::new(HalfInteger::ONE);
        let raw = [c(0.3), Complex::new(0.1, -0.4), c(-0.2), Complex::new(0.0, 0.5), c(0.25), Complex::new(-0.3, 0.2)];
        let n = norm::<f64, Complex<f64>>(&raw);
        let state: Vec<_> = raw.iter().map(|z| z / n).collect();
        let s = schmidt(&state, &b).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(s.coefficients[0] >= s.coefficients[1]);
        assert!((s.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for e in &s.electron_vectors {
            let lead = e.iter().max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap()).unwrap();
            assert!(lead.im.abs() < 1e-15 && lead.re > 0.0);
        }
        for vs in [&s.electron_vectors, &s.nuclear_vectors] {
            for (i, u) in vs.iter().enumerate() {
                for (j, v) in vs.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((inner::<f64, Complex<f64>>(u, v) - c(expected)).norm() < 1e-13);
                }
            }
        }
        let back = s.reconstruct(&b);
        for (x, y) in back.iter().zip(&state) {
            assert!((x - y).norm() < 1e-13);
        }
        let rho_n = reduced_density(&state, &b, Subsystem::Nuclear).unwrap();
        assert!((von_neumann_entropy(&rho_n).unwrap() - s.entropy()).abs() < 1e-12);
    }

    #[test]
    fn hydrogen_entropy_peaks_at_zero_field() {
        let hy = AtomParams::<f64>::hydrogen();
        let grid = Grid::new(-0.5, 0.5, 101).unwrap();
        let axis = SweepAxis::Field { f: 1.0 };
        for name in ["0+", "0-"] {
            let id: LevelId = name.parse().unwrap();
            let s = entropy_sweep(&hy, id, axis, &grid).unwrap();
            assert!((s[50] - 1.0).abs() < 1e-14);
            for k in 50..100 {
                assert!(s[k + 1] < s[k]);
                assert!((s[k] - s[100 - k]).abs() < 1e-12);
            }
            let peaks = entropy_maxima(&hy, id, axis, &Grid::new(-0.5, 0.5, 100).unwrap(), 1e-12).unwrap();
            assert_eq!(peaks.len(), 1);
            assert!(peaks[0].location.abs() < 1e-11);
            assert!((peaks[0].entropy - 1.0).abs() < 1e-10);
        }
        for name in ["+1", "-1"] {
            let s = entropy_sweep(&hy, name.parse().unwrap(), axis, &grid).unwrap();
            assert!(s.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn zero_coupling_states_are_products() {
        let na = AtomParams::<f64>::sodium();
        let grid = Grid::new(0.01, 0.2, 20).unwrap();
        let table = entropy_table(&na, SweepAxis::Field { f: 0.0 }, &grid).unwrap();
        assert!(table.entropy.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn sodium_lower_block_peak() {
        let na = AtomParams::<f64>::sodium();
        let b_star = 1.0 / (na.a_prime - na.b_prime);
        let grid = Grid::new(-0.2, 0.2, 400).unwrap();
        let peaks = entropy_maxima(&na, "-1-".parse().unwrap(), SweepAxis::Field { f: 1.0 }, &grid, 1e-13).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].location - b_star).abs() < 1e-10);
        assert!((peaks[0].entropy - 1.0).abs() < 1e-10);
    }
}
