//! Breit-Rabi Hamiltonian in the product basis `|m_S, m_I⟩`.
//!
//! Energies are in units of the hyperfine constant `A`. With `a' = a/A` and
//! `b' = b/A` (in T⁻¹) and a dimensionless scale `f` on the hyperfine term,
//!
//! ```text
//! H/A = f I·S + B (a' S_z + b' I_z)
//! ```
//!
//! Because `m = m_S + m_I` is conserved, the matrix splits into blocks of equal
//! `m`; for an electron spin of 1/2 each block is at most 2×2.

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::num::Real;
use crate::spin_algebra::{ladder_coefficient, spin_operators, HalfInteger};

/// Electron spin, fixed at 1/2.
pub const ELECTRON_SPIN: HalfInteger = HalfInteger::HALF;

/// Default admissible range of the hyperfine scale `f`.
pub const DEFAULT_F_BOUNDS: (f64, f64) = (-1.0, 1.0);

const PRESETS_JSON: &str = include_str!("presets.json");

/// Atom description in plain `f64`, as stored in preset tables and config files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub name: String,
    pub nuclear_spin: HalfInteger,
    pub a_prime: f64,
    pub b_prime: f64,
}

impl AtomRecord {
    pub fn to_params<T: Real>(&self) -> Result<AtomParams<T>> {
        AtomParams::new(
            self.name.clone(),
            self.nuclear_spin,
            T::lit(self.a_prime),
            T::lit(self.b_prime),
        )
    }
}

/// The bundled preset table, keyed by preset name.
pub fn preset_table() -> Result<BTreeMap<String, AtomRecord>> {
    serde_json::from_str(PRESETS_JSON).map_err(|e| Error::Presets(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomParams<T> {
    pub name: String,
    pub nuclear_spin: HalfInteger,
    /// Electron coupling `a/A`, T⁻¹.
    pub a_prime: T,
    /// Nuclear coupling `b/A`, T⁻¹.
    pub b_prime: T,
}

impl<T: Real> AtomParams<T> {
    pub fn new(
        name: impl Into<String>,
        nuclear_spin: HalfInteger,
        a_prime: T,
        b_prime: T,
    ) -> Result<Self> {
        if nuclear_spin.twice() < 1 {
            return Err(Error::InvalidNuclearSpin(nuclear_spin));
        }
        if !a_prime.is_finite() || !b_prime.is_finite() {
            return Err(Error::NonFiniteCoupling);
        }
        if a_prime == b_prime {
            return Err(Error::EqualCouplings(a_prime.as_f64()));
        }
        Ok(Self {
            name: name.into(),
            nuclear_spin,
            a_prime,
            b_prime,
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        preset_table()?
            .get(name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))?
            .to_params()
    }

    pub fn hydrogen() -> Self {
        Self::preset("hydrogen").expect("bundled preset")
    }

    pub fn sodium() -> Self {
        Self::preset("sodium").expect("bundled preset")
    }

    /// Hydrogen-like atom with `a' = 0.1`, `b' = -0.01`, used for the
    /// ground-state phase diagram.
    pub fn pedagogical() -> Self {
        Self::preset("pedagogical").expect("bundled preset")
    }

    pub fn basis(&self) -> ProductBasis {
        ProductBasis::new(self.nuclear_spin)
    }

    pub fn record(&self) -> AtomRecord {
        AtomRecord {
            name: self.name.clone(),
            nuclear_spin: self.nuclear_spin,
            a_prime: self.a_prime.as_f64(),
            b_prime: self.b_prime.as_f64(),
        }
    }
}

/// Field magnitude `b` (tesla, signed, along the field axis) and hyperfine
/// scale `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldPoint<T> {
    pub b: T,
    pub f: T,
}

impl<T: Real> FieldPoint<T> {
    /// Builds a field point, warning when `f` leaves [-1, 1].
    pub fn new(b: T, f: T) -> Self {
        let point = Self { b, f };
        point.check_bounds(DEFAULT_F_BOUNDS);
        point
    }

    /// Returns whether `f` lies within `bounds`, logging a warning if not.
    pub fn check_bounds(&self, bounds: (f64, f64)) -> bool {
        let f = self.f.as_f64();
        let ok = f >= bounds.0 && f <= bounds.1;
        if !ok {
            log::warn!(
                "hyperfine scale f = {f} lies outside [{}, {}]",
                bounds.0,
                bounds.1
            );
        }
        ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub m_s: HalfInteger,
    pub m_i: HalfInteger,
}

impl BasisState {
    pub fn m(&self) -> HalfInteger {
        self.m_s + self.m_i
    }
}

/// Product states ordered by decreasing `m`, ties by decreasing `m_S`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis {
    nuclear_spin: HalfInteger,
    entries: Vec<BasisState>,
}

/// Contiguous index range of one `m` block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRange {
    pub m: HalfInteger,
    pub range: Range<usize>,
}

impl ProductBasis {
    pub fn new(nuclear_spin: HalfInteger) -> Self {
        let m_max = ELECTRON_SPIN + nuclear_spin;
        let mut entries = Vec::with_capacity(2 * nuclear_spin.multiplicity());
        for m in m_max.projections() {
            for m_s in ELECTRON_SPIN.projections() {
                let m_i = m - m_s;
                if nuclear_spin.admits(m_i) {
                    entries.push(BasisState { m_s, m_i });
                }
            }
        }
        Self {
            nuclear_spin,
            entries,
        }
    }

    pub fn nuclear_spin(&self) -> HalfInteger {
        self.nuclear_spin
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BasisState] {
        &self.entries
    }

    pub fn m_of(&self, index: usize) -> HalfInteger {
        self.entries[index].m()
    }

    pub fn index_of(&self, m_s: HalfInteger, m_i: HalfInteger) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.m_s == m_s && e.m_i == m_i)
    }

    pub fn blocks(&self) -> Vec<BlockRange> {
        let mut out: Vec<BlockRange> = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.m == e.m() => last.range.end = i + 1,
                _ => out.push(BlockRange {
                    m: e.m(),
                    range: i..i + 1,
                }),
            }
        }
        out
    }

    pub fn block(&self, m: HalfInteger) -> Option<Range<usize>> {
        self.blocks().into_iter().find(|b| b.m == m).map(|b| b.range)
    }

    /// Position of basis entry `index` in the Kronecker ordering `S ⊗ I`.
    pub fn kron_index(&self, index: usize) -> usize {
        let e = self.entries[index];
        let s = ELECTRON_SPIN.index_of(e.m_s).expect("valid m_S");
        let i = self.nuclear_spin.index_of(e.m_i).expect("valid m_I");
        s * self.nuclear_spin.multiplicity() + i
    }
}

/// `⟨m_S m_I|H|m_S m_I⟩/A = f m_S m_I + m_S a' B + m_I b' B`.
pub fn diagonal_element<T: Real>(
    m_s: HalfInteger,
    m_i: HalfInteger,
    point: FieldPoint<T>,
    atom: &AtomParams<T>,
) -> T {
    let ms: T = m_s.to_real();
    let mi: T = m_i.to_real();
    point.f * ms * mi + ms * atom.a_prime * point.b + mi * atom.b_prime * point.b
}

/// `⟨m_S+1, m_I-1|H|m_S, m_I⟩/A`, the flip-flop element of `(f/2)(S₊I₋ + S₋I₊)`.
pub fn flip_flop_element<T: Real>(
    m_s: HalfInteger,
    m_i: HalfInteger,
    point: FieldPoint<T>,
    atom: &AtomParams<T>,
) -> T {
    let s: T = ladder_coefficient(ELECTRON_SPIN, m_s, true);
    let i: T = ladder_coefficient(atom.nuclear_spin, m_i, false);
    point.f * T::lit(0.5) * s * i
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block<T> {
    pub m: HalfInteger,
    pub range: Range<usize>,
    pub matrix: Matrix<T>,
}

impl<T: Real> Block<T> {
    pub fn dim(&self) -> usize {
        self.range.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockHamiltonian<T> {
    pub basis: ProductBasis,
    pub blocks: Vec<Block<T>>,
}

impl<T: Real> BlockHamiltonian<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn block(&self, m: HalfInteger) -> Option<&Block<T>> {
        self.blocks.iter().find(|b| b.m == m)
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::dim).collect()
    }

    pub fn trace(&self) -> T {
        self.blocks.iter().map(|b| b.matrix.trace()).sum()
    }

    /// Embeds the blocks in the full `2(2I+1)`-dimensional matrix.
    pub fn to_dense(&self) -> Matrix<T> {
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for b in &self.blocks {
            let o = b.range.start;
            for r in 0..b.dim() {
                for c in 0..b.dim() {
                    out[(o + r, o + c)] = b.matrix[(r, c)];
                }
            }
        }
        out
    }
}

/// Fills each `m` block directly from the matrix-element formulas.
pub fn build_hamiltonian<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>) -> BlockHamiltonian<T> {
    let basis = atom.basis();
    let entries = basis.entries();
    let blocks = basis
        .blocks()
        .into_iter()
        .map(|BlockRange { m, range }| {
            let states = &entries[range.clone()];
            let n = states.len();
            let matrix = Matrix::from_fn(n, n, |r, c| {
                let (bra, ket) = (states[r], states[c]);
                if r == c {
                    return diagonal_element(ket.m_s, ket.m_i, point, atom);
                }
                // Order the pair so `lo` is the state raised by S₊I₋.
                let (lo, hi) = if ket.m_s < bra.m_s { (ket, bra) } else { (bra, ket) };
                if hi.m_s == lo.m_s + HalfInteger::ONE && hi.m_i == lo.m_i - HalfInteger::ONE {
                    flip_flop_element(lo.m_s, lo.m_i, point, atom)
                } else {
                    T::zero()
                }
            });
            Block { m, range, matrix }
        })
        .collect();
    BlockHamiltonian { basis, blocks }
}

/// Hamiltonian for a field `B n̂` with `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)`,
/// assembled from Kronecker products of spin operators and permuted into
/// product-basis order:
///
/// ```text
/// H/A = f (Sx⊗Ix + Sy⊗Iy + Sz⊗Iz) + B (a' n̂·S ⊗ 1 + b' 1 ⊗ n̂·I)
/// ```
pub fn build_rotated_hamiltonian<T: Real>(
    atom: &AtomParams<T>,
    point: FieldPoint<T>,
    theta: T,
    phi: T,
) -> Matrix<Complex<T>> {
    let s = spin_operators::<T>(ELECTRON_SPIN).expect("spin 1/2");
    let i = spin_operators::<T>(atom.nuclear_spin).expect("validated nuclear spin");
    let one_s = Matrix::<Complex<T>>::identity(s.dim());
    let one_i = Matrix::<Complex<T>>::identity(i.dim());

    let hyperfine = s
        .jx
        .to_complex()
        .kron(&i.jx.to_complex())
        .add(&s.jy.kron(&i.jy))
        .add(&s.jz.to_complex().kron(&i.jz.to_complex()))
        .scale(point.f);
    let zeeman = s
        .along(theta, phi)
        .kron(&one_i)
        .scale(atom.a_prime)
        .add(&one_s.kron(&i.along(theta, phi)).scale(atom.b_prime))
        .scale(point.b);
    let kron_order = hyperfine.add(&zeeman);

    let basis = atom.basis();
    let n = basis.len();
    let perm: Vec<usize> = (0..n).map(|k| basis.kron_index(k)).collect();
    Matrix::from_fn(n, n, |r, c| kron_order[(perm[r], perm[c])])
}
