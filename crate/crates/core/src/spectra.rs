//! Eigenlevels of the block Hamiltonian.
//!
//! Hydrogen (`I = 1/2`) and sodium-like atoms (`I = 3/2`) use exact closed
//! forms; any other nuclear spin falls back to the Jacobi solver, with level
//! identities carried along sweeps by eigenvector overlap.
//!
//! Every two-level block with diagonal difference `d` (first minus second
//! basis state) and off-diagonal `o` has
//!
//! ```text
//! E^± = mean ± ½ √(d² + (2o)²),   α = atan2(2o, d)
//! |E^+⟩ = ( cos α/2, sin α/2),  |E^-⟩ = (-sin α/2, cos α/2)
//! ```
//!
//! with components in block order (decreasing `m_S`).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{Grid, SweepAxis};
use crate::hamiltonian::{build_hamiltonian, AtomParams, BlockRange, FieldPoint};
use crate::linalg::{inner, jacobi_eigh, Eigen, Matrix};
use crate::num::Real;
use crate::spin_algebra::HalfInteger;

/// Overlaps closer than this make continuation refuse to pick a label.
pub const CONTINUATION_AMBIGUITY: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Single,
    Plus,
    Minus,
}

/// Identity of a level: block `m` plus branch within the block.
///
/// Ordered by decreasing `m`, then `Single`, `Plus`, `Minus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LevelId {
    pub m: HalfInteger,
    pub branch: Branch,
}

impl LevelId {
    pub const fn new(m: HalfInteger, branch: Branch) -> Self {
        Self { m, branch }
    }
}

impl Ord for LevelId {
    fn cmp(&self, other: &Self) -> Ordering {
        other.m.cmp(&self.m).then(self.branch.cmp(&other.branch))
    }
}

impl PartialOrd for LevelId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LevelId {
    /// `E_+1`, `E_0^+`, `E_-3/2^-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.m.twice() > 0 { "+" } else { "" };
        write!(f, "E_{sign}{}", self.m)?;
        match self.branch {
            Branch::Single => Ok(()),
            Branch::Plus => write!(f, "^+"),
            Branch::Minus => write!(f, "^-"),
        }
    }
}

impl FromStr for LevelId {
    type Err = Error;

    /// Accepts the display form and short forms such as `0-`, `+1`, `-1+`
    /// or `-3/2^-`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::ParseLevel(s.to_string());
        let body = s.trim();
        let body = body.strip_prefix("E_").unwrap_or(body);
        let (m_text, branch) = if let Some(rest) = body.strip_suffix("^+") {
            (rest, Branch::Plus)
        } else if let Some(rest) = body.strip_suffix("^-") {
            (rest, Branch::Minus)
        } else if body.len() > 1 && body.ends_with('+') {
            (&body[..body.len() - 1], Branch::Plus)
        } else if body.len() > 1 && body.ends_with('-') {
            (&body[..body.len() - 1], Branch::Minus)
        } else {
            (body, Branch::Single)
        };
        let m: HalfInteger = m_text.parse().map_err(|_| err())?;
        Ok(Self { m, branch })
    }
}

impl Serialize for LevelId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Every level identity of an atom, in canonical order.
pub fn level_ids<T: Real>(atom: &AtomParams<T>) -> Vec<LevelId> {
    atom.basis()
        .blocks()
        .into_iter()
        .flat_map(|b| {
            if b.range.len() == 1 {
                vec![LevelId::new(b.m, Branch::Single)]
            } else {
                vec![LevelId::new(b.m, Branch::Plus), LevelId::new(b.m, Branch::Minus)]
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenLevel<T> {
    pub id: LevelId,
    /// Energy in units of `A`.
    pub energy: T,
    /// Real amplitudes over the full product basis; zero outside the block.
    pub amplitudes: Vec<T>,
    /// Mixing angle in block order, for two-level blocks.
    pub alpha: Option<T>,
}

impl<T: Real> EigenLevel<T> {
    pub fn m(&self) -> HalfInteger {
        self.id.m
    }

    pub fn complex_amplitudes(&self) -> Vec<Complex<T>> {
        self.amplitudes.iter().map(|&x| Complex::new(x, T::zero())).collect()
    }
}

/// Diagonalises one real-symmetric block; eigenvalues ascending.
pub fn eigensolve_block<T: Real>(block: &Matrix<T>) -> Result<Eigen<T, T>> {
    jacobi_eigh(block)
}

fn single_level<T: Real>(m: HalfInteger, index: usize, n: usize, energy: T) -> EigenLevel<T> {
    let mut amplitudes = vec![T::zero(); n];
    amplitudes[index] = T::one();
    EigenLevel {
        id: LevelId::new(m, Branch::Single),
        energy,
        amplitudes,
        alpha: None,
    }
}

/// The `(plus, minus)` pair of a two-level block starting at basis index `start`.
fn mixed_pair<T: Real>(
    m: HalfInteger,
    start: usize,
    n: usize,
    mean: T,
    d: T,
    two_o: T,
) -> [EigenLevel<T>; 2] {
    let half = T::lit(0.5);
    let root = half * d.hypot(two_o);
    let alpha = two_o.atan2(d);
    let (s, c) = (alpha * half).sin_cos();
    let mut plus = vec![T::zero(); n];
    plus[start] = c;
    plus[start + 1] = s;
    let mut minus = vec![T::zero(); n];
    minus[start] = -s;
    minus[start + 1] = c;
    [
        EigenLevel {
            id: LevelId::new(m, Branch::Plus),
            energy: mean + root,
            amplitudes: plus,
            alpha: Some(alpha),
        },
        EigenLevel {
            id: LevelId::new(m, Branch::Minus),
            energy: mean - root,
            amplitudes: minus,
            alpha: Some(alpha),
        },
    ]
}

fn require_spin<T: Real>(atom: &AtomParams<T>, twice: i32) -> Result<()> {
    if atom.nuclear_spin.twice() != twice {
        return Err(Error::ClosedFormUnavailable {
            expected: HalfInteger::from_twice(twice),
            actual: atom.nuclear_spin,
        });
    }
    Ok(())
}

/// Exact levels for `I = 1/2`, in canonical order
/// `E_+1, E_0^+, E_0^-, E_-1`.
///
/// `E_±1 = f/4 ± (a'+b')B/2`, `E_0^± = -f/4 ± ½√((a'-b')²B² + f²)`,
/// `α = atan2(f, (a'-b')B)`.
pub fn hydrogen_closed_form<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>) -> Result<Vec<EigenLevel<T>>> {
    require_spin(atom, 1)?;
    let (f, b) = (point.f, point.b);
    let (ap, bp) = (atom.a_prime, atom.b_prime);
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let zeeman = half * (ap + bp) * b;
    let [p, m] = mixed_pair(HalfInteger::ZERO, 1, 4, -f * quarter, (ap - bp) * b, f);
    Ok(vec![
        single_level(HalfInteger::ONE, 0, 4, f * quarter + zeeman),
        p,
        m,
        single_level(-HalfInteger::ONE, 3, 4, f * quarter - zeeman),
    ])
}

/// Exact levels for `I = 3/2`, in canonical order.
///
/// ```text
/// E_±2   = 3f/4 ± (a'+3b')B/2
/// E_+1^± = -f/4 + b'B ± ½√((f + (a'-b')B)² + 3f²),  α₁ = atan2(√3 f, f + (a'-b')B)
/// E_-1^± = -f/4 - b'B ± ½√((f - (a'-b')B)² + 3f²)
/// E_0^±  = -f/4 ± ½√((a'-b')²B² + 4f²),              α₀ = atan2(2f, (a'-b')B)
/// ```
///
/// The `m = -1` block is ordered `{|½,-3/2⟩, |-½,-½⟩}`, so its stored angle is
/// `atan2(√3 f, (a'-b')B - f)`, the supplement of the angle defined on the
/// reversed basis.
pub fn sodium_closed_form<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>) -> Result<Vec<EigenLevel<T>>> {
    require_spin(atom, 3)?;
    let (f, b) = (point.f, point.b);
    let (ap, bp) = (atom.a_prime, atom.b_prime);
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let sqrt3_f = T::lit(3.0).sqrt() * f;
    let delta = (ap - bp) * b;
    let stretched = T::lit(0.75) * f;
    let zeeman = half * (ap + T::lit(3.0) * bp) * b;
    let h = HalfInteger::from_integer;

    let [p1, m1] = mixed_pair(h(1), 1, 8, -f * quarter + bp * b, f + delta, sqrt3_f);
    let [p0, m0] = mixed_pair(h(0), 3, 8, -f * quarter, delta, f + f);
    let [pm1, mm1] = mixed_pair(h(-1), 5, 8, -f * quarter - bp * b, delta - f, sqrt3_f);
    Ok(vec![
        single_level(h(2), 0, 8, stretched + zeeman),
        p1,
        m1,
        p0,
        m0,
        pm1,
        mm1,
        single_level(h(-2), 7, 8, stretched - zeeman),
    ])
}

/// Levels of every block from the Jacobi solver, labelled by energy within
/// each block (`Plus` above `Minus`).
///
/// Vectors are put in the closed-form gauge: the plus vector has a
/// non-negative first component, the minus vector a non-negative second.
pub fn numeric_levels<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>) -> Result<Vec<EigenLevel<T>>> {
    let hb = build_hamiltonian(atom, point);
    let n = hb.dim();
    let mut out = Vec::with_capacity(n);
    for block in &hb.blocks {
        let start = block.range.start;
        if block.dim() == 1 {
            out.push(single_level(block.m, start, n, block.matrix[(0, 0)]));
            continue;
        }
        let eig = eigensolve_block(&block.matrix)?;
        let k = block.dim();
        if k != 2 {
            return Err(Error::NotTwoLevelBlock { m: block.m, dim: k });
        }
        for (col, branch, gauge_row) in [(1, Branch::Plus, 0), (0, Branch::Minus, 1)] {
            let mut v = eig.vector(col);
            if v[gauge_row] < T::zero() {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let plus_first = if branch == Branch::Plus { v[0] } else { v[1] };
            let plus_second = if branch == Branch::Plus { v[1] } else { -v[0] };
            let mut amplitudes = vec![T::zero(); n];
            amplitudes[start..start + k].copy_from_slice(&v);
            out.push(EigenLevel {
                id: LevelId::new(block.m, branch),
                energy: eig.values[col],
                amplitudes,
                alpha: Some(T::lit(2.0) * plus_second.atan2(plus_first)),
            });
        }
    }
    Ok(out)
}

/// Whether exact closed forms exist for this atom.
pub fn has_closed_form<T: Real>(atom: &AtomParams<T>) -> bool {
    matches!(atom.nuclear_spin.twice(), 1 | 3)
}

/// All levels at one point, in canonical order.
pub fn levels_at<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>) -> Result<Vec<EigenLevel<T>>> {
    match atom.nuclear_spin.twice() {
        1 => hydrogen_closed_form(atom, point),
        3 => sodium_closed_form(atom, point),
        _ => numeric_levels(atom, point),
    }
}

pub fn level_at<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>, id: LevelId) -> Result<EigenLevel<T>> {
    levels_at(atom, point)?
        .into_iter()
        .find(|l| l.id == id)
        .ok_or_else(|| Error::UnknownLevel(id.to_string()))
}

pub fn level_energy<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>, id: LevelId) -> Result<T> {
    level_at(atom, point, id).map(|l| l.energy)
}

/// Ordering used to pick the ground state: energy, then larger `|m|`,
/// then positive `m`, then `Minus` before `Plus`.
fn ground_order<T: Real>(a: &EigenLevel<T>, b: &EigenLevel<T>) -> Ordering {
    let scale = T::one().max(a.energy.abs()).max(b.energy.abs());
    if (a.energy - b.energy).abs() > T::tol(0.0) * scale {
        return a.energy.partial_cmp(&b.energy).unwrap_or(Ordering::Equal);
    }
    b.id.m
        .abs()
        .cmp(&a.id.m.abs())
        .then(b.id.m.cmp(&a.id.m))
        .then(b.id.branch.cmp(&a.id.branch))
}

/// Lowest level with deterministic tie-breaking among exact degeneracies.
pub fn ground_of<T: Real>(levels: &[EigenLevel<T>]) -> &EigenLevel<T> {
    levels
        .iter()
        .min_by(|a, b| ground_order(a, b))
        .expect("at least one level")
}

/// First-excited minus ground energy of a level set; never negative.
pub fn gap_of<T: Real>(levels: &[EigenLevel<T>]) -> T {
    let mut e: Vec<T> = levels.iter().map(|l| l.energy).collect();
    e.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    (e[1] - e[0]).max(T::zero())
}

pub fn ground_state<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>) -> Result<EigenLevel<T>> {
    Ok(ground_of(&levels_at(atom, point)?).clone())
}

pub fn energy_gap<T: Real>(atom: &AtomParams<T>, point: FieldPoint<T>) -> Result<T> {
    Ok(gap_of(&levels_at(atom, point)?))
}

/// Levels along a one-parameter sweep, each row in canonical identity order.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumTable<T> {
    pub axis: SweepAxis<T>,
    pub parameter: Vec<T>,
    pub points: Vec<FieldPoint<T>>,
    pub ids: Vec<LevelId>,
    pub levels: Vec<Vec<EigenLevel<T>>>,
    pub gap: Vec<T>,
}

impl<T: Real> SpectrumTable<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn column(&self, id: LevelId) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    /// Energy curve of one level across the sweep.
    pub fn energies(&self, id: LevelId) -> Option<Vec<T>> {
        let c = self.column(id)?;
        Some(self.levels.iter().map(|row| row[c].energy).collect())
    }
}

/// Sweeps `grid` along `axis`.
///
/// Closed-form atoms are evaluated point by point in parallel. Other atoms
/// are continued sequentially: at each step the two levels of a block keep
/// the labels of the previous step's vectors they overlap most.
pub fn spectrum_sweep<T: Real>(atom: &AtomParams<T>, axis: SweepAxis<T>, grid: &Grid<T>) -> Result<SpectrumTable<T>> {
    let parameter = grid.values();
    let points: Vec<FieldPoint<T>> = parameter.iter().map(|&x| axis.point(x)).collect();
    let levels: Vec<Vec<EigenLevel<T>>> = if has_closed_form(atom) {
        points
            .par_iter()
            .map(|&p| levels_at(atom, p))
            .collect::<Result<_>>()?
    } else {
        continue_levels(atom, &axis, &parameter, &points)?
    };
    let gap = levels.iter().map(|row| gap_of(row)).collect();
    Ok(SpectrumTable {
        axis,
        parameter,
        points,
        ids: level_ids(atom),
        levels,
        gap,
    })
}

fn continue_levels<T: Real>(
    atom: &AtomParams<T>,
    axis: &SweepAxis<T>,
    parameter: &[T],
    points: &[FieldPoint<T>],
) -> Result<Vec<Vec<EigenLevel<T>>>> {
    let blocks: Vec<BlockRange> = atom.basis().blocks();
    let mut rows: Vec<Vec<EigenLevel<T>>> = Vec::with_capacity(points.len());
    for (index, &point) in points.iter().enumerate() {
        let mut row = numeric_levels(atom, point)?;
        if let Some(prev) = rows.last() {
            for block in blocks.iter().filter(|b| b.range.len() == 2) {
                let find = |levels: &[EigenLevel<T>], branch| {
                    levels
                        .iter()
                        .position(|l| l.id == LevelId::new(block.m, branch))
                        .expect("two-level block")
                };
                let prev_plus = &prev[find(prev, Branch::Plus)].amplitudes;
                let (ip, im) = (find(&row, Branch::Plus), find(&row, Branch::Minus));
                let stay = inner::<T, T>(prev_plus, &row[ip].amplitudes).abs();
                let swap = inner::<T, T>(prev_plus, &row[im].amplitudes).abs();
                if (stay - swap).abs() < T::lit(CONTINUATION_AMBIGUITY) {
                    return Err(Error::AmbiguousContinuation {
                        index,
                        parameter: axis.name(),
                        value: parameter[index].as_f64(),
                        first: stay.as_f64(),
                        second: swap.as_f64(),
                    });
                }
                if swap > stay {
                    row[ip].id.branch = Branch::Minus;
                    row[im].id.branch = Branch::Plus;
                }
            }
        }
        row.sort_by(|a, b| a.id.cmp(&b.id));
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn id(s: &str) -> LevelId {
        s.parse().unwrap()
    }

    #[test]
    fn level_labels_round_trip() {
        for s in ["E_+1", "E_0^+", "E_0^-", "E_-1", "E_+3/2^-", "E_-2"] {
            assert_eq!(id(s).to_string(), s);
        }
        assert_eq!(id("0-"), LevelId::new(HalfInteger::ZERO, Branch::Minus));
        assert_eq!(id("+1-"), LevelId::new(HalfInteger::ONE, Branch::Minus));
        assert_eq!(id("-1"), LevelId::new(-HalfInteger::ONE, Branch::Single));
        assert_eq!(id("-1+"), LevelId::new(-HalfInteger::ONE, Branch::Plus));
        assert!("E_x".parse::<LevelId>().is_err());
    }

    #[test]
    fn canonical_order() {
        let na = AtomParams::<f64>::sodium();
        let names: Vec<String> = level_ids(&na).iter().map(ToString::to_string).collect();
        assert_eq!(
            names,
            ["E_+2", "E_+1^+", "E_+1^-", "E_0^+", "E_0^-", "E_-1^+", "E_-1^-", "E_-2"]
        );
        let mut shuffled = level_ids(&na);
        shuffled.reverse();
        shuffled.sort();
        assert_eq!(shuffled, level_ids(&na));
    }

    #[test]
    fn hydrogen_zero_field_singlet() {
        let hy = AtomParams::<f64>::hydrogen();
        let levels = hydrogen_closed_form(&hy, FieldPoint::new(0.0, 1.0)).unwrap();
        let e0m = &levels[2];
        assert_eq!(e0m.id, id("0-"));
        assert!((e0m.alpha.unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((e0m.energy + 0.75).abs() < 1e-15);
        let r = 0.5f64.sqrt();
        let expected = [0.0, -r, r, 0.0];
        for (x, y) in e0m.amplitudes.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn hydrogen_strong_field_limit() {
        let hy = AtomParams::<f64>::hydrogen();
        let levels = hydrogen_closed_form(&hy, FieldPoint::new(1e6, 1.0)).unwrap();
        let e0m = &levels[2];
        assert!(e0m.alpha.unwrap() > 0.0 && e0m.alpha.unwrap() < 1e-6);
        assert!((e0m.amplitudes[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_reject_wrong_spin() {
        let na = AtomParams::<f64>::sodium();
        let hy = AtomParams::<f64>::hydrogen();
        let p = FieldPoint::new(0.1, 1.0);
        assert!(matches!(hydrogen_closed_form(&na, p), Err(Error::ClosedFormUnavailable { .. })));
        assert!(matches!(sodium_closed_form(&hy, p), Err(Error::ClosedFormUnavailable { .. })));
    }

    #[test]
    fn sodium_zero_field_multiplets() {
        let na = AtomParams::<f64>::sodium();
        let levels = sodium_closed_form(&na, FieldPoint::new(0.0, 1.0)).unwrap();
        let e = |s: &str| levels.iter().find(|l| l.id == id(s)).unwrap().energy;
        for upper in ["+2", "+1+", "0+", "-1+", "-2"] {
            assert!((e(upper) - 0.75).abs() < 1e-15, "{upper}");
        }
        for lower in ["+1-", "0-", "-1-"] {
            assert!((e(lower) + 1.25).abs() < 1e-15, "{lower}");
        }
        assert!((e("+2") - e("0-") - 2.0).abs() < 1e-15);
    }

    fn assert_matches_oracle(atom: &AtomParams<f64>, point: FieldPoint<f64>) {
        let closed = levels_at(atom, point).unwrap();
        let numeric = numeric_levels(atom, point).unwrap();
        for (c, n) in closed.iter().zip(&numeric) {
            assert_eq!(c.id, n.id);
            assert!((c.energy - n.energy).abs() < 1e-12, "{} at {point:?}", c.id);
            let overlap = inner::<f64, f64>(&c.amplitudes, &n.amplitudes).abs();
            assert!(overlap > 1.0 - 1e-10, "{} overlap {overlap}", c.id);
            assert!((norm::<f64, f64>(&c.amplitudes) - 1.0).abs() < 1e-14);
            if let (Some(x), Some(y)) = (c.alpha, n.alpha) {
                assert!(crate::num::angle_distance(x, y) < 1e-9);
            }
        }
    }

    #[test]
    fn closed_forms_match_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for atom in [AtomParams::hydrogen(), AtomParams::sodium()] {
            assert_matches_oracle(&atom, FieldPoint::new(0.05, 1.0));
            for _ in 0..500 {
                let p = FieldPoint::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                assert_matches_oracle(&atom, p);
            }
        }
    }

    #[test]
    fn eigenvector_form_and_support() {
        let na = AtomParams::<f64>::sodium();
        let basis = na.basis();
        for level in sodium_closed_form(&na, FieldPoint::new(-0.013, 0.4)).unwrap() {
            for (k, &amp) in level.amplitudes.iter().enumerate() {
                if basis.m_of(k) != level.id.m {
                    assert_eq!(amp, 0.0);
                }
            }
            if let Some(alpha) = level.alpha {
                let start = basis.block(level.id.m).unwrap().start;
                let (s, c) = (alpha / 2.0).sin_cos();
                let expected = match level.id.branch {
                    Branch::Plus => [c, s],
                    _ => [-s, c],
                };
                assert_eq!(&level.amplitudes[start..start + 2], &expected);
            }
        }
    }

    #[test]
    fn sodium_field_reversal_swaps_m_blocks() {
        let na = AtomParams::<f64>::sodium();
        for &(b, f) in &[(0.07, 1.0), (-0.2, 0.3), (0.011, -0.8)] {
            let fwd = sodium_closed_form(&na, FieldPoint::new(b, f)).unwrap();
            let rev = sodium_closed_form(&na, FieldPoint::new(-b, f)).unwrap();
            for (x, y) in [("+1+", "-1+"), ("+1-", "-1-")] {
                let ex = fwd.iter().find(|l| l.id == id(x)).unwrap().energy;
                let ey = rev.iter().find(|l| l.id == id(y)).unwrap().energy;
                assert!((ex - ey).abs() < 1e-12, "{x} at {b} vs {y} at {}", -b);
            }
        }
    }

    #[test]
    fn ground_state_examples() {
        let hy = AtomParams::<f64>::hydrogen();
        let g = ground_state(&hy, FieldPoint::new(0.0, 1.0)).unwrap();
        assert_eq!(g.id, id("0-"));
        assert!((energy_gap(&hy, FieldPoint::new(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);

        let ped = AtomParams::<f64>::pedagogical();
        let g = ground_state(&ped, FieldPoint::new(0.2, -0.5)).unwrap();
        assert_eq!(g.id, id("-1"));
        let g = ground_state(&ped, FieldPoint::new(-0.2, -0.5)).unwrap();
        assert_eq!(g.id, id("+1"));
        // Exact tie at B = 0 between m = ±1 goes to positive m.
        let g = ground_state(&ped, FieldPoint::new(0.0, -0.5)).unwrap();
        assert_eq!(g.id, id("+1"));
    }

    #[test]
    fn zero_coupling_gap_is_linear() {
        let hy = AtomParams::<f64>::hydrogen();
        for &b in &[-0.7, -0.1, 0.3] {
            let levels = levels_at(&hy, FieldPoint::new(b, 0.0)).unwrap();
            let mut e: Vec<f64> = levels.iter().map(|l| l.energy).collect();
            e.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let expected = 0.5 * b.abs() * ((hy.a_prime + hy.b_prime).abs() - (hy.a_prime - hy.b_prime).abs()).abs();
            assert!((e[1] - e[0] - expected).abs() < 1e-13);
        }
        assert_eq!(energy_gap(&hy, FieldPoint::new(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn hydrogen_sweep_is_field_symmetric() {
        let hy = AtomParams::<f64>::hydrogen();
        let grid = Grid::new(-0.5, 0.5, 1001).unwrap();
        let table = spectrum_sweep(&hy, SweepAxis::Field { f: 1.0 }, &grid).unwrap();
        assert_eq!(table.ids.len(), 4);
        let up = table.energies(id("+1")).unwrap();
        let down = table.energies(id("-1")).unwrap();
        assert_eq!(up[500], down[500]);
        assert!((up[0] - down[0]) * (up[1000] - down[1000]) < 0.0);
        for k in 0..1001 {
            let mut a: Vec<f64> = table.levels[k].iter().map(|l| l.energy).collect();
            let mut b: Vec<f64> = table.levels[1000 - k].iter().map(|l| l.energy).collect();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(table.gap[k] >= 0.0);
        }
    }

    #[test]
    fn continuation_matches_closed_form_labels() {
        // Treat sodium as a generic atom by bypassing the closed form.
        let na = AtomParams::<f64>::sodium();
        let grid = Grid::new(-0.2, 0.2, 401).unwrap();
        let axis = SweepAxis::Field { f: 1.0 };
        let params = grid.values();
        let points: Vec<_> = params.iter().map(|&x| axis.point(x)).collect();
        let rows = continue_levels(&na, &axis, &params, &points).unwrap();
        for (row, &p) in rows.iter().zip(&points) {
            let closed = sodium_closed_form(&na, p).unwrap();
            for (a, b) in row.iter().zip(&closed) {
                assert_eq!(a.id, b.id);
                assert!((a.energy - b.energy).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generic_spin_sweep_continues() {
        let atom = AtomParams::<f64>::new("spin-1", HalfInteger::ONE, 5.0, -0.2).unwrap();
        let grid = Grid::new(-0.5, 0.5, 201).unwrap();
        let table = spectrum_sweep(&atom, SweepAxis::Field { f: 1.0 }, &grid).unwrap();
        assert_eq!(table.ids.len(), 6);
        for row in &table.levels {
            let trace: f64 = row.iter().map(|l| l.energy).sum();
            assert!(trace.abs() < 1e-12);
        }
    }

    #[test]
    fn continuation_follows_vectors_through_uncoupled_crossing() {
        // At f = 0 the block is diagonal and its two levels cross at B = 0;
        // continuation keeps each label on its basis vector.
        let atom = AtomParams::<f64>::new("spin-1", HalfInteger::ONE, 5.0, -0.2).unwrap();
        let grid = Grid::new(-0.5, 0.5, 100).unwrap();
        let table = spectrum_sweep(&atom, SweepAxis::Field { f: 0.0 }, &grid).unwrap();
        let plus = LevelId::new(HalfInteger::HALF, Branch::Plus);
        let c = table.ids.iter().position(|&x| x == plus).unwrap();
        let start = atom.basis().block(HalfInteger::HALF).unwrap().start;
        let first = table.levels[0][c].amplitudes[start].abs();
        for row in &table.levels {
            assert_eq!(row[c].amplitudes[start].abs(), first);
        }
    }

    #[test]
    fn f32_closed_form() {
        let hy = AtomParams::<f32>::hydrogen();
        let levels = hydrogen_closed_form(&hy, FieldPoint::new(0.0f32, 1.0)).unwrap();
        assert!((levels[2].energy + 0.75).abs() < 1e-6);
        assert!((levels[2].alpha.unwrap() - std::f32::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
