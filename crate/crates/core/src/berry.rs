//! Geometric phases for a field direction swept once around a cone of polar
//! angle `θ` about the quantisation axis.
//!
//! A state with sharp projection `m` along the field picks up `β = -mΩ`,
//! `Ω = 2π(1 - cos θ)`. For an entangled eigenstate with Schmidt weights
//! `p_i`, the marginal phase of subsystem `A` is `Γ_A = arg Σ p_i e^{iβ_i^A}`.
//! Reported marginal phases lie in `(-π, π]`; a phasor on the negative real
//! axis gives exactly `π`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::entanglement::{schmidt, sharp_projection, SchmidtDecomposition, Subsystem};
use crate::error::{Error, Result};
use crate::grid::{bisect, Grid};
use crate::hamiltonian::{build_rotated_hamiltonian, AtomParams, FieldPoint, ELECTRON_SPIN};
use crate::linalg::{inner, jacobi_eigh_hermitian, Matrix};
use crate::num::{principal_angle, Real};
use crate::spectra::{level_at, level_ids, levels_at, EigenLevel, LevelId};
use crate::spin_algebra::{rotation_from_operators, spin_operators, HalfInteger};

/// Smallest admissible gap between the tracked level and its neighbours on a loop.
pub const LOOP_GAP_TOLERANCE: f64 = 1e-8;
/// Default number of loop steps.
pub const DEFAULT_STEPS: usize = 1000;

/// `Ω = 2π(1 - cos θ)`.
pub fn solid_angle<T: Real>(theta: T) -> T {
    T::TAU() * (T::one() - theta.cos())
}

/// `-mΩ`, unreduced.
pub fn basis_phase<T: Real>(j: HalfInteger, m: HalfInteger, omega: T) -> Result<T> {
    if !j.admits(m) {
        return Err(Error::InvalidProjection { j, m });
    }
    Ok(-m.to_real::<T>() * omega)
}

/// `arg z` in `(-π, π]`, with phasors on the real axis (to rounding) mapped
/// exactly to `0` or `π`. `z = 0` gives NaN.
pub fn phase_argument<T: Real>(z: Complex<T>) -> T {
    snapped_argument(z, T::one())
}

/// As [`phase_argument`], for a phasor built from phases of magnitude up to
/// `scale`: their rounding error, `ε·scale`, counts as zero imaginary part.
///
/// A phasor that vanishes to that rounding has no argument and gives NaN.
fn snapped_argument<T: Real>(z: Complex<T>, scale: T) -> T {
    let tol = T::epsilon() * T::lit(8.0) * (T::one() + scale);
    if z.norm() <= tol {
        return T::nan();
    }
    if z.im.abs() <= tol * z.re.abs() {
        return if z.re < T::zero() { T::PI() } else { T::zero() };
    }
    principal_angle(z.im.atan2(z.re))
}

/// A phase kept both unreduced and reduced to `(-π, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Phase<T> {
    pub raw: T,
    pub reduced: T,
}

impl<T: Real> Phase<T> {
    pub fn new(raw: T) -> Self {
        Self {
            raw,
            reduced: principal_angle(raw),
        }
    }
}

/// `β = -mΩ` of a level with sharp total projection `m`.
pub fn total_phase_analytic<T: Real>(level: &EigenLevel<T>, omega: T) -> Phase<T> {
    Phase::new(-level.m().to_real::<T>() * omega)
}

/// One Schmidt term with the cone phases of its two factors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchmidtPhase<T> {
    pub p: T,
    pub m_s: HalfInteger,
    pub m_i: HalfInteger,
    pub beta_electron: T,
    pub beta_nuclear: T,
}

/// Cone phases of each Schmidt term; every vector must carry a sharp projection.
pub fn schmidt_phases<T: Real>(
    decomposition: &SchmidtDecomposition<T>,
    nuclear_spin: HalfInteger,
    omega: T,
) -> Result<Vec<SchmidtPhase<T>>> {
    decomposition
        .coefficients
        .iter()
        .zip(&decomposition.electron_vectors)
        .zip(&decomposition.nuclear_vectors)
        .map(|((&p, e), n)| {
            let m_s = sharp_projection(e, ELECTRON_SPIN).ok_or(Error::NoSharpProjection)?;
            let m_i = sharp_projection(n, nuclear_spin).ok_or(Error::NoSharpProjection)?;
            Ok(SchmidtPhase {
                p,
                m_s,
                m_i,
                beta_electron: basis_phase(ELECTRON_SPIN, m_s, omega)?,
                beta_nuclear: basis_phase(nuclear_spin, m_i, omega)?,
            })
        })
        .collect()
}

fn subsystem_beta<T: Real>(term: &SchmidtPhase<T>, subsystem: Subsystem) -> T {
    match subsystem {
        Subsystem::Electron => term.beta_electron,
        Subsystem::Nuclear => term.beta_nuclear,
    }
}

/// `e^{iβ}` with `β` reduced in turns, so that whole and half turns (which
/// `-mΩ` hits exactly at `θ = π/2` and `θ = π`) land on the real axis to
/// within rounding of `sin π`.
pub fn unit_phasor<T: Real>(beta: T) -> Complex<T> {
    let turns = beta / T::TAU();
    let (s, c) = ((turns - turns.round()) * T::TAU()).sin_cos();
    Complex::new(c, s)
}

/// `Σ p_i e^{iβ_i}` and the largest `|β_i|`.
fn weighted_phasor<T: Real>(weights_and_phases: impl Iterator<Item = (T, T)>) -> (Complex<T>, T) {
    weights_and_phases.fold((Complex::new(T::zero(), T::zero()), T::zero()), |(acc, scale), (p, beta)| {
        (acc + unit_phasor(beta) * p, scale.max(beta.abs()))
    })
}

/// `arg Σ p_i e^{iβ_i}`, snapped to the real axis within rounding.
fn weighted_argument<T: Real>(weights_and_phases: impl Iterator<Item = (T, T)>) -> T {
    let (z, scale) = weighted_phasor(weights_and_phases);
    snapped_argument(z, scale)
}

fn marginal_from_terms<T: Real>(terms: &[SchmidtPhase<T>], subsystem: Subsystem) -> T {
    weighted_argument(terms.iter().map(|t| (t.p, subsystem_beta(t, subsystem))))
}

/// `Γ_A = arg Σ p_i e^{iβ_i^A}`.
pub fn marginal_phase<T: Real>(
    decomposition: &SchmidtDecomposition<T>,
    nuclear_spin: HalfInteger,
    subsystem: Subsystem,
    omega: T,
) -> Result<T> {
    let terms = schmidt_phases(decomposition, nuclear_spin, omega)?;
    Ok(marginal_from_terms(&terms, subsystem))
}

/// `Σ p_i β_i^A`, unreduced.
pub fn average_phase<T: Real>(
    decomposition: &SchmidtDecomposition<T>,
    nuclear_spin: HalfInteger,
    subsystem: Subsystem,
    omega: T,
) -> Result<T> {
    let terms = schmidt_phases(decomposition, nuclear_spin, omega)?;
    Ok(terms.iter().map(|t| t.p * subsystem_beta(t, subsystem)).sum())
}

/// `arctan(cos α · tan(Ω/2))` with the quadrant restored:
/// `arg(cos(Ω/2) + i cos α sin(Ω/2))`.
///
/// Valid for two-term states whose `m_S = +1/2` weight is `sin²(α/2)`.
pub fn electron_marginal_closed_form<T: Real>(alpha: T, omega: T) -> T {
    let (s, c) = (omega * T::lit(0.5)).sin_cos();
    snapped_argument(Complex::new(c, alpha.cos() * s), omega * T::lit(0.5))
}

/// `arg[sin²(α₁/2) e^{-iΩ/2} + cos²(α₁/2) e^{-3iΩ/2}]`, the nuclear marginal
/// phase of the `I = 3/2` level `E_+1^-`.
pub fn sodium_nuclear_marginal_closed_form<T: Real>(alpha1: T, omega: T) -> T {
    let half = alpha1 * T::lit(0.5);
    let (s2, c2) = (half.sin().powi(2), half.cos().powi(2));
    let z = unit_phasor(-omega * T::lit(0.5)) * s2 + unit_phasor(-omega * T::lit(1.5)) * c2;
    snapped_argument(z, omega * T::lit(1.5))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerryResult<T> {
    pub level: LevelId,
    pub theta: T,
    pub omega: T,
    /// `-mΩ`.
    pub total: Phase<T>,
    /// `Σ p_i (β_i^e + β_i^n)`.
    pub schmidt_total: Phase<T>,
    pub marginal_electron: T,
    pub marginal_nuclear: T,
    pub average_electron: T,
    pub average_nuclear: T,
    pub per_schmidt: Vec<SchmidtPhase<T>>,
}

/// Analytic phases of level `id` for a cone of polar angle `theta`.
pub fn berry_analysis<T: Real>(
    atom: &AtomParams<T>,
    point: FieldPoint<T>,
    id: LevelId,
    theta: T,
) -> Result<BerryResult<T>> {
    let level = level_at(atom, point, id)?;
    let decomposition = schmidt(&level.complex_amplitudes(), &atom.basis())?;
    analysis_from_level(&level, &decomposition, atom.nuclear_spin, theta)
}

fn analysis_from_level<T: Real>(
    level: &EigenLevel<T>,
    decomposition: &SchmidtDecomposition<T>,
    nuclear_spin: HalfInteger,
    theta: T,
) -> Result<BerryResult<T>> {
    let omega = solid_angle(theta);
    let terms = schmidt_phases(decomposition, nuclear_spin, omega)?;
    let avg = |sub| terms.iter().map(|t| t.p * subsystem_beta(t, sub)).sum::<T>();
    Ok(BerryResult {
        level: level.id,
        theta,
        omega,
        total: total_phase_analytic(level, omega),
        schmidt_total: Phase::new(terms.iter().map(|t| t.p * (t.beta_electron + t.beta_nuclear)).sum()),
        marginal_electron: marginal_from_terms(&terms, Subsystem::Electron),
        marginal_nuclear: marginal_from_terms(&terms, Subsystem::Nuclear),
        average_electron: avg(Subsystem::Electron),
        average_nuclear: avg(Subsystem::Nuclear),
        per_schmidt: terms,
    })
}

/// A discretised cone: `φ_k = 2πk/steps`, `k = 0..steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LoopSpec<T> {
    pub theta: T,
    pub b: T,
    pub f: T,
    pub steps: usize,
}

impl<T: Real> LoopSpec<T> {
    pub fn new(theta: T, b: T, f: T, steps: usize) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::InvalidLoop(format!("theta = {theta} is outside [0, pi]")));
        }
        if steps < 3 {
            return Err(Error::InvalidLoop(format!("need at least 3 steps, got {steps}")));
        }
        Ok(Self { theta, b, f, steps })
    }

    pub fn point(&self) -> FieldPoint<T> {
        FieldPoint { b: self.b, f: self.f }
    }

    pub fn phi(&self, k: usize) -> T {
        T::TAU() * T::from_usize(k).unwrap() / T::from_usize(self.steps).unwrap()
    }
}

/// `-arg Π_k ⟨ψ_k|ψ_{k+1}⟩` around a closed loop, `ψ_N ≡ ψ_0`.
///
/// Independent of the phase of every individual `ψ_k`.
pub fn wilson_loop_phase<T: Real>(states: &[Vec<Complex<T>>]) -> T {
    let n = states.len();
    let product = (0..n).fold(Complex::new(T::one(), T::zero()), |acc, k| {
        let z = inner::<T, Complex<T>>(&states[k], &states[(k + 1) % n]);
        // Renormalise each factor so long loops cannot underflow.
        acc * (z / z.norm())
    });
    principal_angle(-product.arg())
}

/// Numerical Berry phase of every level of `atom` from eigenvectors of the
/// rotated Hamiltonian around the loop, in canonical level order.
///
/// Levels are identified by energy, which does not depend on the field
/// direction; each step also checks that the chosen vector overlaps the
/// previous one most.
pub fn berry_phases_numeric<T: Real>(atom: &AtomParams<T>, spec: &LoopSpec<T>) -> Result<Vec<(LevelId, T)>> {
    let reference = levels_at(atom, spec.point())?;
    let mut tracks: Vec<Vec<Vec<Complex<T>>>> = vec![Vec::with_capacity(spec.steps); reference.len()];
    for k in 0..spec.steps {
        let phi = spec.phi(k);
        let h = build_rotated_hamiltonian(atom, spec.point(), spec.theta, phi);
        let eig = jacobi_eigh_hermitian(&h)?;
        for (r, level) in reference.iter().enumerate() {
            let j = nearest(&eig.values, level.energy);
            let gap = eig
                .values
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &v)| (v - eig.values[j]).abs())
                .fold(T::infinity(), T::min);
            if gap <= T::lit(LOOP_GAP_TOLERANCE) {
                return Err(Error::DegenerateOnLoop {
                    level: level.id.to_string(),
                    phi: phi.as_f64(),
                    gap: gap.as_f64(),
                });
            }
            let v = eig.vector(j);
            if let Some(prev) = tracks[r].last() {
                check_overlap(prev, &v, &eig.vectors, j, phi)?;
            }
            tracks[r].push(v);
        }
    }
    Ok(reference
        .iter()
        .zip(&tracks)
        .map(|(level, states)| (level.id, wilson_loop_phase(states)))
        .collect())
}

fn nearest<T: Real>(values: &[T], target: T) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (*a.1 - target).abs().partial_cmp(&(*b.1 - target).abs()).unwrap())
        .map(|(i, _)| i)
        .expect("nonempty spectrum")
}

fn check_overlap<T: Real>(prev: &[Complex<T>], v: &[Complex<T>], vectors: &Matrix<Complex<T>>, j: usize, phi: T) -> Result<()> {
    let chosen = inner::<T, Complex<T>>(prev, v).norm();
    for i in (0..vectors.cols()).filter(|&i| i != j) {
        let other = inner::<T, Complex<T>>(prev, &vectors.column(i)).norm();
        if other >= chosen {
            return Err(Error::AmbiguousContinuation {
                index: 0,
                parameter: "phi",
                value: phi.as_f64(),
                first: chosen.as_f64(),
                second: other.as_f64(),
            });
        }
    }
    Ok(())
}

/// Numerical Berry phase of one level.
pub fn berry_phase_numeric<T: Real>(atom: &AtomParams<T>, spec: &LoopSpec<T>, id: LevelId) -> Result<T> {
    if !level_ids(atom).contains(&id) {
        return Err(Error::UnknownLevel(id.to_string()));
    }
    Ok(berry_phases_numeric(atom, spec)?
        .into_iter()
        .find(|(l, _)| *l == id)
        .map(|(_, beta)| beta)
        .expect("checked level"))
}

/// The rotations `R(θ, φ_k)` of one spin around a discretised cone.
#[derive(Clone, Debug)]
pub struct ConeLoop<T> {
    pub spin: HalfInteger,
    pub theta: T,
    rotations: Vec<Matrix<Complex<T>>>,
}

impl<T: Real> ConeLoop<T> {
    pub fn new(spin: HalfInteger, theta: T, steps: usize) -> Result<Self> {
        let spec = LoopSpec::new(theta, T::zero(), T::zero(), steps)?;
        let ops = spin_operators::<T>(spin)?;
        let rotations = (0..steps).map(|k| rotation_from_operators(&ops, theta, spec.phi(k))).collect();
        Ok(Self { spin, theta, rotations })
    }

    pub fn steps(&self) -> usize {
        self.rotations.len()
    }

    /// Wilson-loop phase of `v` (components by descending projection)
    /// carried around the cone.
    pub fn phase(&self, v: &[Complex<T>]) -> Result<T> {
        if v.len() != self.spin.multiplicity() {
            return Err(Error::DimensionMismatch {
                expected: self.spin.multiplicity(),
                actual: v.len(),
            });
        }
        let states: Vec<_> = self.rotations.iter().map(|r| r.mat_vec(v)).collect();
        Ok(wilson_loop_phase(&states))
    }
}

/// Numerical cone phase of a single-spin state.
pub fn spin_phase_numeric<T: Real>(v: &[Complex<T>], spin: HalfInteger, theta: T, steps: usize) -> Result<T> {
    ConeLoop::new(spin, theta, steps)?.phase(v)
}

/// `Γ_A` built from Wilson-loop phases of the Schmidt vectors of `A`.
pub fn marginal_phase_numeric<T: Real>(
    decomposition: &SchmidtDecomposition<T>,
    subsystem: Subsystem,
    cone: &ConeLoop<T>,
) -> Result<T> {
    let pairs = decomposition
        .coefficients
        .iter()
        .zip(decomposition.vectors(subsystem))
        .map(|(&p, v)| Ok((p, cone.phase(v)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_argument(pairs.into_iter()))
}

/// Marginal phases of one level over a `(θ, B)` grid; rows follow `θ`.
#[derive(Clone, Debug, Serialize)]
pub struct MarginalScan<T> {
    pub level: LevelId,
    pub f: T,
    pub b: Vec<T>,
    pub theta: Vec<T>,
    pub gamma_electron: Vec<Vec<T>>,
    pub gamma_nuclear: Vec<Vec<T>>,
    /// `Σ p_i β_i^A`, unreduced.
    pub average_electron: Vec<Vec<T>>,
    pub average_nuclear: Vec<Vec<T>>,
    /// Per `θ` row, field values where `Γ_e` has a node.
    pub nodes_electron: Vec<Vec<T>>,
    pub nodes_nuclear: Vec<Vec<T>>,
}

/// Imaginary part of `Σ p_i e^{iβ_i^A}` at field `b`; its zeros are the
/// nodes of the marginal phase.
fn phasor_imag<T: Real>(atom: &AtomParams<T>, id: LevelId, f: T, b: T, theta: T, subsystem: Subsystem) -> Result<T> {
    let r = berry_analysis(atom, FieldPoint { b, f }, id, theta)?;
    Ok(weighted_phasor(r.per_schmidt.iter().map(|t| (t.p, subsystem_beta(t, subsystem)))).0.im)
}

/// Side of the real axis: `0` for phases snapped onto it or undefined (the
/// phasor passes through the origin), else the sign of `sin Γ`.
fn axis_side<T: Real>(gamma: T) -> i8 {
    if gamma.is_nan() || gamma == T::zero() || gamma == T::PI() {
        0
    } else if gamma.sin() > T::zero() {
        1
    } else {
        -1
    }
}

/// Nodes of `Γ` along one row: points where the phasor crosses the real axis,
/// so that `Γ` passes through `0` or `π`. This is the zero set of
/// `arctan(tan Γ)`.
///
/// A lone on-axis grid point between opposite sides is reported as is; a
/// sign change between neighbours is refined by bisection to 1e-12. Rows
/// lying on the axis throughout (`θ = 0`, `π/2`, `π`) have no nodes.
fn row_nodes<T: Real>(
    atom: &AtomParams<T>,
    id: LevelId,
    f: T,
    theta: T,
    b: &[T],
    gamma: &[T],
    subsystem: Subsystem,
) -> Result<Vec<T>> {
    let side: Vec<i8> = gamma.iter().map(|&g| axis_side(g)).collect();
    let tol = T::tol(1e-12);
    let mut nodes = Vec::new();
    for k in 0..b.len().saturating_sub(1) {
        match (side[k], side[k + 1]) {
            (l, r) if l * r < 0 => {
                let g = |x: T| phasor_imag(atom, id, f, x, theta, subsystem).unwrap_or_else(|_| T::nan());
                nodes.push(bisect(g, b[k], b[k + 1], T::zero(), tol));
            }
            (0, r) if r != 0 && k > 0 && side[k - 1] * r < 0 => nodes.push(b[k]),
            _ => {}
        }
    }
    Ok(nodes)
}

fn cone_angles<T: Real>(grid: &Grid<T>) -> Result<Vec<T>> {
    let theta = grid.values();
    match theta.iter().find(|t| !(**t >= T::zero() && **t <= T::PI())) {
        Some(t) => Err(Error::InvalidLoop(format!("theta = {t} is outside [0, pi]"))),
        None => Ok(theta),
    }
}

/// `Γ_e` and `Γ_n` of level `id` at fixed `f` over `B × θ`, with nodes.
pub fn marginal_phase_scan<T: Real>(
    atom: &AtomParams<T>,
    id: LevelId,
    f: T,
    b_grid: &Grid<T>,
    theta_grid: &Grid<T>,
) -> Result<MarginalScan<T>> {
    let b = b_grid.values();
    let theta = cone_angles(theta_grid)?;
    let basis = atom.basis();
    // Schmidt data depend on B only.
    let per_b: Vec<(EigenLevel<T>, SchmidtDecomposition<T>)> = b
        .par_iter()
        .map(|&x| {
            let level = level_at(atom, FieldPoint { b: x, f }, id)?;
            let s = schmidt(&level.complex_amplitudes(), &basis)?;
            Ok((level, s))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<BerryResult<T>>> = theta
        .par_iter()
        .map(|&t| {
            per_b
                .iter()
                .map(|(level, s)| analysis_from_level(level, s, atom.nuclear_spin, t))
                .collect()
        })
        .collect::<Result<_>>()?;
    let grid_of = |get: fn(&BerryResult<T>) -> T| -> Vec<Vec<T>> {
        rows.iter().map(|row| row.iter().map(get).collect()).collect()
    };
    let gamma_electron = grid_of(|r| r.marginal_electron);
    let gamma_nuclear = grid_of(|r| r.marginal_nuclear);
    let nodes = |gamma: &[Vec<T>], sub| -> Result<Vec<Vec<T>>> {
        theta
            .par_iter()
            .zip(gamma)
            .map(|(&t, row)| row_nodes(atom, id, f, t, &b, row, sub))
            .collect()
    };
    Ok(MarginalScan {
        level: id,
        f,
        nodes_electron: nodes(&gamma_electron, Subsystem::Electron)?,
        nodes_nuclear: nodes(&gamma_nuclear, Subsystem::Nuclear)?,
        b,
        theta,
        average_electron: grid_of(|r| r.average_electron),
        average_nuclear: grid_of(|r| r.average_nuclear),
        gamma_electron,
        gamma_nuclear,
    })
}

/// `Γ_e` and `Γ_n` over the same grid as [`marginal_phase_scan`], built from
/// Wilson-loop phases of the Schmidt vectors; rows follow `θ`.
pub fn marginal_phase_scan_numeric<T: Real>(
    atom: &AtomParams<T>,
    id: LevelId,
    f: T,
    b_grid: &Grid<T>,
    theta_grid: &Grid<T>,
    steps: usize,
) -> Result<(Vec<Vec<T>>, Vec<Vec<T>>)> {
    let basis = atom.basis();
    let per_b: Vec<SchmidtDecomposition<T>> = b_grid
        .values()
        .par_iter()
        .map(|&x| schmidt(&level_at(atom, FieldPoint { b: x, f }, id)?.complex_amplitudes(), &basis))
        .collect::<Result<_>>()?;
    let rows: Vec<(Vec<T>, Vec<T>)> = cone_angles(theta_grid)?
        .par_iter()
        .map(|&t| {
            let electron = ConeLoop::new(ELECTRON_SPIN, t, steps)?;
            let nuclear = ConeLoop::new(atom.nuclear_spin, t, steps)?;
            let mut ge = Vec::with_capacity(per_b.len());
            let mut gn = Vec::with_capacity(per_b.len());
            for s in &per_b {
                ge.push(marginal_phase_numeric(s, Subsystem::Electron, &electron)?);
                gn.push(marginal_phase_numeric(s, Subsystem::Nuclear, &nuclear)?);
            }
            Ok((ge, gn))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::angle_distance;
    use crate::{Atom, Point};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn id(s: &str) -> LevelId {
        s.parse().unwrap()
    }

    #[test]
    fn solid_angles() {
        assert_eq!(solid_angle(0.0), 0.0);
        assert!((solid_angle(FRAC_PI_2) - 2.0 * PI).abs() < 1e-15);
        assert!((solid_angle(FRAC_PI_3) - PI).abs() < 1e-15);
        assert_eq!(solid_angle(PI), 4.0 * PI);
    }

    #[test]
    fn basis_phases() {
        let h = HalfInteger::from_twice;
        assert_eq!(basis_phase(h(1), h(1), 2.0).unwrap(), -1.0);
        assert_eq!(basis_phase(h(3), h(3), 2.0).unwrap(), -3.0);
        assert_eq!(basis_phase(h(2), h(0), 2.0).unwrap(), 0.0);
        assert!(basis_phase(h(1), h(3), 2.0).is_err());
    }

    #[test]
    fn branch_cut_is_pi() {
        assert_eq!(phase_argument(Complex::new(-1.0, -1e-17)), PI);
        assert_eq!(phase_argument(Complex::new(-1.0, 0.0)), PI);
        assert_eq!(phase_argument(Complex::new(1.0, -1e-17)), 0.0);
        assert!((phase_argument(Complex::new(-1.0, -1e-3)) + PI).abs() < 2e-3);
        assert!(phase_argument(Complex::new(1e-17f64, -1e-17)).is_nan());
    }

    #[test]
    fn vanishing_phasor_has_no_phase() {
        // Singlet at B = 0: equal weights on m_S = ±1/2, phasor cos(Ω/2) = 0 at Ω = π, 3π.
        let hy = Atom::hydrogen();
        for theta in [FRAC_PI_3, 2.0 * FRAC_PI_3] {
            let r = berry_analysis(&hy, Point::new(0.0, 1.0), id("0-"), theta).unwrap();
            assert!(r.marginal_electron.is_nan() && r.marginal_nuclear.is_nan());
            assert!(r.average_electron.abs() < 1e-15);
            assert!(electron_marginal_closed_form(FRAC_PI_2, r.omega).is_nan());
        }
        let bad = Grid::new(0.0, 4.0, 3).unwrap();
        let b = Grid::new(-0.1, 0.1, 3).unwrap();
        assert!(matches!(marginal_phase_scan(&hy, id("0-"), 1.0, &b, &bad), Err(Error::InvalidLoop(_))));
        let r = berry_analysis(&hy, Point::new(1e-3, 1.0), id("0-"), FRAC_PI_3).unwrap();
        assert!(r.marginal_electron.is_finite());
    }

    #[test]
    fn half_turns_are_real() {
        // Ω(π/2) sits one ulp below 2π, so -3Ω/2 misses -3π by ~1e-15.
        let z = unit_phasor(-1.5 * solid_angle(FRAC_PI_2));
        assert_eq!(z.re, -1.0);
        assert!(z.im.abs() < 2e-15);
        let na = AtomParams::<f64>::sodium();
        for &b in &[-0.1, -0.06, 0.0, 0.05] {
            let r = berry_analysis(&na, FieldPoint::new(b, 1.0), id("+1-"), FRAC_PI_2).unwrap();
            assert_eq!(r.marginal_nuclear, PI);
            assert_eq!(r.marginal_electron, PI);
        }
    }

    #[test]
    fn hydrogen_total_phases() {
        let hy = AtomParams::<f64>::hydrogen();
        let p = FieldPoint::new(0.05, 1.0);
        let omega = solid_angle(FRAC_PI_3);
        for (name, m) in [("+1", 1.0), ("0+", 0.0), ("0-", 0.0), ("-1", -1.0)] {
            let r = berry_analysis(&hy, p, id(name), FRAC_PI_3).unwrap();
            assert_eq!(r.total.raw, -m * omega);
            assert!((r.schmidt_total.raw - r.total.raw).abs() < 1e-14);
        }
    }

    #[test]
    fn sodium_weighted_sum_gives_minus_omega() {
        let na = AtomParams::<f64>::sodium();
        let r = berry_analysis(&na, FieldPoint::new(0.02, 1.0), id("+1-"), 0.9).unwrap();
        assert!((r.schmidt_total.raw + r.omega).abs() < 1e-14);
        assert_eq!(r.per_schmidt.len(), 2);
        let a1 = level_at(&na, FieldPoint::new(0.02, 1.0), id("+1-")).unwrap().alpha.unwrap();
        assert!((r.average_electron - r.omega / 2.0 * a1.cos()).abs() < 1e-14);
        assert!((r.marginal_nuclear - sodium_nuclear_marginal_closed_form(a1, r.omega)).abs() < 1e-14);
    }

    #[test]
    fn hydrogen_marginal_matches_arctan_form() {
        let hy = AtomParams::<f64>::hydrogen();
        for &b in &[-0.2, -0.01, 0.003, 0.1] {
            let level = level_at(&hy, FieldPoint::new(b, 1.0), id("0-")).unwrap();
            let alpha = level.alpha.unwrap();
            for &theta in &[0.2, 1.0, 1.5, 2.0, 3.0] {
                let r = berry_analysis(&hy, FieldPoint::new(b, 1.0), id("0-"), theta).unwrap();
                let closed = electron_marginal_closed_form(alpha, r.omega);
                assert!(angle_distance(r.marginal_electron, closed) < 1e-13);
                assert!((r.average_electron - r.omega / 2.0 * alpha.cos()).abs() < 1e-13);
                if (r.omega / 2.0).cos() > 0.0 {
                    let plain = (alpha.cos() * (r.omega / 2.0).tan()).atan();
                    assert!((r.marginal_electron - plain).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn strong_field_marginal_is_half_solid_angle() {
        let hy = AtomParams::<f64>::hydrogen();
        let r = berry_analysis(&hy, FieldPoint::new(1e7, 1.0), id("0-"), 1.0).unwrap();
        assert!((r.marginal_electron - r.omega / 2.0).abs() < 1e-9);
    }

    #[test]
    fn full_sphere_reduces_to_zero() {
        for atom in [AtomParams::<f64>::hydrogen(), AtomParams::sodium()] {
            for id in level_ids(&atom) {
                let r = berry_analysis(&atom, FieldPoint::new(0.03, 1.0), id, PI).unwrap();
                assert_eq!(r.marginal_electron, 0.0);
                assert_eq!(r.marginal_nuclear, 0.0);
                assert!(r.total.reduced.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loop_validation() {
        assert!(LoopSpec::new(-0.1, 0.0, 1.0, 10).is_err());
        assert!(LoopSpec::new(3.2, 0.0, 1.0, 10).is_err());
        assert!(LoopSpec::new(1.0, 0.0, 1.0, 2).is_err());
        assert!(LoopSpec::new(PI, 0.0, 1.0, 3).is_ok());
    }

    #[test]
    fn numeric_phase_matches_analytic() {
        let hy = AtomParams::<f64>::hydrogen();
        let spec = LoopSpec::new(FRAC_PI_3, 0.1, 1.0, 2000).unwrap();
        let phases = berry_phases_numeric(&hy, &spec).unwrap();
        for (level, beta) in phases {
            let m = level.m.to_f64();
            assert!(angle_distance(beta, -m * PI) < 5e-3, "{level}: {beta}");
        }
        let flat = LoopSpec::new(0.0, 0.1, 1.0, 50).unwrap();
        for (_, beta) in berry_phases_numeric(&hy, &flat).unwrap() {
            assert!(beta.abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_loop_is_reported() {
        let na = AtomParams::<f64>::sodium();
        let spec = LoopSpec::new(0.5, 0.0, 1.0, 10).unwrap();
        assert!(matches!(
            berry_phase_numeric(&na, &spec, id("0-")),
            Err(Error::DegenerateOnLoop { .. })
        ));
    }

    #[test]
    fn wilson_loop_gauge_invariance() {
        let hy = AtomParams::<f64>::hydrogen();
        let spec = LoopSpec::new(1.1, 0.1, 1.0, 200).unwrap();
        let states: Vec<Vec<Complex<f64>>> = (0..spec.steps)
            .map(|k| {
                let h = build_rotated_hamiltonian(&hy, spec.point(), spec.theta, spec.phi(k));
                jacobi_eigh_hermitian(&h).unwrap().vector(3)
            })
            .collect();
        let base = wilson_loop_phase(&states);
        let shifted: Vec<Vec<Complex<f64>>> = states
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let phase = Complex::from_polar(1.0, 0.37 * k as f64 + (k * k) as f64);
                v.iter().map(|z| z * phase).collect()
            })
            .collect();
        assert!(angle_distance(base, wilson_loop_phase(&shifted)) < 1e-12);
    }

    #[test]
    fn single_spin_numeric_phase() {
        let up = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let beta = spin_phase_numeric(&up, HalfInteger::HALF, FRAC_PI_2, 1000).unwrap();
        assert!(angle_distance(beta, -PI) < 1e-4);
        assert!(spin_phase_numeric(&up, HalfInteger::ONE, 1.0, 10).is_err());
    }

    #[test]
    fn numeric_marginal_scan_tracks_closed_form() {
        let na = AtomParams::<f64>::sodium();
        let bg = Grid::new(-0.1, 0.1, 9).unwrap();
        let tg = Grid::new(0.2, 2.8, 6).unwrap();
        let scan = marginal_phase_scan(&na, id("+1-"), 1.0, &bg, &tg).unwrap();
        let (ge, gn) = marginal_phase_scan_numeric(&na, id("+1-"), 1.0, &bg, &tg, 2000).unwrap();
        for (i, j) in (0..6).flat_map(|i| (0..9).map(move |j| (i, j))) {
            assert!(angle_distance(ge[i][j], scan.gamma_electron[i][j]) < 5e-3);
            assert!(angle_distance(gn[i][j], scan.gamma_nuclear[i][j]) < 5e-3);
        }
    }

    #[test]
    fn hydrogen_nodes_at_zero_field() {
        let hy = AtomParams::<f64>::hydrogen();
        let tg = Grid::new(0.1, 1.5, 15).unwrap();
        // Even count: bracketed node; odd count: node on the grid.
        for n in [40, 41] {
            let bg = Grid::new(-0.2, 0.2, n).unwrap();
            let scan = marginal_phase_scan(&hy, id("0-"), 1.0, &bg, &tg).unwrap();
            for nodes in &scan.nodes_electron {
                assert_eq!(nodes.len(), 1);
                assert!(nodes[0].abs() < 1e-12);
            }
        }
        let edges = Grid::new(0.0, PI, 3).unwrap();
        let scan = marginal_phase_scan(&hy, id("0-"), 1.0, &Grid::new(-0.2, 0.2, 40).unwrap(), &edges).unwrap();
        assert!(scan.nodes_electron.iter().all(Vec::is_empty));
        assert!(scan.gamma_electron[1].iter().all(|&g| g == PI));
        assert!(scan.gamma_electron[2].iter().all(|&g| g == 0.0));
    }
}
