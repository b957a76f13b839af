//! One-parameter sweep grids and the scalar searches run along them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::FieldPoint;
use crate::num::{linspace, Real};

/// Inclusive grid of `n` evenly spaced points on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid<T> {
    pub lo: T,
    pub hi: T,
    pub n: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(lo: T, hi: T, n: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        if hi < lo {
            return Err(Error::InvalidGrid(format!("upper end {hi} is below lower end {lo}")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn values(&self) -> Vec<T> {
        linspace(self.lo, self.hi, self.n)
    }

    pub fn step(&self) -> T {
        (self.hi - self.lo) / T::from_usize(self.n - 1).unwrap()
    }

    /// The same interval with `2n - 1` points: every old point is kept.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}

/// Which parameter is swept; the other one is held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SweepAxis<T> {
    /// Sweep the field `B` at fixed hyperfine scale.
    Field { f: T },
    /// Sweep the hyperfine scale `f` at fixed field.
    Scaling { b: T },
}

impl<T: Real> SweepAxis<T> {
    pub fn point(&self, x: T) -> FieldPoint<T> {
        match *self {
            SweepAxis::Field { f } => FieldPoint { b: x, f },
            SweepAxis::Scaling { b } => FieldPoint { b, f: x },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Field { .. } => "B",
            SweepAxis::Scaling { .. } => "f",
        }
    }
}

/// Bisection on a sign change of `g` inside `[lo, hi]`.
///
/// Stops when `|g| < value_tol` or the bracket is narrower than `x_tol`.
pub fn bisect<T: Real>(mut g: impl FnMut(T) -> T, mut lo: T, mut hi: T, value_tol: T, x_tol: T) -> T {
    let mut g_lo = g(lo);
    if g_lo == T::zero() {
        return lo;
    }
    let g_hi = g(hi);
    if g_hi == T::zero() {
        return hi;
    }
    let half = T::lit(0.5);
    for _ in 0..200 {
        let mid = lo + (hi - lo) * half;
        let g_mid = g(mid);
        if g_mid.abs() < value_tol || (hi - lo).abs() < x_tol {
            return mid;
        }
        if (g_mid < T::zero()) == (g_lo < T::zero()) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) * half
}

/// Golden-section minimisation of a unimodal `g` on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_section_min<T: Real>(mut g: impl FnMut(T) -> T, mut lo: T, mut hi: T, x_tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..400 {
        if (hi - lo).abs() <= x_tol {
            break;
        }
        if g1 <= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        }
    }
    if g1 <= g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}
