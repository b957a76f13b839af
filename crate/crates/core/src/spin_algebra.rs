//! Angular-momentum operators and rotations for arbitrary half-integer spin.
//!
//! Quantum numbers are stored exactly as twice their value. Matrix rows and
//! columns are indexed by projection in decreasing order, `m = j, j-1, …, -j`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigh_hermitian, Matrix};
use crate::num::Real;

/// An exact multiple of 1/2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct HalfInteger {
    twice: i32,
}

impl HalfInteger {
    pub const ZERO: Self = Self { twice: 0 };
    pub const HALF: Self = Self { twice: 1 };
    pub const ONE: Self = Self { twice: 2 };

    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    pub const fn from_integer(n: i32) -> Self {
        Self { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn abs(self) -> Self {
        Self {
            twice: self.twice.abs(),
        }
    }

    pub fn to_real<T: Real>(self) -> T {
        T::lit(self.twice as f64) / T::lit(2.0)
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Validates `self` as a spin magnitude.
    pub fn as_spin(self) -> Result<Self> {
        if self.twice < 0 {
            Err(Error::NegativeSpin(self))
        } else {
            Ok(self)
        }
    }

    /// Number of projections, `2j + 1`.
    pub fn multiplicity(self) -> usize {
        (self.twice + 1).max(0) as usize
    }

    /// Whether `m` is an allowed projection of the spin magnitude `self`.
    pub fn admits(self, m: HalfInteger) -> bool {
        self.twice >= 0 && m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }

    /// Projections `j, j-1, …, -j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInteger> {
        let j = self.twice;
        (0..self.multiplicity()).map(move |k| HalfInteger::from_twice(j - 2 * k as i32))
    }

    /// Row index of projection `m` in a spin-`self` operator matrix.
    pub fn index_of(self, m: HalfInteger) -> Option<usize> {
        self.admits(m).then(|| ((self.twice - m.twice) / 2) as usize)
    }
}

impl Add for HalfInteger {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInteger {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInteger {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_twice(-self.twice)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = Error;

    /// Accepts `"3/2"`, `"-1/2"`, `"2"`, `"+1"` and decimal forms like `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::ParseHalfInteger(s.to_string());
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| err())?;
            return match den.trim() {
                "2" => Ok(Self::from_twice(num)),
                "1" => Ok(Self::from_integer(num)),
                _ => Err(err()),
            };
        }
        if let Ok(n) = t.parse::<i32>() {
            return Ok(Self::from_integer(n));
        }
        let x: f64 = t.parse().map_err(|_| err())?;
        Self::try_from(x).map_err(|_| err())
    }
}

impl TryFrom<f64> for HalfInteger {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        let twice = 2.0 * x;
        if twice.is_finite() && twice.fract() == 0.0 && twice.abs() < i32::MAX as f64 {
            Ok(Self::from_twice(twice as i32))
        } else {
            Err(Error::ParseHalfInteger(x.to_string()))
        }
    }
}

impl Serialize for HalfInteger {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for HalfInteger {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct HalfIntegerVisitor;

        impl Visitor<'_> for HalfIntegerVisitor {
            type Value = HalfInteger;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a half-integer such as \"3/2\" or 1.5")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<HalfInteger, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<HalfInteger, E> {
                HalfInteger::try_from(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<HalfInteger, E> {
                i32::try_from(v)
                    .map(HalfInteger::from_integer)
                    .map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<HalfInteger, E> {
                i32::try_from(v)
                    .map(HalfInteger::from_integer)
                    .map_err(E::custom)
            }
        }

        deserializer.deserialize_any(HalfIntegerVisitor)
    }
}

/// Spin operators for a single spin `j`, in units of ħ.
#[derive(Clone, Debug)]
pub struct SpinOperatorSet<T> {
    pub j: HalfInteger,
    pub jz: Matrix<T>,
    pub jplus: Matrix<T>,
    pub jminus: Matrix<T>,
    pub jx: Matrix<T>,
    pub jy: Matrix<Complex<T>>,
}

impl<T: Real> SpinOperatorSet<T> {
    pub fn dim(&self) -> usize {
        self.j.multiplicity()
    }

    /// `n̂·J` for `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)`.
    pub fn along(&self, theta: T, phi: T) -> Matrix<Complex<T>> {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let x = self.jx.to_complex().scale(st * cp);
        let y = self.jy.scale(st * sp);
        let z = self.jz.to_complex().scale(ct);
        x.add(&y).add(&z)
    }

    /// `J² = Jx² + Jy² + Jz²`.
    pub fn casimir(&self) -> Matrix<Complex<T>> {
        let jx = self.jx.to_complex();
        let jz = self.jz.to_complex();
        jx.matmul(&jx).add(&self.jy.matmul(&self.jy)).add(&jz.matmul(&jz))
    }
}

/// `sqrt((j ∓ m)(j ± m + 1))` for the raising (`+`) or lowering (`-`) step.
pub(crate) fn ladder_coefficient<T: Real>(j: HalfInteger, m: HalfInteger, raise: bool) -> T {
    let (a, b) = if raise {
        (j - m, j + m + HalfInteger::ONE)
    } else {
        (j + m, j - m + HalfInteger::ONE)
    };
    // (2a)(2b)/4 is an exact integer product.
    let product = (a.twice() as i64) * (b.twice() as i64);
    (T::lit(product as f64) / T::lit(4.0)).sqrt()
}

/// Builds `Jz`, `J±`, `Jx` and `Jy` for spin `j`.
pub fn spin_operators<T: Real>(j: HalfInteger) -> Result<SpinOperatorSet<T>> {
    let j = j.as_spin()?;
    let n = j.multiplicity();
    let ms: Vec<HalfInteger> = j.projections().collect();
    let jz = Matrix::from_fn(n, n, |r, c| if r == c { ms[r].to_real() } else { T::zero() });
    // ⟨m+1|J+|m⟩ sits one row above the diagonal.
    let jplus = Matrix::from_fn(n, n, |r, c| {
        if r + 1 == c {
            ladder_coefficient(j, ms[c], true)
        } else {
            T::zero()
        }
    });
    let jminus = jplus.transpose();
    let half = T::lit(0.5);
    let jx = jplus.add(&jminus).scale(half);
    // (J+ - J-)/(2i) = -i (J+ - J-)/2
    let jy = jplus
        .sub(&jminus)
        .map(|x| Complex::new(T::zero(), -x * half));
    Ok(SpinOperatorSet {
        j,
        jz,
        jplus,
        jminus,
        jx,
        jy,
    })
}

/// `exp(-iφ Jz) · exp(-iθ Jy)`: rotates the quantization axis onto
/// `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn rotation_matrix<T: Real>(j: HalfInteger, theta: T, phi: T) -> Result<Matrix<Complex<T>>> {
    let ops = spin_operators::<T>(j)?;
    Ok(rotation_from_operators(&ops, theta, phi))
}

pub(crate) fn rotation_from_operators<T: Real>(
    ops: &SpinOperatorSet<T>,
    theta: T,
    phi: T,
) -> Matrix<Complex<T>> {
    let n = ops.dim();
    let eig = jacobi_eigh_hermitian(&ops.jy).expect("Jy is Hermitian and small");
    let ry = Matrix::from_fn(n, n, |r, c| {
        (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
            let phase = Complex::from_polar(T::one(), -theta * eig.values[k]);
            acc + eig.vectors[(r, k)] * phase * eig.vectors[(c, k)].conj()
        })
    });
    let rz = Matrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex::from_polar(T::one(), -phi * ops.jz[(r, r)])
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    rz.matmul(&ry)
}
