pub mod berry;
pub mod crossings;
pub mod entanglement;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod num;
pub mod spectra;
pub mod spin_algebra;

pub use error::{Error, Result};
pub use num::Real;
pub use spin_algebra::{rotation_matrix, spin_operators, HalfInteger, SpinOperatorSet};
pub use hamiltonian::{AtomParams, FieldPoint, ProductBasis};
pub use spectra::{Branch, EigenLevel, LevelId};

/// Double-precision aliases used by the command-line front end.
pub type Atom = AtomParams<f64>;
pub type Point = FieldPoint<f64>;
pub type Level = EigenLevel<f64>;

/// Single-precision aliases.
pub type Atom32 = AtomParams<f32>;
pub type Point32 = FieldPoint<f32>;
pub type Level32 = EigenLevel<f32>;
