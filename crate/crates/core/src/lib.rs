//! Bohr–Fourier analysis on the universal one-dimensional solenoid.
//!
//! Functions on the solenoid are handled as ℤ-invariant functions on ℝ×Ẑ,
//! where ℤ acts by `γ·(x, t) = (x + γ, t − γ)`. The crate provides exact
//! arithmetic on ℚ and ℚ/ℤ, residue-tower profinite integers, the character
//! groups involved, symbolic solenoidal trigonometric polynomials,
//! mean-value operators (exact and quadrature-based), and the Bohr–Fourier
//! transform with Parseval, uniqueness and approximation checks.

pub mod characters;
pub mod error;
pub mod exec;
pub mod fourier;
pub mod funcspace;
pub mod io;
pub mod meanval;
pub mod profinite;
pub mod quadrature;
pub mod rationals;

pub use error::{Error, Result};
pub use exec::ExecPolicy;
pub use num_complex::Complex64;
