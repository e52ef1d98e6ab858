//! Numerical and closed-form models of a protected phase gate built from a
//! superinductive LC oscillator coupled to a 0-π qubit.
//!
//! Units throughout: ħ = 1, C = 1, so `L = l²`, `J₀ = j²` and time is measured
//! in units of C. The oscillator variables obey `[φ, Q] = i`.

pub mod bands;
pub mod diabatic;
pub mod error;
pub mod evolve;
pub mod ftcalc;
pub mod gate;
pub mod gkp;
pub mod qmgrid;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;
