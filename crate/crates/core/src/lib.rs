//! Effective-Hamiltonian solver for Lindblad and generalized Lindblad master
//! equations.

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod adiabatic;
pub mod ddfs;
pub mod generalized;
pub mod geometric;
pub mod io;
pub mod lindblad;
pub mod scan;
pub mod trajectory;
pub mod two_band;
