//! Renormalization-group perturbation theory for linear ODEs and open
//! quantum systems, with an exactly solvable spin-boson benchmark.

pub mod cli;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod open_system;
pub mod rg_linear;
pub mod spin_boson;

pub use error::{Error, Result};
