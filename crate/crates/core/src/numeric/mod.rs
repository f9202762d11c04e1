//! Dense linear algebra, superoperators and time integrators.

pub mod density;
pub mod linalg;
pub mod matrix;
pub mod ode;
pub mod superop;
pub mod volterra;

pub use density::{trace_distance, DensityMatrix, Picture, TimeSeries};
pub use linalg::{expm, herm_eig, psd_sqrt};
pub use matrix::{qubit, ComplexMatrix, C64};
pub use ode::ode_propagate;
pub use superop::{superop_sandwich, Superoperator};
pub use volterra::volterra_solve;
