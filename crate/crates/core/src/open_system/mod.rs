//! Second-order open-system dynamics from bath correlation functions: RWA,
//! TCL2 and TC2 master equations and the RG-corrected reduced map.

pub mod generators;
pub mod kernel;
pub mod model;
pub mod solvers;

pub use generators::{
    half_fourier, rg_correction, rwa_generator, tcl2_generator, HalfFourierData, OpenSystem, RwaCoefficient,
    RwaGenerator,
};
pub use kernel::{CorrelationKernel, ExpTerm, SampledKernel};
pub use model::{
    bohr_decompose, check_integrability, BathModel, IntegrabilityReport, SpectralDecomposition, SystemModel,
};
pub use solvers::{rg_map_direct, rg_map_solve, rwa_solve, secular_projection_of_redfield, tc2_solve, tcl2_solve};
