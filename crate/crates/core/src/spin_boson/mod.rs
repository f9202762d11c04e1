//! Two-level system coupled to a boson field with a Lorentzian kernel: the
//! exact amplitude, the exact reduced map and QME, the literal TCL equation
//! and a discretized-bath reference.

pub mod amplitude;
pub mod bath;
pub mod dynamics;

pub use amplitude::{
    amplitude_oracle, amplitude_oracle_with, f_kernel, select_sign_variant, AmplitudeFunction, KernelConvention,
    SignSelection, SignVariant, SpinBosonParams,
};
pub use bath::{default_window, discretized_bath_oracle, DiscretizedBath};
pub use dynamics::{
    exact_map, exact_map_in, exact_qme_solve, tcl_literal, tcl_literal_with, tcl_rate, KernelPhase,
};

/// u(t) for the given sign variant.
pub fn u_closed_form(a: &AmplitudeFunction, t: f64) -> num_complex::Complex64 {
    a.u(t)
}
