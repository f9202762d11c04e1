//! Time evolution under the RWA, TCL2, TC2 and RG-corrected maps. All
//! solvers work in the interaction picture.

use crate::error::{Error, Result};
use crate::numeric::density::{validate_grid, DensityMatrix, Picture, TimeSeries};
use crate::numeric::linalg::{self, HERMITIAN_TOL};
use crate::numeric::matrix::{ComplexMatrix, C64, ZERO};
use crate::numeric::ode::propagate_raw;
use crate::numeric::superop::{devec, vec, Superoperator};
use crate::numeric::volterra::volterra_system;

use super::generators::{OpenSystem, RwaGenerator};

fn check_dim(sys: &OpenSystem, rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != sys.dim() {
        return Err(Error::DimMismatch(format!("state dim {} for system dim {}", rho0.dim(), sys.dim())));
    }
    Ok(())
}

/// ρ(t) = e^{𝓛t} ρ0 on every grid point.
pub fn rwa_solve(gen: &RwaGenerator, rho0: &DensityMatrix, grid: &[f64]) -> Result<TimeSeries> {
    validate_grid(grid)?;
    if gen.generator.dim() != rho0.dim() {
        return Err(Error::DimMismatch("generator and state dimensions differ".into()));
    }
    let d = rho0.dim();
    let v0 = vec(rho0.matrix());
    let raw = grid
        .iter()
        .map(|&t| {
            let prop = gen.generator.scale_real(t).expm()?;
            devec(&prop.apply_vec(&v0), d, d)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::from_solver(grid.to_vec(), raw, Picture::Interaction, "rwa")
}

pub fn tcl2_solve(sys: &OpenSystem, rho0: &DensityMatrix, grid: &[f64]) -> Result<TimeSeries> {
    check_dim(sys, rho0)?;
    let raw = propagate_raw(|t| sys.tcl2_generator(t), rho0.matrix(), grid)?;
    TimeSeries::from_solver(grid.to_vec(), raw, Picture::Interaction, "tcl")
}

pub fn tc2_solve(sys: &OpenSystem, rho0: &DensityMatrix, grid: &[f64]) -> Result<TimeSeries> {
    check_dim(sys, rho0)?;
    sys.bath.ensure_integrable()?;
    let d = sys.dim();
    let drift = ComplexMatrix::zeros(d * d, d * d);
    let ys = volterra_system(&drift, &sys.tc2_kernel(), &vec(rho0.matrix()), grid)?;
    let raw = ys.iter().map(|y| devec(y, d, d)).collect::<Result<Vec<_>>>()?;
    TimeSeries::from_solver(grid.to_vec(), raw, Picture::Interaction, "tc")
}

/// ρ^RG(t) = (I + Φ(t)) e^{𝓛_RWA t} ρ0
pub fn rg_map_solve(sys: &OpenSystem, rho0: &DensityMatrix, grid: &[f64]) -> Result<TimeSeries> {
    check_dim(sys, rho0)?;
    let rwa = sys.rwa_generator()?;
    let base = rwa_solve(&rwa, rho0, grid)?;
    let d = sys.dim();
    let raw = grid
        .iter()
        .zip(&base.states)
        .map(|(&t, s)| {
            let v = vec(s.matrix());
            let mut out = sys.rg_correction(t)?.apply_vec(&v);
            for (o, x) in out.iter_mut().zip(&v) {
                *o += x;
            }
            devec(&out, d, d)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::from_solver(grid.to_vec(), raw, Picture::Interaction, "rg")
}

const GL10_NODES: [f64; 5] =
    [0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845, 0.9739065285171717];
const GL10_WEIGHTS: [f64; 5] =
    [0.2955242247147529, 0.2692667193099963, 0.219086362515982, 0.1494513491505806, 0.0666713443086881];

/// Composite 10-point Gauss-Legendre nodes and weights on [a, b].
fn gauss_legendre(a: f64, b: f64, max_panel: f64) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let panels = ((b - a) / max_panel).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * 10);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for k in 0..5 {
            let dx = GL10_NODES[k] * h / 2.0;
            let w = GL10_WEIGHTS[k] * h / 2.0;
            out.push((mid - dx, w));
            out.push((mid + dx, w));
        }
    }
    out
}

/// The RG map evaluated from its defining double integral
///
///   ρ^RG(t) = ρ̄ − t·𝓛_RWA ρ̄ − λ² ∫₀ᵗ dt₁ ∫₀^{t₁} dt₂ Tr_E[V(t₁),[V(t₂), ρ̄⊗Ω]],
///
/// with ρ̄ = e^{𝓛_RWA t}ρ0. The couplings are rotated by the propagator of
/// H_S and the correlations are evaluated pointwise, without the Bohr-label
/// bookkeeping of [`rg_map_solve`]. `panel` bounds the Gauss-Legendre panel
/// width.
pub fn rg_map_direct(sys: &OpenSystem, rho0: &DensityMatrix, times: &[f64], panel: f64) -> Result<TimeSeries> {
    check_dim(sys, rho0)?;
    validate_grid(times)?;
    let rwa = sys.rwa_generator()?;
    let d = sys.dim();
    let n = sys.sys.couplings.len();
    let l2 = sys.sys.lambda * sys.sys.lambda;
    let eig = linalg::herm_eig(&sys.sys.h_s, HERMITIAN_TOL)?;
    let rotate = |a: &ComplexMatrix, t: f64| -> ComplexMatrix {
        // e^{iHt} A e^{−iHt}
        let u = eig.map(|e| C64::from_polar(1.0, e * t));
        &(&u * a) * &u.adjoint()
    };
    let bath = &sys.bath;
    let mut raw = Vec::with_capacity(times.len());
    for &t in times {
        let prop = rwa.generator.scale_real(t).expm()?;
        let rho_bar = devec(&prop.apply_vec(&vec(rho0.matrix())), d, d)?;
        let drift = rwa.generator.apply(&rho_bar)?;
        let mut acc = ComplexMatrix::zeros(d, d);
        for (t1, w1) in gauss_legendre(0.0, t, panel) {
            let a1: Vec<ComplexMatrix> = sys.sys.couplings.iter().map(|a| rotate(a, t1)).collect();
            for (t2, w2) in gauss_legendre(0.0, t1, panel) {
                let s = t1 - t2;
                let w = C64::new(w1 * w2, 0.0);
                for j in 0..n {
                    let aj = rotate(&sys.sys.couplings[j], t2);
                    let aj_rho = &aj * &rho_bar;
                    let rho_aj = &rho_bar * &aj;
                    for (i, ai) in a1.iter().enumerate() {
                        let c = bath.kernel(i, j).eval(s);
                        let cbar = bath.kernel(bath.partner(i), bath.partner(j)).eval(s).conj();
                        if c != ZERO {
                            let term = &(ai * &aj_rho) - &(&aj_rho * ai);
                            acc.axpy(w * c, &term);
                        }
                        if cbar != ZERO {
                            let term = &(&rho_aj * ai) - &(ai * &rho_aj);
                            acc.axpy(w * cbar, &term);
                        }
                    }
                }
            }
        }
        let mut out = rho_bar.clone();
        out.axpy(C64::new(-t, 0.0), &drift);
        out.axpy(C64::new(-l2, 0.0), &acc);
        raw.push(out);
    }
    TimeSeries::from_solver(times.to_vec(), raw, Picture::Interaction, "rg_direct")
}

/// Secular projection of the t → ∞ TCL2 generator, computed as the
/// commutant part of R(0) relative to −i[H_S, ·] with the generic
/// first-order RG machinery.
pub fn secular_projection_of_redfield(sys: &OpenSystem) -> Result<Superoperator> {
    let l_s = Superoperator::hamiltonian(&sys.sys.h_s)?;
    let r0 = sys.redfield_generator(0.0)?;
    let lin = crate::rg_linear::LinearPerturbedSystem::new(l_s.matrix().clone(), r0.matrix().clone(), 1.0)?;
    let p = crate::rg_linear::secular_generator(&lin)?;
    Superoperator::new(sys.dim(), p)
}
