//! Exact reduced dynamics and the literal TCL equation for the spin-boson
//! model.

use crate::error::{Error, Result};
use crate::numeric::density::{validate_grid, DensityMatrix, Picture, TimeSeries};
use crate::numeric::matrix::{qubit, ComplexMatrix, C64};
use crate::numeric::ode::propagate_raw;
use crate::numeric::superop::{superop_sandwich, Superoperator};
use crate::open_system::kernel::e_fn;

use super::amplitude::{AmplitudeFunction, SpinBosonParams};

/// Amplitudes below this make the exact QME coefficients u̇/u unusable.
pub const SINGULAR_AMPLITUDE: f64 = 1e-8;

pub(crate) fn require_qubit(rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != 2 {
        return Err(Error::DimMismatch(format!("spin-boson state must be 2x2, got dim {}", rho0.dim())));
    }
    Ok(())
}

/// Amplitude-damping map ρ₊₊ = |c|²ρ₊₊(0), ρ₊₋ = c ρ₊₋(0), ρ₋₋ = 1 − ρ₊₊.
pub fn amplitude_damping_state(c: C64, rho0: &ComplexMatrix) -> ComplexMatrix {
    let pp = rho0[(0, 0)].re * c.norm_sqr();
    let pm = c * rho0[(0, 1)];
    ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => C64::new(pp, 0.0),
        (0, 1) => pm,
        (1, 0) => pm.conj(),
        _ => C64::new(1.0 - pp, 0.0),
    })
}

pub(crate) fn damping_series(
    amps: &[C64],
    rho0: &DensityMatrix,
    grid: &[f64],
    picture: Picture,
    method: &str,
) -> Result<TimeSeries> {
    let raw = amps.iter().map(|c| amplitude_damping_state(*c, rho0.matrix())).collect();
    TimeSeries::from_solver(grid.to_vec(), raw, picture, method)
}

/// Exact reduced state in the interaction picture, from v(t) = e^{iΔt}u(t).
pub fn exact_map(a: &AmplitudeFunction, rho0: &DensityMatrix, grid: &[f64]) -> Result<TimeSeries> {
    exact_map_in(a, rho0, grid, Picture::Interaction)
}

pub fn exact_map_in(a: &AmplitudeFunction, rho0: &DensityMatrix, grid: &[f64], picture: Picture) -> Result<TimeSeries> {
    require_qubit(rho0)?;
    validate_grid(grid)?;
    let amps: Vec<C64> = match picture {
        Picture::Interaction => grid.iter().map(|&t| a.v(t)).collect(),
        Picture::Schroedinger => grid.iter().map(|&t| a.u(t)).collect(),
    };
    Ok(damping_series(&amps, rho0, grid, picture, "exact")?.with_meta("sign_variant", a.sign.as_str()))
}

/// Generator c₁ i[σ₊σ₋, ·] − c₂(2σ₋·σ₊ − {σ₊σ₋, ·}) with c₁ = Im r, c₂ = Re r.
fn exact_generator(r: C64) -> Result<Superoperator> {
    let p = qubit::excited();
    let mut g = Superoperator::hamiltonian(&p)?.scale_real(-r.im);
    let diss = Superoperator::dissipator(&qubit::sigma_minus(), &qubit::sigma_plus())?;
    g.axpy(C64::new(-2.0 * r.re, 0.0), &diss);
    Ok(g)
}

/// Integrates the exact QME with RK4. In the interaction picture the
/// coefficients come from v̇/v, in the Schrödinger picture from u̇/u.
pub fn exact_qme_solve(a: &AmplitudeFunction, rho0: &DensityMatrix, grid: &[f64], picture: Picture) -> Result<TimeSeries> {
    require_qubit(rho0)?;
    let raw = propagate_raw(
        |t| {
            let (c, cd) = match picture {
                Picture::Interaction => (a.v(t), a.v_dot(t)),
                Picture::Schroedinger => (a.u(t), a.u_dot(t)),
            };
            if c.norm() < SINGULAR_AMPLITUDE {
                return Err(Error::SingularGenerator { t, amplitude: c.norm() });
            }
            exact_generator(cd / c)
        },
        rho0.matrix(),
        grid,
    )?;
    Ok(TimeSeries::from_solver(grid.to_vec(), raw, picture, "exact_qme")?.with_meta("sign_variant", a.sign.as_str()))
}

/// Phase carried by the memory kernel inside the TCL time integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPhase {
    /// f(s)e^{+iΔs}: the carrier phase of f is removed, consistent with the
    /// amplitude oracles.
    Resolved,
    /// f(s)e^{−iΔs} read literally, which doubles the carrier phase.
    AsPrinted,
}

impl KernelPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelPhase::Resolved => "resolved",
            KernelPhase::AsPrinted => "as_printed",
        }
    }
}

/// k(t) = λ² ∫₀ᵗ f(s) e^{±iΔs} ds in closed form.
pub fn tcl_rate(p: &SpinBosonParams, phase: KernelPhase, t: f64) -> C64 {
    let z = match phase {
        KernelPhase::Resolved => C64::new(p.alpha, 0.0),
        KernelPhase::AsPrinted => C64::new(p.alpha, 2.0 * p.delta),
    };
    p.lambda2() * (p.alpha / 2.0) * e_fn(z, t)
}

/// ρ̇ = k(t)(σ₋ρσ₊ − σ₊σ₋ρ) + h.c., plus −iΔ[σ₊σ₋, ρ] in the Schrödinger
/// picture.
pub fn tcl_literal_generator(p: &SpinBosonParams, phase: KernelPhase, picture: Picture, t: f64) -> Result<Superoperator> {
    let k = tcl_rate(p, phase, t);
    let sp = qubit::sigma_plus();
    let sm = qubit::sigma_minus();
    let pe = qubit::excited();
    let id = ComplexMatrix::identity(2);
    let mut g = superop_sandwich(&sm, &sp)?.scale(k + k.conj());
    g.axpy(-k, &superop_sandwich(&pe, &id)?);
    g.axpy(-k.conj(), &superop_sandwich(&id, &pe)?);
    if picture == Picture::Schroedinger {
        g = &g + &Superoperator::hamiltonian(&p.hamiltonian())?;
    }
    Ok(g)
}

/// The literal TCL equation in the interaction picture with the resolved
/// kernel phase.
pub fn tcl_literal(p: &SpinBosonParams, rho0: &DensityMatrix, grid: &[f64]) -> Result<TimeSeries> {
    tcl_literal_with(p, rho0, grid, KernelPhase::Resolved, Picture::Interaction)
}

pub fn tcl_literal_with(
    p: &SpinBosonParams,
    rho0: &DensityMatrix,
    grid: &[f64],
    phase: KernelPhase,
    picture: Picture,
) -> Result<TimeSeries> {
    require_qubit(rho0)?;
    let raw = propagate_raw(|t| tcl_literal_generator(p, phase, picture, t), rho0.matrix(), grid)?;
    Ok(TimeSeries::from_solver(grid.to_vec(), raw, picture, "tcl_literal")?.with_meta("kernel_phase", phase.as_str()))
}

#[cfg(test)]
mod tests {
    use super::super::amplitude::SignVariant;
    use super::*;
    use crate::numeric::density::uniform_grid;
    use crate::open_system::tcl2_solve;

    fn mixed() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::new(2, 2, vec![
            C64::new(0.6, 0.0), C64::new(0.2, -0.3),
            C64::new(0.2, 0.3), C64::new(0.4, 0.0),
        ]).unwrap()).unwrap()
    }

    fn max_diff(a: &TimeSeries, b: &TimeSeries) -> f64 {
        a.states.iter().zip(&b.states).map(|(x, y)| x.matrix().max_abs_diff(y.matrix())).fold(0.0, f64::max)
    }

    #[test]
    fn ground_state_is_stationary() {
        let p = SpinBosonParams::new(10.0, 1.0, 1.0).unwrap();
        let a = AmplitudeFunction::new(p, SignVariant::Plus);
        let g = DensityMatrix::basis(2, 1);
        let grid = uniform_grid(5.0, 0.5);
        let ts = exact_map(&a, &g, &grid).unwrap();
        for s in &ts.states {
            assert!(s.matrix().max_abs_diff(g.matrix()) < 1e-15);
        }
    }

    #[test]
    fn excited_population_is_u_squared() {
        let p = SpinBosonParams::new(10.0, 5.0, 1.0).unwrap();
        let a = AmplitudeFunction::new(p, SignVariant::Plus);
        let grid = uniform_grid(3.0, 0.25);
        let ts = exact_map(&a, &DensityMatrix::basis(2, 0), &grid).unwrap();
        for (t, s) in grid.iter().zip(&ts.states) {
            assert!((s.matrix()[(0, 0)].re - a.u(*t).norm_sqr()).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_and_qme_agree() {
        for (alpha, t_max) in [(5.0, 10.0), (1.0, 4.0)] {
            let p = SpinBosonParams::new(10.0, alpha, 1.0).unwrap();
            let a = AmplitudeFunction::new(p, SignVariant::Plus);
            let grid = uniform_grid(t_max, 1e-3);
            for picture in [Picture::Interaction, Picture::Schroedinger] {
                let map = exact_map_in(&a, &mixed(), &grid, picture).unwrap();
                let qme = exact_qme_solve(&a, &mixed(), &grid, picture).unwrap();
                let e = max_diff(&map, &qme);
                assert!(e < 1e-8, "alpha {alpha} {picture:?}: {e:e}");
            }
        }
    }

    #[test]
    fn qme_reports_singularity() {
        // α = λ² has u = 0 at t = 3π/2
        let p = SpinBosonParams::new(10.0, 1.0, 1.0).unwrap();
        let a = AmplitudeFunction::new(p, SignVariant::Plus);
        assert!(a.u(1.5 * std::f64::consts::PI).norm() < 1e-12);
        let grid = uniform_grid(5.0, std::f64::consts::PI / 400.0);
        let r = exact_qme_solve(&a, &mixed(), &grid, Picture::Interaction);
        assert!(matches!(r, Err(Error::SingularGenerator { .. }) | Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn schroedinger_series_is_rotated_interaction_series() {
        let p = SpinBosonParams::new(10.0, 5.0, 1.0).unwrap();
        let a = AmplitudeFunction::new(p, SignVariant::Plus);
        let grid = uniform_grid(2.0, 0.1);
        let ip = exact_map(&a, &mixed(), &grid).unwrap();
        let sp = exact_map_in(&a, &mixed(), &grid, Picture::Schroedinger).unwrap();
        let rotated = ip.to_schroedinger(&p.hamiltonian()).unwrap();
        assert!(max_diff(&rotated, &sp) < 1e-12);
    }

    #[test]
    fn tcl_rate_limit_is_markovian() {
        let p = SpinBosonParams::new(10.0, 5.0, 1.0).unwrap();
        let k = tcl_rate(&p, KernelPhase::Resolved, 50.0);
        assert!((2.0 * k.re - 1.0).abs() < 1e-12);
        assert!(k.im.abs() < 1e-12);
        assert_eq!(tcl_rate(&p, KernelPhase::Resolved, 0.0).norm(), 0.0);
    }

    #[test]
    fn tcl_literal_matches_generic_tcl2() {
        for alpha in [1.0, 5.0] {
            let p = SpinBosonParams::new(10.0, alpha, 1.0).unwrap();
            let grid = uniform_grid(10.0, 1e-2);
            let lit = tcl_literal(&p, &mixed(), &grid).unwrap();
            let gen = tcl2_solve(&p.open_system().unwrap(), &mixed(), &grid).unwrap();
            let e = max_diff(&lit, &gen);
            assert!(e < 1e-8, "alpha {alpha}: {e:e}");
        }
    }

    #[test]
    fn printed_phase_differs_from_generic_tcl2() {
        let p = SpinBosonParams::new(10.0, 5.0, 1.0).unwrap();
        let grid = uniform_grid(5.0, 1e-2);
        let lit = tcl_literal_with(&p, &mixed(), &grid, KernelPhase::AsPrinted, Picture::Interaction).unwrap();
        let gen = tcl2_solve(&p.open_system().unwrap(), &mixed(), &grid).unwrap();
        assert!(max_diff(&lit, &gen) > 1e-2);
    }

    #[test]
    fn tcl_literal_without_coupling() {
        let p = SpinBosonParams::new(3.0, 5.0, 1e-9).unwrap();
        let grid = uniform_grid(2.0, 1e-3);
        let ip = tcl_literal(&p, &mixed(), &grid).unwrap();
        for s in &ip.states {
            assert!(s.matrix().max_abs_diff(mixed().matrix()) < 1e-12);
        }
        let sp = tcl_literal_with(&p, &mixed(), &grid, KernelPhase::Resolved, Picture::Schroedinger).unwrap();
        for (t, s) in grid.iter().zip(&sp.states) {
            let expect = mixed().matrix()[(0, 1)] * C64::from_polar(1.0, -3.0 * t);
            assert!((s.matrix()[(0, 1)] - expect).norm() < 1e-9);
        }
    }
}
