//! Fixed-step classical RK4.

use crate::error::{Error, Result};

use super::density::{validate_grid, DensityMatrix, Picture, TimeSeries};
use super::matrix::{ComplexMatrix, C64};
use super::superop::{devec_square, vec, Superoperator};

/// Integrates ẏ = f(t, y) over `grid` with one RK4 step per interval.
/// Returns the state at every grid point, starting with `y0`.
pub fn rk4<F>(mut f: F, y0: &[C64], grid: &[f64]) -> Result<Vec<Vec<C64>>>
where
    F: FnMut(f64, &[C64]) -> Result<Vec<C64>>,
{
    validate_grid(grid)?;
    let n = y0.len();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0.to_vec());
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let y = out.last().unwrap();
        let k1 = f(t, y)?;
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h / 2.0);
        }
        let k2 = f(t + h / 2.0, &tmp)?;
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (h / 2.0);
        }
        let k3 = f(t + h / 2.0, &tmp)?;
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        let k4 = f(t + h, &tmp)?;
        let next: Vec<C64> = (0..n)
            .map(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
            .collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteState { t: w[1] });
        }
        out.push(next);
    }
    Ok(out)
}

/// Propagates ρ̇ = 𝓛(t)ρ with RK4, returning raw (unvalidated) matrices.
pub fn propagate_raw<G>(mut generator: G, rho0: &ComplexMatrix, grid: &[f64]) -> Result<Vec<ComplexMatrix>>
where
    G: FnMut(f64) -> Result<Superoperator>,
{
    let d = rho0.require_square()?;
    let ys = rk4(
        |t, y| {
            let g = generator(t)?;
            if g.dim() != d {
                return Err(Error::DimMismatch(format!("generator dim {} for state dim {d}", g.dim())));
            }
            Ok(g.apply_vec(y))
        },
        &vec(rho0),
        grid,
    )?;
    Ok(ys.iter().map(|y| devec_square(y, d)).collect())
}

/// RK4 propagation of a density matrix under a time-dependent generator.
pub fn ode_propagate<G>(generator: G, rho0: &DensityMatrix, grid: &[f64]) -> Result<TimeSeries>
where
    G: FnMut(f64) -> Result<Superoperator>,
{
    let raw = propagate_raw(generator, rho0.matrix(), grid)?;
    TimeSeries::from_solver(grid.to_vec(), raw, Picture::Interaction, "ode")
}
