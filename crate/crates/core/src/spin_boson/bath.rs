//! Finite discretized boson bath used as a brute-force reference.
//!
//! The coupling conserves excitation number, so |+, vac⟩ only mixes with the
//! one-phonon states |−, 1_k⟩. The single-excitation Hamiltonian is an
//! arrowhead matrix whose eigenvalues are the roots of
//!
//!   F(z) = z − Δ − Σ_k |g_k|² / (z − ω_k),
//!
//! one between each pair of adjacent mode frequencies and one beyond each
//! end. The excited-state amplitude is u_N(t) = Σ_n e^{−iz_n t} / F'(z_n).

use crate::error::{Error, Result};
use crate::numeric::density::{linspace, validate_grid, DensityMatrix, Picture, TimeSeries};
use crate::numeric::matrix::C64;

use super::amplitude::{f_kernel, SpinBosonParams};
use super::dynamics::{damping_series, require_qubit};

/// Default half-width of the frequency window, in units of α.
pub const DEFAULT_WINDOW_HALF_WIDTH: f64 = 80.0;
/// Allowed kernel reproduction error, relative to λ²f(0).
pub const KERNEL_REPRODUCTION_TOL: f64 = 1e-2;
const KERNEL_CHECK_POINTS: usize = 401;
const MAX_ROOT_ITERATIONS: usize = 200;

/// Δ ± 80α
pub fn default_window(p: &SpinBosonParams) -> (f64, f64) {
    let w = DEFAULT_WINDOW_HALF_WIDTH * p.alpha;
    (p.delta - w, p.delta + w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath {
    pub params: SpinBosonParams,
    pub n: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    /// (ω_k, |g_k|²) with λ² folded into the weight.
    pub modes: Vec<(f64, f64)>,
}

impl DiscretizedBath {
    /// Builds the bath without checking the kernel.
    pub fn unchecked(p: &SpinBosonParams, n: usize, window: (f64, f64)) -> Result<Self> {
        let (omega_min, omega_max) = window;
        if n == 0 {
            return Err(Error::InvalidArgument("bath needs at least one mode".into()));
        }
        if !(omega_min.is_finite() && omega_max.is_finite() && omega_max > omega_min) {
            return Err(Error::InvalidArgument(format!("invalid frequency window ({omega_min}, {omega_max})")));
        }
        let h = (omega_max - omega_min) / n as f64;
        let a = p.alpha;
        let norm = p.lambda2() * a * a / (2.0 * std::f64::consts::PI);
        let modes = (0..n)
            .map(|k| {
                let w = omega_min + (k as f64 + 0.5) * h;
                (w, norm / ((w - p.delta).powi(2) + a * a) * h)
            })
            .collect();
        Ok(Self { params: *p, n, omega_min, omega_max, modes })
    }

    /// Builds the bath and verifies that Σ|g_k|²e^{−iω_k t} reproduces
    /// λ²f(t) on [0, t_check].
    pub fn new(p: &SpinBosonParams, n: usize, window: (f64, f64), t_check: f64) -> Result<Self> {
        let bath = Self::unchecked(p, n, window)?;
        let error = bath.kernel_reproduction_error(t_check);
        if !(error <= KERNEL_REPRODUCTION_TOL) {
            return Err(Error::WindowTooNarrow { error, tol: KERNEL_REPRODUCTION_TOL });
        }
        Ok(bath)
    }

    pub fn spacing(&self) -> f64 {
        (self.omega_max - self.omega_min) / self.n as f64
    }

    /// Σ_k |g_k|² e^{−iω_k t}
    pub fn kernel(&self, t: f64) -> C64 {
        self.modes.iter().map(|&(w, g2)| g2 * C64::from_polar(1.0, -w * t)).sum()
    }

    /// max_t |Σ|g_k|²e^{−iω_k t} − λ²f(t)| / (λ²f(0)) on [0, t_check].
    pub fn kernel_reproduction_error(&self, t_check: f64) -> f64 {
        let l2 = self.params.lambda2();
        let scale = l2 * f_kernel(&self.params, 0.0).norm();
        linspace(t_check.max(0.0), KERNEL_CHECK_POINTS)
            .iter()
            .map(|&t| (self.kernel(t) - l2 * f_kernel(&self.params, t)).norm() / scale)
            .fold(0.0, f64::max)
    }

    /// F(z) and F'(z) given the offsets z − ω_k.
    fn secular(&self, z: f64, offset: impl Fn(usize) -> f64) -> (f64, f64) {
        let mut f = z - self.params.delta;
        let mut fp = 1.0;
        for (k, &(_, g2)) in self.modes.iter().enumerate() {
            let x = offset(k);
            f -= g2 / x;
            fp += g2 / (x * x);
        }
        (f, fp)
    }

    /// Eigenvalues z_n of the single-excitation Hamiltonian and the weights
    /// |⟨+,vac|n⟩|² = 1/F'(z_n), in ascending order of z.
    pub fn spectrum(&self) -> Result<Vec<(f64, f64)>> {
        let h = self.spacing();
        let m = self.n;
        let omega = |k: usize| self.modes[k].0;
        let mut out = Vec::with_capacity(m + 1);

        // below ω_0: z = ω_0 − δ, F decreasing in δ
        let below = |d: f64| {
            let z = omega(0) - d;
            let (f, fp) = self.secular(z, |j| -d - j as f64 * h);
            (z, -f, fp, fp)
        };
        let hi = expand_bracket(h, |d| below(d).1)?;
        out.push(root_in(0.0, hi, below)?);

        for k in 0..m.saturating_sub(1) {
            let inner = |d: f64| {
                let z = omega(k) + d;
                let (f, fp) = self.secular(z, |j| (k as f64 - j as f64) * h + d);
                (z, f, fp, fp)
            };
            out.push(root_in(0.0, h, inner)?);
        }

        // above ω_{N−1}: z = ω_{N−1} + δ, F increasing in δ
        let above = |d: f64| {
            let z = omega(m - 1) + d;
            let (f, fp) = self.secular(z, |j| ((m - 1) as f64 - j as f64) * h + d);
            (z, f, fp, fp)
        };
        let hi = expand_bracket(h, |d| above(d).1)?;
        out.push(root_in(0.0, hi, above)?);
        Ok(out)
    }

    /// u_N(t) on the grid, in the Schrödinger picture.
    pub fn amplitude(&self, grid: &[f64]) -> Result<Vec<C64>> {
        let roots = self.spectrum()?;
        Ok(grid
            .iter()
            .map(|&t| roots.iter().map(|&(z, w)| w * C64::from_polar(1.0, -z * t)).sum())
            .collect())
    }
}

/// Doubles δ until g(δ) > 0, starting from `start`.
fn expand_bracket(start: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let mut d = start;
    for _ in 0..200 {
        if g(d) > 0.0 {
            return Ok(d);
        }
        d *= 2.0;
    }
    Err(Error::NoConvergence { iterations: 200 })
}

/// Root of an increasing function g on (lo, hi) by safeguarded Newton.
/// `eval` returns (z, g, g', F'(z)).
fn root_in(mut lo: f64, mut hi: f64, eval: impl Fn(f64) -> (f64, f64, f64, f64)) -> Result<(f64, f64)> {
    let mut d = 0.5 * (lo + hi);
    for _ in 0..MAX_ROOT_ITERATIONS {
        let (z, g, gp, fp) = eval(d);
        if g == 0.0 {
            return Ok((z, 1.0 / fp));
        }
        if g < 0.0 {
            lo = d;
        } else {
            hi = d;
        }
        let mut next = d - g / gp;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - d).abs() <= 1e-15 * d.abs().max(f64::MIN_POSITIVE) || hi - lo <= 1e-15 * hi {
            let (z, _, _, fp) = eval(next);
            return Ok((z, 1.0 / fp));
        }
        d = next;
    }
    Err(Error::NoConvergence { iterations: MAX_ROOT_ITERATIONS })
}

/// Reduced state from the discretized bath, interaction picture. `window`
/// defaults to Δ ± 80α; the kernel is checked on the span of `grid`.
pub fn discretized_bath_oracle(
    p: &SpinBosonParams,
    n: usize,
    window: Option<(f64, f64)>,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> Result<TimeSeries> {
    require_qubit(rho0)?;
    validate_grid(grid)?;
    let window = window.unwrap_or_else(|| default_window(p));
    let bath = DiscretizedBath::new(p, n, window, *grid.last().unwrap())?;
    let u = bath.amplitude(grid)?;
    let v: Vec<C64> = grid.iter().zip(&u).map(|(&t, u)| C64::from_polar(1.0, p.delta * t) * u).collect();
    Ok(damping_series(&v, rho0, grid, Picture::Interaction, "bath")?
        .with_meta("bath_modes", n.to_string())
        .with_meta("bath_window", format!("{:.6e},{:.6e}", window.0, window.1)))
}

#[cfg(test)]
mod tests {
    use super::super::amplitude::{amplitude_oracle, AmplitudeFunction, SignVariant};
    use super::*;
    use crate::numeric::density::uniform_grid;
    use crate::numeric::linalg::{herm_eig, HERMITIAN_TOL};
    use crate::numeric::matrix::ComplexMatrix;

    fn params(alpha: f64) -> SpinBosonParams {
        SpinBosonParams::new(10.0, alpha, 1.0).unwrap()
    }

    #[test]
    fn spectrum_matches_dense_diagonalization() {
        let p = params(1.0);
        let bath = DiscretizedBath::unchecked(&p, 40, (-30.0, 50.0)).unwrap();
        let roots = bath.spectrum().unwrap();
        let n = bath.n + 1;
        let h = ComplexMatrix::from_fn(n, n, |i, j| match (i, j) {
            (0, 0) => C64::new(p.delta, 0.0),
            (0, k) | (k, 0) => C64::new(bath.modes[k - 1].1.sqrt(), 0.0),
            (a, b) if a == b => C64::new(bath.modes[a - 1].0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let eig = herm_eig(&h, HERMITIAN_TOL).unwrap();
        assert_eq!(roots.len(), n);
        for (k, &(z, w)) in roots.iter().enumerate() {
            assert!((z - eig.values[k]).abs() < 1e-9, "root {k}: {z} vs {}", eig.values[k]);
            assert!((w - eig.vectors[(0, k)].norm_sqr()).abs() < 1e-9);
        }
    }

    #[test]
    fn sum_rules() {
        let p = params(5.0);
        let bath = DiscretizedBath::unchecked(&p, 2000, default_window(&p)).unwrap();
        let roots = bath.spectrum().unwrap();
        let w: f64 = roots.iter().map(|s| s.1).sum();
        let first: f64 = roots.iter().map(|s| s.0 * s.1).sum();
        assert!((w - 1.0).abs() < 1e-10);
        assert!((first - p.delta).abs() < 1e-8);
    }

    #[test]
    fn default_window_reproduces_kernel() {
        let p = params(5.0);
        let bath = DiscretizedBath::new(&p, 2000, default_window(&p), 10.0).unwrap();
        assert!(bath.kernel_reproduction_error(10.0) < KERNEL_REPRODUCTION_TOL);
    }

    #[test]
    fn forty_alpha_window_is_rejected() {
        let p = params(5.0);
        let w = (p.delta - 40.0 * p.alpha, p.delta + 40.0 * p.alpha);
        match DiscretizedBath::new(&p, 2000, w, 10.0) {
            Err(Error::WindowTooNarrow { error, .. }) => assert!(error > 0.015 && error < 0.017),
            other => panic!("expected WindowTooNarrow, got {other:?}"),
        }
    }

    #[test]
    fn weak_coupling_gives_free_evolution() {
        let p = SpinBosonParams::new(10.0, 1.0, 1e-6).unwrap();
        let bath = DiscretizedBath::new(&p, 500, default_window(&p), 5.0).unwrap();
        let grid = uniform_grid(5.0, 0.5);
        for (t, u) in grid.iter().zip(bath.amplitude(&grid).unwrap()) {
            assert!((u - C64::from_polar(1.0, -10.0 * t)).norm() < 1e-9);
        }
    }

    #[test]
    fn bath_agrees_with_volterra_oracle() {
        for alpha in [1.0, 5.0] {
            let p = params(alpha);
            let grid = uniform_grid(10.0, 1e-2);
            let bath = DiscretizedBath::new(&p, 2000, default_window(&p), 10.0).unwrap();
            let ub = bath.amplitude(&grid).unwrap();
            let uv = amplitude_oracle(&p, &grid).unwrap();
            let e = ub.iter().zip(&uv).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(e < 1e-3, "alpha {alpha}: {e:e}");
        }
    }

    #[test]
    fn recurrence_time_grows_with_mode_count() {
        let p = params(1.0);
        let exact = AmplitudeFunction::new(p, SignVariant::Plus);
        let window = default_window(&p);
        let small = DiscretizedBath::unchecked(&p, 200, window).unwrap();
        let t_rec = 2.0 * std::f64::consts::PI / small.spacing();
        let large = DiscretizedBath::unchecked(&p, 400, window).unwrap();
        let t = [1.2 * t_rec];
        let e_small = (small.amplitude(&t).unwrap()[0] - exact.u(t[0])).norm();
        let e_large = (large.amplitude(&t).unwrap()[0] - exact.u(t[0])).norm();
        assert!(e_small > 0.05, "{e_small}");
        assert!(e_large < 1e-2, "{e_large}");
    }
}
