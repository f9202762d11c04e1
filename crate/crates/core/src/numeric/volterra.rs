//! Volterra integro-differential equations
//!
//!   ẏ(t) = A y(t) − ∫₀ᵗ K(t, s) y(s) ds
//!
//! on a uniform grid. Each step is classical RK4 in which the memory integral
//! is split at the last grid point: the settled history uses composite
//! Simpson (3/8 rule on the final three panels when the panel count is odd),
//! and the sliver inside the current step uses Simpson with its midpoint
//! value taken from a quadratic through the two last grid values and the
//! stage value.

use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C64, ZERO};

/// Relative tolerance for the uniform-grid check.
pub const UNIFORM_GRID_TOL: f64 = 1e-9;

pub trait MemoryKernel {
    /// Length of the state vector.
    fn dim(&self) -> usize;
    /// out += w · K(t, s) · u
    fn accumulate(&self, t: f64, s: f64, w: f64, u: &[C64], out: &mut [C64]);
}

/// Scalar kernel from a closure.
pub struct FnKernel<F>(pub F);

impl<F: Fn(f64, f64) -> C64> MemoryKernel for FnKernel<F> {
    fn dim(&self) -> usize {
        1
    }

    fn accumulate(&self, t: f64, s: f64, w: f64, u: &[C64], out: &mut [C64]) {
        out[0] += (self.0)(t, s) * u[0] * w;
    }
}

/// Scalar convolution kernel K(t, s) = f(t − s) tabulated at quarter steps,
/// which covers every lag the stepper asks for.
pub struct ConvolutionTable {
    quarter: f64,
    values: Vec<C64>,
}

impl ConvolutionTable {
    pub fn new(f: impl Fn(f64) -> C64, grid: &[f64]) -> Result<Self> {
        let h = uniform_step(grid)?;
        let steps = grid.len().saturating_sub(1);
        let quarter = h / 4.0;
        let values = (0..=4 * steps + 4).map(|j| f(j as f64 * quarter)).collect();
        Ok(Self { quarter, values })
    }
}

impl MemoryKernel for ConvolutionTable {
    fn dim(&self) -> usize {
        1
    }

    fn accumulate(&self, t: f64, s: f64, w: f64, u: &[C64], out: &mut [C64]) {
        let idx = ((t - s) / self.quarter).round() as usize;
        out[0] += self.values[idx] * u[0] * w;
    }
}

/// Matrix-valued kernel from a closure returning K(t, s).
pub struct MatrixKernel<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(f64, f64) -> ComplexMatrix> MemoryKernel for MatrixKernel<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn accumulate(&self, t: f64, s: f64, w: f64, u: &[C64], out: &mut [C64]) {
        let k = (self.f)(t, s);
        for (o, v) in out.iter_mut().zip(k.mul_vec(u)) {
            *o += v * w;
        }
    }
}

/// Returns the step of a uniform grid, or NonUniformGrid.
pub fn uniform_step(grid: &[f64]) -> Result<f64> {
    super::density::validate_grid(grid)?;
    if grid.len() < 2 {
        return Ok(1.0);
    }
    let h = grid[1] - grid[0];
    for (k, w) in grid.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > UNIFORM_GRID_TOL * h {
            return Err(Error::NonUniformGrid { index: k + 1, expected: h });
        }
    }
    Ok(h)
}

/// Composite quadrature weight of node k among nodes 0..=n (spacing h).
fn history_weight(k: usize, n: usize, h: f64) -> f64 {
    match n {
        0 => 0.0,
        1 => h / 2.0,
        _ if n.is_multiple_of(2) => simpson_weight(k, n, h),
        3 => [3.0, 9.0, 9.0, 3.0][k] * h / 8.0,
        _ => {
            let m = n - 3;
            let mut w = if k <= m { simpson_weight(k, m, h) } else { 0.0 };
            if k >= m {
                w += [3.0, 9.0, 9.0, 3.0][k - m] * h / 8.0;
            }
            w
        }
    }
}

fn simpson_weight(k: usize, n: usize, h: f64) -> f64 {
    if k == 0 || k == n {
        h / 3.0
    } else if k % 2 == 1 {
        4.0 * h / 3.0
    } else {
        2.0 * h / 3.0
    }
}

/// Solves the vector equation ẏ = A y − ∫₀ᵗ K(t,s) y(s) ds.
pub fn volterra_system<K: MemoryKernel>(
    drift: &ComplexMatrix,
    kernel: &K,
    y0: &[C64],
    grid: &[f64],
) -> Result<Vec<Vec<C64>>> {
    let h = uniform_step(grid)?;
    let d = y0.len();
    if drift.shape() != (d, d) || kernel.dim() != d {
        return Err(Error::DimMismatch(format!(
            "state length {d}, drift {}x{}, kernel dim {}",
            drift.rows(),
            drift.cols(),
            kernel.dim()
        )));
    }
    let steps = grid.len() - 1;
    let mut ys: Vec<Vec<C64>> = Vec::with_capacity(grid.len());
    ys.push(y0.to_vec());

    let history = |ys: &[Vec<C64>], n: usize, tau: f64| -> Vec<C64> {
        let mut acc = vec![ZERO; d];
        for (k, y) in ys.iter().enumerate().take(n + 1) {
            let w = history_weight(k, n, h);
            if w != 0.0 {
                kernel.accumulate(tau, grid[k], w, y, &mut acc);
            }
        }
        acc
    };

    for n in 0..steps {
        let tn = grid[n];
        let yn = ys[n].clone();
        let prev = if n > 0 { Some(ys[n - 1].clone()) } else { None };

        // ∫_{t_n}^{t_n+L} K(t_n+L, s) y(s) ds with y(t_n+L) = stage
        let partial = |len: f64, stage: &[C64]| -> Vec<C64> {
            let tau = tn + len;
            let mid: Vec<C64> = match &prev {
                Some(p) => {
                    let l0 = -len * len / (4.0 * h * (h + len));
                    let l1 = (len / 2.0 + h) / (2.0 * h);
                    let l2 = (len / 2.0 + h) / (2.0 * (len + h));
                    (0..d).map(|i| p[i] * l0 + yn[i] * l1 + stage[i] * l2).collect()
                }
                None => (0..d).map(|i| (yn[i] + stage[i]) * 0.5).collect(),
            };
            let mut acc = vec![ZERO; d];
            kernel.accumulate(tau, tn, len / 6.0, &yn, &mut acc);
            kernel.accumulate(tau, tn + len / 2.0, 4.0 * len / 6.0, &mid, &mut acc);
            kernel.accumulate(tau, tau, len / 6.0, stage, &mut acc);
            acc
        };
        let rhs = |y: &[C64], hist: &[C64], part: Option<&[C64]>| -> Vec<C64> {
            let mut r = drift.mul_vec(y);
            for i in 0..d {
                r[i] -= hist[i];
                if let Some(p) = part {
                    r[i] -= p[i];
                }
            }
            r
        };

        let h0 = history(&ys, n, tn);
        let h_mid = history(&ys, n, tn + h / 2.0);
        let h_end = history(&ys, n, tn + h);

        let k1 = rhs(&yn, &h0, None);
        let s2: Vec<C64> = (0..d).map(|i| yn[i] + k1[i] * (h / 2.0)).collect();
        let k2 = rhs(&s2, &h_mid, Some(&partial(h / 2.0, &s2)));
        let s3: Vec<C64> = (0..d).map(|i| yn[i] + k2[i] * (h / 2.0)).collect();
        let k3 = rhs(&s3, &h_mid, Some(&partial(h / 2.0, &s3)));
        let s4: Vec<C64> = (0..d).map(|i| yn[i] + k3[i] * h).collect();
        let k4 = rhs(&s4, &h_end, Some(&partial(h, &s4)));

        let next: Vec<C64> = (0..d)
            .map(|i| yn[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
            .collect();
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteState { t: grid[n + 1] });
        }
        ys.push(next);
    }
    Ok(ys)
}

/// Scalar equation u̇ = a u − ∫₀ᵗ K(t,s) u(s) ds with a general kernel.
pub fn volterra_solve(a: C64, kernel: impl Fn(f64, f64) -> C64, u0: C64, grid: &[f64]) -> Result<Vec<C64>> {
    volterra_solve_with(a, &FnKernel(kernel), u0, grid)
}

/// Scalar equation with any [`MemoryKernel`] of dimension one.
pub fn volterra_solve_with<K: MemoryKernel>(a: C64, kernel: &K, u0: C64, grid: &[f64]) -> Result<Vec<C64>> {
    let drift = ComplexMatrix::diagonal(&[a]);
    Ok(volterra_system(&drift, kernel, &[u0], grid)?.into_iter().map(|y| y[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::super::density::uniform_grid;
    use super::super::matrix::{I, ONE};
    use super::*;

    #[test]
    fn quadrature_weights_integrate_cubics() {
        for n in 1..9 {
            let h = 0.1;
            let total: f64 = (0..=n).map(|k| history_weight(k, n, h)).sum();
            assert!((total - n as f64 * h).abs() < 1e-14);
            if n >= 2 {
                let t3: f64 = (0..=n).map(|k| history_weight(k, n, h) * (k as f64 * h).powi(3)).sum();
                let exact = (n as f64 * h).powi(4) / 4.0;
                assert!((t3 - exact).abs() < 1e-13, "n = {n}");
            }
        }
    }

    #[test]
    fn no_memory_reduces_to_decay() {
        let grid = uniform_grid(1.0, 1e-3);
        let u = volterra_solve(-ONE, |_, _| ZERO, ONE, &grid).unwrap();
        assert!((u.last().unwrap() - (-1.0_f64).exp()).norm() < 1e-6);
    }

    #[test]
    fn constant_kernel_gives_cosine() {
        let c = 2.0;
        let grid = uniform_grid(5.0, 1e-3);
        let u = volterra_solve(ZERO, |_, _| C64::new(c, 0.0), ONE, &grid).unwrap();
        for (t, v) in grid.iter().zip(&u) {
            assert!((v - (c.sqrt() * t).cos()).norm() < 1e-5);
        }
    }

    /// Residue sum for u̇ = a u − g ∫ e^{−κ(t−s)} u(s) ds, u(0) = 1.
    fn two_pole(a: C64, g: C64, kappa: C64, t: f64) -> C64 {
        let b = kappa - a;
        let c = g - a * kappa;
        let disc = (b * b - 4.0 * c).sqrt();
        let r1 = (-b + disc) / 2.0;
        let r2 = (-b - disc) / 2.0;
        (r1 + kappa) / (r1 - r2) * (r1 * t).exp() + (r2 + kappa) / (r2 - r1) * (r2 * t).exp()
    }

    #[test]
    fn exponential_kernel_matches_laplace_solution() {
        let a = -I * 3.0;
        let g = C64::new(1.5, 0.3);
        let kappa = C64::new(2.0, 1.0);
        let grid = uniform_grid(6.0, 1e-3);
        let u = volterra_solve(a, |t, s| g * (-kappa * (t - s)).exp(), ONE, &grid).unwrap();
        let err = grid.iter().zip(&u).map(|(t, v)| (v - two_pole(a, g, kappa, *t)).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "err {err}");
    }

    #[test]
    fn table_kernel_matches_closure_kernel() {
        let f = |x: f64| C64::new(0.5, 0.0) * (-C64::new(1.0, 4.0) * x).exp();
        let grid = uniform_grid(2.0, 0.01);
        let table = ConvolutionTable::new(f, &grid).unwrap();
        let a = volterra_solve_with(-I, &table, ONE, &grid).unwrap();
        let b = volterra_solve(-I, |t, s| f(t - s), ONE, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn converges_at_least_second_order() {
        let a = -I;
        let g = C64::new(2.0, 0.0);
        let kappa = C64::new(1.0, 0.0);
        let err = |dt: f64| {
            let grid = uniform_grid(4.0, dt);
            let u = volterra_solve(a, |t, s| g * (-kappa * (t - s)).exp(), ONE, &grid).unwrap();
            grid.iter().zip(&u).map(|(t, v)| (v - two_pole(a, g, kappa, *t)).norm()).fold(0.0, f64::max)
        };
        let ratio = err(0.04) / err(0.02);
        assert!(ratio > 4.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_non_uniform_grid() {
        let grid = [0.0, 0.1, 0.25, 0.3];
        assert!(matches!(
            volterra_solve(ONE, |_, _| ZERO, ONE, &grid),
            Err(Error::NonUniformGrid { index: 2, .. })
        ));
    }

    #[test]
    fn matrix_kernel_decouples_diagonal_case() {
        let grid = uniform_grid(3.0, 0.01);
        let drift = ComplexMatrix::diagonal(&[-ONE, -I]);
        let kernel = MatrixKernel {
            dim: 2,
            f: |_t: f64, _s: f64| ComplexMatrix::real_diagonal(&[2.0, 0.5]),
        };
        let ys = volterra_system(&drift, &kernel, &[ONE, ONE], &grid).unwrap();
        let u1 = volterra_solve(-ONE, |_, _| C64::new(2.0, 0.0), ONE, &grid).unwrap();
        let u2 = volterra_solve(-I, |_, _| C64::new(0.5, 0.0), ONE, &grid).unwrap();
        for k in 0..grid.len() {
            assert!((ys[k][0] - u1[k]).norm() < 1e-14);
            assert!((ys[k][1] - u2[k]).norm() < 1e-14);
        }
    }
}
