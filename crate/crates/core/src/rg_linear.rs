//! First-order RG for ẋ = Fx + εGx, and the weakly damped oscillator
//! ẍ + εẋ + x = 0 as a worked example.
//!
//! In the eigenbasis of F, the part of G coupling eigenvalues λᵢ = λⱼ
//! produces secular growth; it is resummed into the slow flow ẏ = εPy. The
//! remaining entries integrate to a bounded primitive W(t) with zero time
//! average.

use crate::error::{Error, Result};
use crate::numeric::linalg::{self, eig_group_tol};
use crate::numeric::matrix::{ComplexMatrix, C64, ZERO};

/// Largest accepted condition number of F's eigenvector matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct LinearPerturbedSystem {
    pub f: ComplexMatrix,
    pub g: ComplexMatrix,
    pub epsilon: f64,
}

impl LinearPerturbedSystem {
    pub fn new(f: ComplexMatrix, g: ComplexMatrix, epsilon: f64) -> Result<Self> {
        let n = f.require_square()?;
        if g.shape() != (n, n) {
            return Err(Error::DimMismatch(format!("F is {n}x{n} but G is {}x{}", g.rows(), g.cols())));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        Ok(Self { f, g, epsilon })
    }

    pub fn dim(&self) -> usize {
        self.f.rows()
    }
}

/// Eigendecomposition F = V Λ V⁻¹ with a conditioning check.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub values: Vec<C64>,
    pub v: ComplexMatrix,
    pub v_inv: ComplexMatrix,
}

impl EigenBasis {
    pub fn new(f: &ComplexMatrix) -> Result<Self> {
        let e = linalg::eig(f)?;
        let condition = linalg::condition_number(&e.vectors);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::NotDiagonalizable { condition });
        }
        let v_inv = linalg::inverse(&e.vectors)?;
        Ok(Self { values: e.values, v: e.vectors, v_inv })
    }

    pub fn to_eigen(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.v_inv * m) * &self.v
    }

    pub fn from_eigen(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &(&self.v * m) * &self.v_inv
    }

    /// e^{Ft} = V e^{Λt} V⁻¹
    pub fn exp(&self, t: f64) -> ComplexMatrix {
        let d: Vec<C64> = self.values.iter().map(|l| (l * t).exp()).collect();
        self.from_eigen(&ComplexMatrix::diagonal(&d))
    }

    /// Whether λᵢ and λⱼ count as resonant.
    pub fn resonant(&self, i: usize, j: usize) -> bool {
        let scale = self.values.iter().fold(0.0_f64, |m, l| m.max(l.norm()));
        (self.values[i] - self.values[j]).norm() <= eig_group_tol(scale)
    }
}

/// Secular/bounded split of εG relative to F.
#[derive(Debug, Clone)]
pub struct RgDecomposition {
    pub basis: EigenBasis,
    /// εP in the original basis.
    pub secular_generator: ComplexMatrix,
    g_hat: ComplexMatrix,
    epsilon: f64,
}

impl RgDecomposition {
    pub fn new(sys: &LinearPerturbedSystem) -> Result<Self> {
        let basis = EigenBasis::new(&sys.f)?;
        let g_hat = basis.to_eigen(&sys.g);
        let n = sys.dim();
        let p_hat = ComplexMatrix::from_fn(n, n, |i, j| if basis.resonant(i, j) { g_hat[(i, j)] } else { ZERO });
        let secular_generator = basis.from_eigen(&p_hat).scale_real(sys.epsilon);
        Ok(Self { basis, secular_generator, g_hat, epsilon: sys.epsilon })
    }

    /// W(t): primitive of e^{−Ft}Ge^{Ft} − P with no resonant component
    /// (without the ε factor).
    pub fn bounded_primitive(&self, t: f64) -> ComplexMatrix {
        let n = self.g_hat.rows();
        let l = &self.basis.values;
        let w_hat = ComplexMatrix::from_fn(n, n, |i, j| {
            if self.basis.resonant(i, j) {
                ZERO
            } else {
                let gap = l[j] - l[i];
                self.g_hat[(i, j)] * (gap * t).exp() / gap
            }
        });
        self.basis.from_eigen(&w_hat)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// x^RG(t) = e^{Ft}(I + εW(t)) e^{εPt} y0
    pub fn solution_at(&self, y0: &[C64], t: f64) -> Result<Vec<C64>> {
        let n = self.g_hat.rows();
        let flow = linalg::expm(&self.secular_generator.scale_real(t))?;
        let mut dressing = ComplexMatrix::identity(n);
        dressing.axpy(C64::new(self.epsilon, 0.0), &self.bounded_primitive(t));
        let m = &(&self.basis.exp(t) * &dressing) * &flow;
        Ok(m.mul_vec(y0))
    }
}

/// εP: the resonant part of εG in the eigenbasis of F.
pub fn secular_generator(sys: &LinearPerturbedSystem) -> Result<ComplexMatrix> {
    Ok(RgDecomposition::new(sys)?.secular_generator)
}

/// RG-improved trajectory x^RG(t) on `grid` starting from slow variable y0.
pub fn rg_improved_solution(sys: &LinearPerturbedSystem, y0: &ComplexMatrix, grid: &[f64]) -> Result<Vec<Vec<C64>>> {
    if y0.shape() != (sys.dim(), 1) {
        return Err(Error::DimMismatch(format!(
            "initial column has shape {}x{}, expected {}x1",
            y0.rows(),
            y0.cols(),
            sys.dim()
        )));
    }
    let dec = RgDecomposition::new(sys)?;
    grid.iter().map(|&t| dec.solution_at(y0.data(), t)).collect()
}

/// Slow initial value y0 = (I + εW(0))⁻¹x0 so that x^RG(0) = x0.
pub fn rg_initial_value(sys: &LinearPerturbedSystem, x0: &[C64]) -> Result<ComplexMatrix> {
    let dec = RgDecomposition::new(sys)?;
    let mut m = ComplexMatrix::identity(sys.dim());
    m.axpy(C64::new(sys.epsilon, 0.0), &dec.bounded_primitive(0.0));
    linalg::solve(&m, &ComplexMatrix::column(x0))
}

/// Damped oscillator ẍ + εẋ + x = 0 with RG initial data (Ā, θ̄).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub epsilon: f64,
    pub a_bar: f64,
    pub theta_bar: f64,
}

impl OscillatorParams {
    pub fn new(epsilon: f64, a_bar: f64, theta_bar: f64) -> Result<Self> {
        if !(a_bar >= 0.0) {
            return Err(Error::InvalidArgument(format!("amplitude must be >= 0, got {a_bar}")));
        }
        if !epsilon.is_finite() || !theta_bar.is_finite() {
            return Err(Error::InvalidArgument("oscillator parameters must be finite".into()));
        }
        Ok(Self { epsilon, a_bar, theta_bar })
    }

    /// First-order form with x₁ = x, x₂ = ẋ.
    pub fn first_order_system(&self) -> LinearPerturbedSystem {
        let f = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        let g = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, -1.0]).unwrap();
        LinearPerturbedSystem { f, g, epsilon: self.epsilon }
    }
}

/// A e^{−ε(t−τ)/2} sin(√(1−ε²/4)(t−τ) + θ), valid for ε < 2.
pub fn oscillator_exact(p: &OscillatorParams, a: f64, theta: f64, tau: f64, t: f64) -> f64 {
    let eps = p.epsilon;
    let s = t - tau;
    a * (-eps * s / 2.0).exp() * ((1.0 - eps * eps / 4.0).sqrt() * s + theta).sin()
}

/// Time derivative of [`oscillator_exact`].
pub fn oscillator_exact_velocity(p: &OscillatorParams, a: f64, theta: f64, tau: f64, t: f64) -> f64 {
    let eps = p.epsilon;
    let s = t - tau;
    let w = (1.0 - eps * eps / 4.0).sqrt();
    a * (-eps * s / 2.0).exp() * (w * (w * s + theta).cos() - eps / 2.0 * (w * s + theta).sin())
}

/// The second-order naive expansion, with the first-order secular term
/// written as (ε/2)(t−τ)A sin(t−θ).
pub fn oscillator_naive(p: &OscillatorParams, tau: f64, t: f64) -> f64 {
    let (eps, a, th) = (p.epsilon, p.a_bar, p.theta_bar);
    let s = t - tau;
    a * (t + th).sin()
        + eps / 2.0 * s * a * (t - th).sin()
        + eps * eps * a / 8.0 * (s * s * (t + th).sin() - s * (t + th).cos())
}

/// Ā e^{−εt/2} sin((1 − ε²/8)t + θ̄)
pub fn oscillator_rg(p: &OscillatorParams, t: f64) -> f64 {
    let eps = p.epsilon;
    p.a_bar * (-eps * t / 2.0).exp() * ((1.0 - eps * eps / 8.0) * t + p.theta_bar).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::matrix::{I, ONE};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn commuting_perturbation_is_fully_secular() {
        let f = ComplexMatrix::diagonal(&[I, -I * 2.0]);
        let g = ComplexMatrix::diagonal(&[ONE, C64::new(0.5, 1.0)]);
        let sys = LinearPerturbedSystem::new(f, g.clone(), 0.3).unwrap();
        assert!(secular_generator(&sys).unwrap().max_abs_diff(&g.scale_real(0.3)) < 1e-14);
    }

    #[test]
    fn off_diagonal_perturbation_has_no_secular_part() {
        let f = ComplexMatrix::diagonal(&[I, -I]);
        let g = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 2.0, 0.0]).unwrap();
        let sys = LinearPerturbedSystem::new(f, g, 0.1).unwrap();
        assert!(secular_generator(&sys).unwrap().norm_max() < 1e-14);
    }

    #[test]
    fn oscillator_secular_part_is_half_damping() {
        let p = OscillatorParams::new(0.1, 1.0, 0.0).unwrap();
        let sp = secular_generator(&p.first_order_system()).unwrap();
        assert!(sp.max_abs_diff(&ComplexMatrix::identity(2).scale_real(-0.05)) < 1e-14);
    }

    #[test]
    fn secular_generator_is_the_time_average() {
        let p = OscillatorParams::new(0.2, 1.0, 0.0).unwrap();
        let sys = p.first_order_system();
        let dec = RgDecomposition::new(&sys).unwrap();
        // average over one period with the trapezoid rule (exact for trig polynomials)
        let m = 64;
        let mut avg = ComplexMatrix::zeros(2, 2);
        for k in 0..m {
            let t = 2.0 * PI * k as f64 / m as f64;
            let conj = &(&dec.basis.exp(-t) * &sys.g.scale_real(sys.epsilon)) * &dec.basis.exp(t);
            avg.axpy(C64::new(1.0 / m as f64, 0.0), &conj);
        }
        assert!(avg.max_abs_diff(&dec.secular_generator) < 1e-12);
    }

    #[test]
    fn bounded_primitive_differentiates_back() {
        let p = OscillatorParams::new(0.1, 1.0, 0.0).unwrap();
        let sys = p.first_order_system();
        let dec = RgDecomposition::new(&sys).unwrap();
        let (t, h) = (0.7, 1e-5);
        let dw = (&dec.bounded_primitive(t + h) - &dec.bounded_primitive(t - h)).scale_real(0.5 / h);
        let integrand = &(&(&dec.basis.exp(-t) * &sys.g) * &dec.basis.exp(t))
            - &dec.secular_generator.scale_real(1.0 / sys.epsilon);
        assert!(dw.max_abs_diff(&integrand) < 1e-8);
    }

    #[test]
    fn jordan_block_is_rejected() {
        let f = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let sys = LinearPerturbedSystem::new(f, ComplexMatrix::identity(2), 0.1).unwrap();
        assert!(matches!(secular_generator(&sys), Err(Error::NotDiagonalizable { .. })));
    }

    #[test]
    fn unperturbed_limit_is_free_flow() {
        let p = OscillatorParams::new(0.0, 1.0, 0.0).unwrap();
        let y0 = ComplexMatrix::column(&[ONE, ZERO]);
        let xs = rg_improved_solution(&p.first_order_system(), &y0, &[0.0, 1.0, 3.0]).unwrap();
        for (x, t) in xs.iter().zip([0.0_f64, 1.0, 3.0]) {
            assert!((x[0].re - t.cos()).abs() < 1e-14 && (x[1].re + t.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn envelope_at_t20() {
        let p = OscillatorParams::new(0.1, 1.0, FRAC_PI_2).unwrap();
        let sys = p.first_order_system();
        let dec = RgDecomposition::new(&sys).unwrap();
        let y = linalg::expm(&dec.secular_generator.scale_real(20.0)).unwrap();
        assert!((y[(0, 0)].re - (-1.0_f64).exp()).abs() < 1e-14);
        let q = OscillatorParams::new(0.1, 1.0, 0.0).unwrap();
        let env = oscillator_rg(&q, 20.0) / ((1.0 - 0.1 * 0.1 / 8.0) * 20.0_f64).sin();
        assert!((env - 0.36788).abs() < 1e-5);
    }

    #[test]
    fn closed_forms_at_initial_instant() {
        let p = OscillatorParams::new(0.1, 2.0, 0.4).unwrap();
        assert!((oscillator_exact(&p, 2.0, 0.4, 1.5, 1.5) - 2.0 * 0.4_f64.sin()).abs() < 1e-15);
        assert!((oscillator_naive(&p, 3.0, 3.0) - 2.0 * 3.4_f64.sin()).abs() < 1e-15);
        assert!((oscillator_rg(&p, 0.0) - 2.0 * 0.4_f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn exact_solution_matches_rk4() {
        use crate::numeric::ode::rk4;
        let p = OscillatorParams::new(0.1, 1.0, FRAC_PI_2).unwrap();
        let x0 = [
            C64::new(oscillator_exact(&p, 1.0, FRAC_PI_2, 0.0, 0.0), 0.0),
            C64::new(oscillator_exact_velocity(&p, 1.0, FRAC_PI_2, 0.0, 0.0), 0.0),
        ];
        let grid = crate::numeric::density::uniform_grid(20.0, 1e-3);
        let ys = rk4(|_, y| Ok(vec![y[1], -y[0] - 0.1 * y[1]]), &x0, &grid).unwrap();
        let want = oscillator_exact(&p, 1.0, FRAC_PI_2, 0.0, 20.0);
        assert!((ys.last().unwrap()[0].re - want).abs() < 1e-6);
    }
}
