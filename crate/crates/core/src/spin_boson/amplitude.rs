//! Parameters, the Lorentzian kernel and the excited-state amplitude u(t).

use crate::error::{Error, Result};
use crate::numeric::matrix::{ComplexMatrix, C64, I, ONE};
use crate::numeric::volterra::{volterra_solve_with, ConvolutionTable};
use crate::open_system::{BathModel, CorrelationKernel, OpenSystem, SystemModel};
use crate::numeric::matrix::qubit;

/// Δ and α in units of λ², plus λ itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinBosonParams {
    pub delta: f64,
    pub alpha: f64,
    pub lambda: f64,
}

impl SpinBosonParams {
    pub fn new(delta: f64, alpha: f64, lambda: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("Delta must be finite and >= 0, got {delta}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be finite and > 0, got {alpha}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be finite and > 0, got {lambda}")));
        }
        Ok(Self { delta, alpha, lambda })
    }

    /// Parameters where Δ and α are given in units of λ².
    pub fn in_lambda2_units(delta: f64, alpha: f64, lambda: f64) -> Result<Self> {
        let l2 = lambda * lambda;
        Self::new(delta * l2, alpha * l2, lambda)
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda * self.lambda
    }

    /// d = √(α² − 2λ²α), complex when α < 2λ².
    pub fn d(&self) -> C64 {
        self.d_squared().sqrt()
    }

    pub fn d_squared(&self) -> C64 {
        C64::new(self.alpha * self.alpha - 2.0 * self.lambda2() * self.alpha, 0.0)
    }

    /// H_S = Δσ₊σ₋
    pub fn hamiltonian(&self) -> ComplexMatrix {
        qubit::excited().scale_real(self.delta)
    }

    /// Couplings σ₊ ⊗ b and σ₋ ⊗ b†; in the vacuum only ⟨b(s)b†⟩ = f(s) is
    /// nonzero.
    pub fn open_system(&self) -> Result<OpenSystem> {
        let sys = SystemModel::new(self.hamiltonian(), vec![qubit::sigma_plus(), qubit::sigma_minus()], self.lambda)?;
        let kernel = CorrelationKernel::exponential(C64::new(self.alpha / 2.0, 0.0), C64::new(self.alpha, self.delta));
        let bath = BathModel::new(vec![1, 0])?.with_kernel(0, 1, kernel)?;
        OpenSystem::new(sys, bath)
    }
}

/// f(t) = (α/2) e^{−(α+iΔ)t}
pub fn f_kernel(p: &SpinBosonParams, t: f64) -> C64 {
    C64::new(p.alpha / 2.0, 0.0) * (-C64::new(p.alpha, p.delta) * t).exp()
}

/// Sign in front of the (α/d) sinh(dt/2) term of u(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignVariant {
    Plus,
    Minus,
}

impl SignVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SignVariant::Plus => "plus",
            SignVariant::Minus => "minus",
        }
    }

    fn factor(self) -> f64 {
        match self {
            SignVariant::Plus => 1.0,
            SignVariant::Minus => -1.0,
        }
    }
}

/// sinh(z)/z with the removable singularity handled by its series.
fn sinhc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        ONE + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

/// Closed-form amplitude
/// u(t) = e^{−(α+2iΔ)t/2} [cosh(dt/2) ± (α/d) sinh(dt/2)].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeFunction {
    pub params: SpinBosonParams,
    pub sign: SignVariant,
}

impl AmplitudeFunction {
    pub fn new(params: SpinBosonParams, sign: SignVariant) -> Self {
        Self { params, sign }
    }

    fn pieces(&self, t: f64) -> (C64, C64, C64) {
        let p = &self.params;
        let d = p.d();
        let z = d * (t / 2.0);
        let a = C64::new(p.alpha, 2.0 * p.delta) / 2.0;
        let envelope = (-a * t).exp();
        let cosh = z.cosh();
        // (α/d) sinh(dt/2) and (d/2) sinh(dt/2) without dividing by d
        let s = sinhc(z);
        let alpha_sinh = C64::new(p.alpha * t / 2.0, 0.0) * s;
        let half_d_sinh = p.d_squared() * (t / 4.0) * s;
        let sg = self.sign.factor();
        let g = cosh + sg * alpha_sinh;
        let g_dot = half_d_sinh + sg * (p.alpha / 2.0) * cosh;
        (envelope, g, g_dot - a * g)
    }

    /// u(t) in the Schrödinger picture.
    pub fn u(&self, t: f64) -> C64 {
        let (env, g, _) = self.pieces(t);
        env * g
    }

    /// du/dt
    pub fn u_dot(&self, t: f64) -> C64 {
        let (env, _, gd) = self.pieces(t);
        env * gd
    }

    /// v(t) = e^{iΔt} u(t), the amplitude in the interaction picture.
    pub fn v(&self, t: f64) -> C64 {
        C64::from_polar(1.0, self.params.delta * t) * self.u(t)
    }

    pub fn v_dot(&self, t: f64) -> C64 {
        let ph = C64::from_polar(1.0, self.params.delta * t);
        ph * (self.u_dot(t) + I * self.params.delta * self.u(t))
    }
}

/// Which memory kernel the amplitude equation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelConvention {
    /// f(s) as given, with the free term −iΔu.
    AsGiven,
    /// f(s)e^{iΔs}: the kernel with its carrier phase removed.
    PhaseShifted,
}

impl KernelConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelConvention::AsGiven => "as_given",
            KernelConvention::PhaseShifted => "phase_shifted",
        }
    }
}

/// Solves u̇ = −iΔu − λ² ∫₀ᵗ f̂(t−s) u(s) ds on a uniform grid.
pub fn amplitude_oracle(p: &SpinBosonParams, grid: &[f64]) -> Result<Vec<C64>> {
    amplitude_oracle_with(p, KernelConvention::AsGiven, grid)
}

pub fn amplitude_oracle_with(p: &SpinBosonParams, conv: KernelConvention, grid: &[f64]) -> Result<Vec<C64>> {
    let l2 = p.lambda2();
    let pp = *p;
    let table = match conv {
        KernelConvention::AsGiven => ConvolutionTable::new(move |s| l2 * f_kernel(&pp, s), grid)?,
        KernelConvention::PhaseShifted => {
            ConvolutionTable::new(move |s| l2 * f_kernel(&pp, s) * C64::from_polar(1.0, pp.delta * s), grid)?
        }
    };
    volterra_solve_with(-I * p.delta, &table, ONE, grid)
}

/// Result of choosing the sign variant by comparison with the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignSelection {
    pub sign: SignVariant,
    pub error_plus: f64,
    pub error_minus: f64,
}

/// Tolerance for accepting a sign variant against the amplitude oracle.
pub const SIGN_SELECTION_TOL: f64 = 1e-6;

/// Picks the sign variant whose u(t) matches the amplitude oracle on a short
/// initial window.
pub fn select_sign_variant(p: &SpinBosonParams) -> Result<SignSelection> {
    let grid = crate::numeric::density::uniform_grid(0.05 / p.lambda2(), 1e-4 / p.lambda2());
    let oracle = amplitude_oracle(p, &grid)?;
    let err = |sign| {
        let a = AmplitudeFunction::new(*p, sign);
        grid.iter().zip(&oracle).map(|(t, u)| (a.u(*t) - u).norm()).fold(0.0, f64::max)
    };
    let (ep, em) = (err(SignVariant::Plus), err(SignVariant::Minus));
    let sign = if ep <= em { SignVariant::Plus } else { SignVariant::Minus };
    if ep.min(em) > SIGN_SELECTION_TOL {
        return Err(Error::InvalidArgument(format!(
            "no sign variant matches the amplitude oracle (errors {ep:.3e}, {em:.3e})"
        )));
    }
    Ok(SignSelection { sign, error_plus: ep, error_minus: em })
}
