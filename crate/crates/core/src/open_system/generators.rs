//! Second-order generators built from the correlation matrix and the Bohr
//! decomposition of the couplings.
//!
//! Writing A_i(t) = Σ_ω e^{−iωt} A_i(ω) for the interaction-picture coupling,
//! the reduced double commutator at memory time s is
//!
//!   K(t,s)ρ = Σ e^{−i(ω+ω′)t} e^{iω′s} { C_ij(s)·S1 + C̄_{i*j*}(s)·S2 }
//!   S1 = A_i(ω)A_j(ω′)ρ − A_j(ω′)ρA_i(ω)
//!   S2 = ρA_j(ω′)A_i(ω) − A_i(ω)ρA_j(ω′)
//!
//! and every generator here is −λ² times a weighted sum of S1, S2 with
//! weights obtained by integrating the scalar factor in s (and t).

use crate::error::{Error, Result};
use crate::numeric::linalg::eig_group_tol;
use crate::numeric::matrix::{ComplexMatrix, C64, I, ZERO};
use crate::numeric::superop::{superop_sandwich, Superoperator};

use super::kernel::CorrelationKernel;
use super::model::{decompose_with, BathModel, Eigenspaces, SpectralDecomposition, SystemModel, PAIRING_TOL};

/// One (i, ω; j, ω′) contribution.
#[derive(Debug, Clone)]
pub(crate) struct PairTerm {
    pub i: usize,
    pub j: usize,
    pub omega: f64,
    pub omega_p: f64,
    /// ω + ω′, set to exactly 0 for secular pairs.
    pub big_omega: f64,
    pub secular: bool,
    pub s1: Superoperator,
    pub s2: Superoperator,
}

/// A validated system-bath pair with precomputed Bohr decompositions.
#[derive(Debug, Clone)]
pub struct OpenSystem {
    pub sys: SystemModel,
    pub bath: BathModel,
    pub decompositions: Vec<SpectralDecomposition>,
    pub(crate) terms: Vec<PairTerm>,
}

impl OpenSystem {
    pub fn new(sys: SystemModel, bath: BathModel) -> Result<Self> {
        let n = sys.couplings.len();
        if bath.len() != n {
            return Err(Error::DimMismatch(format!("{n} couplings but bath describes {}", bath.len())));
        }
        for i in 0..n {
            let p = bath.partner(i);
            let dev = sys.couplings[p].max_abs_diff(&sys.couplings[i].adjoint());
            if dev > PAIRING_TOL {
                return Err(Error::InvalidArgument(format!(
                    "coupling {p} is not the adjoint of coupling {i} (deviation {dev:.3e})"
                )));
            }
        }
        let spaces = Eigenspaces::new(&sys.h_s)?;
        let decompositions = (0..n)
            .map(|i| decompose_with(&spaces, &sys.couplings[i], i))
            .collect::<Result<Vec<_>>>()?;
        let scale = decompositions
            .iter()
            .flat_map(|d| d.terms.iter().map(|t| t.0.abs()))
            .fold(0.0_f64, f64::max);
        let tol = eig_group_tol(2.0 * scale);
        let d = sys.dim();
        let id = ComplexMatrix::identity(d);
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let k1 = bath.kernel(i, j);
                let k2 = bath.kernel(bath.partner(i), bath.partner(j));
                if k1.is_zero() && k2.is_zero() {
                    continue;
                }
                for (w, ai) in &decompositions[i].terms {
                    for (wp, aj) in &decompositions[j].terms {
                        let ai_aj = ai * aj;
                        let aj_ai = aj * ai;
                        let s1 = &superop_sandwich(&ai_aj, &id)? - &superop_sandwich(aj, ai)?;
                        let s2 = &superop_sandwich(&id, &aj_ai)? - &superop_sandwich(ai, aj)?;
                        let big = w + wp;
                        let secular = big.abs() <= tol;
                        terms.push(PairTerm {
                            i,
                            j,
                            omega: *w,
                            omega_p: *wp,
                            big_omega: if secular { 0.0 } else { big },
                            secular,
                            s1,
                            s2,
                        });
                    }
                }
            }
        }
        Ok(Self { sys, bath, decompositions, terms })
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn lambda2(&self) -> f64 {
        self.sys.lambda * self.sys.lambda
    }

    fn k1(&self, t: &PairTerm) -> &CorrelationKernel {
        self.bath.kernel(t.i, t.j)
    }

    fn k2(&self, t: &PairTerm) -> &CorrelationKernel {
        self.bath.kernel(self.bath.partner(t.i), self.bath.partner(t.j))
    }

    /// −λ² Σ (c1·S1 + c2·S2) over the selected terms.
    fn assemble<F>(&self, secular_only: bool, mut weights: F) -> Superoperator
    where
        F: FnMut(&PairTerm) -> (C64, C64),
    {
        let mut out = Superoperator::zeros(self.dim());
        let scale = C64::new(-self.lambda2(), 0.0);
        if self.lambda2() == 0.0 {
            return out;
        }
        for term in &self.terms {
            if secular_only && !term.secular {
                continue;
            }
            let (c1, c2) = weights(term);
            if c1 != ZERO {
                out.axpy(scale * c1, &term.s1);
            }
            if c2 != ZERO {
                out.axpy(scale * c2, &term.s2);
            }
        }
        out
    }

    /// TCL2 generator 𝓛(t) = −λ² ∫₀ᵗ K(t,s) ds in the interaction picture.
    pub fn tcl2_generator(&self, t: f64) -> Result<Superoperator> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("generator time must be >= 0, got {t}")));
        }
        self.bath.ensure_integrable()?;
        Ok(self.assemble(false, |term| {
            let phase = C64::from_polar(1.0, -term.big_omega * t);
            let c1 = self.k1(term).gamma_finite(-term.omega_p, t);
            let c2 = self.k2(term).gamma_finite(term.omega_p, t).conj();
            (phase * c1, phase * c2)
        }))
    }

    /// t → ∞ limit of the memory integral (Redfield form), still carrying the
    /// oscillating factors e^{−iΩt} of the non-secular pairs.
    pub fn redfield_generator(&self, t: f64) -> Result<Superoperator> {
        self.bath.ensure_integrable()?;
        Ok(self.assemble(false, |term| {
            let phase = C64::from_polar(1.0, -term.big_omega * t);
            let c1 = self.k1(term).gamma_inf(-term.omega_p);
            let c2 = self.k2(term).gamma_inf(term.omega_p).conj();
            (phase * c1, phase * c2)
        }))
    }

    /// Secular (Ω = 0) part of the Redfield generator.
    pub fn rwa_generator(&self) -> Result<RwaGenerator> {
        self.bath.ensure_integrable()?;
        let generator = self.assemble(true, |term| {
            let c1 = self.k1(term).gamma_inf(-term.omega_p);
            let c2 = self.k2(term).gamma_inf(term.omega_p).conj();
            (c1, c2)
        });
        let l2 = self.lambda2();
        let coefficients = self
            .terms
            .iter()
            .filter(|t| t.secular && !self.k1(t).is_zero())
            .map(|t| {
                let gamma = self.k1(t).gamma_inf(-t.omega_p);
                RwaCoefficient {
                    i: t.i,
                    j: t.j,
                    omega1: t.omega,
                    omega2: t.omega_p,
                    gamma,
                    decay: l2 * gamma.re,
                    shift: l2 * gamma.im,
                }
            })
            .collect();
        Ok(RwaGenerator { generator, coefficients })
    }

    /// Φ(t) = ∫₀ᵗ (𝓛_TCL(s) − 𝓛_RWA) ds
    pub fn rg_correction(&self, t: f64) -> Result<Superoperator> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("correction time must be >= 0, got {t}")));
        }
        self.bath.ensure_integrable()?;
        Ok(self.assemble(false, |term| {
            let c1 = self.k1(term).phi_weight(-term.omega_p, term.big_omega, term.secular, t);
            let c2 = self.k2(term).phi_weight(term.omega_p, -term.big_omega, term.secular, t).conj();
            (c1, c2)
        }))
    }

    /// Memory kernel of the TC2 equation ρ̇(t) = −∫₀ᵗ 𝒦(t, t₁) ρ(t₁) dt₁,
    /// accumulated directly on vectorized states.
    pub fn tc2_kernel(&self) -> Tc2Kernel<'_> {
        Tc2Kernel { system: self }
    }
}

/// Jump-pair data of the RWA generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RwaCoefficient {
    pub i: usize,
    pub j: usize,
    /// Bohr label of A_i.
    pub omega1: f64,
    /// Bohr label of A_j; ω₁ + ω₂ = 0.
    pub omega2: f64,
    /// Γ_ij(ω₁) = ∫₀^∞ e^{−iω₁s} C_ij(s) ds
    pub gamma: C64,
    /// λ² Re Γ
    pub decay: f64,
    /// λ² Im Γ
    pub shift: f64,
}

#[derive(Debug, Clone)]
pub struct RwaGenerator {
    pub generator: Superoperator,
    pub coefficients: Vec<RwaCoefficient>,
}

/// One-sided transform of a correlation entry and the derived spectral data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfFourierData {
    pub omega: f64,
    /// ∫₀^∞ e^{−iωs} C(s) ds
    pub gamma: C64,
    /// 𝒢(ω) = 2λ² Re Γ
    pub g_full: f64,
    /// 𝒦(ω) = 2iλ² Im Γ, so that λ²Γ = (𝒢 + 𝒦)/2
    pub k_disp: C64,
}

pub fn half_fourier(bath: &BathModel, pair: (usize, usize), omega: f64, lambda: f64) -> Result<HalfFourierData> {
    let (i, j) = pair;
    if i >= bath.len() || j >= bath.len() {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) out of range")));
    }
    let k = bath.kernel(i, j);
    if !k.is_integrable() {
        return Err(Error::NotIntegrable { i, j });
    }
    let gamma = k.gamma_inf(omega);
    let l2 = lambda * lambda;
    Ok(HalfFourierData { omega, gamma, g_full: 2.0 * l2 * gamma.re, k_disp: I * (2.0 * l2 * gamma.im) })
}

pub fn rwa_generator(sys: &SystemModel, bath: &BathModel) -> Result<RwaGenerator> {
    OpenSystem::new(sys.clone(), bath.clone())?.rwa_generator()
}

pub fn tcl2_generator(sys: &SystemModel, bath: &BathModel, t: f64) -> Result<Superoperator> {
    OpenSystem::new(sys.clone(), bath.clone())?.tcl2_generator(t)
}

pub fn rg_correction(sys: &SystemModel, bath: &BathModel, t: f64) -> Result<Superoperator> {
    OpenSystem::new(sys.clone(), bath.clone())?.rg_correction(t)
}

pub struct Tc2Kernel<'a> {
    system: &'a OpenSystem,
}

impl crate::numeric::volterra::MemoryKernel for Tc2Kernel<'_> {
    fn dim(&self) -> usize {
        let d = self.system.dim();
        d * d
    }

    fn accumulate(&self, t: f64, t1: f64, w: f64, u: &[C64], out: &mut [C64]) {
        let sys = self.system;
        let l2 = sys.lambda2();
        if l2 == 0.0 {
            return;
        }
        let s = t - t1;
        for term in &sys.terms {
            let phase = C64::from_polar(1.0, -term.big_omega * t + term.omega_p * s) * (l2 * w);
            let c1 = phase * sys.k1(term).eval(s);
            let c2 = phase * sys.k2(term).eval(s).conj();
            for (op, c) in [(&term.s1, c1), (&term.s2, c2)] {
                if c == ZERO {
                    continue;
                }
                let m = op.matrix();
                for (r, o) in out.iter_mut().enumerate() {
                    let row = m.row(r);
                    let mut acc = ZERO;
                    for (a, b) in row.iter().zip(u) {
                        acc += a * b;
                    }
                    *o += c * acc;
                }
            }
        }
    }
}
