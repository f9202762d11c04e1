//! System and bath descriptions, and the Bohr-frequency decomposition of
//! coupling operators.

use crate::error::{Error, Result};
use crate::numeric::linalg::{self, eig_group_tol, HERMITIAN_TOL};
use crate::numeric::matrix::{ComplexMatrix, C64};

use super::kernel::CorrelationKernel;

/// Tolerance for A_{i*} = A_i†.
pub const PAIRING_TOL: f64 = 1e-10;
/// Jump operators with all entries below this are dropped.
pub const DROP_TOL: f64 = 1e-14;

/// H_S, couplings A_i in V = Σᵢ A_i ⊗ B_i, and the coupling strength λ.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub h_s: ComplexMatrix,
    pub couplings: Vec<ComplexMatrix>,
    pub lambda: f64,
}

impl SystemModel {
    pub fn new(h_s: ComplexMatrix, couplings: Vec<ComplexMatrix>, lambda: f64) -> Result<Self> {
        let d = h_s.require_square()?;
        let deviation = h_s.hermiticity_defect();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput { deviation, tol: HERMITIAN_TOL });
        }
        if couplings.is_empty() {
            return Err(Error::InvalidArgument("at least one coupling operator is required".into()));
        }
        for (i, a) in couplings.iter().enumerate() {
            if a.shape() != (d, d) {
                return Err(Error::DimMismatch(format!(
                    "coupling {i} is {}x{}, system dimension is {d}",
                    a.rows(),
                    a.cols()
                )));
            }
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self { h_s, couplings, lambda })
    }

    pub fn dim(&self) -> usize {
        self.h_s.rows()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }
}

/// Correlation matrix C_ij(s) = Tr(B_i(s) B_j Ω) and the adjoint pairing
/// i ↦ i* with B_{i*} = B_i†.
#[derive(Debug, Clone)]
pub struct BathModel {
    n: usize,
    kernels: Vec<CorrelationKernel>,
    pairing: Vec<usize>,
}

impl BathModel {
    /// All-zero correlations for `n` couplings with the given pairing.
    pub fn new(pairing: Vec<usize>) -> Result<Self> {
        let n = pairing.len();
        if n == 0 {
            return Err(Error::InvalidArgument("bath needs at least one coupling".into()));
        }
        for (i, &p) in pairing.iter().enumerate() {
            if p >= n || pairing[p] != i {
                return Err(Error::InvalidArgument(format!("pairing is not an involution at index {i}")));
            }
        }
        Ok(Self { n, kernels: vec![CorrelationKernel::Zero; n * n], pairing })
    }

    /// Single self-adjoint coupling with one kernel.
    pub fn single(kernel: CorrelationKernel) -> Self {
        Self { n: 1, kernels: vec![kernel], pairing: vec![0] }
    }

    pub fn with_kernel(mut self, i: usize, j: usize, kernel: CorrelationKernel) -> Result<Self> {
        if i >= self.n || j >= self.n {
            return Err(Error::InvalidArgument(format!("kernel index ({i}, {j}) out of range for {} couplings", self.n)));
        }
        self.kernels[i * self.n + j] = kernel;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn kernel(&self, i: usize, j: usize) -> &CorrelationKernel {
        &self.kernels[i * self.n + j]
    }

    pub fn partner(&self, i: usize) -> usize {
        self.pairing[i]
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn ensure_integrable(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.kernel(i, j).is_integrable() {
                    return Err(Error::NotIntegrable { i, j });
                }
            }
        }
        Ok(())
    }
}

/// Per-pair result of [`check_integrability`].
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityEntry {
    pub i: usize,
    pub j: usize,
    pub abs_integral: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub entries: Vec<IntegrabilityEntry>,
}

impl IntegrabilityReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// ∫₀^∞|C_ij| per pair and whether it is finite.
pub fn check_integrability(bath: &BathModel) -> IntegrabilityReport {
    let mut entries = Vec::new();
    for i in 0..bath.len() {
        for j in 0..bath.len() {
            let k = bath.kernel(i, j);
            let pass = k.is_integrable();
            entries.push(IntegrabilityEntry { i, j, abs_integral: k.abs_integral(), pass });
        }
    }
    IntegrabilityReport { entries }
}

/// A(ω) terms of one coupling operator, labeled so that
/// e^{−iHt} A e^{iHt} = Σ_ω e^{iωt} A(ω).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub coupling_index: usize,
    pub terms: Vec<(f64, ComplexMatrix)>,
}

impl SpectralDecomposition {
    pub fn sum(&self) -> ComplexMatrix {
        let d = self.terms.first().map(|t| t.1.rows()).unwrap_or(1);
        let mut acc = ComplexMatrix::zeros(d, d);
        for (_, a) in &self.terms {
            acc += a;
        }
        acc
    }

    /// Σ_ω e^{iωt} A(ω), which equals e^{−iHt} A e^{iHt}.
    pub fn rotated(&self, t: f64) -> ComplexMatrix {
        self.phased(t, 1.0)
    }

    /// Σ_ω e^{−iωt} A(ω), which equals e^{iHt} A e^{−iHt}: the coupling in
    /// the interaction picture used by the solvers.
    pub fn interaction_picture(&self, t: f64) -> ComplexMatrix {
        self.phased(t, -1.0)
    }

    fn phased(&self, t: f64, sign: f64) -> ComplexMatrix {
        let d = self.terms.first().map(|t| t.1.rows()).unwrap_or(1);
        let mut acc = ComplexMatrix::zeros(d, d);
        for (w, a) in &self.terms {
            acc.axpy(C64::from_polar(1.0, sign * w * t), a);
        }
        acc
    }
}

/// Spectral projectors of H grouped by eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigenspaces {
    pub energies: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
}

impl Eigenspaces {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        let e = linalg::herm_eig(h, HERMITIAN_TOL)?;
        let d = h.rows();
        let mut energies = Vec::new();
        let mut projectors = Vec::new();
        for g in linalg::group_eigenvalues(&e.values) {
            let energy = e.values[g.clone()].iter().sum::<f64>() / g.len() as f64;
            let p = ComplexMatrix::from_fn(d, d, |i, j| {
                g.clone().map(|k| e.vectors[(i, k)] * e.vectors[(j, k)].conj()).sum()
            });
            energies.push(energy);
            projectors.push(p);
        }
        Ok(Self { energies, projectors })
    }
}

/// Splits A into Bohr components A(ω) = Σ_{e_b − e_a = ω} Π_a A Π_b.
pub fn bohr_decompose(h_s: &ComplexMatrix, a: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let spaces = Eigenspaces::new(h_s)?;
    decompose_with(&spaces, a, 0)
}

pub(crate) fn decompose_with(spaces: &Eigenspaces, a: &ComplexMatrix, index: usize) -> Result<SpectralDecomposition> {
    let n = spaces.energies.len();
    let d = a.require_square()?;
    if spaces.projectors[0].rows() != d {
        return Err(Error::DimMismatch(format!("operator is {d}x{d}, Hamiltonian has another dimension")));
    }
    let scale = spaces.energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let tol = eig_group_tol(2.0 * scale);
    let mut raw: Vec<(f64, ComplexMatrix)> = Vec::new();
    for ia in 0..n {
        let left = &spaces.projectors[ia] * a;
        for ib in 0..n {
            let block = &left * &spaces.projectors[ib];
            if block.norm_max() <= DROP_TOL {
                continue;
            }
            let w = spaces.energies[ib] - spaces.energies[ia];
            raw.push((w, block));
        }
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut terms: Vec<(f64, ComplexMatrix, usize)> = Vec::new();
    for (w, m) in raw {
        match terms.last_mut() {
            Some((w0, acc, count)) if (w - *w0 / *count as f64).abs() <= tol => {
                *acc += &m;
                *w0 += w;
                *count += 1;
            }
            _ => terms.push((w, m, 1)),
        }
    }
    let terms = terms
        .into_iter()
        .map(|(w, m, c)| (w / c as f64, m))
        .filter(|(_, m)| m.norm_max() > DROP_TOL)
        .map(|(w, m)| (if w.abs() <= tol { 0.0 } else { w }, m))
        .collect();
    Ok(SpectralDecomposition { coupling_index: index, terms })
}
