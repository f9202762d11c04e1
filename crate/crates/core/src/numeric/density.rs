//! Density matrices and time series of states.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::linalg::{self, HERMITIAN_TOL};
use super::matrix::{ComplexMatrix, C64};

/// Tolerance for Hermiticity and unit trace.
pub const STATE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a validated state.
pub const MIN_EIGENVALUE: f64 = -1e-8;
/// Most negative eigenvalue accepted from a perturbative solver before the
/// run is aborted.
pub const PERTURBATIVE_MIN_EIGENVALUE: f64 = -1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and eigenvalues ≥ −10⁻⁸.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_allowance(matrix, MIN_EIGENVALUE)
    }

    /// Like [`Self::new`] with a caller-chosen lower bound on the spectrum.
    pub fn with_allowance(matrix: ComplexMatrix, min_allowed: f64) -> Result<Self> {
        matrix.require_square()?;
        if !matrix.all_finite() {
            return Err(Error::InvalidArgument("density matrix has non-finite entries".into()));
        }
        let deviation = matrix.hermiticity_defect();
        if deviation > STATE_TOL {
            return Err(Error::NonHermitianInput { deviation, tol: STATE_TOL });
        }
        let tr = matrix.trace();
        if (tr - 1.0).norm() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace is {:.12}{:+.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let min_eigenvalue = linalg::herm_eig(&matrix, HERMITIAN_TOL)?.values[0];
        if min_eigenvalue < min_allowed {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self { matrix, min_eigenvalue })
    }

    /// Pure state ψψ† of a normalized vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.is_empty() || norm == 0.0 {
            return Err(Error::InvalidArgument("pure state needs a nonzero vector".into()));
        }
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&psi, &psi))
    }

    /// |k⟩⟨k| in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self { matrix: ComplexMatrix::unit(dim, k, k), min_eigenvalue: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// U ρ U† for a unitary U.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self { matrix: m.hermitian_part(), min_eigenvalue: self.min_eigenvalue })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Interaction,
    Schroedinger,
}

impl Picture {
    pub fn as_str(self) -> &'static str {
        match self {
            Picture::Interaction => "interaction",
            Picture::Schroedinger => "schroedinger",
        }
    }
}

/// Ordered (t, ρ) pairs produced by a solver.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub picture: Picture,
    pub metadata: BTreeMap<String, String>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, states: Vec<DensityMatrix>, picture: Picture) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimMismatch(format!("{} times but {} states", times.len(), states.len())));
        }
        validate_grid(&times)?;
        Ok(Self { times, states, picture, metadata: BTreeMap::new() })
    }

    /// Wraps raw solver output, accepting eigenvalues down to
    /// [`PERTURBATIVE_MIN_EIGENVALUE`] and recording the most negative one.
    pub fn from_solver(times: Vec<f64>, raw: Vec<ComplexMatrix>, picture: Picture, method: &str) -> Result<Self> {
        let mut states = Vec::with_capacity(raw.len());
        let mut worst = f64::INFINITY;
        for (t, m) in times.iter().zip(raw) {
            if !m.all_finite() {
                return Err(Error::NonFiniteState { t: *t });
            }
            // Solver output is Hermitian up to rounding; symmetrize before validation.
            let s = DensityMatrix::with_allowance(m.hermitian_part(), PERTURBATIVE_MIN_EIGENVALUE)?;
            worst = worst.min(s.min_eigenvalue());
            states.push(s);
        }
        let mut ts = Self::new(times, states, picture)?;
        ts.metadata.insert("method".into(), method.into());
        ts.metadata.insert("picture".into(), picture.as_str().into());
        if worst.is_finite() {
            ts.metadata.insert("min_eigenvalue".into(), format!("{worst:.6e}"));
        }
        Ok(ts)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    /// Converts an interaction-picture series to the Schrödinger picture by
    /// ρ ↦ e^{−iHt} ρ e^{iHt}.
    pub fn to_schroedinger(&self, h: &ComplexMatrix) -> Result<Self> {
        if self.picture == Picture::Schroedinger {
            return Ok(self.clone());
        }
        let eig = linalg::herm_eig(h, HERMITIAN_TOL)?;
        let mut states = Vec::with_capacity(self.len());
        for (t, s) in self.times.iter().zip(&self.states) {
            let u = eig.map(|l| C64::from_polar(1.0, -l * t));
            states.push(s.conjugate(&u)?);
        }
        let mut out = self.clone();
        out.states = states;
        out.picture = Picture::Schroedinger;
        out.metadata.insert("picture".into(), Picture::Schroedinger.as_str().into());
        Ok(out)
    }
}

/// Checks that a time grid is nonempty, finite and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("time grid has non-finite entries".into()));
    }
    if let Some(k) = grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("time grid not strictly increasing at index {}", k + 1)));
    }
    Ok(())
}

/// Uniform grid 0, dt, …, up to t_max inclusive (rounded to the nearest
/// whole number of steps).
pub fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

/// Grid of `points` equally spaced samples on [0, t_max].
pub fn linspace(t_max: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0];
    }
    let h = t_max / (points - 1) as f64;
    (0..points).map(|k| k as f64 * h).collect()
}

/// Trace distance ½‖ρ₁ − ρ₂‖₁.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(format!("trace distance of dims {} and {}", a.dim(), b.dim())));
    }
    let diff = (a.matrix() - b.matrix()).hermitian_part();
    let eig = linalg::herm_eig(&diff, HERMITIAN_TOL)?;
    Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
}
