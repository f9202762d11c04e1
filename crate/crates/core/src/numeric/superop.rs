//! Superoperators on column-stacked vectorized operators.
//!
//! vec(ρ) stacks columns: vec(ρ)[j·d + i] = ρ[i, j]. With this convention
//! vec(LρR) = (Rᵀ ⊗ L) vec(ρ).

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

use super::linalg;
use super::matrix::{ComplexMatrix, C64, I, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

pub fn vec(rho: &ComplexMatrix) -> Vec<C64> {
    let (r, c) = rho.shape();
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(rho[(i, j)]);
        }
    }
    v
}

pub fn devec(v: &[C64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::DimMismatch(format!("cannot reshape {} entries to {rows}x{cols}", v.len())));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| v[j * rows + i]))
}

/// Square variant of [`devec`] for vectors known to have length d².
pub(crate) fn devec_square(v: &[C64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| v[j * d + i])
}

/// The superoperator ρ ↦ LρR.
pub fn superop_sandwich(l: &ComplexMatrix, r: &ComplexMatrix) -> Result<Superoperator> {
    let d = l.require_square()?;
    if r.require_square()? != d {
        return Err(Error::DimMismatch(format!("sandwich factors {d}x{d} and {0}x{0}", r.rows())));
    }
    Ok(Superoperator { dim: d, matrix: r.transpose().kron(l) })
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimMismatch(format!(
                "superoperator on dim {dim} needs a {0}x{0} matrix, got {1}x{2}",
                dim * dim,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    /// ρ ↦ −i[H, ρ]
    pub fn hamiltonian(h: &ComplexMatrix) -> Result<Self> {
        let d = h.require_square()?;
        let id = ComplexMatrix::identity(d);
        let left = superop_sandwich(h, &id)?;
        let right = superop_sandwich(&id, h)?;
        Ok((&left - &right).scale(-I))
    }

    /// ρ ↦ AρB − ½{BA, ρ}, the dissipator shape for a pair (A, B); with
    /// B = A† this is the usual Lindblad term.
    pub fn dissipator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        let d = a.require_square()?;
        let id = ComplexMatrix::identity(d);
        let ba = b.matmul(a)?;
        let mut s = superop_sandwich(a, b)?;
        s.matrix.axpy(C64::new(-0.5, 0.0), &superop_sandwich(&ba, &id)?.matrix);
        s.matrix.axpy(C64::new(-0.5, 0.0), &superop_sandwich(&id, &ba)?.matrix);
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimMismatch(format!(
                "superoperator on dim {} applied to {}x{}",
                self.dim,
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(devec_square(&self.matrix.mul_vec(&vec(rho)), self.dim))
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(v)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, matrix: self.matrix.scale(s) }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// self += s · other
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!(self.dim, other.dim, "superoperator dims differ");
        self.matrix.axpy(s, &other.matrix);
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!("compose dims {} and {}", self.dim, other.dim)));
        }
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    pub fn expm(&self) -> Result<Self> {
        Ok(Self { dim: self.dim, matrix: linalg::expm(&self.matrix)? })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn norm_max(&self) -> f64 {
        self.matrix.norm_max()
    }

    /// Largest entry of the row functional ρ ↦ Tr S(ρ); zero for
    /// trace-annihilating generators.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n)
            .map(|col| (0..d).map(|i| self.matrix[(i * d + i, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }

    /// Like [`Self::trace_defect`] but against the identity functional, i.e.
    /// the defect of trace preservation for a propagator.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        (0..n)
            .map(|col| {
                let s: C64 = (0..d).map(|i| self.matrix[(i * d + i, col)]).sum();
                let want = if col % (d + 1) == 0 { ONE } else { ZERO };
                (s - want).norm()
            })
            .fold(0.0, f64::max)
    }

    /// max over basis elements of ‖S(E_ba) − S(E_ab)†‖; zero iff S maps
    /// Hermitian operators to Hermitian operators.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..d {
            for b in 0..d {
                let sab = self.column_image(a, b);
                let sba = self.column_image(b, a);
                worst = worst.max(sba.max_abs_diff(&sab.adjoint()));
            }
        }
        worst
    }

    /// S(|a⟩⟨b|)
    fn column_image(&self, a: usize, b: usize) -> ComplexMatrix {
        let d = self.dim;
        devec_square(&self.matrix.col(b * d + a), d)
    }

    /// Choi matrix Σ_ab |a⟩⟨b| ⊗ S(|a⟩⟨b|).
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut c = ComplexMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                let img = self.column_image(a, b);
                for i in 0..d {
                    for j in 0..d {
                        c[(a * d + i, b * d + j)] = img[(i, j)];
                    }
                }
            }
        }
        c
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;

    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dims differ");
        Superoperator { dim: self.dim, matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;

    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim, "superoperator dims differ");
        Superoperator { dim: self.dim, matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Superoperator {
    type Output = Superoperator;

    fn mul(self, rhs: &Superoperator) -> Superoperator {
        self.compose(rhs).expect("superoperator dims differ")
    }
}
