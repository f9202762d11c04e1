//! Eigensolvers, linear solves and matrix functions for small dense matrices.
//!
//! Everything here targets dimensions up to a few dozen; the algorithms are
//! the textbook dense ones (cyclic Jacobi, Hessenberg QR, Padé scaling and
//! squaring) without blocking.

use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-13;

/// Default tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default clamp tolerance for small negative eigenvalues in [`psd_sqrt`].
pub const PSD_CLAMP_TOL: f64 = 1e-8;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    /// U diag(f(λ)) U†
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let fd: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| u[(i, k)] * fd[k] * u[(j, k)].conj()).sum())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| C64::new(l, 0.0))
    }
}

/// Hermitian eigensolver by cyclic complex Jacobi rotations.
pub fn herm_eig(h: &ComplexMatrix, tol: f64) -> Result<HermEig> {
    let n = h.require_square()?;
    let deviation = h.hermiticity_defect();
    if deviation > tol {
        return Err(Error::NonHermitianInput { deviation, tol });
    }
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.norm_fro();

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweep = 0;
    let active = scale > 0.0 && n > 1;
    loop {
        if !active || off_norm(&a) <= JACOBI_OFF_TOL * scale {
            break;
        }
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: JACOBI_MAX_SWEEPS });
        }
        sweep += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                if beta <= f64::MIN_POSITIVE * 4.0 || beta <= 1e-300 * scale {
                    continue;
                }
                let phase = apq / beta; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * beta);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// Groups sorted real eigenvalues into clusters with absolute tolerance
/// `10⁻⁹·max|λ|`; returns index ranges into the sorted list.
pub fn group_eigenvalues(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = eig_group_tol(scale);
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            groups.push(start..k);
            start = k;
        }
    }
    groups
}

/// The grouping tolerance used for degenerate eigenvalues and resonances.
pub fn eig_group_tol(scale: f64) -> f64 {
    (1e-9 * scale).max(1e-13)
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let n = a.require_square()?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.norm_max().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= 1e-300 * scale {
                return Err(Error::InvalidArgument("singular matrix in LU factorization".into()));
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::DimMismatch(format!("rhs has {} rows, expected {n}", b.rows())));
        }
        let m = b.cols();
        let mut x = ComplexMatrix::from_fn(n, m, |i, j| b[(self.perm[i], j)]);
        for j in 0..m {
            for i in 0..n {
                let mut s = x[(i, j)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, j)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / self.lu[(i, i)];
            }
        }
        Ok(x)
    }
}

pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Lu::new(a)?.solve(b)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    solve(a, &ComplexMatrix::identity(n))
}

/// Eigendecomposition of a general (diagonalizable) complex matrix.
#[derive(Debug, Clone)]
pub struct Eig {
    pub values: Vec<C64>,
    /// Columns are unit-norm right eigenvectors.
    pub vectors: ComplexMatrix,
}

/// Complex Schur form A = Q T Q† with T upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, ONE);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Reduces to upper Hessenberg form by Householder reflections, then runs
/// Wilkinson-shifted QR sweeps until every subdiagonal entry deflates.
pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    let n = a.require_square()?;
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);

    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // h ← P h with P = I − 2vv† acting on rows k+1..n
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|r| v[r].conj() * h[(k + 1 + r, j)]).sum();
            for r in 0..v.len() {
                h[(k + 1 + r, j)] -= 2.0 * v[r] * s;
            }
        }
        // h ← h P, q ← q P
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let s: C64 = (0..v.len()).map(|r| m[(i, k + 1 + r)] * v[r]).sum();
                for r in 0..v.len() {
                    m[(i, k + 1 + r)] -= 2.0 * s * v[r].conj();
                }
            }
        }
    }

    let eps = f64::EPSILON;
    let max_iter = 100 * n.max(1);
    let mut iter = 0;
    let mut since_deflation = 0;
    let mut hi = n.saturating_sub(1);
    let hnorm = h.norm_max().max(f64::MIN_POSITIVE);
    while hi > 0 {
        for k in (1..=hi).rev() {
            let mut scale = h[(k, k)].norm() + h[(k - 1, k - 1)].norm();
            if scale <= eps * hnorm {
                // near-zero diagonal: fall back to the matrix scale
                scale = hnorm;
            }
            if h[(k, k - 1)].norm() <= eps * scale {
                h[(k, k - 1)] = ZERO;
            }
        }
        let mut l = hi;
        while l > 0 && h[(l, l - 1)] != ZERO {
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iter += 1;
        since_deflation += 1;
        if iter > max_iter {
            return Err(Error::NoConvergence { iterations: max_iter });
        }

        let (a11, a12, a21, a22) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
        let mut mu = {
            let tr2 = (a11 + a22) * 0.5;
            let disc = ((a11 - a22) * 0.5 * ((a11 - a22) * 0.5) + a12 * a21).sqrt();
            let l1 = tr2 + disc;
            let l2 = tr2 - disc;
            if (l1 - a22).norm() < (l2 - a22).norm() {
                l1
            } else {
                l2
            }
        };
        if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            mu = a22 + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0);
        }

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in 0..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            for m in [&mut h, &mut q] {
                for i in 0..n {
                    let x = m[(i, k)];
                    let y = m[(i, k + 1)];
                    m[(i, k)] = x * c + y * s.conj();
                    m[(i, k + 1)] = -x * s + y * c;
                }
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { q, t: h })
}

/// General eigendecomposition via the Schur form. Eigenvectors are obtained
/// by back-substitution on T; nearly equal eigenvalues are regularized so a
/// defective matrix shows up as an ill-conditioned eigenvector matrix.
pub fn eig(a: &ComplexMatrix) -> Result<Eig> {
    let n = a.require_square()?;
    let Schur { q, t } = schur(a)?;
    let small = f64::EPSILON * t.norm_max().max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lk = t[(k, k)];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let s: C64 = (j + 1..=k).map(|m| t[(j, m)] * y[(m, k)]).sum();
            let mut den = t[(j, j)] - lk;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            y[(j, k)] = -s / den;
        }
    }
    let mut vectors = &q * &y;
    for k in 0..n {
        let nrm = (0..n).map(|i| vectors[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            vectors[(i, k)] /= nrm;
        }
    }
    let values = (0..n).map(|k| t[(k, k)]).collect();
    Ok(Eig { values, vectors })
}

/// ‖V‖₁·‖V⁻¹‖₁, infinite if V is singular.
pub fn condition_number(v: &ComplexMatrix) -> f64 {
    match inverse(v) {
        Ok(inv) if inv.all_finite() => v.norm_one() * inv.norm_one(),
        _ => f64::INFINITY,
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.require_square()?;
    let norm = m.norm_one();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m.scale_real(0.5_f64.powi(s));
    let b = PADE13;
    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> ComplexMatrix {
        let mut r = a6.scale_real(c6);
        r.axpy(C64::new(c4, 0.0), &a4);
        r.axpy(C64::new(c2, 0.0), &a2);
        r.axpy(C64::new(c0, 0.0), &id);
        r
    };
    let u_inner = {
        let mut r = &a6 * &lin(b[13], b[11], b[9], 0.0);
        r += &lin(b[7], b[5], b[3], b[1]);
        r
    };
    let u = &a * &u_inner;
    let mut v = &a6 * &lin(b[12], b[10], b[8], 0.0);
    v += &lin(b[6], b[4], b[2], b[0]);
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues in `[-clamp_tol, 0)` are set to zero.
pub fn psd_sqrt(rho: &ComplexMatrix, clamp_tol: f64) -> Result<ComplexMatrix> {
    psd_sqrt_with_clamp(rho, clamp_tol).map(|(r, _)| r)
}

/// Like [`psd_sqrt`], also returning the magnitude of the largest clamped
/// eigenvalue (zero when nothing was clamped).
pub fn psd_sqrt_with_clamp(rho: &ComplexMatrix, clamp_tol: f64) -> Result<(ComplexMatrix, f64)> {
    let e = herm_eig(rho, HERMITIAN_TOL.max(1e-9 * rho.norm_max()))?;
    let min = e.values.first().copied().unwrap_or(0.0);
    if min < -clamp_tol {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let clamped = if min < 0.0 { -min } else { 0.0 };
    Ok((e.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)), clamped))
}
