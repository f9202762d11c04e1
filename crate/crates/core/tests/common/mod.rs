#![allow(dead_code)]

use rand::Rng;
use rgq_core::numeric::matrix::{ComplexMatrix, C64};
use rgq_core::open_system::{BathModel, CorrelationKernel, OpenSystem, SystemModel};

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(rng, n);
    (&m + &m.adjoint()).scale_real(0.5)
}

/// Random unitary e^{iH}.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let h = random_hermitian(rng, n);
    rgq_core::numeric::expm(&h.scale(C64::new(0.0, 2.0))).unwrap()
}

/// Random qubit state from a Bloch vector in the unit ball.
pub fn random_qubit(rng: &mut impl Rng) -> ComplexMatrix {
    let (x, y, z) = loop {
        let v: (f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.0 * v.0 + v.1 * v.1 + v.2 * v.2 <= 1.0 {
            break v;
        }
    };
    ComplexMatrix::new(2, 2, vec![
        C64::new((1.0 + z) / 2.0, 0.0),
        C64::new(x / 2.0, -y / 2.0),
        C64::new(x / 2.0, y / 2.0),
        C64::new((1.0 - z) / 2.0, 0.0),
    ])
    .unwrap()
}

/// Random model with Hermitian couplings and diagonal exponential kernels.
/// `positive` forces real positive amplitudes, which give nonnegative rates.
pub fn random_model(rng: &mut impl Rng, d: usize, positive: bool) -> OpenSystem {
    let h = random_hermitian(rng, d).scale_real(3.0);
    let n = rng.gen_range(1..=2);
    let couplings: Vec<ComplexMatrix> = (0..n).map(|_| random_hermitian(rng, d)).collect();
    let lambda = rng.gen_range(0.2..1.0);
    let sys = SystemModel::new(h, couplings, lambda).unwrap();
    let mut bath = BathModel::new((0..n).collect()).unwrap();
    for i in 0..n {
        let c = if positive {
            C64::new(rng.gen_range(0.2..2.0), 0.0)
        } else {
            C64::new(rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..1.0))
        };
        let kappa = C64::new(rng.gen_range(0.5..3.0), rng.gen_range(-3.0..3.0));
        bath = bath.with_kernel(i, i, CorrelationKernel::exponential(c, kappa)).unwrap();
    }
    OpenSystem::new(sys, bath).unwrap()
}
