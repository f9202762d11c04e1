//! Bath correlation functions C(s), s ≥ 0, and the time integrals of them
//! the generators need.

use crate::error::{Error, Result};
use crate::numeric::matrix::{C64, I, ZERO};

/// Relative size of the last sample a sampled kernel may have.
pub const SAMPLED_TAIL_TOL: f64 = 1e-6;

/// (1 − e^{−zt})/z, continuous at z = 0.
pub fn e_fn(z: C64, t: f64) -> C64 {
    let w = z * t;
    if w.norm() < 0.1 {
        // t · Σ (−w)^k/(k+1)!
        let mut term = C64::new(t, 0.0);
        let mut sum = term;
        for k in 1..16 {
            term *= -w / (k as f64 + 1.0);
            sum += term;
        }
        sum
    } else {
        (1.0 - (-w).exp()) / z
    }
}

/// One term c·e^{−κs}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub c: C64,
    pub kappa: C64,
}

/// Uniformly sampled kernel with samples at s = k·dt, k = 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    dt: f64,
    values: Vec<C64>,
    tail_rate: Option<C64>,
}

impl SampledKernel {
    pub fn new(dt: f64, values: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("sample spacing must be positive, got {dt}")));
        }
        if values.len() < 4 {
            return Err(Error::InvalidArgument("sampled kernel needs at least 4 samples".into()));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("sampled kernel has non-finite values".into()));
        }
        let n = values.len();
        let (last, prev) = (values[n - 1], values[n - 2]);
        let tail_rate = if last == ZERO || prev == ZERO {
            None
        } else {
            let k = -(last / prev).ln() / dt;
            (k.re > 0.0).then_some(k)
        };
        Ok(Self { dt, values, tail_rate })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn t_end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Cubic interpolation through the four nearest samples inside the grid,
    /// exponential tail beyond.
    pub fn eval(&self, s: f64) -> C64 {
        let t_end = self.t_end();
        if s >= t_end {
            let last = *self.values.last().unwrap();
            return match self.tail_rate {
                Some(k) => last * (-k * (s - t_end)).exp(),
                None if s == t_end => last,
                None => ZERO,
            };
        }
        let x = s / self.dt;
        let k = x.floor() as usize;
        let start = k.saturating_sub(1).min(self.values.len() - 4);
        let mut acc = ZERO;
        for a in 0..4 {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (x - (start + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc += self.values[start + a] * l;
        }
        acc
    }

    /// ∫ₐᵇ e^{−iνs} C(s) ds with both ends inside the sampled range.
    fn simpson(&self, nu: f64, a: f64, b: f64) -> C64 {
        if b <= a {
            return ZERO;
        }
        let mut n = (2.0 * (b - a) / self.dt).ceil() as usize;
        n = n.max(2);
        if n % 2 == 1 {
            n += 1;
        }
        let h = (b - a) / n as f64;
        let f = |s: f64| (-I * nu * s).exp() * self.eval(s);
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * (h / 3.0)
    }

    fn tail_from(&self, nu: f64, len: f64) -> C64 {
        let t_end = self.t_end();
        match self.tail_rate {
            Some(k) => *self.values.last().unwrap() * (-I * nu * t_end).exp() * e_fn(k + I * nu, len),
            None => ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationKernel {
    Zero,
    Exponential(Vec<ExpTerm>),
    Sampled(SampledKernel),
}

impl CorrelationKernel {
    pub fn exponential(c: C64, kappa: C64) -> Self {
        CorrelationKernel::Exponential(vec![ExpTerm { c, kappa }])
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CorrelationKernel::Zero => true,
            CorrelationKernel::Exponential(terms) => terms.iter().all(|t| t.c == ZERO),
            CorrelationKernel::Sampled(s) => s.values.iter().all(|z| *z == ZERO),
        }
    }

    pub fn eval(&self, s: f64) -> C64 {
        match self {
            CorrelationKernel::Zero => ZERO,
            CorrelationKernel::Exponential(terms) => terms.iter().map(|e| e.c * (-e.kappa * s).exp()).sum(),
            CorrelationKernel::Sampled(k) => k.eval(s),
        }
    }

    pub fn is_integrable(&self) -> bool {
        match self {
            CorrelationKernel::Zero => true,
            CorrelationKernel::Exponential(terms) => terms.iter().all(|e| e.c == ZERO || e.kappa.re > 0.0),
            CorrelationKernel::Sampled(k) => {
                let first = k.values[0].norm();
                let last = k.values.last().unwrap().norm();
                last <= SAMPLED_TAIL_TOL * first || (first == 0.0 && last == 0.0)
            }
        }
    }

    /// ∫₀^∞ |C(s)| ds, or infinity when the kernel does not decay.
    pub fn abs_integral(&self) -> f64 {
        if !self.is_integrable() {
            return f64::INFINITY;
        }
        match self {
            CorrelationKernel::Zero => 0.0,
            CorrelationKernel::Exponential(terms) => {
                let live: Vec<&ExpTerm> = terms.iter().filter(|e| e.c != ZERO).collect();
                match live.len() {
                    0 => 0.0,
                    1 => live[0].c.norm() / live[0].kappa.re,
                    _ => {
                        let slowest = live.iter().map(|e| e.kappa.re).fold(f64::INFINITY, f64::min);
                        let fastest = live.iter().map(|e| e.kappa.norm()).fold(0.0, f64::max);
                        let t_max = 40.0 / slowest;
                        let n = ((t_max * fastest * 50.0).ceil() as usize).clamp(2000, 2_000_000) & !1;
                        simpson_real(|s| self.eval(s).norm(), 0.0, t_max, n)
                    }
                }
            }
            CorrelationKernel::Sampled(k) => {
                let n = (2 * (k.values.len() - 1)).max(2);
                let body = simpson_real(|s| k.eval(s).norm(), 0.0, k.t_end(), n);
                let tail = match k.tail_rate {
                    Some(r) => k.values.last().unwrap().norm() / r.re,
                    None => 0.0,
                };
                body + tail
            }
        }
    }

    /// Γ(ν; t) = ∫₀ᵗ e^{−iνs} C(s) ds
    pub fn gamma_finite(&self, nu: f64, t: f64) -> C64 {
        if t <= 0.0 {
            return ZERO;
        }
        match self {
            CorrelationKernel::Zero => ZERO,
            CorrelationKernel::Exponential(terms) => terms.iter().map(|e| e.c * e_fn(e.kappa + I * nu, t)).sum(),
            CorrelationKernel::Sampled(k) => {
                let t_end = k.t_end();
                if t <= t_end {
                    k.simpson(nu, 0.0, t)
                } else {
                    k.simpson(nu, 0.0, t_end) + k.tail_from(nu, t - t_end)
                }
            }
        }
    }

    /// Γ(ν) = ∫₀^∞ e^{−iνs} C(s) ds
    pub fn gamma_inf(&self, nu: f64) -> C64 {
        match self {
            CorrelationKernel::Zero => ZERO,
            CorrelationKernel::Exponential(terms) => terms.iter().map(|e| e.c / (e.kappa + I * nu)).sum(),
            CorrelationKernel::Sampled(k) => {
                let body = k.simpson(nu, 0.0, k.t_end());
                match k.tail_rate {
                    Some(r) => body + *k.values.last().unwrap() * (-I * nu * k.t_end()).exp() / (r + I * nu),
                    None => body,
                }
            }
        }
    }

    /// ∫₀ᵗ (e^{−iΩs} Γ(ν; s) − [secular]·Γ(ν)) ds, where the secular flag
    /// means Ω is treated as exactly zero.
    pub fn phi_weight(&self, nu: f64, big_omega: f64, secular: bool, t: f64) -> C64 {
        if t <= 0.0 {
            return ZERO;
        }
        match self {
            CorrelationKernel::Zero => ZERO,
            CorrelationKernel::Exponential(terms) => terms
                .iter()
                .map(|e| {
                    let z = e.kappa + I * nu;
                    if secular {
                        -(e.c / z) * e_fn(z, t)
                    } else {
                        let w = I * big_omega;
                        (e.c / z) * (e_fn(w, t) - e_fn(w + z, t))
                    }
                })
                .sum(),
            CorrelationKernel::Sampled(_) => {
                let omega = if secular { 0.0 } else { big_omega };
                let g_inf = if secular { self.gamma_inf(nu) } else { ZERO };
                let scale = match self {
                    CorrelationKernel::Sampled(k) => k.dt,
                    _ => unreachable!(),
                };
                let mut n = ((2.0 * t / scale).ceil() as usize).max(64);
                if n % 2 == 1 {
                    n += 1;
                }
                let h = t / n as f64;
                let f = |s: f64| (-I * nu * s).exp() * self.eval(s);
                // cumulative Γ(ν; s_k) by panel-wise Simpson
                let mut gam = Vec::with_capacity(n + 1);
                gam.push(ZERO);
                let mut acc = ZERO;
                for k in 0..n {
                    let a = k as f64 * h;
                    acc += (f(a) + 4.0 * f(a + h / 2.0) + f(a + h)) * (h / 6.0);
                    gam.push(acc);
                }
                let g = |k: usize| (-I * omega * (k as f64 * h)).exp() * gam[k] - g_inf;
                let mut total = g(0) + g(n);
                for k in 1..n {
                    total += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k);
                }
                total * (h / 3.0)
            }
        }
    }
}

fn simpson_real(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled_from(kernel: &CorrelationKernel, dt: f64, t_end: f64) -> CorrelationKernel {
        let n = (t_end / dt).round() as usize;
        let values = (0..=n).map(|k| kernel.eval(k as f64 * dt)).collect();
        CorrelationKernel::Sampled(SampledKernel::new(dt, values).unwrap())
    }

    #[test]
    fn e_fn_is_continuous_across_the_series_switch() {
        let t = 2.0;
        for z in [C64::new(0.0499, 0.0), C64::new(0.0501, 0.0), C64::new(0.0, 0.0499), C64::new(0.03, -0.03)] {
            let direct = (1.0 - (-z * t).exp()) / z;
            assert!((e_fn(z, t) - direct).norm() < 1e-13);
        }
        assert_eq!(e_fn(ZERO, 3.0), C64::new(3.0, 0.0));
    }

    #[test]
    fn unit_exponential_integrals() {
        let k = CorrelationKernel::exponential(C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        assert!((k.gamma_inf(0.0) - 1.0).norm() < 1e-15);
        assert!((k.abs_integral() - 1.0).abs() < 1e-15);
        assert!(k.is_integrable());
        let flat = CorrelationKernel::exponential(C64::new(1.0, 0.0), C64::new(0.0, 2.0));
        assert!(!flat.is_integrable());
        assert_eq!(flat.abs_integral(), f64::INFINITY);
    }

    #[test]
    fn sampled_kernel_reproduces_closed_forms() {
        let exact = CorrelationKernel::exponential(C64::new(2.5, 0.0), C64::new(5.0, 10.0));
        let sampled = sampled_from(&exact, 0.005, 4.0);
        assert!(sampled.is_integrable());
        for nu in [-10.0, 0.0, 3.0] {
            assert!((sampled.gamma_inf(nu) - exact.gamma_inf(nu)).norm() < 1e-6);
            assert!((sampled.gamma_finite(nu, 0.37) - exact.gamma_finite(nu, 0.37)).norm() < 1e-6);
            for (om, sec) in [(0.0, true), (7.0, false)] {
                let a = sampled.phi_weight(nu, om, sec, 1.3);
                let b = exact.phi_weight(nu, om, sec, 1.3);
                assert!((a - b).norm() < 1e-6, "nu {nu} omega {om}: {a} vs {b}");
            }
        }
        assert!((sampled.abs_integral() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn truncated_sampled_kernel_is_not_integrable() {
        let exact = CorrelationKernel::exponential(C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        assert!(!sampled_from(&exact, 0.01, 5.0).is_integrable());
    }

    #[test]
    fn multi_term_abs_integral() {
        let k = CorrelationKernel::Exponential(vec![
            ExpTerm { c: C64::new(1.0, 0.0), kappa: C64::new(1.0, 0.0) },
            ExpTerm { c: C64::new(1.0, 0.0), kappa: C64::new(2.0, 0.0) },
        ]);
        assert!((k.abs_integral() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn phi_weight_is_integral_of_finite_transform() {
        let k = CorrelationKernel::exponential(C64::new(0.7, 0.2), C64::new(1.5, -2.0));
        let (nu, om, t) = (1.2, -3.0, 2.0);
        let n = 4000;
        let h = t / n as f64;
        let mut acc = ZERO;
        for j in 0..n {
            let s = (j as f64 + 0.5) * h;
            acc += (-I * om * s).exp() * k.gamma_finite(nu, s) * h;
        }
        assert!((acc - k.phi_weight(nu, om, false, t)).norm() < 1e-6);
    }
}
