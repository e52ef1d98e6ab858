//! Adaptive Gauss-Legendre quadrature on finite intervals, for real and
//! complex integrands. Rules come from `gauss-quad`.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

const ORDER: usize = 15;
const MAX_DEPTH: u32 = 48;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(ORDER.try_into().expect("nonzero order"))
            .as_node_weight_pairs()
            .to_vec()
    })
}

pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

fn panel<T: Scalar>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> T {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut acc = T::zero();
    for &(x, w) in rule() {
        acc = acc + f(mid + half * x) * w;
    }
    acc * half
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Integrates `f` over `[a, b]` until each panel's two-level difference falls
/// below `max(abs_tol·width/(b-a), rel_tol·|panel|)`.
pub fn adaptive<T: Scalar>(f: impl Fn(f64) -> T, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quadrature<T> {
    let total_width = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut stack = vec![(a, b, panel(&f, a, b), 0u32)];
    let mut value = T::zero();
    let mut error = 0.0;
    let mut evaluations = ORDER;
    let mut converged = true;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&f, lo, mid);
        let right = panel(&f, mid, hi);
        evaluations += 2 * ORDER;
        let refined = left + right;
        let diff = (refined - whole).magnitude();
        let allowed = (abs_tol * (hi - lo).abs() / total_width).max(rel_tol * refined.magnitude());
        if diff <= allowed || depth >= MAX_DEPTH {
            if diff > allowed {
                converged = false;
            }
            value = value + refined;
            error += diff;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Quadrature { value, error_estimate: error, evaluations, converged }
}

/// Real-valued convenience wrapper returning only the value.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    adaptive(f, a, b, abs_tol, 1e-14).value
}

/// Sums `f` over `[a, b]` split into `panels` equal fixed-order panels.
pub fn composite<T: Scalar>(f: impl Fn(f64) -> T, a: f64, b: f64, panels: usize) -> T {
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for k in 0..panels {
        let lo = a + k as f64 * h;
        acc = acc + panel(&f, lo, lo + h);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let v = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-14);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn complex_oscillatory() {
        let q = adaptive(|x: f64| Complex64::new(0.0, 3.0 * x).exp(), 0.0, 2.0, 1e-13, 1e-14);
        let exact = (Complex64::new(0.0, 6.0).exp() - 1.0) / Complex64::new(0.0, 3.0);
        assert!((q.value - exact).norm() < 1e-13);
        assert!(q.converged);
    }
}
