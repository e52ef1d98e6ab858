//! Two-level Landau-Zener model of band transitions during the pulse ramps.
//!
//! The model Hamiltonian is `H(t) = −u σ^Z − e^t σ^X`; the system starts in
//! `|0⟩` at `t → −∞` and `P(0→−)` is the population left in the excited state
//! `|−⟩` at `t → +∞`.

use crate::error::{invalid, Error, Result};
use crate::special::gamma_complex;
use num_complex::Complex64;
use ode_solvers::{Dopri5, OutputType, System, Vector4};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzParams {
    pub u: f64,
    pub q: f64,
    pub tau_j_eff: f64,
}

impl LzParams {
    /// Band crossing at Bloch momentum `q`: `u = (½ − q)·τ_J^eff/2C` with `C = 1`.
    pub fn band(q: f64, tau_j_eff: f64) -> Result<Self> {
        if !(q.abs() <= 0.5) {
            return invalid(format!("Bloch momentum q = {q} outside [-1/2, 1/2]"));
        }
        if !(tau_j_eff >= 0.0) {
            return invalid(format!("tau_j_eff = {tau_j_eff} must be non-negative"));
        }
        Ok(Self { u: (0.5 - q) * tau_j_eff / 2.0, q, tau_j_eff })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LzResult {
    pub p_transition: f64,
    /// Row-major `[[f(u), f(−u)], [f(−u)*, −f(u)*]]`.
    pub s_matrix: [[Complex64; 2]; 2],
}

impl LzResult {
    /// Largest entry of `|S S† − 1|`.
    pub fn unitarity_error(&self) -> f64 {
        let s = &self.s_matrix;
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let dot: Complex64 = (0..2).map(|k| s[r][k] * s[c][k].conj()).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).norm());
            }
        }
        worst
    }
}

/// `P(0→−) = ½(1 − tanh πu)`.
pub fn lz_probability(u: f64) -> f64 {
    // 1 − tanh x = 2/(e^{2x} + 1) keeps the large-u tail accurate
    1.0 / ((2.0 * PI * u).exp() + 1.0)
}

/// `f(u) = (1/√2π)·2^{iu}·Γ(½ + iu)·e^{πu/2}`.
pub fn lz_amplitude(u: f64) -> Complex64 {
    let two_iu = Complex64::from_polar(1.0, u * std::f64::consts::LN_2);
    two_iu * gamma_complex(Complex64::new(0.5, u)) * (0.5 * PI * u).exp() / (2.0 * PI).sqrt()
}

pub fn lz_exact_smatrix(u: f64) -> Result<LzResult> {
    if !u.is_finite() {
        return invalid(format!("u = {u} must be finite"));
    }
    let fp = lz_amplitude(u);
    let fm = lz_amplitude(-u);
    Ok(LzResult { p_transition: fm.norm_sqr(), s_matrix: [[fp, fm], [fm.conj(), -fp.conj()]] })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzNumericOptions {
    /// Scaled-time window; `None` uses `[−20 − ln u, 8]`.
    pub window: Option<(f64, f64)>,
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed Dopri5 step.
    pub h_max: f64,
}

impl Default for LzNumericOptions {
    fn default() -> Self {
        Self { window: None, rtol: 1e-11, atol: 1e-13, h_max: 0.5 }
    }
}

struct TwoLevel {
    u: f64,
}

impl System<f64, Vector4<f64>> for TwoLevel {
    // ψ = (a, b) stored as (Re a, Im a, Re b, Im b); ψ' = i(uσ^Z + e^t σ^X)ψ
    fn system(&self, t: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        let x = t.exp();
        let za_re = self.u * y[0] + x * y[2];
        let za_im = self.u * y[1] + x * y[3];
        let zb_re = -self.u * y[2] + x * y[0];
        let zb_im = -self.u * y[3] + x * y[1];
        dy[0] = -za_im;
        dy[1] = za_re;
        dy[2] = -zb_im;
        dy[3] = zb_re;
    }
}

/// Mixing angle of `H(t)`: `H = −r(cos θ σ^Z + sin θ σ^X)`.
fn mixing_angle(u: f64, t: f64) -> f64 {
    t.exp().atan2(u)
}

/// Excited-state population from direct integration of the two-level
/// Schrödinger equation.
///
/// Starts in `|0⟩` and projects onto the instantaneous excited state at the
/// end of the window.
pub fn lz_numeric(u: f64, opts: &LzNumericOptions) -> Result<f64> {
    if !u.is_finite() {
        return invalid(format!("u = {u} must be finite"));
    }
    let (t0, t1) = opts.window.unwrap_or((-20.0 - u.abs().max(1e-3).ln(), 8.0));
    if !(t1 > t0) {
        return invalid(format!("empty window [{t0}, {t1}]"));
    }
    // e^{t0} ≪ |u| so |0⟩ is the t → −∞ state to O(e^{t0}/u)
    let y0 = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let mut solver = Dopri5::from_param(
        TwoLevel { u },
        t0,
        t1,
        t1 - t0,
        y0,
        opts.rtol,
        opts.atol,
        0.9,
        0.04,
        0.2,
        10.0,
        opts.h_max,
        0.0,
        5_000_000,
        1000,
        OutputType::Sparse,
    );
    solver.integrate().map_err(|e| Error::NonConvergence(format!("two-level integration failed: {e:?}")))?;
    let y = solver.y_out().last().copied().ok_or_else(|| Error::NonConvergence("no integrator output".into()))?;
    let th1 = mixing_angle(u, t1);
    let (c1, s1) = ((0.5 * th1).cos(), (0.5 * th1).sin());
    // excited state (−s, c)
    let re = -s1 * y[0] + c1 * y[2];
    let im = -s1 * y[1] + c1 * y[3];
    Ok(re * re + im * im)
}

/// Leading-order `τ_J^eff = (τ_J/2)·(ln(J₀C/(1−2q)))^{−1/2}`.
pub fn effective_ramp_time(tau_j: f64, j0c: f64, q: f64) -> Result<f64> {
    let gap = 1.0 - 2.0 * q;
    if !(gap > 0.0) || !(j0c > gap) {
        return Err(Error::Domain(format!("need 0 < 1-2q < J0C, got 1-2q = {gap}, J0C = {j0c}")));
    }
    if !(tau_j > 0.0) {
        return invalid(format!("tau_j = {tau_j} must be positive"));
    }
    Ok(0.5 * tau_j / (j0c / gap).ln().sqrt())
}

/// Uniformly sampled density `P(Q)` on `q0 + k·dq`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    pub q0: f64,
    pub dq: f64,
    pub values: Vec<f64>,
}

impl SampledDensity {
    pub fn from_fn(q0: f64, dq: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self { q0, dq, values: (0..n).map(|k| f(q0 + k as f64 * dq)).collect() }
    }

    fn q(&self, k: usize) -> f64 {
        self.q0 + k as f64 * self.dq
    }

    fn trapezoid(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let n = self.values.len();
        let mut acc = 0.0;
        for (k, &p) in self.values.iter().enumerate() {
            let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
            acc += w * p * weight(self.q(k));
        }
        acc * self.dq
    }

    fn check(&self) -> Result<()> {
        if self.values.len() < 2 || !(self.dq > 0.0) {
            return invalid("density needs at least two samples and positive spacing");
        }
        let total = self.trapezoid(|_| 1.0);
        if !total.is_finite() || (total - 1.0).abs() > 1e-6 {
            return invalid(format!("density is not normalized (integral {total})"));
        }
        Ok(())
    }
}

/// `P(|Q^fin| < ½) ≈ ∫ P(Q) tanh(π(½ − |Q|)·τ_J^eff/2) dQ`, clamped to `[0, 1]`.
pub fn final_parity_probability(density: &SampledDensity, tau_j_eff: f64) -> Result<f64> {
    density.check()?;
    if !(tau_j_eff >= 0.0) {
        return invalid(format!("tau_j_eff = {tau_j_eff} must be non-negative"));
    }
    let p = density.trapezoid(|q| (PI * (0.5 - q.abs()) * tau_j_eff / 2.0).tanh());
    Ok(p.clamp(0.0, 1.0))
}

/// `1 − P(|Q^fin| < ½)` evaluated as `∫ P·(1 − tanh)` so small values keep
/// their relative accuracy.
pub fn final_parity_error(density: &SampledDensity, tau_j_eff: f64) -> Result<f64> {
    density.check()?;
    if !(tau_j_eff >= 0.0) {
        return invalid(format!("tau_j_eff = {tau_j_eff} must be non-negative"));
    }
    let total = density.trapezoid(|_| 1.0);
    let e = density.trapezoid(|q| 2.0 / ((PI * (0.5 - q.abs()) * tau_j_eff).exp() + 1.0));
    Ok((e + (1.0 - total)).clamp(0.0, 1.0))
}
