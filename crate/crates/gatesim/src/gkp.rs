//! Closed-form grid-state error models and their quadrature counterparts.
//!
//! `κ²` is the envelope parameter (`1/√(L/C)` for the ground state) and `Δ²`
//! the peak width (`1/√(J₀C)`).

use crate::error::{invalid, Result};
use crate::qmgrid::{Fourier, MomentumWave};
use crate::quad;
use crate::special::dawson;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridStateParams {
    pub kappa2: f64,
    pub delta2: f64,
}

impl GridStateParams {
    /// Ground-state grid for `l = √(L/C)`, `j = √(J₀C)`.
    pub fn ground(l: f64, j: f64) -> Self {
        Self { kappa2: 1.0 / l, delta2: 1.0 / j }
    }

    /// Warnings when either width is not small.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.kappa2 > 0.1 {
            w.push(format!("kappa2 = {} is not small; code estimates are unreliable", self.kappa2));
        }
        if self.delta2 > 0.1 {
            w.push(format!("delta2 = {} is not small; code estimates are unreliable", self.delta2));
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub re_eta: f64,
    pub im_eta: f64,
    pub abs_eta: f64,
    pub kappa_bar2: f64,
}

impl EtaEstimate {
    fn new(re_eta: f64, im_eta: f64, kappa_bar2: f64) -> Self {
        Self { re_eta, im_eta, abs_eta: re_eta.hypot(im_eta), kappa_bar2 }
    }
}

/// `I(α) = ∫₀^∞ e^{−x²} sin(αx) dx`, equal to Dawson's integral at `α/2`.
pub fn sine_gaussian_integral(alpha: f64) -> f64 {
    dawson(0.5 * alpha)
}

/// `κ̄² = κ²(1 + ε²/(π²κ⁴))`.
pub fn kappa_bar2(kappa2: f64, epsilon: f64) -> f64 {
    kappa2 * (1.0 + epsilon * epsilon / (PI * PI * kappa2 * kappa2))
}

/// Gaussian overrotation error:
/// `Re η = 4√(κ̄²/π)e^{−1/4κ̄²}`, `Im η = −(4/√π)e^{−1/4κ̄²} I(ε/(πκ̄κ²))`.
pub fn eta_overrotation(kappa2: f64, epsilon: f64) -> Result<EtaEstimate> {
    if !(kappa2 > 0.0) {
        return invalid(format!("kappa2 = {kappa2} must be positive"));
    }
    let kb2 = kappa_bar2(kappa2, epsilon);
    let damp = (-0.25 / kb2).exp();
    let re = 4.0 * (kb2 / PI).sqrt() * damp;
    let arg = epsilon / (PI * kb2.sqrt() * kappa2);
    let im = -4.0 / PI.sqrt() * damp * sine_gaussian_integral(arg);
    Ok(EtaEstimate::new(re, im, kb2))
}

/// `|η(0)|` for the ground state of an oscillator with `√(L/C) = l`.
pub fn eta_ground(l: f64) -> Result<f64> {
    Ok(eta_overrotation(1.0 / l, 0.0)?.abs_eta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitedEta {
    pub value: f64,
    /// `|η(n)|/|η(0)| = lⁿ/(2ⁿ n!)`.
    pub ratio: f64,
    pub warning: Option<String>,
}

/// `|η(n)| = (1/(2ⁿ n!))·(L/C)^{n/2}·|η(0)|`.
pub fn eta_excited(n: u32, l: f64) -> Result<ExcitedEta> {
    if !(l > 0.0) {
        return invalid(format!("l = {l} must be positive"));
    }
    let nf = f64::from(n);
    let ln_ratio = nf * (0.5 * l).ln() - statrs::function::gamma::ln_gamma(nf + 1.0);
    let ratio = if n == 0 { 1.0 } else { ln_ratio.exp() };
    let warning = (nf > 0.1 * l).then(|| format!("n = {n} is not small compared with l = {l}"));
    Ok(ExcitedEta { value: ratio * eta_ground(l)?, ratio, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEta {
    pub value: f64,
    /// Enhancement over `|η(0)|`.
    pub factor: f64,
}

/// `(1 − e^{−x})·exp(½·l·e^{−x})·|η(0)|` with `x = β_T/√(LC)`.
pub fn eta_thermal(beta_t: f64, l: f64) -> Result<ThermalEta> {
    if !(beta_t > 0.0) {
        return invalid(format!("beta_t = {beta_t} must be positive"));
    }
    let x = beta_t / l;
    let factor = -(-x).exp_m1() * (0.5 * l * (-x).exp()).exp();
    Ok(ThermalEta { value: factor * eta_ground(l)?, factor })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicErrors {
    /// `erfc(π/2Δ)`: two-sided Gaussian tail of the φ peak beyond π/2.
    pub p_bitflip: f64,
    /// `(2Δ/π^{3/2})·e^{−π²/4Δ²}`.
    pub p_bitflip_asymptotic: f64,
    /// `2√(κ²/π)·e^{−1/4κ²}`.
    pub p_phase: f64,
    /// `erfc(1/2κ)`: the two-sided Q tail beyond ½ itself.
    pub p_phase_exact: f64,
}

pub fn intrinsic_errors(gp: &GridStateParams) -> Result<IntrinsicErrors> {
    if !(gp.kappa2 > 0.0) || !(gp.delta2 > 0.0) {
        return invalid("kappa2 and delta2 must be positive");
    }
    let delta = gp.delta2.sqrt();
    let kappa = gp.kappa2.sqrt();
    let x = PI / (2.0 * delta);
    Ok(IntrinsicErrors {
        p_bitflip: erfc(x),
        p_bitflip_asymptotic: 2.0 * delta / PI.powf(1.5) * (-x * x).exp(),
        p_phase: 2.0 * (gp.kappa2 / PI).sqrt() * (-0.25 / gp.kappa2).exp(),
        p_phase_exact: erfc(0.5 / kappa),
    })
}

/// Re η and Im η by quadrature for a sampled narrow function `F(Q)`.
///
/// `F_ε` is built by Fourier transforming to φ, applying `e^{−iεφ²/2π}` and
/// transforming back. Then `Re η = 2∫_{|Q|>½}|F_ε|²` and
/// `Im η = 4 Im ∫₀^∞ Odd[F_ε(Q+½)* F_ε(Q−½)]`, both by trapezoid sums with
/// Euler-Maclaurin end corrections. The grid must place `Q = ±½` on samples,
/// i.e. `phi_max` must be an even multiple of π.
pub fn eta_from_envelope(f: &MomentumWave, epsilon: f64) -> Result<EtaEstimate> {
    let grid = f.grid;
    if grid.periods() % 2 != 0 {
        return invalid("eta_from_envelope needs phi_max to be an even multiple of π");
    }
    let norm = f.norm_sqr();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
        return invalid(format!("F is not normalized (∫|F|² = {norm})"));
    }
    let fourier = Fourier::new(grid);
    let mut broad = fourier.to_position(&f.amps);
    for (i, b) in broad.iter_mut().enumerate() {
        let phi = grid.phi(i);
        *b *= Complex64::from_polar(1.0, -epsilon * phi * phi / (2.0 * PI));
    }
    let fe = fourier.to_momentum(&broad);
    let h = grid.dq();
    let n = grid.n_points();
    let zero = n / 2;
    let half = (grid.periods() / 2) as usize;

    let density: Vec<f64> = fe.iter().map(|a| a.norm_sqr()).collect();
    let upper = tail_integral(&density, zero + half, 1, h);
    let lower = tail_integral(&density, zero - half, -1, h);
    let re = 2.0 * (upper + lower);

    // Odd part of G(Q) = F_ε(Q+½)* F_ε(Q−½) on k ≥ 0 samples.
    let g = |k: i64| -> Complex64 {
        let idx = |m: i64| -> Complex64 {
            if m < 0 || m >= n as i64 {
                Complex64::new(0.0, 0.0)
            } else {
                fe[m as usize]
            }
        };
        let z = zero as i64;
        idx(z + k + half as i64).conj() * idx(z + k - half as i64)
    };
    let odd = |k: i64| -> f64 { 0.5 * (g(k) - g(-k)).im };
    let kmax = (n / 2 - 1) as i64;
    let mut tsum = 0.0;
    for k in 1..=kmax {
        tsum += odd(k);
    }
    let (f1, f2) = (odd(1), odd(2));
    let d1 = (16.0 * f1 - 2.0 * f2) / (12.0 * h);
    let d3 = (f2 - 2.0 * f1) / (h * h * h);
    let im_int = h * tsum + h * h / 12.0 * d1 - h.powi(4) / 720.0 * d3;
    let im = 4.0 * im_int;
    Ok(EtaEstimate::new(re, im, kappa_bar2(2.0 * f.expect_q2(), epsilon)))
}

/// `∫` of sampled `f` from sample `start` outward in direction `dir` to the
/// grid edge, with the trapezoid rule and Euler-Maclaurin end corrections at
/// the start point.
fn tail_integral(f: &[f64], start: usize, dir: i64, h: f64) -> f64 {
    let at = |off: i64| -> f64 {
        let i = start as i64 + dir * off;
        if i < 0 || i >= f.len() as i64 {
            0.0
        } else {
            f[i as usize]
        }
    };
    let mut t = 0.5 * at(0);
    let mut off = 1;
    loop {
        let i = start as i64 + dir * off;
        if i < 0 || i >= f.len() as i64 {
            break;
        }
        t += f[i as usize];
        off += 1;
    }
    // derivatives along the integration direction at the start point
    let d1 = (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h);
    let d3 = (at(2) - 2.0 * at(1) + 2.0 * at(-1) - at(-2)) / (2.0 * h * h * h);
    h * t + h * h / 12.0 * d1 - h.powi(4) / 720.0 * d3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// Largest magnitude of the last terms kept in either truncated sum.
    pub tail_estimate: f64,
}

impl PoissonCheck {
    pub fn truncation_warning(&self) -> Option<String> {
        (self.tail_estimate > 1e-10).then(|| format!("truncation tail {:.3e} exceeds 1e-10", self.tail_estimate))
    }
}

/// Both sides of
/// `Σ_m F(Q−2m)e^{iπ(Q−2m)α} = √(π/2)·Σ_n e^{−iπQn} F̃(π(n+α))`,
/// with `F` obtained from `F̃` by adaptive quadrature of the Fourier integral.
pub fn poisson_check(f_tilde: impl Fn(f64) -> Complex64, q: f64, alpha: f64) -> PoissonCheck {
    let (reach, peak) = support_radius(&f_tilde);
    let abs_tol = 1e-14 * peak * reach;
    let f_of = |x: f64| -> Complex64 {
        let r = quad::adaptive(|phi: f64| Complex64::from_polar(1.0, -x * phi) * f_tilde(phi), -reach, reach, abs_tol, 1e-15);
        r.value / (2.0 * PI).sqrt()
    };
    let (lhs, tail_l) = symmetric_sum(abs_tol, |m| {
        let x = q - 2.0 * m as f64;
        f_of(x) * Complex64::from_polar(1.0, PI * x * alpha)
    });
    let (rhs, tail_r) = symmetric_sum(0.0, |n| Complex64::from_polar(1.0, -PI * q * n as f64) * f_tilde(PI * (n as f64 + alpha)));
    PoissonCheck { lhs, rhs: rhs * (PI / 2.0).sqrt(), tail_estimate: tail_l.max(tail_r) }
}

/// Radius beyond which `|F̃|` is below 1e-18 of its sampled maximum, and
/// that maximum.
fn support_radius(f: &impl Fn(f64) -> Complex64) -> (f64, f64) {
    let probe = |r: f64| f(r).norm().max(f(-r).norm());
    let peak = (0..=400).map(|i| probe(0.05 * i as f64)).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let mut r = 1.0;
    while r < 1e4 && (probe(r) > 1e-18 * peak || probe(0.5 * r) > 1e-18 * peak) {
        r *= 1.5;
    }
    (r, peak)
}

/// `Σ_{k∈ℤ} term(k)` truncated once four consecutive terms on each side are
/// negligible against the largest term seen or below `floor`.
fn symmetric_sum(floor: f64, term: impl Fn(i64) -> Complex64) -> (Complex64, f64) {
    let mut sum = term(0);
    let mut quiet = 0;
    let mut last = 0.0f64;
    let mut largest = sum.norm();
    let mut k = 1;
    while k < 100_000 {
        let a = term(k);
        let b = term(-k);
        sum += a + b;
        last = a.norm().max(b.norm());
        largest = largest.max(last);
        if last <= (1e-16 * largest).max(floor) || last < 1e-300 {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        k += 1;
    }
    (sum, last)
}

/// `prefactor·(τ_J/L)·(L/C)^{1/4}`. Only the scaling is fixed; the prefactor is a free input.
pub fn squeezing_shift(tau_j: f64, l: f64, prefactor: f64) -> Result<f64> {
    if !(tau_j > 0.0) || !(l > 0.0) {
        return invalid("tau_j and l must be positive");
    }
    Ok(prefactor * tau_j / (l * l) * l.sqrt())
}

/// `ε_eq = 2√15·λ·L·√(L/C)`, the overrotation equivalent of `λφ⁴`.
pub fn anharmonic_equiv_epsilon(lambda: f64, l: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !(l > 0.0) {
        return invalid("lambda must be non-negative and l positive");
    }
    Ok(2.0 * 15f64.sqrt() * lambda * l.powi(3))
}
