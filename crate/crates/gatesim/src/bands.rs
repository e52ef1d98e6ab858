//! Bloch bands of `H' = Q²/2C − J cos φ` and the derived effective
//! capacitance, tunneling amplitude, WKB factors and switch coupling `J_eff`.
//!
//! Band energies are found in 320-bit arithmetic: deep in the tight-binding
//! regime the band width sits thirty orders of magnitude below the well
//! depth.

use crate::error::{invalid, Error, Result};
use crate::quad;
use dashu_float::FBig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const PRECISION: usize = 320;

/// Step of the curvature finite differences.
const CURVATURE_STEP: f64 = 1e-3;

/// Lower cut of the ν integral; `[0, Q_MIN]` is handled analytically.
const Q_MIN: f64 = 1e-4;

fn hp(x: f64) -> FBig {
    FBig::try_from(x).expect("finite value").with_precision(PRECISION).value()
}

fn to_f64(x: &FBig) -> f64 {
    x.to_f64().value()
}

/// Plane-wave cutoff `max(16, ⌈4√(JC)⌉ + 8)`.
pub fn default_cutoff(jc: f64) -> usize {
    16usize.max((4.0 * jc.sqrt()).ceil() as usize + 8)
}

/// Lowest eigenvalue of the plane-wave matrix at Bloch momentum `q`: diagonal
/// `(m + q)²/2`, off-diagonal `−J/2`, `|m| ≤ cutoff`.
#[derive(Debug, Clone)]
pub struct BandSolver {
    jc: f64,
    cutoff: usize,
    b2: FBig,
}

impl BandSolver {
    pub fn new(jc: f64, cutoff: usize) -> Result<Self> {
        if !(jc >= 0.0) || !jc.is_finite() {
            return invalid(format!("jc = {jc} must be non-negative"));
        }
        if cutoff < 8 {
            return invalid(format!("cutoff {cutoff} must be at least 8"));
        }
        let j = hp(jc);
        Ok(Self { jc, cutoff, b2: &(&j * &j) * &hp(0.25) })
    }

    pub fn jc(&self) -> f64 {
        self.jc
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn diagonal_f64(&self, q: f64) -> Vec<f64> {
        let m = self.cutoff as i64;
        (-m..=m).map(|k| 0.5 * (k as f64 + q).powi(2)).collect()
    }

    /// Sturm-count bisection in f64; seeds the refinement.
    fn seed(&self, q: f64) -> f64 {
        let d = self.diagonal_f64(q);
        let b2 = 0.25 * self.jc * self.jc;
        let below = |lam: f64| -> bool {
            let mut p = d[0] - lam;
            if p < 0.0 {
                return true;
            }
            for &di in &d[1..] {
                let pp = if p == 0.0 { f64::MIN_POSITIVE } else { p };
                p = di - lam - b2 / pp;
                if p < 0.0 {
                    return true;
                }
            }
            false
        };
        let (mut lo, mut hi) = (-self.jc - 1.0, 0.5 * q * q + 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest eigenvalue at `q` to about 90 significant digits.
    pub fn energy_hp(&self, q: f64) -> FBig {
        let m = self.cutoff as i64;
        let qh = hp(q);
        let half = hp(0.5);
        let d: Vec<FBig> = (-m..=m)
            .map(|k| {
                let t = &hp(k as f64) + &qh;
                &half * &(&t * &t)
            })
            .collect();
        if self.jc == 0.0 {
            return d.into_iter().reduce(|a, b| if b < a { b } else { a }).expect("non-empty basis");
        }
        let one = hp(1.0);
        let minus_one = hp(-1.0);
        let tiny = hp(f64::MIN_POSITIVE);
        let mut lam = hp(self.seed(q));
        let scale = 1.0 + to_f64(&lam).abs();
        for _ in 0..12 {
            // LDLᵀ pivots p_k and their λ-derivatives; det'/det = Σ p_k'/p_k
            let mut p = &d[0] - &lam;
            let mut dp = minus_one.clone();
            let mut ratio = &dp / &p;
            for dk in &d[1..] {
                if p == FBig::<dashu_float::round::mode::Zero, 2>::ZERO {
                    p = tiny.clone();
                }
                let r = &self.b2 / &p;
                let np = &(dk - &lam) - &r;
                let ndp = &minus_one + &(&(&r / &p) * &dp);
                p = np;
                dp = ndp;
                ratio = &ratio + &(&dp / &p);
            }
            let step = &one / &ratio;
            lam = &lam - &step;
            if to_f64(&step).abs() <= 1e-85 * scale {
                break;
            }
        }
        lam
    }

    pub fn energy(&self, q: f64) -> f64 {
        to_f64(&self.energy_hp(q))
    }

    /// `ε(q) − ε(ref)` with the difference taken before rounding to f64.
    pub fn offset(&self, q: f64, reference: &FBig) -> f64 {
        to_f64(&(&self.energy_hp(q) - reference))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochBand {
    pub jc: f64,
    /// `(q, ε(q))` over `[−½, ½]`.
    pub q_samples: Vec<(f64, f64)>,
    /// `ε(q) − ε(0)` for the same samples, resolved below f64 spacing of ε.
    pub offsets: Vec<f64>,
    pub basis_cutoff: usize,
}

impl BlochBand {
    /// `ε(½) − ε(0)`, or the largest sampled offset if ½ is not sampled.
    pub fn width(&self) -> f64 {
        self.offsets.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest deviation from the fit `a − 2λ cos 2πq`, relative to the width.
    pub fn cosine_fit_residual(&self) -> f64 {
        let n = self.offsets.len() as f64;
        let cs: Vec<f64> = self.q_samples.iter().map(|(q, _)| (2.0 * PI * q).cos()).collect();
        let mean_c = cs.iter().sum::<f64>() / n;
        let mean_e = self.offsets.iter().sum::<f64>() / n;
        let cov: f64 = cs.iter().zip(&self.offsets).map(|(c, e)| (c - mean_c) * (e - mean_e)).sum();
        let var: f64 = cs.iter().map(|c| (c - mean_c).powi(2)).sum();
        let slope = cov / var;
        let width = self.width();
        cs.iter()
            .zip(&self.offsets)
            .map(|(c, e)| (e - mean_e - slope * (c - mean_c)).abs())
            .fold(0.0, f64::max)
            / width
    }
}

/// Lowest band at `n_q` evenly spaced momenta in `[−½, ½]`.
///
/// `cutoff = None` uses [`default_cutoff`]. Every sample is recomputed with
/// the cutoff doubled and must agree to 1e-10.
pub fn bloch_band(jc: f64, n_q: usize, cutoff: Option<usize>) -> Result<BlochBand> {
    if n_q < 2 {
        return invalid("need at least two q samples");
    }
    let m = cutoff.unwrap_or_else(|| default_cutoff(jc));
    let solver = BandSolver::new(jc, m)?;
    let check = BandSolver::new(jc, 2 * m)?;
    let e0 = solver.energy_hp(0.0);
    let qs: Vec<f64> = (0..n_q).map(|k| -0.5 + k as f64 / (n_q - 1) as f64).collect();
    let rows: Vec<Result<(f64, f64, f64)>> = qs
        .par_iter()
        .map(|&q| {
            let e = solver.energy_hp(q);
            let e2 = check.energy(q);
            let ef = to_f64(&e);
            if (ef - e2).abs() > 1e-10 {
                return Err(Error::NonConvergence(format!("band at q = {q} moved by {:e} when doubling the cutoff {m}", (ef - e2).abs())));
            }
            Ok((q, ef, to_f64(&(&e - &e0))))
        })
        .collect();
    let mut q_samples = Vec::with_capacity(n_q);
    let mut offsets = Vec::with_capacity(n_q);
    for r in rows {
        let (q, e, off) = r?;
        q_samples.push((q, e));
        offsets.push(off);
    }
    Ok(BlochBand { jc, q_samples, offsets, basis_cutoff: m })
}

/// `C/C_eff = C·ε''(0)` from 5-point central differences at `h = 1e-3` and
/// `h/2`, combined by one Richardson step.
pub fn effective_capacitance(jc: f64) -> Result<f64> {
    let solver = BandSolver::new(jc, default_cutoff(jc))?;
    let e0 = solver.energy_hp(0.0);
    let d = |h: f64| -> f64 {
        // ε even in q: f(±h) − f(0) = δ(h)
        let d1 = solver.offset(h, &e0);
        let d2 = solver.offset(2.0 * h, &e0);
        (32.0 * d1 - 2.0 * d2) / (12.0 * h * h)
    };
    let coarse = d(CURVATURE_STEP);
    let fine = d(0.5 * CURVATURE_STEP);
    Ok((16.0 * fine - coarse) / 15.0)
}

/// Tight-binding form `32π^{3/2}(JC)^{3/4}e^{−8√(JC)}` of `C/C_eff`.
pub fn effective_capacitance_asymptote(jc: f64) -> f64 {
    32.0 * PI.powf(1.5) * jc.powf(0.75) * (-8.0 * jc.sqrt()).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tunneling {
    /// `√(J/C)`.
    pub omega: f64,
    /// `(4/√π)J^{3/4}C^{−1/4}e^{−8√(JC)}`.
    pub lambda_t: f64,
    pub warning: Option<String>,
}

pub fn tunneling_amplitude(jc: f64) -> Result<Tunneling> {
    if !(jc > 0.0) {
        return invalid(format!("jc = {jc} must be positive"));
    }
    Ok(Tunneling {
        omega: jc.sqrt(),
        lambda_t: 4.0 / PI.sqrt() * jc.powf(0.75) * (-8.0 * jc.sqrt()).exp(),
        warning: (jc < 4.0).then(|| format!("jc = {jc} is outside the tight-binding regime (jc >= 4)")),
    })
}

/// `∫₀^{2π} √(2JC(1 − cos φ)) dφ`, by quadrature.
pub fn wkb_action(jc: f64) -> f64 {
    quad::adaptive(|phi: f64| (2.0 * jc * (1.0 - phi.cos())).max(0.0).sqrt(), 0.0, 2.0 * PI, 1e-13, 1e-13).value
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbFactors {
    pub mu: f64,
    pub nu: f64,
    /// `C_eff/C`.
    pub c_eff: f64,
}

/// `μ = 2∫₀^{½}√(2C_eff δ(q)) dq` and
/// `ν = (1/√π)exp(∫₀^{½}((2C_eff δ(q))^{−1/2} − 1/q) dq)`, `δ = ε(q) − ε(0)`.
pub fn wkb_mu_nu(jc: f64) -> Result<WkbFactors> {
    let ratio = effective_capacitance(jc)?;
    if !(ratio > 0.0) {
        return Err(Error::NonConvergence(format!("non-positive band curvature {ratio:e} at jc = {jc}")));
    }
    let c_eff = 1.0 / ratio;
    let solver = BandSolver::new(jc, default_cutoff(jc))?;
    let e0 = solver.energy_hp(0.0);
    let s = |q: f64| -> f64 { (2.0 * c_eff * solver.offset(q, &e0)).max(0.0).sqrt() };
    let mu_q = quad::adaptive(|q| s(q), 0.0, 0.5, 1e-12, 1e-10);
    let h = |q: f64| -> f64 { 1.0 / s(q) - 1.0 / q };
    // h vanishes linearly at q = 0
    let nu_q = quad::adaptive(h, Q_MIN, 0.5, 1e-11, 1e-10);
    if !mu_q.converged || !nu_q.converged || !nu_q.value.is_finite() {
        return Err(Error::NonConvergence(format!("WKB quadrature failed at jc = {jc}")));
    }
    let head = 0.5 * Q_MIN * h(Q_MIN);
    Ok(WkbFactors { mu: 2.0 * mu_q.value, nu: (nu_q.value + head).exp() / PI.sqrt(), c_eff })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JEffRegime {
    /// `JC < (L/C)^{−1/4}`: `J_eff = J e^{−¼√(L/C)}`.
    Weak,
    /// `J_eff = ν C_eff^{−3/4} L^{−1/4} e^{−μ√(L/C_eff)}`.
    Intermediate,
    /// `C_eff ≥ L`: `J_eff = 1/L`.
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JEff {
    pub value: f64,
    pub regime: JEffRegime,
    /// Within a factor 3 of a regime boundary.
    pub crossover: bool,
    pub factors: Option<WkbFactors>,
}

/// `J_eff` of the switch for `J` (with `C = 1`) and `√(L/C) = l`.
///
/// The strong regime starts where the band curvature reaches `1/L`, i.e. the
/// effective capacitance exceeds the inductance.
pub fn j_eff(jc: f64, l: f64) -> Result<JEff> {
    if !(l > 0.0) || !(jc >= 0.0) {
        return invalid("need l > 0 and j >= 0");
    }
    let inductance = l * l;
    let weak_edge = l.powf(-0.5);
    if jc < weak_edge {
        return Ok(JEff {
            value: jc * (-0.25 * l).exp(),
            regime: JEffRegime::Weak,
            crossover: jc * 3.0 >= weak_edge,
            factors: None,
        });
    }
    let ratio = effective_capacitance(jc)?;
    let strong_measure = ratio * inductance;
    if strong_measure <= 1.0 {
        return Ok(JEff {
            value: 1.0 / inductance,
            regime: JEffRegime::Strong,
            crossover: strong_measure * 3.0 >= 1.0,
            factors: None,
        });
    }
    let f = wkb_mu_nu(jc)?;
    let value = f.nu * f.c_eff.powf(-0.75) * inductance.powf(-0.25) * (-f.mu * (inductance / f.c_eff).sqrt()).exp();
    Ok(JEff {
        value,
        regime: JEffRegime::Intermediate,
        crossover: jc <= 3.0 * weak_edge || strong_measure <= 3.0,
        factors: Some(f),
    })
}
