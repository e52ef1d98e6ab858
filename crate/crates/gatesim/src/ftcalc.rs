//! Error bound of the teleported CNOT on length-`n` repetition-code blocks.

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use std::f64::consts::PI;

/// Largest code length scanned by [`optimal_code_length`].
pub const MAX_CODE_LENGTH: u32 = 100_001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtParams {
    pub n: u32,
    /// Dephasing probability per CPHASE.
    pub eps_g: f64,
    /// Bit-flip probability per CPHASE.
    pub eps_g_prime: f64,
    /// Preparation / measurement error probability.
    pub eps_m: f64,
}

impl FtParams {
    pub fn validate(&self) -> Result<()> {
        if self.n % 2 == 0 {
            return invalid(format!("code length n = {} must be odd", self.n));
        }
        for (name, v) in [("eps_g", self.eps_g), ("eps_g_prime", self.eps_g_prime), ("eps_m", self.eps_m)] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} = {v} must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtBound {
    /// `4·C(n,(n+1)/2)·(3nε_g + 2ε_m)^{(n+1)/2} + 7n²ε_g′`.
    pub exact_bound: f64,
    /// `√(8/πn)·(12nε_g + 8ε_m)^{(n+1)/2} + 7n²ε_g′`.
    pub stirling_bound: f64,
}

fn power(base: f64, k: u32) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        (f64::from(k) * base.ln()).exp()
    }
}

pub fn cnot_error_bound(p: &FtParams) -> Result<FtBound> {
    p.validate()?;
    let n = f64::from(p.n);
    let k = (p.n + 1) / 2;
    let floor = 7.0 * n * n * p.eps_g_prime;
    let base = 3.0 * n * p.eps_g + 2.0 * p.eps_m;
    let exact_head = if base == 0.0 { 0.0 } else { 4.0 * (ln_binomial(u64::from(p.n), u64::from(k)) + f64::from(k) * base.ln()).exp() };
    let stirling_head = (8.0 / (PI * n)).sqrt() * power(4.0 * base, k);
    Ok(FtBound { exact_bound: exact_head + floor, stirling_bound: stirling_head + floor })
}

/// Smallest odd `n` whose exact bound meets `target`.
pub fn optimal_code_length(eps_g: f64, eps_g_prime: f64, eps_m: f64, target: f64) -> Result<u32> {
    if !(target > 0.0 && target < 1.0) {
        return invalid(format!("target = {target} must lie in (0, 1)"));
    }
    let mut best = f64::INFINITY;
    let mut n = 1;
    while n <= MAX_CODE_LENGTH {
        let b = cnot_error_bound(&FtParams { n, eps_g, eps_g_prime, eps_m })?.exact_bound;
        if b <= target {
            return Ok(n);
        }
        best = best.min(b);
        let nf = f64::from(n);
        if 7.0 * nf * nf * eps_g_prime > target {
            break;
        }
        n += 2;
    }
    Err(Error::Infeasible { target, floor: best })
}
