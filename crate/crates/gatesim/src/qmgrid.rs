//! Discretized single-mode Hilbert space on a uniform φ grid with its
//! Fourier-dual Q grid.
//!
//! Fourier convention: `F(Q) = (2π)^{-1/2} ∫ dφ e^{-iQφ} f(φ)`. The discrete
//! version lives in [`Fourier`] and nowhere else.

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Largest grid that [`make_grid`] will produce.
pub const MAX_POINTS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    n_points: usize,
    phi_max: f64,
    /// `phi_max / π`, an integer by construction.
    periods: u64,
}

impl PhaseGrid {
    /// Grid on `[-phi_max, phi_max)`. `phi_max` must be a positive integer
    /// multiple of π and `n_points` a power of two no smaller than 16.
    pub fn new(n_points: usize, phi_max: f64) -> Result<Self> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return invalid(format!("n_points = {n_points} must be a power of two >= 16"));
        }
        let ratio = phi_max / PI;
        let periods = ratio.round();
        if !(phi_max > 0.0) || periods < 1.0 || (ratio - periods).abs() > 1e-9 * ratio.max(1.0) {
            return invalid(format!("phi_max = {phi_max} is not a positive multiple of π"));
        }
        Ok(Self { n_points, phi_max: periods * PI, periods: periods as u64 })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }

    /// Number of π intervals in `phi_max`; also `1/dQ`.
    pub fn periods(&self) -> u64 {
        self.periods
    }

    pub fn dphi(&self) -> f64 {
        2.0 * self.phi_max / self.n_points as f64
    }

    pub fn dq(&self) -> f64 {
        PI / self.phi_max
    }

    pub fn q_max(&self) -> f64 {
        PI / self.dphi()
    }

    pub fn phi(&self, i: usize) -> f64 {
        -self.phi_max + i as f64 * self.dphi()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.phi(i)).collect()
    }

    /// Signed integer index of momentum sample `k` (ascending order), so that
    /// `Q = index / periods`.
    pub fn q_index(&self, k: usize) -> i64 {
        k as i64 - (self.n_points / 2) as i64
    }

    /// Momentum of sample `k` in ascending order.
    pub fn q(&self, k: usize) -> f64 {
        self.q_index(k) as f64 * self.dq()
    }

    pub fn qs(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.q(k)).collect()
    }

    /// Momentum of raw FFT bin `k` (unshifted order).
    pub fn fft_q(&self, k: usize) -> f64 {
        let n = self.n_points;
        let idx = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
        idx as f64 * self.dq()
    }

    /// Nearest integer `[Q]` of ascending sample `k`; ties go to the lower bin.
    pub fn q_bin(&self, k: usize) -> i64 {
        // [Q] = ceil(Q - 1/2) with Q = idx/m, evaluated exactly in integers.
        let m = self.periods as i64;
        let num = 2 * self.q_index(k) - m;
        let den = 2 * m;
        num.div_euclid(den) + i64::from(num.rem_euclid(den) != 0)
    }
}

/// Default grid for circuit constants `l = √(L/C)`, `j = √(J₀C)`.
///
/// `phi_max` is the smallest multiple of π covering ten envelope widths
/// `√(l/2)`, and `dφ` resolves the intra-well width `j^{-1/2}` with
/// `8·oversample` points.
pub fn make_grid(l: f64, j: f64, oversample: f64) -> Result<PhaseGrid> {
    if !(l > 0.0) || !(j > 0.0) {
        return invalid(format!("make_grid needs l > 0 and j > 0 (got l = {l}, j = {j})"));
    }
    if !(oversample >= 1.0) {
        return invalid(format!("oversample = {oversample} must be >= 1"));
    }
    let reach = 10.0 * (l / 2.0).sqrt();
    let periods = (reach / PI * (1.0 - 1e-12)).ceil().max(1.0);
    let phi_max = periods * PI;
    let max_spacing = j.powf(-0.5) / (8.0 * oversample);
    let needed = 2.0 * phi_max / max_spacing;
    let mut n: u64 = 16;
    while (n as f64) < needed * (1.0 - 1e-12) {
        n *= 2;
        if n > MAX_POINTS {
            return Err(Error::GridTooLarge { required: n, limit: MAX_POINTS });
        }
    }
    PhaseGrid::new(n as usize, phi_max)
}

/// FFT plans for one grid, with the continuum scaling `dφ/√(2π)` applied.
#[derive(Clone)]
pub struct Fourier {
    grid: PhaseGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: PhaseGrid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n_points);
        let inverse = planner.plan_fft_inverse(grid.n_points);
        Self { grid, forward, inverse }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// Unscaled in-place forward FFT, raw bin order.
    pub fn fft_raw(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unscaled in-place inverse FFT, raw bin order.
    pub fn ifft_raw(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// Scratch length needed by the `_with` variants.
    pub fn scratch_len(&self) -> usize {
        self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len())
    }

    pub fn fft_raw_with(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    pub fn ifft_raw_with(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }

    /// Position amplitudes to momentum amplitudes in ascending-Q order.
    ///
    /// With `φ_i = -φ_max + i·dφ` and `Q_k = (k - N/2)·dQ` the kernel factors
    /// as `e^{-iQ_kφ_i} = (-1)^k (-1)^i e^{-2πiki/N}` (N/2 is even).
    pub fn to_momentum(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = psi
            .iter()
            .enumerate()
            .map(|(i, &a)| if i % 2 == 0 { a } else { -a })
            .collect();
        self.forward.process(&mut buf);
        let scale = self.grid.dphi() / (2.0 * PI).sqrt();
        for (k, b) in buf.iter_mut().enumerate() {
            *b *= if k % 2 == 0 { scale } else { -scale };
        }
        buf
    }

    /// Inverse of [`Fourier::to_momentum`].
    pub fn to_position(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = amps
            .iter()
            .enumerate()
            .map(|(k, &a)| if k % 2 == 0 { a } else { -a })
            .collect();
        self.inverse.process(&mut buf);
        let scale = self.grid.dq() / (2.0 * PI).sqrt();
        for (i, b) in buf.iter_mut().enumerate() {
            *b *= if i % 2 == 0 { scale } else { -scale };
        }
        buf
    }
}

/// Oscillator state in the position representation, `Σ|ψ_i|²dφ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: PhaseGrid,
    pub amps: Vec<Complex64>,
}

/// Oscillator state in the momentum representation, ascending Q order.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumWave {
    pub grid: PhaseGrid,
    pub amps: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: PhaseGrid, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.n_points() {
            return invalid(format!("expected {} amplitudes, got {}", grid.n_points(), amps.len()));
        }
        Ok(Self { grid, amps })
    }

    /// Samples `f` on the grid and normalizes.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amps = (0..grid.n_points()).map(|i| f(grid.phi(i))).collect();
        let mut wf = Self { grid, amps };
        wf.normalize()?;
        Ok(wf)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dphi()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return invalid("cannot normalize a zero or non-finite wavefunction");
        }
        let s = 1.0 / n.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
        Ok(())
    }

    pub fn expect_phi2(&self) -> f64 {
        let g = &self.grid;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| g.phi(i).powi(2) * a.norm_sqr())
            .sum::<f64>()
            * g.dphi()
    }

    pub fn expect_q2(&self) -> f64 {
        to_momentum(self).expect_q2()
    }

    /// Cyclic translation by `shift` samples (`φ → φ + shift·dφ`).
    pub fn translated(&self, shift: isize) -> WaveFunction {
        let n = self.amps.len() as isize;
        let amps = (0..n)
            .map(|i| self.amps[(i - shift).rem_euclid(n) as usize])
            .collect();
        WaveFunction { grid: self.grid, amps }
    }
}

impl MomentumWave {
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dq()
    }

    pub fn expect_q2(&self) -> f64 {
        let g = &self.grid;
        self.amps
            .iter()
            .enumerate()
            .map(|(k, a)| g.q(k).powi(2) * a.norm_sqr())
            .sum::<f64>()
            * g.dq()
    }

    /// `(p_even, p_odd)` for the nearest-integer charge `[Q]`, normalized by
    /// the total momentum-space weight.
    pub fn parity_probabilities(&self) -> (f64, f64) {
        let (mut even, mut odd) = (0.0, 0.0);
        for (k, a) in self.amps.iter().enumerate() {
            if self.grid.q_bin(k).rem_euclid(2) == 0 {
                even += a.norm_sqr();
            } else {
                odd += a.norm_sqr();
            }
        }
        let total = even + odd;
        (even / total, odd / total)
    }

    /// `X̄ = (−1)^{[Q]}` applied sample by sample.
    pub fn apply_xbar(&self) -> MomentumWave {
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, &a)| if self.grid.q_bin(k).rem_euclid(2) == 0 { a } else { -a })
            .collect();
        MomentumWave { grid: self.grid, amps }
    }

    /// `Σ conj(a_k)·b_k·dQ`.
    pub fn overlap(&self, other: &MomentumWave) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: Complex64 = self.amps.iter().zip(&other.amps).map(|(x, y)| x.conj() * y).sum();
        Ok(s * self.grid.dq())
    }
}

pub fn to_momentum(wf: &WaveFunction) -> MomentumWave {
    MomentumWave { grid: wf.grid, amps: Fourier::new(wf.grid).to_momentum(&wf.amps) }
}

pub fn to_position(mw: &MomentumWave) -> WaveFunction {
    WaveFunction { grid: mw.grid, amps: Fourier::new(mw.grid).to_position(&mw.amps) }
}

/// `Σ cos(h·φ_i)|ψ_i|²dφ` for `h` in {1, 2}.
pub fn expect_cos(wf: &WaveFunction, harmonic: u32) -> Result<f64> {
    if !(1..=2).contains(&harmonic) {
        return invalid(format!("harmonic = {harmonic} must be 1 or 2"));
    }
    let h = f64::from(harmonic);
    let g = &wf.grid;
    Ok(wf
        .amps
        .iter()
        .enumerate()
        .map(|(i, a)| (h * g.phi(i)).cos() * a.norm_sqr())
        .sum::<f64>()
        * g.dphi())
}

/// Probabilities that `[Q]` is even or odd. `⟨X̄⟩ = p_even − p_odd`.
pub fn parity_probabilities(wf: &WaveFunction) -> (f64, f64) {
    to_momentum(wf).parity_probabilities()
}

/// `⟨a|b⟩ = Σ conj(a_i)·b_i·dφ`.
pub fn overlap(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let s: Complex64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.grid.dphi())
}

/// Level-`n` eigenstate of `Q²/2 + φ²/2l²`, a Hermite-Gaussian with
/// `⟨φ²⟩ = (n+½)·l`.
///
/// Built from the stable three-term recurrence for normalized Hermite
/// functions, then renormalized on the grid.
pub fn harmonic_eigenstate(grid: &PhaseGrid, l: f64, n: u32) -> Result<WaveFunction> {
    if !(l > 0.0) {
        return invalid(format!("l = {l} must be positive"));
    }
    let s = l.sqrt();
    let turning = (2.0 * f64::from(n) + 1.0).sqrt() * s;
    if turning > 0.8 * grid.phi_max() {
        return invalid(format!(
            "level {n} turning point {turning:.3} exceeds 0.8·phi_max = {:.3}",
            0.8 * grid.phi_max()
        ));
    }
    let norm0 = (PI * l).powf(-0.25);
    let amps: Vec<Complex64> = (0..grid.n_points())
        .map(|i| Complex64::from(hermite_function(n, grid.phi(i) / s) * norm0))
        .collect();
    let edge = hermite_function(n, grid.phi_max() / s) * norm0;
    if edge * edge > 1e-14 {
        return invalid(format!("grid too narrow for level {n}: boundary density {:.3e}", edge * edge));
    }
    let mut wf = WaveFunction { grid: *grid, amps };
    wf.normalize()?;
    Ok(wf)
}

/// Normalized Hermite function `h_n(x)` with weight `π^{-1/4}` folded out.
fn hermite_function(n: u32, x: f64) -> f64 {
    let g = (-0.5 * x * x).exp();
    let mut prev = 0.0;
    let mut cur = g;
    for k in 0..n {
        let kf = f64::from(k);
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_ties_go_low() {
        // periods = 2 puts samples exactly on half-integers
        let g = PhaseGrid::new(16, 2.0 * PI).unwrap();
        for k in 0..16 {
            let q = g.q(k);
            let expect = (q - 0.5).ceil() as i64;
            assert_eq!(g.q_bin(k), expect, "Q = {q}");
        }
    }
}
