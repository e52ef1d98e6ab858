//! Time-dependent Schrödinger integration of the qubit-conditioned oscillator
//! Hamiltonian
//!
//! `H_s(t) = Q²/2 + φ²/2L + λφ⁴ − s·J(t)·(cos φ + s·β·cos 2φ)`,  s = ±1,
//!
//! with a fourth-order split-operator scheme.

use crate::error::{invalid, Error, Result};
use crate::qmgrid::{Fourier, PhaseGrid, WaveFunction};
use crate::special::{apply_phase, fill_phase};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Pulse margins on either side of the plateau, in units of `tau_j`.
pub const WINDOW_MARGIN: f64 = 5.0;

/// Default abort threshold for accumulated norm drift.
pub const NORM_ABORT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// `√(L/C)`.
    pub l: f64,
    /// `√(J₀C)`.
    pub j: f64,
    /// Quartic coefficient λ of `λφ⁴`.
    pub lam: f64,
    /// Relative `cos 2φ` strength β.
    pub beta_pert: f64,
}

impl CircuitParams {
    pub fn new(l: f64, j: f64) -> Result<Self> {
        let p = Self { l, j, lam: 0.0, beta_pert: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) || !self.l.is_finite() {
            return invalid(format!("l = {} must be positive", self.l));
        }
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return invalid(format!("j = {} must be non-negative", self.j));
        }
        if !(self.lam >= 0.0) || !self.lam.is_finite() {
            return invalid(format!("lambda = {} must be non-negative", self.lam));
        }
        if !self.beta_pert.is_finite() {
            return invalid("beta_pert must be finite");
        }
        Ok(())
    }

    pub fn inductance(&self) -> f64 {
        self.l * self.l
    }

    pub fn j0(&self) -> f64 {
        self.j * self.j
    }

    /// Anharmonicity parameter `α = λ·L·√(L/C)`.
    pub fn alpha_anh(&self) -> f64 {
        self.lam * self.l.powi(3)
    }

    /// Sets λ from `α = λ·L·√(L/C)`.
    pub fn with_alpha_anh(mut self, alpha: f64) -> Self {
        self.lam = alpha / self.l.powi(3);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub tau_j: f64,
    /// Reference plateau delay τ₀ between ramp midpoints.
    pub tau: f64,
    /// Fractional overrotation; the simulated delay is `tau·(1 + epsilon)`.
    pub epsilon: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl GateSchedule {
    /// Schedule with the standard window and default step for coupling `j`.
    pub fn standard(j: f64, tau_j: f64, tau: f64, epsilon: f64) -> Self {
        let mut s = Self { tau_j, tau, epsilon, t_start: 0.0, t_end: 0.0, dt: Self::default_dt(j, tau_j) };
        s.reset_window();
        s
    }

    /// `min(0.1/j, τ_J/100)`.
    pub fn default_dt(j: f64, tau_j: f64) -> f64 {
        let ramp = tau_j / 100.0;
        if j > 0.0 {
            ramp.min(0.1 / j)
        } else {
            ramp.min(0.02)
        }
    }

    /// Largest step allowed by the schedule invariant.
    pub fn max_dt(j: f64, tau_j: f64) -> f64 {
        let ramp = tau_j / 50.0;
        if j > 0.0 {
            ramp.min(0.1 / j)
        } else {
            ramp
        }
    }

    pub fn plateau(&self) -> f64 {
        self.tau * (1.0 + self.epsilon)
    }

    /// Restores `[−5τ_J, τ(1+ε) + 5τ_J]`.
    pub fn reset_window(&mut self) {
        self.t_start = -WINDOW_MARGIN * self.tau_j;
        self.t_end = self.plateau() + WINDOW_MARGIN * self.tau_j;
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self.t_end = self.t_end.max(self.plateau() + WINDOW_MARGIN * self.tau_j);
        self
    }

    pub fn validate(&self, j: f64) -> Result<()> {
        if !(self.tau_j > 0.0) || !(self.tau > 0.0) || !(self.dt > 0.0) {
            return invalid("tau_j, tau and dt must be positive");
        }
        if self.plateau() <= 0.0 {
            return invalid(format!("plateau tau·(1+epsilon) = {} must be positive", self.plateau()));
        }
        let slack = 1e-9 * self.tau_j;
        if self.t_start > -WINDOW_MARGIN * self.tau_j + slack {
            return invalid(format!("t_start = {} must be <= -5·tau_j", self.t_start));
        }
        if self.t_end < self.plateau() + WINDOW_MARGIN * self.tau_j - slack {
            return invalid(format!("t_end = {} must be >= tau + 5·tau_j", self.t_end));
        }
        let limit = Self::max_dt(j, self.tau_j);
        if self.dt > limit * (1.0 + 1e-12) {
            return invalid(format!("dt = {} exceeds min(0.1/j, tau_j/50) = {limit}", self.dt));
        }
        Ok(())
    }

    /// Number of whole steps covering the window; the final time may exceed
    /// `t_end` by less than one step.
    pub fn n_steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt - 1e-9).ceil().max(0.0) as usize
    }

    pub fn time_at(&self, k: f64) -> f64 {
        self.t_start + k * self.dt
    }
}

/// Fourth-order splitting coefficient `γ = 1/(2 − 2^{1/3})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub gamma: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self { gamma: 1.0 / (2.0 - 2f64.cbrt()) }
    }
}

/// Qubit state conditioning the sign of the Josephson term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchSign {
    /// Qubit |0⟩, potential `−J cos φ`.
    Zero,
    /// Qubit |1⟩, potential `+J cos φ`.
    One,
}

impl BranchSign {
    pub fn sign(self) -> f64 {
        match self {
            BranchSign::Zero => 1.0,
            BranchSign::One => -1.0,
        }
    }
}

/// `J₀·[½ + ½erf(t/τ_J)]·[½ + ½erf((τ − t)/τ_J)]` with `τ = sched.plateau()`.
pub fn pulse_value(sched: &GateSchedule, j: f64, t: f64) -> f64 {
    pulse(j * j, sched.tau_j, sched.plateau(), t)
}

fn pulse(j0: f64, tau_j: f64, plateau: f64, t: f64) -> f64 {
    if j0 == 0.0 {
        return 0.0;
    }
    let on = 0.5 * erfc(-t / tau_j);
    let off = 0.5 * erfc((t - plateau) / tau_j);
    j0 * on * off
}

/// Static (`φ²/2L + λφ⁴`) and coupled (`−s(cos φ + sβ cos 2φ)`) parts of the
/// potential, sampled on the grid.
#[derive(Debug, Clone)]
pub struct PotentialTerms {
    pub fixed: Vec<f64>,
    pub coupled: Vec<f64>,
}

impl PotentialTerms {
    pub fn new(grid: &PhaseGrid, params: &CircuitParams, branch: BranchSign, harmonic: bool) -> Self {
        let s = branch.sign();
        let inv_2l = 0.5 / params.inductance();
        let mut fixed = Vec::with_capacity(grid.n_points());
        let mut coupled = Vec::with_capacity(grid.n_points());
        for phi in grid.phis() {
            let quad = if harmonic { phi * phi * inv_2l } else { 0.0 };
            fixed.push(quad + params.lam * phi.powi(4));
            coupled.push(-s * (phi.cos() + s * params.beta_pert * (2.0 * phi).cos()));
        }
        Self { fixed, coupled }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Include `φ²/2L`; disabled only for symmetry checks.
    pub harmonic: bool,
    pub norm_limit: f64,
    /// Steps between norm checks.
    pub check_every: usize,
    pub stepper: StepperConfig,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { harmonic: true, norm_limit: NORM_ABORT, check_every: 2048, stepper: StepperConfig::default() }
    }
}

/// Observables sampled along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub norm: f64,
    pub expect_phi2: f64,
    pub expect_q2: f64,
    pub p_even: f64,
    pub re_xbar: f64,
}

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "norm", "expect_phi2", "expect_Q2", "p_even", "re_xbar"];

/// Every `stride`-th step boundary is recorded; `None` records nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordPolicy {
    None,
    Every(usize),
}

/// Coupled phase updates applied incrementally before a full recompute.
const PHASE_REFRESH: u32 = 64;

struct PhaseSlot {
    weight: f64,
    base: Vec<Complex64>,
    cached: Vec<Complex64>,
    cached_j: f64,
    updates: u32,
}

/// Owns the diagonal factors for one branch and advances a state in whole
/// steps of `sched.dt` on the time lattice `t_k = sched.t_start + k·dt`.
///
/// Within a step the potential factors sit at `t_k`, `t_k + γdt`,
/// `t_k + (1−γ)dt` and `t_{k+1}`; the trailing factor of one step is merged
/// with the leading factor of the next.
pub struct Propagator {
    fourier: Fourier,
    sched: GateSchedule,
    j0: f64,
    gamma: f64,
    coupled: Vec<f64>,
    coupled_max: f64,
    kin_outer: Vec<Complex64>,
    kin_inner: Vec<Complex64>,
    edge: PhaseSlot,
    merged: PhaseSlot,
    inner_a: PhaseSlot,
    inner_b: PhaseSlot,
    scratch: Vec<Complex64>,
    opts: EvolveOptions,
}

#[derive(Clone, Copy)]
enum Slot {
    Edge,
    Merged,
    InnerA,
    InnerB,
}

impl Propagator {
    pub fn new(grid: &PhaseGrid, params: &CircuitParams, sched: &GateSchedule, branch: BranchSign, opts: EvolveOptions) -> Self {
        let terms = PotentialTerms::new(grid, params, branch, opts.harmonic);
        let gamma = opts.stepper.gamma;
        let dt = sched.dt;
        let n = grid.n_points();
        let kinetic = |w: f64| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    let q = grid.fft_q(k);
                    Complex64::from_polar(1.0 / n as f64, -w * dt * 0.5 * q * q)
                })
                .collect()
        };
        let slot = |w: f64| -> PhaseSlot {
            let base = terms.fixed.iter().map(|&v| Complex64::from_polar(1.0, -w * dt * v)).collect();
            PhaseSlot { weight: w, base, cached: vec![Complex64::new(0.0, 0.0); n], cached_j: f64::NAN, updates: 0 }
        };
        let coupled_max = terms.coupled.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let fourier = Fourier::new(*grid);
        let scratch = vec![Complex64::new(0.0, 0.0); fourier.scratch_len()];
        Self {
            fourier,
            sched: *sched,
            j0: params.j0(),
            gamma,
            coupled: terms.coupled.clone(),
            coupled_max,
            kin_outer: kinetic(gamma),
            kin_inner: kinetic(1.0 - 2.0 * gamma),
            edge: slot(0.5 * gamma),
            merged: slot(gamma),
            inner_a: slot(0.5 * (1.0 - gamma)),
            inner_b: slot(0.5 * (1.0 - gamma)),
            scratch,
            opts,
        }
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.fourier.grid()
    }

    pub fn coupling_at(&self, t: f64) -> f64 {
        pulse(self.j0, self.sched.tau_j, self.sched.plateau(), t)
    }

    fn potential(&mut self, psi: &mut [Complex64], which: Slot, t: f64) {
        let j = self.coupling_at(t);
        let dt = self.sched.dt;
        let slot = match which {
            Slot::Edge => &mut self.edge,
            Slot::Merged => &mut self.merged,
            Slot::InnerA => &mut self.inner_a,
            Slot::InnerB => &mut self.inner_b,
        };
        if j == 0.0 {
            psi.iter_mut().zip(&slot.base).for_each(|(p, b)| *p *= b);
            return;
        }
        if j != slot.cached_j {
            // small changes of J are folded into the cached factor
            let delta = slot.weight * dt * (j - slot.cached_j);
            if slot.updates < PHASE_REFRESH && (delta * self.coupled_max).abs() <= 1e-2 {
                apply_phase(&mut slot.cached, &self.coupled, delta, self.coupled_max);
                slot.updates += 1;
            } else {
                fill_phase(&mut slot.cached, &slot.base, &self.coupled, slot.weight * dt * j, self.coupled_max);
                slot.updates = 0;
            }
            slot.cached_j = j;
        }
        psi.iter_mut().zip(&slot.cached).for_each(|(p, c)| *p *= c);
    }

    fn kinetic(&mut self, psi: &mut [Complex64], inner: bool) {
        self.fourier.fft_raw_with(psi, &mut self.scratch);
        let k = if inner { &self.kin_inner } else { &self.kin_outer };
        psi.iter_mut().zip(k).for_each(|(p, c)| *p *= c);
        self.fourier.ifft_raw_with(psi, &mut self.scratch);
    }

    /// Advances `psi` from `t_{k_from}` to `t_{k_to}`.
    pub fn run(&mut self, psi: &mut WaveFunction, k_from: usize, k_to: usize, record: RecordPolicy, out: &mut Vec<TrajectorySample>) -> Result<()> {
        if psi.grid != *self.grid() {
            return Err(Error::GridMismatch);
        }
        if k_to <= k_from {
            return Ok(());
        }
        let g = self.gamma;
        let s = self.sched;
        let t = |k: f64| s.t_start + k * s.dt;
        let norm0 = psi.norm_sqr();
        let amps = &mut psi.amps;
        self.potential(amps, Slot::Edge, t(k_from as f64));
        for k in k_from..k_to {
            let kf = k as f64;
            self.kinetic(amps, false);
            self.potential(amps, Slot::InnerA, t(kf + g));
            self.kinetic(amps, true);
            self.potential(amps, Slot::InnerB, t(kf + 1.0 - g));
            self.kinetic(amps, false);
            let next = k + 1;
            let t_next = t(next as f64);
            let recording = matches!(record, RecordPolicy::Every(stride) if stride > 0 && next % stride == 0);
            if next == k_to || recording {
                self.potential(amps, Slot::Edge, t_next);
                if recording {
                    out.push(sample(&self.fourier, amps, t_next));
                }
                if next != k_to {
                    self.potential(amps, Slot::Edge, t_next);
                }
            } else {
                self.potential(amps, Slot::Merged, t_next);
            }
            if next % self.opts.check_every == 0 || next == k_to {
                let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.fourier.grid().dphi();
                let drift = (n - norm0).abs();
                if !(drift <= self.opts.norm_limit) {
                    return Err(Error::NormDrift { drift, t: t_next, limit: self.opts.norm_limit });
                }
            }
        }
        Ok(())
    }
}

fn sample(fourier: &Fourier, amps: &[Complex64], t: f64) -> TrajectorySample {
    let grid = *fourier.grid();
    let wf = WaveFunction { grid, amps: amps.to_vec() };
    let mw = crate::qmgrid::MomentumWave { grid, amps: fourier.to_momentum(amps) };
    let (p_even, p_odd) = mw.parity_probabilities();
    TrajectorySample {
        t,
        norm: wf.norm_sqr(),
        expect_phi2: wf.expect_phi2(),
        expect_q2: mw.expect_q2(),
        p_even,
        re_xbar: p_even - p_odd,
    }
}

#[derive(Debug, Clone)]
pub struct BranchOutcome {
    pub final_state: WaveFunction,
    pub final_time: f64,
    pub norm_drift: f64,
    pub trajectory: Vec<TrajectorySample>,
}

/// Evolves `initial` through the whole schedule window under branch `branch`.
pub fn evolve_branch(initial: &WaveFunction, params: &CircuitParams, sched: &GateSchedule, branch: BranchSign, record: RecordPolicy) -> Result<BranchOutcome> {
    evolve_branch_with(initial, params, sched, branch, record, EvolveOptions::default())
}

pub fn evolve_branch_with(initial: &WaveFunction, params: &CircuitParams, sched: &GateSchedule, branch: BranchSign, record: RecordPolicy, opts: EvolveOptions) -> Result<BranchOutcome> {
    params.validate()?;
    sched.validate(params.j)?;
    let norm0 = initial.norm_sqr();
    let mut psi = initial.clone();
    let mut prop = Propagator::new(&initial.grid, params, sched, branch, opts);
    let steps = sched.n_steps();
    let mut trajectory = Vec::new();
    if let RecordPolicy::Every(_) = record {
        trajectory.push(sample(&prop.fourier, &psi.amps, sched.t_start));
    }
    prop.run(&mut psi, 0, steps, record, &mut trajectory)?;
    let norm_drift = (psi.norm_sqr() - norm0).abs();
    Ok(BranchOutcome { final_state: psi, final_time: sched.time_at(steps as f64), norm_drift, trajectory })
}

/// One fourth-order step under an arbitrary potential `v(t, φ)`, with the
/// four potential factors evaluated separately.
pub fn split_step(wf: &WaveFunction, potential_at: impl Fn(f64, f64) -> f64, t: f64, dt: f64, cfg: &StepperConfig) -> WaveFunction {
    split_evolve(wf, potential_at, t, dt, 1, cfg)
}

/// `steps` consecutive calls of [`split_step`] sharing one set of FFT plans.
pub fn split_evolve(wf: &WaveFunction, potential_at: impl Fn(f64, f64) -> f64, t0: f64, dt: f64, steps: usize, cfg: &StepperConfig) -> WaveFunction {
    let grid = wf.grid;
    let fourier = Fourier::new(grid);
    let n = grid.n_points();
    let g = cfg.gamma;
    let phis = grid.phis();
    let kin = |w: f64| -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                let q = grid.fft_q(k);
                Complex64::from_polar(1.0 / n as f64, -w * dt * 0.5 * q * q)
            })
            .collect()
    };
    let outer = kin(g);
    let inner = kin(1.0 - 2.0 * g);
    let mut amps = wf.amps.clone();
    let pot = |amps: &mut [Complex64], w: f64, t: f64| {
        for (a, &phi) in amps.iter_mut().zip(&phis) {
            *a *= Complex64::from_polar(1.0, -w * dt * potential_at(t, phi));
        }
    };
    let kick = |amps: &mut [Complex64], k: &[Complex64]| {
        fourier.fft_raw(amps);
        amps.iter_mut().zip(k).for_each(|(a, c)| *a *= c);
        fourier.ifft_raw(amps);
    };
    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        pot(&mut amps, 0.5 * g, t);
        kick(&mut amps, &outer);
        pot(&mut amps, 0.5 * (1.0 - g), t + g * dt);
        kick(&mut amps, &inner);
        pot(&mut amps, 0.5 * (1.0 - g), t + (1.0 - g) * dt);
        kick(&mut amps, &outer);
        pot(&mut amps, 0.5 * g, t + dt);
    }
    WaveFunction { grid, amps }
}
