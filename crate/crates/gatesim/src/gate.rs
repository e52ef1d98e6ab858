//! The protected-gate experiment: both qubit branches, the final-state
//! overlap and the gate-error metrics derived from it.

use crate::error::{invalid, Result};
use crate::evolve::{BranchSign, CircuitParams, EvolveOptions, GateSchedule, Propagator, RecordPolicy};
use crate::qmgrid::{harmonic_eigenstate, make_grid, overlap, PhaseGrid, WaveFunction};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ramps are treated as finished this many `tau_j` before the ramp-off
/// midpoint; `½erfc(6)` rounds to zero against 1.
const CHECKPOINT_MARGIN: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    /// `⟨ψ₁^fin|ψ₀^fin⟩` with the ideal `−i` of the |1⟩ branch divided out.
    pub overlap: Complex64,
    pub diamond: f64,
    pub c_kraus: f64,
    pub phi_kraus: f64,
    pub infidelity_bound: f64,
    pub two_qubit_diamond: f64,
    /// Larger of the two branch norm drifts.
    pub norm_drift: f64,
}

impl GateResult {
    pub fn from_overlap(overlap: Complex64, norm_drift: f64) -> Self {
        let c = overlap.norm();
        let phi = overlap.arg();
        let diamond = (Complex64::new(1.0, 0.0) - overlap).norm();
        Self {
            overlap,
            diamond,
            c_kraus: c,
            phi_kraus: phi,
            infidelity_bound: 0.5 * (1.0 - c * phi.cos()),
            two_qubit_diamond: 2.0 * diamond,
            norm_drift,
        }
    }
}

/// Grid used for gate runs: [`make_grid`] with the intra-well rule disabled
/// gracefully when `j = 0`.
pub fn gate_grid(params: &CircuitParams, oversample: f64) -> Result<PhaseGrid> {
    make_grid(params.l, params.j.max(1.0), oversample)
}

/// `L/π`, the ideal plateau delay.
pub fn ideal_tau(params: &CircuitParams) -> f64 {
    params.inductance() / PI
}

/// Starting delay for timing searches: `L/π − 2x*τ_J`, where the ramps
/// cross `J C = (L/C)^{−1/4}` at `x*τ_J` outside their midpoints
/// (`½erfc(x*)·J₀C = (L/C)^{−1/4}`).
///
/// The quadratic phase acts on a localized state from that coupling upward,
/// so midpoint-to-midpoint delays of `L/π` overrotate.
pub fn ramp_corrected_tau(params: &CircuitParams, tau_j: f64) -> f64 {
    let j0 = params.j0();
    let level = params.l.powf(-0.5);
    if j0 <= level {
        return ideal_tau(params);
    }
    let x = statrs::function::erf::erfc_inv(2.0 * level / j0).max(0.0);
    (ideal_tau(params) - 2.0 * x * tau_j).max(0.5 * ideal_tau(params))
}

/// Both branches evolved up to a checkpoint inside the plateau, so that runs
/// differing only in the ramp-off time share the expensive ramp-on.
pub struct GateRunner {
    params: CircuitParams,
    level: u32,
    base: GateSchedule,
    min_plateau: f64,
    checkpoint: usize,
    states: [WaveFunction; 2],
    opts: EvolveOptions,
}

impl GateRunner {
    /// Prepares runs for every plateau `>= min_plateau` with ramp time and
    /// step taken from `base`.
    pub fn new(params: &CircuitParams, base: &GateSchedule, level: u32, min_plateau: f64, grid: &PhaseGrid) -> Result<Self> {
        Self::with_options(params, base, level, min_plateau, grid, EvolveOptions::default())
    }

    pub fn with_options(params: &CircuitParams, base: &GateSchedule, level: u32, min_plateau: f64, grid: &PhaseGrid, opts: EvolveOptions) -> Result<Self> {
        params.validate()?;
        let mut sched = GateSchedule { tau: min_plateau, epsilon: 0.0, ..*base };
        sched.t_end = sched.t_end.max(min_plateau + crate::evolve::WINDOW_MARGIN * sched.tau_j);
        sched.validate(params.j)?;
        let initial = harmonic_eigenstate(grid, params.l, level)?;
        let t_c = min_plateau - CHECKPOINT_MARGIN * sched.tau_j;
        let checkpoint = ((t_c - sched.t_start) / sched.dt).floor().max(0.0) as usize;
        let checkpoint = checkpoint.min(sched.n_steps());
        let run_branch = |branch: BranchSign| -> Result<WaveFunction> {
            let mut psi = initial.clone();
            let mut prop = Propagator::new(grid, params, &sched, branch, opts);
            prop.run(&mut psi, 0, checkpoint, RecordPolicy::None, &mut Vec::new())?;
            Ok(psi)
        };
        let (s0, s1) = rayon::join(|| run_branch(BranchSign::Zero), || run_branch(BranchSign::One));
        Ok(Self { params: *params, level, base: sched, min_plateau, checkpoint, states: [s0?, s1?], opts })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn min_plateau(&self) -> f64 {
        self.min_plateau
    }

    /// Schedule for reference delay `tau` and overrotation `epsilon`.
    pub fn schedule(&self, tau: f64, epsilon: f64) -> GateSchedule {
        let mut s = GateSchedule { tau, epsilon, ..self.base };
        s.reset_window();
        s.t_start = self.base.t_start;
        s
    }

    pub fn run(&self, tau: f64, epsilon: f64) -> Result<GateResult> {
        let sched = self.schedule(tau, epsilon);
        if sched.plateau() < self.min_plateau * (1.0 - 1e-12) {
            return invalid(format!(
                "plateau {} is shorter than the checkpointed minimum {}",
                sched.plateau(),
                self.min_plateau
            ));
        }
        sched.validate(self.params.j)?;
        let steps = sched.n_steps();
        let finish = |idx: usize, branch: BranchSign| -> Result<(WaveFunction, f64)> {
            let mut psi = self.states[idx].clone();
            let mut prop = Propagator::new(&psi.grid, &self.params, &sched, branch, self.opts);
            prop.run(&mut psi, self.checkpoint, steps, RecordPolicy::None, &mut Vec::new())?;
            let drift = (psi.norm_sqr() - 1.0).abs();
            Ok((psi, drift))
        };
        let (r0, r1) = rayon::join(|| finish(0, BranchSign::Zero), || finish(1, BranchSign::One));
        let (raw0, d0) = r0?;
        let (raw1, d1) = r1?;
        Ok(gate_result(&raw0, &raw1, d0.max(d1))?)
    }
}

/// Metrics from the raw final branch states.
pub fn gate_result(raw0: &WaveFunction, raw1: &WaveFunction, norm_drift: f64) -> Result<GateResult> {
    // raw1 = −i·ψ₁^fin, hence ⟨ψ₁^fin|ψ₀^fin⟩ = −i·⟨raw1|raw0⟩.
    let ov = overlap(raw1, raw0)? * Complex64::new(0.0, -1.0);
    Ok(GateResult::from_overlap(ov, norm_drift))
}

/// Runs both branches from the level-`n` harmonic eigenstate.
pub fn run_protected_gate(params: &CircuitParams, sched: &GateSchedule, initial_level: u32) -> Result<GateResult> {
    let grid = gate_grid(params, 1.0)?;
    run_protected_gate_on(params, sched, initial_level, &grid)
}

pub fn run_protected_gate_on(params: &CircuitParams, sched: &GateSchedule, initial_level: u32, grid: &PhaseGrid) -> Result<GateResult> {
    let runner = GateRunner::new(params, sched, initial_level, sched.plateau(), grid)?;
    runner.run(sched.tau, sched.epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Also search τ_J over `tau_j_range·√(LC)` after τ.
    pub search_tau_j: bool,
    /// Bracket width at which golden-section search stops, relative to the
    /// guessed τ.
    pub rel_tol: f64,
    /// Budget of gate evaluations per coordinate.
    pub max_evals: usize,
    /// Bracket relative to the guessed τ.
    pub tau_range: (f64, f64),
    pub tau_j_range: (f64, f64),
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { search_tau_j: false, rel_tol: 5e-3, max_evals: 16, tau_range: (0.9, 1.1), tau_j_range: (0.5, 2.0) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingOptimum {
    pub tau_j: f64,
    pub tau: f64,
    pub result: GateResult,
    /// `(tau_j, tau, diamond)` for every gate evaluation, in order.
    pub evaluations: Vec<(f64, f64, f64)>,
    pub converged: bool,
    pub warning: Option<String>,
}

/// Outcome of a one-dimensional golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenOutcome {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Golden-section minimization on `[a, b]` until the bracket is narrower than
/// `x_tol` or `max_evals` is spent. Returns the best point evaluated.
pub fn golden_section<E>(mut f: impl FnMut(f64) -> std::result::Result<f64, E>, a: f64, b: f64, x_tol: f64, max_evals: usize) -> std::result::Result<GoldenOutcome, E> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    while hi - lo > x_tol && evals < max_evals {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
        evals += 1;
    }
    Ok(GoldenOutcome { x: best.0, fx: best.1, evaluations: evals, converged: hi - lo <= x_tol })
}

/// Golden-section search of the diamond norm over τ in `tau_range·guess_tau`
/// on an existing runner, whose checkpoint must lie below the bracket.
///
/// If every evaluation gives the same error to 1e-12 relative, `guess_tau` is
/// returned with its own result.
pub fn optimize_tau_on_runner(runner: &GateRunner, guess_tau: f64, opts: &OptimizeOptions) -> Result<TimingOptimum> {
    let (lo, hi) = (opts.tau_range.0 * guess_tau, opts.tau_range.1 * guess_tau);
    let tau_j = runner.schedule(guess_tau, 0.0).tau_j;
    let mut evaluations = Vec::new();
    let mut best: Option<(f64, GateResult)> = None;
    let out = golden_section(
        |tau| -> Result<f64> {
            let r = runner.run(tau, 0.0)?;
            evaluations.push((tau_j, tau, r.diamond));
            if best.map_or(true, |(_, b)| r.diamond < b.diamond) {
                best = Some((tau, r));
            }
            Ok(r.diamond)
        },
        lo,
        hi,
        opts.rel_tol * guess_tau,
        opts.max_evals,
    )?;
    let diamonds: Vec<f64> = evaluations.iter().map(|e| e.2).collect();
    let max = diamonds.iter().cloned().fold(f64::MIN, f64::max);
    let min = diamonds.iter().cloned().fold(f64::MAX, f64::min);
    let flat = max - min <= 1e-12 * max.abs().max(f64::MIN_POSITIVE);
    let (tau, result) = if flat {
        let r = runner.run(guess_tau, 0.0)?;
        evaluations.push((tau_j, guess_tau, r.diamond));
        (guess_tau, r)
    } else {
        best.expect("golden section evaluates at least twice")
    };
    Ok(TimingOptimum {
        tau_j,
        tau,
        result,
        evaluations,
        converged: out.converged,
        warning: (!out.converged).then(|| format!("tau search stopped after {} evaluations", out.evaluations)),
    })
}

/// Minimizes the diamond norm over τ in `tau_range·guess.tau`, then
/// optionally over τ_J in `tau_j_range·√(LC)` with τ re-optimized at each τ_J.
pub fn optimize_timing(params: &CircuitParams, guess: &GateSchedule, level: u32, opts: &OptimizeOptions) -> Result<TimingOptimum> {
    let grid = gate_grid(params, 1.0)?;
    optimize_timing_on(params, guess, level, opts, &grid)
}

pub fn optimize_timing_on(params: &CircuitParams, guess: &GateSchedule, level: u32, opts: &OptimizeOptions, grid: &PhaseGrid) -> Result<TimingOptimum> {
    let tau_search = |tau_j: f64| -> Result<TimingOptimum> {
        let mut base = *guess;
        if tau_j != guess.tau_j {
            base.tau_j = tau_j;
            base.dt = base.dt.min(GateSchedule::max_dt(params.j, tau_j));
            base.t_start = base.t_start.min(-crate::evolve::WINDOW_MARGIN * tau_j);
        }
        let runner = GateRunner::new(params, &base, level, opts.tau_range.0 * guess.tau, grid)?;
        optimize_tau_on_runner(&runner, guess.tau, opts)
    };
    let mut best = tau_search(guess.tau_j)?;
    if !opts.search_tau_j {
        return Ok(best);
    }
    let mut all = best.evaluations.clone();
    let mut candidates = Vec::new();
    let tj = golden_section(
        |tj| -> Result<f64> {
            let o = tau_search(tj)?;
            all.extend(o.evaluations.iter().copied());
            let d = o.result.diamond;
            candidates.push(o);
            Ok(d)
        },
        opts.tau_j_range.0 * params.l,
        opts.tau_j_range.1 * params.l,
        opts.rel_tol * params.l * 10.0,
        opts.max_evals.min(8),
    )?;
    let mut warnings: Vec<String> = best.warning.iter().cloned().collect();
    if !tj.converged {
        warnings.push(format!("tau_j search stopped after {} evaluations", tj.evaluations));
    }
    for c in candidates {
        if c.result.diamond < best.result.diamond {
            best = c;
        }
    }
    best.evaluations = all;
    best.converged = warnings.is_empty();
    best.warning = if warnings.is_empty() { None } else { Some(warnings.join("; ")) };
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec {
    /// Inverse temperature β_T in units of C.
    pub beta_t: f64,
    pub n_max: u32,
}

/// Boltzmann weights `P_n = (1 − e^{−x})e^{−nx}`, `x = β_T/√(LC)`, for
/// `n <= n_max`, and the weight beyond `n_max`.
pub fn boltzmann_weights(spec: &ThermalSpec, l: f64) -> (Vec<f64>, f64) {
    let x = spec.beta_t / l;
    let w: Vec<f64> = (0..=spec.n_max).map(|n| -(-x).exp_m1() * (-(n as f64) * x).exp()).collect();
    let tail = (-(spec.n_max as f64 + 1.0) * x).exp();
    (w, tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelContribution {
    pub n: u32,
    pub weight: f64,
    pub diamond: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalResult {
    pub total: f64,
    /// `total / diamond(n = 0)`.
    pub enhancement: f64,
    pub levels: Vec<LevelContribution>,
    pub tail_weight: f64,
    pub warning: Option<String>,
}

/// `Σ_n P_n·diamond(n)` with one simulated gate per level.
pub fn thermal_gate_error(params: &CircuitParams, sched: &GateSchedule, spec: &ThermalSpec) -> Result<ThermalResult> {
    if !(spec.beta_t > 0.0) {
        return invalid("beta_t must be positive");
    }
    let grid = gate_grid(params, 1.0)?;
    let (weights, tail) = boltzmann_weights(spec, params.l);
    let diamonds: Vec<Result<f64>> = (0..=spec.n_max)
        .into_par_iter()
        .map(|n| run_protected_gate_on(params, sched, n, &grid).map(|r| r.diamond))
        .collect();
    let mut levels = Vec::with_capacity(weights.len());
    for (n, (w, d)) in weights.iter().zip(diamonds).enumerate() {
        levels.push(LevelContribution { n: n as u32, weight: *w, diamond: d? });
    }
    Ok(combine_levels(levels, tail))
}

/// Weighted sum of per-level errors, flagging a truncated tail above 1e-6.
pub fn combine_levels(levels: Vec<LevelContribution>, tail_weight: f64) -> ThermalResult {
    let total: f64 = levels.iter().map(|c| c.weight * c.diamond).sum();
    let ground = levels.first().map(|c| c.diamond).unwrap_or(f64::NAN);
    let warning = (tail_weight > 1e-6).then(|| format!("Boltzmann weight beyond n_max is {tail_weight:.3e}"));
    ThermalResult { total, enhancement: total / ground, levels, tail_weight, warning }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Epsilon,
    /// Initial oscillator level n.
    N,
    /// Values are the anharmonicity `α = λ·L·√(L/C)`.
    LambdaAnh,
    BetaPert,
    TauJ,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "epsilon" => Ok(SweepAxis::Epsilon),
            "n" => Ok(SweepAxis::N),
            "lambda_anh" | "lambda-anh" => Ok(SweepAxis::LambdaAnh),
            "beta_pert" | "beta-pert" => Ok(SweepAxis::BetaPert),
            "tau_j" | "tau-j" => Ok(SweepAxis::TauJ),
            other => Err(format!("unknown sweep axis '{other}'")),
        }
    }
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::N => "n",
            SweepAxis::LambdaAnh => "lambda_anh",
            SweepAxis::BetaPert => "beta_pert",
            SweepAxis::TauJ => "tau_j",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub result: std::result::Result<GateResult, String>,
}

/// One gate per value along `axis`, in input order. Failures are recorded
/// per point.
pub fn sweep(axis: SweepAxis, values: &[f64], params: &CircuitParams, sched: &GateSchedule, level: u32) -> Result<Vec<SweepPoint>> {
    let grid = gate_grid(params, 1.0)?;
    if axis == SweepAxis::Epsilon {
        let min_eps = values.iter().cloned().fold(0.0f64, f64::min);
        let min_plateau = sched.tau * (1.0 + min_eps);
        if min_plateau <= 0.0 {
            return invalid("epsilon values must keep the plateau positive");
        }
        let runner = GateRunner::new(params, sched, level, min_plateau, &grid)?;
        return Ok(values
            .par_iter()
            .map(|&eps| SweepPoint { value: eps, result: runner.run(sched.tau, eps).map_err(|e| e.to_string()) })
            .collect());
    }
    Ok(values
        .par_iter()
        .map(|&v| {
            let result = sweep_point(axis, v, params, sched, level, &grid);
            SweepPoint { value: v, result: result.map_err(|e| e.to_string()) }
        })
        .collect())
}

fn sweep_point(axis: SweepAxis, v: f64, params: &CircuitParams, sched: &GateSchedule, level: u32, grid: &PhaseGrid) -> Result<GateResult> {
    let mut p = *params;
    let mut s = *sched;
    let mut n = level;
    match axis {
        SweepAxis::Epsilon => s = s.with_epsilon(v),
        SweepAxis::N => {
            if !(v >= 0.0) || v.fract() != 0.0 {
                return invalid(format!("level {v} is not a non-negative integer"));
            }
            n = v as u32;
        }
        SweepAxis::LambdaAnh => p = p.with_alpha_anh(v),
        SweepAxis::BetaPert => p.beta_pert = v,
        SweepAxis::TauJ => {
            s.tau_j = v;
            s.dt = s.dt.min(GateSchedule::max_dt(p.j, v));
            s.reset_window();
        }
    }
    run_protected_gate_on(&p, &s, n, grid)
}
