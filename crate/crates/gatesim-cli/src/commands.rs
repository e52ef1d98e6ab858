use clap::{Args, Subcommand};
use gatesim::bands::{bloch_band, effective_capacitance, effective_capacitance_asymptote, j_eff, tunneling_amplitude, wkb_mu_nu};
use gatesim::diabatic::{effective_ramp_time, final_parity_error, final_parity_probability, lz_exact_smatrix, lz_numeric, LzNumericOptions, SampledDensity};
use gatesim::evolve::{CircuitParams, GateSchedule};
use gatesim::ftcalc::{cnot_error_bound, optimal_code_length, FtParams};
use gatesim::gate::{optimize_timing, ramp_corrected_tau, run_protected_gate_on, gate_grid, sweep as gate_sweep, GateResult, OptimizeOptions, SweepAxis};
use gatesim::gkp::{
    anharmonic_equiv_epsilon, eta_excited, eta_overrotation, eta_thermal, intrinsic_errors, sine_gaussian_integral, squeezing_shift,
    GridStateParams,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

use crate::config::Resolver;
use crate::output::Table;
use crate::{CliError, GateArgs};

/// `start:stop[:count]` (inclusive, evenly spaced) or a comma list.
pub fn parse_values(spec: &str, default_count: usize) -> Result<Vec<f64>, CliError> {
    let bad = |what: &str| CliError::Usage(format!("cannot parse {what} in '{spec}'"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad("range"));
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad("range start"))?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad("range stop"))?;
        let n: usize = match parts.get(2) {
            Some(s) => s.trim().parse().map_err(|_| bad("range count"))?,
            None => default_count,
        };
        if n == 0 {
            return Err(bad("range count"));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        return Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect());
    }
    spec.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad("value"))).collect()
}

struct GateSetup {
    params: CircuitParams,
    sched: GateSchedule,
    level: u32,
    oversample: f64,
    optimize: Option<OptimizeOptions>,
}

fn gate_setup(res: &mut Resolver, a: &GateArgs) -> Result<GateSetup, CliError> {
    let l: f64 = res.required("l", a.l)?;
    let j: f64 = res.required("j", a.j)?;
    let mut params = CircuitParams::new(l, j)?;
    params.lam = res.or("lambda", a.lambda, 0.0)?;
    if let Some(alpha) = res.get::<f64>("alpha_anh", a.alpha_anh, None)? {
        params = params.with_alpha_anh(alpha);
        res.note("lambda", &params.lam);
    }
    params.beta_pert = res.or("beta_pert", a.beta_pert, 0.0)?;
    params.validate()?;
    let tau_j = res.or("tau_j", a.tau_j, l)?;
    let tau = match res.get::<f64>("tau", a.tau, None)? {
        Some(t) => t,
        None => {
            let t = ramp_corrected_tau(&params, tau_j);
            res.note("tau", &t);
            t
        }
    };
    let epsilon = res.or("epsilon", a.epsilon, 0.0)?;
    let mut sched = GateSchedule::standard(j, tau_j, tau, epsilon);
    sched.dt = res.or("dt", a.dt, sched.dt)?;
    let level = res.or("n", a.n, 0u32)?;
    let oversample = res.or("oversample", a.oversample, 1.0)?;
    let optimize = res.switch("optimize_tau", a.optimize_tau)?;
    let search_tau_j = res.switch("optimize_tau_j", a.optimize_tau_j)?;
    let optimize = (optimize || search_tau_j).then(|| OptimizeOptions { search_tau_j, ..OptimizeOptions::default() });
    Ok(GateSetup { params, sched, level, oversample, optimize })
}

const GATE_COLUMNS: [&str; 8] = ["diamond", "c_kraus", "phi_kraus", "infidelity_bound", "two_qubit_diamond", "norm_drift", "re_overlap", "im_overlap"];

fn gate_cells(r: &GateResult) -> Vec<Value> {
    vec![
        json!(r.diamond),
        json!(r.c_kraus),
        json!(r.phi_kraus),
        json!(r.infidelity_bound),
        json!(r.two_qubit_diamond),
        json!(r.norm_drift),
        json!(r.overlap.re),
        json!(r.overlap.im),
    ]
}

pub fn simulate(res: &mut Resolver, a: &GateArgs) -> Result<Table, CliError> {
    let mut s = gate_setup(res, a)?;
    let grid = gate_grid(&s.params, s.oversample)?;
    let mut evaluations = 0usize;
    let mut converged = Value::Null;
    if let Some(opts) = s.optimize {
        let guess = GateSchedule { epsilon: 0.0, ..s.sched };
        let opt = optimize_timing(&s.params, &guess, s.level, &opts)?;
        evaluations = opt.evaluations.len();
        converged = json!(opt.converged);
        s.sched.tau = opt.tau;
        s.sched.tau_j = opt.tau_j;
        s.sched.reset_window();
        if s.sched.epsilon == 0.0 {
            return Ok(simulate_table(&s.sched, s.level, &opt.result, evaluations, converged));
        }
    }
    let r = run_protected_gate_on(&s.params, &s.sched, s.level, &grid)?;
    Ok(simulate_table(&s.sched, s.level, &r, evaluations, converged))
}

fn simulate_table(sched: &GateSchedule, level: u32, r: &GateResult, evaluations: usize, converged: Value) -> Table {
    let mut cols = vec!["tau_j", "tau", "epsilon", "n"];
    cols.extend(GATE_COLUMNS);
    cols.extend(["optimizer_evaluations", "optimizer_converged"]);
    let mut t = Table::new(&cols);
    let mut row = vec![json!(sched.tau_j), json!(sched.tau), json!(sched.epsilon), json!(level)];
    row.extend(gate_cells(r));
    row.extend([json!(evaluations), converged]);
    t.push(row);
    t
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// epsilon, n, lambda_anh, beta_pert or tau_j.
    #[arg(long)]
    pub axis: Option<String>,
    /// `start:stop[:count]` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// `simulate` (default) or `analytic` (epsilon and n axes).
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub gate: GateArgs,
}

pub fn sweep(res: &mut Resolver, a: &SweepArgs) -> Result<Table, CliError> {
    let axis_name: String = res.required("axis", a.axis.clone())?;
    let axis: SweepAxis = axis_name.parse().map_err(CliError::Usage)?;
    let spec: String = res.required("values", a.values.clone())?;
    let values = parse_values(&spec, 11)?;
    let model: String = res.or("model", a.model.clone(), "simulate".to_string())?;
    match model.as_str() {
        "analytic" => analytic_sweep(res, axis, &values, &a.gate),
        "simulate" => {
            let mut s = gate_setup(res, &a.gate)?;
            if let Some(opts) = s.optimize {
                let opt = optimize_timing(&s.params, &GateSchedule { epsilon: 0.0, ..s.sched }, s.level, &opts)?;
                s.sched.tau = opt.tau;
                s.sched.tau_j = opt.tau_j;
                s.sched.reset_window();
                res.note("tau", &opt.tau);
            }
            let points = gate_sweep(axis, &values, &s.params, &s.sched, s.level)?;
            let mut cols = vec!["axis", "value"];
            cols.extend(GATE_COLUMNS);
            cols.push("error");
            let mut t = Table::new(&cols);
            for p in points {
                let mut row = vec![json!(axis.name()), json!(p.value)];
                match &p.result {
                    Ok(r) => {
                        row.extend(gate_cells(r));
                        row.push(Value::Null);
                    }
                    Err(e) => {
                        row.extend(std::iter::repeat(Value::Null).take(GATE_COLUMNS.len()));
                        row.push(json!(e));
                    }
                }
                t.push(row);
            }
            Ok(t)
        }
        other => Err(CliError::Usage(format!("unknown model '{other}' (simulate or analytic)"))),
    }
}

fn analytic_sweep(res: &mut Resolver, axis: SweepAxis, values: &[f64], g: &GateArgs) -> Result<Table, CliError> {
    let l: f64 = res.required("l", g.l)?;
    let mut t = Table::new(&["axis", "value", "re_eta", "im_eta", "abs_eta"]);
    match axis {
        SweepAxis::Epsilon => {
            for &eps in values {
                let e = eta_overrotation(1.0 / l, eps)?;
                t.push(vec![json!(axis.name()), json!(eps), json!(e.re_eta), json!(e.im_eta), json!(e.abs_eta)]);
            }
        }
        SweepAxis::N => {
            for &v in values {
                if !(v >= 0.0) || v.fract() != 0.0 {
                    return Err(CliError::Usage(format!("level {v} is not a non-negative integer")));
                }
                let e = eta_excited(v as u32, l)?;
                t.push(vec![json!(axis.name()), json!(v), json!(e.value), json!(0.0), json!(e.value)]);
            }
        }
        other => return Err(CliError::Usage(format!("the analytic model has no '{}' axis", other.name()))),
    }
    Ok(t)
}

#[derive(Subcommand, Debug)]
pub enum AnalyticCmd {
    /// Gaussian overrotation error η_ε.
    Eta {
        #[arg(long)]
        kappa2: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
    },
    /// |η(n)| for the n-th oscillator level.
    Excited {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        l: Option<f64>,
    },
    /// Thermal enhancement of |η|.
    Thermal {
        #[arg(long)]
        beta_t: Option<f64>,
        #[arg(long)]
        l: Option<f64>,
    },
    /// Intrinsic bit-flip and phase errors of an approximate grid state.
    Intrinsic {
        #[arg(long)]
        kappa2: Option<f64>,
        #[arg(long)]
        delta2: Option<f64>,
    },
    /// I(α) = ∫₀^∞ e^{−x²} sin(αx) dx.
    Integral {
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Squeezing shift estimate and the λφ⁴ equivalent overrotation.
    Scaling {
        #[arg(long)]
        tau_j: Option<f64>,
        #[arg(long)]
        l: Option<f64>,
        #[arg(long)]
        prefactor: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
}

pub fn analytic(res: &mut Resolver, c: &AnalyticCmd) -> Result<Table, CliError> {
    match c {
        AnalyticCmd::Eta { kappa2, epsilon } => {
            let k2 = res.required("kappa2", *kappa2)?;
            let eps = res.or("epsilon", *epsilon, 0.0)?;
            let e = eta_overrotation(k2, eps)?;
            let mut t = Table::new(&["kappa2", "epsilon", "kappa_bar2", "re_eta", "im_eta", "abs_eta"]);
            t.push(vec![json!(k2), json!(eps), json!(e.kappa_bar2), json!(e.re_eta), json!(e.im_eta), json!(e.abs_eta)]);
            Ok(t)
        }
        AnalyticCmd::Excited { n, l } => {
            let n = res.required("n", *n)?;
            let l = res.required("l", *l)?;
            let e = eta_excited(n, l)?;
            let mut t = Table::new(&["n", "l", "abs_eta", "ratio", "warning"]);
            t.push(vec![json!(n), json!(l), json!(e.value), json!(e.ratio), json!(e.warning)]);
            Ok(t)
        }
        AnalyticCmd::Thermal { beta_t, l } => {
            let b = res.required("beta_t", *beta_t)?;
            let l = res.required("l", *l)?;
            let e = eta_thermal(b, l)?;
            let mut t = Table::new(&["beta_t", "l", "abs_eta", "factor"]);
            t.push(vec![json!(b), json!(l), json!(e.value), json!(e.factor)]);
            Ok(t)
        }
        AnalyticCmd::Intrinsic { kappa2, delta2 } => {
            let gp = GridStateParams { kappa2: res.required("kappa2", *kappa2)?, delta2: res.required("delta2", *delta2)? };
            let e = intrinsic_errors(&gp)?;
            let mut t = Table::new(&["kappa2", "delta2", "p_bitflip", "p_bitflip_asymptotic", "p_phase", "p_phase_exact", "warnings"]);
            t.push(vec![
                json!(gp.kappa2),
                json!(gp.delta2),
                json!(e.p_bitflip),
                json!(e.p_bitflip_asymptotic),
                json!(e.p_phase),
                json!(e.p_phase_exact),
                json!(gp.warnings().join("; ")),
            ]);
            Ok(t)
        }
        AnalyticCmd::Integral { alpha } => {
            let a = res.required("alpha", *alpha)?;
            let mut t = Table::new(&["alpha", "integral"]);
            t.push(vec![json!(a), json!(sine_gaussian_integral(a))]);
            Ok(t)
        }
        AnalyticCmd::Scaling { tau_j, l, prefactor, lambda } => {
            let l = res.required("l", *l)?;
            let tj = res.or("tau_j", *tau_j, l)?;
            let pf = res.or("prefactor", *prefactor, 1.0)?;
            let lam = res.or("lambda", *lambda, 0.0)?;
            let mut t = Table::new(&["tau_j", "l", "squeezing_shift", "lambda", "equivalent_epsilon"]);
            t.push(vec![json!(tj), json!(l), json!(squeezing_shift(tj, l, pf)?), json!(lam), json!(anharmonic_equiv_epsilon(lam, l)?)]);
            Ok(t)
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum DiabaticCmd {
    /// Landau-Zener transition probability.
    Lz {
        #[arg(long)]
        u: Option<f64>,
        /// Also integrate the two-level ODE.
        #[arg(long)]
        numeric: bool,
    },
    /// Effective ramp time of the erf pulse.
    Ramp {
        #[arg(long)]
        tau_j: Option<f64>,
        #[arg(long)]
        j0c: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Final parity for a Gaussian charge density of variance κ²/2.
    Parity {
        #[arg(long)]
        kappa2: Option<f64>,
        #[arg(long)]
        tau_j_eff: Option<f64>,
    },
}

pub fn diabatic(res: &mut Resolver, c: &DiabaticCmd) -> Result<Table, CliError> {
    match c {
        DiabaticCmd::Lz { u, numeric } => {
            let u = res.required("u", *u)?;
            let numeric = res.switch("numeric", *numeric)?;
            let s = lz_exact_smatrix(u)?;
            let ode = if numeric { json!(lz_numeric(u, &LzNumericOptions::default())?) } else { Value::Null };
            let mut t = Table::new(&["u", "p_transition", "p_numeric", "unitarity_error"]);
            t.push(vec![json!(u), json!(s.p_transition), ode, json!(s.unitarity_error())]);
            Ok(t)
        }
        DiabaticCmd::Ramp { tau_j, j0c, q } => {
            let tj = res.required("tau_j", *tau_j)?;
            let j0c = res.required("j0c", *j0c)?;
            let q = res.or("q", *q, 0.0)?;
            let mut t = Table::new(&["tau_j", "j0c", "q", "tau_j_eff"]);
            t.push(vec![json!(tj), json!(j0c), json!(q), json!(effective_ramp_time(tj, j0c, q)?)]);
            Ok(t)
        }
        DiabaticCmd::Parity { kappa2, tau_j_eff } => {
            let k2: f64 = res.required("kappa2", *kappa2)?;
            let te = res.required("tau_j_eff", *tau_j_eff)?;
            let half = 0.5 + 12.0 * k2.sqrt();
            let n = 4001;
            let dq = 2.0 * half / (n - 1) as f64;
            let density = SampledDensity::from_fn(-half, dq, n, |q| (-q * q / k2).exp() / (PI * k2).sqrt());
            let mut t = Table::new(&["kappa2", "tau_j_eff", "p_inside", "p_error"]);
            t.push(vec![json!(k2), json!(te), json!(final_parity_probability(&density, te)?), json!(final_parity_error(&density, te)?)]);
            Ok(t)
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum BandsCmd {
    /// C/C_eff over a range of JC.
    Ceff {
        #[arg(long)]
        jc_range: Option<String>,
    },
    /// J_eff of the switch over a range of JC.
    Jeff {
        #[arg(long)]
        jc_range: Option<String>,
        #[arg(long)]
        l: Option<f64>,
    },
    /// WKB factors μ, ν over a range of JC.
    Wkb {
        #[arg(long)]
        jc_range: Option<String>,
    },
    /// Lowest Bloch band at one JC.
    Band {
        #[arg(long)]
        jc: Option<f64>,
        #[arg(long)]
        n_q: Option<usize>,
    },
}

fn jc_values(res: &mut Resolver, flag: &Option<String>) -> Result<Vec<f64>, CliError> {
    let spec: String = res.required("jc_range", flag.clone())?;
    let v = parse_values(&spec, 10)?;
    if v.iter().any(|x| !(*x >= 0.0)) {
        return Err(CliError::Usage("jc values must be non-negative".into()));
    }
    Ok(v)
}

pub fn bands(res: &mut Resolver, c: &BandsCmd) -> Result<Table, CliError> {
    match c {
        BandsCmd::Ceff { jc_range } => {
            let jcs = jc_values(res, jc_range)?;
            let vals: Vec<gatesim::Result<f64>> = jcs.par_iter().map(|&jc| effective_capacitance(jc)).collect();
            let mut t = Table::new(&["jc", "c_over_ceff", "asymptote"]);
            for (jc, v) in jcs.iter().zip(vals) {
                t.push(vec![json!(jc), json!(v?), json!(effective_capacitance_asymptote(*jc))]);
            }
            Ok(t)
        }
        BandsCmd::Jeff { jc_range, l } => {
            let jcs = jc_values(res, jc_range)?;
            let l = res.required("l", *l)?;
            let vals: Vec<_> = jcs.par_iter().map(|&jc| j_eff(jc, l)).collect();
            let mut t = Table::new(&["jc", "j_eff", "regime", "crossover"]);
            for (jc, v) in jcs.iter().zip(vals) {
                let v = v?;
                t.push(vec![json!(jc), json!(v.value), serde_json::to_value(v.regime).unwrap_or(Value::Null), json!(v.crossover)]);
            }
            Ok(t)
        }
        BandsCmd::Wkb { jc_range } => {
            let jcs = jc_values(res, jc_range)?;
            let vals: Vec<_> = jcs.par_iter().map(|&jc| wkb_mu_nu(jc)).collect();
            let mut t = Table::new(&["jc", "mu", "nu", "c_eff"]);
            for (jc, v) in jcs.iter().zip(vals) {
                let v = v?;
                t.push(vec![json!(jc), json!(v.mu), json!(v.nu), json!(v.c_eff)]);
            }
            Ok(t)
        }
        BandsCmd::Band { jc, n_q } => {
            let jc = res.required("jc", *jc)?;
            let n_q = res.or("n_q", *n_q, 41usize)?;
            let b = bloch_band(jc, n_q, None)?;
            let lambda_t = if jc > 0.0 { json!(tunneling_amplitude(jc)?.lambda_t) } else { Value::Null };
            res.note("basis_cutoff", &b.basis_cutoff);
            let mut t = Table::new(&["q", "energy", "offset", "tight_binding_lambda"]);
            for ((q, e), off) in b.q_samples.iter().zip(&b.offsets) {
                t.push(vec![json!(q), json!(e), json!(off), lambda_t.clone()]);
            }
            Ok(t)
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum FtCmd {
    /// Bound for one code length.
    Bound {
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        rates: Rates,
    },
    /// Smallest odd n meeting a target.
    Optimal {
        #[arg(long)]
        target: Option<f64>,
        #[command(flatten)]
        rates: Rates,
    },
    /// Bounds for n = 1, 3, …, n_max.
    Table {
        #[arg(long)]
        n_max: Option<u32>,
        #[command(flatten)]
        rates: Rates,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Rates {
    #[arg(long)]
    pub eps_m: Option<f64>,
    #[arg(long)]
    pub eps_g: Option<f64>,
    /// Bit-flip rate ε_g′.
    #[arg(long)]
    pub eps_gp: Option<f64>,
}

fn rates(res: &mut Resolver, r: &Rates) -> Result<(f64, f64, f64), CliError> {
    Ok((res.required("eps_g", r.eps_g)?, res.required("eps_gp", r.eps_gp)?, res.required("eps_m", r.eps_m)?))
}

const FT_COLUMNS: [&str; 3] = ["n", "exact_bound", "stirling_bound"];

pub fn ft(res: &mut Resolver, c: &FtCmd) -> Result<Table, CliError> {
    match c {
        FtCmd::Bound { n, rates: r } => {
            let n = res.required("n", *n)?;
            let (eps_g, eps_g_prime, eps_m) = rates(res, r)?;
            let b = cnot_error_bound(&FtParams { n, eps_g, eps_g_prime, eps_m })?;
            let mut t = Table::new(&FT_COLUMNS);
            t.push(vec![json!(n), json!(b.exact_bound), json!(b.stirling_bound)]);
            Ok(t)
        }
        FtCmd::Optimal { target, rates: r } => {
            let target = res.required("target", *target)?;
            let (eps_g, eps_g_prime, eps_m) = rates(res, r)?;
            let n = optimal_code_length(eps_g, eps_g_prime, eps_m, target)?;
            let b = cnot_error_bound(&FtParams { n, eps_g, eps_g_prime, eps_m })?;
            let mut t = Table::new(&FT_COLUMNS);
            t.push(vec![json!(n), json!(b.exact_bound), json!(b.stirling_bound)]);
            Ok(t)
        }
        FtCmd::Table { n_max, rates: r } => {
            let n_max = res.or("n_max", *n_max, 21u32)?;
            let (eps_g, eps_g_prime, eps_m) = rates(res, r)?;
            let mut t = Table::new(&FT_COLUMNS);
            for n in (1..=n_max).step_by(2) {
                let b = cnot_error_bound(&FtParams { n, eps_g, eps_g_prime, eps_m })?;
                t.push(vec![json!(n), json!(b.exact_bound), json!(b.stirling_bound)]);
            }
            Ok(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0:1:3", 10).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_values("0.1, 0.2", 10).unwrap(), vec![0.1, 0.2]);
        assert_eq!(parse_values("0:9", 10).unwrap().len(), 10);
        assert_eq!(parse_values("2:5:1", 10).unwrap(), vec![2.0]);
        assert!(parse_values("0:1:0", 10).is_err());
        assert!(parse_values("a,b", 10).is_err());
        assert!(parse_values("1:2:3:4", 10).is_err());
    }
}
