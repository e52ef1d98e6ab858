use gatesim::bands::{default_cutoff, BandSolver};
use gatesim::diabatic::{lz_exact_smatrix, lz_probability};
use gatesim::ftcalc::{cnot_error_bound, FtParams};
use gatesim::gkp::{eta_overrotation, sine_gaussian_integral};
use gatesim::qmgrid::{expect_cos, harmonic_eigenstate, parity_probabilities, to_momentum, to_position, PhaseGrid, WaveFunction};
use gatesim::Complex64;
use proptest::prelude::*;

fn grid() -> PhaseGrid {
    PhaseGrid::new(512, 16.0 * std::f64::consts::PI).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_round_trip(seed in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 512)) {
        let g = grid();
        let amps: Vec<Complex64> = seed.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let wf = WaveFunction { grid: g, amps };
        let back = to_position(&to_momentum(&wf));
        let worst = wf.amps.iter().zip(&back.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-12);
        let (n1, n2) = (wf.norm_sqr(), to_momentum(&wf).norm_sqr());
        prop_assert!((n1 - n2).abs() < 1e-12 * n1);
    }

    #[test]
    fn oscillator_uncertainty(n in 0u32..5, l in 2.0f64..12.0) {
        let g = grid();
        let psi = harmonic_eigenstate(&g, l, n).unwrap();
        let prod = psi.expect_phi2() * psi.expect_q2();
        let want = (f64::from(n) + 0.5).powi(2);
        prop_assert!((prod / want - 1.0).abs() < 1e-8, "{prod} vs {want}");
    }

    #[test]
    fn gaussian_cosine_expectation(sigma in 0.3f64..3.0, x0 in -2.0f64..2.0) {
        let g = grid();
        let mut wf = WaveFunction::from_fn(g, |p| Complex64::from((-(p - x0).powi(2) / (4.0 * sigma * sigma)).exp())).unwrap();
        wf.normalize().unwrap();
        let c = expect_cos(&wf, 1).unwrap();
        let want = (-sigma * sigma / 2.0).exp() * x0.cos();
        prop_assert!((c - want).abs() < 1e-10);
        let (pe, po) = parity_probabilities(&wf);
        prop_assert!((pe + po - 1.0).abs() < 1e-12);
        prop_assert!(pe >= 0.0 && po >= 0.0);
    }

    #[test]
    fn bound_is_monotone_in_each_rate(half in 0u32..20, eg in 0.0f64..1e-3, egp in 0.0f64..1e-6, em in 0.0f64..0.05, bump in 1e-6f64..1e-3) {
        let base = FtParams { n: 2 * half + 1, eps_g: eg, eps_g_prime: egp, eps_m: em };
        let b0 = cnot_error_bound(&base).unwrap().exact_bound;
        for p in [
            FtParams { eps_g: eg + bump * 1e-3, ..base },
            FtParams { eps_g_prime: egp + bump * 1e-3, ..base },
            FtParams { eps_m: em + bump, ..base },
        ] {
            prop_assert!(cnot_error_bound(&p).unwrap().exact_bound >= b0);
        }
    }

    #[test]
    fn landau_zener_unitarity_and_symmetry(u in -5.0f64..5.0) {
        let s = lz_exact_smatrix(u).unwrap();
        prop_assert!(s.unitarity_error() < 1e-10);
        prop_assert!((lz_probability(u) + lz_probability(-u) - 1.0).abs() < 1e-14);
        prop_assert!((s.p_transition - lz_probability(u)).abs() < 1e-10);
    }

    #[test]
    fn overrotation_error_shape(k2 in 1.0f64 / 200.0..0.05, eps in 0.0f64..0.05) {
        let p = eta_overrotation(k2, eps).unwrap();
        let m = eta_overrotation(k2, -eps).unwrap();
        prop_assert!((p.abs_eta - m.abs_eta).abs() <= 1e-14 * p.abs_eta.max(1e-300));
        prop_assert!(p.re_eta >= 0.0);
        prop_assert!(p.abs_eta <= 4.0);
        prop_assert!(p.im_eta <= 0.0 && m.im_eta >= 0.0);
        let a = eps / (std::f64::consts::PI * p.kappa_bar2.sqrt() * k2);
        prop_assert!(sine_gaussian_integral(a) <= 0.5411);
    }

    #[test]
    fn bands_are_even_and_periodic(jc in 0.0f64..20.0, q in -0.5f64..0.5) {
        let s = BandSolver::new(jc, default_cutoff(jc)).unwrap();
        let e = s.energy(q);
        prop_assert!((e - s.energy(-q)).abs() < 1e-11);
        prop_assert!((e - s.energy(q + 1.0)).abs() < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stirling_form_dominates(half in 0u32..40, eg in 0.0f64..1e-2, egp in 0.0f64..1e-3, em in 0.0f64..0.1) {
        let b = cnot_error_bound(&FtParams { n: 2 * half + 1, eps_g: eg, eps_g_prime: egp, eps_m: em }).unwrap();
        prop_assert!(b.exact_bound <= b.stirling_bound * (1.0 + 1e-12));
    }

    #[test]
    fn bound_eventually_decreases_without_bit_flips(eg in 1e-7f64..1e-4, em in 1e-4f64..0.05) {
        // with 3nε_g + 2ε_m well below 1/4 each step n → n+2 shrinks the head
        let b = |n: u32| cnot_error_bound(&FtParams { n, eps_g: eg, eps_g_prime: 0.0, eps_m: em }).unwrap().exact_bound;
        prop_assert!(b(13) < b(11) && b(11) < b(9));
    }
}
