use gatesim::diabatic::{
    effective_ramp_time, final_parity_error, final_parity_probability, lz_amplitude, lz_exact_smatrix, lz_numeric, lz_probability,
    LzNumericOptions, LzParams, SampledDensity,
};
use gatesim::Error;
use std::f64::consts::PI;

#[test]
fn transition_probability_examples() {
    assert_eq!(lz_probability(0.0), 0.5);
    let p2 = lz_probability(2.0);
    assert!((p2 / (-4.0 * PI).exp() - 1.0).abs() < 1e-3);
    assert!((p2 - 0.5 * (1.0 - (2.0 * PI).tanh())).abs() < 1e-15);
    assert!((lz_probability(-2.0) - (1.0 - p2)).abs() < 1e-15);
    assert!(lz_probability(40.0) > 0.0);
}

#[test]
fn amplitude_obeys_gamma_identity() {
    // |Γ(½+iu)|² = π/cosh πu, so |f(u)|² = e^{πu}/(2 cosh πu)
    for u in [-5.0, -2.0, -0.5, 0.0, 0.3, 1.0, 2.0, 5.0] {
        let want = (PI * u).exp() / (2.0 * (PI * u).cosh());
        assert!((lz_amplitude(u).norm_sqr() - want).abs() < 1e-12 * want.max(1e-300) + 1e-15, "u {u}");
    }
}

#[test]
fn smatrix_examples_and_unitarity() {
    for u in [0.0, 0.5, -0.5, 2.0, -2.0] {
        let s = lz_exact_smatrix(u).unwrap();
        assert!((s.s_matrix[0][0].norm_sqr() + s.s_matrix[0][1].norm_sqr() - 1.0).abs() < 1e-12);
    }
    assert!((lz_exact_smatrix(0.0).unwrap().p_transition - 0.5).abs() < 1e-12);
    let s1 = lz_exact_smatrix(1.0).unwrap();
    assert!((s1.p_transition - 1.0 / ((2.0 * PI).exp() + 1.0)).abs() < 1e-12);
    assert!((s1.p_transition - 1.8640e-3).abs() < 1e-7);
    for k in 0..=100 {
        let u = -5.0 + 0.1 * k as f64;
        let s = lz_exact_smatrix(u).unwrap();
        assert!(s.unitarity_error() < 1e-10, "u {u}: {:e}", s.unitarity_error());
        assert!((s.p_transition - lz_probability(u)).abs() < 1e-10);
    }
    assert!(lz_exact_smatrix(f64::NAN).is_err());
}

#[test]
fn ode_oracle_matches_closed_form() {
    let opts = LzNumericOptions::default();
    let mut worst = 0.0f64;
    for k in 0..=30 {
        let u = 0.1 * k as f64;
        worst = worst.max((lz_numeric(u, &opts).unwrap() - lz_probability(u)).abs());
    }
    assert!(worst <= 1e-4, "max deviation {worst:e}");
    assert!((lz_numeric(0.0, &opts).unwrap() - 0.5).abs() < 1e-4);
    let p3 = lz_numeric(3.0, &opts).unwrap();
    assert!(p3 <= 1e-7 && p3 > 0.1 * (-6.0 * PI).exp(), "{p3:e}");
    let inverted = lz_numeric(-1.0, &opts).unwrap();
    assert!((inverted - lz_probability(-1.0)).abs() < 1e-4);
    assert!(lz_numeric(1.0, &LzNumericOptions { window: Some((1.0, 0.0)), ..opts }).is_err());
}

#[test]
fn band_crossing_parameters() {
    let p = LzParams::band(0.25, 8.0).unwrap();
    assert_eq!(p.u, 1.0);
    assert!(LzParams::band(0.6, 8.0).is_err());
    assert!(LzParams::band(0.1, -1.0).is_err());
}

#[test]
fn effective_ramp_time_examples() {
    let t = effective_ramp_time(1.0, 64.0, 0.4999).unwrap();
    assert!((t - 0.5 / (64.0f64 / 2e-4).ln().sqrt()).abs() < 1e-9);
    assert!((t - 0.14044).abs() < 1e-5);
    let t2 = effective_ramp_time(80.0, 64.0, 0.25).unwrap();
    assert!((t2 / 80.0 - 0.2270).abs() < 1e-4);
    assert!(matches!(effective_ramp_time(1.0, 64.0, 0.5), Err(Error::Domain(_))));
    assert!(matches!(effective_ramp_time(1.0, 0.5, 0.0), Err(Error::Domain(_))));
    assert!(effective_ramp_time(0.0, 64.0, 0.0).is_err());
}

fn gaussian_density(k2: f64) -> SampledDensity {
    SampledDensity::from_fn(-1.0, 1e-3, 2001, |q| (-q * q / k2).exp() / (PI * k2).sqrt())
}

#[test]
fn final_parity_limits() {
    let inside = gaussian_density(1.0 / 300.0);
    assert!(final_parity_probability(&inside, 1e4).unwrap() > 1.0 - 1e-12);
    let d = gaussian_density(1.0 / 80.0);
    assert_eq!(final_parity_probability(&d, 0.0).unwrap(), 0.0);
    // frozen from a 30-digit quadrature of ∫P(1 − tanh); equals 2e^{−20}
    let e = final_parity_error(&d, 80.0 / PI).unwrap();
    assert!((e / 4.1223072438e-9 - 1.0).abs() < 1e-3, "{e:e}");
    let unnormalized = SampledDensity::from_fn(-0.5, 1e-3, 1001, |_| 2.0);
    assert!(final_parity_probability(&unnormalized, 1.0).is_err());
    assert!(final_parity_probability(&d, -1.0).is_err());
}

#[test]
fn final_parity_is_monotone_in_ramp_time() {
    let d = gaussian_density(1.0 / 20.0);
    let mut last = -1.0;
    for k in 0..40 {
        let p = final_parity_probability(&d, 0.5 * k as f64).unwrap();
        assert!(p >= last);
        last = p;
    }
}
