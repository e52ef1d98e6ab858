//! Special functions not covered by `statrs`: a fast `sin`/`cos` kernel for
//! bounded arguments, the complex Gamma function and Dawson's integral.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest |t| for which [`sin_cos_bounded`] is accurate to a few ulp.
pub const POLY_TRIG_LIMIT: f64 = 2.0;

// (-1)^k / (2k+1)!, highest order first.
const SIN_COEF: [f64; 13] = [
    1.0 / 15_511_210_043_330_985_984_000_000.0,
    -1.0 / 25_852_016_738_884_976_640_000.0,
    1.0 / 51_090_942_171_709_440_000.0,
    -1.0 / 121_645_100_408_832_000.0,
    1.0 / 355_687_428_096_000.0,
    -1.0 / 1_307_674_368_000.0,
    1.0 / 6_227_020_800.0,
    -1.0 / 39_916_800.0,
    1.0 / 362_880.0,
    -1.0 / 5_040.0,
    1.0 / 120.0,
    -1.0 / 6.0,
    1.0,
];

// (-1)^k / (2k)!, highest order first.
const COS_COEF: [f64; 14] = [
    -1.0 / 403_291_461_126_605_635_584_000_000.0,
    1.0 / 620_448_401_733_239_439_360_000.0,
    -1.0 / 1_124_000_727_777_607_680_000.0,
    1.0 / 2_432_902_008_176_640_000.0,
    -1.0 / 6_402_373_705_728_000.0,
    1.0 / 20_922_789_888_000.0,
    -1.0 / 87_178_291_200.0,
    1.0 / 479_001_600.0,
    -1.0 / 3_628_800.0,
    1.0 / 40_320.0,
    -1.0 / 720.0,
    1.0 / 24.0,
    -0.5,
    1.0,
];

/// `(sin t, cos t)` for `|t| <= POLY_TRIG_LIMIT` from Taylor polynomials in `t²`.
///
/// The truncation error is below 1e-19 on the admissible range, so the result
/// is limited by rounding. Callers fall back to `f64::sin_cos` outside it.
#[inline(always)]
pub fn sin_cos_bounded(t: f64) -> (f64, f64) {
    sin_cos_terms::<13, 14>(t)
}

/// Taylor kernel keeping the lowest `NS` sine and `NC` cosine terms.
#[inline(always)]
fn sin_cos_terms<const NS: usize, const NC: usize>(t: f64) -> (f64, f64) {
    let x2 = t * t;
    let sc = &SIN_COEF[SIN_COEF.len() - NS..];
    let cc = &COS_COEF[COS_COEF.len() - NC..];
    let mut s = sc[0];
    for &c in &sc[1..] {
        s = s * x2 + c;
    }
    let mut c = cc[0];
    for &k in &cc[1..] {
        c = c * x2 + k;
    }
    (s * t, c)
}

#[inline(always)]
fn fill_with<const NS: usize, const NC: usize>(out: &mut [Complex64], base: &[Complex64], g: &[f64], scale: f64) {
    for ((o, b), &gi) in out.iter_mut().zip(base).zip(g) {
        let (s, c) = sin_cos_terms::<NS, NC>(scale * gi);
        *o = *b * Complex64::new(c, -s);
    }
}

#[inline(always)]
fn apply_with<const NS: usize, const NC: usize>(psi: &mut [Complex64], g: &[f64], scale: f64) {
    for (p, &gi) in psi.iter_mut().zip(g) {
        let (s, c) = sin_cos_terms::<NS, NC>(scale * gi);
        *p *= Complex64::new(c, -s);
    }
}

/// Multiplies every `psi[i]` by `exp(-i·scale·g[i])`; `g_abs_max` bounds `|g|`
/// and selects the polynomial length.
pub fn apply_phase(psi: &mut [Complex64], g: &[f64], scale: f64, g_abs_max: f64) {
    let bound = (scale * g_abs_max).abs();
    if bound <= 0.01 {
        apply_with::<3, 4>(psi, g, scale);
    } else if bound <= 0.25 {
        apply_with::<6, 7>(psi, g, scale);
    } else if bound <= 0.6 {
        apply_with::<8, 8>(psi, g, scale);
    } else if bound <= 1.1 {
        apply_with::<10, 10>(psi, g, scale);
    } else if bound <= POLY_TRIG_LIMIT {
        apply_with::<13, 14>(psi, g, scale);
    } else {
        for (p, &gi) in psi.iter_mut().zip(g) {
            let (s, c) = (scale * gi).sin_cos();
            *p *= Complex64::new(c, -s);
        }
    }
}

/// Writes `out[i] = base[i]·exp(-i·scale·g[i])`.
pub fn fill_phase(out: &mut [Complex64], base: &[Complex64], g: &[f64], scale: f64, g_abs_max: f64) {
    let bound = (scale * g_abs_max).abs();
    if bound <= 0.01 {
        fill_with::<3, 4>(out, base, g, scale);
    } else if bound <= 0.25 {
        fill_with::<6, 7>(out, base, g, scale);
    } else if bound <= 0.6 {
        fill_with::<8, 8>(out, base, g, scale);
    } else if bound <= 1.1 {
        fill_with::<10, 10>(out, base, g, scale);
    } else if bound <= POLY_TRIG_LIMIT {
        fill_with::<13, 14>(out, base, g, scale);
    } else {
        for ((o, b), &gi) in out.iter_mut().zip(base).zip(g) {
            let (s, c) = (scale * gi).sin_cos();
            *o = *b * Complex64::new(c, -s);
        }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex Gamma function: Lanczos series (g = 7, 9 terms) for `Re z >= ½`,
/// reflection formula otherwise. Relative accuracy is about 1e-15.
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::from(PI) / (s * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::from(LANCZOS_P[0]);
    for (i, &p) in LANCZOS_P.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * ((z + 0.5) * t.ln() - t).exp() * x
}

/// Dawson's integral `D(x) = e^{-x²} ∫₀ˣ e^{t²} dt`.
///
/// Taylor series near the origin, otherwise the odd-lattice sum
/// `D(x) = π^{-1/2} Σ_{n odd} e^{-(x-nh)²}/n` with `h = ¼`, whose aliasing
/// error is of order `e^{-(π/2h)²} ≈ 7e-18`.
pub fn dawson(x: f64) -> f64 {
    if x.abs() < 0.2 {
        // sum_k (-1)^k 2^k x^{2k+1} / (2k+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        for k in 1..20 {
            term *= -2.0 * x2 / (2 * k + 1) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    const H: f64 = 0.25;
    const REACH: f64 = 8.7;
    let lo = ((x - REACH) / H).floor() as i64;
    let hi = ((x + REACH) / H).ceil() as i64;
    let mut sum = 0.0;
    for n in lo..=hi {
        if n % 2 == 0 {
            continue;
        }
        let d = x - n as f64 * H;
        sum += (-d * d).exp() / n as f64;
    }
    sum / PI.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_trig_matches_libm() {
        let mut worst: f64 = 0.0;
        for i in 0..=40_000 {
            let t = -2.0 + 4.0 * i as f64 / 40_000.0;
            let (s, c) = sin_cos_bounded(t);
            worst = worst.max((s - t.sin()).abs()).max((c - t.cos()).abs());
        }
        assert!(worst < 1e-15, "worst deviation {worst:e}");
    }

    #[test]
    fn phase_tiers_match_libm() {
        let g: Vec<f64> = (0..=2000).map(|i| -1.0 + i as f64 / 1000.0).collect();
        for &scale in &[0.005, 0.01, 0.2, 0.25, 0.5, 0.6, 1.0, 1.1, 1.9, 3.0] {
            let mut psi = vec![Complex64::new(1.0, 0.0); g.len()];
            apply_phase(&mut psi, &g, scale, 1.0);
            let worst = psi
                .iter()
                .zip(&g)
                .map(|(p, &x)| (p - Complex64::from_polar(1.0, -scale * x)).norm())
                .fold(0.0, f64::max);
            assert!(worst < 2e-16 * 4.0, "scale {scale}: {worst:e}");
        }
    }

    #[test]
    fn gamma_reflection_modulus() {
        for &u in &[0.0, 0.3, 1.0, 2.5, 5.0] {
            let g = gamma_complex(Complex64::new(0.5, u));
            let expect = PI / (PI * u).cosh();
            assert!((g.norm_sqr() / expect - 1.0).abs() < 1e-12, "u = {u}");
        }
        let g = gamma_complex(Complex64::new(5.0, 0.0));
        assert!((g.re - 24.0).abs() < 1e-12 && g.im.abs() < 1e-12);
        let g = gamma_complex(Complex64::new(-0.5, 0.0));
        assert!((g.re + 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dawson_branches_agree_at_switch() {
        // series branch forced past its cutoff vs lattice sum
        let x = 0.2f64;
        let lattice = dawson(x + 1e-15);
        // Σ (−2x²)ⁿ x / (2n+1)!!
        let (mut term, mut series) = (x, x);
        for n in 1..30 {
            term *= -2.0 * x * x / (2 * n + 1) as f64;
            series += term;
        }
        assert!((lattice - series).abs() < 1e-13, "{lattice} vs {series}");
    }
}
