//! Envelope momentum spectra against closed-form transforms and symmetry
//! properties.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use ramsey_core::spectrum::amplitude_spectrum;
use ramsey_core::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `sin⁴(πx) · Σ c_n exp(i q_n x)` written as a plain sum of exponentials
/// `(weight, wavenumber)`.
fn tapered_terms(components: &[(f64, f64, f64)]) -> Vec<(Complex64, f64)> {
    let taper = [
        (3.0 / 8.0, 0.0),
        (-0.25, 2.0 * PI),
        (-0.25, -2.0 * PI),
        (1.0 / 16.0, 4.0 * PI),
        (1.0 / 16.0, -4.0 * PI),
    ];
    let mut out = Vec::new();
    for &(re, im, q) in components {
        for &(t, p) in &taper {
            out.push((Complex64::new(re, im) * t, q + p));
        }
    }
    out
}

fn sample(terms: &[(Complex64, f64)], nx: usize) -> Vec<Complex64> {
    (0..nx)
        .map(|i| {
            let x = i as f64 / (nx - 1) as f64;
            terms.iter().map(|&(c, p)| c * Complex64::cis(p * x)).sum()
        })
        .collect()
}

/// Exact `∫₀¹ exp(-ikx) a(x) dx`.
fn exact_transform(terms: &[(Complex64, f64)], k: f64) -> Complex64 {
    terms
        .iter()
        .map(|&(c, p)| {
            let s = p - k;
            if s.abs() < 1e-9 {
                c * (1.0 + I * s / 2.0)
            } else {
                c * (Complex64::cis(s) - 1.0) / (I * s)
            }
        })
        .sum()
}

/// Mean and variance of `|f|²` by dense trapezoid quadrature.
fn dense_moments(terms: &[(Complex64, f64)], half_width: f64, points: usize) -> (f64, f64) {
    let dk = 2.0 * half_width / (points - 1) as f64;
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..points {
        let k = -half_width + i as f64 * dk;
        let w = exact_transform(terms, k).norm_sqr() * if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
        m0 += w;
        m1 += w * k;
        m2 += w * k * k;
    }
    let mean = m1 / m0;
    (mean, m2 / m0 - mean * mean)
}

#[test]
fn band_limited_envelopes_match_dense_oracle() {
    let cases: [&[(f64, f64, f64)]; 4] = [
        &[(1.0, 0.0, 0.0)],
        &[(0.8, 0.3, 7.5), (0.2, -0.4, -12.0)],
        &[(0.5, 0.5, -25.0), (0.3, 0.0, 3.0), (-0.2, 0.6, 18.0)],
        &[(0.05, 0.0, 30.0), (1.0, -1.0, -4.0)],
    ];
    let window = KGrid::default();
    for components in cases {
        let terms = tapered_terms(components);
        let s = amplitude_spectrum(&sample(&terms, 256), ModeIndex(2), &window).unwrap();
        let (kappa, var) = dense_moments(&terms, 10.0 * window.half_width, 10 * window.points);
        let scale = var.sqrt().max(1.0);
        assert!((s.kappa - kappa).abs() <= 1e-6 * scale, "kappa {} vs {kappa}", s.kappa);
        assert!((s.variance - var).abs() <= 1e-6 * var, "variance {} vs {var}", s.variance);
    }
}

#[test]
fn box_envelope_parseval_improves_under_window_doubling() {
    let a = vec![Complex64::new(1.0, 0.0); 1024];
    let mut window = KGrid::default();
    let mut last = f64::INFINITY;
    for _ in 0..3 {
        let s = amplitude_spectrum(&a, ModeIndex(2), &window).unwrap();
        let err = (s.parseval_ratio() - 1.0).abs();
        assert!(err < last, "error {err} after {last}");
        if window == KGrid::default() {
            assert!(err <= 0.02, "default window error {err}");
        }
        last = err;
        window = window.doubled();
    }
}

#[test]
fn mirrored_clouds_have_mirrored_spectra() {
    let p = DimensionlessParams {
        delta: -0.5,
        mode_set: ModeSet::new(4).unwrap(),
        grid: GridSpec::new(128, Stencil::Central2).unwrap(),
        ..reference_defaults()
    };
    let state = run_first_pulse(&p, 800.0).unwrap();
    let window = KGrid::default();
    for j in [2, 4] {
        let plus = envelope_spectrum(&state, ModeIndex(j), &window).unwrap();
        let minus = envelope_spectrum(&state, ModeIndex(-j), &window).unwrap();
        assert!((plus.kappa + minus.kappa).abs() <= 1e-8, "j = {j}");
        let n = plus.w.len();
        for i in 0..n {
            assert!((plus.w[i] - minus.w[n - 1 - i]).abs() <= 1e-10 * plus.w[i].max(1.0));
        }
        let rp = recoil_report(&plus, p.k0l).unwrap();
        let rm = recoil_report(&minus, p.k0l).unwrap();
        assert!((rp.delta_k_over_k0 - rm.delta_k_over_k0).abs() <= 1e-12);
    }
}

proptest! {
    #[test]
    fn density_is_normalised(
        re in prop::collection::vec(-1.0..1.0f64, 64),
        im in prop::collection::vec(-1.0..1.0f64, 64),
    ) {
        let a: Vec<Complex64> = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        prop_assume!(a.iter().any(|z| z.norm() > 1e-3));
        let window = KGrid::new(16.0 * PI, 1025).unwrap();
        let s = amplitude_spectrum(&a, ModeIndex(2), &window).unwrap();
        prop_assert!((s.total_probability() - 1.0).abs() <= 1e-10);
        prop_assert!(s.variance >= 0.0);
    }

    #[test]
    fn global_phase_leaves_the_spectrum_unchanged(phase in 0.0..6.3f64, q in -20.0..20.0f64) {
        let a: Vec<Complex64> = (0..128).map(|i| Complex64::cis(q * i as f64 / 127.0)).collect();
        let b: Vec<Complex64> = a.iter().map(|z| z * Complex64::cis(phase)).collect();
        let sa = amplitude_spectrum(&a, ModeIndex(2), &KGrid::new(32.0 * PI, 2049).unwrap()).unwrap();
        let sb = amplitude_spectrum(&b, ModeIndex(2), &KGrid::new(32.0 * PI, 2049).unwrap()).unwrap();
        prop_assert!((sa.kappa - sb.kappa).abs() <= 1e-10 * (1.0 + q.abs()));
    }
}
