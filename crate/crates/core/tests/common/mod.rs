//! Straight-line oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use ramsey_core::*;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smooth random row: a sum of a few complex Fourier modes on `[0, 1]`.
pub fn smooth_row(coeffs: &[(f64, f64)], nx: usize) -> Vec<Complex64> {
    (0..nx)
        .map(|i| {
            let x = i as f64 / (nx - 1) as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(n, &(re, im))| Complex64::new(re, im) * Complex64::cis(PI * n as f64 * x))
                .sum()
        })
        .collect()
}

pub fn smooth_state(mode_set: ModeSet, nx: usize, coeffs: &[(f64, f64)]) -> FieldState {
    let rows = mode_set.n_ground() + mode_set.n_excited();
    let per_row = coeffs.len() / rows;
    let row = |r: usize| smooth_row(&coeffs[r * per_row..(r + 1) * per_row], nx);
    let ground = (0..mode_set.n_ground()).map(row).collect();
    let excited = (mode_set.n_ground()..rows).map(row).collect();
    FieldState::from_rows(0.0, mode_set, ground, excited).unwrap()
}

pub fn coeff_strategy(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.5..0.5f64, -0.5..0.5f64), len)
}

/// Straight-line evaluation of the fields at every grid point, each one an
/// independent trapezoid sum.
pub fn naive_fields(s: &FieldState, e0: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let nx = s.nx();
    let h = 1.0 / (nx - 1) as f64;
    let m = s.mode_set().max_order() as i32;
    let zero = vec![Complex64::default(); nx];
    let b = |j: i32| s.b(ModeIndex(j)).map(<[_]>::to_vec).unwrap_or_else(|| zero.clone());
    let mut src_plus = vec![Complex64::default(); nx];
    let mut src_minus = vec![Complex64::default(); nx];
    for j in (-m..=m).step_by(2) {
        let a = s.a(ModeIndex(j)).unwrap();
        let (bp, bm) = (b(j + 1), b(j - 1));
        for i in 0..nx {
            src_plus[i] += bp[i] * a[i].conj();
            src_minus[i] += bm[i] * a[i].conj();
        }
    }
    let integral = |f: &[Complex64], lo: usize, hi: usize| -> Complex64 {
        let mut acc = Complex64::default();
        for i in lo..hi {
            acc += 0.5 * h * (f[i] + f[i + 1]);
        }
        acc
    };
    let e_plus = (0..nx).map(|i| e0 + 2.0 * integral(&src_plus, 0, i)).collect();
    let e_minus = (0..nx).map(|i| e0 + 2.0 * integral(&src_minus, i, nx - 1)).collect();
    (e_plus, e_minus)
}

/// `-v ∂x u` with the central interior stencil, one-sided boundary rows and
/// the zero-inflow penalty `2|v|/h · u` at the upwind end.
pub fn naive_transport(v: f64, u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    let h = 1.0 / (n - 1) as f64;
    let mut d = vec![Complex64::default(); n];
    if v == 0.0 {
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    }
    d[0] = (u[1] - u[0]) / h;
    d[n - 1] = (u[n - 1] - u[n - 2]) / h;
    let mut out: Vec<Complex64> = d.iter().map(|z| -v * z).collect();
    if v > 0.0 {
        out[0] -= 2.0 * v / h * u[0];
    } else {
        out[n - 1] += 2.0 * v / h * u[n - 1];
    }
    out
}

pub fn naive_rhs(s: &FieldState, p: &DimensionlessParams, e_plus: &[Complex64], e_minus: &[Complex64]) -> FieldState {
    let nx = s.nx();
    let m = s.mode_set().max_order() as i32;
    let zero = vec![Complex64::default(); nx];
    let a = |j: i32| s.a(ModeIndex(j)).map(<[_]>::to_vec).unwrap_or_else(|| zero.clone());
    let b = |j: i32| s.b(ModeIndex(j)).map(<[_]>::to_vec).unwrap_or_else(|| zero.clone());
    let vel = |j: i32| if p.drop_spatial_derivatives { 0.0 } else { p.v_coeff * j as f64 };
    let omega = |j: i32| p.omega_coeff * (j * j) as f64;
    let mut out = FieldState::zeros(s.mode_set(), nx);
    for j in (-m..=m).step_by(2) {
        let aj = a(j);
        let (bp, bm) = (b(j + 1), b(j - 1));
        let tr = naive_transport(vel(j), &aj);
        let o = out.a_mut(ModeIndex(j)).unwrap();
        for i in 0..nx {
            o[i] = tr[i] - I * omega(j) * aj[i] + e_plus[i].conj() * bp[i] + e_minus[i].conj() * bm[i];
        }
    }
    for j in (-(m + 1)..=m + 1).step_by(2) {
        let bj = b(j);
        let (below, above) = (a(j - 1), a(j + 1));
        let tr = naive_transport(vel(j), &bj);
        let lin = I * (p.delta - omega(j) + I * p.gamma / 2.0);
        let o = out.b_mut(ModeIndex(j)).unwrap();
        for i in 0..nx {
            o[i] = tr[i] + lin * bj[i] - e_plus[i] * below[i] - e_minus[i] * above[i];
        }
    }
    out
}

pub fn max_abs_diff(x: &FieldState, y: &FieldState) -> f64 {
    x.ground_flat()
        .iter()
        .zip(y.ground_flat())
        .chain(x.excited_flat().iter().zip(y.excited_flat()))
        .map(|(u, w)| (u - w).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(x: &FieldState) -> f64 {
    x.ground_flat()
        .iter()
        .chain(x.excited_flat())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
