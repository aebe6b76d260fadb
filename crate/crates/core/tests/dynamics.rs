//! Independent oracles for the field functional, the right-hand side and the
//! integrator.

mod common;

use std::f64::consts::{PI, SQRT_2};

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use ramsey_core::dynamics::{rhs, run_ramsey_with};
use ramsey_core::*;

const ORACLE_M: u32 = 4;
const ORACLE_NX: usize = 33;
const ORACLE_COEFFS: usize = 4 * 11;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rhs_matches_straight_line_oracle(
        coeffs in coeff_strategy(ORACLE_COEFFS),
        delta in -12.0..12.0f64,
        gamma in 0.0..0.2f64,
        v_coeff in -0.3..0.3f64,
        omega_coeff in 0.0..0.1f64,
        e0 in 0.0..0.1f64,
        drop in any::<bool>(),
    ) {
        let mode_set = ModeSet::new(ORACLE_M).unwrap();
        let p = DimensionlessParams {
            delta,
            gamma,
            v_coeff,
            omega_coeff,
            e0,
            mode_set,
            grid: GridSpec::new(ORACLE_NX, Stencil::Central2).unwrap(),
            drop_spatial_derivatives: drop,
            ..reference_defaults()
        };
        let s = smooth_state(mode_set, ORACLE_NX, &coeffs);
        let fields = compute_fields(&s, e0);
        let (ep, em) = naive_fields(&s, e0);
        for i in 0..ORACLE_NX {
            prop_assert!((fields.e_plus[i] - ep[i]).norm() <= 1e-12);
            prop_assert!((fields.e_minus[i] - em[i]).norm() <= 1e-12);
        }
        let fast = rhs(&s, &fields, &p).unwrap();
        let slow = naive_rhs(&s, &p, &ep, &em);
        let scale = max_abs(&slow).max(1.0);
        prop_assert!(max_abs_diff(&fast, &slow) <= 1e-12 * scale,
            "difference {:e} at scale {scale:e}", max_abs_diff(&fast, &slow));
    }

    #[test]
    fn fields_scale_quadratically_and_add(coeffs in coeff_strategy(4 * 7), c in 0.1..3.0f64, e0 in 0.0..0.1f64) {
        let mode_set = ModeSet::new(2).unwrap();
        let s = smooth_state(mode_set, 41, &coeffs);
        let base = compute_fields(&s, e0);
        let scaled = compute_fields(&s.scaled(Complex64::new(c, 0.0)), e0);
        for i in 0..41 {
            let want = (base.e_plus[i] - e0) * c * c;
            prop_assert!((scaled.e_plus[i] - e0 - want).norm() <= 1e-12 * (1.0 + want.norm()));
            let want = (base.e_minus[i] - e0) * c * c;
            prop_assert!((scaled.e_minus[i] - e0 - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
        // Additivity in the bilinear source: excitation in disjoint excited
        // rows superposes.
        let mut only_low = s.clone();
        let mut only_high = s.clone();
        for j in mode_set.excited_modes() {
            if j.0 < 0 {
                only_high.b_mut(j).unwrap().fill(Complex64::default());
            } else {
                only_low.b_mut(j).unwrap().fill(Complex64::default());
            }
        }
        let low = compute_fields(&only_low, 0.0);
        let high = compute_fields(&only_high, 0.0);
        let all = compute_fields(&s, 0.0);
        for i in 0..41 {
            prop_assert!((low.e_plus[i] + high.e_plus[i] - all.e_plus[i]).norm() <= 1e-12);
            prop_assert!((low.e_minus[i] + high.e_minus[i] - all.e_minus[i]).norm() <= 1e-12);
        }
    }

    #[test]
    fn mirroring_the_state_swaps_the_fields(coeffs in coeff_strategy(4 * 7), e0 in 0.0..0.1f64) {
        let s = smooth_state(ModeSet::new(2).unwrap(), 41, &coeffs);
        let f = compute_fields(&s, e0);
        let g = compute_fields(&s.mirrored(), e0);
        for i in 0..41 {
            let tol = 1e-12 * (1.0 + f.e_minus[40 - i].norm());
            prop_assert!((g.e_plus[i] - f.e_minus[40 - i]).norm() <= tol);
            prop_assert!((g.e_minus[i] - f.e_plus[40 - i]).norm() <= tol);
        }
    }

    #[test]
    fn stepping_commutes_with_mirroring(coeffs in coeff_strategy(4 * 7), delta in -2.0..2.0f64) {
        let mode_set = ModeSet::new(2).unwrap();
        let p = DimensionlessParams {
            delta,
            v_coeff: 0.05,
            e0: 0.05,
            mode_set,
            grid: GridSpec::new(41, Stencil::Central2).unwrap(),
            ..reference_defaults()
        };
        let s = smooth_state(mode_set, 41, &coeffs);
        let mut stepper = Stepper::new(&p).unwrap();
        let (mut x, mut y) = (s.clone(), s.mirrored());
        for _ in 0..10 {
            stepper.step(&mut x, 0.05, p.e0).unwrap();
            stepper.step(&mut y, 0.05, p.e0).unwrap();
        }
        prop_assert!(max_abs_diff(&x.mirrored(), &y) <= 1e-12 * max_abs(&x).max(1.0));
    }
}

#[test]
fn condensate_at_rest_under_uniform_drive() {
    let mode_set = ModeSet::new(2).unwrap();
    let p = DimensionlessParams {
        mode_set,
        grid: GridSpec::new(17, Stencil::Central2).unwrap(),
        ..reference_defaults()
    };
    let s = FieldState::initial(mode_set, 17);
    let d = rhs(&s, &FieldPair::uniform(17, 0.25), &p).unwrap();
    for j in mode_set.ground_modes() {
        assert!(d.a(j).unwrap().iter().all(|z| z.norm() == 0.0));
    }
    for j in mode_set.excited_modes() {
        let want = if j.0.abs() == 1 { -0.25 } else { 0.0 };
        assert!(d.b(j).unwrap().iter().all(|z| (z - want).norm() == 0.0), "mode {j}");
    }
}

#[test]
fn three_mode_constant_field_oscillation() {
    let e0 = 6e-3;
    let p = DimensionlessParams {
        delta: 0.0,
        gamma: 0.0,
        v_coeff: 0.0,
        omega_coeff: 0.0,
        e0,
        mode_set: ModeSet::new(0).unwrap(),
        grid: GridSpec::new(16, Stencil::Central2).unwrap(),
        dt: Some(0.01),
        ..reference_defaults()
    };
    let options = StepperOptions {
        self_consistent_fields: false,
        ..StepperOptions::default()
    };
    let mut evo = Evolution::new(&p, options).unwrap();
    evo.start_phase(e0, "pulse");
    let t_end = PI / (SQRT_2 * e0);
    let mut worst: f64 = 0.0;
    for k in 1..=20 {
        let t = t_end * k as f64 / 20.0;
        evo.finish_at(t).unwrap();
        let exact = (SQRT_2 * e0 * t).cos();
        let sin = (SQRT_2 * e0 * t).sin() / SQRT_2;
        let s = evo.state();
        for z in s.a(ModeIndex(0)).unwrap() {
            worst = worst.max((z - exact).norm());
        }
        for j in [-1, 1] {
            for z in s.b(ModeIndex(j)).unwrap() {
                worst = worst.max((z + sin).norm());
            }
        }
    }
    assert!(worst <= 1e-8, "max error {worst:e}");
}

/// One RK4 step against a reference built from many small steps: the
/// local error falls by at least 2⁴ per halving of the step.
#[test]
fn rk4_local_error_is_fourth_order_or_better() {
    let mode_set = ModeSet::new(2).unwrap();
    let p = DimensionlessParams {
        delta: 1.0,
        v_coeff: 0.02,
        omega_coeff: 0.05,
        e0: 0.3,
        mode_set,
        grid: GridSpec::new(33, Stencil::Central2).unwrap(),
        ..reference_defaults()
    };
    let coeffs: Vec<(f64, f64)> = (0..4 * 7)
        .map(|n| ((0.37 * n as f64).sin() * 0.4, (0.91 * n as f64).cos() * 0.4))
        .collect();
    let s0 = smooth_state(mode_set, 33, &coeffs);
    let mut stepper = Stepper::new(&p).unwrap();
    let mut local_error = |dt: f64| {
        let mut coarse = s0.clone();
        stepper.step(&mut coarse, dt, p.e0).unwrap();
        let mut fine = s0.clone();
        for _ in 0..100 {
            stepper.step(&mut fine, dt / 100.0, p.e0).unwrap();
        }
        max_abs_diff(&coarse, &fine)
    };
    let errors: Vec<f64> = [0.4, 0.2, 0.1].iter().map(|&dt| local_error(dt)).collect();
    for pair in errors.windows(2) {
        assert!(pair[0] / pair[1] >= 16.0, "errors {errors:?}");
    }
}

#[test]
fn undriven_condensate_stays_at_rest() {
    let p = DimensionlessParams {
        e0: 0.0,
        mode_set: ModeSet::new(2).unwrap(),
        grid: GridSpec::new(32, Stencil::Central2).unwrap(),
        ..reference_defaults()
    };
    let sched = PulseSchedule::new(300.0, 1000.0).unwrap();
    let traj = run_ramsey_with(&p, &sched, StepperOptions::default(), 10).unwrap();
    for rec in &traj.populations {
        assert_eq!(rec.s0(), 1.0);
        assert_eq!(rec.excited_total(), 0.0);
    }
}

#[test]
fn short_run_respects_parity_and_balances_norm() {
    let p = DimensionlessParams {
        mode_set: ModeSet::new(4).unwrap(),
        grid: GridSpec::new(64, Stencil::Central2).unwrap(),
        ..reference_defaults()
    };
    let sched = PulseSchedule::new(500.0, 1500.0).unwrap();
    let traj = run_ramsey_with(&p, &sched, StepperOptions::default(), 50).unwrap();
    let n0 = traj.populations[0].total_norm;
    for (rec, loss) in traj.populations.iter().zip(&traj.losses) {
        assert!((rec.total_norm + loss.total() - n0).abs() <= 1e-9);
        for j in rec.mode_set.ground_modes() {
            let (a, b) = (rec.get(j).unwrap(), rec.get(j.mirrored()).unwrap());
            assert!((a - b).abs() <= 1e-10, "S_{j} vs S_-{j} at t = {}", rec.t);
        }
    }
    let s = traj.final_state();
    assert!(max_abs_diff(s, &s.mirrored()) <= 1e-10);
}

#[test]
fn reruns_are_bit_identical() {
    let p = DimensionlessParams {
        mode_set: ModeSet::new(2).unwrap(),
        grid: GridSpec::new(32, Stencil::Central2).unwrap(),
        ..reference_defaults()
    };
    let sched = PulseSchedule::new(300.0, 800.0).unwrap();
    let a = run_ramsey(&p, &sched).unwrap();
    let b = run_ramsey(&p, &sched).unwrap();
    assert_eq!(a.final_state(), b.final_state());
}
