//! Delay and detuning sweeps on reduced grids, and fits of synthetic and
//! simulated fringes.

use ramsey_core::fringe::{fit_cosine, uniform_delays};
use ramsey_core::*;

fn small() -> DimensionlessParams {
    DimensionlessParams {
        mode_set: ModeSet::new(2).unwrap(),
        grid: GridSpec::new(32, Stencil::Central2).unwrap(),
        ..reference_defaults()
    }
}

#[test]
fn shared_trajectory_sweep_matches_independent_runs() {
    let p = small();
    let taus = uniform_delays(400.0, 2500.0, 7);
    let series = sweep_delay(&p, 0.5, &taus, 300.0).unwrap();
    assert_eq!(series.tau_values, taus);
    for (i, &tau) in taus.iter().enumerate() {
        let sched = PulseSchedule::new(300.0, tau).unwrap();
        let direct = run_ramsey(&p.clone().with_delta(0.5), &sched).unwrap().final_populations();
        assert!((series.s0[i] - direct.s0()).abs() <= 1e-10, "tau = {tau}");
        assert!((series.s2[i] - direct.get(ModeIndex(2)).unwrap()).abs() <= 1e-10);
        assert!((series.s2[i] - series.s_minus2[i]).abs() <= 1e-10);
    }
}

#[test]
fn without_transport_fringes_oscillate_at_the_bare_recoil_frequency() {
    let p = DimensionlessParams {
        drop_spatial_derivatives: true,
        ..small()
    };
    let taus = fringe::default_delays();
    for delta in [-0.5, 0.5] {
        let series = sweep_delay(&p, delta, &taus, 3e3).unwrap();
        let fit = fit_fringe(&series, Channel::S0, p.omega2()).unwrap();
        assert!((fit.omega_ratio - 1.0).abs() <= 0.01, "delta {delta}: {fit:?}");
    }
}

#[test]
fn noisy_synthetic_fringe_is_recovered() {
    let tau = uniform_delays(3e3, 9e4, 50);
    // Deterministic pseudo-noise at 5% of the amplitude.
    let y: Vec<f64> = tau
        .iter()
        .enumerate()
        .map(|(i, t)| 0.8 + 0.06 * (1.9e-4 * t - 0.4).cos() + 0.003 * ((i * 7919) as f64).sin())
        .collect();
    let fit = fit_cosine(&tau, &y, 2e-4, Channel::S0).unwrap();
    assert!((fit.omega_ratio - 0.95).abs() <= 2e-3, "{fit:?}");
    assert!(fit.residual_rms <= 0.005);
    let shifted: Vec<f64> = tau.iter().map(|t| t + 1234.5).collect();
    let again = fit_cosine(&shifted, &y, 2e-4, Channel::S0).unwrap();
    assert!((again.omega_rec / fit.omega_rec - 1.0).abs() <= 1e-8);
}

#[test]
fn detuning_sweep_reports_mirrored_clouds_and_keeps_order() {
    let p = small();
    let deltas = [-2.0, 0.5, -0.5, 2.0];
    let table = sweep_detuning(&p, &deltas, &[], 300.0, &KGrid::new(50.0, 513).unwrap()).unwrap();
    let got: Vec<f64> = table.rows.iter().map(|r| r.delta).collect();
    assert_eq!(got, deltas);
    for row in &table.rows {
        assert!(row.errors.is_empty(), "{:?}", row.errors);
        assert!(row.omega_ratio.is_none() && row.series.is_none());
        let (k2, km2) = (row.kappa2_over_k0.unwrap(), row.kappa_minus2_over_k0.unwrap());
        assert!((k2 + km2).abs() <= 1e-8);
    }
    let shift = |d: f64| {
        table
            .rows
            .iter()
            .find(|r| r.delta == d)
            .and_then(|r| r.delta_omega_ratio_mean)
            .unwrap()
    };
    assert!(shift(0.5) * shift(-0.5) < 0.0);
}

#[test]
fn detuning_outside_range_is_a_parameter_error() {
    let err = sweep_detuning(&small(), &[0.5, 13.0], &[], 300.0, &KGrid::default()).unwrap_err();
    assert!(matches!(err, SimError::Param(_)), "{err}");
}

#[test]
fn too_short_delay_span_is_reported_with_the_seed() {
    let series = sweep_delay(&small(), 0.5, &uniform_delays(400.0, 4000.0, 12), 300.0).unwrap();
    match fit_fringe(&series, Channel::S0, small().omega2()) {
        Err(FitError::ShortSpan { omega_initial, .. }) | Err(FitError::BelowNoise { omega_initial, .. }) => {
            assert!(omega_initial.is_finite())
        }
        other => panic!("expected a fit failure, got {other:?}"),
    }
}
