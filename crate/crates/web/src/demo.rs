//! Reduced-grid versions of the main analyses.

use ramsey_core::fringe::{fit_fringe, first_pulse_recoil, sweep_delay, uniform_delays, Channel};
use ramsey_core::spectrum::{envelope_spectrum, recoil_report, KGrid};
use ramsey_core::{reference_defaults, run_first_pulse, DimensionlessParams, GridSpec, ModeIndex, ModeSet};
use serde::Serialize;

pub const DEMO_NX: usize = 64;
pub const DEMO_MAX_ORDER: u32 = 2;
pub const PULSE: f64 = 3e3;
/// Spectra are sent to the page on a coarser window than the analysis uses.
const PLOT_WINDOW: f64 = 40.0;
const PLOT_POINTS: usize = 401;

/// Analysis window: ±32π keeps clear of the Nyquist limit of the demo grid
/// at the default k spacing.
pub fn analysis_window() -> KGrid {
    KGrid::new(32.0 * std::f64::consts::PI, KGrid::DEFAULT_POINTS / 2).expect("valid window")
}

pub fn demo_params(delta: f64) -> DimensionlessParams {
    let d = reference_defaults();
    DimensionlessParams {
        delta,
        mode_set: ModeSet::new(DEMO_MAX_ORDER).expect("even order"),
        grid: GridSpec { nx: DEMO_NX, ..d.grid },
        ..d
    }
}

fn check_delta(delta: f64) -> Result<(), String> {
    if delta.is_finite() && delta.abs() <= 12.0 {
        Ok(())
    } else {
        Err(format!("detuning must lie in [-12, 12], got {delta}"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CloudSpectrum {
    pub mode: i32,
    pub kappa: f64,
    pub delta_k_over_k0: f64,
    pub delta_omega_ratio: f64,
    pub std_over_k0: f64,
    pub population: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumView {
    pub delta: f64,
    pub s0: f64,
    pub k: Vec<f64>,
    pub w_plus2: Vec<f64>,
    pub w_minus2: Vec<f64>,
    pub clouds: Vec<CloudSpectrum>,
}

pub fn first_pulse_spectrum(delta: f64, e0: f64) -> Result<SpectrumView, String> {
    check_delta(delta)?;
    let params = DimensionlessParams { e0, ..demo_params(delta) };
    params.validate().map_err(|e| e.to_string())?;
    let state = run_first_pulse(&params, PULSE).map_err(|e| e.to_string())?;
    let s0 = ramsey_core::populations(&state).s0();
    let analysis = analysis_window();
    let plot = KGrid::new(PLOT_WINDOW, PLOT_POINTS).expect("valid window");
    let mut view = SpectrumView {
        delta,
        s0,
        k: plot.values(),
        w_plus2: Vec::new(),
        w_minus2: Vec::new(),
        clouds: Vec::new(),
    };
    for j in [2, -2] {
        let mode = ModeIndex(j);
        let full = envelope_spectrum(&state, mode, &analysis).map_err(|e| e.to_string())?;
        let report = recoil_report(&full, params.k0l).map_err(|e| e.to_string())?;
        // Plot density on the narrow window, scaled to the full normalisation.
        let narrow = envelope_spectrum(&state, mode, &plot).map_err(|e| e.to_string())?;
        let scale = narrow.spectral_weight / full.spectral_weight;
        let w: Vec<f64> = narrow.w.iter().map(|w| w * scale).collect();
        if j > 0 {
            view.w_plus2 = w;
        } else {
            view.w_minus2 = w;
        }
        view.clouds.push(CloudSpectrum {
            mode: j,
            kappa: full.kappa,
            delta_k_over_k0: report.delta_k_over_k0,
            delta_omega_ratio: report.delta_omega_ratio,
            std_over_k0: report.std_over_k0,
            population: full.population,
        });
    }
    Ok(view)
}

#[derive(Debug, Clone, Serialize)]
pub struct FringeView {
    pub delta: f64,
    pub tau: Vec<f64>,
    pub s0: Vec<f64>,
    pub omega_ratio: Option<f64>,
    pub fit_curve: Vec<f64>,
    pub fit_error: Option<String>,
}

pub fn fringe_scan(delta: f64, drop_spatial_derivatives: bool, points: usize) -> Result<FringeView, String> {
    check_delta(delta)?;
    if !(12..=200).contains(&points) {
        return Err(format!("use between 12 and 200 delays, got {points}"));
    }
    let params = DimensionlessParams {
        drop_spatial_derivatives,
        ..demo_params(delta)
    };
    let taus = uniform_delays(3e3, 9e4, points);
    let series = sweep_delay(&params, delta, &taus, PULSE).map_err(|e| e.to_string())?;
    let (omega_ratio, fit_curve, fit_error) = match fit_fringe(&series, Channel::S0, params.omega2()) {
        Ok(fit) => (
            Some(fit.omega_ratio),
            series.tau_values.iter().map(|&t| fit.evaluate(t)).collect(),
            None,
        ),
        Err(e) => (None, Vec::new(), Some(e.to_string())),
    };
    Ok(FringeView {
        delta,
        tau: series.tau_values,
        s0: series.s0,
        omega_ratio,
        fit_curve,
        fit_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersionView {
    pub delta: Vec<f64>,
    pub delta_k_over_k0: Vec<f64>,
    pub delta_omega_ratio: Vec<f64>,
}

pub fn dispersion_curve(delta_max: f64, points: usize) -> Result<DispersionView, String> {
    check_delta(delta_max)?;
    if delta_max <= 0.0 || !(2..=64).contains(&points) {
        return Err("need a positive range and 2 to 64 points".to_string());
    }
    let deltas = uniform_delays(-delta_max, delta_max, points);
    let mut view = DispersionView {
        delta: Vec::with_capacity(points),
        delta_k_over_k0: Vec::with_capacity(points),
        delta_omega_ratio: Vec::with_capacity(points),
    };
    for d in deltas {
        let r = first_pulse_recoil(&demo_params(d), d, PULSE, &analysis_window()).map_err(|e| e.to_string())?;
        view.delta.push(d);
        view.delta_k_over_k0.push(r.plus.delta_k_over_k0);
        view.delta_omega_ratio.push(r.plus.delta_omega_ratio);
    }
    Ok(view)
}
