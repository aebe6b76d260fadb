//! Fast invariant suite run by `ramsey validate`.
//!
//! Every check uses a reduced grid so the whole suite takes well under a
//! second. Physical coefficients (detuning, decay, drive, recoil) come from
//! the caller's parameters.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Evolution, StepperOptions};
use crate::error::Result;
use crate::modes::{ModeIndex, ModeSet};
use crate::observables::populations;
use crate::params::{DimensionlessParams, GridSpec};
use crate::spectrum::{envelope_spectrum, KGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl PropertyCheck {
    fn at_most(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
            detail,
        }
    }

    fn failed(name: &str, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.to_string(),
            measured: f64::NAN,
            tolerance,
            passed: false,
            detail: err.to_string(),
        }
    }
}

const SUITE_TIME: f64 = 200.0;

fn reduced(params: &DimensionlessParams) -> DimensionlessParams {
    DimensionlessParams {
        mode_set: ModeSet::new(2).expect("2 is a valid order"),
        grid: GridSpec { nx: 32, ..params.grid },
        dt: Some(params.effective_dt()),
        ..params.clone()
    }
}

/// Runs all checks. `options` is forwarded to the integrator so that a
/// deliberately broken right-hand side can be shown to fail the suite.
pub fn run_invariant_suite(params: &DimensionlessParams, options: StepperOptions) -> Vec<PropertyCheck> {
    vec![
        norm_conservation(params, options),
        dissipation_balance(params, options),
        parity(params, options),
        parseval(params, options),
        rabi_oracle(params, options),
    ]
}

/// With γ = 0 the norm changes only through the transport flux across
/// the two ends of the sample.
pub fn norm_conservation(params: &DimensionlessParams, options: StepperOptions) -> PropertyCheck {
    const NAME: &str = "norm conservation (gamma = 0)";
    const TOL: f64 = 1e-9;
    let p = DimensionlessParams {
        gamma: 0.0,
        ..reduced(params)
    };
    match worst_balance(&p, options) {
        Ok((err, _)) => PropertyCheck::at_most(NAME, err, TOL, "max |N + boundary outflux - N0|".into()),
        Err(e) => PropertyCheck::failed(NAME, TOL, e),
    }
}

/// The spontaneous-emission loss accumulated by the integrator closes the
/// norm balance. With γ = 0 the reported decay rate is exactly zero.
pub fn dissipation_balance(params: &DimensionlessParams, options: StepperOptions) -> PropertyCheck {
    const NAME: &str = "dissipation balance";
    const TOL: f64 = 1e-9;
    let p = reduced(params);
    match worst_balance(&p, options) {
        Ok((err, rate)) => PropertyCheck::at_most(
            NAME,
            err,
            TOL,
            format!("max |N + losses - N0|; final decay rate gamma * sum P = {rate:e}"),
        ),
        Err(e) => PropertyCheck::failed(NAME, TOL, e),
    }
}

fn worst_balance(p: &DimensionlessParams, options: StepperOptions) -> Result<(f64, f64)> {
    let mut evo = Evolution::new(p, options)?;
    let n0 = populations(evo.state()).total_norm;
    let mut worst: f64 = 0.0;
    let steps = 20;
    evo.start_phase(p.e0, "pulse 1");
    for k in 1..=steps {
        evo.finish_at(SUITE_TIME * k as f64 / steps as f64)?;
        let n = populations(evo.state()).total_norm;
        worst = worst.max((n + evo.losses().total() - n0).abs());
    }
    let rate = p.gamma * populations(evo.state()).excited_total();
    Ok((worst, rate))
}

/// The condensate at rest is mirror symmetric, so `a_{-j}(x) = a_j(1 - x)`
/// and `b_{-j}(x) = b_j(1 - x)` at all times.
pub fn parity(params: &DimensionlessParams, options: StepperOptions) -> PropertyCheck {
    const NAME: &str = "parity";
    const TOL: f64 = 1e-10;
    let p = reduced(params);
    let run = || -> Result<f64> {
        let mut evo = Evolution::new(&p, options)?;
        evo.run_phase(SUITE_TIME, p.e0, "pulse 1")?;
        let s = evo.state();
        let m = s.mirrored();
        let err = s
            .ground_flat()
            .iter()
            .zip(m.ground_flat())
            .chain(s.excited_flat().iter().zip(m.excited_flat()))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        Ok(err)
    };
    match run() {
        Ok(err) => PropertyCheck::at_most(NAME, err, TOL, "max |u_j(x) - u_-j(1-x)|".into()),
        Err(e) => PropertyCheck::failed(NAME, TOL, e),
    }
}

/// `∫|f₂|² dk / 2π` against `∫|a₂|² dx` at the default k window, on the
/// configured spatial grid.
pub fn parseval(params: &DimensionlessParams, options: StepperOptions) -> PropertyCheck {
    const NAME: &str = "parseval (default k window)";
    const TOL: f64 = 0.02;
    let p = DimensionlessParams {
        grid: params.grid,
        ..reduced(params)
    };
    let run = || -> Result<(f64, f64)> {
        let mut evo = Evolution::new(&p, options)?;
        evo.run_phase(SUITE_TIME, p.e0, "pulse 1")?;
        let s = envelope_spectrum(evo.state(), ModeIndex(2), &KGrid::default())?;
        Ok(((s.parseval_ratio() - 1.0).abs(), (s.total_probability() - 1.0).abs()))
    };
    match run() {
        Ok((err, norm_err)) => PropertyCheck::at_most(
            NAME,
            err,
            TOL,
            format!("|ratio - 1| for mode 2; |integral of w - 1| = {norm_err:e}"),
        ),
        Err(e) => PropertyCheck::failed(NAME, TOL, e),
    }
}

/// Three modes (a₀, b₊₁, b₋₁) with a constant drive and no propagation:
/// `a₀(t) = cos(√2 E₀ t)`.
pub fn rabi_oracle(params: &DimensionlessParams, options: StepperOptions) -> PropertyCheck {
    const NAME: &str = "three-mode Rabi oracle";
    const TOL: f64 = 1e-8;
    let e0 = if params.e0 != 0.0 { params.e0 } else { 6e-3 };
    let p = DimensionlessParams {
        delta: 0.0,
        gamma: 0.0,
        v_coeff: 0.0,
        omega_coeff: 0.0,
        e0,
        mode_set: ModeSet::new(0).expect("0 is a valid order"),
        grid: GridSpec { nx: 16, ..params.grid },
        dt: Some(0.01),
        drop_spatial_derivatives: false,
        ..params.clone()
    };
    let options = StepperOptions {
        self_consistent_fields: false,
        ..options
    };
    let t_end = std::f64::consts::PI / (SQRT_2 * e0.abs());
    let run = || -> Result<f64> {
        let mut evo = Evolution::new(&p, options)?;
        let mut worst: f64 = 0.0;
        evo.start_phase(e0, "pulse 1");
        for k in 1..=10 {
            let t = t_end * k as f64 / 10.0;
            evo.finish_at(t)?;
            let exact = (SQRT_2 * e0 * t).cos();
            let a0 = evo.state().a(ModeIndex(0)).expect("static cloud");
            worst = a0.iter().map(|z| (z - exact).norm()).fold(worst, f64::max);
        }
        Ok(worst)
    };
    match run() {
        Ok(err) => PropertyCheck::at_most(NAME, err, TOL, "max |a0 - cos(sqrt2 E0 t)| over half a period".into()),
        Err(e) => PropertyCheck::failed(NAME, TOL, e),
    }
}
