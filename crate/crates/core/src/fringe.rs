//! Delay and detuning sweeps, and recoil-frequency extraction from fringes.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Evolution, StepperOptions};
use crate::error::{Result, SimError};
use crate::modes::ModeIndex;
use crate::observables::populations;
use crate::params::{DimensionlessParams, PulseSchedule};
use crate::spectrum::{envelope_spectrum, recoil_report, KGrid, RecoilReport};

/// Populations at `tau + dt_pulse` for a list of delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeSeries {
    pub delta: f64,
    pub dt_pulse: f64,
    pub tau_values: Vec<f64>,
    pub s0: Vec<f64>,
    pub s2: Vec<f64>,
    pub s_minus2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    S0,
    S2,
    SMinus2,
}

impl Channel {
    pub fn mode(self) -> ModeIndex {
        match self {
            Channel::S0 => ModeIndex(0),
            Channel::S2 => ModeIndex(2),
            Channel::SMinus2 => ModeIndex(-2),
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "s0" => Ok(Channel::S0),
            "s2" => Ok(Channel::S2),
            "s_minus2" | "s-2" => Ok(Channel::SMinus2),
            other => Err(format!("unknown channel `{other}` (expected s0, s2 or s_minus2)")),
        }
    }
}

impl FringeSeries {
    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::S0 => &self.s0,
            Channel::S2 => &self.s2,
            Channel::SMinus2 => &self.s_minus2,
        }
    }
}

/// `n` uniformly spaced delays over `[start, end]`.
pub fn uniform_delays(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Default delay list: 50 points over `[3e3, 9e4]` τ_R.
pub fn default_delays() -> Vec<f64> {
    uniform_delays(3e3, 9e4, 50)
}

/// Runs the two-pulse sequence for every delay in `tau_list` at detuning
/// `delta` and collects the populations at `tau + dt_pulse`.
///
/// All delays share the first pulse and one free-evolution trajectory; each
/// delay branches off it, so every point is bit-identical to a separate
/// [`crate::run_ramsey`] call. Second pulses run in parallel.
pub fn sweep_delay(
    params: &DimensionlessParams,
    delta: f64,
    tau_list: &[f64],
    dt_pulse: f64,
) -> Result<FringeSeries> {
    sweep_delay_with(params, delta, tau_list, dt_pulse, StepperOptions::default())
}

pub fn sweep_delay_with(
    params: &DimensionlessParams,
    delta: f64,
    tau_list: &[f64],
    dt_pulse: f64,
    options: StepperOptions,
) -> Result<FringeSeries> {
    let points = sweep_delay_points(params, delta, tau_list, dt_pulse, options)?;
    let mut series = FringeSeries {
        delta,
        dt_pulse,
        tau_values: Vec::with_capacity(points.len()),
        s0: Vec::with_capacity(points.len()),
        s2: Vec::with_capacity(points.len()),
        s_minus2: Vec::with_capacity(points.len()),
    };
    for point in points {
        let p = point.outcome?;
        series.tau_values.push(point.tau);
        series.s0.push(p.s0);
        series.s2.push(p.s2);
        series.s_minus2.push(p.s_minus2);
    }
    Ok(series)
}

/// Measured populations of one delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayPopulations {
    pub s0: f64,
    pub s2: f64,
    pub s_minus2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayPoint {
    pub tau: f64,
    pub outcome: Result<DelayPopulations>,
}

/// Like [`sweep_delay_with`] but keeps going past failed delays. The
/// returned points are sorted by delay with duplicates removed. A failure of
/// the first pulse or of an invalid schedule fails the whole sweep; a
/// divergence of the shared free evolution fails that delay and every later
/// one.
pub fn sweep_delay_points(
    params: &DimensionlessParams,
    delta: f64,
    tau_list: &[f64],
    dt_pulse: f64,
    options: StepperOptions,
) -> Result<Vec<DelayPoint>> {
    let params = params.clone().with_delta(delta);
    let mut taus = tau_list.to_vec();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    for &tau in &taus {
        PulseSchedule::new(dt_pulse, tau)?;
    }

    let mut evo = Evolution::new(&params, options)?;
    evo.run_phase(dt_pulse, params.e0, "pulse 1")?;
    evo.start_phase(0.0, "free evolution");
    let mut branches: Vec<(f64, Result<Evolution>)> = Vec::with_capacity(taus.len());
    let mut shared_failure: Option<SimError> = None;
    for &tau in &taus {
        if let Some(err) = &shared_failure {
            branches.push((tau, Err(err.clone())));
            continue;
        }
        if let Err(e) = evo.advance_to(tau) {
            shared_failure = Some(e.clone());
            branches.push((tau, Err(e)));
            continue;
        }
        let mut branch = evo.clone();
        let landed = branch.finish_at(tau).map(|_| branch);
        branches.push((tau, landed));
    }
    drop(evo);

    let e0 = params.e0;
    Ok(branches
        .into_par_iter()
        .map(|(tau, branch)| {
            let outcome = branch
                .and_then(|mut b| {
                    b.run_phase(tau + dt_pulse, e0, "pulse 2")?;
                    let p = populations(b.state());
                    Ok(DelayPopulations {
                        s0: p.s0(),
                        s2: p.get(ModeIndex(2)).unwrap_or(0.0),
                        s_minus2: p.get(ModeIndex(-2)).unwrap_or(0.0),
                    })
                })
                .map_err(|e| point_error(tau, e));
            DelayPoint { tau, outcome }
        })
        .collect())
}

fn point_error(tau: f64, source: SimError) -> SimError {
    SimError::SweepPoint {
        tau,
        source: Box::new(source),
    }
}

/// Single-cosine fit `y(τ) = offset + amplitude·cos(ω τ + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub channel: Channel,
    /// Fitted fringe frequency ω_rec (1/τ_R).
    pub omega_rec: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub residual_rms: f64,
    /// `omega_rec / ω₂` with `ω₂ = 4 · omega_coeff`.
    pub omega_ratio: f64,
    /// Frequency of the periodogram peak that seeded the fit.
    pub omega_initial: f64,
    pub iterations: usize,
}

impl FringeFit {
    pub fn evaluate(&self, tau: f64) -> f64 {
        self.offset + self.amplitude * (self.omega_rec * tau + self.phase).cos()
    }

    /// `δω̃/ω₂ = omega_ratio - 1`.
    pub fn shift_ratio(&self) -> f64 {
        self.omega_ratio - 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("tau and value arrays differ in length ({tau} vs {values})")]
    LengthMismatch { tau: usize, values: usize },
    #[error("delays must be finite and strictly increasing")]
    UnorderedDelays,
    #[error("series spans {periods:.2} periods of the periodogram peak at omega = {omega_initial:e}; need at least 1.5")]
    ShortSpan { periods: f64, omega_initial: f64 },
    #[error("fit did not converge in {iterations} iterations (periodogram seed omega = {omega_initial:e})")]
    NoConvergence { iterations: usize, omega_initial: f64 },
    #[error("fringe amplitude {amplitude:e} is below the noise floor {floor:e} (periodogram seed omega = {omega_initial:e})")]
    BelowNoise {
        amplitude: f64,
        floor: f64,
        omega_initial: f64,
    },
}

pub const MIN_FIT_SAMPLES: usize = 12;
const MAX_ITERATIONS: usize = 200;
const CONVERGENCE_TOLERANCE: f64 = 1e-10;

/// Fits one population channel of a fringe series. `omega2` is the bare
/// recoil frequency used for `omega_ratio`.
pub fn fit_fringe(series: &FringeSeries, channel: Channel, omega2: f64) -> std::result::Result<FringeFit, FitError> {
    fit_cosine(&series.tau_values, series.channel(channel), omega2, channel)
}

/// Least-squares cosine fit of arbitrary samples.
///
/// The frequency is seeded by the peak of the periodogram of the linearly
/// detrended series, then all four parameters are refined by
/// Levenberg-Marquardt.
pub fn fit_cosine(
    tau: &[f64],
    values: &[f64],
    omega2: f64,
    channel: Channel,
) -> std::result::Result<FringeFit, FitError> {
    let n = tau.len();
    if n != values.len() {
        return Err(FitError::LengthMismatch { tau: n, values: values.len() });
    }
    if n < MIN_FIT_SAMPLES {
        return Err(FitError::TooFewSamples { needed: MIN_FIT_SAMPLES, got: n });
    }
    if tau.iter().chain(values).any(|v| !v.is_finite()) || tau.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FitError::UnorderedDelays);
    }

    let centre = tau.iter().sum::<f64>() / n as f64;
    let t: Vec<f64> = tau.iter().map(|x| x - centre).collect();
    let span = tau[n - 1] - tau[0];

    let Some(omega_initial) = periodogram_peak(&t, values, span) else {
        return Err(FitError::BelowNoise { amplitude: 0.0, floor: 0.0, omega_initial: 0.0 });
    };
    let periods = span * omega_initial / (2.0 * PI);
    if periods < 1.5 {
        return Err(FitError::ShortSpan { periods, omega_initial });
    }

    // Parameters: offset, cosine weight, sine weight, ω / ω_initial.
    let (c0, a0, b0) = linear_cosine_fit(&t, values, omega_initial);
    let mut theta = [c0, a0, b0, 1.0];
    let scale = omega_initial;
    let residuals = |th: &[f64; 4], out: &mut Vec<f64>| {
        out.clear();
        let w = th[3] * scale;
        out.extend(t.iter().zip(values).map(|(t, y)| {
            let (s, c) = (w * t).sin_cos();
            y - (th[0] + th[1] * c + th[2] * s)
        }));
    };
    let mut res = Vec::with_capacity(n);
    residuals(&theta, &mut res);
    let mut cost: f64 = res.iter().map(|r| r * r).sum();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial_res = Vec::with_capacity(n);

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Normal equations J^T J δ = J^T r with J = ∂model/∂θ.
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        let w = theta[3] * scale;
        for (i, ti) in t.iter().enumerate() {
            let (s, c) = (w * ti).sin_cos();
            let row = [1.0, c, s, (-theta[1] * s + theta[2] * c) * ti * scale];
            for p in 0..4 {
                jtr[p] += row[p] * res[i];
                for q in 0..4 {
                    jtj[p][q] += row[p] * row[q];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for p in 0..4 {
                damped[p][p] += lambda * jtj[p][p].max(1e-300);
            }
            let Some(delta) = solve4(damped, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [
                theta[0] + delta[0],
                theta[1] + delta[1],
                theta[2] + delta[2],
                theta[3] + delta[3],
            ];
            residuals(&trial, &mut trial_res);
            let trial_cost: f64 = trial_res.iter().map(|r| r * r).sum();
            if trial_cost <= cost {
                let change = (0..4)
                    .map(|p| delta[p].abs() / (trial[p].abs() + f64::MIN_POSITIVE))
                    .fold(0.0, f64::max);
                theta = trial;
                std::mem::swap(&mut res, &mut trial_res);
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-15);
                accepted = true;
                if change < CONVERGENCE_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step at any damping: already at the minimum.
        if converged || !accepted {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(FitError::NoConvergence { iterations, omega_initial });
    }

    let omega = theta[3] * scale;
    let amplitude = theta[1].hypot(theta[2]);
    let residual_rms = (cost / n as f64).sqrt();
    let floor = residual_rms.max(1e-12 * (1.0 + theta[0].abs()));
    if amplitude <= floor {
        return Err(FitError::BelowNoise { amplitude, floor, omega_initial });
    }
    // A cos(ωt) + B sin(ωt) = R cos(ωt + φ) with φ = atan2(-B, A); shift the
    // phase back to the caller's time origin.
    let phase_centred = (-theta[2]).atan2(theta[1]);
    let phase = wrap_phase(phase_centred - omega * centre);
    Ok(FringeFit {
        channel,
        omega_rec: omega,
        amplitude,
        phase,
        offset: theta[0],
        residual_rms,
        omega_ratio: omega / omega2,
        omega_initial,
        iterations,
    })
}

fn wrap_phase(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Peak of `|Σ y_d(t) exp(-iωt)|²` over a 20× oversampled frequency grid,
/// where `y_d` is the series minus its least-squares line. `None` when the
/// detrended series is identically zero.
fn periodogram_peak(t: &[f64], y: &[f64], span: f64) -> Option<f64> {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|t| (t - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let detrended: Vec<f64> = t.iter().zip(y).map(|(t, y)| y - ym - slope * (t - tm)).collect();
    let energy: f64 = detrended.iter().map(|d| d * d).sum();
    if energy <= 1e-28 * n * (1.0 + ym * ym) {
        return None;
    }

    let min_spacing = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let nyquist = PI / min_spacing;
    let step = 2.0 * PI / (20.0 * span);
    let mut best = (0.0, step);
    let mut omega = step;
    while omega <= nyquist {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, y) in t.iter().zip(&detrended) {
            let (s, c) = (omega * t).sin_cos();
            re += y * c;
            im -= y * s;
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, omega);
        }
        omega += step;
    }
    Some(best.1)
}

/// Linear least squares for `c + a cos(ωt) + b sin(ωt)` at fixed ω.
fn linear_cosine_fit(t: &[f64], y: &[f64], omega: f64) -> (f64, f64, f64) {
    let mut m = [[0.0; 4]; 4];
    let mut r = [0.0; 4];
    for (t, y) in t.iter().zip(y) {
        let (s, c) = (omega * t).sin_cos();
        let row = [1.0, c, s, 0.0];
        for p in 0..3 {
            r[p] += row[p] * y;
            for q in 0..3 {
                m[p][q] += row[p] * row[q];
            }
        }
    }
    m[3][3] = 1.0;
    let sol = solve4(m, r).unwrap_or([y.iter().sum::<f64>() / y.len() as f64, 0.0, 0.0, 0.0]);
    (sol[0], sol[1], sol[2])
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Recoil report of the |+2⟩ and |-2⟩ clouds right after the first pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstPulseRecoil {
    pub delta: f64,
    pub plus: RecoilReport,
    pub minus: RecoilReport,
}

pub fn first_pulse_recoil(
    params: &DimensionlessParams,
    delta: f64,
    dt_pulse: f64,
    window: &KGrid,
) -> Result<FirstPulseRecoil> {
    let params = params.clone().with_delta(delta);
    let state = crate::dynamics::run_first_pulse(&params, dt_pulse)?;
    let plus = recoil_report(&envelope_spectrum(&state, ModeIndex(2), window)?, params.k0l)?;
    let minus = recoil_report(&envelope_spectrum(&state, ModeIndex(-2), window)?, params.k0l)?;
    Ok(FirstPulseRecoil { delta, plus, minus })
}

/// One detuning of a dispersion table. Missing estimates are `None` and the
/// reason is kept in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub delta: f64,
    pub omega_ratio: Option<f64>,
    pub fit_rms: Option<f64>,
    /// Raw envelope shifts κ_{±2}/(k0 L) of the two clouds.
    pub kappa2_over_k0: Option<f64>,
    pub kappa_minus2_over_k0: Option<f64>,
    pub std2_over_k0: Option<f64>,
    pub delta_omega_ratio_mean: Option<f64>,
    pub delta_omega_ratio_fringe: Option<f64>,
    /// The delay scan behind `omega_ratio`, when one was run.
    pub series: Option<FringeSeries>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionTable {
    pub rows: Vec<DispersionRow>,
    pub window: KGrid,
    pub dt_pulse: f64,
    pub tau_values: Vec<f64>,
}

pub const DEFAULT_DETUNING_RANGE: (f64, f64) = (-12.0, 12.0);

/// For each detuning: the first-pulse recoil report and, when `tau_list` is
/// non-empty, a fringe fit of S₀ over the delays. Per-detuning failures are
/// recorded as gaps.
pub fn sweep_detuning(
    params: &DimensionlessParams,
    delta_list: &[f64],
    tau_list: &[f64],
    dt_pulse: f64,
    window: &KGrid,
) -> Result<DispersionTable> {
    let (lo, hi) = DEFAULT_DETUNING_RANGE;
    if let Some(bad) = delta_list.iter().find(|d| !(lo..=hi).contains(*d)) {
        return Err(crate::ParamError::invalid(
            "delta",
            format!("detuning {bad} outside the supported range [{lo}, {hi}]"),
        )
        .into());
    }
    let rows = delta_list
        .par_iter()
        .map(|&delta| dispersion_row(params, delta, tau_list, dt_pulse, window))
        .collect();
    Ok(DispersionTable {
        rows,
        window: window.clone(),
        dt_pulse,
        tau_values: tau_list.to_vec(),
    })
}

fn dispersion_row(
    params: &DimensionlessParams,
    delta: f64,
    tau_list: &[f64],
    dt_pulse: f64,
    window: &KGrid,
) -> DispersionRow {
    let mut row = DispersionRow {
        delta,
        omega_ratio: None,
        fit_rms: None,
        kappa2_over_k0: None,
        kappa_minus2_over_k0: None,
        std2_over_k0: None,
        delta_omega_ratio_mean: None,
        delta_omega_ratio_fringe: None,
        series: None,
        errors: Vec::new(),
    };
    match first_pulse_recoil(params, delta, dt_pulse, window) {
        Ok(r) => {
            row.kappa2_over_k0 = Some(r.plus.kappa / params.k0l);
            row.kappa_minus2_over_k0 = Some(r.minus.kappa / params.k0l);
            row.std2_over_k0 = Some(r.plus.std_over_k0);
            row.delta_omega_ratio_mean = Some(r.plus.delta_omega_ratio);
        }
        Err(e) => row.errors.push(format!("recoil report: {e}")),
    }
    if !tau_list.is_empty() {
        match sweep_delay(params, delta, tau_list, dt_pulse) {
            Ok(series) => {
                match fit_fringe(&series, Channel::S0, params.omega2()) {
                    Ok(fit) => {
                        row.omega_ratio = Some(fit.omega_ratio);
                        row.fit_rms = Some(fit.residual_rms);
                        row.delta_omega_ratio_fringe = Some(fit.shift_ratio());
                    }
                    Err(e) => row.errors.push(format!("fringe fit: {e}")),
                }
                row.series = Some(series);
            }
            Err(e) => row.errors.push(format!("delay sweep: {e}")),
        }
    }
    row
}
