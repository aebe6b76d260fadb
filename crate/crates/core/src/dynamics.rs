//! Method-of-lines integration of the coupled amplitude equations
//!
//! ```text
//! ∂t a_j + v_j ∂x a_j = -i ω_j a_j + Ē⁺ b_{j+1} + Ē⁻ b_{j-1}
//! ∂t b_m + v_m ∂x b_m = i(Δ - ω_m + iγ/2) b_m - E⁺ a_{m-1} - E⁻ a_{m+1}
//! ```
//!
//! through the two-pulse schedule. Time stepping is classical RK4 with the
//! fields recomputed from every stage state.
//!
//! Transport uses a summation-by-parts first-derivative operator (central in
//! the interior, one-sided closures) with the zero-inflow condition imposed
//! weakly by a penalty term. With trapezoid weights this gives the discrete
//! norm balance
//!
//! ```text
//! dN/dt = -γ Σ_m ∫|b_m|² - Σ_u |v_u| (|u(0)|² + |u(1)|²)
//! ```
//!
//! which [`Losses`] integrates alongside the state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fields::{fill_fields, FieldPair, FieldScratch};
use crate::observables::{populations, PopulationRecord};
use crate::params::{DimensionlessParams, PulseSchedule, Stencil};
use crate::quadrature::trapezoid_norm_sqr;
use crate::state::FieldState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How often (in steps) the integrator checks for divergence and for the
/// quiet-switch condition.
const CHECK_EVERY: u64 = 100;

/// Relative slack used when deciding whether a grid point lands on a target
/// time.
const LANDING_SLACK: f64 = 1e-9;

/// Switches for validation and reduced-model studies. The defaults give the
/// full model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepperOptions {
    /// When false the fields are held at the incident value,
    /// `E⁺ = E⁻ = E0(t)`.
    pub self_consistent_fields: bool,
    /// Fault injection: reverses the sign of the field coupling in the
    /// excited-state equation. Used to check that the validation suite
    /// catches a broken model.
    #[doc(hidden)]
    pub flip_excited_coupling: bool,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            self_consistent_fields: true,
            flip_excited_coupling: false,
        }
    }
}

/// Cumulative norm removed from the sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    /// `γ ∫ Σ_m ∫|b_m|² dx dt`.
    pub spontaneous: f64,
    /// Transport flux through `x = 0` and `x = 1` (exact balance for the
    /// central stencil).
    pub boundary: f64,
}

impl Losses {
    pub fn total(&self) -> f64 {
        self.spontaneous + self.boundary
    }
}

/// Per-run coefficients, indexed by storage row.
#[derive(Debug, Clone)]
struct Coefficients {
    nx: usize,
    inv_h: f64,
    stencil: Stencil,
    transport: bool,
    gamma: f64,
    v_ground: Vec<f64>,
    phase_ground: Vec<Complex64>,
    v_excited: Vec<f64>,
    linear_excited: Vec<Complex64>,
    options: StepperOptions,
}

impl Coefficients {
    fn new(params: &DimensionlessParams, options: StepperOptions) -> Self {
        let set = params.mode_set;
        let v_ground = set.ground_modes().iter().map(|&j| params.velocity(j)).collect();
        let phase_ground = set
            .ground_modes()
            .iter()
            .map(|&j| Complex64::new(0.0, -params.omega(j)))
            .collect();
        let v_excited = set.excited_modes().iter().map(|&j| params.velocity(j)).collect();
        let linear_excited = set
            .excited_modes()
            .iter()
            .map(|&j| Complex64::new(-0.5 * params.gamma, params.delta - params.omega(j)))
            .collect();
        Self {
            nx: params.grid.nx,
            inv_h: 1.0 / params.grid.spacing(),
            stencil: params.grid.stencil,
            transport: !params.drop_spatial_derivatives,
            gamma: params.gamma,
            v_ground,
            phase_ground,
            v_excited,
            linear_excited,
            options,
        }
    }

    fn check_shape(&self, state: &FieldState) -> Result<()> {
        if state.nx() != self.nx
            || state.mode_set().n_ground() != self.v_ground.len()
        {
            return Err(SimError::Structural(format!(
                "state (M = {}, nx = {}) does not match the run parameters (M = {}, nx = {})",
                state.mode_set().max_order(),
                state.nx(),
                self.v_ground.len() - 1,
                self.nx
            )));
        }
        Ok(())
    }

    /// Rate of norm loss of a state: spontaneous part and boundary part.
    fn loss_rates(&self, ground: &[Complex64], excited: &[Complex64]) -> (f64, f64) {
        let nx = self.nx;
        let h = 1.0 / self.inv_h;
        let spont = if self.gamma == 0.0 {
            0.0
        } else {
            self.gamma
                * excited
                    .chunks_exact(nx)
                    .map(|row| trapezoid_norm_sqr(row, h))
                    .sum::<f64>()
        };
        let mut boundary = 0.0;
        if self.transport {
            let rows = ground
                .chunks_exact(nx)
                .zip(&self.v_ground)
                .chain(excited.chunks_exact(nx).zip(&self.v_excited));
            for (row, v) in rows {
                if *v != 0.0 {
                    boundary += v.abs() * (row[0].norm_sqr() + row[nx - 1].norm_sqr());
                }
            }
        }
        (spont, boundary)
    }
}

/// `out = -v D u`, with zero inflow imposed at the upwind end.
fn transport(v: f64, stencil: Stencil, inv_h: f64, u: &[Complex64], out: &mut [Complex64]) {
    let n = u.len();
    if v == 0.0 {
        out.fill(ZERO);
        return;
    }
    match stencil {
        Stencil::Central2 => {
            let c = -0.5 * v * inv_h;
            for (o, w) in out[1..n - 1].iter_mut().zip(u.windows(3)) {
                *o = (w[2] - w[0]) * c;
            }
            let c = -v * inv_h;
            if v > 0.0 {
                // Inflow at x = 0: one-sided difference plus penalty 2v/h · u0.
                out[0] = (u[1] + u[0]) * c;
                out[n - 1] = (u[n - 1] - u[n - 2]) * c;
            } else {
                out[0] = (u[1] - u[0]) * c;
                out[n - 1] = -(u[n - 1] + u[n - 2]) * c;
            }
        }
        Stencil::Upwind1 => {
            let c = -v * inv_h;
            if v > 0.0 {
                out[0] = u[0] * c;
                for i in 1..n {
                    out[i] = (u[i] - u[i - 1]) * c;
                }
            } else {
                for i in 0..n - 1 {
                    out[i] = (u[i + 1] - u[i]) * c;
                }
                out[n - 1] = -u[n - 1] * c;
            }
        }
    }
}

/// Scratch buffers for one right-hand-side evaluation.
#[derive(Debug, Clone)]
struct RhsScratch {
    fields: FieldPair,
    field_scratch: FieldScratch,
    conj_plus: Vec<Complex64>,
    conj_minus: Vec<Complex64>,
}

impl RhsScratch {
    fn new(nx: usize) -> Self {
        Self {
            fields: FieldPair::zeros(nx),
            field_scratch: FieldScratch::new(nx),
            conj_plus: vec![ZERO; nx],
            conj_minus: vec![ZERO; nx],
        }
    }
}

fn evaluate_fields(
    coeffs: &Coefficients,
    ground: &[Complex64],
    excited: &[Complex64],
    e0: f64,
    scratch: &mut RhsScratch,
) {
    if coeffs.options.self_consistent_fields {
        fill_fields(
            ground,
            excited,
            coeffs.nx,
            e0,
            &mut scratch.field_scratch,
            &mut scratch.fields,
        );
    } else {
        let e = Complex64::new(e0, 0.0);
        scratch.fields.e_plus.fill(e);
        scratch.fields.e_minus.fill(e);
    }
}

/// Time derivative given precomputed fields in `scratch.fields`.
fn rhs_with_fields(
    coeffs: &Coefficients,
    ground: &[Complex64],
    excited: &[Complex64],
    scratch: &mut RhsScratch,
    out_ground: &mut [Complex64],
    out_excited: &mut [Complex64],
) {
    let nx = coeffs.nx;
    let n_ground = coeffs.v_ground.len();
    let n_excited = n_ground + 1;
    let e_plus = &scratch.fields.e_plus;
    let e_minus = &scratch.fields.e_minus;
    for i in 0..nx {
        scratch.conj_plus[i] = e_plus[i].conj();
        scratch.conj_minus[i] = e_minus[i].conj();
    }
    let (cp, cm) = (&scratch.conj_plus, &scratch.conj_minus);

    for g in 0..n_ground {
        let a = &ground[g * nx..(g + 1) * nx];
        let b_below = &excited[g * nx..(g + 1) * nx];
        let b_above = &excited[(g + 1) * nx..(g + 2) * nx];
        let out = &mut out_ground[g * nx..(g + 1) * nx];
        let v = if coeffs.transport { coeffs.v_ground[g] } else { 0.0 };
        transport(v, coeffs.stencil, coeffs.inv_h, a, out);
        let phase = coeffs.phase_ground[g];
        for ((((o, a), bu), bd), (p, m)) in out
            .iter_mut()
            .zip(a)
            .zip(b_above)
            .zip(b_below)
            .zip(cp.iter().zip(cm))
        {
            *o += phase * a + p * bu + m * bd;
        }
    }

    let sign = if coeffs.options.flip_excited_coupling { 1.0 } else { -1.0 };
    for e in 0..n_excited {
        let b = &excited[e * nx..(e + 1) * nx];
        let out = &mut out_excited[e * nx..(e + 1) * nx];
        let v = if coeffs.transport { coeffs.v_excited[e] } else { 0.0 };
        transport(v, coeffs.stencil, coeffs.inv_h, b, out);
        let lin = coeffs.linear_excited[e];
        // b_m couples to a_{m-1} (row e-1) through E⁺ and a_{m+1} (row e) through E⁻.
        match (e >= 1, e < n_ground) {
            (true, true) => {
                let a_below = &ground[(e - 1) * nx..e * nx];
                let a_above = &ground[e * nx..(e + 1) * nx];
                for ((((o, b), ad), au), (p, m)) in out
                    .iter_mut()
                    .zip(b)
                    .zip(a_below)
                    .zip(a_above)
                    .zip(e_plus.iter().zip(e_minus))
                {
                    *o += lin * b + (p * ad + m * au) * sign;
                }
            }
            (true, false) => {
                let a_below = &ground[(e - 1) * nx..e * nx];
                for (((o, b), ad), p) in out.iter_mut().zip(b).zip(a_below).zip(e_plus) {
                    *o += lin * b + p * ad * sign;
                }
            }
            (false, true) => {
                let a_above = &ground[e * nx..(e + 1) * nx];
                for (((o, b), au), m) in out.iter_mut().zip(b).zip(a_above).zip(e_minus) {
                    *o += lin * b + m * au * sign;
                }
            }
            (false, false) => unreachable!("every excited row has a ground partner"),
        }
    }
}

/// Right-hand side of the amplitude equations for `state` and the supplied
/// field pair. The result has the shape of a state; its `t` is copied from
/// the input.
pub fn rhs(state: &FieldState, fields: &FieldPair, params: &DimensionlessParams) -> Result<FieldState> {
    let coeffs = Coefficients::new(params, StepperOptions::default());
    coeffs.check_shape(state)?;
    if fields.e_plus.len() != state.nx() || fields.e_minus.len() != state.nx() {
        return Err(SimError::Structural(format!(
            "field pair has {} / {} points, state has {}",
            fields.e_plus.len(),
            fields.e_minus.len(),
            state.nx()
        )));
    }
    let mut scratch = RhsScratch::new(state.nx());
    scratch.fields.clone_from(fields);
    let mut out = FieldState::zeros(state.mode_set(), state.nx());
    out.t = state.t;
    let (og, oe) = out.flat_mut();
    rhs_with_fields(
        &coeffs,
        state.ground_flat(),
        state.excited_flat(),
        &mut scratch,
        og,
        oe,
    );
    Ok(out)
}

/// Classical RK4 stepper with preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    coeffs: Coefficients,
    scratch: RhsScratch,
    k_ground: Vec<Complex64>,
    k_excited: Vec<Complex64>,
    acc_ground: Vec<Complex64>,
    acc_excited: Vec<Complex64>,
    stage_ground: Vec<Complex64>,
    stage_excited: Vec<Complex64>,
}

impl Stepper {
    pub fn new(params: &DimensionlessParams) -> Result<Self> {
        Self::with_options(params, StepperOptions::default())
    }

    pub fn with_options(params: &DimensionlessParams, options: StepperOptions) -> Result<Self> {
        params.validate()?;
        let nx = params.grid.nx;
        let ng = params.mode_set.n_ground() * nx;
        let ne = params.mode_set.n_excited() * nx;
        Ok(Self {
            coeffs: Coefficients::new(params, options),
            scratch: RhsScratch::new(nx),
            k_ground: vec![ZERO; ng],
            k_excited: vec![ZERO; ne],
            acc_ground: vec![ZERO; ng],
            acc_excited: vec![ZERO; ne],
            stage_ground: vec![ZERO; ng],
            stage_excited: vec![ZERO; ne],
        })
    }

    /// Advances `state` by `dt` with the incident amplitude held at `e0`.
    pub fn step(&mut self, state: &mut FieldState, dt: f64, e0: f64) -> Result<()> {
        self.coeffs.check_shape(state)?;
        let mut losses = Losses::default();
        self.step_full(state, dt, e0, &mut losses);
        if !state.is_finite() {
            return Err(SimError::Divergence { t: state.t, dt, phase: None });
        }
        Ok(())
    }

    fn step_full(&mut self, state: &mut FieldState, dt: f64, e0: f64, losses: &mut Losses) {
        let Self {
            coeffs,
            scratch,
            k_ground,
            k_excited,
            acc_ground,
            acc_excited,
            stage_ground,
            stage_excited,
        } = self;
        let mut slope = |g: &[Complex64], e: &[Complex64], kg: &mut [Complex64], ke: &mut [Complex64]| {
            evaluate_fields(coeffs, g, e, e0, scratch);
            rhs_with_fields(coeffs, g, e, scratch, kg, ke);
            coeffs.loss_rates(g, e)
        };
        let (y_ground, y_excited) = state.flat_mut();
        let half = 0.5 * dt;

        let r1 = slope(y_ground, y_excited, acc_ground, acc_excited);
        stage_update(stage_ground, y_ground, acc_ground, half);
        stage_update(stage_excited, y_excited, acc_excited, half);

        let r2 = slope(stage_ground, stage_excited, k_ground, k_excited);
        accumulate(acc_ground, k_ground, 2.0);
        accumulate(acc_excited, k_excited, 2.0);
        stage_update(stage_ground, y_ground, k_ground, half);
        stage_update(stage_excited, y_excited, k_excited, half);

        let r3 = slope(stage_ground, stage_excited, k_ground, k_excited);
        accumulate(acc_ground, k_ground, 2.0);
        accumulate(acc_excited, k_excited, 2.0);
        stage_update(stage_ground, y_ground, k_ground, dt);
        stage_update(stage_excited, y_excited, k_excited, dt);

        let r4 = slope(stage_ground, stage_excited, k_ground, k_excited);
        accumulate(acc_ground, k_ground, 1.0);
        accumulate(acc_excited, k_excited, 1.0);

        let w = dt / 6.0;
        accumulate(y_ground, acc_ground, w);
        accumulate(y_excited, acc_excited, w);
        state.t += dt;

        losses.spontaneous += w * (r1.0 + 2.0 * r2.0 + 2.0 * r3.0 + r4.0);
        losses.boundary += w * (r1.1 + 2.0 * r2.1 + 2.0 * r3.1 + r4.1);
    }

    /// Free propagation of the ground clouds alone (excited manifold empty,
    /// no incident light): RK4 on the transport operator followed by the
    /// exact recoil phase, which commutes with it.
    fn step_quiet(&mut self, state: &mut FieldState, dt: f64, losses: &mut Losses) {
        let nx = self.coeffs.nx;
        let transport_on = self.coeffs.transport;
        let (y_ground, _) = state.flat_mut();
        let mut boundary_rate = [0.0; 4];
        for (g, row) in y_ground.chunks_exact_mut(nx).enumerate() {
            let v = if transport_on { self.coeffs.v_ground[g] } else { 0.0 };
            if v != 0.0 {
                let (stencil, inv_h) = (self.coeffs.stencil, self.coeffs.inv_h);
                let k = &mut self.k_ground[..nx];
                let acc = &mut self.acc_ground[..nx];
                let stage = &mut self.stage_ground[..nx];
                let flux = |u: &[Complex64]| v.abs() * (u[0].norm_sqr() + u[nx - 1].norm_sqr());

                boundary_rate[0] += flux(row);
                transport(v, stencil, inv_h, row, k);
                acc.copy_from_slice(k);
                stage_update(stage, row, k, 0.5 * dt);
                boundary_rate[1] += flux(stage);
                transport(v, stencil, inv_h, stage, k);
                accumulate(acc, k, 2.0);
                stage_update(stage, row, k, 0.5 * dt);
                boundary_rate[2] += flux(stage);
                transport(v, stencil, inv_h, stage, k);
                accumulate(acc, k, 2.0);
                stage_update(stage, row, k, dt);
                boundary_rate[3] += flux(stage);
                transport(v, stencil, inv_h, stage, k);
                accumulate(acc, k, 1.0);
                accumulate(row, acc, dt / 6.0);
            }
            let rotation = (self.coeffs.phase_ground[g] * dt).exp();
            if rotation != Complex64::new(1.0, 0.0) {
                for z in row.iter_mut() {
                    *z *= rotation;
                }
            }
        }
        state.t += dt;
        let [r1, r2, r3, r4] = boundary_rate;
        losses.boundary += dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
    }
}

fn stage_update(out: &mut [Complex64], y: &[Complex64], k: &[Complex64], h: f64) {
    for ((o, y), k) in out.iter_mut().zip(y).zip(k) {
        *o = *y + *k * h;
    }
}

fn accumulate(out: &mut [Complex64], k: &[Complex64], w: f64) {
    for (o, k) in out.iter_mut().zip(k) {
        *o += *k * w;
    }
}

/// Step grid of the current integration segment: `t_k = start + k·dt`.
#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    dt: f64,
    steps: u64,
    quiet: bool,
}

impl Segment {
    fn next_time(&self) -> f64 {
        self.start + (self.steps + 1) as f64 * self.dt
    }
}

/// Population history recorded during a run.
#[derive(Debug, Clone, Default)]
struct Recorder {
    every: u64,
    records: Vec<PopulationRecord>,
    losses: Vec<Losses>,
}

/// An integration in progress: the state, its stepper, and the step grid of
/// the current schedule phase.
///
/// Phases are integrated on the grid `phase_start + k·dt` and closed by one
/// shortened step, so every phase boundary is hit exactly. Cloning an
/// `Evolution` in the middle of a phase and finishing the clone at a later
/// time gives bit-for-bit the same state as a fresh integration to that
/// time; delay sweeps rely on this.
#[derive(Debug, Clone)]
pub struct Evolution {
    stepper: Stepper,
    state: FieldState,
    losses: Losses,
    dt: f64,
    quiet_threshold: f64,
    quiet_dt: f64,
    e0: f64,
    label: &'static str,
    segment: Segment,
    recorder: Option<Recorder>,
}

impl Evolution {
    /// Starts from the condensate at rest, `a0 ≡ 1`.
    pub fn new(params: &DimensionlessParams, options: StepperOptions) -> Result<Self> {
        let state = FieldState::initial(params.mode_set, params.grid.nx);
        Self::from_state(params, options, state)
    }

    pub fn from_state(
        params: &DimensionlessParams,
        options: StepperOptions,
        state: FieldState,
    ) -> Result<Self> {
        let stepper = Stepper::with_options(params, options)?;
        stepper.coeffs.check_shape(&state)?;
        let dt = params.effective_dt();
        Ok(Self {
            stepper,
            losses: Losses::default(),
            dt,
            quiet_threshold: params.quiet_threshold,
            quiet_dt: params.quiet_dt,
            e0: 0.0,
            label: "integration",
            segment: Segment {
                start: state.t,
                dt,
                steps: 0,
                quiet: false,
            },
            state,
            recorder: None,
        })
    }

    /// Records populations every `every` steps and at every phase boundary.
    pub fn record_every(&mut self, every: u64) {
        let mut rec = Recorder {
            every: every.max(1),
            ..Recorder::default()
        };
        rec.records.push(populations(&self.state));
        rec.losses.push(self.losses);
        self.recorder = Some(rec);
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn into_state(self) -> FieldState {
        self.state
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }

    pub fn losses(&self) -> Losses {
        self.losses
    }

    /// True once the ground-only fast path has taken over in this phase.
    pub fn is_quiet(&self) -> bool {
        self.segment.quiet
    }

    /// Begins a schedule phase at the current time with incident amplitude `e0`.
    pub fn start_phase(&mut self, e0: f64, label: &'static str) {
        self.e0 = e0;
        self.label = label;
        self.segment = Segment {
            start: self.state.t,
            dt: self.dt,
            steps: 0,
            quiet: false,
        };
    }

    /// Takes every full grid step that does not pass `t_target`.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.segment.next_time() <= t_target - LANDING_SLACK * self.segment.dt {
            let t_next = self.segment.next_time();
            let dt = self.segment.dt;
            self.raw_step(dt);
            self.state.t = t_next;
            self.segment.steps += 1;
            if self.segment.steps % CHECK_EVERY == 0 {
                self.check_finite(dt)?;
                self.maybe_go_quiet();
            }
            self.maybe_record(false);
        }
        Ok(())
    }

    /// Integrates to exactly `t_target`, finishing with a shortened step.
    pub fn finish_at(&mut self, t_target: f64) -> Result<()> {
        self.advance_to(t_target)?;
        let remaining = t_target - self.state.t;
        if remaining > LANDING_SLACK * self.segment.dt {
            self.raw_step(remaining);
            // Later steps in this phase continue on a grid anchored here.
            self.segment.start = t_target;
            self.segment.steps = 0;
        }
        self.state.t = t_target;
        self.check_finite(remaining.max(self.segment.dt))?;
        self.maybe_record(true);
        Ok(())
    }

    /// One schedule phase from the current time to `t_end`.
    pub fn run_phase(&mut self, t_end: f64, e0: f64, label: &'static str) -> Result<()> {
        self.start_phase(e0, label);
        self.finish_at(t_end)
    }

    fn raw_step(&mut self, dt: f64) {
        if self.segment.quiet {
            self.stepper.step_quiet(&mut self.state, dt, &mut self.losses);
        } else {
            self.stepper
                .step_full(&mut self.state, dt, self.e0, &mut self.losses);
        }
    }

    fn check_finite(&self, dt: f64) -> Result<()> {
        if self.state.is_finite() {
            Ok(())
        } else {
            Err(SimError::Divergence {
                t: self.state.t,
                dt,
                phase: None,
            }
            .in_phase(self.label))
        }
    }

    fn maybe_go_quiet(&mut self) {
        if self.segment.quiet || self.e0 != 0.0 || self.quiet_threshold <= 0.0 {
            return;
        }
        if self.state.max_excited_amplitude() < self.quiet_threshold {
            self.state.clear_excited();
            self.segment = Segment {
                start: self.state.t,
                dt: self.quiet_dt,
                steps: 0,
                quiet: true,
            };
        }
    }

    fn maybe_record(&mut self, boundary: bool) {
        if let Some(rec) = self.recorder.as_mut() {
            if boundary || self.segment.steps % rec.every == 0 {
                let last_t = rec.records.last().map(|r| r.t);
                if last_t != Some(self.state.t) {
                    rec.records.push(populations(&self.state));
                    rec.losses.push(self.losses);
                }
            }
        }
    }
}

/// Output of [`run_ramsey`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: DimensionlessParams,
    pub schedule: PulseSchedule,
    /// Full states at the end of pulse 1, the start of pulse 2 and the
    /// measurement time `tau + dt_pulse`.
    pub snapshots: Vec<FieldState>,
    pub populations: Vec<PopulationRecord>,
    /// Cumulative losses aligned with `populations`.
    pub losses: Vec<Losses>,
}

impl Trajectory {
    pub fn after_first_pulse(&self) -> &FieldState {
        &self.snapshots[0]
    }

    pub fn final_state(&self) -> &FieldState {
        self.snapshots.last().expect("a trajectory always has snapshots")
    }

    pub fn final_populations(&self) -> PopulationRecord {
        populations(self.final_state())
    }
}

/// Default population cadence in steps.
pub const DEFAULT_RECORD_EVERY: u64 = 100;

/// Integrates the two-pulse sequence from the condensate at rest.
pub fn run_ramsey(params: &DimensionlessParams, schedule: &PulseSchedule) -> Result<Trajectory> {
    run_ramsey_with(params, schedule, StepperOptions::default(), DEFAULT_RECORD_EVERY)
}

pub fn run_ramsey_with(
    params: &DimensionlessParams,
    schedule: &PulseSchedule,
    options: StepperOptions,
    record_every: u64,
) -> Result<Trajectory> {
    schedule.validate()?;
    let mut evo = Evolution::new(params, options)?;
    evo.record_every(record_every);
    let mut snapshots = Vec::with_capacity(3);

    evo.run_phase(schedule.dt_pulse, params.e0, "pulse 1")?;
    snapshots.push(evo.state().clone());
    evo.run_phase(schedule.tau, 0.0, "free evolution")?;
    snapshots.push(evo.state().clone());
    evo.run_phase(schedule.t_measure(), params.e0, "pulse 2")?;
    snapshots.push(evo.state().clone());

    let rec = evo.recorder.take().unwrap_or_default();
    Ok(Trajectory {
        params: params.clone(),
        schedule: *schedule,
        snapshots,
        populations: rec.records,
        losses: rec.losses,
    })
}

/// State right after the first pulse, the input of the recoil analysis.
pub fn run_first_pulse(params: &DimensionlessParams, dt_pulse: f64) -> Result<FieldState> {
    let mut evo = Evolution::new(params, StepperOptions::default())?;
    evo.run_phase(dt_pulse, params.e0, "pulse 1")?;
    Ok(evo.into_state())
}
