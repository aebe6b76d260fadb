//! Physical and dimensionless parameter sets.
//!
//! Lengths are measured in units of the condensate size `L` and times in units
//! of the superradiant time `tau_R`, so the sample occupies `x ∈ [0, 1]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ParamError;
use crate::modes::{ModeIndex, ModeSet};

const HBAR: f64 = 1.054_571_817e-34;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
const RB87_MASS_U: f64 = 86.909_180_527;

/// Largest `dt * stiffness` accepted for the explicit RK4 stepper. The
/// imaginary-axis stability limit of classical RK4 is `2√2 ≈ 2.83`.
pub const RK4_STABILITY_LIMIT: f64 = 2.5;

/// SI description of the sample and the optical transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Transverse condensate size (m).
    pub length: f64,
    /// Atom number density (m⁻³).
    pub density: f64,
    /// Optical wavelength (m).
    pub wavelength: f64,
    /// Spontaneous emission rate (s⁻¹).
    pub gamma_rate: f64,
    /// Transition dipole moment (C·m).
    pub dipole: f64,
    /// Atomic mass (kg).
    pub atom_mass: f64,
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Speed of light (m/s).
    pub speed_of_light: f64,
}

impl PhysicalParams {
    /// ⁸⁷Rb condensate of the reference experiment: L = 16 μm,
    /// N₀ = 4.15×10¹³ cm⁻³, λ = 780 nm, Γ = 0.37×10⁸ s⁻¹, d = 2.07×10⁻²⁹ C·m.
    pub fn rubidium_reference() -> Self {
        Self {
            length: 16e-6,
            density: 4.15e13 * 1e6,
            wavelength: 780e-9,
            gamma_rate: 0.37e8,
            dipole: 2.07e-29,
            atom_mass: RB87_MASS_U * ATOMIC_MASS_UNIT,
            hbar: HBAR,
            speed_of_light: SPEED_OF_LIGHT,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("length", self.length),
            ("density", self.density),
            ("wavelength", self.wavelength),
            ("gamma_rate", self.gamma_rate),
            ("dipole", self.dipole),
            ("atom_mass", self.atom_mass),
            ("hbar", self.hbar),
            ("speed_of_light", self.speed_of_light),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::invalid(
                    name,
                    format!("must be strictly positive and finite, got {value}"),
                ));
            }
        }
        if self.wavelength >= self.length {
            return Err(ParamError::invalid(
                "wavelength",
                "must be shorter than the sample length",
            ));
        }
        Ok(())
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Output of [`derive_dimensionless`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedUnits {
    /// Superradiant time constant in seconds.
    pub tau_r_seconds: f64,
    pub params: DimensionlessParams,
}

/// Converts an SI parameter set into the dimensionless model.
///
/// `tau_R = ħ / (π d² k0 N0 L)` is evaluated in Gaussian units, i.e. with the
/// dipole converted to esu·cm; this is the SI expression `4 ε0 ħ / (d² k0 N0 L)`.
/// Settings that have no physical counterpart (pulse amplitude, truncation,
/// grid, stepper) are taken from [`reference_defaults`].
pub fn derive_dimensionless(p: &PhysicalParams) -> Result<DerivedUnits, ParamError> {
    p.validate()?;
    let k0 = p.k0();

    // CGS: ħ in erg·s, d in esu·cm, k0 in 1/cm, N0 in 1/cm³, L in cm.
    let hbar_cgs = p.hbar * 1e7;
    let dipole_cgs = p.dipole * 1e3 * p.speed_of_light;
    let k0_cgs = k0 * 1e-2;
    let density_cgs = p.density * 1e-6;
    let length_cgs = p.length * 1e2;
    let tau_r = hbar_cgs / (PI * dipole_cgs * dipole_cgs * k0_cgs * density_cgs * length_cgs);

    let recoil_velocity = p.hbar * k0 / p.atom_mass;
    let params = DimensionlessParams {
        gamma: p.gamma_rate * tau_r,
        v_coeff: recoil_velocity * tau_r / p.length,
        omega_coeff: p.hbar * k0 * k0 * tau_r / (2.0 * p.atom_mass),
        k0l: k0 * p.length,
        ..reference_defaults()
    };
    Ok(DerivedUnits {
        tau_r_seconds: tau_r,
        params,
    })
}

/// The dimensionless parameter set quoted for the reference experiment:
/// `v_j = 7.8e-7 j`, `ω_j = 5e-5 j²`, `γ = 0.05`, `E0 = 6e-3`, `M = 10`,
/// `k0 L = 2π · 16 μm / 780 nm`, detuning `Δ = 0.5`.
pub fn reference_defaults() -> DimensionlessParams {
    DimensionlessParams {
        delta: 0.5,
        gamma: 5e-2,
        v_coeff: 7.8e-7,
        omega_coeff: 5e-5,
        e0: 6e-3,
        k0l: 2.0 * PI * 16e-6 / 780e-9,
        mode_set: ModeSet::default(),
        grid: GridSpec::default(),
        dt: None,
        drop_spatial_derivatives: false,
        quiet_threshold: DEFAULT_QUIET_THRESHOLD,
        quiet_dt: DEFAULT_QUIET_DT,
    }
}

pub const DEFAULT_QUIET_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_QUIET_DT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Second-order central differences (summation-by-parts closure).
    #[default]
    Central2,
    /// First-order upwind differences.
    Upwind1,
}

impl std::str::FromStr for Stencil {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "central2" => Ok(Stencil::Central2),
            "upwind1" => Ok(Stencil::Upwind1),
            other => Err(ParamError::invalid(
                "stencil",
                format!("expected `central2` or `upwind1`, got `{other}`"),
            )),
        }
    }
}

/// Uniform spatial grid on `[0, 1]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    #[serde(default)]
    pub stencil: Stencil,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn new(nx: usize, stencil: Stencil) -> Result<Self, ParamError> {
        let grid = Self { nx, stencil };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.nx < Self::MIN_POINTS {
            return Err(ParamError::invalid(
                "nx",
                format!("need at least {} grid points, got {}", Self::MIN_POINTS, self.nx),
            ));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: 256,
            stencil: Stencil::Central2,
        }
    }
}

/// Complete input of one run apart from the pulse timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// Detuning Δ from the atomic resonance (1/τ_R).
    pub delta: f64,
    /// Spontaneous decay rate γ = Γ τ_R.
    pub gamma: f64,
    /// Recoil velocity per unit index, `v_j = v_coeff · j`.
    pub v_coeff: f64,
    /// Recoil frequency per unit index squared, `ω_j = omega_coeff · j²`.
    pub omega_coeff: f64,
    /// Incident field amplitude while a pulse is on.
    pub e0: f64,
    /// Optical wavenumber in units of 1/L.
    pub k0l: f64,
    pub mode_set: ModeSet,
    pub grid: GridSpec,
    /// Time step; `None` selects [`default_dt`] for the current detuning.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Drop the `v_j ∂x` transport terms.
    #[serde(default)]
    pub drop_spatial_derivatives: bool,
    /// During free evolution, once every excited amplitude is below this
    /// magnitude the excited manifold is zeroed and the ground clouds are
    /// propagated alone with step `quiet_dt`. Zero disables the switch.
    #[serde(default = "default_quiet_threshold")]
    pub quiet_threshold: f64,
    #[serde(default = "default_quiet_dt")]
    pub quiet_dt: f64,
}

fn default_quiet_threshold() -> f64 {
    DEFAULT_QUIET_THRESHOLD
}

fn default_quiet_dt() -> f64 {
    DEFAULT_QUIET_DT
}

/// `min(0.1, 0.2 / max(1, |Δ|))`.
pub fn default_dt(delta: f64) -> f64 {
    (0.2 / delta.abs().max(1.0)).min(0.1)
}

impl Default for DimensionlessParams {
    fn default() -> Self {
        reference_defaults()
    }
}

impl DimensionlessParams {
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn velocity(&self, j: ModeIndex) -> f64 {
        self.v_coeff * j.0 as f64
    }

    pub fn omega(&self, j: ModeIndex) -> f64 {
        self.omega_coeff * (j.0 as f64).powi(2)
    }

    /// Bare recoil frequency of the |±2⟩ clouds.
    pub fn omega2(&self) -> f64 {
        4.0 * self.omega_coeff
    }

    pub fn effective_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(self.delta))
    }

    /// Upper bound on the magnitude of the eigenvalues of the semi-discrete
    /// right-hand side, used for the RK4 stability check.
    pub fn stiffness(&self) -> f64 {
        let m = self.mode_set.max_order() as f64;
        let excited_omega = self.omega_coeff * (m + 1.0).powi(2);
        let ground_omega = self.omega_coeff * m * m;
        let detuning = self.delta.abs() + excited_omega + 0.5 * self.gamma;
        // Coupling through E±: |E0| plus the self-consistent Volterra term of norm ≤ 2.
        let coupling = self.e0 + 2.0;
        let advection = if self.drop_spatial_derivatives {
            0.0
        } else {
            2.0 * self.v_coeff.abs() * (m + 1.0) / self.grid.spacing()
        };
        detuning.max(ground_omega) + coupling + advection
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let finite = [
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("v_coeff", self.v_coeff),
            ("omega_coeff", self.omega_coeff),
            ("e0", self.e0),
            ("k0l", self.k0l),
            ("quiet_threshold", self.quiet_threshold),
            ("quiet_dt", self.quiet_dt),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(ParamError::invalid(name, format!("must be finite, got {value}")));
            }
        }
        for (name, value) in [
            ("gamma", self.gamma),
            ("e0", self.e0),
            ("quiet_threshold", self.quiet_threshold),
        ] {
            if value < 0.0 {
                return Err(ParamError::invalid(name, format!("must be nonnegative, got {value}")));
            }
        }
        if self.k0l <= 0.0 {
            return Err(ParamError::invalid("k0l", "must be positive"));
        }
        if self.quiet_dt <= 0.0 {
            return Err(ParamError::invalid("quiet_dt", "must be positive"));
        }
        self.grid.validate()?;
        let dt = self.effective_dt();
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ParamError::invalid("dt", format!("must be positive, got {dt}")));
        }
        let bound = dt * self.stiffness();
        if bound >= RK4_STABILITY_LIMIT {
            return Err(ParamError::invalid(
                "dt",
                format!(
                    "dt = {dt} violates the RK4 stability bound: dt * stiffness = {bound:.3} >= {RK4_STABILITY_LIMIT}"
                ),
            ));
        }
        Ok(())
    }
}

/// Two identical rectangular pulses; the first starts at t = 0, the second
/// at t = `tau`. Populations are measured at `tau + dt_pulse`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Pulse duration δt (τ_R units).
    pub dt_pulse: f64,
    /// Delay between pulse onsets (τ_R units).
    pub tau: f64,
}

impl PulseSchedule {
    pub const DEFAULT_PULSE: f64 = 3e3;

    pub fn new(dt_pulse: f64, tau: f64) -> Result<Self, ParamError> {
        let schedule = Self { dt_pulse, tau };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn with_delay(tau: f64) -> Result<Self, ParamError> {
        Self::new(Self::DEFAULT_PULSE, tau)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.dt_pulse.is_finite() && self.dt_pulse > 0.0) {
            return Err(ParamError::invalid("dt_pulse", "must be positive and finite"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(ParamError::invalid("tau", "must be positive and finite"));
        }
        if self.tau < self.dt_pulse {
            return Err(ParamError::invalid(
                "tau",
                format!("pulses overlap: tau = {} < dt_pulse = {}", self.tau, self.dt_pulse),
            ));
        }
        Ok(())
    }

    pub fn t_measure(&self) -> f64 {
        self.tau + self.dt_pulse
    }

    /// Incident amplitude at time `t` for a pulse amplitude `e0`.
    pub fn envelope(&self, t: f64, e0: f64) -> f64 {
        let on = (0.0..self.dt_pulse).contains(&t) || (self.tau..self.t_measure()).contains(&t);
        if on {
            e0
        } else {
            0.0
        }
    }
}
