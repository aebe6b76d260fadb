//! Two-pulse Ramsey interference of recoiling clouds in a one-dimensional
//! Bose-Einstein condensate.
//!
//! The condensate is described by slowly varying envelopes `a_j(x, t)` of
//! ground-state clouds carrying `j` photon momenta and `b_j(x, t)` of
//! excited-state clouds, coupled through forward and backward field envelopes
//! that are cumulative integrals over the sample. The crate integrates these
//! equations through a two-pulse sequence and extracts cloud populations,
//! envelope momentum distributions and fringe-fitted recoil frequencies.

pub mod dynamics;
pub mod error;
pub mod fields;
pub mod fringe;
pub mod modes;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod spectrum;
pub mod state;
pub mod validation;

pub use dynamics::{run_first_pulse, run_ramsey, Evolution, Losses, Stepper, StepperOptions, Trajectory};
pub use error::{ParamError, SimError};
pub use fields::{compute_fields, FieldPair};
pub use modes::{ModeIndex, ModeSet};
pub use observables::{populations, PopulationRecord};
pub use params::{
    derive_dimensionless, reference_defaults, DimensionlessParams, GridSpec, PhysicalParams,
    PulseSchedule, Stencil,
};
pub use fringe::{
    fit_fringe, sweep_delay, sweep_detuning, Channel, DispersionRow, DispersionTable, FitError,
    FringeFit, FringeSeries,
};
pub use spectrum::{envelope_spectrum, recoil_report, KGrid, MomentumSpectrum, RecoilReport};
pub use state::FieldState;
