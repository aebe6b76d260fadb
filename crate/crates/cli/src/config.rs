//! Run configuration: TOML file, command-line overrides and defaults.
//!
//! Every value is resolved as flag > file > built-in default. The file
//! layout is
//!
//! ```toml
//! schema = "ramsey-config/1"
//!
//! [params]            # any DimensionlessParams field, plus max_order and nx
//! delta = 0.5
//! max_order = 10
//! nx = 256
//! stencil = "central2"
//!
//! [schedule]
//! dt_pulse = 3000.0
//! tau = 90000.0
//!
//! [delay_sweep]
//! tau_start = 3000.0
//! tau_end = 90000.0
//! tau_points = 50
//!
//! [detuning_sweep]
//! delta_start = -12.0
//! delta_end = 12.0
//! delta_points = 25
//! fringes = true
//!
//! [spectrum]
//! k_half_width = 201.06192982974676
//! k_points = 4096
//!
//! [output]
//! record_every = 100
//! workers = 4
//! ```
//!
//! All sections and keys are optional; unknown keys are rejected.

use std::path::Path;

use clap::Args;
use ramsey_core::{reference_defaults, DimensionlessParams, GridSpec, KGrid, ModeSet, PulseSchedule, Stencil};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_SCHEMA: &str = "ramsey-config/1";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema: Option<String>,
    #[serde(default)]
    pub params: FileParams,
    #[serde(default)]
    pub schedule: FileSchedule,
    #[serde(default)]
    pub delay_sweep: FileDelaySweep,
    #[serde(default)]
    pub detuning_sweep: FileDetuningSweep,
    #[serde(default)]
    pub spectrum: FileSpectrum,
    #[serde(default)]
    pub output: FileOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileParams {
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub v_coeff: Option<f64>,
    pub omega_coeff: Option<f64>,
    pub e0: Option<f64>,
    pub k0l: Option<f64>,
    pub max_order: Option<u32>,
    pub nx: Option<usize>,
    pub stencil: Option<String>,
    pub dt: Option<f64>,
    pub drop_spatial_derivatives: Option<bool>,
    pub quiet_threshold: Option<f64>,
    pub quiet_dt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSchedule {
    pub dt_pulse: Option<f64>,
    pub tau: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDelaySweep {
    pub tau_start: Option<f64>,
    pub tau_end: Option<f64>,
    pub tau_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDetuningSweep {
    pub delta_start: Option<f64>,
    pub delta_end: Option<f64>,
    pub delta_points: Option<usize>,
    pub fringes: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSpectrum {
    pub k_half_width: Option<f64>,
    pub k_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOutput {
    pub record_every: Option<u64>,
    pub workers: Option<usize>,
}

/// Flags shared by every subcommand. Names mirror the config keys.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, short)]
    pub config: Option<std::path::PathBuf>,
    /// Detuning from resonance, in units of 1/tau_R.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Spontaneous decay rate times tau_R.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Recoil velocity per unit index, v_j = v_coeff * j.
    #[arg(long)]
    pub v_coeff: Option<f64>,
    /// Recoil frequency per unit index squared, omega_j = omega_coeff * j^2.
    #[arg(long)]
    pub omega_coeff: Option<f64>,
    /// Incident field amplitude while a pulse is on.
    #[arg(long, allow_negative_numbers = true)]
    pub e0: Option<f64>,
    /// Optical wavenumber times the sample length.
    #[arg(long)]
    pub k0l: Option<f64>,
    /// Highest ground-state cloud order M (even).
    #[arg(long)]
    pub max_order: Option<u32>,
    /// Spatial grid points on [0, 1].
    #[arg(long)]
    pub nx: Option<usize>,
    /// `central2` or `upwind1`.
    #[arg(long)]
    pub stencil: Option<String>,
    /// Time step; defaults to min(0.1, 0.2 / max(1, |delta|)).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Omit the transport terms v_j d/dx.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub drop_spatial_derivatives: Option<bool>,
    /// Excited amplitude below which free evolution switches to the ground-only fast path (0 disables).
    #[arg(long)]
    pub quiet_threshold: Option<f64>,
    /// Time step of the ground-only fast path.
    #[arg(long)]
    pub quiet_dt: Option<f64>,
    /// Duration of each pulse.
    #[arg(long)]
    pub dt_pulse: Option<f64>,
    /// Delay between the pulse starts for `run`.
    #[arg(long)]
    pub tau: Option<f64>,
    /// First delay of a delay sweep.
    #[arg(long)]
    pub tau_start: Option<f64>,
    /// Last delay of a delay sweep.
    #[arg(long)]
    pub tau_end: Option<f64>,
    /// Number of uniformly spaced delays.
    #[arg(long)]
    pub tau_points: Option<usize>,
    /// First detuning of a detuning sweep.
    #[arg(long, allow_negative_numbers = true)]
    pub delta_start: Option<f64>,
    /// Last detuning of a detuning sweep.
    #[arg(long, allow_negative_numbers = true)]
    pub delta_end: Option<f64>,
    /// Number of uniformly spaced detunings.
    #[arg(long)]
    pub delta_points: Option<usize>,
    /// Also run a delay sweep and fringe fit at every detuning.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub fringes: Option<bool>,
    /// Half width of the wavenumber window for spectra (1/L).
    #[arg(long)]
    pub k_half_width: Option<f64>,
    /// Points of the wavenumber window.
    #[arg(long)]
    pub k_points: Option<usize>,
    /// Trajectory record cadence, in steps.
    #[arg(long)]
    pub record_every: Option<u64>,
    /// Worker threads for sweeps. Falls back to RAMSEY_WORKERS, then the
    /// config file, then the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaySweep {
    pub tau_start: f64,
    pub tau_end: f64,
    pub tau_points: usize,
}

impl DelaySweep {
    pub fn taus(&self) -> Vec<f64> {
        ramsey_core::fringe::uniform_delays(self.tau_start, self.tau_end, self.tau_points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningSweep {
    pub delta_start: f64,
    pub delta_end: f64,
    pub delta_points: usize,
    pub fringes: bool,
}

impl DetuningSweep {
    pub fn deltas(&self) -> Vec<f64> {
        ramsey_core::fringe::uniform_delays(self.delta_start, self.delta_end, self.delta_points)
    }
}

/// Fully resolved configuration. Its JSON form is the manifest's
/// `config_snapshot` and the input of `parameter_hash`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: String,
    pub params: DimensionlessParams,
    pub schedule: PulseSchedule,
    pub delay_sweep: DelaySweep,
    pub detuning_sweep: DetuningSweep,
    pub spectrum: KGrid,
    pub record_every: u64,
}

pub const WORKERS_ENV: &str = "RAMSEY_WORKERS";

/// Resolved configuration plus the worker count, which does not affect
/// results and so stays out of the snapshot.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub workers: Option<usize>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_file(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_file(text: &str) -> Result<FileConfig, String> {
    let file: FileConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    if let Some(schema) = &file.schema {
        if schema != CONFIG_SCHEMA {
            return Err(format!("unsupported schema `{schema}` (expected `{CONFIG_SCHEMA}`)"));
        }
    }
    Ok(file)
}

pub fn resolve(o: &Overrides) -> Result<Resolved, CliError> {
    let file = match &o.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };
    let env_workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))
        })?),
        Err(_) => None,
    };
    resolve_with(o, &file, env_workers)
}

pub fn resolve_with(o: &Overrides, f: &FileConfig, env_workers: Option<usize>) -> Result<Resolved, CliError> {
    let d = reference_defaults();
    let fp = &f.params;
    let stencil = match o.stencil.as_deref().or(fp.stencil.as_deref()) {
        Some(s) => s
            .parse::<Stencil>()
            .map_err(|e| CliError::Config(e.to_string()))?,
        None => d.grid.stencil,
    };
    let max_order = o.max_order.or(fp.max_order).unwrap_or(d.mode_set.max_order());
    let mode_set = ModeSet::new(max_order).map_err(|e| CliError::Config(e.to_string()))?;
    let params = DimensionlessParams {
        delta: o.delta.or(fp.delta).unwrap_or(d.delta),
        gamma: o.gamma.or(fp.gamma).unwrap_or(d.gamma),
        v_coeff: o.v_coeff.or(fp.v_coeff).unwrap_or(d.v_coeff),
        omega_coeff: o.omega_coeff.or(fp.omega_coeff).unwrap_or(d.omega_coeff),
        e0: o.e0.or(fp.e0).unwrap_or(d.e0),
        k0l: o.k0l.or(fp.k0l).unwrap_or(d.k0l),
        mode_set,
        grid: GridSpec {
            nx: o.nx.or(fp.nx).unwrap_or(d.grid.nx),
            stencil,
        },
        dt: o.dt.or(fp.dt).or(d.dt),
        drop_spatial_derivatives: o
            .drop_spatial_derivatives
            .or(fp.drop_spatial_derivatives)
            .unwrap_or(d.drop_spatial_derivatives),
        quiet_threshold: o.quiet_threshold.or(fp.quiet_threshold).unwrap_or(d.quiet_threshold),
        quiet_dt: o.quiet_dt.or(fp.quiet_dt).unwrap_or(d.quiet_dt),
    };
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let schedule = PulseSchedule {
        dt_pulse: o.dt_pulse.or(f.schedule.dt_pulse).unwrap_or(PulseSchedule::DEFAULT_PULSE),
        tau: o.tau.or(f.schedule.tau).unwrap_or(9e4),
    };
    schedule.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let delay_sweep = DelaySweep {
        tau_start: o.tau_start.or(f.delay_sweep.tau_start).unwrap_or(3e3),
        tau_end: o.tau_end.or(f.delay_sweep.tau_end).unwrap_or(9e4),
        tau_points: o.tau_points.or(f.delay_sweep.tau_points).unwrap_or(50),
    };
    if delay_sweep.tau_points == 0 || !(delay_sweep.tau_end >= delay_sweep.tau_start) {
        return Err(CliError::Config(
            "invalid `delay_sweep`: need tau_points >= 1 and tau_end >= tau_start".into(),
        ));
    }
    if delay_sweep.tau_start < schedule.dt_pulse {
        return Err(CliError::Config(format!(
            "invalid `tau_start`: {} is shorter than the pulse length {}",
            delay_sweep.tau_start, schedule.dt_pulse
        )));
    }

    let (lo, hi) = ramsey_core::fringe::DEFAULT_DETUNING_RANGE;
    let detuning_sweep = DetuningSweep {
        delta_start: o.delta_start.or(f.detuning_sweep.delta_start).unwrap_or(lo),
        delta_end: o.delta_end.or(f.detuning_sweep.delta_end).unwrap_or(hi),
        delta_points: o.delta_points.or(f.detuning_sweep.delta_points).unwrap_or(25),
        fringes: o.fringes.or(f.detuning_sweep.fringes).unwrap_or(true),
    };
    if detuning_sweep.delta_points == 0 || !(detuning_sweep.delta_end >= detuning_sweep.delta_start) {
        return Err(CliError::Config(
            "invalid `detuning_sweep`: need delta_points >= 1 and delta_end >= delta_start".into(),
        ));
    }

    let spectrum = KGrid::new(
        o.k_half_width.or(f.spectrum.k_half_width).unwrap_or(KGrid::DEFAULT_HALF_WIDTH),
        o.k_points.or(f.spectrum.k_points).unwrap_or(KGrid::DEFAULT_POINTS),
    )
    .map_err(|e| CliError::Config(format!("invalid `spectrum`: {e}")))?;

    let record_every = o.record_every.or(f.output.record_every).unwrap_or(100);
    if record_every == 0 {
        return Err(CliError::Config("invalid `record_every`: must be at least 1".into()));
    }
    let workers = o.workers.or(env_workers).or(f.output.workers);
    if workers == Some(0) {
        return Err(CliError::Config("invalid `workers`: must be at least 1".into()));
    }

    Ok(Resolved {
        config: RunConfig {
            schema: CONFIG_SCHEMA.to_string(),
            params,
            schedule,
            delay_sweep,
            detuning_sweep,
            spectrum,
            record_every,
        },
        workers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let r = resolve_with(&Overrides::default(), &FileConfig::default(), None).unwrap();
        assert_eq!(r.config.params, reference_defaults());
        assert_eq!(r.config.schedule.tau, 9e4);
        assert_eq!(r.config.delay_sweep.taus().len(), 50);
        assert_eq!(r.workers, None);
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let file = parse_file("[params]\ndelta = -0.5\ngamma = 0.0\n").unwrap();
        let o = Overrides {
            delta: Some(2.0),
            ..Overrides::default()
        };
        let r = resolve_with(&o, &file, None).unwrap();
        assert_eq!(r.config.params.delta, 2.0);
        assert_eq!(r.config.params.gamma, 0.0);
        assert_eq!(r.config.params.e0, reference_defaults().e0);
    }

    #[test]
    fn workers_precedence() {
        let file = parse_file("[output]\nworkers = 3\n").unwrap();
        assert_eq!(resolve_with(&Overrides::default(), &file, None).unwrap().workers, Some(3));
        assert_eq!(resolve_with(&Overrides::default(), &file, Some(5)).unwrap().workers, Some(5));
        let o = Overrides {
            workers: Some(2),
            ..Overrides::default()
        };
        assert_eq!(resolve_with(&o, &file, Some(5)).unwrap().workers, Some(2));
    }

    #[test]
    fn bad_values_name_the_field() {
        let file = parse_file("[params]\nnx = 4\n").unwrap();
        let err = resolve_with(&Overrides::default(), &file, None).unwrap_err();
        assert!(err.to_string().contains("nx"), "{err}");
        assert!(parse_file("[params]\nbogus = 1\n").unwrap_err().contains("bogus"));
        assert!(parse_file("schema = \"other/9\"\n").is_err());
    }
}
