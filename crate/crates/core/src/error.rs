use thiserror::Error;

/// A rejected parameter, naming the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {message}")]
pub struct ParamError {
    pub field: String,
    pub message: String,
}

impl ParamError {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("integration diverged at t = {t} (dt = {dt}){}", phase.map(|p| format!(" during {p}")).unwrap_or_default())]
    Divergence {
        t: f64,
        dt: f64,
        phase: Option<&'static str>,
    },

    #[error("momentum distribution of mode {mode} is undefined: amplitude is identically zero")]
    UndefinedDistribution { mode: i32 },

    #[error("no recoil report for the static cloud j = 0")]
    StaticCloud,

    #[error("delay point tau = {tau} failed: {source}")]
    SweepPoint {
        tau: f64,
        #[source]
        source: Box<SimError>,
    },
}

impl SimError {
    /// True for a numerical blow-up, including one inside a sweep point.
    pub fn is_divergence(&self) -> bool {
        match self {
            SimError::Divergence { .. } => true,
            SimError::SweepPoint { source, .. } => source.is_divergence(),
            _ => false,
        }
    }

    pub(crate) fn in_phase(self, phase: &'static str) -> Self {
        match self {
            SimError::Divergence { t, dt, .. } => SimError::Divergence {
                t,
                dt,
                phase: Some(phase),
            },
            other => other,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
