use thiserror::Error;

use crate::dynamics::Trajectory;

/// Which singular surface stopped an integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Singularity {
    /// |E| (or θ) reached a non-zero multiple of 2π.
    Boundary,
    /// |G| exceeded the overflow guard as θ approached π.
    GibbsOverflow,
}

impl std::fmt::Display for Singularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Singularity::Boundary => f.write_str("boundary_singularity"),
            Singularity::GibbsOverflow => f.write_str("gibbs_overflow"),
        }
    }
}

#[derive(Debug, Error)]
pub enum EslError {
    #[error("gibbs_singularity: rotation angle {theta} is within 1e-9 of an odd multiple of pi")]
    GibbsSingularity { theta: f64 },

    #[error("axis_undefined: rotation is the identity and no continuity context was given")]
    AxisUndefined,

    #[error("out_of_range: t = {t} outside the model domain [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("not_differentiable: angular velocity has no derivative at t = {t}")]
    NotDifferentiable { t: f64 },

    #[error("boundary_singularity: right-hand side undefined at angle {theta}")]
    BoundarySingularity { theta: f64 },

    #[error("{cause}: integration aborted at t = {time}")]
    Aborted {
        cause: Singularity,
        time: f64,
        /// Samples produced before the abort, with abort metadata filled in.
        partial: Box<Trajectory>,
    },

    #[error("parity_undetermined: all angular velocity derivatives through order 4 vanish at t = {t}")]
    ParityUndetermined { t: f64 },

    #[error("parallel_axis: initial axis is parallel to the angular velocity (|w.n0| = {dot})")]
    ParallelAxis { dot: f64 },

    #[error("theta_out_of_range: initial angle {theta} must lie strictly inside (0, 2*pi)")]
    ThetaOutOfRange { theta: f64 },

    #[error("period_too_small: strobe period {period} is shorter than two steps (dt = {dt})")]
    PeriodTooSmall { period: f64, dt: f64 },

    #[error("trajectory_aborted: underlying integration became singular at t = {time}")]
    TrajectoryAborted { time: f64 },

    #[error("series_too_short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("too_many_samples: {count} strided samples exceed the limit of {max}")]
    TooManySamples { count: usize, max: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = EslError> = std::result::Result<T, E>;
