//! Scripted rollout harness: a kinematic quadruped that follows its
//! commanded velocity over a height field while its feet track the swing
//! trajectory, producing deterministic reward-complete episode traces
//! without a physics engine.

mod harness;
mod model;
mod observation;
mod sampling;
mod trace;

pub use harness::{
    check_termination, run_batch, scripted_rollout, CommandSpec, FootDriver, GaitSource,
    RolloutConfig, RolloutSetup,
};
pub use model::RobotModel;
pub use observation::{
    apply_sensor_noise, assemble, assemble_privileged, Block, ObservationLayout, ObservationParts,
};
pub use sampling::{
    resample_event, sample_pushes, sample_randomization, CommandSampler, DomainRandomization,
    ObservationNoise, PerturbationSchedule, Push, RealizedRandomization,
};
pub use trace::{read_trace_dir, EpisodeHeader, RolloutTrace, TraceStep};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error("invalid robot model: {0}")]
    InvalidModel(String),
    #[error("invalid rollout config: {0}")]
    InvalidConfig(String),
    #[error("observation has {got} values, layout wants {want}")]
    ObservationShape { got: usize, want: usize },
    #[error("no observation block named {0:?}")]
    UnknownBlock(String),
    #[error("malformed trace: {0}")]
    TraceFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Phase(#[from] crate::phase::PhaseError),
    #[error(transparent)]
    Spline(#[from] crate::spline::SplineError),
    #[error(transparent)]
    Elevation(#[from] crate::elevation::ElevationError),
    #[error(transparent)]
    Reward(#[from] crate::reward::RewardError),
}
