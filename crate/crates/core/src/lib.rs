//! Building blocks for phase-guided legged locomotion experiments.
//!
//! The crate covers everything around the learned policy that a locomotion
//! training setup needs and that must be exactly reproducible:
//!
//! * [`phase`]: per-leg gait phase clocks and their trigonometric encoding.
//! * [`spline`]: terrain-adaptive desired foot-height trajectories built
//!   from cubic Hermite segments.
//! * [`reward`]: three locomotion reward suites with per-term breakdowns.
//! * [`terrain`]: stair-like tile terrain via constraint collapse, plus
//!   rasterization and obstacle fields.
//! * [`elevation`]: robot-centric heightmap sampling, per-leg terrain
//!   statistics, and median hole filling for noisy elevation grids.
//! * [`rollout`]: a deterministic scripted rollout harness producing
//!   replayable traces.
//! * [`curriculum`]: evaluation metrics, gating, and difficulty levels.
//! * [`config`] and [`io`]: the toolkit config file and on-disk formats.
//!
//! Everything that draws random numbers is seeded explicitly, so any
//! artifact (terrain, trace, report) can be regenerated bit for bit from
//! its seed and config. Batch entry points run data-parallel through rayon
//! by default; the `parallel` feature can be disabled for a fully
//! sequential build, and [`Parallelism`] selects the mode at runtime.

pub mod config;
pub mod curriculum;
pub mod elevation;
pub mod io;
pub mod parallel;
pub mod phase;
pub mod reward;
pub mod rollout;
pub mod spline;
pub mod terrain;

pub use parallel::Parallelism;
