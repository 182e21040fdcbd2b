//! The scripted episode loop.
//!
//! The base glides at its commanded planar velocity, held at the nominal
//! standing height above the terrain directly under it. Each foot hangs
//! below its hip and tracks the reference trajectory, so stance feet touch
//! the local ground exactly and contact reduces to a comparison against
//! the stance height, independent of the terrain underneath. Joint state
//! follows from leg kinematics, torques from the damping term of the PD
//! law, and every step is scored with the full reward stack and recorded.

use super::model::RobotModel;
use super::sampling::{resample_event, sample_pushes, CommandSampler, PerturbationSchedule, Push};
use super::trace::{EpisodeHeader, RolloutTrace, TraceStep};
use super::RolloutError;
use crate::elevation::{
    leg_local_stats, sample_robot_heightmap, BoundaryMode, HeightmapSpec, Pose2,
};
use crate::parallel::{map_collect, Parallelism};
use crate::phase::{sample_gait, GaitConfig, GaitSampleRanges, PhaseState, LEG_COUNT};
use crate::reward::{total_reward, RewardInput, RewardWeights, Suite, JOINT_COUNT};
use crate::spline::{desired_foot_height, FootTrajectoryParams};
use crate::terrain::HeightField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// How the scripted feet track the reference trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FootDriver {
    /// Feet hit the reference height exactly.
    #[default]
    Exact,
    /// A constant per-foot offset on top of the reference.
    PerFootBias { bias: [f64; 4] },
    /// Per-foot Gaussian jitter, redrawn every step.
    Noisy { std: f64 },
}

impl FootDriver {
    fn validate(&self) -> Result<(), RolloutError> {
        match self {
            Self::Exact => Ok(()),
            Self::PerFootBias { bias } => {
                if bias.iter().all(|b| b.is_finite()) {
                    Ok(())
                } else {
                    Err(RolloutError::InvalidConfig(
                        "foot driver bias must be finite".into(),
                    ))
                }
            }
            Self::Noisy { std } => {
                if std.is_finite() && *std >= 0.0 {
                    Ok(())
                } else {
                    Err(RolloutError::InvalidConfig(format!(
                        "foot driver noise std must be non-negative, got {std}"
                    )))
                }
            }
        }
    }
}

/// Where the episode's velocity command comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommandSpec {
    Fixed {
        command: (f64, f64, f64),
    },
    /// Drawn from the sampler; `eval` switches to the scaled-down
    /// evaluation range.
    Sampled {
        eval: bool,
    },
}

impl Default for CommandSpec {
    fn default() -> Self {
        Self::Sampled { eval: false }
    }
}

/// Where the episode's gait comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaitSource {
    Fixed { gait: GaitConfig },
    Sampled { ranges: GaitSampleRanges },
}

impl Default for GaitSource {
    fn default() -> Self {
        Self::Sampled {
            ranges: GaitSampleRanges::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RolloutConfig {
    pub episode_length: usize,
    /// Control period in seconds.
    pub control_dt: f64,
    /// Inner simulation period; recorded in traces for downstream tools
    /// but not stepped here, the scripted robot is purely kinematic.
    pub physics_substep: f64,
    /// Clock value at the first step, offsetting every phase.
    pub initial_time: f64,
    /// A foot within this distance of the stance height counts as touching.
    pub contact_tolerance: f64,
    /// Side length of the per-leg terrain stats window in metres.
    pub stats_window: f64,
    pub driver: FootDriver,
    pub boundary: BoundaryMode,
    pub command: CommandSpec,
    /// Redraw the command once at a uniformly random step.
    pub resample_command: bool,
    pub heightmap: HeightmapSpec,
    pub perturbations: Option<PerturbationSchedule>,
    pub sampler: CommandSampler,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            episode_length: 500,
            control_dt: 0.02,
            physics_substep: 0.005,
            initial_time: 0.0,
            contact_tolerance: 1e-6,
            stats_window: 0.2,
            driver: FootDriver::default(),
            boundary: BoundaryMode::Clamp,
            command: CommandSpec::default(),
            resample_command: false,
            heightmap: HeightmapSpec::default(),
            perturbations: None,
            sampler: CommandSampler::default(),
        }
    }
}

impl RolloutConfig {
    pub fn validate(&self) -> Result<(), RolloutError> {
        if self.episode_length == 0 {
            return Err(RolloutError::InvalidConfig(
                "episode length must be at least one step".into(),
            ));
        }
        if !(self.control_dt.is_finite() && self.control_dt > 0.0) {
            return Err(RolloutError::InvalidConfig(format!(
                "control_dt must be positive, got {}",
                self.control_dt
            )));
        }
        if !(self.physics_substep.is_finite()
            && self.physics_substep > 0.0
            && self.physics_substep <= self.control_dt)
        {
            return Err(RolloutError::InvalidConfig(format!(
                "physics_substep must be in (0, control_dt], got {}",
                self.physics_substep
            )));
        }
        if !(self.initial_time.is_finite() && self.initial_time >= 0.0) {
            return Err(RolloutError::InvalidConfig(format!(
                "initial_time must be non-negative, got {}",
                self.initial_time
            )));
        }
        if !(self.contact_tolerance.is_finite() && self.contact_tolerance >= 0.0) {
            return Err(RolloutError::InvalidConfig(format!(
                "contact_tolerance must be non-negative, got {}",
                self.contact_tolerance
            )));
        }
        if !(self.stats_window.is_finite() && self.stats_window > 0.0) {
            return Err(RolloutError::InvalidConfig(format!(
                "stats_window must be positive, got {}",
                self.stats_window
            )));
        }
        self.driver.validate()?;
        self.heightmap
            .validate()
            .map_err(|e| RolloutError::InvalidConfig(e.to_string()))?;
        self.sampler.validate()?;
        if let Some(schedule) = &self.perturbations {
            schedule.validate()?;
        }
        Ok(())
    }
}

/// Everything an episode runs against. Borrowed so batches can share one
/// terrain and model across threads.
#[derive(Clone, Copy, Debug)]
pub struct RolloutSetup<'a> {
    pub terrain: &'a HeightField,
    pub model: &'a RobotModel,
    pub trajectory: &'a FootTrajectoryParams,
    pub weights: &'a RewardWeights,
    pub suite: Suite,
    pub gait: &'a GaitSource,
    pub config: &'a RolloutConfig,
    pub terrain_tag: Option<&'a str>,
}

/// The base has flipped when its body-frame gravity points upward.
pub fn check_termination(gravity: [f64; 3]) -> bool {
    gravity[2] > 0.0
}

fn rotate(v: (f64, f64), yaw: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    (c * v.0 - s * v.1, s * v.0 + c * v.1)
}

fn active_push(pushes: &[Push], step: usize) -> Option<&Push> {
    pushes
        .iter()
        .find(|p| step >= p.start_step && step < p.start_step + p.duration_steps)
}

/// Run one scripted episode.
///
/// All randomness comes from a stream seeded with `seed`, drawn in a fixed
/// order: gait, command, resample step, pushes, then per-step driver
/// noise, each only when the corresponding feature is enabled. The episode
/// ends early with `truncated` set when the base leaves the terrain.
pub fn scripted_rollout(setup: &RolloutSetup<'_>, seed: u64) -> Result<RolloutTrace, RolloutError> {
    let config = setup.config;
    config.validate()?;
    setup.model.validate()?;
    setup.trajectory.validate()?;
    setup
        .weights
        .validate()
        .map_err(|e| RolloutError::InvalidConfig(e.to_string()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gait = match setup.gait {
        GaitSource::Fixed { gait } => gait.clone(),
        GaitSource::Sampled { ranges } => sample_gait(&mut rng, ranges)?,
    };
    let draw_command = |rng: &mut ChaCha8Rng, eval: bool| {
        if eval {
            config.sampler.sample_eval(rng)
        } else {
            config.sampler.sample(rng)
        }
    };
    let mut command = match config.command {
        CommandSpec::Fixed { command } => command,
        CommandSpec::Sampled { eval } => draw_command(&mut rng, eval),
    };
    let resample_at = match (config.resample_command, config.command) {
        (true, CommandSpec::Sampled { .. }) => {
            Some(resample_event(&mut rng, config.episode_length))
        }
        _ => None,
    };
    let pushes = match &config.perturbations {
        Some(schedule) => {
            sample_pushes(schedule, config.episode_length, config.control_dt, &mut rng)
        }
        None => Vec::new(),
    };
    let jitter = match config.driver {
        FootDriver::Noisy { std } if std > 0.0 => {
            Some(Normal::new(0.0, std).map_err(|e| RolloutError::InvalidConfig(e.to_string()))?)
        }
        _ => None,
    };

    let model = setup.model;
    let dt = config.control_dt;
    let stance = setup.trajectory.stance_height;
    let ((x_lo, y_lo), (x_hi, y_hi)) = setup.terrain.bounds();
    let mut base_x = (x_lo + x_hi) / 2.0;
    let mut base_y = (y_lo + y_hi) / 2.0;
    let mut yaw = 0.0_f64;

    let mut prev_q = [0.0; JOINT_COUNT];
    let mut prev_a = [0.0; JOINT_COUNT];
    let mut prev_contact = [false; LEG_COUNT];
    let mut prev_foot_xy = [(0.0, 0.0); LEG_COUNT];
    let mut prev_base_z = 0.0;
    let mut air_acc = [0.0; LEG_COUNT];

    let mut steps = Vec::with_capacity(config.episode_length);
    let mut truncated = false;

    for k in 0..config.episode_length {
        if resample_at == Some(k) {
            if let CommandSpec::Sampled { eval } = config.command {
                command = draw_command(&mut rng, eval);
            }
        }
        let t = config.initial_time + k as f64 * dt;
        let state = PhaseState::at(&gait, t);

        let terrain_base = setup.terrain.clamped_height_at_world(base_x, base_y);
        let base_z = terrain_base - stance;

        let mut foot_xy = [(0.0, 0.0); LEG_COUNT];
        let mut foot_hip = [0.0; LEG_COUNT];
        let mut foot_world = [0.0; LEG_COUNT];
        let mut foot_terrain = [0.0; LEG_COUNT];
        let mut contacts = [false; LEG_COUNT];
        let mut leg_h_max = [0.0; LEG_COUNT];
        let mut leg_delta_h = [0.0; LEG_COUNT];
        let mut q = [0.0; JOINT_COUNT];

        for leg in 0..LEG_COUNT {
            let hip = rotate(model.hip_xy[leg], yaw);
            let (fx, fy) = (base_x + hip.0, base_y + hip.1);
            foot_xy[leg] = (fx, fy);
            // Feet near the border still get stats from the nearest
            // in-field window.
            let stats = leg_local_stats(
                setup.terrain,
                (fx.clamp(x_lo, x_hi), fy.clamp(y_lo, y_hi)),
                config.stats_window,
            )?;
            leg_h_max[leg] = stats.h_max;
            leg_delta_h[leg] = stats.delta_h;

            let mut h = desired_foot_height(state.phases[leg], setup.trajectory, stats.delta_h)?;
            match config.driver {
                FootDriver::Exact => {}
                FootDriver::PerFootBias { bias } => h += bias[leg],
                FootDriver::Noisy { .. } => {
                    if let Some(normal) = &jitter {
                        h += normal.sample(&mut rng);
                    }
                }
            }

            let ground = setup.terrain.clamped_height_at_world(fx, fy);
            foot_terrain[leg] = ground;
            foot_world[leg] = ground + (h - stance);
            foot_hip[leg] = foot_world[leg] - base_z;
            contacts[leg] = h <= stance + config.contact_tolerance;

            let leg_q = model.leg_ik(foot_hip[leg]);
            q[3 * leg..3 * leg + 3].copy_from_slice(&leg_q);
        }

        let mut joint_vel = [0.0; JOINT_COUNT];
        if k > 0 {
            for j in 0..JOINT_COUNT {
                joint_vel[j] = (q[j] - prev_q[j]) / dt;
            }
        }
        let torque = model.pd_torque(&q, &q, &joint_vel);
        let action = model.action_from_pose(&q);
        let prev_action = if k == 0 { action } else { prev_a };

        let push_vel = active_push(&pushes, k).map(|p| {
            let window = p.duration_steps as f64 * dt;
            (
                p.force.0 * window / model.mass,
                p.force.1 * window / model.mass,
            )
        });
        let world_cmd = rotate((command.0, command.1), yaw);
        let (world_vx, world_vy) = match push_vel {
            Some((px, py)) => (world_cmd.0 + px, world_cmd.1 + py),
            None => world_cmd,
        };
        let lin_vel_xy = match push_vel {
            Some(push) => {
                let local = rotate(push, -yaw);
                (command.0 + local.0, command.1 + local.1)
            }
            None => (command.0, command.1),
        };
        let lin_vel_z = if k == 0 {
            0.0
        } else {
            (base_z - prev_base_z) / dt
        };

        let mut foot_vel_xy = [(0.0, 0.0); LEG_COUNT];
        if k > 0 {
            for leg in 0..LEG_COUNT {
                foot_vel_xy[leg] = (
                    (foot_xy[leg].0 - prev_foot_xy[leg].0) / dt,
                    (foot_xy[leg].1 - prev_foot_xy[leg].1) / dt,
                );
            }
        }

        let mut air_time = [0.5; LEG_COUNT];
        for leg in 0..LEG_COUNT {
            if k > 0 && contacts[leg] && !prev_contact[leg] {
                air_time[leg] = air_acc[leg];
                air_acc[leg] = 0.0;
            }
            if !contacts[leg] {
                air_acc[leg] += dt;
            }
        }

        let gravity = [0.0, 0.0, -1.0];
        let terminated = check_termination(gravity);
        let input = RewardInput {
            lin_vel_xy,
            lin_vel_z,
            ang_vel_xy: (0.0, 0.0),
            ang_vel_z: command.2,
            gravity,
            joint_pos: q,
            joint_vel,
            joint_torque: torque,
            action,
            prev_action,
            contacts,
            foot_height_hip: foot_hip,
            foot_height_world: foot_world,
            foot_vel_xy,
            foot_terrain_height: foot_terrain,
            phases: state.phases,
            leg_h_max,
            leg_delta_h,
            air_time,
            command,
            alive: !terminated,
            default_pose: model.default_pose,
            joint_min: model.joint_min,
            joint_max: model.joint_max,
        };
        let breakdown = total_reward(setup.suite, &input, setup.trajectory, setup.weights)?;

        let pose = Pose2::new(base_x, base_y, yaw);
        let heightmap =
            sample_robot_heightmap(setup.terrain, pose, &config.heightmap, config.boundary)?;

        steps.push(TraceStep {
            time: t,
            base: [base_x, base_y, base_z, yaw],
            heightmap: heightmap.samples,
            input,
            breakdown,
            terminated,
        });
        if terminated {
            break;
        }

        prev_q = q;
        prev_a = action;
        prev_contact = contacts;
        prev_foot_xy = foot_xy;
        prev_base_z = base_z;

        base_x += world_vx * dt;
        base_y += world_vy * dt;
        yaw += command.2 * dt;
        if !setup.terrain.contains(base_x, base_y) {
            truncated = true;
            break;
        }
    }

    Ok(RolloutTrace {
        header: EpisodeHeader {
            seed,
            gait,
            suite: setup.suite,
            episode_length: config.episode_length,
            control_dt: config.control_dt,
            physics_substep: config.physics_substep,
            initial_time: config.initial_time,
            terrain_tag: setup.terrain_tag.map(str::to_owned),
        },
        steps,
        truncated,
    })
}

/// One episode per seed, all against the same setup.
pub fn run_batch(
    setup: &RolloutSetup<'_>,
    seeds: &[u64],
    mode: Parallelism,
) -> Result<Vec<RolloutTrace>, RolloutError> {
    map_collect(mode, seeds, |&seed| scripted_rollout(setup, seed))
        .into_iter()
        .collect()
}
