//! Per-step reward computation for the three locomotion suites.
//!
//! Every term is a pure function of one [`RewardInput`]. [`total_reward`]
//! assembles the suite's terms into a [`RewardBreakdown`] carrying raw and
//! weighted values per term, so traces and reports can show exactly where
//! return comes from.

use crate::spline::{desired_foot_height, FootTrajectoryParams, SplineError};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub const JOINT_COUNT: usize = 12;

#[derive(Debug, Error)]
pub enum RewardError {
    #[error("foot phase term: {0}")]
    Trajectory(#[from] SplineError),
    #[error("invalid reward weights: {0}")]
    InvalidWeights(String),
}

/// Which reward suite scores an episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Pgtt,
    MassLoco,
    Wild,
}

/// Everything a single control step exposes to the reward functions.
///
/// Velocities and gravity are in the base frame; foot heights come in both
/// hip frame (`foot_height_hip`, what the phase target tracks) and world
/// frame (`foot_height_world`, what clearance terms compare to terrain).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardInput {
    pub lin_vel_xy: (f64, f64),
    pub lin_vel_z: f64,
    pub ang_vel_xy: (f64, f64),
    pub ang_vel_z: f64,
    /// Gravity direction rotated into the base frame, unit length upright.
    pub gravity: [f64; 3],
    pub joint_pos: [f64; JOINT_COUNT],
    pub joint_vel: [f64; JOINT_COUNT],
    pub joint_torque: [f64; JOINT_COUNT],
    pub action: [f64; JOINT_COUNT],
    pub prev_action: [f64; JOINT_COUNT],
    pub contacts: [bool; 4],
    pub foot_height_hip: [f64; 4],
    pub foot_height_world: [f64; 4],
    pub foot_vel_xy: [(f64, f64); 4],
    /// Terrain height under each foot, world frame.
    pub foot_terrain_height: [f64; 4],
    pub phases: [f64; 4],
    pub leg_h_max: [f64; 4],
    pub leg_delta_h: [f64; 4],
    /// Time each foot has spent in the air, scored at touchdown; feet not
    /// touching down this step carry the neutral value 0.5.
    pub air_time: [f64; 4],
    /// Commanded (v_x, v_y, yaw rate).
    pub command: (f64, f64, f64),
    /// False on the step that triggers termination.
    pub alive: bool,
    pub default_pose: [f64; JOINT_COUNT],
    pub joint_min: [f64; JOINT_COUNT],
    pub joint_max: [f64; JOINT_COUNT],
}

impl Default for RewardInput {
    fn default() -> Self {
        Self {
            lin_vel_xy: (0.0, 0.0),
            lin_vel_z: 0.0,
            ang_vel_xy: (0.0, 0.0),
            ang_vel_z: 0.0,
            gravity: [0.0, 0.0, -1.0],
            joint_pos: [0.0; JOINT_COUNT],
            joint_vel: [0.0; JOINT_COUNT],
            joint_torque: [0.0; JOINT_COUNT],
            action: [0.0; JOINT_COUNT],
            prev_action: [0.0; JOINT_COUNT],
            contacts: [false; 4],
            foot_height_hip: [0.0; 4],
            foot_height_world: [0.0; 4],
            foot_vel_xy: [(0.0, 0.0); 4],
            foot_terrain_height: [0.0; 4],
            phases: [0.0; 4],
            leg_h_max: [0.0; 4],
            leg_delta_h: [0.0; 4],
            air_time: [0.5; 4],
            command: (0.0, 0.0, 0.0),
            alive: true,
            default_pose: [0.0; JOINT_COUNT],
            joint_min: [-1.0; JOINT_COUNT],
            joint_max: [1.0; JOINT_COUNT],
        }
    }
}

/// Term weights and widths for all suites.
///
/// [`RewardWeights::table_printed`] carries the weights exactly as the
/// reference table prints them, including three positive values on terms
/// whose descriptions call them penalties (joint torques, foot slip, stand
/// still). [`RewardWeights::sign_corrected`] flips those three negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub track_lin_vel: f64,
    pub track_ang_vel: f64,
    pub lin_vel_z: f64,
    pub ang_vel_xy: f64,
    pub orientation: f64,
    pub termination: f64,
    pub joint_power: f64,
    pub action_rate: f64,
    pub joint_limits: f64,
    pub default_pose: f64,
    pub joint_torques: f64,
    pub foot_phase: f64,
    pub foot_contact: f64,
    pub massloco_clearance: f64,
    pub massloco_slip: f64,
    pub massloco_air_time: f64,
    pub massloco_stand_still: f64,
    pub wild_clearance: f64,
    pub wild_slip: f64,
    /// Width of the velocity tracking Gaussians.
    pub sigma_v: f64,
    /// Width of the foot phase tracking Gaussian.
    pub sigma_f: f64,
    /// Per-joint weights for the default-pose term, hip/thigh/calf per leg.
    pub default_pose_joint_weights: [f64; JOINT_COUNT],
    /// Desired swing height above terrain for the MassLoco clearance term.
    pub massloco_swing_height: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self::table_printed()
    }
}

impl RewardWeights {
    /// Weights exactly as printed in the reference table.
    pub fn table_printed() -> Self {
        let mut joint_weights = [1.0; JOINT_COUNT];
        for leg in 0..4 {
            joint_weights[leg * 3 + 2] = 0.5;
        }
        Self {
            track_lin_vel: 1.0,
            track_ang_vel: 0.5,
            lin_vel_z: -2.0,
            ang_vel_xy: -0.05,
            orientation: -0.2,
            termination: -1.0,
            joint_power: -2e-5,
            action_rate: -0.01,
            joint_limits: -1.0,
            default_pose: -0.5,
            joint_torques: 0.001,
            foot_phase: 0.5,
            foot_contact: -2.0,
            massloco_clearance: -0.5,
            massloco_slip: 0.1,
            massloco_air_time: 1.0,
            massloco_stand_still: 0.5,
            wild_clearance: 0.1,
            wild_slip: 0.1,
            sigma_v: 0.25,
            sigma_f: 0.05,
            default_pose_joint_weights: joint_weights,
            massloco_swing_height: 0.08,
        }
    }

    /// Printed weights with the three positive penalty rows flipped
    /// negative (joint torques, both slips, stand still).
    pub fn sign_corrected() -> Self {
        Self {
            joint_torques: -0.001,
            massloco_slip: -0.1,
            massloco_stand_still: -0.5,
            wild_slip: -0.1,
            ..Self::table_printed()
        }
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        if !(self.sigma_v > 0.0 && self.sigma_v.is_finite()) {
            return Err(RewardError::InvalidWeights(format!(
                "sigma_v must be positive, got {}",
                self.sigma_v
            )));
        }
        if !(self.sigma_f > 0.0 && self.sigma_f.is_finite()) {
            return Err(RewardError::InvalidWeights(format!(
                "sigma_f must be positive, got {}",
                self.sigma_f
            )));
        }
        Ok(())
    }
}

/// One scored term: the raw value of its formula and the weighted value
/// that actually enters the total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardTerm {
    pub name: String,
    pub raw: f64,
    pub weighted: f64,
}

impl RewardTerm {
    fn new(name: &str, raw: f64, weight: f64) -> Self {
        Self {
            name: name.to_string(),
            raw,
            weighted: weight * raw,
        }
    }
}

/// All terms of one step plus their weighted sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub terms: Vec<RewardTerm>,
    pub total: f64,
}

impl RewardBreakdown {
    fn from_terms(terms: Vec<RewardTerm>) -> Self {
        let total = terms.iter().map(|t| t.weighted).sum();
        Self { terms, total }
    }

    pub fn term(&self, name: &str) -> Option<&RewardTerm> {
        self.terms.iter().find(|t| t.name == name)
    }

    /// Raw value of a term; 0.0 when the suite does not score it.
    pub fn raw(&self, name: &str) -> f64 {
        self.term(name).map_or(0.0, |t| t.raw)
    }
}

fn norm2(x: f64, y: f64) -> f64 {
    (x * x + y * y).sqrt()
}

fn in_swing(phase: f64) -> bool {
    (PI..2.0 * PI).contains(&phase)
}

/// Terms shared by every suite.
pub fn common_rewards(input: &RewardInput, w: &RewardWeights) -> Vec<RewardTerm> {
    let (vx, vy) = input.lin_vel_xy;
    let (cx, cy, cyaw) = input.command;
    let lin_err2 = (cx - vx).powi(2) + (cy - vy).powi(2);
    let ang_err2 = (cyaw - input.ang_vel_z).powi(2);

    let joint_power: f64 = input
        .joint_torque
        .iter()
        .zip(&input.joint_vel)
        .map(|(&t, &v)| t.abs() * v.abs())
        .sum();
    let action_rate: f64 = input
        .action
        .iter()
        .zip(&input.prev_action)
        .map(|(&a, &p)| (a - p).powi(2))
        .sum();
    let limit_count = input
        .joint_pos
        .iter()
        .zip(input.joint_min.iter().zip(&input.joint_max))
        .filter(|(&q, (&lo, &hi))| q < lo || q > hi)
        .count() as f64;
    let default_pose: f64 = input
        .joint_pos
        .iter()
        .zip(&input.default_pose)
        .zip(&w.default_pose_joint_weights)
        .map(|((&q, &d), &jw)| (q - d) * jw)
        .sum();
    let torque2: f64 = input.joint_torque.iter().map(|&t| t * t).sum();

    vec![
        RewardTerm::new(
            "track_lin_vel",
            (-lin_err2 / w.sigma_v).exp(),
            w.track_lin_vel,
        ),
        RewardTerm::new(
            "track_ang_vel",
            (-ang_err2 / w.sigma_v).exp(),
            w.track_ang_vel,
        ),
        RewardTerm::new("lin_vel_z", input.lin_vel_z.powi(2), w.lin_vel_z),
        RewardTerm::new(
            "ang_vel_xy",
            input.ang_vel_xy.0.powi(2) + input.ang_vel_xy.1.powi(2),
            w.ang_vel_xy,
        ),
        RewardTerm::new(
            "orientation",
            input.gravity[0].powi(2) + input.gravity[1].powi(2),
            w.orientation,
        ),
        RewardTerm::new(
            "termination",
            if input.alive { 0.0 } else { 1.0 },
            w.termination,
        ),
        RewardTerm::new("joint_power", joint_power, w.joint_power),
        RewardTerm::new("action_rate", action_rate, w.action_rate),
        RewardTerm::new("joint_limits", limit_count, w.joint_limits),
        RewardTerm::new("default_pose", default_pose, w.default_pose),
        RewardTerm::new("joint_torques", torque2, w.joint_torques),
    ]
}

/// Gaussian tracking of the phase-indexed desired foot height, summed over
/// legs. The desired height spreads with each leg's local terrain range.
pub fn foot_phase_reward(
    input: &RewardInput,
    params: &FootTrajectoryParams,
    w: &RewardWeights,
) -> Result<RewardTerm, SplineError> {
    let mut raw = 0.0;
    for i in 0..4 {
        let desired = desired_foot_height(input.phases[i], params, input.leg_delta_h[i])?;
        let err = desired - input.foot_height_hip[i];
        raw += (-(err * err) / w.sigma_f).exp();
    }
    Ok(RewardTerm::new("foot_phase", raw, w.foot_phase))
}

/// Counts feet touching the ground while their phase says swing.
pub fn foot_contact_penalty(input: &RewardInput, w: &RewardWeights) -> RewardTerm {
    let raw = (0..4)
        .filter(|&i| in_swing(input.phases[i]) && input.contacts[i])
        .count() as f64;
    RewardTerm::new("foot_contact", raw, w.foot_contact)
}

/// The MassLoco section: swing clearance, foot slip, air time, stand still.
pub fn massloco_rewards(input: &RewardInput, w: &RewardWeights) -> Vec<RewardTerm> {
    let clearance: f64 = (0..4)
        .map(|i| {
            let desired = input.foot_terrain_height[i] + w.massloco_swing_height;
            let err = desired - input.foot_height_world[i];
            let speed = norm2(input.foot_vel_xy[i].0, input.foot_vel_xy[i].1);
            err * err * speed
        })
        .sum();
    let slip: f64 = (0..4)
        .filter(|&i| input.contacts[i])
        .map(|i| norm2(input.foot_vel_xy[i].0, input.foot_vel_xy[i].1))
        .sum();
    let (cx, cy, cyaw) = input.command;
    let cmd_norm = (cx * cx + cy * cy + cyaw * cyaw).sqrt();
    let air_time = if cmd_norm > 0.01 {
        input.air_time.iter().map(|&t| t - 0.5).sum()
    } else {
        0.0
    };
    let stand_still = if cmd_norm < 0.01 {
        input
            .joint_pos
            .iter()
            .zip(&input.default_pose)
            .map(|(&q, &d)| (q - d).abs())
            .sum()
    } else {
        0.0
    };
    vec![
        RewardTerm::new("clearance", clearance, w.massloco_clearance),
        RewardTerm::new("slip", slip, w.massloco_slip),
        RewardTerm::new("air_time", air_time, w.massloco_air_time),
        RewardTerm::new("stand_still", stand_still, w.massloco_stand_still),
    ]
}

/// The Wild section: binary swing clearance over local terrain, foot slip.
pub fn wild_rewards(input: &RewardInput, w: &RewardWeights) -> Vec<RewardTerm> {
    let clearance = (0..4)
        .filter(|&i| in_swing(input.phases[i]) && input.foot_height_world[i] >= input.leg_h_max[i])
        .count() as f64;
    let slip: f64 = (0..4)
        .filter(|&i| input.contacts[i])
        .map(|i| norm2(input.foot_vel_xy[i].0, input.foot_vel_xy[i].1))
        .sum();
    vec![
        RewardTerm::new("clearance", clearance, w.wild_clearance),
        RewardTerm::new("slip", slip, w.wild_slip),
    ]
}

/// Score one step under a suite: its section terms appended to the common
/// block, with the total as the sum of weighted values.
pub fn total_reward(
    suite: Suite,
    input: &RewardInput,
    params: &FootTrajectoryParams,
    w: &RewardWeights,
) -> Result<RewardBreakdown, RewardError> {
    let mut terms = common_rewards(input, w);
    match suite {
        Suite::Pgtt => {
            terms.push(foot_phase_reward(input, params, w)?);
            terms.push(foot_contact_penalty(input, w));
        }
        Suite::MassLoco => terms.extend(massloco_rewards(input, w)),
        Suite::Wild => terms.extend(wild_rewards(input, w)),
    }
    Ok(RewardBreakdown::from_terms(terms))
}
