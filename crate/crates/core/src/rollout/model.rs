//! Idealized quadruped model: joint layout, action scaling, PD mapping,
//! and the 2-link leg kinematics the scripted harness drives.

use super::RolloutError;
use crate::reward::JOINT_COUNT;
use serde::{Deserialize, Serialize};

/// Joint constants and controller gains for a 12-joint quadruped.
///
/// Joints are ordered leg-major (FL, FR, RL, RR), three per leg
/// (hip roll, thigh pitch, calf pitch).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotModel {
    /// Stand-still joint angles the policy acts around.
    pub default_pose: [f64; JOINT_COUNT],
    pub joint_min: [f64; JOINT_COUNT],
    pub joint_max: [f64; JOINT_COUNT],
    /// Hip positions in the base frame, (x, y) per leg.
    pub hip_xy: [(f64, f64); 4],
    /// Action-to-angle scale k in `q_des = q_def + k a`.
    pub action_scale: f64,
    pub kp: f64,
    pub kd: f64,
    /// Base height above ground when standing.
    pub nominal_base_height: f64,
    pub thigh_length: f64,
    pub calf_length: f64,
    /// Total mass, used to translate push forces into velocity pulses.
    pub mass: f64,
}

impl Default for RobotModel {
    fn default() -> Self {
        Self::go2_like()
    }
}

impl RobotModel {
    /// Constants in the ballpark of a small ~15 kg quadruped.
    pub fn go2_like() -> Self {
        let leg_default = [0.0, 0.8, -1.5];
        let leg_min = [
            (-60f64).to_radians(),
            (-90f64).to_radians(),
            (-156f64).to_radians(),
        ];
        let leg_max = [
            60f64.to_radians(),
            200f64.to_radians(),
            (-48f64).to_radians(),
        ];
        let mut default_pose = [0.0; JOINT_COUNT];
        let mut joint_min = [0.0; JOINT_COUNT];
        let mut joint_max = [0.0; JOINT_COUNT];
        for leg in 0..4 {
            for j in 0..3 {
                default_pose[leg * 3 + j] = leg_default[j];
                joint_min[leg * 3 + j] = leg_min[j];
                joint_max[leg * 3 + j] = leg_max[j];
            }
        }
        Self {
            default_pose,
            joint_min,
            joint_max,
            hip_xy: [(0.19, 0.13), (0.19, -0.13), (-0.19, 0.13), (-0.19, -0.13)],
            action_scale: 0.25,
            kp: 60.0,
            kd: 3.0,
            nominal_base_height: 0.30,
            thigh_length: 0.213,
            calf_length: 0.213,
            mass: 15.0,
        }
    }

    pub fn validate(&self) -> Result<(), RolloutError> {
        for j in 0..JOINT_COUNT {
            if !(self.joint_min[j] < self.default_pose[j]
                && self.default_pose[j] < self.joint_max[j])
            {
                return Err(RolloutError::InvalidModel(format!(
                    "joint {j}: default pose {} outside ({}, {})",
                    self.default_pose[j], self.joint_min[j], self.joint_max[j]
                )));
            }
        }
        if !(self.action_scale.is_finite() && self.action_scale > 0.0) {
            return Err(RolloutError::InvalidModel(format!(
                "action scale must be positive, got {}",
                self.action_scale
            )));
        }
        if !(self.kp >= 0.0 && self.kd >= 0.0 && self.mass > 0.0) {
            return Err(RolloutError::InvalidModel(
                "gains must be non-negative and mass positive".to_string(),
            ));
        }
        if !(self.thigh_length > 0.0 && self.calf_length > 0.0) {
            return Err(RolloutError::InvalidModel(
                "link lengths must be positive".to_string(),
            ));
        }
        Ok(())
    }

    /// `q_des = q_def + k a`.
    pub fn scale_action(&self, action: &[f64; JOINT_COUNT]) -> [f64; JOINT_COUNT] {
        std::array::from_fn(|j| self.default_pose[j] + self.action_scale * action[j])
    }

    /// Inverse of [`RobotModel::scale_action`].
    pub fn action_from_pose(&self, q: &[f64; JOINT_COUNT]) -> [f64; JOINT_COUNT] {
        std::array::from_fn(|j| (q[j] - self.default_pose[j]) / self.action_scale)
    }

    /// `tau = kp (q_des - q) - kd qdot`.
    pub fn pd_torque(
        &self,
        q_des: &[f64; JOINT_COUNT],
        q: &[f64; JOINT_COUNT],
        qdot: &[f64; JOINT_COUNT],
    ) -> [f64; JOINT_COUNT] {
        std::array::from_fn(|j| self.kp * (q_des[j] - q[j]) - self.kd * qdot[j])
    }

    /// Joint angles placing the foot `z_hip` metres below the hip (z_hip
    /// is negative downward), with the knee folded symmetrically: hip roll
    /// zero, thigh pitched `beta` forward of vertical, calf bent `-2 beta`.
    pub fn leg_ik(&self, z_hip: f64) -> [f64; 3] {
        let span = self.thigh_length + self.calf_length;
        let d = (-z_hip).clamp(0.05 * span, span * (1.0 - 1e-9));
        let beta = (d / span).acos();
        [0.0, beta, -2.0 * beta]
    }

    /// Foot height below the hip for angles from [`RobotModel::leg_ik`].
    pub fn leg_fk(&self, joints: &[f64; 3]) -> f64 {
        let thigh = joints[1];
        let knee = joints[1] + joints[2];
        -(self.thigh_length * thigh.cos() + self.calf_length * knee.cos())
    }
}
