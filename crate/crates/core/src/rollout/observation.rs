//! Observation assembly: fixed block layout, slicing, and sensor noise.

use super::sampling::{add_noise, ObservationNoise};
use super::RolloutError;
use crate::reward::JOINT_COUNT;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// One named block inside the flat observation vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: &'static str,
    pub offset: usize,
    pub len: usize,
}

/// Block layout of the policy observation for a given heightmap size.
///
/// Order: angular velocity (3), gravity (3), joint positions (12), joint
/// velocities (12), phase cosines (4), phase sines (4), heightmap (N*M),
/// gait frequency (1), previous action (12), command (3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationLayout {
    pub heightmap_len: usize,
}

impl ObservationLayout {
    pub fn new(heightmap_len: usize) -> Self {
        Self { heightmap_len }
    }

    pub fn manifest(&self) -> Vec<Block> {
        let lens: [(&'static str, usize); 10] = [
            ("ang_vel", 3),
            ("gravity", 3),
            ("joint_pos", JOINT_COUNT),
            ("joint_vel", JOINT_COUNT),
            ("phase_cos", 4),
            ("phase_sin", 4),
            ("heightmap", self.heightmap_len),
            ("frequency", 1),
            ("prev_action", JOINT_COUNT),
            ("command", 3),
        ];
        let mut offset = 0;
        lens.iter()
            .map(|&(name, len)| {
                let block = Block { name, offset, len };
                offset += len;
                block
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        54 + self.heightmap_len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn block(&self, name: &str) -> Option<Block> {
        self.manifest().into_iter().find(|b| b.name == name)
    }

    /// View one named block of an assembled observation.
    pub fn slice<'a>(&self, obs: &'a [f64], name: &str) -> Result<&'a [f64], RolloutError> {
        if obs.len() != self.len() {
            return Err(RolloutError::ObservationShape {
                got: obs.len(),
                want: self.len(),
            });
        }
        let block = self
            .block(name)
            .ok_or_else(|| RolloutError::UnknownBlock(name.to_string()))?;
        Ok(&obs[block.offset..block.offset + block.len])
    }
}

/// The per-step quantities the observation is assembled from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationParts {
    pub ang_vel: [f64; 3],
    pub gravity: [f64; 3],
    pub joint_pos: [f64; JOINT_COUNT],
    pub joint_vel: [f64; JOINT_COUNT],
    pub phase_cos: [f64; 4],
    pub phase_sin: [f64; 4],
    /// Base-relative heights, row-major.
    pub heightmap: Vec<f64>,
    pub frequency: f64,
    pub prev_action: [f64; JOINT_COUNT],
    pub command: [f64; 3],
}

/// Concatenate the blocks in layout order.
pub fn assemble(
    parts: &ObservationParts,
    layout: &ObservationLayout,
) -> Result<Vec<f64>, RolloutError> {
    if parts.heightmap.len() != layout.heightmap_len {
        return Err(RolloutError::ObservationShape {
            got: parts.heightmap.len(),
            want: layout.heightmap_len,
        });
    }
    let mut obs = Vec::with_capacity(layout.len());
    obs.extend_from_slice(&parts.ang_vel);
    obs.extend_from_slice(&parts.gravity);
    obs.extend_from_slice(&parts.joint_pos);
    obs.extend_from_slice(&parts.joint_vel);
    obs.extend_from_slice(&parts.phase_cos);
    obs.extend_from_slice(&parts.phase_sin);
    obs.extend_from_slice(&parts.heightmap);
    obs.push(parts.frequency);
    obs.extend_from_slice(&parts.prev_action);
    obs.extend_from_slice(&parts.command);
    Ok(obs)
}

/// The critic's privileged state: the observation with the base linear
/// velocity appended.
pub fn assemble_privileged(
    parts: &ObservationParts,
    lin_vel: [f64; 3],
    layout: &ObservationLayout,
) -> Result<Vec<f64>, RolloutError> {
    let mut state = assemble(parts, layout)?;
    state.extend_from_slice(&lin_vel);
    Ok(state)
}

/// Additive per-block Gaussian noise. The command and frequency blocks
/// are policy inputs rather than sensor readings and pass through
/// unchanged.
pub fn apply_sensor_noise<R: Rng + ?Sized>(
    obs: &mut [f64],
    layout: &ObservationLayout,
    noise: &ObservationNoise,
    rng: &mut R,
) -> Result<(), RolloutError> {
    if obs.len() != layout.len() {
        return Err(RolloutError::ObservationShape {
            got: obs.len(),
            want: layout.len(),
        });
    }
    noise.validate()?;
    for block in layout.manifest() {
        let std = match block.name {
            "ang_vel" => noise.ang_vel,
            "gravity" => noise.gravity,
            "joint_pos" => noise.joint_pos,
            "joint_vel" => noise.joint_vel,
            "phase_cos" | "phase_sin" => noise.phase,
            "heightmap" => noise.heightmap,
            "prev_action" => noise.prev_action,
            "frequency" | "command" => 0.0,
            _ => 0.0,
        };
        add_noise(&mut obs[block.offset..block.offset + block.len], std, rng);
    }
    Ok(())
}
