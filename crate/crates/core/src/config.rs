//! The toolkit config file: one TOML document with a section per module,
//! every key defaulted, unknown keys rejected with line and column.

use crate::curriculum::GateConfig;
use crate::elevation::BoundaryMode;
use crate::elevation::HeightmapSpec;
use crate::phase::GaitSampleRanges;
use crate::reward::{RewardWeights, Suite};
use crate::rollout::{
    CommandSampler, CommandSpec, DomainRandomization, FootDriver, PerturbationSchedule, RobotModel,
    RolloutConfig,
};
use crate::spline::FootTrajectoryParams;
use crate::terrain::{ObstacleFieldParams, TerrainParams};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Which weight signs to run with: the printed table, or the variant with
/// the plausibility flips applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignProfile {
    TablePrinted,
    SignCorrected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSection {
    pub suite: Suite,
    pub sign_profile: SignProfile,
    /// Explicit weights override the profile when set.
    pub weights: Option<RewardWeights>,
}

impl Default for RewardSection {
    fn default() -> Self {
        Self {
            suite: Suite::Pgtt,
            sign_profile: SignProfile::TablePrinted,
            weights: None,
        }
    }
}

impl RewardSection {
    pub fn resolved_weights(&self) -> RewardWeights {
        match &self.weights {
            Some(w) => w.clone(),
            None => match self.sign_profile {
                SignProfile::TablePrinted => RewardWeights::table_printed(),
                SignProfile::SignCorrected => RewardWeights::sign_corrected(),
            },
        }
    }
}

/// Episode-loop knobs, minus the heightmap and command sampler which live
/// in their own sections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RolloutSection {
    pub episode_length: usize,
    pub control_dt: f64,
    pub physics_substep: f64,
    pub initial_time: f64,
    pub contact_tolerance: f64,
    pub stats_window: f64,
    pub driver: FootDriver,
    pub boundary: BoundaryMode,
    pub command: CommandSpec,
    pub resample_command: bool,
    pub perturbations: Option<PerturbationSchedule>,
}

impl Default for RolloutSection {
    fn default() -> Self {
        let base = RolloutConfig::default();
        Self {
            episode_length: base.episode_length,
            control_dt: base.control_dt,
            physics_substep: base.physics_substep,
            initial_time: base.initial_time,
            contact_tolerance: base.contact_tolerance,
            stats_window: base.stats_window,
            driver: base.driver,
            boundary: base.boundary,
            command: base.command,
            resample_command: base.resample_command,
            perturbations: base.perturbations,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedsSection {
    /// Terrain generation seed.
    pub terrain: u64,
    /// Base seed for episodes; episode k runs on `rollout + k`.
    pub rollout: u64,
}

/// Inert notes for downstream trainers; nothing here changes toolkit
/// behavior.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetadataSection {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
}

impl Default for MetadataSection {
    fn default() -> Self {
        Self {
            actor_hidden: vec![512, 256, 128],
            critic_hidden: vec![512, 256, 128],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ToolkitConfig {
    pub gait: GaitSampleRanges,
    pub trajectory: FootTrajectoryParams,
    pub rewards: RewardSection,
    pub heightmap: HeightmapSpec,
    pub terrain: TerrainParams,
    pub obstacles: ObstacleFieldParams,
    pub curriculum: GateConfig,
    pub randomization: DomainRandomization,
    pub commands: CommandSampler,
    pub robot: RobotModel,
    pub rollout: RolloutSection,
    pub seeds: SeedsSection,
    pub metadata: MetadataSection,
}

impl ToolkitConfig {
    /// The full episode-loop config with the shared sections folded in.
    pub fn rollout_config(&self) -> RolloutConfig {
        RolloutConfig {
            episode_length: self.rollout.episode_length,
            control_dt: self.rollout.control_dt,
            physics_substep: self.rollout.physics_substep,
            initial_time: self.rollout.initial_time,
            contact_tolerance: self.rollout.contact_tolerance,
            stats_window: self.rollout.stats_window,
            driver: self.rollout.driver,
            boundary: self.rollout.boundary,
            command: self.rollout.command,
            resample_command: self.rollout.resample_command,
            heightmap: self.heightmap,
            perturbations: self.rollout.perturbations,
            sampler: self.commands,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        if !(self.gait.frequency.0.is_finite()
            && self.gait.frequency.0 > 0.0
            && self.gait.frequency.1 >= self.gait.frequency.0)
        {
            return Err(ConfigError::Invalid(format!(
                "gait frequency range ({}, {}) is not a valid positive interval",
                self.gait.frequency.0, self.gait.frequency.1
            )));
        }
        self.trajectory.validate().map_err(|e| invalid(&e))?;
        if let Some(w) = &self.rewards.weights {
            w.validate().map_err(|e| invalid(&e))?;
        }
        self.heightmap.validate().map_err(|e| invalid(&e))?;
        self.terrain.validate().map_err(|e| invalid(&e))?;
        self.obstacles.validate().map_err(|e| invalid(&e))?;
        self.curriculum.validate().map_err(|e| invalid(&e))?;
        self.randomization.validate().map_err(|e| invalid(&e))?;
        self.robot.validate().map_err(|e| invalid(&e))?;
        self.rollout_config().validate().map_err(|e| invalid(&e))?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), ConfigError> {
        Ok(std::fs::write(path, self.to_toml()?)?)
    }
}
