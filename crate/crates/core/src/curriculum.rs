//! Terrain curriculum: level definitions, the tracking metrics that gate
//! promotion, reward convergence, and the early-termination success rate.

use crate::rollout::RolloutTrace;
use crate::terrain::TerrainParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurriculumError {
    #[error("no curriculum level {0}, levels run 1 to 4")]
    UnknownLevel(u8),
    #[error("evaluation batch holds no steps")]
    EmptyBatch,
    #[error("malformed evaluation batch: {0}")]
    ShapeMismatch(String),
    #[error("invalid gate config: {0}")]
    InvalidGate(String),
    #[error("convergence is undefined against a zero baseline reward")]
    ZeroBaseline,
    #[error("{terminated} terminations out of {total} rollouts is not a valid count")]
    InvalidCounts { terminated: usize, total: usize },
}

/// Terrain difficulty band for one curriculum level. Levels share their
/// geometry except for the top of the step-height range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub level: u8,
    pub step_height_range: (f64, f64),
    pub step_width_range: (f64, f64),
    pub step_count_range: (u32, u32),
    pub grid_half_size: usize,
}

impl LevelSpec {
    /// Terrain generator parameters for this level's difficulty band.
    pub fn terrain_params(&self) -> TerrainParams {
        TerrainParams {
            step_height_range: self.step_height_range,
            step_width_range: self.step_width_range,
            step_count_range: self.step_count_range,
            grid_half_size: self.grid_half_size,
            ..TerrainParams::default()
        }
    }
}

/// The four step-height ceilings, one per level.
const LEVEL_HEIGHT_CAPS: [f64; 4] = [0.03, 0.07, 0.10, 0.13];

pub fn level_params(level: u8) -> Result<LevelSpec, CurriculumError> {
    if !(1..=4).contains(&level) {
        return Err(CurriculumError::UnknownLevel(level));
    }
    Ok(LevelSpec {
        level,
        step_height_range: (0.01, LEVEL_HEIGHT_CAPS[level as usize - 1]),
        step_width_range: (0.3, 0.45),
        step_count_range: (2, 4),
        grid_half_size: 2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    /// Both tracking metrics must reach this to pass a level.
    pub threshold: f64,
    /// Width of the metric Gaussians, shared with the tracking rewards.
    pub sigma: f64,
    /// Relative reward change below which training counts as converged.
    pub epsilon: f64,
    /// How many evaluation episodes a gate decision should be based on.
    pub n_eval: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            threshold: 0.65,
            sigma: 0.25,
            epsilon: 0.02,
            n_eval: 10,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<(), CurriculumError> {
        if !(self.threshold.is_finite() && (0.0..1.0).contains(&self.threshold)) {
            return Err(CurriculumError::InvalidGate(format!(
                "threshold must be in [0, 1), got {}",
                self.threshold
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(CurriculumError::InvalidGate(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(CurriculumError::InvalidGate(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.n_eval == 0 {
            return Err(CurriculumError::InvalidGate(
                "n_eval must be at least one episode".into(),
            ));
        }
        Ok(())
    }
}

/// Velocity tracking errors collected over an evaluation population.
///
/// One inner vector per episode, one squared error per step: the planar
/// velocity error norm squared and the yaw rate error squared.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalBatch {
    pub lin_err_sq: Vec<Vec<f64>>,
    pub ang_err_sq: Vec<Vec<f64>>,
    /// Episodes that ended early in a prohibited state.
    pub terminated: usize,
    /// Total episodes behind the batch.
    pub total: usize,
}

impl EvalBatch {
    pub fn from_traces(traces: &[RolloutTrace]) -> Self {
        let mut lin = Vec::with_capacity(traces.len());
        let mut ang = Vec::with_capacity(traces.len());
        let mut terminated = 0;
        for trace in traces {
            let mut lin_ep = Vec::with_capacity(trace.steps.len());
            let mut ang_ep = Vec::with_capacity(trace.steps.len());
            for step in &trace.steps {
                let (cx, cy, cw) = step.input.command;
                let (vx, vy) = step.input.lin_vel_xy;
                lin_ep.push((cx - vx).powi(2) + (cy - vy).powi(2));
                ang_ep.push((cw - step.input.ang_vel_z).powi(2));
            }
            lin.push(lin_ep);
            ang.push(ang_ep);
            if trace.steps.last().is_some_and(|s| s.terminated) {
                terminated += 1;
            }
        }
        Self {
            lin_err_sq: lin,
            ang_err_sq: ang,
            terminated,
            total: traces.len(),
        }
    }

    fn validate(&self) -> Result<(), CurriculumError> {
        if self.lin_err_sq.len() != self.ang_err_sq.len() {
            return Err(CurriculumError::ShapeMismatch(format!(
                "{} linear episodes vs {} angular",
                self.lin_err_sq.len(),
                self.ang_err_sq.len()
            )));
        }
        for (e, (lin, ang)) in self.lin_err_sq.iter().zip(&self.ang_err_sq).enumerate() {
            if lin.len() != ang.len() {
                return Err(CurriculumError::ShapeMismatch(format!(
                    "episode {e}: {} linear steps vs {} angular",
                    lin.len(),
                    ang.len()
                )));
            }
        }
        if self.terminated > self.total {
            return Err(CurriculumError::InvalidCounts {
                terminated: self.terminated,
                total: self.total,
            });
        }
        if self.lin_err_sq.iter().map(Vec::len).sum::<usize>() == 0 {
            return Err(CurriculumError::EmptyBatch);
        }
        Ok(())
    }
}

/// Mean Gaussian tracking scores `(m_v, m_omega)` over every recorded
/// step: `exp(-err^2 / sigma)` averaged across episodes and steps.
pub fn eval_metrics(batch: &EvalBatch, cfg: &GateConfig) -> Result<(f64, f64), CurriculumError> {
    cfg.validate()?;
    batch.validate()?;
    let steps: usize = batch.lin_err_sq.iter().map(Vec::len).sum();
    let score = |errs: &[Vec<f64>]| {
        errs.iter()
            .flatten()
            .map(|e| (-e / cfg.sigma).exp())
            .sum::<f64>()
            / steps as f64
    };
    Ok((score(&batch.lin_err_sq), score(&batch.ang_err_sq)))
}

/// A level is passed when both tracking metrics reach the threshold.
pub fn level_gate(m_v: f64, m_omega: f64, cfg: &GateConfig) -> bool {
    m_v >= cfg.threshold && m_omega >= cfg.threshold
}

/// Relative reward change below `epsilon` counts as converged. The
/// baseline must be nonzero for the relative change to mean anything.
pub fn convergence_check(r_t: f64, r_prev: f64, epsilon: f64) -> Result<bool, CurriculumError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(CurriculumError::InvalidGate(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if r_prev == 0.0 {
        return Err(CurriculumError::ZeroBaseline);
    }
    Ok(((r_t - r_prev) / r_prev).abs() < epsilon)
}

/// Fraction of rollouts that ran to completion.
pub fn success_rate(terminated: usize, total: usize) -> Result<f64, CurriculumError> {
    if total == 0 || terminated > total {
        return Err(CurriculumError::InvalidCounts { terminated, total });
    }
    Ok((total - terminated) as f64 / total as f64)
}

/// Where a training run sits in the curriculum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurriculumState {
    pub level: u8,
}

impl Default for CurriculumState {
    fn default() -> Self {
        Self { level: 1 }
    }
}

/// Outcome of one evaluation round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub m_v: f64,
    pub m_omega: f64,
    pub passed: bool,
    /// Level in force after the decision.
    pub level: u8,
}

impl CurriculumState {
    /// Feed one evaluation's metrics; a pass advances the level until the
    /// hardest one is reached.
    pub fn observe(
        &mut self,
        batch: &EvalBatch,
        cfg: &GateConfig,
    ) -> Result<GateDecision, CurriculumError> {
        let (m_v, m_omega) = eval_metrics(batch, cfg)?;
        let passed = level_gate(m_v, m_omega, cfg);
        if passed && self.level < 4 {
            self.level += 1;
        }
        Ok(GateDecision {
            m_v,
            m_omega,
            passed,
            level: self.level,
        })
    }

    pub fn spec(&self) -> Result<LevelSpec, CurriculumError> {
        level_params(self.level)
    }
}
