//! Per-leg gait phase clocks and their trigonometric encoding.
//!
//! Each leg carries a phase angle in `[0, 2π)`. The first half of the
//! cycle, `[0, π)`, means the foot should be loaded (stance); the second
//! half means it should be in flight (swing). Phases are always computed
//! analytically from the leg offsets, the base frequency and absolute
//! time, never accumulated step by step, so arbitrarily long rollouts
//! cannot drift.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Number of legs. Indexing is FL, FR, RL, RR throughout the crate.
pub const LEG_COUNT: usize = 4;

/// Leg names matching the fixed index convention.
pub const LEG_NAMES: [&str; LEG_COUNT] = ["FL", "FR", "RL", "RR"];

/// Errors from phase bookkeeping.
#[derive(Debug, Error)]
pub enum PhaseError {
    /// Phase clocks only run forward.
    #[error("time step must be finite and non-negative, got {0}")]
    InvalidDt(f64),
    /// An angle was handed in outside the canonical `[0, 2π)` interval.
    #[error("phase angle {0} is outside [0, 2π)")]
    AngleOutOfRange(f64),
    /// Gait parameters failed validation.
    #[error("invalid gait: {0}")]
    InvalidGait(String),
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid can round up to the modulus itself for tiny negatives.
    if wrapped >= TAU {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Inter-leg phase offset templates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitTemplate {
    /// Diagonal pairs alternate: offsets (0, π, π, 0).
    Trot,
    /// Lateral pairs alternate: offsets (0, π, 0, π).
    Pace,
    /// Front and rear pairs alternate: offsets (0, 0, π, π).
    Bound,
    /// Four-beat lateral sequence: offsets (0, π, 3π/2, π/2).
    Walk,
}

impl GaitTemplate {
    /// Per-leg phase offsets in FL, FR, RL, RR order.
    pub fn offsets(self) -> [f64; LEG_COUNT] {
        match self {
            GaitTemplate::Trot => [0.0, PI, PI, 0.0],
            GaitTemplate::Pace => [0.0, PI, 0.0, PI],
            GaitTemplate::Bound => [0.0, 0.0, PI, PI],
            GaitTemplate::Walk => [0.0, PI, 3.0 * PI / 2.0, PI / 2.0],
        }
    }
}

/// Gait clock parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitConfig {
    /// Per-leg phase offsets in `[0, 2π)`, FL, FR, RL, RR.
    pub leg_offsets: [f64; LEG_COUNT],
    /// Cycle frequency in Hz.
    pub base_frequency: f64,
    /// Fraction of the cycle spent in stance, in `(0, 1)`.
    pub stance_ratio: f64,
}

impl GaitConfig {
    pub fn new(
        leg_offsets: [f64; LEG_COUNT],
        base_frequency: f64,
        stance_ratio: f64,
    ) -> Result<Self, PhaseError> {
        for &offset in &leg_offsets {
            if !(0.0..TAU).contains(&offset) {
                return Err(PhaseError::AngleOutOfRange(offset));
            }
        }
        if !base_frequency.is_finite() || base_frequency <= 0.0 {
            return Err(PhaseError::InvalidGait(format!(
                "base frequency must be positive, got {base_frequency}"
            )));
        }
        if !stance_ratio.is_finite() || stance_ratio <= 0.0 || stance_ratio >= 1.0 {
            return Err(PhaseError::InvalidGait(format!(
                "stance ratio must lie in (0, 1), got {stance_ratio}"
            )));
        }
        Ok(Self {
            leg_offsets,
            base_frequency,
            stance_ratio,
        })
    }

    /// Gait from a template at the given frequency, stance ratio 0.5.
    pub fn from_template(template: GaitTemplate, base_frequency: f64) -> Result<Self, PhaseError> {
        Self::new(template.offsets(), base_frequency, 0.5)
    }

    /// Cycle period in seconds.
    pub fn period(&self) -> f64 {
        1.0 / self.base_frequency
    }
}

/// Snapshot of the four leg phases at an instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    /// Per-leg phase angles in `[0, 2π)`.
    pub phases: [f64; LEG_COUNT],
    /// Absolute time in seconds the phases correspond to.
    pub time: f64,
}

impl PhaseState {
    /// Phases at absolute time `time`: `(offset + 2π f t) mod 2π` per leg.
    pub fn at(gait: &GaitConfig, time: f64) -> Self {
        let mut phases = [0.0; LEG_COUNT];
        for (phase, &offset) in phases.iter_mut().zip(&gait.leg_offsets) {
            *phase = wrap_angle(offset + TAU * gait.base_frequency * time);
        }
        Self { phases, time }
    }

    /// Phases at time zero, i.e. the raw leg offsets.
    pub fn initial(gait: &GaitConfig) -> Self {
        Self::at(gait, 0.0)
    }
}

/// Advance the clock by `dt` seconds.
///
/// The new phases are recomputed from the gait offsets and the new
/// absolute time rather than by incrementing the stored angles, so
/// repeated calls are exactly equivalent to one big step.
pub fn advance_phase(
    state: &PhaseState,
    gait: &GaitConfig,
    dt: f64,
) -> Result<PhaseState, PhaseError> {
    if !dt.is_finite() || dt < 0.0 {
        return Err(PhaseError::InvalidDt(dt));
    }
    Ok(PhaseState::at(gait, state.time + dt))
}

/// Which half of the cycle a phase angle falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Stance,
    Swing,
}

/// Stance for `φ ∈ [0, π)`, swing for `φ ∈ [π, 2π)`.
pub fn classify_phase(phase: f64) -> Result<PhaseKind, PhaseError> {
    if !(0.0..TAU).contains(&phase) {
        return Err(PhaseError::AngleOutOfRange(phase));
    }
    if phase < PI {
        Ok(PhaseKind::Stance)
    } else {
        Ok(PhaseKind::Swing)
    }
}

/// Policy-facing encoding: `[cos φ_0..φ_3, sin φ_0..φ_3]`.
pub fn phase_encoding(state: &PhaseState) -> [f64; 2 * LEG_COUNT] {
    let mut out = [0.0; 2 * LEG_COUNT];
    for (i, &phase) in state.phases.iter().enumerate() {
        out[i] = phase.cos();
        out[i + LEG_COUNT] = phase.sin();
    }
    out
}

/// Ranges for drawing a gait at episode start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitSampleRanges {
    /// Inclusive bounds for the cycle frequency in Hz.
    pub frequency: (f64, f64),
    pub template: GaitTemplate,
    pub stance_ratio: f64,
}

impl Default for GaitSampleRanges {
    fn default() -> Self {
        Self {
            frequency: (1.0, 3.0),
            template: GaitTemplate::Trot,
            stance_ratio: 0.5,
        }
    }
}

/// Draw a gait: frequency uniform in the configured range, offsets from
/// the template. A degenerate range pins the frequency exactly.
pub fn sample_gait<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &GaitSampleRanges,
) -> Result<GaitConfig, PhaseError> {
    let (lo, hi) = ranges.frequency;
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
        return Err(PhaseError::InvalidGait(format!(
            "frequency range ({lo}, {hi}) is not a valid positive interval"
        )));
    }
    let frequency = rng.random_range(lo..=hi);
    GaitConfig::new(ranges.template.offsets(), frequency, ranges.stance_ratio)
}
