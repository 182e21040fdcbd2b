//! Terrain-adaptive desired foot-height trajectories.
//!
//! The foot reference is a function of gait phase built from cubic Hermite
//! segments with zero end tangents: stance holds the foot at a fixed
//! height, swing lifts it to an apex and brings it back. The apex is
//! raised by the local terrain height spread, so the same profile clears
//! taller steps without retuning.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("segment duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("evaluation point {t} outside segment [0, {duration}]")]
    OutOfSegment { t: f64, duration: f64 },
    #[error("phase {0} is outside [0, 2π]")]
    PhaseOutOfRange(f64),
    #[error("terrain height spread must be non-negative and finite, got {0}")]
    InvalidHeightSpread(f64),
    #[error("invalid trajectory parameters: {0}")]
    InvalidParams(String),
}

/// One cubic segment `P(t) = c0 + c1 t + c2 t² + c3 t³` for `t ∈ [0, duration]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteSegment {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub duration: f64,
}

impl HermiteSegment {
    /// Segment interpolating `p0 → p1` with end slopes `m0` and `m1`.
    pub fn from_endpoints(
        p0: f64,
        p1: f64,
        m0: f64,
        m1: f64,
        duration: f64,
    ) -> Result<Self, SplineError> {
        if !duration.is_finite() || duration <= 0.0 {
            return Err(SplineError::InvalidDuration(duration));
        }
        let span = p1 - p0;
        let c2 = 3.0 / (duration * duration) * span - 2.0 / duration * m0 - m1 / duration;
        let c3 = -2.0 / (duration * duration * duration) * span + (m0 + m1) / (duration * duration);
        Ok(Self {
            c0: p0,
            c1: m0,
            c2,
            c3,
            duration,
        })
    }

    /// Evaluate the polynomial at `t ∈ [0, duration]`.
    pub fn eval(&self, t: f64) -> Result<f64, SplineError> {
        if !t.is_finite() || t < 0.0 || t > self.duration {
            return Err(SplineError::OutOfSegment {
                t,
                duration: self.duration,
            });
        }
        Ok(self.c0 + t * (self.c1 + t * (self.c2 + t * self.c3)))
    }

    /// Derivative dP/dt at `t ∈ [0, duration]`.
    pub fn slope(&self, t: f64) -> Result<f64, SplineError> {
        if !t.is_finite() || t < 0.0 || t > self.duration {
            return Err(SplineError::OutOfSegment {
                t,
                duration: self.duration,
            });
        }
        Ok(self.c1 + t * (2.0 * self.c2 + t * 3.0 * self.c3))
    }
}

/// Shape of the per-leg foot-height reference, in the hip frame (metres,
/// negative below the hip).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FootTrajectoryParams {
    /// Foot height held during stance.
    pub stance_height: f64,
    /// Swing apex height on flat ground; the terrain height spread is
    /// added on top of this.
    pub swing_apex: f64,
    /// Fraction of the cycle spent in stance, in `(0, 1)`.
    pub stance_ratio: f64,
}

impl Default for FootTrajectoryParams {
    fn default() -> Self {
        Self {
            stance_height: -0.30,
            swing_apex: -0.22,
            stance_ratio: 0.5,
        }
    }
}

impl FootTrajectoryParams {
    pub fn new(
        stance_height: f64,
        swing_apex: f64,
        stance_ratio: f64,
    ) -> Result<Self, SplineError> {
        let params = Self {
            stance_height,
            swing_apex,
            stance_ratio,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SplineError> {
        if !self.stance_height.is_finite() || !self.swing_apex.is_finite() {
            return Err(SplineError::InvalidParams(
                "heights must be finite".to_string(),
            ));
        }
        if self.swing_apex <= self.stance_height {
            return Err(SplineError::InvalidParams(format!(
                "swing apex {} must lie above stance height {}",
                self.swing_apex, self.stance_height
            )));
        }
        if !self.stance_ratio.is_finite() || self.stance_ratio <= 0.0 || self.stance_ratio >= 1.0 {
            return Err(SplineError::InvalidParams(format!(
                "stance ratio must lie in (0, 1), got {}",
                self.stance_ratio
            )));
        }
        Ok(())
    }

    /// Phase at which stance ends and swing-up begins: `2π · stance_ratio`.
    pub fn stance_end(&self) -> f64 {
        TAU * self.stance_ratio
    }

    /// Phase of the swing apex: `π (1 + stance_ratio)`, halfway through swing.
    pub fn swing_peak(&self) -> f64 {
        PI * (1.0 + self.stance_ratio)
    }

    /// Phase length of each swing half: `π (1 - stance_ratio)`.
    pub fn swing_half(&self) -> f64 {
        PI * (1.0 - self.stance_ratio)
    }
}

/// Desired foot height at `phase`, with the swing apex raised by
/// `height_spread` (the max-min terrain height around the foot).
///
/// Piecewise in phase: stance holds `stance_height`; swing-up is a Hermite
/// segment from `stance_height` to `swing_apex + height_spread` with zero
/// end tangents; swing-down mirrors it back. A phase of exactly `2π` is
/// treated as `0`.
pub fn desired_foot_height(
    phase: f64,
    params: &FootTrajectoryParams,
    height_spread: f64,
) -> Result<f64, SplineError> {
    params.validate()?;
    if !height_spread.is_finite() || height_spread < 0.0 {
        return Err(SplineError::InvalidHeightSpread(height_spread));
    }
    if !(0.0..=TAU).contains(&phase) {
        return Err(SplineError::PhaseOutOfRange(phase));
    }
    let phi = if phase == TAU { 0.0 } else { phase };

    let stance_end = params.stance_end();
    let peak = params.swing_peak();
    let half = params.swing_half();
    let apex = params.swing_apex + height_spread;

    if phi < stance_end {
        Ok(params.stance_height)
    } else if phi < peak {
        HermiteSegment::from_endpoints(params.stance_height, apex, 0.0, 0.0, half)?
            .eval(phi - stance_end)
    } else {
        HermiteSegment::from_endpoints(apex, params.stance_height, 0.0, 0.0, half)?.eval(phi - peak)
    }
}
