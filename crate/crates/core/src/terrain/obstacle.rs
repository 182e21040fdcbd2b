//! Scattered box obstacles on flat ground.

use super::field::HeightField;
use super::TerrainError;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Parameters for a flat field littered with axis-aligned boxes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObstacleFieldParams {
    /// Field extent (x, y) in metres, centered on the origin.
    pub extent: (f64, f64),
    /// Obstacle height range in metres.
    pub height_range: (f64, f64),
    /// Obstacles per square metre.
    pub density: f64,
    /// Footprint side-length range in metres, sampled per axis.
    pub size_range: (f64, f64),
    /// Radius around the origin kept free of obstacles.
    pub spawn_clearance: f64,
    /// Minimum gap between obstacle footprints.
    pub min_separation: f64,
    /// Height field cell size in metres.
    pub resolution: f64,
    /// Placement attempts per obstacle before giving up on it.
    pub max_tries_per_obstacle: usize,
}

impl Default for ObstacleFieldParams {
    fn default() -> Self {
        Self {
            extent: (10.0, 10.0),
            height_range: (0.02, 0.09),
            density: 0.5,
            size_range: (0.2, 0.5),
            spawn_clearance: 0.5,
            min_separation: 0.1,
            resolution: 0.05,
            max_tries_per_obstacle: 64,
        }
    }
}

impl ObstacleFieldParams {
    pub fn validate(&self) -> Result<(), TerrainError> {
        let ok = self.extent.0 > 0.0
            && self.extent.1 > 0.0
            && self.height_range.0 > 0.0
            && self.height_range.1 >= self.height_range.0
            && self.density >= 0.0
            && self.size_range.0 > 0.0
            && self.size_range.1 >= self.size_range.0
            && self.spawn_clearance >= 0.0
            && self.min_separation >= 0.0
            && self.resolution > 0.0
            && self.max_tries_per_obstacle > 0;
        if ok {
            Ok(())
        } else {
            Err(TerrainError::InvalidParams(format!(
                "obstacle field parameters out of range: {self:?}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct ObstacleBox {
    center: (f64, f64),
    half: (f64, f64),
    height: f64,
}

impl ObstacleBox {
    fn separated_from(&self, other: &ObstacleBox, gap: f64) -> bool {
        let dx = (self.center.0 - other.center.0).abs();
        let dy = (self.center.1 - other.center.1).abs();
        dx >= self.half.0 + other.half.0 + gap || dy >= self.half.1 + other.half.1 + gap
    }

    fn clears_spawn(&self, radius: f64) -> bool {
        // Distance from the origin to the box footprint.
        let dx = (self.center.0.abs() - self.half.0).max(0.0);
        let dy = (self.center.1.abs() - self.half.1).max(0.0);
        (dx * dx + dy * dy).sqrt() >= radius
    }

    fn covers(&self, x: f64, y: f64) -> bool {
        (x - self.center.0).abs() <= self.half.0 && (y - self.center.1).abs() <= self.half.1
    }
}

/// Generate a flat height field with randomly scattered box obstacles.
///
/// Placement is rejection-sampled: boxes keep `min_separation` between
/// footprints and stay out of the spawn disc. A box that cannot be placed
/// within the per-obstacle try budget is dropped, so dense configurations
/// degrade gracefully instead of failing.
pub fn generate_obstacle_field(
    params: &ObstacleFieldParams,
    seed: u64,
) -> Result<HeightField, TerrainError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = (params.density * params.extent.0 * params.extent.1).round() as usize;
    let mut boxes: Vec<ObstacleBox> = Vec::with_capacity(target);

    for _ in 0..target {
        for _ in 0..params.max_tries_per_obstacle {
            let half = (
                rng.random_range(params.size_range.0..=params.size_range.1) / 2.0,
                rng.random_range(params.size_range.0..=params.size_range.1) / 2.0,
            );
            let cx_max = (params.extent.0 / 2.0 - half.0).max(0.0);
            let cy_max = (params.extent.1 / 2.0 - half.1).max(0.0);
            let candidate = ObstacleBox {
                center: (
                    rng.random_range(-cx_max..=cx_max),
                    rng.random_range(-cy_max..=cy_max),
                ),
                half,
                height: rng.random_range(params.height_range.0..=params.height_range.1),
            };
            if !candidate.clears_spawn(params.spawn_clearance) {
                continue;
            }
            if boxes
                .iter()
                .all(|b| candidate.separated_from(b, params.min_separation))
            {
                boxes.push(candidate);
                break;
            }
        }
    }

    let cols = (params.extent.0 / params.resolution).round() as usize;
    let rows = (params.extent.1 / params.resolution).round() as usize;
    let origin = (-params.extent.0 / 2.0, -params.extent.1 / 2.0);
    Ok(HeightField::from_fn(
        rows,
        cols,
        params.resolution,
        origin,
        |x, y| {
            boxes
                .iter()
                .filter(|b| b.covers(x, y))
                .map(|b| b.height)
                .fold(0.0, f64::max)
        },
    ))
}
