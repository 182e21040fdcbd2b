//! Stair-like tile terrain: tileset construction, constraint-collapse
//! placement, rasterization to height fields, and box obstacle fields.
//!
//! A terrain is a square grid of `(2N+1)²` tiles drawn from a tileset of
//! flats, straight stairs and corner stairs that all share one sampled
//! step geometry. Two tiles may be neighbors exactly when the height
//! profiles along their shared edge are equal, so every generated terrain
//! is walkable by construction and rasterizes without seams.

mod field;
mod obstacle;
mod tile;
mod wfc;

pub use field::{rasterize, HeightField};
pub use obstacle::{generate_obstacle_field, ObstacleFieldParams};
pub use tile::{EdgeProfile, Orientation, Side, StairGeometry, Tile, TileKind, TileSet};
pub use wfc::{wfc_generate, TileGrid};

use crate::parallel::{map_collect, Parallelism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("invalid terrain parameters: {0}")]
    InvalidParams(String),
    #[error("resolution {resolution} does not divide tile size {tile_size}")]
    NonDivisibleResolution { resolution: f64, tile_size: f64 },
    #[error("tile placement failed for seed {seed} after {attempts} attempts")]
    GenerationFailed { seed: u64, attempts: u32 },
}

/// Knobs for terrain generation. Step geometry is drawn once per terrain
/// from the configured ranges and shared by every stair tile in it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TerrainParams {
    /// Side length of one square tile in metres.
    pub tile_size: f64,
    /// Rasterization cell size in metres; must divide `tile_size`.
    pub resolution: f64,
    /// Inclusive bounds for the stair step width in metres.
    pub step_width_range: (f64, f64),
    /// Inclusive bounds for the per-step height in metres.
    pub step_height_range: (f64, f64),
    /// Inclusive bounds for the number of steps per stair tile.
    pub step_count_range: (u32, u32),
    /// Grid half-size N; the terrain is (2N+1) tiles on a side.
    pub grid_half_size: usize,
    /// Number of base elevation levels above zero available to tiles.
    pub max_elevation_levels: usize,
    /// Restart budget for the constraint solver.
    pub max_restarts: u32,
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self {
            tile_size: 2.0,
            resolution: 0.05,
            step_width_range: (0.3, 0.45),
            step_height_range: (0.01, 0.03),
            step_count_range: (2, 4),
            grid_half_size: 2,
            max_elevation_levels: 4,
            max_restarts: 32,
        }
    }
}

impl TerrainParams {
    pub fn validate(&self) -> Result<(), TerrainError> {
        if !(self.tile_size.is_finite() && self.tile_size > 0.0) {
            return Err(TerrainError::InvalidParams(format!(
                "tile size must be positive, got {}",
                self.tile_size
            )));
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(TerrainError::InvalidParams(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        let per_tile = self.tile_size / self.resolution;
        if (per_tile - per_tile.round()).abs() > 1e-9 {
            return Err(TerrainError::NonDivisibleResolution {
                resolution: self.resolution,
                tile_size: self.tile_size,
            });
        }
        let (w_lo, w_hi) = self.step_width_range;
        let (h_lo, h_hi) = self.step_height_range;
        let (n_lo, n_hi) = self.step_count_range;
        if !(w_lo > 0.0 && w_hi >= w_lo) {
            return Err(TerrainError::InvalidParams(format!(
                "step width range ({w_lo}, {w_hi}) is not a valid positive interval"
            )));
        }
        if !(h_lo >= 0.0 && h_hi >= h_lo) {
            return Err(TerrainError::InvalidParams(format!(
                "step height range ({h_lo}, {h_hi}) is not a valid interval"
            )));
        }
        if n_lo < 1 || n_hi < n_lo {
            return Err(TerrainError::InvalidParams(format!(
                "step count range ({n_lo}, {n_hi}) is not a valid interval"
            )));
        }
        // Stairs need flat aprons on both sides of the treads.
        if n_hi as f64 * w_hi >= self.tile_size {
            return Err(TerrainError::InvalidParams(format!(
                "{n_hi} steps of width {w_hi} do not fit a {} m tile",
                self.tile_size
            )));
        }
        if self.grid_half_size == 0 {
            return Err(TerrainError::InvalidParams(
                "grid half-size must be at least 1".to_string(),
            ));
        }
        if self.max_elevation_levels == 0 {
            return Err(TerrainError::InvalidParams(
                "need at least one elevation level".to_string(),
            ));
        }
        Ok(())
    }

    /// Side length of the tile grid, `2N + 1`.
    pub fn grid_side(&self) -> usize {
        2 * self.grid_half_size + 1
    }

    /// Draw one step geometry from the ranges.
    pub fn sample_geometry<R: Rng + ?Sized>(&self, rng: &mut R) -> StairGeometry {
        let (w_lo, w_hi) = self.step_width_range;
        let (h_lo, h_hi) = self.step_height_range;
        let (n_lo, n_hi) = self.step_count_range;
        StairGeometry {
            step_width: rng.random_range(w_lo..=w_hi),
            step_height: rng.random_range(h_lo..=h_hi),
            step_count: rng.random_range(n_lo..=n_hi),
            tile_size: self.tile_size,
        }
    }
}

/// Build the full tile inventory for one sampled step geometry: flats at
/// every elevation level, straight stairs and corner stairs in all four
/// orientations at every level they can climb from. A zero step height
/// collapses the inventory to a single flat tile.
pub fn build_tileset(
    params: &TerrainParams,
    geometry: StairGeometry,
) -> Result<TileSet, TerrainError> {
    params.validate()?;
    TileSet::build(geometry, params.max_elevation_levels)
}

/// Generate one terrain: sample a step geometry, build the tileset,
/// collapse the tile grid, rasterize. Deterministic per seed.
pub fn generate_field(
    params: &TerrainParams,
    seed: u64,
) -> Result<(TileGrid, HeightField), TerrainError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geometry = params.sample_geometry(&mut rng);
    let tileset = build_tileset(params, geometry)?;
    let grid = wfc_generate(&tileset, params.grid_half_size, seed, params.max_restarts)?;
    let field = rasterize(&grid, params.resolution)?;
    Ok((grid, field))
}

/// Generate one terrain per seed, in parallel under the chosen mode.
pub fn generate_batch(
    params: &TerrainParams,
    seeds: &[u64],
    mode: Parallelism,
) -> Vec<Result<(TileGrid, HeightField), TerrainError>> {
    map_collect(mode, seeds, |&seed| generate_field(params, seed))
}
