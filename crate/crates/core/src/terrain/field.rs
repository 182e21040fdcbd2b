//! Uniform-grid height fields and tile grid rasterization.

use super::wfc::TileGrid;
use super::TerrainError;
use serde::{Deserialize, Serialize};

/// A rectangular grid of terrain heights sampled at cell centers.
///
/// Heights are stored as 32-bit floats, matching the on-disk format, and
/// widened to f64 at query time. `origin` is the world position of the
/// south-west corner of cell (0, 0); rows advance along +y, columns
/// along +x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub rows: usize,
    pub cols: usize,
    /// Cell side length in metres.
    pub resolution: f64,
    /// World (x, y) of the grid's south-west corner.
    pub origin: (f64, f64),
    /// Row-major heights in metres.
    pub heights: Vec<f32>,
}

impl HeightField {
    /// Build from a closure evaluated at every cell center.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        resolution: f64,
        origin: (f64, f64),
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        let mut heights = Vec::with_capacity(rows * cols);
        for row in 0..rows {
            for col in 0..cols {
                let x = origin.0 + (col as f64 + 0.5) * resolution;
                let y = origin.1 + (row as f64 + 0.5) * resolution;
                heights.push(f(x, y) as f32);
            }
        }
        Self {
            rows,
            cols,
            resolution,
            origin,
            heights,
        }
    }

    pub fn height_at_cell(&self, row: usize, col: usize) -> f64 {
        self.heights[row * self.cols + col] as f64
    }

    /// World (x, y) of a cell center.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.resolution,
            self.origin.1 + (row as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell indices containing a world point, if inside the field.
    pub fn cell_at_world(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let col = ((x - self.origin.0) / self.resolution).floor();
        let row = ((y - self.origin.1) / self.resolution).floor();
        if col < 0.0 || row < 0.0 || col >= self.cols as f64 || row >= self.rows as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }

    /// Nearest-cell height lookup; `None` outside the field.
    pub fn height_at_world(&self, x: f64, y: f64) -> Option<f64> {
        self.cell_at_world(x, y)
            .map(|(row, col)| self.height_at_cell(row, col))
    }

    /// Nearest-cell height with out-of-bounds points clamped to the edge.
    pub fn clamped_height_at_world(&self, x: f64, y: f64) -> f64 {
        let col = (((x - self.origin.0) / self.resolution).floor() as i64)
            .clamp(0, self.cols as i64 - 1) as usize;
        let row = (((y - self.origin.1) / self.resolution).floor() as i64)
            .clamp(0, self.rows as i64 - 1) as usize;
        self.height_at_cell(row, col)
    }

    /// Whether a world point falls inside the field.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.cell_at_world(x, y).is_some()
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &h in &self.heights {
            min = min.min(h as f64);
            max = max.max(h as f64);
        }
        (min, max)
    }

    /// World extent as ((x_min, y_min), (x_max, y_max)).
    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        (
            self.origin,
            (
                self.origin.0 + self.cols as f64 * self.resolution,
                self.origin.1 + self.rows as f64 * self.resolution,
            ),
        )
    }
}

/// Rasterize a tile grid to a height field centered on the world origin.
///
/// The resolution must divide the tile side length. Heights are the
/// analytic tile heights at cell centers, so tiles with matching edge
/// profiles rasterize with zero discontinuity across the boundary.
pub fn rasterize(grid: &TileGrid, resolution: f64) -> Result<HeightField, TerrainError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(TerrainError::InvalidParams(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let ratio = grid.tile_size / resolution;
    if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
        return Err(TerrainError::NonDivisibleResolution {
            resolution,
            tile_size: grid.tile_size,
        });
    }
    let per_tile = ratio.round() as usize;
    let side = grid.side();
    let cells = side * per_tile;
    let half_extent = side as f64 * grid.tile_size / 2.0;
    let origin = (-half_extent, -half_extent);

    let mut heights = Vec::with_capacity(cells * cells);
    for row in 0..cells {
        let tile_row = row / per_tile;
        let local_y = (row % per_tile) as f64 * resolution + resolution / 2.0;
        for col in 0..cells {
            let tile_col = col / per_tile;
            let local_x = (col % per_tile) as f64 * resolution + resolution / 2.0;
            let tile = grid.tile(tile_row, tile_col);
            heights.push(tile.height_at(grid.tile_size, local_x, local_y) as f32);
        }
    }
    Ok(HeightField {
        rows: cells,
        cols: cells,
        resolution,
        origin,
        heights,
    })
}
