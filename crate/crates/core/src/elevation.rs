//! Robot-centric heightmaps, per-leg terrain statistics, and hole filling.
//!
//! Two sampling paths produce the same [`RobotHeightmap`]: the simulation
//! path reads a ground-truth [`HeightField`], the deployment path reads a
//! fused [`ElevationGrid`] that may contain holes. Heights are absolute
//! world z; conversion to base-relative values happens where observations
//! are assembled.

use crate::terrain::HeightField;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ElevationError {
    #[error("invalid heightmap spec: {0}")]
    InvalidSpec(String),
    #[error("sample point ({x:.3}, {y:.3}) is outside the field")]
    OutOfBounds { x: f64, y: f64 },
    #[error("no cells under the {window} m window at ({x:.3}, {y:.3})")]
    EmptyWindow { x: f64, y: f64, window: f64 },
    #[error("invalid window: {0}")]
    InvalidWindow(f64),
    #[error("hole radius must be at least 1 cell")]
    ZeroHoleRadius,
    #[error("every sample in the footprint is invalid")]
    FootprintInvalid,
    #[error("grid shape {rows}x{cols} does not match {expected} cells")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
}

/// Planar base pose used to place the sampling grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    /// Body-frame point to world frame.
    pub fn to_world(&self, x_b: f64, y_b: f64) -> (f64, f64) {
        let (sin, cos) = self.yaw.sin_cos();
        (
            self.x + cos * x_b - sin * y_b,
            self.y + sin * x_b + cos * y_b,
        )
    }
}

/// What to do when a sample point leaves the underlying field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Clamp to the nearest edge cell and mark the heightmap degraded.
    Clamp,
    /// Fail the extraction.
    Strict,
}

/// Shape of the robot-centric sampling grid: rows run front to back along
/// body +x, columns left to right along body -y, both centered on the base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeightmapSpec {
    pub rows: usize,
    pub cols: usize,
    /// Distance between neighboring sample points in metres.
    pub spacing: f64,
}

impl Default for HeightmapSpec {
    fn default() -> Self {
        Self {
            rows: 11,
            cols: 9,
            spacing: 0.1,
        }
    }
}

impl HeightmapSpec {
    pub fn validate(&self) -> Result<(), ElevationError> {
        if self.rows == 0
            || self.rows.is_multiple_of(2)
            || self.cols == 0
            || self.cols.is_multiple_of(2)
        {
            return Err(ElevationError::InvalidSpec(format!(
                "rows and cols must be odd so the grid centers on the base, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(ElevationError::InvalidSpec(format!(
                "spacing must be positive, got {}",
                self.spacing
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Body-frame (x, y) of sample (row, col). Row 0 is the front row,
    /// column 0 the leftmost column.
    pub fn body_point(&self, row: usize, col: usize) -> (f64, f64) {
        let center_r = (self.rows / 2) as f64;
        let center_c = (self.cols / 2) as f64;
        (
            (center_r - row as f64) * self.spacing,
            (center_c - col as f64) * self.spacing,
        )
    }
}

/// Terrain heights sampled on a body-frame grid around the base.
///
/// `samples` is row-major, rows front to back, columns left to right;
/// heights are absolute world z at the sampled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotHeightmap {
    pub rows: usize,
    pub cols: usize,
    pub samples: Vec<f64>,
    pub base_pose: Pose2,
    /// Set when any sample was boundary-clamped or filled from a fallback.
    pub degraded: bool,
}

impl RobotHeightmap {
    pub fn sample(&self, row: usize, col: usize) -> f64 {
        self.samples[row * self.cols + col]
    }
}

/// Local terrain extremes around one foot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegStats {
    pub h_max: f64,
    pub h_min: f64,
    /// `h_max - h_min`, never negative.
    pub delta_h: f64,
}

fn sample_points<E>(
    pose: Pose2,
    spec: &HeightmapSpec,
    mut lookup: impl FnMut(f64, f64) -> Result<(f64, bool), E>,
) -> Result<(Vec<f64>, bool), E> {
    let mut samples = Vec::with_capacity(spec.len());
    let mut degraded = false;
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            let (x_b, y_b) = spec.body_point(row, col);
            let (x, y) = pose.to_world(x_b, y_b);
            let (h, flag) = lookup(x, y)?;
            degraded |= flag;
            samples.push(h);
        }
    }
    Ok((samples, degraded))
}

/// Sample a robot-centric heightmap from a ground-truth height field.
pub fn sample_robot_heightmap(
    field: &HeightField,
    pose: Pose2,
    spec: &HeightmapSpec,
    boundary: BoundaryMode,
) -> Result<RobotHeightmap, ElevationError> {
    spec.validate()?;
    let (samples, degraded) =
        sample_points(pose, spec, |x, y| match field.height_at_world(x, y) {
            Some(h) => Ok((h, false)),
            None => match boundary {
                BoundaryMode::Clamp => Ok((field.clamped_height_at_world(x, y), true)),
                BoundaryMode::Strict => Err(ElevationError::OutOfBounds { x, y }),
            },
        })?;
    Ok(RobotHeightmap {
        rows: spec.rows,
        cols: spec.cols,
        samples,
        base_pose: pose,
        degraded,
    })
}

/// Terrain extremes over all cells whose centers fall in the axis-aligned
/// square of side `window` centered on the foot's ground projection.
pub fn leg_local_stats(
    field: &HeightField,
    foot_xy: (f64, f64),
    window: f64,
) -> Result<LegStats, ElevationError> {
    if !(window.is_finite() && window > 0.0) {
        return Err(ElevationError::InvalidWindow(window));
    }
    let (x, y) = foot_xy;
    let res = field.resolution;
    let col_lo = ((x - window / 2.0 - field.origin.0) / res - 0.5)
        .ceil()
        .max(0.0) as usize;
    let col_hi = ((x + window / 2.0 - field.origin.0) / res - 0.5).floor();
    let row_lo = ((y - window / 2.0 - field.origin.1) / res - 0.5)
        .ceil()
        .max(0.0) as usize;
    let row_hi = ((y + window / 2.0 - field.origin.1) / res - 0.5).floor();
    if col_hi < 0.0 || row_hi < 0.0 {
        return Err(ElevationError::EmptyWindow { x, y, window });
    }
    let col_hi = (col_hi as usize).min(field.cols.saturating_sub(1));
    let row_hi = (row_hi as usize).min(field.rows.saturating_sub(1));
    if col_lo > col_hi || row_lo > row_hi {
        return Err(ElevationError::EmptyWindow { x, y, window });
    }
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    for row in row_lo..=row_hi {
        for col in col_lo..=col_hi {
            let h = field.height_at_cell(row, col);
            h_min = h_min.min(h);
            h_max = h_max.max(h);
        }
    }
    Ok(LegStats {
        h_max,
        h_min,
        delta_h: h_max - h_min,
    })
}

/// A fused world-frame elevation map: per-cell mean height and variance
/// plus a validity mask marking holes. Layout mirrors [`HeightField`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElevationGrid {
    pub rows: usize,
    pub cols: usize,
    pub resolution: f64,
    pub origin: (f64, f64),
    /// Row-major cell mean heights in metres.
    pub means: Vec<f32>,
    /// Row-major cell height variances in square metres.
    pub variances: Vec<f32>,
    /// Row-major validity mask; `false` marks a hole.
    pub valid: Vec<bool>,
}

impl ElevationGrid {
    /// Wrap a ground-truth field as a fully valid, zero-variance grid.
    pub fn from_height_field(field: &HeightField) -> Self {
        Self {
            rows: field.rows,
            cols: field.cols,
            resolution: field.resolution,
            origin: field.origin,
            means: field.heights.clone(),
            variances: vec![0.0; field.heights.len()],
            valid: vec![true; field.heights.len()],
        }
    }

    pub fn validate(&self) -> Result<(), ElevationError> {
        let expected = self.rows * self.cols;
        if self.means.len() != expected
            || self.variances.len() != expected
            || self.valid.len() != expected
        {
            return Err(ElevationError::ShapeMismatch {
                rows: self.rows,
                cols: self.cols,
                expected,
            });
        }
        Ok(())
    }

    fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[self.index(row, col)]
    }

    /// Mean height of a cell, `None` on a hole.
    pub fn mean_at(&self, row: usize, col: usize) -> Option<f64> {
        let i = self.index(row, col);
        self.valid[i].then(|| self.means[i] as f64)
    }

    pub fn cell_at_world(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let col = ((x - self.origin.0) / self.resolution).floor();
        let row = ((y - self.origin.1) / self.resolution).floor();
        if col < 0.0 || row < 0.0 || col >= self.cols as f64 || row >= self.rows as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }

    fn clamped_cell_at_world(&self, x: f64, y: f64) -> (usize, usize) {
        let col = (((x - self.origin.0) / self.resolution).floor() as i64)
            .clamp(0, self.cols as i64 - 1) as usize;
        let row = (((y - self.origin.1) / self.resolution).floor() as i64)
            .clamp(0, self.rows as i64 - 1) as usize;
        (row, col)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Fill small, fully enclosed holes with patch medians.
///
/// A hole is a 4-connected component of invalid cells. It is filled only
/// when its bounding-box radius (half the larger extent, rounded up) is at
/// most `r_hole` cells, it does not touch the grid border, and every cell
/// on its 8-connected outer ring is valid. Each filled cell takes the
/// median of the originally valid means (and, separately, variances) in
/// the `(2*r_hole+1)^2` patch around it. Larger or border-touching holes
/// are left untouched, and valid cells are never modified, so the
/// operation is idempotent.
pub fn median_fill(grid: &ElevationGrid, r_hole: usize) -> Result<ElevationGrid, ElevationError> {
    if r_hole == 0 {
        return Err(ElevationError::ZeroHoleRadius);
    }
    grid.validate()?;
    let (rows, cols) = (grid.rows, grid.cols);
    let mut out = grid.clone();
    let mut visited = vec![false; rows * cols];

    for start in 0..rows * cols {
        if grid.valid[start] || visited[start] {
            continue;
        }
        // Flood-fill one invalid component.
        let mut component = Vec::new();
        let mut queue = std::collections::VecDeque::from([start]);
        visited[start] = true;
        let (mut r_min, mut r_max, mut c_min, mut c_max) = (rows - 1, 0usize, cols - 1, 0usize);
        while let Some(cell) = queue.pop_front() {
            let (row, col) = (cell / cols, cell % cols);
            component.push(cell);
            r_min = r_min.min(row);
            r_max = r_max.max(row);
            c_min = c_min.min(col);
            c_max = c_max.max(col);
            let mut push = |r: usize, c: usize| {
                let n = r * cols + c;
                if !grid.valid[n] && !visited[n] {
                    visited[n] = true;
                    queue.push_back(n);
                }
            };
            if row > 0 {
                push(row - 1, col);
            }
            if row + 1 < rows {
                push(row + 1, col);
            }
            if col > 0 {
                push(row, col - 1);
            }
            if col + 1 < cols {
                push(row, col + 1);
            }
        }

        let extent = (r_max - r_min + 1).max(c_max - c_min + 1);
        let radius = extent.div_ceil(2);
        if radius > r_hole {
            continue;
        }
        if r_min == 0 || r_max == rows - 1 || c_min == 0 || c_max == cols - 1 {
            continue;
        }
        // The entire 8-connected ring around the component must be valid;
        // a neighboring hole from another component vetoes the fill.
        let enclosed = component.iter().all(|&cell| {
            let (row, col) = (cell / cols, cell % cols);
            (-1i64..=1).all(|dr| {
                (-1i64..=1).all(|dc| {
                    let n = (row as i64 + dr) as usize * cols + (col as i64 + dc) as usize;
                    grid.valid[n] || component.contains(&n)
                })
            })
        });
        if !enclosed {
            continue;
        }

        for &cell in &component {
            let (row, col) = (cell / cols, cell % cols);
            let mut patch_means = Vec::new();
            let mut patch_vars = Vec::new();
            for pr in row.saturating_sub(r_hole)..=(row + r_hole).min(rows - 1) {
                for pc in col.saturating_sub(r_hole)..=(col + r_hole).min(cols - 1) {
                    let p = pr * cols + pc;
                    if grid.valid[p] {
                        patch_means.push(grid.means[p] as f64);
                        patch_vars.push(grid.variances[p] as f64);
                    }
                }
            }
            if patch_means.is_empty() {
                continue;
            }
            out.means[cell] = median(&mut patch_means) as f32;
            out.variances[cell] = median(&mut patch_vars) as f32;
            out.valid[cell] = true;
        }
    }
    Ok(out)
}

/// Sample a robot-centric heightmap from a fused elevation grid.
///
/// Valid cells contribute their mean height. Holes under a sample (and
/// boundary-clamped samples) take `fallback` and mark the heightmap
/// degraded; a footprint with no valid sample at all is an error.
pub fn grid_to_heightmap(
    grid: &ElevationGrid,
    pose: Pose2,
    spec: &HeightmapSpec,
    boundary: BoundaryMode,
    fallback: f64,
) -> Result<RobotHeightmap, ElevationError> {
    spec.validate()?;
    grid.validate()?;
    let mut any_valid = false;
    let (samples, degraded) = sample_points(pose, spec, |x, y| {
        let cell = match grid.cell_at_world(x, y) {
            Some(cell) => cell,
            None => match boundary {
                BoundaryMode::Clamp => grid.clamped_cell_at_world(x, y),
                BoundaryMode::Strict => return Err(ElevationError::OutOfBounds { x, y }),
            },
        };
        let clamped = grid.cell_at_world(x, y).is_none();
        match grid.mean_at(cell.0, cell.1) {
            Some(h) => {
                any_valid = true;
                Ok((h, clamped))
            }
            None => Ok((fallback, true)),
        }
    })?;
    if !any_valid {
        return Err(ElevationError::FootprintInvalid);
    }
    Ok(RobotHeightmap {
        rows: spec.rows,
        cols: spec.cols,
        samples,
        base_pose: pose,
        degraded,
    })
}
