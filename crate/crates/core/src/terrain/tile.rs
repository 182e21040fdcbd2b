//! Tile geometry: analytic height functions and exact edge profiles.
//!
//! All heights inside a tileset are integer multiples of the shared step
//! height, tracked as integer units. That makes edge profiles comparable
//! with plain equality and keeps rasterized heights bit-identical across
//! tile boundaries that the adjacency relation declares compatible.

use super::TerrainError;
use serde::{Deserialize, Serialize};

/// The tile shapes available to the generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileKind {
    Flat,
    StairStraight,
    StairCorner,
}

/// Cardinal rotation from the canonical pose, counter-clockwise.
///
/// Canonical poses: a straight stair ascends toward +x; a corner stair is
/// low along its west and south edges and climbs into the north-east.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Deg0,
    Deg90,
    Deg180,
    Deg270,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::Deg0,
        Orientation::Deg90,
        Orientation::Deg180,
        Orientation::Deg270,
    ];
}

/// Tile edges, named from a bird's-eye view with +x east and +y north.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    North,
    East,
    South,
    West,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::North, Side::East, Side::South, Side::West];

    pub fn opposite(self) -> Side {
        match self {
            Side::North => Side::South,
            Side::East => Side::West,
            Side::South => Side::North,
            Side::West => Side::East,
        }
    }
}

/// Step geometry shared by every stair tile in one terrain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StairGeometry {
    /// Tread width in metres.
    pub step_width: f64,
    /// Per-step height in metres.
    pub step_height: f64,
    /// Steps per stair tile.
    pub step_count: u32,
    /// Side length of a tile in metres.
    pub tile_size: f64,
}

impl StairGeometry {
    /// Total elevation change across one stair tile.
    pub fn rise(&self) -> f64 {
        self.step_count as f64 * self.step_height
    }

    /// Width of the flat margin before the first and after the last tread.
    pub fn apron(&self) -> f64 {
        (self.tile_size - self.step_count as f64 * self.step_width) / 2.0
    }

    fn validate(&self) -> Result<(), TerrainError> {
        if !(self.tile_size.is_finite() && self.tile_size > 0.0) {
            return Err(TerrainError::InvalidParams(format!(
                "tile size must be positive, got {}",
                self.tile_size
            )));
        }
        if !(self.step_width > 0.0 && self.step_height >= 0.0) || self.step_count < 1 {
            return Err(TerrainError::InvalidParams(format!(
                "bad step geometry: width {}, height {}, count {}",
                self.step_width, self.step_height, self.step_count
            )));
        }
        if self.apron() <= 0.0 {
            return Err(TerrainError::InvalidParams(format!(
                "{} steps of width {} do not fit a {} m tile",
                self.step_count, self.step_width, self.tile_size
            )));
        }
        Ok(())
    }

    /// Elevation units of the canonical ascending profile at coordinate
    /// `d ∈ [0, tile_size]`: 0 on the low apron, k on the k-th tread,
    /// `step_count` on the high apron.
    pub fn profile_units(&self, d: f64) -> u32 {
        // Tread boundaries belong to the upper tread; the tolerance keeps
        // that true when decimal geometry is not binary-representable.
        let raw = ((d - self.apron()) / self.step_width + 1e-9).floor() + 1.0;
        raw.clamp(0.0, self.step_count as f64) as u32
    }
}

/// One placed (or placeable) tile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub kind: TileKind,
    pub orientation: Orientation,
    /// Elevation of the tile's low side, in integer step-height units.
    pub base_units: u32,
    pub step_width: f64,
    pub step_height: f64,
    pub step_count: u32,
}

impl Tile {
    pub fn flat(level_units: u32, geometry: &StairGeometry) -> Self {
        Self {
            kind: TileKind::Flat,
            orientation: Orientation::Deg0,
            base_units: level_units,
            step_width: geometry.step_width,
            step_height: geometry.step_height,
            step_count: geometry.step_count,
        }
    }

    pub fn stair(
        kind: TileKind,
        orientation: Orientation,
        base_units: u32,
        geometry: &StairGeometry,
    ) -> Self {
        Self {
            kind,
            orientation,
            base_units,
            step_width: geometry.step_width,
            step_height: geometry.step_height,
            step_count: geometry.step_count,
        }
    }

    /// World elevation of the tile's low side in metres.
    pub fn base_elevation(&self) -> f64 {
        self.base_units as f64 * self.step_height
    }

    /// Total elevation change across the tile: step count × step height
    /// for stairs, zero for flats.
    pub fn rise(&self) -> f64 {
        match self.kind {
            TileKind::Flat => 0.0,
            _ => self.step_count as f64 * self.step_height,
        }
    }

    fn geometry(&self, tile_size: f64) -> StairGeometry {
        StairGeometry {
            step_width: self.step_width,
            step_height: self.step_height,
            step_count: self.step_count,
            tile_size,
        }
    }

    /// Terrain height at tile-local coordinates `(x, y) ∈ [0, tile_size]²`.
    ///
    /// Corner stairs use the lower envelope of the two straight ascents
    /// they join, which keeps their side profiles identical to the
    /// matching straight-stair profiles.
    pub fn height_at(&self, tile_size: f64, x: f64, y: f64) -> f64 {
        let geometry = self.geometry(tile_size);
        let units = self.base_units + self.local_units(&geometry, x, y);
        units as f64 * self.step_height
    }

    /// Elevation above the tile base in integer units at local `(x, y)`.
    pub fn local_units(&self, geometry: &StairGeometry, x: f64, y: f64) -> u32 {
        let size = geometry.tile_size;
        match self.kind {
            TileKind::Flat => 0,
            TileKind::StairStraight => {
                let d = match self.orientation {
                    Orientation::Deg0 => x,
                    Orientation::Deg90 => y,
                    Orientation::Deg180 => size - x,
                    Orientation::Deg270 => size - y,
                };
                geometry.profile_units(d)
            }
            TileKind::StairCorner => {
                let d = match self.orientation {
                    Orientation::Deg0 => x.min(y),
                    Orientation::Deg90 => y.min(size - x),
                    Orientation::Deg180 => (size - x).min(size - y),
                    Orientation::Deg270 => (size - y).min(x),
                };
                geometry.profile_units(d)
            }
        }
    }

    /// Height profile along one edge.
    ///
    /// Profiles along north/south edges are parametrized by ascending x,
    /// along east/west edges by ascending y, so profiles of tiles facing
    /// each other across an edge are directly comparable.
    pub fn edge_profile(&self, side: Side) -> EdgeProfile {
        let b = self.base_units;
        let top = self.base_units + self.step_count;
        match self.kind {
            TileKind::Flat => EdgeProfile::Flat(b),
            TileKind::StairStraight => match (self.orientation, side) {
                (Orientation::Deg0, Side::East) => EdgeProfile::Flat(top),
                (Orientation::Deg0, Side::West) => EdgeProfile::Flat(b),
                (Orientation::Deg0, _) => EdgeProfile::Asc(b),
                (Orientation::Deg90, Side::North) => EdgeProfile::Flat(top),
                (Orientation::Deg90, Side::South) => EdgeProfile::Flat(b),
                (Orientation::Deg90, _) => EdgeProfile::Asc(b),
                (Orientation::Deg180, Side::West) => EdgeProfile::Flat(top),
                (Orientation::Deg180, Side::East) => EdgeProfile::Flat(b),
                (Orientation::Deg180, _) => EdgeProfile::Desc(b),
                (Orientation::Deg270, Side::South) => EdgeProfile::Flat(top),
                (Orientation::Deg270, Side::North) => EdgeProfile::Flat(b),
                (Orientation::Deg270, _) => EdgeProfile::Desc(b),
            },
            TileKind::StairCorner => match (self.orientation, side) {
                (Orientation::Deg0, Side::West) | (Orientation::Deg0, Side::South) => {
                    EdgeProfile::Flat(b)
                }
                (Orientation::Deg0, _) => EdgeProfile::Asc(b),
                (Orientation::Deg90, Side::South) | (Orientation::Deg90, Side::East) => {
                    EdgeProfile::Flat(b)
                }
                (Orientation::Deg90, Side::West) => EdgeProfile::Asc(b),
                (Orientation::Deg90, Side::North) => EdgeProfile::Desc(b),
                (Orientation::Deg180, Side::East) | (Orientation::Deg180, Side::North) => {
                    EdgeProfile::Flat(b)
                }
                (Orientation::Deg180, _) => EdgeProfile::Desc(b),
                (Orientation::Deg270, Side::North) | (Orientation::Deg270, Side::West) => {
                    EdgeProfile::Flat(b)
                }
                (Orientation::Deg270, Side::East) => EdgeProfile::Desc(b),
                (Orientation::Deg270, Side::South) => EdgeProfile::Asc(b),
            },
        }
    }
}

/// Height profile along one tile edge, in integer step-height units.
///
/// `Flat(b)` is constant at b units. `Asc(b)` rises from b to b + step
/// count along the edge's ascending coordinate; `Desc(b)` is its mirror.
/// Profiles are equal only when they are the same function, so equality
/// is exactly the walkability condition between neighbors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeProfile {
    Flat(u32),
    Asc(u32),
    Desc(u32),
}

/// A tile inventory plus its adjacency relation.
#[derive(Clone, Debug)]
pub struct TileSet {
    pub tiles: Vec<Tile>,
    pub geometry: StairGeometry,
    /// `allowed[side][i]` is a bitmask over tile indices permitted next to
    /// tile `i` across `side`.
    allowed: [Vec<Vec<u64>>; 4],
}

fn side_index(side: Side) -> usize {
    match side {
        Side::North => 0,
        Side::East => 1,
        Side::South => 2,
        Side::West => 3,
    }
}

fn mask_words(len: usize) -> usize {
    len.div_ceil(64)
}

pub(crate) fn mask_set(mask: &mut [u64], bit: usize) {
    mask[bit / 64] |= 1 << (bit % 64);
}

pub(crate) fn mask_get(mask: &[u64], bit: usize) -> bool {
    mask[bit / 64] & (1 << (bit % 64)) != 0
}

impl TileSet {
    /// Enumerate tiles for the geometry and compute adjacency from edge
    /// profile equality.
    pub fn build(geometry: StairGeometry, max_levels: usize) -> Result<Self, TerrainError> {
        geometry.validate()?;
        let mut tiles = Vec::new();
        if geometry.step_height == 0.0 {
            // Degenerate terrain: everything is at elevation zero.
            tiles.push(Tile::flat(0, &geometry));
        } else {
            for level in 0..=max_levels {
                tiles.push(Tile::flat(level as u32 * geometry.step_count, &geometry));
            }
            for kind in [TileKind::StairStraight, TileKind::StairCorner] {
                for orientation in Orientation::ALL {
                    for level in 0..max_levels {
                        tiles.push(Tile::stair(
                            kind,
                            orientation,
                            level as u32 * geometry.step_count,
                            &geometry,
                        ));
                    }
                }
            }
        }

        let words = mask_words(tiles.len());
        let mut allowed: [Vec<Vec<u64>>; 4] =
            std::array::from_fn(|_| vec![vec![0u64; words]; tiles.len()]);
        for side in Side::ALL {
            let s = side_index(side);
            for (i, a) in tiles.iter().enumerate() {
                let profile = a.edge_profile(side);
                for (j, b) in tiles.iter().enumerate() {
                    if b.edge_profile(side.opposite()) == profile {
                        mask_set(&mut allowed[s][i], j);
                    }
                }
            }
        }
        Ok(Self {
            tiles,
            geometry,
            allowed,
        })
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Index of the flat tile at elevation zero.
    pub fn flat_zero(&self) -> usize {
        self.tiles
            .iter()
            .position(|t| t.kind == TileKind::Flat && t.base_units == 0)
            .expect("tileset always contains the level-zero flat")
    }

    /// Whether tile `j` may sit on `side` of tile `i`.
    pub fn compatible(&self, i: usize, side: Side, j: usize) -> bool {
        mask_get(&self.allowed[side_index(side)][i], j)
    }

    pub(crate) fn allowed_mask(&self, i: usize, side: Side) -> &[u64] {
        &self.allowed[side_index(side)][i]
    }

    pub(crate) fn mask_len(&self) -> usize {
        mask_words(self.tiles.len())
    }
}
