//! Constraint-collapse placement of tiles onto the terrain grid.
//!
//! Classic minimum-entropy collapse: repeatedly pick the undecided cell
//! with the fewest remaining candidates (ties broken by the RNG), fix one
//! candidate at random, and propagate the adjacency constraints until a
//! fixpoint. A contradiction restarts the whole grid with a fresh
//! substream of the seed; the restart budget is small because 5x5 grids
//! with this tileset almost never contradict.

use super::tile::{mask_set, Side, Tile, TileSet};
use super::TerrainError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// A fully collapsed tile grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileGrid {
    /// Grid half-size N; the grid is (2N+1) tiles on a side.
    pub half_size: usize,
    /// Seed the grid was generated from.
    pub seed: u64,
    /// Tile side length in metres.
    pub tile_size: f64,
    /// Row-major cells; row 0 is the southernmost row, column 0 the
    /// westernmost column.
    pub cells: Vec<Tile>,
}

impl TileGrid {
    /// Tiles per side, `2N + 1`.
    pub fn side(&self) -> usize {
        2 * self.half_size + 1
    }

    pub fn tile(&self, row: usize, col: usize) -> &Tile {
        &self.cells[row * self.side() + col]
    }

    /// The center tile, where the robot spawns.
    pub fn center(&self) -> &Tile {
        self.tile(self.half_size, self.half_size)
    }
}

struct Domains {
    masks: Vec<Vec<u64>>,
    counts: Vec<u32>,
    words: usize,
}

impl Domains {
    fn full(cells: usize, tiles: usize, words: usize) -> Self {
        let mut mask = vec![0u64; words];
        for t in 0..tiles {
            mask_set(&mut mask, t);
        }
        Self {
            masks: vec![mask; cells],
            counts: vec![tiles as u32; cells],
            words,
        }
    }

    fn collapse_to(&mut self, cell: usize, tile: usize) {
        let mask = &mut self.masks[cell];
        mask.iter_mut().for_each(|w| *w = 0);
        mask_set(mask, tile);
        self.counts[cell] = 1;
    }

    /// Intersect a cell's domain with `mask`; reports whether it changed
    /// and whether it is now empty.
    fn restrict(&mut self, cell: usize, mask: &[u64]) -> (bool, bool) {
        let mut changed = false;
        let mut count = 0u32;
        let own = &mut self.masks[cell];
        for (w, &m) in own.iter_mut().zip(mask) {
            let next = *w & m;
            if next != *w {
                changed = true;
            }
            *w = next;
            count += next.count_ones();
        }
        self.counts[cell] = count;
        (changed, count == 0)
    }

    fn nth_candidate(&self, cell: usize, n: u32) -> usize {
        let mut remaining = n;
        for (w, word) in self.masks[cell].iter().enumerate() {
            let ones = word.count_ones();
            if remaining < ones {
                let mut bits = *word;
                for _ in 0..remaining {
                    bits &= bits - 1;
                }
                return w * 64 + bits.trailing_zeros() as usize;
            }
            remaining -= ones;
        }
        unreachable!("candidate index out of range");
    }
}

struct Contradiction;

/// Collapse a `(2N+1)²` grid from the tileset. The center cell is pinned
/// to the flat tile at elevation zero before anything else is decided.
/// Deterministic for a given seed.
pub fn wfc_generate(
    tileset: &TileSet,
    half_size: usize,
    seed: u64,
    max_restarts: u32,
) -> Result<TileGrid, TerrainError> {
    let side = 2 * half_size + 1;
    let mut attempts = 0;
    for attempt in 0..=max_restarts {
        attempts = attempt + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64 + 1);
        match try_collapse(tileset, side, half_size, &mut rng) {
            Ok(indices) => {
                let cells = indices
                    .into_iter()
                    .map(|idx| tileset.tiles[idx].clone())
                    .collect();
                return Ok(TileGrid {
                    half_size,
                    seed,
                    tile_size: tileset.geometry.tile_size,
                    cells,
                });
            }
            Err(Contradiction) => continue,
        }
    }
    Err(TerrainError::GenerationFailed { seed, attempts })
}

fn try_collapse(
    tileset: &TileSet,
    side: usize,
    half_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>, Contradiction> {
    let cells = side * side;
    let tiles = tileset.len();
    let words = tileset.mask_len();
    let mut domains = Domains::full(cells, tiles, words);

    let center = half_size * side + half_size;
    domains.collapse_to(center, tileset.flat_zero());
    propagate(tileset, side, &mut domains, center)?;

    loop {
        // Minimum-entropy cell, ties broken by the RNG.
        let mut best = u32::MAX;
        let mut tied: Vec<usize> = Vec::new();
        for (cell, &count) in domains.counts.iter().enumerate() {
            if count > 1 {
                if count < best {
                    best = count;
                    tied.clear();
                    tied.push(cell);
                } else if count == best {
                    tied.push(cell);
                }
            }
        }
        if tied.is_empty() {
            return Ok((0..cells)
                .map(|cell| domains.nth_candidate(cell, 0))
                .collect());
        }
        let cell = tied[rng.random_range(0..tied.len())];
        let pick = rng.random_range(0..domains.counts[cell]);
        let tile = domains.nth_candidate(cell, pick);
        domains.collapse_to(cell, tile);
        propagate(tileset, side, &mut domains, cell)?;
    }
}

/// Arc-consistency sweep from `start`: each neighbor's domain is cut to
/// the union of tiles allowed by the source cell's remaining candidates.
fn propagate(
    tileset: &TileSet,
    side: usize,
    domains: &mut Domains,
    start: usize,
) -> Result<(), Contradiction> {
    let words = domains.words;
    let mut queue = VecDeque::from([start]);
    let mut union = vec![0u64; words];
    while let Some(cell) = queue.pop_front() {
        let row = cell / side;
        let col = cell % side;
        let neighbors = [
            (Side::North, row + 1 < side, (row + 1) * side + col),
            (Side::South, row > 0, cell.wrapping_sub(side)),
            (Side::East, col + 1 < side, cell + 1),
            (Side::West, col > 0, cell.wrapping_sub(1)),
        ];
        for (direction, in_bounds, neighbor) in neighbors {
            if !in_bounds {
                continue;
            }
            union.iter_mut().for_each(|w| *w = 0);
            for word in 0..words {
                let mut bits = domains.masks[cell][word];
                while bits != 0 {
                    let tile = word * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for (u, &m) in union.iter_mut().zip(tileset.allowed_mask(tile, direction)) {
                        *u |= m;
                    }
                }
            }
            let (changed, empty) = domains.restrict(neighbor, &union);
            if empty {
                return Err(Contradiction);
            }
            if changed {
                queue.push_back(neighbor);
            }
        }
    }
    Ok(())
}
