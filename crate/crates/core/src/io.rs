//! On-disk formats: little-endian binary grids for height fields and
//! elevation grids, CSV matrices, and a text dump of tile layouts.
//!
//! Both binary formats share a 40-byte header: a 4-byte magic, format
//! version (u32), rows (u32), cols (u32), resolution (f64), and the world
//! origin of cell (0,0)'s corner (2 x f64). A height field body is the
//! row-major f32 height plane. An elevation grid body is the mean plane,
//! the variance plane, then a validity bitmap packed LSB-first and padded
//! to whole bytes. Every integer and float is little-endian.

use crate::elevation::ElevationGrid;
use crate::terrain::{HeightField, Tile, TileGrid, TileKind};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

pub const HEIGHT_FIELD_MAGIC: [u8; 4] = *b"PGHF";
pub const ELEVATION_GRID_MAGIC: [u8; 4] = *b"PGEG";
pub const FORMAT_VERSION: u32 = 1;

/// Cells per plane above which a header is assumed corrupt rather than
/// describing a real grid (a square field 10 km on a side at 5 cm).
const MAX_CELLS: u64 = 40_000 * 40_000;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("at byte {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("grid failed validation after read: {0}")]
    Invalid(String),
}

/// A reader that remembers how far it has read, so parse errors can point
/// at the offending byte.
struct Tracked<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Tracked<R> {
    fn new(inner: R) -> Self {
        Self { inner, offset: 0 }
    }

    fn take(&mut self, buf: &mut [u8]) -> Result<(), IoError> {
        let at = self.offset;
        self.inner.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                IoError::Format {
                    offset: at,
                    message: format!("file ends inside a {}-byte read", buf.len()),
                }
            } else {
                IoError::Io(e)
            }
        })?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn u32(&mut self) -> Result<(u32, u64), IoError> {
        let at = self.offset;
        let mut buf = [0u8; 4];
        self.take(&mut buf)?;
        Ok((u32::from_le_bytes(buf), at))
    }

    fn f64(&mut self) -> Result<(f64, u64), IoError> {
        let at = self.offset;
        let mut buf = [0u8; 8];
        self.take(&mut buf)?;
        Ok((f64::from_le_bytes(buf), at))
    }
}

struct GridHeader {
    rows: usize,
    cols: usize,
    resolution: f64,
    origin: (f64, f64),
}

fn write_header<W: Write>(
    w: &mut W,
    magic: [u8; 4],
    rows: usize,
    cols: usize,
    resolution: f64,
    origin: (f64, f64),
) -> Result<(), IoError> {
    w.write_all(&magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(rows as u32).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    w.write_all(&resolution.to_le_bytes())?;
    w.write_all(&origin.0.to_le_bytes())?;
    w.write_all(&origin.1.to_le_bytes())?;
    Ok(())
}

fn read_header<R: Read>(r: &mut Tracked<R>, magic: [u8; 4]) -> Result<GridHeader, IoError> {
    let mut got = [0u8; 4];
    r.take(&mut got)?;
    if got != magic {
        return Err(IoError::Format {
            offset: 0,
            message: format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&got),
                String::from_utf8_lossy(&magic)
            ),
        });
    }
    let (version, at) = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(IoError::Format {
            offset: at,
            message: format!("unsupported format version {version}"),
        });
    }
    let (rows, _) = r.u32()?;
    let (cols, at_cols) = r.u32()?;
    if rows == 0 || cols == 0 || rows as u64 * cols as u64 > MAX_CELLS {
        return Err(IoError::Format {
            offset: at_cols,
            message: format!("implausible grid shape {rows} x {cols}"),
        });
    }
    let (resolution, at_res) = r.f64()?;
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(IoError::Format {
            offset: at_res,
            message: format!("resolution {resolution} is not positive"),
        });
    }
    let (ox, at_ox) = r.f64()?;
    let (oy, at_oy) = r.f64()?;
    if !ox.is_finite() || !oy.is_finite() {
        return Err(IoError::Format {
            offset: if ox.is_finite() { at_oy } else { at_ox },
            message: "origin is not finite".into(),
        });
    }
    Ok(GridHeader {
        rows: rows as usize,
        cols: cols as usize,
        resolution,
        origin: (ox, oy),
    })
}

fn write_plane<W: Write>(w: &mut W, values: &[f32]) -> Result<(), IoError> {
    let mut buf = Vec::with_capacity(values.len() * 4);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_plane<R: Read>(r: &mut Tracked<R>, cells: usize) -> Result<Vec<f32>, IoError> {
    let mut buf = vec![0u8; cells * 4];
    r.take(&mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn write_height_field<W: Write>(field: &HeightField, mut w: W) -> Result<(), IoError> {
    write_header(
        &mut w,
        HEIGHT_FIELD_MAGIC,
        field.rows,
        field.cols,
        field.resolution,
        field.origin,
    )?;
    write_plane(&mut w, &field.heights)
}

pub fn read_height_field<R: Read>(r: R) -> Result<HeightField, IoError> {
    let mut r = Tracked::new(r);
    let header = read_header(&mut r, HEIGHT_FIELD_MAGIC)?;
    let heights = read_plane(&mut r, header.rows * header.cols)?;
    Ok(HeightField {
        rows: header.rows,
        cols: header.cols,
        resolution: header.resolution,
        origin: header.origin,
        heights,
    })
}

pub fn save_height_field<P: AsRef<Path>>(field: &HeightField, path: P) -> Result<(), IoError> {
    write_height_field(field, BufWriter::new(File::create(path)?))
}

pub fn load_height_field<P: AsRef<Path>>(path: P) -> Result<HeightField, IoError> {
    read_height_field(BufReader::new(File::open(path)?))
}

/// Pack a validity mask LSB-first: cell `i` lands in bit `i % 8` of byte
/// `i / 8`; the last byte is zero-padded.
fn pack_validity(valid: &[bool]) -> Vec<u8> {
    let mut bytes = vec![0u8; valid.len().div_ceil(8)];
    for (i, &v) in valid.iter().enumerate() {
        if v {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    bytes
}

pub fn write_elevation_grid<W: Write>(grid: &ElevationGrid, mut w: W) -> Result<(), IoError> {
    write_header(
        &mut w,
        ELEVATION_GRID_MAGIC,
        grid.rows,
        grid.cols,
        grid.resolution,
        grid.origin,
    )?;
    write_plane(&mut w, &grid.means)?;
    write_plane(&mut w, &grid.variances)?;
    w.write_all(&pack_validity(&grid.valid))?;
    Ok(())
}

pub fn read_elevation_grid<R: Read>(r: R) -> Result<ElevationGrid, IoError> {
    let mut r = Tracked::new(r);
    let header = read_header(&mut r, ELEVATION_GRID_MAGIC)?;
    let cells = header.rows * header.cols;
    let means = read_plane(&mut r, cells)?;
    let variances = read_plane(&mut r, cells)?;
    let mut bytes = vec![0u8; cells.div_ceil(8)];
    r.take(&mut bytes)?;
    let valid = (0..cells)
        .map(|i| bytes[i / 8] >> (i % 8) & 1 == 1)
        .collect();
    let grid = ElevationGrid {
        rows: header.rows,
        cols: header.cols,
        resolution: header.resolution,
        origin: header.origin,
        means,
        variances,
        valid,
    };
    grid.validate()
        .map_err(|e| IoError::Invalid(e.to_string()))?;
    Ok(grid)
}

pub fn save_elevation_grid<P: AsRef<Path>>(grid: &ElevationGrid, path: P) -> Result<(), IoError> {
    write_elevation_grid(grid, BufWriter::new(File::create(path)?))
}

pub fn load_elevation_grid<P: AsRef<Path>>(path: P) -> Result<ElevationGrid, IoError> {
    read_elevation_grid(BufReader::new(File::open(path)?))
}

/// One CSV line per grid row, heights printed so they parse back to the
/// same f32 bit for bit.
pub fn write_height_field_csv<W: Write>(field: &HeightField, mut w: W) -> Result<(), IoError> {
    for row in 0..field.rows {
        let mut line = String::new();
        for col in 0..field.cols {
            if col > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", field.height_at_cell(row, col) as f32));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn tile_code(tile: &Tile) -> String {
    let kind = match tile.kind {
        TileKind::Flat => "flat",
        TileKind::StairStraight => "stair",
        TileKind::StairCorner => "corner",
    };
    let quarter_turns = tile.orientation as usize;
    format!(
        "{kind} rot={} base={} steps={}",
        quarter_turns * 90,
        tile.base_units,
        tile.step_count
    )
}

/// Human-readable layout dump: one header line, then one line per tile,
/// south row first, west to east.
pub fn write_tile_grid_text<W: Write>(grid: &TileGrid, mut w: W) -> Result<(), IoError> {
    writeln!(
        w,
        "tile_grid seed={} half_size={} tile_size={} step_height={}",
        grid.seed, grid.half_size, grid.tile_size, grid.cells[0].step_height
    )?;
    let side = grid.side();
    for row in 0..side {
        for col in 0..side {
            writeln!(w, "({row},{col}) {}", tile_code(grid.tile(row, col)))?;
        }
    }
    Ok(())
}
