//! The 30×30 scenario occupancy grid and its two file formats.
//!
//! Coordinates: `row` 0 is the bottom edge (start side) and row 29 the top
//! edge (goal side); `col` 0 is the left edge. Each cell covers
//! [`GRID_RESOLUTION`] meters of a [`GRID_EXTENT`]-meter square, so cell
//! `(col, row)` spans `x ∈ [col·res, (col+1)·res)`, `y ∈ [row·res, (row+1)·res)`.
//!
//! **Line format.** One line of exactly 900 ASCII characters `'0'`/`'1'`
//! followed by `'\n'`. Character `r*30 + c` is the cell at row `r`, column
//! `c` (row-major starting at the bottom row), identical to
//! [`OccupancyGrid::to_bitvector`].
//!
//! **PGM format.** Plain PGM: `P2\n30 30\n1\n` followed by 30 lines of 30
//! space-separated values, `1` = occupied and `0` = free. Image rows run top
//! to bottom, so the first pixel line is grid row 29 and the last is row 0.
//! The reader accepts any whitespace layout and `#` comments as allowed by
//! the PGM grammar, but requires maxval 1.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

pub const GRID_SIZE: usize = 30;
pub const GRID_CELLS: usize = GRID_SIZE * GRID_SIZE;
pub const GRID_EXTENT: f64 = 5.0;
pub const GRID_RESOLUTION: f64 = GRID_EXTENT / GRID_SIZE as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

pub const START_CELL: Cell = Cell::new(GRID_SIZE / 2, 0);
pub const GOAL_CELL: Cell = Cell::new(GRID_SIZE / 2, GRID_SIZE - 1);

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OccupancyGrid {
    cells: Box<[u8; GRID_CELLS]>,
}

impl fmt::Debug for OccupancyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OccupancyGrid {{")?;
        for row in (0..GRID_SIZE).rev() {
            let line: String = (0..GRID_SIZE)
                .map(|col| if self.get(col, row) == 1 { '#' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        write!(f, "}}")
    }
}

impl OccupancyGrid {
    pub fn empty() -> Self {
        Self {
            cells: Box::new([0; GRID_CELLS]),
        }
    }

    /// Build from a 30×30 matrix given as rows (row 0 = bottom). The start and
    /// goal cells are cleared even if the input marks them occupied.
    pub fn from_cells<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        if rows.len() != GRID_SIZE {
            return Err(Error::Dimension {
                expected: format!("{GRID_SIZE} rows"),
                found: format!("{} rows", rows.len()),
            });
        }
        let mut cells = Box::new([0u8; GRID_CELLS]);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != GRID_SIZE {
                return Err(Error::Dimension {
                    expected: format!("{GRID_SIZE} columns"),
                    found: format!("{} columns in row {r}", row.len()),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::Value(format!(
                        "cell (col {c}, row {r}) has value {v}, expected 0 or 1"
                    )));
                }
                cells[r * GRID_SIZE + c] = v;
            }
        }
        Ok(Self::with_endpoints_cleared(cells))
    }

    /// Inverse of [`to_bitvector`](Self::to_bitvector).
    pub fn from_bitvector(bits: &[u8]) -> Result<Self> {
        if bits.len() != GRID_CELLS {
            return Err(Error::Dimension {
                expected: format!("{GRID_CELLS} elements"),
                found: format!("{} elements", bits.len()),
            });
        }
        let mut cells = Box::new([0u8; GRID_CELLS]);
        for (i, &v) in bits.iter().enumerate() {
            if v > 1 {
                return Err(Error::Value(format!(
                    "element {i} has value {v}, expected 0 or 1"
                )));
            }
            cells[i] = v;
        }
        Ok(Self::with_endpoints_cleared(cells))
    }

    /// Threshold a real-valued 900-vector: values strictly above `threshold`
    /// become occupied.
    pub fn from_scores(scores: &[f64], threshold: f64) -> Result<Self> {
        let bits: Vec<u8> = scores.iter().map(|&s| u8::from(s > threshold)).collect();
        Self::from_bitvector(&bits)
    }

    fn with_endpoints_cleared(mut cells: Box<[u8; GRID_CELLS]>) -> Self {
        cells[index(START_CELL)] = 0;
        cells[index(GOAL_CELL)] = 0;
        Self { cells }
    }

    /// Row-major flattening starting at the bottom row.
    pub fn to_bitvector(&self) -> Vec<u8> {
        self.cells.to_vec()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.cells[..]
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.cells[row * GRID_SIZE + col]
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.cells[index(cell)] == 1
    }

    pub fn start_cell(&self) -> Cell {
        START_CELL
    }

    pub fn goal_cell(&self) -> Cell {
        GOAL_CELL
    }

    pub fn resolution(&self) -> f64 {
        GRID_RESOLUTION
    }

    pub fn extent(&self) -> f64 {
        GRID_EXTENT
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v == 1).count()
    }

    /// Fraction of occupied cells.
    pub fn density(&self) -> f64 {
        self.occupied_count() as f64 / GRID_CELLS as f64
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.cells
            .iter()
            .zip(other.cells.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Encoding used for GAN training: free → -1, occupied → +1.
    pub fn to_signed(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|&v| if v == 1 { 1.0 } else { -1.0 })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.cells.iter().map(|&v| f64::from(v)).collect()
    }

    pub fn to_line(&self) -> String {
        let mut s: String = self
            .cells
            .iter()
            .map(|&v| if v == 1 { '1' } else { '0' })
            .collect();
        s.push('\n');
        s
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let body = line.strip_suffix('\n').unwrap_or(line);
        let body = body.strip_suffix('\r').unwrap_or(body);
        if body.len() != GRID_CELLS {
            return Err(Error::Dimension {
                expected: format!("{GRID_CELLS} characters"),
                found: format!("{} characters", body.len()),
            });
        }
        let bits = body
            .bytes()
            .enumerate()
            .map(|(i, b)| match b {
                b'0' => Ok(0),
                b'1' => Ok(1),
                other => Err(Error::Value(format!(
                    "character {i} is {:?}, expected '0' or '1'",
                    other as char
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bitvector(&bits)
    }

    pub fn to_pgm(&self) -> String {
        let mut s = format!("P2\n{GRID_SIZE} {GRID_SIZE}\n1\n");
        for row in (0..GRID_SIZE).rev() {
            let line: Vec<&str> = (0..GRID_SIZE)
                .map(|col| if self.get(col, row) == 1 { "1" } else { "0" })
                .collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse_pgm(text: &str) -> Result<Self> {
        let img = Pgm::parse(text)?;
        if img.width != GRID_SIZE || img.height != GRID_SIZE {
            return Err(Error::Dimension {
                expected: format!("{GRID_SIZE}x{GRID_SIZE} image"),
                found: format!("{}x{} image", img.width, img.height),
            });
        }
        if img.maxval != 1 {
            return Err(Error::Value(format!(
                "grid PGM must have maxval 1, found {}",
                img.maxval
            )));
        }
        let rows: Vec<Vec<u8>> = (0..GRID_SIZE)
            .map(|row| {
                let image_row = GRID_SIZE - 1 - row;
                img.pixels[image_row * GRID_SIZE..(image_row + 1) * GRID_SIZE]
                    .iter()
                    .map(|&v| v as u8)
                    .collect()
            })
            .collect();
        Self::from_cells(&rows)
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_pgm(&text).map_err(|e| annotate(path, e))
    }

    pub fn read_line_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_line(&text).map_err(|e| annotate(path, e))
    }
}

fn annotate(path: &Path, e: Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    }
}

fn index(cell: Cell) -> usize {
    cell.row * GRID_SIZE + cell.col
}

/// Minimal plain/binary PGM (P2/P5) reader. Pixels are in image order (top row first).
#[derive(Debug, Clone)]
pub(crate) struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub pixels: Vec<u32>,
}

impl Pgm {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_bytes(text.as_bytes())
    }

    pub fn parse_bytes(data: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut token = |data: &[u8]| -> Result<String> {
            loop {
                while pos < data.len() && data[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < data.len() && data[pos] == b'#' {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < data.len() && !data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Value("truncated PGM".into()));
            }
            Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
        };
        let magic = token(data)?;
        let num = |s: String| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Value(format!("bad PGM number {s:?}")))
        };
        let width = num(token(data)?)?;
        let height = num(token(data)?)?;
        let maxval = num(token(data)?)? as u32;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Value(format!("bad PGM maxval {maxval}")));
        }
        let count = width * height;
        let mut pixels = Vec::with_capacity(count);
        match magic.as_str() {
            "P2" => {
                for _ in 0..count {
                    let v = num(token(data)?)? as u32;
                    if v > maxval {
                        return Err(Error::Value(format!(
                            "PGM pixel {v} exceeds maxval {maxval}"
                        )));
                    }
                    pixels.push(v);
                }
            }
            "P5" => {
                // Exactly one whitespace byte separates the header from the raster.
                let raster = &data[(pos + 1).min(data.len())..];
                let wide = maxval > 255;
                let needed = count * if wide { 2 } else { 1 };
                if raster.len() < needed {
                    return Err(Error::Value("truncated PGM raster".into()));
                }
                for i in 0..count {
                    let v = if wide {
                        u32::from(u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]))
                    } else {
                        u32::from(raster[i])
                    };
                    pixels.push(v.min(maxval));
                }
            }
            other => return Err(Error::Value(format!("unsupported PGM magic {other:?}"))),
        }
        Ok(Self {
            width,
            height,
            maxval,
            pixels,
        })
    }
}
