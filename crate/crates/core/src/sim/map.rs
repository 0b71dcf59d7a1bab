use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Cell, OccupancyGrid, Pgm, GRID_RESOLUTION, GRID_SIZE};

/// Binary occupancy map of arbitrary size. Row 0 is the bottom edge; cell
/// `(col, row)` covers `[col·res, (col+1)·res) × [row·res, (row+1)·res)`.
/// Everything outside the map counts as occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub id: String,
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<u8>,
}

impl WorldMap {
    /// `cells` is row-major starting at the bottom row.
    pub fn new(id: impl Into<String>, width: usize, height: usize, resolution: f64, cells: Vec<u8>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::Dimension {
                expected: "at least 2×2 cells".into(),
                found: format!("{width}×{height}"),
            });
        }
        if cells.len() != width * height {
            return Err(Error::Dimension {
                expected: format!("{} cells", width * height),
                found: cells.len().to_string(),
            });
        }
        if let Some(v) = cells.iter().find(|&&v| v > 1) {
            return Err(Error::Value(format!("map cell value {v} is not binary")));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Value(format!("map resolution {resolution} must be positive")));
        }
        Ok(Self {
            id: id.into(),
            width,
            height,
            resolution,
            cells,
        })
    }

    pub fn empty(id: impl Into<String>, width: usize, height: usize, resolution: f64) -> Result<Self> {
        Self::new(id, width, height, resolution, vec![0; width * height])
    }

    pub fn from_grid(id: impl Into<String>, grid: &OccupancyGrid) -> Self {
        Self::new(id, GRID_SIZE, GRID_SIZE, GRID_RESOLUTION, grid.to_bitvector()).expect("grid is a valid map")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn size_meters(&self) -> (f64, f64) {
        (self.width as f64 * self.resolution, self.height as f64 * self.resolution)
    }

    pub fn in_bounds(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.width && (row as usize) < self.height
    }

    /// Occupancy with out-of-map cells treated as occupied.
    pub fn occupied(&self, col: i64, row: i64) -> bool {
        !self.in_bounds(col, row) || self.cells[row as usize * self.width + col as usize] == 1
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        !self.occupied(cell.col as i64, cell.row as i64)
    }

    pub fn set(&mut self, cell: Cell, value: bool) {
        let i = cell.row * self.width + cell.col;
        self.cells[i] = value as u8;
    }

    /// Integer cell coordinates of a world point (may be out of bounds).
    pub fn cell_coords(&self, x: f64, y: f64) -> (i64, i64) {
        ((x / self.resolution).floor() as i64, (y / self.resolution).floor() as i64)
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let (c, r) = self.cell_coords(x, y);
        self.in_bounds(c, r).then(|| Cell::new(c as usize, r as usize))
    }

    pub fn cell_center(&self, cell: Cell) -> (f64, f64) {
        (
            (cell.col as f64 + 0.5) * self.resolution,
            (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    /// Distance from `(x, y)` to the nearest occupied cell, searching no
    /// farther than `cap`. Returns `cap` if nothing is closer.
    pub fn clearance(&self, x: f64, y: f64, cap: f64) -> f64 {
        let res = self.resolution;
        let (c0, r0) = self.cell_coords(x - cap, y - cap);
        let (c1, r1) = self.cell_coords(x + cap, y + cap);
        let mut best = cap;
        for r in r0..=r1 {
            let ylo = r as f64 * res;
            let dy = (ylo - y).max(0.0).max(y - (ylo + res));
            if dy >= best {
                continue;
            }
            for c in c0..=c1 {
                if !self.occupied(c, r) {
                    continue;
                }
                let xlo = c as f64 * res;
                let dx = (xlo - x).max(0.0).max(x - (xlo + res));
                let d = dx.hypot(dy);
                if d < best {
                    best = d;
                }
            }
        }
        best
    }

    /// True if a disc of `radius` centered at `(x, y)` overlaps an occupied
    /// cell (or leaves the map).
    pub fn disc_collides(&self, x: f64, y: f64, radius: f64) -> bool {
        self.clearance(x, y, radius) < radius
    }

    /// Load a PGM map. With maxval 1 the pixel value is the occupancy; with a
    /// larger maxval pixels darker than half of maxval are occupied.
    pub fn read_pgm(path: &Path, resolution: f64) -> Result<Self> {
        let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let img = Pgm::parse_bytes(&data).map_err(|e| match e {
            Error::Value(m) => Error::Value(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let mut cells = vec![0u8; img.width * img.height];
        for (i, &p) in img.pixels.iter().enumerate() {
            let (row_img, col) = (i / img.width, i % img.width);
            let row = img.height - 1 - row_img;
            let occ = if img.maxval == 1 { p == 1 } else { p * 2 < img.maxval };
            cells[row * img.width + col] = occ as u8;
        }
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "map".into());
        Self::new(id, img.width, img.height, resolution, cells)
    }

    /// Plain PGM with maxval 1, top row first.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n1\n", self.width, self.height);
        for row in (0..self.height).rev() {
            let line: Vec<&str> = (0..self.width)
                .map(|col| if self.cells[row * self.width + col] == 1 { "1" } else { "0" })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}
