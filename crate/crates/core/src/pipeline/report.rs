//! Environment galleries and the markdown report.

use std::fmt::Write as _;

use crate::envset::EnvironmentSet;
use crate::grid::{OccupancyGrid, GRID_SIZE};

const FREE: u8 = 255;
const OCCUPIED: u8 = 0;
const GAP: u8 = 128;

/// Tile layout `(cols, rows)` for `n` grids: `cols = ⌈√n⌉`, `rows = ⌈n / cols⌉`.
pub fn montage_layout(n: usize) -> (usize, usize) {
    if n == 0 {
        return (0, 0);
    }
    let mut cols = (n as f64).sqrt() as usize;
    while cols * cols < n {
        cols += 1;
    }
    (cols, n.div_ceil(cols))
}

/// Plain PGM (maxval 255) of all grids tiled row by row with one-pixel gray
/// gaps. Free cells are white and occupied cells black; `None` for an empty
/// list.
pub fn montage<'a>(grids: impl ExactSizeIterator<Item = &'a OccupancyGrid>) -> Option<String> {
    let n = grids.len();
    let (cols, rows) = montage_layout(n);
    if n == 0 {
        return None;
    }
    let w = cols * GRID_SIZE + cols - 1;
    let h = rows * GRID_SIZE + rows - 1;
    let mut px = vec![GAP; w * h];
    for (i, g) in grids.enumerate() {
        let (tc, tr) = (i % cols, i / cols);
        let (x0, y0) = (tc * (GRID_SIZE + 1), tr * (GRID_SIZE + 1));
        for r in 0..GRID_SIZE {
            // Image rows run top-down; grid row 0 is the bottom.
            let y = y0 + (GRID_SIZE - 1 - r);
            for c in 0..GRID_SIZE {
                px[y * w + x0 + c] = if g.get(c, r) == 1 { OCCUPIED } else { FREE };
            }
        }
    }
    let mut out = format!("P2\n{w} {h}\n255\n");
    for row in px.chunks(w) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Some(out)
}

pub fn set_line(name: &str, set: Option<&EnvironmentSet>) -> String {
    match set {
        None => format!("- {name}: not generated"),
        Some(s) if s.is_empty() => format!("- {name}: 0 environments"),
        Some(s) => {
            let mean_density = s.grids().map(|g| g.density()).sum::<f64>() / s.len() as f64;
            let mut line = format!("- {name}: {} environments, mean occupancy {:.3}", s.len(), mean_density);
            let cbars: Vec<u64> = s.entries.iter().filter_map(|e| e.c_bar).collect();
            if !cbars.is_empty() {
                let _ = write!(
                    line,
                    ", c̄ min {} / max {}",
                    cbars.iter().min().expect("non-empty"),
                    cbars.iter().max().expect("non-empty")
                );
            }
            line
        }
    }
}

/// Render a CSV file as a markdown table.
pub fn csv_table(text: &str) -> String {
    let mut out = String::new();
    for (i, line) in text.lines().filter(|l| !l.is_empty()).enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
        if i == 0 {
            let _ = writeln!(out, "|{}", "---|".repeat(cells.len()));
        }
    }
    out
}
