//! Ordered environment collections and their directory format.
//!
//! A set directory contains `set.json` (`{"kind": "...", "count": N}`),
//! `manifest.csv`, and for every entry `<id>.pgm` and `<id>.txt` (the
//! PGM and 900-character line encodings from [`crate::grid`]). Manifest
//! columns, in order:
//!
//! `id,kind,c_bar,provenance,source,source_index,initial_index,final_index,cluster`
//!
//! `provenance` is one of `extracted`, `gan`, `pca`, `pca-original`, `rs`.
//! Columns that do not apply to a provenance are left empty.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OccupancyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Raw,
    Challenging,
    Synthesized,
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetKind::Raw => "raw",
            SetKind::Challenging => "challenging",
            SetKind::Synthesized => "synthesized",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Reconstructed from steps `initial..=final` of a deployment trace.
    Extracted {
        trajectory: String,
        initial_index: usize,
        final_index: usize,
    },
    /// The `draw`-th accepted generator sample.
    Generated { draw: usize },
    /// Cluster representative; `reconstructed` is false when the original grid
    /// replaced a degenerate reconstruction.
    Representative {
        source_id: String,
        source_index: usize,
        cluster: usize,
        reconstructed: bool,
    },
    /// Uniform draw from a source set.
    Sampled {
        source_id: String,
        source_index: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvEntry {
    pub id: String,
    pub grid: OccupancyGrid,
    /// Suboptimal-behavior total of the scenario behind this grid, when known.
    pub c_bar: Option<u64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSet {
    pub kind: SetKind,
    pub entries: Vec<EnvEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SetMeta {
    kind: SetKind,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    id: String,
    kind: SetKind,
    c_bar: Option<u64>,
    provenance: String,
    source: Option<String>,
    source_index: Option<usize>,
    initial_index: Option<usize>,
    final_index: Option<usize>,
    cluster: Option<usize>,
}

impl EnvironmentSet {
    pub fn new(kind: SetKind) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grids(&self) -> impl Iterator<Item = &OccupancyGrid> {
        self.entries.iter().map(|e| &e.grid)
    }

    fn row(&self, e: &EnvEntry) -> ManifestRow {
        let mut row = ManifestRow {
            id: e.id.clone(),
            kind: self.kind,
            c_bar: e.c_bar,
            provenance: String::new(),
            source: None,
            source_index: None,
            initial_index: None,
            final_index: None,
            cluster: None,
        };
        match &e.provenance {
            Provenance::Extracted {
                trajectory,
                initial_index,
                final_index,
            } => {
                row.provenance = "extracted".into();
                row.source = Some(trajectory.clone());
                row.initial_index = Some(*initial_index);
                row.final_index = Some(*final_index);
            }
            Provenance::Generated { draw } => {
                row.provenance = "gan".into();
                row.source_index = Some(*draw);
            }
            Provenance::Representative {
                source_id,
                source_index,
                cluster,
                reconstructed,
            } => {
                row.provenance = if *reconstructed { "pca" } else { "pca-original" }.into();
                row.source = Some(source_id.clone());
                row.source_index = Some(*source_index);
                row.cluster = Some(*cluster);
            }
            Provenance::Sampled {
                source_id,
                source_index,
            } => {
                row.provenance = "rs".into();
                row.source = Some(source_id.clone());
                row.source_index = Some(*source_index);
            }
        }
        row
    }

    pub fn manifest_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.entries.is_empty() {
            w.write_record([
                "id",
                "kind",
                "c_bar",
                "provenance",
                "source",
                "source_index",
                "initial_index",
                "final_index",
                "cluster",
            ])
            .expect("in-memory write");
        }
        for e in &self.entries {
            w.serialize(self.row(e)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8 csv")
    }

    /// Write the set into `dir`, replacing a previous set written there.
    pub fn save(&self, dir: &Path) -> Result<()> {
        prepare_set_dir(dir)?;
        let meta = SetMeta {
            kind: self.kind,
            count: self.entries.len(),
        };
        write_file(
            &dir.join("set.json"),
            serde_json::to_string_pretty(&meta).expect("meta") + "\n",
        )?;
        write_file(&dir.join("manifest.csv"), self.manifest_csv())?;
        for e in &self.entries {
            write_file(&dir.join(format!("{}.pgm", e.id)), e.grid.to_pgm())?;
            write_file(&dir.join(format!("{}.txt", e.id)), e.grid.to_line())?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("set.json");
        let meta_text =
            std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: SetMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Parse {
            path: meta_path.clone(),
            line: 1,
            message: e.to_string(),
        })?;
        let manifest = dir.join("manifest.csv");
        let mut rdr = csv::Reader::from_path(&manifest).map_err(|e| Error::Parse {
            path: manifest.clone(),
            line: 1,
            message: e.to_string(),
        })?;
        let mut entries = Vec::new();
        for (i, row) in rdr.deserialize::<ManifestRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::Parse {
                path: manifest.clone(),
                line,
                message: e.to_string(),
            })?;
            let bad = |m: &str| Error::Parse {
                path: manifest.clone(),
                line,
                message: m.to_string(),
            };
            let provenance = match row.provenance.as_str() {
                "extracted" => Provenance::Extracted {
                    trajectory: row.source.clone().ok_or_else(|| bad("missing source"))?,
                    initial_index: row.initial_index.ok_or_else(|| bad("missing initial_index"))?,
                    final_index: row.final_index.ok_or_else(|| bad("missing final_index"))?,
                },
                "gan" => Provenance::Generated {
                    draw: row.source_index.ok_or_else(|| bad("missing source_index"))?,
                },
                p @ ("pca" | "pca-original") => Provenance::Representative {
                    source_id: row.source.clone().ok_or_else(|| bad("missing source"))?,
                    source_index: row.source_index.ok_or_else(|| bad("missing source_index"))?,
                    cluster: row.cluster.ok_or_else(|| bad("missing cluster"))?,
                    reconstructed: p == "pca",
                },
                "rs" => Provenance::Sampled {
                    source_id: row.source.clone().ok_or_else(|| bad("missing source"))?,
                    source_index: row.source_index.ok_or_else(|| bad("missing source_index"))?,
                },
                other => return Err(bad(&format!("unknown provenance {other:?}"))),
            };
            let grid = OccupancyGrid::read_line_file(&dir.join(format!("{}.txt", row.id)))?;
            entries.push(EnvEntry {
                id: row.id,
                grid,
                c_bar: row.c_bar,
                provenance,
            });
        }
        if entries.len() != meta.count {
            return Err(Error::Value(format!(
                "{}: set.json says {} entries, manifest has {}",
                dir.display(),
                meta.count,
                entries.len()
            )));
        }
        Ok(Self {
            kind: meta.kind,
            entries,
        })
    }
}

fn write_file(path: &Path, contents: String) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Create `dir`, or clear it if it already holds a set. Refuses to clear a
/// non-empty directory that is not a set.
fn prepare_set_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let mut listing = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let non_empty = listing.next().is_some();
        if non_empty && !dir.join("set.json").exists() {
            return Err(Error::config(format!(
                "{} exists and is not an environment set directory",
                dir.display()
            )));
        }
        std::fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
