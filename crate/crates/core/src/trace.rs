//! Deployment traces and their JSON-lines file format.
//!
//! A trace file holds one trajectory. Line 1 is a header object:
//!
//! ```text
//! {"deployment_id":"map-a/3","map_id":"map-a","beam_count":360,"max_range":10.0}
//! ```
//!
//! Every following non-empty line is one step:
//!
//! ```text
//! {"scan":[...],"x":1.25,"y":0.5,"theta":1.5707963267948966,"suboptimal":0}
//! ```
//!
//! `scan[i]` is the range of the beam at heading `theta - π + i·2π/beam_count`
//! in meters, clamped to `max_range` (a reading equal to `max_range` means no
//! return). `suboptimal` is 1 when the commanded linear velocity at that step
//! was negative.

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclidean, Pose};

/// Upper bound on the distance between consecutive recorded poses, in meters.
pub const MAX_STEP_DISPLACEMENT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub scan: Vec<f64>,
    pub pose: Pose,
    pub suboptimal: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub deployment_id: String,
    pub map_id: String,
    pub beam_count: usize,
    pub max_range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub header: TraceHeader,
    pub steps: Vec<StepRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepLine {
    scan: Vec<f64>,
    x: f64,
    y: f64,
    theta: f64,
    suboptimal: u8,
}

/// Heading of beam `i` relative to the robot.
pub fn beam_offset(i: usize, beam_count: usize) -> f64 {
    -PI + i as f64 * (2.0 * PI / beam_count as f64)
}

impl Trajectory {
    pub fn new(header: TraceHeader, steps: Vec<StepRecord>) -> Result<Self> {
        let t = Self { header, steps };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn suboptimal_total(&self) -> u64 {
        self.steps.iter().map(|s| u64::from(s.suboptimal)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        if self.steps.is_empty() {
            return Err(Error::contract("trajectory has no steps"));
        }
        if h.beam_count == 0 || !(h.max_range > 0.0) {
            return Err(Error::Value(format!(
                "bad trace header: beam_count {} max_range {}",
                h.beam_count, h.max_range
            )));
        }
        for (k, step) in self.steps.iter().enumerate() {
            validate_step(step, h).map_err(|m| Error::Value(format!("step {k}: {m}")))?;
            if k > 0 {
                let d = euclidean(&self.steps[k - 1].pose, &step.pose);
                if d >= MAX_STEP_DISPLACEMENT {
                    return Err(Error::Value(format!(
                        "step {k}: pose jumped {d:.3} m from the previous step"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for s in &self.steps {
            let line = StepLine {
                scan: s.scan.clone(),
                x: s.pose.x,
                y: s.pose.y,
                theta: s.pose.theta,
                suboptimal: s.suboptimal,
            };
            out.push_str(&serde_json::to_string(&line).expect("step serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    /// Parse a trace; errors carry the 1-based line number.
    pub fn read(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(f), path)
    }

    pub fn from_reader<R: BufRead>(reader: R, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut header: Option<TraceHeader> = None;
        let mut steps = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match &header {
                None => {
                    let h: TraceHeader = serde_json::from_str(&line)
                        .map_err(|e| parse_err(lineno, format!("bad header: {e}")))?;
                    if h.beam_count == 0 || !(h.max_range > 0.0) {
                        return Err(parse_err(lineno, "header needs beam_count > 0 and max_range > 0".into()));
                    }
                    header = Some(h);
                }
                Some(h) => {
                    let s: StepLine = serde_json::from_str(&line)
                        .map_err(|e| parse_err(lineno, e.to_string()))?;
                    let step = StepRecord {
                        scan: s.scan,
                        pose: Pose::new(s.x, s.y, s.theta),
                        suboptimal: s.suboptimal,
                    };
                    validate_step(&step, h).map_err(|m| parse_err(lineno, m))?;
                    if let Some(prev) = steps.last() {
                        let prev: &StepRecord = prev;
                        let d = euclidean(&prev.pose, &step.pose);
                        if d >= MAX_STEP_DISPLACEMENT {
                            return Err(parse_err(lineno, format!("pose jumped {d:.3} m")));
                        }
                    }
                    steps.push(step);
                }
            }
        }
        let header = header.ok_or_else(|| parse_err(1, "missing header line".into()))?;
        if steps.is_empty() {
            return Err(parse_err(2, "trace has no steps".into()));
        }
        Ok(Self { header, steps })
    }
}

fn validate_step(step: &StepRecord, h: &TraceHeader) -> std::result::Result<(), String> {
    if step.scan.len() != h.beam_count {
        return Err(format!(
            "scan has {} beams, header says {}",
            step.scan.len(),
            h.beam_count
        ));
    }
    if let Some(r) = step
        .scan
        .iter()
        .find(|r| !(r.is_finite() && **r >= 0.0 && **r <= h.max_range))
    {
        return Err(format!("range {r} outside [0, {}]", h.max_range));
    }
    if !step.pose.is_finite() {
        return Err("non-finite pose".into());
    }
    if step.suboptimal > 1 {
        return Err(format!("suboptimal flag {} is not 0/1", step.suboptimal));
    }
    Ok(())
}
