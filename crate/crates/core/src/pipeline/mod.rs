//! End-to-end orchestration: deploy → extract → synthesize → evaluate → report.
//!
//! Each stage writes its outputs under the workspace root and a stamp in
//! `.envsynth/stamps/` keyed by a hash of its settings and input files. A
//! rerun with the same key skips the stage; a changed key is an error unless
//! `--force` is given.

pub mod cache;
pub mod config;
pub mod lock;
pub mod report;
pub mod similarity;
pub mod stages;

pub use config::{parse_candidates, Method, PipelineConfig};
pub use lock::WorkspaceLock;
pub use similarity::{similarity, SimilarityReport};
pub use stages::{
    cmd_deploy, cmd_evaluate, cmd_extract, cmd_report, cmd_run_all, cmd_synthesize, StageOutcome, StageStatus,
    Workspace,
};
