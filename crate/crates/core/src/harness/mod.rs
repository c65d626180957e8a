//! Experiment configuration, persisted runs, and the verification battery.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub mod config;
pub mod record;
pub mod run;
pub mod verify;

pub use config::{grid, parse_grid, Caps, Experiment, ExperimentConfig, Format};
pub use record::{ColumnSummary, RunRecord, SCHEMA};
pub use run::{run, run_and_write, with_workers};
pub use verify::{run_criterion, verify, CriterionResult, Scale, Suite, VerifyOptions, VerifyReport, CRITERIA};

/// Writes `body` to `path` through a temporary file in the same directory,
/// so the target is either absent, the old file, or the complete new one.
pub fn write_atomic(path: &Path, body: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(body).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
