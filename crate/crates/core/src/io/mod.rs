//! File formats: PLY point clouds, segment text files, `key = value`
//! configs and evaluation/refinement reports.

mod config;
mod ply;
mod report;
mod segments;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use config::{RunConfig, CONFIG_KEYS};
pub use ply::{encode_ply, load_ply, parse_ply, save_ply, PlyCloud, PlyEncoding};
pub use report::{eval_report_json, eval_report_text, refine_report_json, refine_report_text, save_report};
pub use segments::{format_segments, load_segments, parse_segments, save_segments, SegmentFile};

/// Write `bytes` to a temp file beside `path`, then rename over it, so a
/// crash never leaves a truncated artifact behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}
