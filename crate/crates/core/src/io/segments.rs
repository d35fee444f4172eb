//! Plain-text segment files: one `ax ay az bx by bz` record per line, in
//! meters. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::geom::{Point3, Segment};
use crate::scalar::Scalar;

use super::{read_file, write_atomic};

#[derive(Debug, Clone)]
pub struct SegmentFile<T> {
    pub segments: Vec<Segment<T>>,
    /// Records dropped because their endpoints coincide.
    pub skipped_degenerate: usize,
}

pub fn parse_segments<T: Scalar>(text: &str, origin: &str) -> Result<SegmentFile<T>> {
    let mut segments = Vec::new();
    let mut skipped = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |reason: String| Error::Parse { path: origin.to_string(), line: i + 1, reason };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(fail(format!("expected 6 fields, found {}", fields.len())));
        }
        let mut v = [T::zero(); 6];
        for (slot, f) in v.iter_mut().zip(&fields) {
            let x: T = f.parse().map_err(|_| fail(format!("`{f}` is not a number")))?;
            if !x.is_finite() {
                return Err(fail(format!("non-finite value `{f}`")));
            }
            *slot = x;
        }
        let a = Point3::new(v[0], v[1], v[2]);
        let b = Point3::new(v[3], v[4], v[5]);
        match Segment::new(a, b) {
            Ok(s) => segments.push(s),
            Err(_) => skipped += 1,
        }
    }
    if skipped > 0 {
        warn!("{origin}: skipped {skipped} zero-length segment(s)");
    }
    Ok(SegmentFile { segments, skipped_degenerate: skipped })
}

pub fn load_segments<T: Scalar>(path: impl AsRef<Path>) -> Result<SegmentFile<T>> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let text = String::from_utf8_lossy(&bytes);
    parse_segments(&text, &path.display().to_string())
}

/// Shortest round-trip decimal rendering, one segment per line.
pub fn format_segments<T: Scalar>(segments: &[Segment<T>]) -> String {
    let mut out = String::with_capacity(segments.len() * 64);
    for s in segments {
        let (a, b) = (s.a(), s.b());
        let _ = writeln!(out, "{} {} {} {} {} {}", a.x, a.y, a.z, b.x, b.y, b.z);
    }
    out
}

pub fn save_segments<T: Scalar>(segments: &[Segment<T>], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_segments(segments).as_bytes())
}
