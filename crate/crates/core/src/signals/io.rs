//! `.szf` persistence and CSV interop.
//!
//! `.szf` layout: the 4-byte magic `SZF1`, a little-endian `u64` header
//! length `H`, `H` bytes of UTF-8 JSON (`dim`, `origin`, `spacing`, `shape`,
//! `meta`), then the samples as little-endian IEEE-754 `f64` in row-major
//! order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GridSpec, Meta, SampledFunction};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SZF1";

#[derive(Serialize, Deserialize)]
struct Header {
    dim: usize,
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
    meta: Meta,
}

pub fn to_bytes(f: &SampledFunction) -> Vec<u8> {
    let header = Header {
        dim: f.dim(),
        origin: f.grid.origin.clone(),
        spacing: f.grid.spacing,
        shape: f.grid.shape.clone(),
        meta: f.meta.clone(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + 8 * f.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in &f.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<SampledFunction> {
    let fmt = |offset: usize, message: String| Error::Format { offset, message };
    if bytes.len() < 12 {
        return Err(fmt(bytes.len(), "truncated preamble".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(fmt(0, "bad magic, expected SZF1".into()));
    }
    let hlen = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let body = 12usize
        .checked_add(hlen)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| fmt(4, format!("header length {hlen} exceeds file size")))?;
    let header: Header = serde_json::from_slice(&bytes[12..body])
        .map_err(|e| fmt(12 + e.column().saturating_sub(1), format!("header: {e}")))?;
    if header.dim != header.shape.len() {
        return Err(fmt(12, format!("dim {} disagrees with shape {:?}", header.dim, header.shape)));
    }
    let count: usize = header.shape.iter().product();
    let need = count * 8;
    if bytes.len() - body != need {
        return Err(fmt(
            body,
            format!("expected {need} value bytes, found {}", bytes.len() - body),
        ));
    }
    let values: Vec<f64> = bytes[body..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(fmt(body + 8 * i, "non-finite sample".into()));
    }
    let grid = GridSpec {
        origin: header.origin,
        spacing: header.spacing,
        shape: header.shape,
    };
    SampledFunction::new(grid, values, header.meta).map_err(|e| fmt(12, e.to_string()))
}

/// Writes via a temporary sibling file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn save(f: &SampledFunction, path: &Path) -> Result<()> {
    write_atomic(path, &to_bytes(f))
}

pub fn load(path: &Path) -> Result<SampledFunction> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_bytes(&bytes)
}

/// One value per line in one dimension; one grid row per line in two.
pub fn save_csv(f: &SampledFunction, path: &Path) -> Result<()> {
    let mut s = String::new();
    let cols = if f.dim() == 1 { 1 } else { f.grid.shape[1] };
    for row in f.values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

/// Reads a CSV written by [`save_csv`]. Grid placement is not stored in
/// CSV, so the origin and spacing are supplied by the caller; a single
/// column yields a one-dimensional signal.
pub fn load_csv(path: &Path, origin: &[f64], spacing: f64) -> Result<SampledFunction> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            let mut row = Vec::new();
            let mut col = offset;
            for field in trimmed.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| Error::Format {
                    offset: col,
                    message: format!("not a number: {:?}", field.trim()),
                })?;
                row.push(v);
                col += field.len() + 1;
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Format {
                        offset,
                        message: format!("row has {} columns, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        offset += line.len();
    }
    if rows.is_empty() {
        return Err(Error::Format {
            offset: 0,
            message: "no data rows".into(),
        });
    }
    let cols = rows[0].len();
    let (shape, dim) = if cols == 1 {
        (vec![rows.len()], 1)
    } else {
        (vec![rows.len(), cols], 2)
    };
    let origin = if origin.len() == dim {
        origin.to_vec()
    } else {
        vec![origin.first().copied().unwrap_or(0.0); dim]
    };
    let grid = GridSpec {
        origin,
        spacing,
        shape,
    };
    let values = rows.into_iter().flatten().collect();
    let meta = Meta {
        generator: "csv".into(),
        ..Default::default()
    };
    SampledFunction::new(grid, values, meta)
}
