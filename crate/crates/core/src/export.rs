//! Matrix interchange format.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! magic        8 bytes   b"RMTMAT01"
//! header_len   u64
//! header       header_len bytes of UTF-8 JSON (see MatrixHeader)
//! entries      N² × (re: f64, im: f64), row-major
//! ```
//!
//! The CSV variant carries the same header as a `# header: {json}` comment
//! line after a `# rmt-entangle matrix v1` banner, then `N` lines of `2N`
//! comma-separated values `re_0,im_0,re_1,im_1,…` (one line per row). Floats
//! are written with Rust's shortest round-trip formatting so both variants
//! are lossless.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const MAGIC: &[u8; 8] = b"RMTMAT01";
const CSV_BANNER: &str = "# rmt-entangle matrix v1";
const CSV_HEADER_PREFIX: &str = "# header: ";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub dim: usize,
    pub kind: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub sample_index: u64,
}

pub fn write_binary<W: Write>(mut w: W, header: &MatrixHeader, m: &ComplexMatrix) -> Result<()> {
    check_dim(header, m)?;
    let json = serde_json::to_vec(header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for z in m.entries() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(MatrixHeader, ComplexMatrix)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len) as usize;
    if len > 1 << 20 {
        return Err(Error::Format(format!("header length {len} is implausible")));
    }
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: MatrixHeader =
        serde_json::from_slice(&json).map_err(|e| Error::Format(e.to_string()))?;
    let count = header
        .dim
        .checked_mul(header.dim)
        .ok_or_else(|| Error::Format("dimension overflow".into()))?;
    let mut entries = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
        entries.push(C64::new(re, im));
    }
    let m = ComplexMatrix::new(header.dim, entries)?;
    Ok((header, m))
}

pub fn write_csv<W: Write>(mut w: W, header: &MatrixHeader, m: &ComplexMatrix) -> Result<()> {
    check_dim(header, m)?;
    let json = serde_json::to_string(header).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(w, "{CSV_BANNER}")?;
    writeln!(w, "{CSV_HEADER_PREFIX}{json}")?;
    for i in 0..m.dim() {
        let fields: Vec<String> = m
            .row(i)
            .iter()
            .flat_map(|z| [z.re.to_string(), z.im.to_string()])
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<(MatrixHeader, ComplexMatrix)> {
    let mut lines = r.lines();
    let banner = lines.next().transpose()?.unwrap_or_default();
    if banner.trim_end() != CSV_BANNER {
        return Err(Error::Format("missing matrix banner".into()));
    }
    let header_line = lines.next().transpose()?.unwrap_or_default();
    let json = header_line
        .strip_prefix(CSV_HEADER_PREFIX)
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header: MatrixHeader =
        serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
    let mut entries = Vec::with_capacity(header.dim * header.dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("row {i}: {e}")))?;
        if values.len() != 2 * header.dim {
            return Err(Error::Format(format!(
                "row {i} has {} values, expected {}",
                values.len(),
                2 * header.dim
            )));
        }
        entries.extend(values.chunks(2).map(|p| C64::new(p[0], p[1])));
    }
    let m = ComplexMatrix::new(header.dim, entries)?;
    Ok((header, m))
}

fn check_dim(header: &MatrixHeader, m: &ComplexMatrix) -> Result<()> {
    if header.dim != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: header.dim,
            actual: m.dim(),
        });
    }
    Ok(())
}
