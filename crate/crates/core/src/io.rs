//! JSON operator and channel files.
//!
//! Operator: `{"dims": [dA, dB] | [d], "entries": [[[re, im], ...], ...]}`.
//! Channel: `{"dimIn": d, "dimOut": d', "kraus": [entries, ...]}`.
//! Reals are written with 17 significant digits, so files round-trip
//! bit-for-bit.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::channel::{make_channel, QuantumChannel};
use crate::linalg::{Bipartite, CMatrix, Density, Hermitian, Psd};
use crate::{Error, Result};

type RawEntries = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    dims: Vec<usize>,
    entries: RawEntries,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RawChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<RawEntries>,
}

/// Operator read from a file, together with its declared factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFile {
    pub dims: Vec<usize>,
    pub matrix: CMatrix,
}

impl OperatorFile {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        check_dims(&dims, matrix.nrows(), matrix.ncols())?;
        Ok(Self { dims, matrix })
    }

    pub fn hermitian(&self) -> Result<Hermitian> {
        Hermitian::new(self.matrix.clone())
    }

    pub fn psd(&self) -> Result<Psd> {
        Psd::new(self.hermitian()?)
    }

    pub fn density(&self) -> Result<Density> {
        Density::new(self.hermitian()?)
    }

    /// Requires `dims = [dA, dB]`.
    pub fn bipartite(&self) -> Result<Bipartite> {
        match self.dims[..] {
            [da, db] => Bipartite::new(da, db, self.hermitian()?),
            _ => Err(Error::BadDimensions(format!(
                "a bipartite operator needs dims [dA, dB], found {:?}",
                self.dims
            ))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = String::from("{\"dims\": [");
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{d}");
        }
        out.push_str("], \"entries\": ");
        write_entries(&mut out, &self.matrix)?;
        out.push_str("}\n");
        Ok(out)
    }
}

fn check_dims(dims: &[usize], rows: usize, cols: usize) -> Result<()> {
    if dims.is_empty() || dims.len() > 2 || dims.contains(&0) {
        return Err(Error::BadDimensions(format!("dims must be [d] or [dA, dB] with positive entries, found {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: rows,
        });
    }
    Ok(())
}

fn matrix_from_entries(entries: &RawEntries) -> Result<CMatrix> {
    let rows = entries.len();
    let cols = entries.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse("matrix has no entries".into()));
    }
    if let Some(r) = entries.iter().find(|r| r.len() != cols) {
        return Err(Error::Parse(format!("ragged matrix: row of length {} in a {cols}-column matrix", r.len())));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = entries[i][j];
        Complex64::new(re, im)
    }))
}

fn write_entries(out: &mut String, m: &CMatrix) -> Result<()> {
    out.push('[');
    for i in 0..m.nrows() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for j in 0..m.ncols() {
            if j > 0 {
                out.push_str(", ");
            }
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) is not finite")));
            }
            let _ = write!(out, "[{:.16e}, {:.16e}]", z.re, z.im);
        }
        out.push(']');
    }
    out.push(']');
    Ok(())
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_operator(text: &str) -> Result<OperatorFile> {
    let raw: RawOperator = serde_json::from_str(text).map_err(json_error)?;
    let matrix = matrix_from_entries(&raw.entries)?;
    OperatorFile::new(raw.dims, matrix)
}

pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    let raw: RawChannel = serde_json::from_str(text).map_err(json_error)?;
    let kraus = raw.kraus.iter().map(matrix_from_entries).collect::<Result<Vec<_>>>()?;
    let ch = make_channel(kraus)?;
    if ch.dim_in() != raw.dim_in {
        return Err(Error::DimensionMismatch {
            expected: raw.dim_in,
            found: ch.dim_in(),
        });
    }
    if ch.dim_out() != raw.dim_out {
        return Err(Error::DimensionMismatch {
            expected: raw.dim_out,
            found: ch.dim_out(),
        });
    }
    Ok(ch)
}

pub fn channel_to_json(ch: &QuantumChannel) -> Result<String> {
    let mut out = String::new();
    let _ = write!(out, "{{\"dimIn\": {}, \"dimOut\": {}, \"kraus\": [", ch.dim_in(), ch.dim_out());
    for (i, k) in ch.kraus().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_entries(&mut out, k)?;
    }
    out.push_str("]}\n");
    Ok(out)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<OperatorFile> {
    let path = path.as_ref();
    parse_operator(&read_text(path)?).map_err(|e| with_path(path, e))
}

pub fn read_channel(path: impl AsRef<Path>) -> Result<QuantumChannel> {
    let path = path.as_ref();
    parse_channel(&read_text(path)?).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn write_operator(path: impl AsRef<Path>, op: &OperatorFile) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, op.to_json()?).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))
}

pub fn write_channel(path: impl AsRef<Path>, ch: &QuantumChannel) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, channel_to_json(ch)?).map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))
}
