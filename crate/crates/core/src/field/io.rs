//! `LPF1` field files.
//!
//! Layout (all integers little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `LPF1` |
//! | 1 | version = 1 |
//! | 1 | kind: 0 scalar physical, 1 scalar spectral, 2 vector physical, 3 vector spectral |
//! | 1 | d |
//! | 1 | reserved = 0 |
//! | 4·d | `u32` samples per axis |
//! | … | `f64` pairs `(re, im)`, row-major, vector components concatenated |

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{Grid, GridField, Repr, VectorField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LPF1";
pub const VERSION: u8 = 1;

/// Contents of a field file.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Scalar(GridField),
    Vector(VectorField),
}

impl FieldData {
    pub fn grid(&self) -> Grid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Vector(v) => v.grid(),
        }
    }

    pub fn into_scalar(self) -> Result<GridField> {
        match self {
            FieldData::Scalar(f) => Ok(f),
            FieldData::Vector(_) => Err(Error::Format("expected a scalar field file".into())),
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        match self {
            FieldData::Vector(v) => Ok(v),
            FieldData::Scalar(_) => Err(Error::Format("expected a vector field file".into())),
        }
    }
}

fn kind_code(vector: bool, repr: Repr) -> u8 {
    match (vector, repr) {
        (false, Repr::Physical) => 0,
        (false, Repr::Spectral) => 1,
        (true, Repr::Physical) => 2,
        (true, Repr::Spectral) => 3,
    }
}

/// Serialize to bytes. Vector components are written in the first
/// component's representation.
pub fn encode(data: &FieldData) -> Vec<u8> {
    let (grid, repr, comps): (Grid, Repr, Vec<GridField>) = match data {
        FieldData::Scalar(f) => (f.grid(), f.repr(), vec![f.clone()]),
        FieldData::Vector(v) => {
            let repr = v.component(0).repr();
            let comps = v.components().iter().map(|c| c.clone().into_repr(repr)).collect();
            (v.grid(), repr, comps)
        }
    };
    let vector = matches!(data, FieldData::Vector(_));
    let mut out = Vec::with_capacity(8 + 4 * grid.dim() + 16 * grid.len() * comps.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(kind_code(vector, repr));
    out.push(grid.dim() as u8);
    out.push(0);
    for _ in 0..grid.dim() {
        out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    }
    for c in &comps {
        for v in c.values() {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

fn fmt_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

/// Parse bytes produced by [`encode`].
pub fn decode(bytes: &[u8]) -> Result<FieldData> {
    if bytes.len() < 8 {
        return fmt_err("file shorter than the fixed header");
    }
    if &bytes[..4] != MAGIC {
        return fmt_err("bad magic bytes");
    }
    if bytes[4] != VERSION {
        return fmt_err(format!("unsupported version {}", bytes[4]));
    }
    let kind = bytes[5];
    let (vector, repr) = match kind {
        0 => (false, Repr::Physical),
        1 => (false, Repr::Spectral),
        2 => (true, Repr::Physical),
        3 => (true, Repr::Spectral),
        other => return fmt_err(format!("unknown kind byte {other}")),
    };
    let d = bytes[6] as usize;
    if bytes[7] != 0 {
        return fmt_err("reserved byte must be zero");
    }
    if !(d == 2 || d == 3) {
        return fmt_err(format!("dimension mismatch: unsupported d = {d}"));
    }
    let header_len = 8 + 4 * d;
    if bytes.len() < header_len {
        return fmt_err("truncated header");
    }
    let sizes: Vec<usize> = (0..d)
        .map(|a| {
            let off = 8 + 4 * a;
            u32::from_le_bytes(bytes[off..off + 4].try_into().expect("4 bytes")) as usize
        })
        .collect();
    if sizes.iter().any(|&s| s != sizes[0]) {
        return fmt_err(format!("dimension mismatch: per-axis sizes {sizes:?} differ"));
    }
    let grid = Grid::new(d, sizes[0]).map_err(|e| Error::Format(format!("dimension mismatch: {e}")))?;
    let ncomp = if vector { d } else { 1 };
    let expected = header_len + 16 * grid.len() * ncomp;
    if bytes.len() < expected {
        return fmt_err(format!(
            "truncated payload: expected {} bytes, found {}",
            expected - header_len,
            bytes.len() - header_len
        ));
    }
    if bytes.len() > expected {
        return fmt_err("trailing bytes after payload");
    }
    let mut comps = Vec::with_capacity(ncomp);
    let mut off = header_len;
    for _ in 0..ncomp {
        let mut vals = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().expect("8 bytes"));
            vals.push(Complex64::new(re, im));
            off += 16;
        }
        let is_real = match repr {
            Repr::Physical => vals.iter().all(|v| v.im == 0.0),
            Repr::Spectral => false,
        };
        let mut f = GridField::from_values(grid, vals, repr, is_real)?;
        if repr == Repr::Spectral && f.hermitian_defect() <= 1e-12 {
            f = f.set_real(true);
        }
        comps.push(f);
    }
    if vector {
        let v = VectorField::new(comps)?;
        let div_free = v.divergence_ratio() <= super::DIV_FREE_TOL;
        Ok(FieldData::Vector(v.with_div_free(div_free)))
    } else {
        Ok(FieldData::Scalar(comps.pop().expect("one component")))
    }
}

pub fn write_field(path: impl AsRef<Path>, data: &FieldData) -> Result<()> {
    fs::write(path, encode(data))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<FieldData> {
    decode(&fs::read(path)?)
}
