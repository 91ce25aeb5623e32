//! On-disk formats.
//!
//! Codebook text file:
//!
//! ```text
//! VQCB <N_c> <dim>
//! <dim space-separated reals>     (N_c lines)
//! ```
//!
//! Encoded image (`VQIM`), all integers little-endian:
//!
//! ```text
//! "VQIM" | u32 width | u32 height | u32 block_side | u32 N_c
//!        | N_c*dim f64 codebook values | one u16 index per block
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Codebook, IndexMap};
use crate::error::{Result, VqError};
use crate::imaging::{BlockGeometry, GrayImage};

const VQIM_MAGIC: &[u8; 4] = b"VQIM";
const VQIM_HEADER_LEN: usize = 4 + 4 * 4;

/// Formats a codebook; values use the shortest representation that parses
/// back to the identical `f64`.
pub fn format_codebook(cb: &Codebook) -> String {
    let mut out = format!("VQCB {} {}\n", cb.len(), cb.dim());
    for word in cb.codewords() {
        for (k, v) in word.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let bad = |msg: String| VqError::MalformedCodebookFile(msg);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (nc, dim) = match fields.as_slice() {
        ["VQCB", nc, dim] => (
            nc.parse::<usize>()
                .map_err(|_| bad(format!("bad codeword count {nc:?}")))?,
            dim.parse::<usize>()
                .map_err(|_| bad(format!("bad dimension {dim:?}")))?,
        ),
        _ => return Err(bad(format!("bad header {header:?}"))),
    };
    let mut data = Vec::with_capacity(nc * dim);
    for row in 0..nc {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("expected {nc} codewords, found {row}")))?;
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|_| bad(format!("codeword {row}: bad value {tok:?}")))?,
            );
        }
        if data.len() - before != dim {
            return Err(bad(format!(
                "codeword {row} has {} values, expected {dim}",
                data.len() - before
            )));
        }
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(bad("trailing data after last codeword".into()));
    }
    Codebook::new(dim, data)
}

pub fn write_codebook(cb: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_codebook(cb)).map_err(|e| VqError::io(path, e))
}

pub fn read_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| VqError::io(path, e))?;
    parse_codebook(&text)
}

/// Index map together with the codebook needed to decode it.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedImage {
    pub codebook: Codebook,
    pub map: IndexMap,
}

impl EncodedImage {
    pub fn new(codebook: Codebook, map: IndexMap) -> Result<Self> {
        if map.codebook_size() != codebook.len() || map.geometry().dim() != codebook.dim() {
            return Err(VqError::Geometry(
                "index map does not match codebook".into(),
            ));
        }
        Ok(Self { codebook, map })
    }

    pub fn decode(&self) -> Result<GrayImage> {
        super::decode(&self.map, &self.codebook)
    }
}

pub fn vqim_to_bytes(enc: &EncodedImage) -> Result<Vec<u8>> {
    let g = enc.map.geometry();
    let nc = enc.codebook.len();
    if nc > u16::MAX as usize + 1 {
        return Err(VqError::InvalidCodebook(format!(
            "{nc} codewords do not fit 16-bit indices"
        )));
    }
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| VqError::Geometry(format!("{v} does not fit in u32")))
    };
    let mut out = Vec::with_capacity(
        VQIM_HEADER_LEN + enc.codebook.as_flat().len() * 8 + enc.map.len() * 2,
    );
    out.extend_from_slice(VQIM_MAGIC);
    for v in [g.width, g.height, g.block_side, nc] {
        out.extend_from_slice(&to_u32(v)?.to_le_bytes());
    }
    for v in enc.codebook.as_flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &i in enc.map.indices() {
        out.extend_from_slice(&(i as u16).to_le_bytes());
    }
    Ok(out)
}

pub fn vqim_from_bytes(bytes: &[u8]) -> Result<EncodedImage> {
    if bytes.len() < VQIM_HEADER_LEN || &bytes[..4] != VQIM_MAGIC {
        return Err(VqError::BadVqimHeader);
    }
    let field = |k: usize| {
        let at = 4 + 4 * k;
        u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
    };
    let (width, height, block_side, nc) = (field(0), field(1), field(2), field(3));
    let geometry = BlockGeometry::new(width, height, block_side)
        .map_err(|e| VqError::MalformedVqim(e.to_string()))?;
    if nc == 0 || nc > u16::MAX as usize + 1 {
        return Err(VqError::MalformedVqim(format!("codebook size {nc}")));
    }
    let values = nc * geometry.dim();
    let expected = VQIM_HEADER_LEN + values * 8 + geometry.block_count() * 2;
    if bytes.len() != expected {
        return Err(VqError::MalformedVqim(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let body = &bytes[VQIM_HEADER_LEN..];
    let (cb_bytes, idx_bytes) = body.split_at(values * 8);
    let data = cb_bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let codebook =
        Codebook::new(geometry.dim(), data).map_err(|e| VqError::MalformedVqim(e.to_string()))?;
    let indices = idx_bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
        .collect();
    let map = IndexMap::new(geometry, nc, indices)?;
    EncodedImage::new(codebook, map)
}

pub fn write_vqim(enc: &EncodedImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = vqim_to_bytes(enc)?;
    fs::write(path, bytes).map_err(|e| VqError::io(path, e))
}

pub fn read_vqim(path: impl AsRef<Path>) -> Result<EncodedImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| VqError::io(path, e))?;
    vqim_from_bytes(&bytes)
}
