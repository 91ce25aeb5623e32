//! Codebooks, nearest-codeword search, VQ encoding/decoding and distortion.

mod files;
mod metrics;

use rayon::prelude::*;

use crate::error::{Result, VqError};
use crate::imaging::{to_pixel, BlockGeometry, GrayImage, TrainingSet};

pub use files::{
    format_codebook, parse_codebook, read_codebook, read_vqim, vqim_from_bytes, vqim_to_bytes, write_codebook,
    write_vqim, EncodedImage,
};
pub use metrics::{bpp, mse, psnr};

/// Set of `N_c` codewords of dimension `dim`, each component in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    dim: usize,
    data: Vec<f64>,
}

impl Codebook {
    /// `data` holds the codewords back to back (`N_c * dim` values).
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(VqError::InvalidCodebook("dimension must be positive".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(VqError::InvalidCodebook(format!(
                "{} values do not form a whole number of dim-{dim} codewords",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(VqError::InvalidCodebook(format!(
                "component {v} outside [0, 255]"
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_codewords(codewords: &[Vec<f64>]) -> Result<Self> {
        let dim = codewords.first().map_or(0, Vec::len);
        if let Some(bad) = codewords.iter().find(|c| c.len() != dim) {
            return Err(VqError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(dim, codewords.concat())
    }

    /// Codebook made of the training vectors at `indices`, in that order.
    pub fn from_training_vectors(ts: &TrainingSet, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * ts.dim());
        for &i in indices {
            if i >= ts.len() {
                return Err(VqError::IndexOutOfRange {
                    index: i,
                    size: ts.len(),
                });
            }
            data.extend_from_slice(ts.vector(i));
        }
        Self::new(ts.dim(), data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of codewords, `N_c`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn codeword(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn codewords(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }
}

/// One codeword index per block, in raster block order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    geometry: BlockGeometry,
    codebook_size: usize,
    indices: Vec<u32>,
}

impl IndexMap {
    pub fn new(geometry: BlockGeometry, codebook_size: usize, indices: Vec<u32>) -> Result<Self> {
        if indices.len() != geometry.block_count() {
            return Err(VqError::Geometry(format!(
                "{} indices for {} blocks",
                indices.len(),
                geometry.block_count()
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i as usize >= codebook_size) {
            return Err(VqError::IndexOutOfRange {
                index: bad as usize,
                size: codebook_size,
            });
        }
        Ok(Self {
            geometry,
            codebook_size,
            indices,
        })
    }

    pub fn geometry(&self) -> BlockGeometry {
        self.geometry
    }

    pub fn codebook_size(&self) -> usize {
        self.codebook_size
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    // Four fixed accumulators: vectorizes, and the summation order is
    // identical for every call so argmin results are reproducible.
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        let d = x - y;
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn nearest_unchecked(x: &[f64], cb: &Codebook) -> (usize, f64) {
    if let Ok(x16) = <&[f64; 16]>::try_from(x) {
        return nearest_16(x16, cb);
    }
    let mut best = (0, f64::INFINITY);
    for (j, c) in cb.codewords().enumerate() {
        let d = squared_distance(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

// 4x4 blocks are the common case; a fixed width lets the distance fully
// unroll. The summation order matches `squared_distance`.
#[inline]
fn nearest_16(x: &[f64; 16], cb: &Codebook) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in cb.as_flat().chunks_exact(16).enumerate() {
        let c: &[f64; 16] = c.try_into().unwrap();
        let mut acc = [0.0f64; 4];
        for chunk in 0..4 {
            for k in 0..4 {
                let d = x[chunk * 4 + k] - c[chunk * 4 + k];
                acc[k] += d * d;
            }
        }
        let d = (acc[0] + acc[1]) + (acc[2] + acc[3]) + 0.0;
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Index and squared distance of the codeword closest to `x`; ties go to the
/// lowest index.
pub fn nearest_codeword(x: &[f64], cb: &Codebook) -> Result<(usize, f64)> {
    if x.len() != cb.dim() {
        return Err(VqError::DimensionMismatch {
            expected: cb.dim(),
            found: x.len(),
        });
    }
    Ok(nearest_unchecked(x, cb))
}

/// Maps each training vector to its nearest codeword.
pub fn encode(ts: &TrainingSet, cb: &Codebook) -> Result<IndexMap> {
    if ts.dim() != cb.dim() {
        return Err(VqError::DimensionMismatch {
            expected: cb.dim(),
            found: ts.dim(),
        });
    }
    if cb.len() > u32::MAX as usize {
        return Err(VqError::InvalidCodebook("too many codewords".into()));
    }
    let indices: Vec<u32> = ts
        .as_flat()
        .par_chunks_exact(ts.dim())
        .with_min_len(512)
        .map(|x| nearest_unchecked(x, cb).0 as u32)
        .collect();
    Ok(IndexMap {
        geometry: ts.geometry(),
        codebook_size: cb.len(),
        indices,
    })
}

fn check_map(im: &IndexMap, cb: &Codebook) -> Result<()> {
    if im.codebook_size != cb.len() {
        return Err(VqError::Geometry(format!(
            "index map expects {} codewords, codebook has {}",
            im.codebook_size,
            cb.len()
        )));
    }
    if im.geometry.dim() != cb.dim() {
        return Err(VqError::DimensionMismatch {
            expected: im.geometry.dim(),
            found: cb.dim(),
        });
    }
    Ok(())
}

/// Rebuilds an image by substituting each index with its codeword, rounded
/// half-up and clamped like [`crate::imaging::assemble_blocks`].
pub fn decode(im: &IndexMap, cb: &Codebook) -> Result<GrayImage> {
    check_map(im, cb)?;
    let g = im.geometry;
    let n = g.block_side;
    let rounded: Vec<u8> = cb.as_flat().iter().map(|&v| to_pixel(v)).collect();
    let mut pixels = vec![0u8; g.width * g.height];
    for (i, &idx) in im.indices.iter().enumerate() {
        let idx = idx as usize;
        if idx >= cb.len() {
            return Err(VqError::IndexOutOfRange {
                index: idx,
                size: cb.len(),
            });
        }
        let word = &rounded[idx * g.dim()..(idx + 1) * g.dim()];
        let (bx, by) = (i % g.blocks_x(), i / g.blocks_x());
        for row in 0..n {
            let start = (by * n + row) * g.width + bx * n;
            pixels[start..start + n].copy_from_slice(&word[row * n..(row + 1) * n]);
        }
    }
    GrayImage::new(g.width, g.height, pixels)
}

/// Sum over all vectors of the squared distance to their assigned codeword.
pub fn squared_error_sum(ts: &TrainingSet, cb: &Codebook, im: &IndexMap) -> Result<f64> {
    check_map(im, cb)?;
    if ts.dim() != cb.dim() {
        return Err(VqError::DimensionMismatch {
            expected: cb.dim(),
            found: ts.dim(),
        });
    }
    if ts.len() != im.len() {
        return Err(VqError::Geometry(format!(
            "{} training vectors but {} indices",
            ts.len(),
            im.len()
        )));
    }
    Ok(ts
        .vectors()
        .zip(&im.indices)
        .map(|(x, &j)| squared_distance(x, cb.codeword(j as usize)))
        .sum())
}

/// Codebook distortion: total squared error divided by the codebook size
/// `N_c`. This is the quantity LBG termination is tested on.
pub fn distortion(ts: &TrainingSet, cb: &Codebook, im: &IndexMap) -> Result<f64> {
    Ok(squared_error_sum(ts, cb, im)? / cb.len() as f64)
}

/// Diagnostic variant of [`distortion`] normalized by the number of training
/// vectors instead of the codebook size.
pub fn distortion_mean_per_vector(ts: &TrainingSet, cb: &Codebook, im: &IndexMap) -> Result<f64> {
    Ok(squared_error_sum(ts, cb, im)? / ts.len() as f64)
}
