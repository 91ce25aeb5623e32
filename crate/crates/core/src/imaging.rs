//! Grayscale images, binary PGM I/O and block (training vector) extraction.
//!
//! An image of `width x height` pixels is cut into non-overlapping
//! `n x n` blocks. Blocks are visited in raster order (left to right, top to
//! bottom) and each block is flattened row-major into a `n*n` component
//! vector.

use std::fs;
use std::path::Path;

use crate::error::{Result, VqError};

/// 8-bit grayscale image stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(VqError::Geometry(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(VqError::Geometry(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single value.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }
}

/// Block layout of an image: its size and the side of the square blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockGeometry {
    pub width: usize,
    pub height: usize,
    pub block_side: usize,
}

impl BlockGeometry {
    pub fn new(width: usize, height: usize, block_side: usize) -> Result<Self> {
        if block_side == 0
            || width == 0
            || height == 0
            || !width.is_multiple_of(block_side)
            || !height.is_multiple_of(block_side)
        {
            return Err(VqError::BlockSideMismatch {
                width,
                height,
                block_side,
            });
        }
        Ok(Self {
            width,
            height,
            block_side,
        })
    }

    pub fn blocks_x(&self) -> usize {
        self.width / self.block_side
    }

    pub fn blocks_y(&self) -> usize {
        self.height / self.block_side
    }

    pub fn block_count(&self) -> usize {
        self.blocks_x() * self.blocks_y()
    }

    /// Components per block vector.
    pub fn dim(&self) -> usize {
        self.block_side * self.block_side
    }
}

/// Block vectors extracted from one image, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    geometry: BlockGeometry,
    data: Vec<f64>,
}

impl TrainingSet {
    /// Builds a training set from flattened vectors (`block_count * dim`
    /// values in raster block order).
    ///
    /// Components are not range-checked: reconstruction clamps them, and
    /// decoded or optimized vectors can legitimately sit slightly outside
    /// `[0, 255]`.
    pub fn from_flat(geometry: BlockGeometry, data: Vec<f64>) -> Result<Self> {
        let expected = geometry.block_count() * geometry.dim();
        if data.len() != expected {
            return Err(VqError::Geometry(format!(
                "expected {expected} components for {} blocks of dim {}, got {}",
                geometry.block_count(),
                geometry.dim(),
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(VqError::Geometry(format!("non-finite component {bad}")));
        }
        Ok(Self { geometry, data })
    }

    pub fn geometry(&self) -> BlockGeometry {
        self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn block_side(&self) -> usize {
        self.geometry.block_side
    }

    pub fn len(&self) -> usize {
        self.geometry.block_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn vectors(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Reads a binary (P5) PGM file with maxval 255.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| VqError::io(path, e))?;
    decode_pgm(&bytes)
}

/// Writes `img` as a binary PGM: `P5\n<w> <h>\n255\n` followed by the pixels.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| VqError::io(path, e))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(VqError::MalformedHeader("missing P5 magic".into()));
    }
    let mut pos = 2;
    let width = header_field(bytes, &mut pos, "width")?;
    let height = header_field(bytes, &mut pos, "height")?;
    let maxval = header_field(bytes, &mut pos, "maxval")?;
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(VqError::MalformedHeader(
                "expected whitespace after maxval".into(),
            ))
        }
    }
    if maxval != 255 {
        return Err(VqError::UnsupportedMaxval(maxval as u32));
    }
    if width == 0 || height == 0 {
        return Err(VqError::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| VqError::MalformedHeader("image dimensions overflow".into()))?;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(VqError::TruncatedPixels {
            expected,
            found: payload.len(),
        });
    }
    GrayImage::new(width, height, payload[..expected].to_vec())
}

fn header_field(bytes: &[u8], pos: &mut usize, name: &str) -> Result<usize> {
    // skip whitespace and comments
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(VqError::MalformedHeader(format!("missing {name}"))),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(VqError::MalformedHeader(format!("{name} is not a number")));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| VqError::MalformedHeader(format!("{name} out of range")))
}

/// Splits `img` into `n x n` block vectors in raster block order.
pub fn extract_blocks(img: &GrayImage, n: usize) -> Result<TrainingSet> {
    let geometry = BlockGeometry::new(img.width, img.height, n)?;
    let mut data = Vec::with_capacity(img.pixel_count());
    for by in 0..geometry.blocks_y() {
        for bx in 0..geometry.blocks_x() {
            for row in 0..n {
                let start = (by * n + row) * img.width + bx * n;
                data.extend(img.pixels[start..start + n].iter().map(|&p| p as f64));
            }
        }
    }
    TrainingSet::from_flat(geometry, data)
}

/// Rounds half-up and clamps a reconstructed component to a pixel value.
pub fn to_pixel(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Inverse of [`extract_blocks`]; components are rounded half-up and clamped
/// to `[0, 255]`.
pub fn assemble_blocks(blocks: &TrainingSet) -> Result<GrayImage> {
    let g = blocks.geometry();
    let n = g.block_side;
    let mut pixels = vec![0u8; g.width * g.height];
    for (i, v) in blocks.vectors().enumerate() {
        let (bx, by) = (i % g.blocks_x(), i / g.blocks_x());
        for row in 0..n {
            let start = (by * n + row) * g.width + bx * n;
            for (dst, &src) in pixels[start..start + n]
                .iter_mut()
                .zip(&v[row * n..(row + 1) * n])
            {
                *dst = to_pixel(src);
            }
        }
    }
    GrayImage::new(g.width, g.height, pixels)
}
