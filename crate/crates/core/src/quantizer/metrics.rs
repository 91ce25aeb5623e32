use crate::error::{Result, VqError};
use crate::imaging::GrayImage;

const PEAK_SQUARED: f64 = 255.0 * 255.0;

/// Mean squared pixel error between two images of equal size.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(VqError::Geometry(format!(
            "cannot compare {}x{} with {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum();
    Ok(sum as f64 / a.pixel_count() as f64)
}

/// PSNR in dB for 8-bit data, `10 log10(255^2 / mse)`.
///
/// Returns `f64::INFINITY` for a lossless reconstruction.
pub fn psnr(mse_value: f64) -> Result<f64> {
    if mse_value.is_nan() || mse_value < 0.0 {
        return Err(VqError::NegativeMse(mse_value));
    }
    if mse_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK_SQUARED / mse_value).log10())
}

/// Bits per pixel spent on indices: `log2(codebook_size) / block_pixels`.
///
/// # Panics
///
/// If either argument is zero.
pub fn bpp(codebook_size: usize, block_pixels: usize) -> f64 {
    assert!(
        codebook_size >= 1 && block_pixels >= 1,
        "bpp needs a non-empty codebook and block"
    );
    (codebook_size as f64).log2() / block_pixels as f64
}
