#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqforge::GrayImage;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn camera() -> GrayImage {
    vqforge::load_image(fixture("camera.pgm")).unwrap()
}

pub fn random_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = (0..width * height).map(|_| rng.random()).collect();
    GrayImage::new(width, height, px).unwrap()
}

/// Smooth gradient plus noise, closer to natural image statistics than
/// uniform noise.
pub fn textured_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            let base = 128.0 + 80.0 * ((x / 7.0).sin() * (y / 11.0).cos());
            (base + rng.random_range(-20.0..20.0)).clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(width, height, px).unwrap()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Brute-force argmin with lowest-index tie breaking.
pub fn brute_nearest(x: &[f64], codewords: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in codewords.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// MSE/PSNR recomputed from scratch: nearest codeword per block, rounded
/// half-up, compared pixel by pixel against the image.
pub fn brute_psnr(img: &GrayImage, n: usize, codewords: &[Vec<f64>]) -> f64 {
    let mut sse = 0.0;
    for by in 0..img.height() / n {
        for bx in 0..img.width() / n {
            let block: Vec<f64> = (0..n * n)
                .map(|k| img.get(bx * n + k % n, by * n + k / n) as f64)
                .collect();
            let (j, _) = brute_nearest(&block, codewords);
            for (k, &p) in block.iter().enumerate() {
                let r = (codewords[j][k] + 0.5).floor().clamp(0.0, 255.0);
                sse += (p - r) * (p - r);
            }
        }
    }
    let mse = sse / img.pixel_count() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}
