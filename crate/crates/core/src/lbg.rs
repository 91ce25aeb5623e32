//! LBG (generalized Lloyd) codebook refinement.
//!
//! Each iteration partitions the training set by nearest codeword, moves every
//! codeword to the centroid of its cell and records the distortion of that
//! partition against the new centroids. Refinement stops once two successive
//! distortions differ by at most `epsilon`.

use std::fmt::Write as _;

use crate::error::{Result, VqError};
use crate::imaging::TrainingSet;
use crate::quantizer::{distortion, encode, squared_distance, Codebook, IndexMap};

/// What to do with a codeword whose cell received no training vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EmptyCellPolicy {
    /// Move the codeword onto the training vector that is currently worst
    /// represented (largest distance to its own codeword).
    #[default]
    ReseedFarthest,
    /// Leave the codeword where it is.
    Keep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbgConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub empty_cell_policy: EmptyCellPolicy,
    /// Compare `|D_prev - D| / D_prev` against `epsilon` instead of the
    /// absolute change.
    pub relative_change: bool,
}

impl Default for LbgConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.001,
            max_iterations: 100,
            empty_cell_policy: EmptyCellPolicy::ReseedFarthest,
            relative_change: false,
        }
    }
}

impl LbgConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(VqError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(VqError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LbgTrace {
    /// Distortion of the initial codebook on its own nearest-neighbour
    /// partition; the first iteration is compared against it.
    pub initial_distortion: f64,
    /// Distortion after each iteration.
    pub distortions: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

impl LbgTrace {
    pub fn final_distortion(&self) -> f64 {
        self.distortions
            .last()
            .copied()
            .unwrap_or(self.initial_distortion)
    }

    /// `iteration,distortion` rows, iterations numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,distortion\n");
        for (m, d) in self.distortions.iter().enumerate() {
            writeln!(out, "{},{}", m + 1, d).unwrap();
        }
        out
    }
}

/// Moves each codeword to the mean of the vectors assigned to it. Codewords
/// with no vectors are handled according to `policy`.
pub fn centroid_update(
    ts: &TrainingSet,
    im: &IndexMap,
    cb: &Codebook,
    policy: EmptyCellPolicy,
) -> Result<Codebook> {
    update(ts, im, cb, policy).map(|(cb, _)| cb)
}

/// Returns the new codebook and the number of reseeded cells.
fn update(
    ts: &TrainingSet,
    im: &IndexMap,
    cb: &Codebook,
    policy: EmptyCellPolicy,
) -> Result<(Codebook, usize)> {
    let dim = cb.dim();
    if ts.dim() != dim {
        return Err(VqError::DimensionMismatch {
            expected: dim,
            found: ts.dim(),
        });
    }
    if im.len() != ts.len() || im.codebook_size() != cb.len() {
        return Err(VqError::Geometry(
            "index map does not match training set and codebook".into(),
        ));
    }

    let nc = cb.len();
    let mut sums = vec![0.0; nc * dim];
    let mut counts = vec![0usize; nc];
    for (x, &j) in ts.vectors().zip(im.indices()) {
        let j = j as usize;
        counts[j] += 1;
        for (s, v) in sums[j * dim..(j + 1) * dim].iter_mut().zip(x) {
            *s += v;
        }
    }

    let mut data = cb.as_flat().to_vec();
    let mut empty = Vec::new();
    for j in 0..nc {
        let word = &mut data[j * dim..(j + 1) * dim];
        if counts[j] == 0 {
            empty.push(j);
            continue;
        }
        let n = counts[j] as f64;
        for (w, s) in word.iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
            *w = (s / n).clamp(0.0, 255.0);
        }
    }

    let mut reseeded = 0;
    if policy == EmptyCellPolicy::ReseedFarthest && !empty.is_empty() {
        let mut order: Vec<(usize, f64)> = ts
            .vectors()
            .zip(im.indices())
            .enumerate()
            .map(|(i, (x, &j))| (i, squared_distance(x, cb.codeword(j as usize))))
            .collect();
        // largest error first, lowest index on ties
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (&j, &(i, _)) in empty.iter().zip(&order) {
            data[j * dim..(j + 1) * dim].copy_from_slice(ts.vector(i));
            reseeded += 1;
        }
    }

    Ok((Codebook::new(dim, data)?, reseeded))
}

/// Runs LBG from `initial` until the distortion change is within
/// `cfg.epsilon` or `cfg.max_iterations` is reached.
pub fn lbg_refine(
    ts: &TrainingSet,
    initial: &Codebook,
    cfg: &LbgConfig,
) -> Result<(Codebook, LbgTrace)> {
    cfg.validate()?;
    if ts.is_empty() {
        return Err(VqError::EmptyTrainingSet);
    }
    if ts.dim() != initial.dim() {
        return Err(VqError::DimensionMismatch {
            expected: initial.dim(),
            found: ts.dim(),
        });
    }

    let mut codebook = initial.clone();
    let mut partition = encode(ts, &codebook)?;
    let mut trace = LbgTrace {
        initial_distortion: distortion(ts, &codebook, &partition)?,
        ..LbgTrace::default()
    };
    let mut previous = trace.initial_distortion;

    for m in 1..=cfg.max_iterations {
        if m > 1 {
            partition = encode(ts, &codebook)?;
        }
        let (updated, reseeded) = update(ts, &partition, &codebook, cfg.empty_cell_policy)?;
        codebook = updated;
        let current = distortion(ts, &codebook, &partition)?;
        trace.distortions.push(current);
        trace.iterations_run = m;

        let change = (previous - current).abs();
        let change = if cfg.relative_change && previous > 0.0 {
            change / previous
        } else {
            change
        };
        // a reseeded codeword has not been tested against the data yet
        if reseeded == 0 && change <= cfg.epsilon {
            trace.converged = true;
            break;
        }
        previous = current;
    }
    Ok((codebook, trace))
}
