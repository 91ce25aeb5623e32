//! Codebook training (IDE-seeded LBG and a random-init LBG baseline) and the
//! codebook-size sweep used to produce PSNR/bpp tables.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;

use crate::error::{Result, VqError};
use crate::ide::{ide_optimize, GenerationStats, IdeConfig};
use crate::imaging::{extract_blocks, GrayImage, TrainingSet};
use crate::lbg::{lbg_refine, LbgConfig, LbgTrace};
use crate::quantizer::{bpp, decode, encode, mse, psnr, Codebook};
use crate::rng::{substream, RANDOM_CODEBOOK_STREAM};

pub const RUN_CSV_HEADER: &str =
    "method,image,nc,bpp,seed,ide_best_psnr,final_psnr,lbg_iterations,wall_time_s";
pub const SUMMARY_CSV_HEADER: &str = "method,image,nc,bpp,mean_psnr,std_psnr,runs";

/// Codebook sizes of the standard sweep.
pub const DEFAULT_SIZES: [usize; 6] = [8, 16, 32, 64, 128, 256];
pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_BLOCK_SIDE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Differential evolution followed by LBG refinement of its best codebook.
    IdeLbg,
    /// LBG from codewords sampled uniformly from the training blocks.
    LbgRandom,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::IdeLbg, Method::LbgRandom];

    pub fn name(self) -> &'static str {
        match self {
            Method::IdeLbg => "ide-lbg",
            Method::LbgRandom => "lbg-random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = VqError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| VqError::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Everything except the codebook size and seed that a training run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSettings {
    pub block_side: usize,
    /// Template for the optimizer; its `seed` is replaced per run.
    pub ide: IdeConfig,
    pub lbg: LbgConfig,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            block_side: DEFAULT_BLOCK_SIDE,
            ide: IdeConfig::default(),
            lbg: LbgConfig::default(),
        }
    }
}

/// Outcome of one training run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub method: Method,
    pub image: String,
    pub codebook_size: usize,
    pub bpp: f64,
    pub seed: u64,
    /// Best PSNR found by the optimizer, before LBG. `None` for methods
    /// without an optimizer stage.
    pub ide_best_psnr: Option<f64>,
    /// PSNR of the image encoded and decoded with the final codebook.
    pub final_psnr: f64,
    pub lbg_iterations: usize,
    pub wall_time_s: f64,
    pub lbg_trace: LbgTrace,
    pub ide_history: Vec<GenerationStats>,
}

impl RunReport {
    pub fn csv_row(&self) -> String {
        let ide = self.ide_best_psnr.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{:.6}",
            self.method,
            self.image,
            self.codebook_size,
            self.bpp,
            self.seed,
            ide,
            self.final_psnr,
            self.lbg_iterations,
            self.wall_time_s
        )
    }
}

#[derive(Clone, Debug)]
pub struct TrainedCodebook {
    pub codebook: Codebook,
    pub report: RunReport,
}

/// PSNR of `img` after encoding its blocks with `cb` and decoding again.
pub fn reconstruction_psnr(img: &GrayImage, ts: &TrainingSet, cb: &Codebook) -> Result<f64> {
    let rebuilt = decode(&encode(ts, cb)?, cb)?;
    psnr(mse(img, &rebuilt)?)
}

fn check_size(ts: &TrainingSet, nc: usize) -> Result<()> {
    if nc == 0 {
        return Err(VqError::InvalidConfig("codebook size must be at least 1".into()));
    }
    if nc > ts.len() {
        return Err(VqError::CodebookTooLarge {
            codebook_size: nc,
            vectors: ts.len(),
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn finish(
    method: Method,
    image_id: &str,
    img: &GrayImage,
    ts: &TrainingSet,
    seed: u64,
    ide: Option<(f64, Vec<GenerationStats>)>,
    initial: Codebook,
    lbg_cfg: &LbgConfig,
    started: Instant,
) -> Result<TrainedCodebook> {
    let (codebook, trace) = lbg_refine(ts, &initial, lbg_cfg)?;
    let final_psnr = reconstruction_psnr(img, ts, &codebook)?;
    let (ide_best_psnr, ide_history) = match ide {
        Some((best, history)) => (Some(best), history),
        None => (None, Vec::new()),
    };
    let report = RunReport {
        method,
        image: image_id.to_owned(),
        codebook_size: codebook.len(),
        bpp: bpp(codebook.len(), ts.dim()),
        seed,
        ide_best_psnr,
        final_psnr,
        lbg_iterations: trace.iterations_run,
        wall_time_s: started.elapsed().as_secs_f64(),
        lbg_trace: trace,
        ide_history,
    };
    Ok(TrainedCodebook { codebook, report })
}

/// IDE-LBG: evolve codebooks with [`ide_optimize`] and refine the best one
/// with LBG. `ide_cfg.seed` seeds the run.
pub fn train_ide_lbg(
    image_id: &str,
    img: &GrayImage,
    nc: usize,
    block_side: usize,
    ide_cfg: &IdeConfig,
    lbg_cfg: &LbgConfig,
) -> Result<TrainedCodebook> {
    let started = Instant::now();
    ide_cfg.validate()?;
    lbg_cfg.validate()?;
    let ts = extract_blocks(img, block_side)?;
    check_size(&ts, nc)?;
    let outcome = ide_optimize(&ts, img, nc, ide_cfg)?;
    let initial = outcome.best.to_codebook(ts.dim())?;
    let best_psnr = outcome.best_psnr();
    finish(
        Method::IdeLbg,
        image_id,
        img,
        &ts,
        ide_cfg.seed,
        Some((best_psnr, outcome.history)),
        initial,
        lbg_cfg,
        started,
    )
}

/// Baseline: LBG from `nc` distinct training blocks chosen uniformly at
/// random.
pub fn train_lbg_random(
    image_id: &str,
    img: &GrayImage,
    nc: usize,
    block_side: usize,
    lbg_cfg: &LbgConfig,
    seed: u64,
) -> Result<TrainedCodebook> {
    let started = Instant::now();
    lbg_cfg.validate()?;
    let ts = extract_blocks(img, block_side)?;
    check_size(&ts, nc)?;
    let mut rng = substream(seed, RANDOM_CODEBOOK_STREAM);
    let picks = index::sample(&mut rng, ts.len(), nc).into_vec();
    let initial = Codebook::from_training_vectors(&ts, &picks)?;
    finish(
        Method::LbgRandom,
        image_id,
        img,
        &ts,
        seed,
        None,
        initial,
        lbg_cfg,
        started,
    )
}

pub fn train(
    method: Method,
    image_id: &str,
    img: &GrayImage,
    nc: usize,
    settings: &TrainSettings,
    seed: u64,
) -> Result<TrainedCodebook> {
    match method {
        Method::IdeLbg => {
            let ide = IdeConfig {
                seed,
                ..settings.ide.clone()
            };
            train_ide_lbg(image_id, img, nc, settings.block_side, &ide, &settings.lbg)
        }
        Method::LbgRandom => {
            train_lbg_random(image_id, img, nc, settings.block_side, &settings.lbg, seed)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub runs: usize,
    /// Run `r` uses seed `base_seed + r`.
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub settings: TrainSettings,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: DEFAULT_SIZES.to_vec(),
            runs: DEFAULT_RUNS,
            base_seed: 0,
            methods: Method::ALL.to_vec(),
            settings: TrainSettings::default(),
        }
    }
}

/// Mean and sample standard deviation of final PSNR for one
/// (method, image, codebook size) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub image: String,
    pub codebook_size: usize,
    pub bpp: f64,
    pub mean_psnr: f64,
    pub std_psnr: f64,
    pub runs: usize,
}

impl SummaryRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.method,
            self.image,
            self.codebook_size,
            self.bpp,
            self.mean_psnr,
            self.std_psnr,
            self.runs
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub runs: Vec<RunReport>,
    pub summary: Vec<SummaryRow>,
}

impl SweepResult {
    pub fn extend(&mut self, other: SweepResult) {
        self.runs.extend(other.runs);
        self.summary.extend(other.summary);
    }

    pub fn runs_csv(&self) -> String {
        let mut out = format!("{RUN_CSV_HEADER}\n");
        for r in &self.runs {
            writeln!(out, "{}", r.csv_row()).unwrap();
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_CSV_HEADER}\n");
        for s in &self.summary {
            writeln!(out, "{}", s.csv_row()).unwrap();
        }
        out
    }

    pub fn summary_for(&self, method: Method, nc: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|s| s.method == method && s.codebook_size == nc)
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Trains one codebook per (method, size, run) on `img`. Rows come back in
/// (method, size, run) order whatever order the cells finish in.
pub fn benchmark_sweep(image_id: &str, img: &GrayImage, cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.sizes.is_empty() {
        return Err(VqError::InvalidConfig("no codebook sizes given".into()));
    }
    if cfg.runs == 0 {
        return Err(VqError::InvalidConfig("runs must be at least 1".into()));
    }
    if cfg.methods.is_empty() {
        return Err(VqError::InvalidConfig("no methods given".into()));
    }

    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for &nc in &cfg.sizes {
            for run in 0..cfg.runs {
                cells.push((method, nc, cfg.base_seed.wrapping_add(run as u64)));
            }
        }
    }
    let runs: Vec<RunReport> = cells
        .par_iter()
        .map(|&(method, nc, seed)| {
            train(method, image_id, img, nc, &cfg.settings, seed).map(|t| t.report)
        })
        .collect::<Result<_>>()?;

    let summary = runs
        .chunks(cfg.runs)
        .map(|group| {
            let psnrs: Vec<f64> = group.iter().map(|r| r.final_psnr).collect();
            let (mean_psnr, std_psnr) = mean_and_std(&psnrs);
            SummaryRow {
                method: group[0].method,
                image: image_id.to_owned(),
                codebook_size: group[0].codebook_size,
                bpp: group[0].bpp,
                mean_psnr,
                std_psnr,
                runs: group.len(),
            }
        })
        .collect();
    Ok(SweepResult { runs, summary })
}
