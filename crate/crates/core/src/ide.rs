//! Improved differential evolution over flattened codebooks.
//!
//! A candidate is a whole codebook laid out codeword after codeword. The
//! optimizer uses the DE/current-to-best/1 mutation with a normally
//! distributed weighting factor, binomial crossover and a randomized
//! boundary repair, and maximizes the PSNR of the image reconstructed from
//! the candidate codebook.

use std::fmt::Write as _;
use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Result, VqError};
use crate::imaging::{GrayImage, TrainingSet};
use crate::quantizer::{decode, encode, mse, psnr, Codebook};
use crate::rng::{candidate_stream, substream, INIT_STREAM};

pub const PIXEL_MIN: f64 = 0.0;
pub const PIXEL_MAX: f64 = 255.0;

#[derive(Clone, Debug, PartialEq)]
pub struct IdeConfig {
    /// Population size (`NP`).
    pub population_size: usize,
    /// Number of generations (`N_Gen`).
    pub generations: usize,
    /// Crossover rate (`CR`).
    pub crossover_rate: f64,
    /// The weighting factor is `f_scale * N(0, 1)`, drawn per mutant.
    pub f_scale: f64,
    /// Probability that an out-of-range component is clamped to the violated
    /// bound rather than regenerated uniformly.
    pub repair_clamp_probability: f64,
    pub seed: u64,
}

impl Default for IdeConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generations: 10,
            crossover_rate: 0.9,
            f_scale: 3.0,
            repair_clamp_probability: 0.5,
            seed: 0,
        }
    }
}

impl IdeConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(VqError::InvalidConfig(msg));
        if self.population_size < 4 {
            return fail(format!(
                "population size must be at least 4, got {}",
                self.population_size
            ));
        }
        if self.population_size >= u32::MAX as usize {
            return fail("population size too large".into());
        }
        if self.generations == 0 {
            return fail("generations must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return fail(format!(
                "crossover rate must lie in [0, 1], got {}",
                self.crossover_rate
            ));
        }
        if !(0.0..=1.0).contains(&self.repair_clamp_probability) {
            return fail(format!(
                "clamp probability must lie in [0, 1], got {}",
                self.repair_clamp_probability
            ));
        }
        if !self.f_scale.is_finite() {
            return fail(format!("f_scale must be finite, got {}", self.f_scale));
        }
        Ok(())
    }
}

/// A flattened codebook and its PSNR once evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub genome: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Candidate {
    pub fn new(genome: Vec<f64>) -> Self {
        Self {
            genome,
            fitness: None,
        }
    }

    /// Fitness, or negative infinity when not yet evaluated.
    pub fn fitness_or_min(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn to_codebook(&self, dim: usize) -> Result<Codebook> {
        Codebook::new(dim, self.genome.clone())
    }
}

/// Block indices sorted by ascending component sum (ties by index).
pub fn order_by_block_sum(ts: &TrainingSet) -> Vec<usize> {
    let sums: Vec<f64> = ts.vectors().map(|v| v.iter().sum()).collect();
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b)));
    order
}

/// Positions (into the sorted order) covered by each of `groups` groups;
/// the last group absorbs the remainder.
pub fn group_ranges(blocks: usize, groups: usize) -> Vec<Range<usize>> {
    let size = blocks / groups;
    (0..groups)
        .map(|j| {
            let end = if j + 1 == groups { blocks } else { (j + 1) * size };
            j * size..end
        })
        .collect()
}

/// Draws `np` candidates. Blocks are sorted by pixel sum and cut into `nc`
/// contiguous groups; codeword `j` of each candidate is a uniformly chosen
/// block from group `j`.
pub fn init_population<R: Rng + ?Sized>(
    ts: &TrainingSet,
    nc: usize,
    np: usize,
    rng: &mut R,
) -> Result<Vec<Candidate>> {
    if ts.is_empty() {
        return Err(VqError::EmptyTrainingSet);
    }
    if nc == 0 {
        return Err(VqError::InvalidConfig("codebook size must be at least 1".into()));
    }
    if nc > ts.len() {
        return Err(VqError::CodebookTooLarge {
            codebook_size: nc,
            vectors: ts.len(),
        });
    }
    let order = order_by_block_sum(ts);
    let groups = group_ranges(ts.len(), nc);
    let population = (0..np)
        .map(|_| {
            let mut genome = Vec::with_capacity(nc * ts.dim());
            for g in &groups {
                let pick = order[rng.random_range(g.clone())];
                genome.extend_from_slice(ts.vector(pick));
            }
            Candidate::new(genome)
        })
        .collect();
    Ok(population)
}

/// DE/current-to-best/1: `x + f (best - x) + f (r1 - r2)`.
pub fn mutate(target: &[f64], best: &[f64], r1: &[f64], r2: &[f64], f: f64) -> Result<Vec<f64>> {
    let n = target.len();
    for other in [best, r1, r2] {
        if other.len() != n {
            return Err(VqError::DimensionMismatch {
                expected: n,
                found: other.len(),
            });
        }
    }
    Ok((0..n)
        .map(|k| target[k] + f * (best[k] - target[k]) + f * (r1[k] - r2[k]))
        .collect())
}

/// Weighting factor `f_scale * z`, `z ~ N(0, 1)`.
pub fn draw_f<R: Rng + ?Sized>(rng: &mut R, f_scale: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    f_scale * z
}

/// Binomial crossover. Component `k` comes from the mutant when
/// `U(0,1) <= cr` or `k` is the single forced index.
pub fn crossover<R: Rng + ?Sized>(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if target.len() != mutant.len() {
        return Err(VqError::DimensionMismatch {
            expected: target.len(),
            found: mutant.len(),
        });
    }
    if target.is_empty() {
        return Ok(Vec::new());
    }
    let forced = rng.random_range(0..target.len());
    Ok(target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(k, (&t, &m))| {
            let u: f64 = rng.random();
            if u <= cr || k == forced {
                m
            } else {
                t
            }
        })
        .collect())
}

/// Brings every component back into `[lo, hi]`. Each violating component is
/// set to the violated bound with probability `p_clamp`, otherwise replaced
/// by a uniform draw from `[lo, hi]`.
pub fn repair_bounds<R: Rng + ?Sized>(
    genome: &mut [f64],
    lo: f64,
    hi: f64,
    p_clamp: f64,
    rng: &mut R,
) {
    assert!(lo < hi, "repair bounds must satisfy lo < hi");
    for v in genome.iter_mut() {
        if (lo..=hi).contains(v) {
            continue;
        }
        let clamp = rng.random::<f64>() < p_clamp;
        *v = if clamp && *v < lo {
            lo
        } else if clamp && *v > hi {
            hi
        } else {
            // NaN has no violated side and always regenerates
            rng.random_range(lo..=hi)
        };
    }
}

/// PSNR of `original` reconstructed through the codebook held in `genome`.
pub fn evaluate_fitness(genome: &[f64], ts: &TrainingSet, original: &GrayImage) -> Result<f64> {
    let g = ts.geometry();
    if original.width() != g.width || original.height() != g.height {
        return Err(VqError::Geometry(format!(
            "training set is {}x{}, image is {}x{}",
            g.width,
            g.height,
            original.width(),
            original.height()
        )));
    }
    if genome.is_empty() || !genome.len().is_multiple_of(ts.dim()) {
        return Err(VqError::DimensionMismatch {
            expected: ts.dim(),
            found: genome.len(),
        });
    }
    let cb = Codebook::new(ts.dim(), genome.to_vec())?;
    let reconstructed = decode(&encode(ts, &cb)?, &cb)?;
    psnr(mse(original, &reconstructed)?)
}

/// Best and mean population fitness after one generation; generation 0 is
/// the initial population.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_psnr: f64,
    pub mean_psnr: f64,
}

#[derive(Clone, Debug)]
pub struct IdeOutcome {
    pub best: Candidate,
    pub history: Vec<GenerationStats>,
}

impl IdeOutcome {
    pub fn best_psnr(&self) -> f64 {
        self.best.fitness_or_min()
    }

    /// `generation,best_psnr,mean_psnr` rows.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("generation,best_psnr,mean_psnr\n");
        for s in &self.history {
            writeln!(out, "{},{},{}", s.generation, s.best_psnr, s.mean_psnr).unwrap();
        }
        out
    }
}

fn stats(generation: usize, population: &[Candidate], best: &Candidate) -> GenerationStats {
    let mean = population.iter().map(Candidate::fitness_or_min).sum::<f64>()
        / population.len() as f64;
    GenerationStats {
        generation,
        best_psnr: best.fitness_or_min(),
        mean_psnr: mean,
    }
}

fn best_index(population: &[Candidate]) -> usize {
    let mut best = 0;
    for (i, c) in population.iter().enumerate() {
        if c.fitness_or_min() > population[best].fitness_or_min() {
            best = i;
        }
    }
    best
}

/// Two distinct indices in `0..np`, both different from `target`.
fn pick_donors<R: Rng + ?Sized>(np: usize, target: usize, rng: &mut R) -> (usize, usize) {
    let mut r1 = rng.random_range(0..np - 1);
    if r1 >= target {
        r1 += 1;
    }
    let (lo, hi) = if r1 < target { (r1, target) } else { (target, r1) };
    let mut r2 = rng.random_range(0..np - 2);
    if r2 >= lo {
        r2 += 1;
    }
    if r2 >= hi {
        r2 += 1;
    }
    assert!(r1 != r2 && r1 != target && r2 != target);
    (r1, r2)
}

/// Evolves a population of `nc`-codeword codebooks for `cfg.generations`
/// generations and returns the fittest candidate seen.
///
/// Generations are synchronous: all trials of generation `G` are built from
/// the settled population of generation `G - 1`, and each trial replaces its
/// target when its PSNR is at least as high. Each trial draws from its own
/// random stream, so the outcome depends only on the seed.
pub fn ide_optimize(
    ts: &TrainingSet,
    original: &GrayImage,
    nc: usize,
    cfg: &IdeConfig,
) -> Result<IdeOutcome> {
    cfg.validate()?;
    let np = cfg.population_size;

    let mut population = init_population(ts, nc, np, &mut substream(cfg.seed, INIT_STREAM))?;
    let fitness: Vec<f64> = population
        .par_iter()
        .map(|c| evaluate_fitness(&c.genome, ts, original))
        .collect::<Result<_>>()?;
    for (c, f) in population.iter_mut().zip(fitness) {
        c.fitness = Some(f);
    }

    let mut best = population[best_index(&population)].clone();
    let mut history = vec![stats(0, &population, &best)];

    for generation in 1..=cfg.generations {
        let leader = best_index(&population);
        let trials: Vec<Candidate> = (0..np)
            .into_par_iter()
            .map(|i| {
                let mut rng = candidate_stream(cfg.seed, generation, i);
                let (r1, r2) = pick_donors(np, i, &mut rng);
                let f = draw_f(&mut rng, cfg.f_scale);
                let mutant = mutate(
                    &population[i].genome,
                    &population[leader].genome,
                    &population[r1].genome,
                    &population[r2].genome,
                    f,
                )?;
                let mut trial =
                    crossover(&population[i].genome, &mutant, cfg.crossover_rate, &mut rng)?;
                repair_bounds(
                    &mut trial,
                    PIXEL_MIN,
                    PIXEL_MAX,
                    cfg.repair_clamp_probability,
                    &mut rng,
                );
                debug_assert!(trial.iter().all(|v| (PIXEL_MIN..=PIXEL_MAX).contains(v)));
                let fitness = evaluate_fitness(&trial, ts, original)?;
                Ok(Candidate {
                    genome: trial,
                    fitness: Some(fitness),
                })
            })
            .collect::<Result<_>>()?;

        for (target, trial) in population.iter_mut().zip(trials) {
            if trial.fitness_or_min() >= target.fitness_or_min() {
                *target = trial;
            }
        }
        let leader = best_index(&population);
        if population[leader].fitness_or_min() > best.fitness_or_min() {
            best = population[leader].clone();
        }
        history.push(stats(generation, &population, &best));
    }

    Ok(IdeOutcome { best, history })
}
