use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use vqforge::ide::IdeConfig;
use vqforge::imaging::{decode_pgm, extract_blocks, load_image, save_image, GrayImage};
use vqforge::lbg::LbgConfig;
use vqforge::pipeline::{benchmark_sweep, train, Method, SweepConfig, SweepResult, TrainSettings};
use vqforge::quantizer::{
    bpp, encode, mse, psnr, read_codebook, read_vqim, vqim_from_bytes, write_codebook,
    write_vqim, EncodedImage,
};
use vqforge::VqError;

pub enum CliError {
    /// Bad arguments; exit status 2.
    Usage(String),
    /// I/O or corrupt input; exit status 1.
    Failure(String),
}

impl From<VqError> for CliError {
    fn from(e: VqError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failure(e.to_string())
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(name = "vqforge", version, about = "Vector-quantization codebook design and image coding")]
pub struct Cli {
    /// Worker threads; 0 uses every available core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a codebook on an image and print its run report as a CSV row.
    Train(TrainArgs),
    /// Encode an image with a codebook into a VQIM file.
    Encode(EncodeArgs),
    /// Decode a VQIM file into a PGM image.
    Decode(DecodeArgs),
    /// Compare a reconstruction (PGM or VQIM) with the original image.
    Metrics(MetricsArgs),
    /// Sweep codebook sizes and methods over repeated seeded runs.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug)]
struct Tuning {
    /// Side of the square image blocks.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    block_side: u32,
    /// Optimizer population size.
    #[arg(long = "np", default_value_t = 20)]
    population: usize,
    /// Optimizer generations.
    #[arg(long, default_value_t = 10)]
    generations: usize,
    /// LBG stops when the distortion changes by at most this much.
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    /// Crossover rate.
    #[arg(long, default_value_t = 0.9)]
    cr: f64,
    /// Weighting factor scale: F = f_scale * N(0, 1).
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    f_scale: f64,
    /// Probability that an out-of-bounds component is clamped instead of regenerated.
    #[arg(long, default_value_t = 0.5)]
    clamp_prob: f64,
    /// LBG iteration cap.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
}

impl Tuning {
    fn settings(&self) -> TrainSettings {
        TrainSettings {
            block_side: self.block_side as usize,
            ide: IdeConfig {
                population_size: self.population,
                generations: self.generations,
                crossover_rate: self.cr,
                f_scale: self.f_scale,
                repair_clamp_probability: self.clamp_prob,
                seed: 0,
            },
            lbg: LbgConfig {
                epsilon: self.epsilon,
                max_iterations: self.max_iterations,
                ..LbgConfig::default()
            },
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Training image (binary PGM).
    #[arg(long)]
    image: PathBuf,
    /// Codebook size.
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u32).range(1..))]
    nc: u32,
    /// Training method: ide-lbg or lbg-random.
    #[arg(long, default_value = "ide-lbg", value_parser = parse_method)]
    method: Method,
    /// Random seed.
    #[arg(long, env = "VQFORGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Where to write the codebook.
    #[arg(long, default_value = "codebook.txt")]
    out: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    /// Image to encode (binary PGM).
    #[arg(long)]
    image: PathBuf,
    /// Codebook file.
    #[arg(long)]
    codebook: PathBuf,
    /// Side of the square image blocks.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    block_side: u32,
    /// Where to write the encoded image.
    #[arg(long, default_value = "encoded.vqim")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Encoded image (VQIM).
    input: PathBuf,
    /// Where to write the reconstructed PGM.
    #[arg(long, default_value = "decoded.pgm")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Original image (binary PGM).
    reference: PathBuf,
    /// Reconstruction: a PGM image or a VQIM file.
    candidate: PathBuf,
    /// Codebook size used for bpp when the candidate is a PGM (0: omit bpp).
    #[arg(long, default_value_t = 0)]
    nc: usize,
    /// Block side used for bpp when the candidate is a PGM.
    #[arg(long, default_value_t = 4)]
    block_side: usize,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// Comma-separated training images (binary PGM).
    #[arg(long, value_delimiter = ',', required = true)]
    images: Vec<PathBuf>,
    /// Comma-separated codebook sizes.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128,256")]
    sizes: Vec<usize>,
    /// Seeded runs per (method, size); run r uses seed + r.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "ide-lbg,lbg-random", value_parser = parse_method)]
    methods: Vec<Method>,
    /// Base seed.
    #[arg(long, env = "VQFORGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Per-run CSV ("-" for stdout).
    #[arg(long, default_value = "bench_runs.csv")]
    out: PathBuf,
    /// Per-size summary CSV ("-" for stdout).
    #[arg(long, default_value = "bench_summary.csv")]
    report: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: VqError| e.to_string())
}

pub fn run(cli: Cli) -> CliResult {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Failure(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    })
}

fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit(text: &str) -> CliResult {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Failure(format!("stdout: {e}")))
}

fn cmd_train(args: TrainArgs) -> CliResult {
    let img = load_image(&args.image)?;
    let settings = args.tuning.settings();
    let trained = train(
        args.method,
        &image_id(&args.image),
        &img,
        args.nc as usize,
        &settings,
        args.seed,
    )?;
    write_codebook(&trained.codebook, &args.out)?;
    emit(&format!("{}\n", trained.report.csv_row()))
}

fn cmd_encode(args: EncodeArgs) -> CliResult {
    let img = load_image(&args.image)?;
    let codebook = read_codebook(&args.codebook)?;
    let ts = extract_blocks(&img, args.block_side as usize)?;
    let map = encode(&ts, &codebook)?;
    write_vqim(&EncodedImage::new(codebook, map)?, &args.out)?;
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> CliResult {
    let encoded = read_vqim(&args.input)?;
    save_image(&encoded.decode()?, &args.out)?;
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> CliResult {
    let reference = load_image(&args.reference)?;
    let bytes = fs::read(&args.candidate)
        .map_err(|e| CliError::Failure(format!("{}: {e}", args.candidate.display())))?;
    let (candidate, rate): (GrayImage, Option<f64>) = if bytes.starts_with(b"VQIM") {
        let enc = vqim_from_bytes(&bytes)?;
        let rate = bpp(enc.codebook.len(), enc.map.geometry().dim());
        (enc.decode()?, Some(rate))
    } else {
        let rate = (args.nc > 0 && args.block_side > 0)
            .then(|| bpp(args.nc, args.block_side * args.block_side));
        (decode_pgm(&bytes)?, rate)
    };
    let m = mse(&reference, &candidate)?;
    let p = psnr(m)?;
    let mut line = format!("mse={m} psnr={p}");
    if let Some(rate) = rate {
        line.push_str(&format!(" bpp={rate}"));
    }
    emit(&format!("{line}\n"))
}

fn write_csv(path: &Path, text: &str) -> CliResult {
    if path.as_os_str() == "-" {
        emit(text)
    } else {
        fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
    }
}

fn cmd_benchmark(args: BenchmarkArgs) -> CliResult {
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    if args.sizes.contains(&0) {
        return Err(CliError::Usage("codebook sizes must be at least 1".into()));
    }
    let cfg = SweepConfig {
        sizes: args.sizes.clone(),
        runs: args.runs,
        base_seed: args.seed,
        methods: args.methods.clone(),
        settings: args.tuning.settings(),
    };
    let mut result = SweepResult::default();
    for path in &args.images {
        let img = load_image(path)?;
        let id = image_id(path);
        eprintln!("benchmarking {id}");
        result.extend(benchmark_sweep(&id, &img, &cfg)?);
    }
    write_csv(&args.out, &result.runs_csv())?;
    write_csv(&args.report, &result.summary_csv())
}
