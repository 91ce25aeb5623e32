//! Vector-quantization image compression with codebooks designed by an
//! improved differential evolution optimizer whose best solution seeds LBG
//! refinement.
//!
//! The crate is organized bottom-up:
//!
//! * [`imaging`]: grayscale images, PGM I/O, block extraction/assembly.
//! * [`quantizer`]: codebooks, nearest-codeword encoding, decoding, metrics
//!   and the codebook/encoded-image file formats.
//! * [`lbg`]: generalized Lloyd refinement.
//! * [`ide`]: the differential evolution codebook optimizer.
//! * [`pipeline`]: IDE-LBG and random-init LBG training, and the
//!   codebook-size sweep.

pub mod error;
pub mod ide;
pub mod imaging;
pub mod lbg;
pub mod pipeline;
pub mod quantizer;
pub mod rng;

pub use error::{Result, VqError};
pub use ide::{ide_optimize, Candidate, IdeConfig, IdeOutcome};
pub use imaging::{
    assemble_blocks, extract_blocks, load_image, save_image, BlockGeometry, GrayImage,
    TrainingSet,
};
pub use lbg::{lbg_refine, EmptyCellPolicy, LbgConfig, LbgTrace};
pub use pipeline::{
    benchmark_sweep, train, train_ide_lbg, train_lbg_random, Method, RunReport, SweepConfig,
    SweepResult, TrainSettings, TrainedCodebook,
};
pub use quantizer::{
    bpp, decode, distortion, encode, mse, nearest_codeword, psnr, Codebook, EncodedImage,
    IndexMap,
};
