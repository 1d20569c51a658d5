//! Command-line front end for `dct_shield`: compress, attack, detect, the
//! cut-and-paste demo and batch evaluation over a corpus.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dct_shield::Fallback;

pub use commands::{
    cmd_antiforensic, cmd_compress, cmd_detect, cmd_evaluate, cmd_forge_demo, forge_composite,
    EvaluationRow,
};
pub use error::{CliError, CliResult};
pub use manifest::{manifest_path, RunManifest};

/// Environment variable that caps the worker thread count.
pub const THREADS_ENV: &str = "DCT_SHIELD_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "dct-shield",
    version,
    about = "Block-DCT compression forensics and anti-forensics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compress and decompress an image with the block-DCT codec.
    Compress(CompressArgs),
    /// Compress, then dither the coefficients so the result looks uncompressed.
    Antiforensic(AntiforensicArgs),
    /// Estimate the quantization table and score blocking artifacts.
    Detect(DetectArgs),
    /// Build a cut-and-paste composite and map its blocking inconsistency.
    ForgeDemo(ForgeArgs),
    /// Run compression, attack and detection over a directory of images.
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    Csv,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FallbackArg {
    Uniform,
    None,
}

impl From<FallbackArg> for Fallback {
    fn from(f: FallbackArg) -> Self {
        match f {
            FallbackArg::Uniform => Fallback::Uniform,
            FallbackArg::None => Fallback::NoDither,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CompressArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 75)]
    pub quality: u32,
    /// Output image; defaults to `<stem>.q<quality>.pgm` beside the input.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write the quantized levels to this file.
    #[arg(long, value_name = "PATH")]
    pub dump_coeffs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DumpFormat::Csv)]
    pub dump_format: DumpFormat,
}

#[derive(Args, Debug, Clone)]
pub struct AntiforensicArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 75)]
    pub quality: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip the median filter and noise pass after dithering.
    #[arg(long)]
    pub no_deblock: bool,
    /// Dither used for the DC subband.
    #[arg(long, value_enum, default_value_t = FallbackArg::Uniform)]
    pub dc_fallback: FallbackArg,
    /// Dither used for AC subbands whose levels are all zero.
    #[arg(long, value_enum, default_value_t = FallbackArg::None)]
    pub zero_fallback: FallbackArg,
    /// Output image; defaults to `<stem>.af.q<quality>.pgm` beside the input.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Write the dithered coefficients as CSV.
    #[arg(long, value_name = "PATH")]
    pub dump_coeffs: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DetectArgs {
    pub input: PathBuf,
    /// BAM above which the image is called compressed.
    #[arg(long, default_value_t = dct_shield::forensic_detector::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Write the full report as JSON.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ForgeArgs {
    pub background: PathBuf,
    pub patch: PathBuf,
    /// Left edge of the pasted region in background pixels.
    pub x: usize,
    /// Top edge of the pasted region in background pixels.
    pub y: usize,
    #[arg(long, default_value_t = 75)]
    pub quality_bg: u32,
    #[arg(long, default_value_t = 90)]
    pub quality_patch: u32,
    /// Run the anti-forensic pass on the composite at the background quality.
    #[arg(long)]
    pub conceal: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Composite image. The map goes to `<stem>.map.csv` and `<stem>.map.pgm`.
    #[arg(long, short, default_value = "forgery.pgm")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct EvaluateArgs {
    /// Directory of PNG or PGM images.
    pub corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 75, 90])]
    pub qualities: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = dct_shield::forensic_detector::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, short, default_value = "results.csv")]
    pub out: PathBuf,
}

/// Thread count requested through [`THREADS_ENV`], if any.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Runs one parsed command inside a pool sized by [`THREADS_ENV`].
pub fn run(cli: Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads_from_env()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Compress(a) => cmd_compress(&a).map(|_| ()),
        Command::Antiforensic(a) => cmd_antiforensic(&a).map(|_| ()),
        Command::Detect(a) => {
            let report = cmd_detect(&a)?;
            println!(
                "{} bam={:.6} threshold={}",
                report.verdict, report.bam, report.threshold_used
            );
            Ok(())
        }
        Command::ForgeDemo(a) => {
            let map = cmd_forge_demo(&a)?;
            println!(
                "{} inconsistency={:.3} outlier_blocks={}",
                if map.flagged {
                    "flagged"
                } else {
                    "not-flagged"
                },
                map.inconsistency,
                map.outlier_count()
            );
            Ok(())
        }
        Command::Evaluate(a) => {
            let rows = cmd_evaluate(&a)?;
            let clean = rows
                .iter()
                .filter(|r| r.verdict_attack == "consistent-with-uncompressed")
                .count();
            println!("{} rows, attack undetected in {clean}", rows.len());
            Ok(())
        }
    }
}
