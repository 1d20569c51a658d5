//! Anti-forensic dithering: refill every quantization bin so the coefficient
//! histograms lose their lattice comb, then rebuild the image.
//!
//! For a coefficient dequantized to `Y`, the dithered value is `Z = Y + N`
//! with `N` confined to the half-open bin `[−Q/2, Q/2)` and drawn from the
//! fitted Laplacian restricted to that bin. `Z` therefore always re-quantizes
//! to the original level.

mod deblock;
mod sampler;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::block_codec::{
    jpeg_pipeline, reconstruct_image, CoefficientPlane, JpegOutput, LevelShift, QuantTable,
    QuantizedPlane, Subband,
};
use crate::coeff_model::{fit_subbands, Degeneracy, LaplacianFit};
use crate::error::{Error, Result};
use crate::pixel_io::GrayImage;

pub use deblock::{deblock, DEFAULT_WINDOW};
pub use sampler::{
    nonzero_dither_from_unit, open_unit, sample_dither_nonzero, sample_dither_zero,
    uniform_dither_from_unit, zero_dither_from_unit,
};

/// What to add to coefficients the Laplacian model cannot describe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fallback {
    /// Uniform over the quantization bin.
    Uniform,
    /// Leave the coefficient at its dequantized value.
    #[serde(rename = "none")]
    NoDither,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DitherConfig {
    pub seed: u64,
    /// Run [`deblock`] on the rebuilt image.
    pub deblock: bool,
    /// Median window used when `deblock` is on.
    pub deblock_window: usize,
    /// Treatment of the DC subband.
    pub dc_fallback: Fallback,
    /// Treatment of AC subbands whose levels are all zero. The fitted rate
    /// diverges there and the model's limit is no dither at all.
    pub zero_subband_fallback: Fallback,
}

impl Default for DitherConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            deblock: true,
            deblock_window: DEFAULT_WINDOW,
            dc_fallback: Fallback::Uniform,
            zero_subband_fallback: Fallback::NoDither,
        }
    }
}

impl DitherConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Stream id of the post-deblock noise; subbands use ids 0..64.
const DEBLOCK_STREAM: u64 = 64;

/// RNG for one subband. Draw `k` of the stream belongs to block `k`.
fn subband_stream(seed: u64, subband: Subband) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(subband.index() as u64);
    rng
}

#[derive(Clone, Copy, Debug)]
enum Rule {
    Laplacian(f64),
    Uniform,
    Keep,
}

fn rule_for(fit: &LaplacianFit, cfg: &DitherConfig) -> Rule {
    let fallback = |f: Fallback| match f {
        Fallback::Uniform => Rule::Uniform,
        Fallback::NoDither => Rule::Keep,
    };
    if fit.subband.is_dc() {
        return fallback(cfg.dc_fallback);
    }
    match fit.degenerate {
        None => Rule::Laplacian(fit.lambda_ml),
        Some(Degeneracy::AllZeroSubband) => fallback(cfg.zero_subband_fallback),
        Some(_) => Rule::Uniform,
    }
}

/// Pulls `z` back toward `y` if floating-point addition pushed it onto the
/// neighbouring bin.
fn keep_level(mut z: f64, y: f64, q: f64, level: i32) -> f64 {
    while (z / q).round() as i32 != level {
        z = if z > y { z.next_down() } else { z.next_up() };
    }
    z
}

/// Forms `Z = Y + N` for every coefficient.
///
/// Each subband draws from its own stream keyed by `(seed, subband)`, one
/// `u64` per block in block order, so the output does not depend on how the
/// work is scheduled.
pub fn apply_dither(
    levels: &QuantizedPlane,
    table: &QuantTable,
    fits: &[LaplacianFit],
    cfg: &DitherConfig,
) -> Result<CoefficientPlane> {
    let mut by_subband: Vec<Option<&LaplacianFit>> = vec![None; 64];
    for fit in fits {
        by_subband[fit.subband.index()] = Some(fit);
    }
    let fits: Vec<&LaplacianFit> = by_subband
        .into_iter()
        .enumerate()
        .map(|(k, f)| f.ok_or(Error::MissingFit(Subband::from_index(k))))
        .collect::<Result<_>>()?;

    let columns: Vec<Vec<f64>> = fits
        .par_iter()
        .map(|fit| {
            let sb = fit.subband;
            let q = f64::from(table.step(sb));
            let rule = rule_for(fit, cfg);
            let mut rng = subband_stream(cfg.seed, sb);
            levels
                .subband(sb)
                .map(|level| {
                    let y = f64::from(level) * q;
                    let n = match rule {
                        Rule::Keep => return y,
                        Rule::Uniform => uniform_dither_from_unit(q, open_unit(rng.next_u64())),
                        Rule::Laplacian(lambda) => {
                            let u = open_unit(rng.next_u64());
                            if level == 0 {
                                zero_dither_from_unit(lambda, q, u)
                            } else {
                                nonzero_dither_from_unit(lambda, q, level > 0, u)
                            }
                        }
                    };
                    keep_level(y + n, y, q, level)
                })
                .collect()
        })
        .collect();

    let blocks = (0..levels.n_blocks())
        .map(|b| std::array::from_fn(|k| columns[k][b]))
        .collect();
    CoefficientPlane::from_blocks(levels.blocks_x(), levels.blocks_y(), blocks)
}

/// Everything produced by one anti-forensic run.
#[derive(Clone, Debug)]
pub struct AntiForensicOutput {
    /// The image to publish.
    pub image: GrayImage,
    /// Rebuilt image before deblocking.
    pub dithered_image: GrayImage,
    /// The compressed intermediate the attack started from.
    pub jpeg: JpegOutput,
    pub fits: Vec<LaplacianFit>,
    /// Dithered coefficients `Z`.
    pub dithered: CoefficientPlane,
}

/// Compress at `quality`, fit, dither, rebuild, optionally deblock.
pub fn antiforensic_pipeline(
    img: &GrayImage,
    quality: u32,
    cfg: &DitherConfig,
) -> Result<AntiForensicOutput> {
    let jpeg = jpeg_pipeline(img, quality)?;
    let fits = fit_subbands(&jpeg.levels, &jpeg.table);
    let dithered = apply_dither(&jpeg.levels, &jpeg.table, &fits, cfg)?;
    let dithered_image = reconstruct_image(&dithered, LevelShift::Centered);
    let image = if cfg.deblock {
        deblock(&dithered_image, cfg.deblock_window, cfg.seed)?
    } else {
        dithered_image.clone()
    };
    Ok(AntiForensicOutput {
        image,
        dithered_image,
        jpeg,
        fits,
        dithered,
    })
}
