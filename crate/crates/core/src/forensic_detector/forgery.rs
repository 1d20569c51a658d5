//! Localizing regions whose compression history differs from the rest.

use std::io::Write;

use crate::block_codec::{transform_image, LevelShift, QuantTable};
use crate::error::{Error, Result};
use crate::pixel_io::{GrayImage, BLOCK};

use super::bam::block_artifact;
use super::step::{estimate_quant_table_with, EstimatorConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct ForgeryConfig {
    /// Blocks with `B(i)` at or below this are smooth or exactly on the
    /// lattice and are left out of the inconsistency ratio.
    pub active_floor: f64,
    /// The image is flagged when the inconsistency exceeds this.
    pub flag_ratio: f64,
    /// Outlier blocks lie above `median + outlier_iqr · IQR`.
    pub outlier_iqr: f64,
    /// The default leaves out the lattice test: a spliced image mixes two
    /// lattices in every subband, and the steps that test rejects are the
    /// ones that expose the splice.
    pub estimator: EstimatorConfig,
}

impl Default for ForgeryConfig {
    fn default() -> Self {
        Self {
            active_floor: 8.0,
            flag_ratio: 2.0,
            outlier_iqr: 5.0,
            estimator: EstimatorConfig {
                lattice: None,
                ..EstimatorConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct ForgeryMap {
    pub blocks_x: usize,
    pub blocks_y: usize,
    /// `B(i)` in row-major block order, from unrounded coefficients.
    pub per_block_b: Vec<f64>,
    pub estimated_table: QuantTable,
    /// 90th over 10th percentile of `B(i)` across active blocks; 1 when no
    /// block is active.
    pub inconsistency: f64,
    pub outliers: Vec<bool>,
    pub flagged: bool,
}

impl ForgeryMap {
    pub fn b(&self, bx: usize, by: usize) -> f64 {
        self.per_block_b[by * self.blocks_x + bx]
    }

    pub fn outlier_count(&self) -> usize {
        self.outliers.iter().filter(|&&o| o).count()
    }

    /// One CSV row per block row, no header.
    pub fn write_csv(&self, sink: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(sink);
        for row in self.per_block_b.chunks(self.blocks_x) {
            w.write_record(row.iter().map(|b| format!("{b:.6}")))?;
        }
        w.flush().map_err(|e| Error::io("<csv sink>", e))
    }

    /// Image of the map at pixel scale: each block becomes an 8×8 tile with
    /// `B(i)` scaled so the largest value is white.
    pub fn heatmap(&self) -> GrayImage {
        let max = self.per_block_b.iter().copied().fold(0.0, f64::max);
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        GrayImage::from_fn(self.blocks_x * BLOCK, self.blocks_y * BLOCK, |x, y| {
            (self.b(x / BLOCK, y / BLOCK) * scale).round() as u8
        })
        .expect("map has at least one block")
    }
}

/// Percentile with linear interpolation between order statistics.
pub(crate) fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn forgery_map(img: &GrayImage) -> ForgeryMap {
    forgery_map_with(img, &ForgeryConfig::default()).expect("default forgery config is valid")
}

/// Per-block `B(i)` against one table estimated from the whole image.
///
/// Unrounded coefficients are scored here: a region quantized on a different
/// lattice leaves larger residuals than the background, rounded or not, and
/// keeping the fractional part stops the two populations from collapsing to
/// the same small integers.
pub fn forgery_map_with(img: &GrayImage, cfg: &ForgeryConfig) -> Result<ForgeryMap> {
    let img = img.cropped_to_blocks();
    let coeffs = transform_image(&img, LevelShift::Centered);
    let estimate = estimate_quant_table_with(&coeffs.rounded(), &cfg.estimator)?;
    let per_block_b: Vec<f64> = coeffs
        .blocks()
        .iter()
        .map(|b| block_artifact(b, &estimate.table))
        .collect();

    let active = sorted(
        per_block_b
            .iter()
            .copied()
            .filter(|&b| b > cfg.active_floor),
    );
    let inconsistency = if active.is_empty() {
        1.0
    } else {
        percentile(&active, 90.0) / percentile(&active, 10.0)
    };

    let all = sorted(per_block_b.iter().copied());
    let iqr = percentile(&all, 75.0) - percentile(&all, 25.0);
    let cut = percentile(&all, 50.0) + cfg.outlier_iqr * iqr;
    let outliers = per_block_b.iter().map(|&b| b > cut).collect();

    Ok(ForgeryMap {
        blocks_x: coeffs.blocks_x(),
        blocks_y: coeffs.blocks_y(),
        per_block_b,
        estimated_table: estimate.table,
        inconsistency,
        outliers,
        flagged: inconsistency > cfg.flag_ratio,
    })
}
