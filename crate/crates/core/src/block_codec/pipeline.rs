use rayon::prelude::*;

use super::dct::{forward_dct, inverse_dct, LevelShift};
use super::plane::{CoefficientPlane, QuantizedPlane};
use super::quant::{dequantize, quality_to_table, quantize, QuantTable};
use crate::error::Result;
use crate::pixel_io::{assemble_blocks, partition_blocks, BlockGrid, GrayImage};

/// Forward DCT of every block of the cropped image.
pub fn transform_image(img: &GrayImage, shift: LevelShift) -> CoefficientPlane {
    let grid = partition_blocks(img);
    let blocks = grid
        .blocks()
        .par_iter()
        .map(|b| forward_dct(b, shift))
        .collect();
    CoefficientPlane::from_blocks(grid.blocks_x(), grid.blocks_y(), blocks)
        .expect("transform of finite pixels is finite")
}

/// Inverse DCT of every block, rounded and clipped to pixels.
pub fn reconstruct_image(plane: &CoefficientPlane, shift: LevelShift) -> GrayImage {
    let blocks = plane
        .blocks()
        .par_iter()
        .map(|c| inverse_dct(c, shift))
        .collect();
    let grid = BlockGrid::new(plane.blocks_x(), plane.blocks_y(), blocks)
        .expect("shape carried over from a valid plane");
    assemble_blocks(&grid)
}

/// Outputs of one compress/decompress cycle.
#[derive(Clone, Debug)]
pub struct JpegOutput {
    /// Decompressed pixels, cropped to whole blocks.
    pub decompressed: GrayImage,
    /// Quantized levels `X'`.
    pub levels: QuantizedPlane,
    pub table: QuantTable,
}

impl JpegOutput {
    /// Dequantized coefficients `Y` as seen by the decoder, before pixel rounding.
    pub fn dequantized(&self) -> CoefficientPlane {
        dequantize(&self.levels, &self.table)
    }
}

/// Block DCT → quantize → dequantize → inverse DCT → round → clip.
pub fn jpeg_pipeline(img: &GrayImage, quality: u32) -> Result<JpegOutput> {
    let table = quality_to_table(quality)?;
    Ok(jpeg_pipeline_with_table(img, &table))
}

/// As [`jpeg_pipeline`] with an explicit table.
pub fn jpeg_pipeline_with_table(img: &GrayImage, table: &QuantTable) -> JpegOutput {
    let shift = LevelShift::Centered;
    let levels = quantize(&transform_image(img, shift), table);
    let decompressed = reconstruct_image(&dequantize(&levels, table), shift);
    JpegOutput {
        decompressed,
        levels,
        table: *table,
    }
}
