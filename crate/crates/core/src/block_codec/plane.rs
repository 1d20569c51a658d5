use super::Subband;
use crate::error::{Error, Result};

/// 64 real coefficients of one block, row-major by subband.
pub type CoefficientBlock = [f64; 64];
/// 64 integer quantization levels of one block, row-major by subband.
pub type LevelBlock = [i32; 64];

fn check_shape(blocks_x: usize, blocks_y: usize, len: usize) -> Result<()> {
    if blocks_x == 0 || blocks_y == 0 || blocks_x * blocks_y != len {
        return Err(Error::DimensionMismatch(format!(
            "{len} blocks for a {blocks_x}x{blocks_y} plane"
        )));
    }
    Ok(())
}

/// Real DCT coefficients per block. Depending on the stage this holds the
/// raw transform `X`, the dequantized `Y`, or the dithered `Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPlane {
    blocks_x: usize,
    blocks_y: usize,
    blocks: Vec<CoefficientBlock>,
}

impl CoefficientPlane {
    pub fn from_blocks(
        blocks_x: usize,
        blocks_y: usize,
        blocks: Vec<CoefficientBlock>,
    ) -> Result<Self> {
        check_shape(blocks_x, blocks_y, blocks.len())?;
        if blocks.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self {
            blocks_x,
            blocks_y,
            blocks,
        })
    }

    pub fn blocks_x(&self) -> usize {
        self.blocks_x
    }

    pub fn blocks_y(&self) -> usize {
        self.blocks_y
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[CoefficientBlock] {
        &self.blocks
    }

    pub fn block(&self, bx: usize, by: usize) -> &CoefficientBlock {
        &self.blocks[by * self.blocks_x + bx]
    }

    /// Values of one subband across all blocks, in block order.
    pub fn subband(&self, subband: Subband) -> impl ExactSizeIterator<Item = f64> + '_ {
        let k = subband.index();
        self.blocks.iter().map(move |b| b[k])
    }

    /// Same plane with every coefficient rounded to the nearest integer.
    pub fn rounded(&self) -> CoefficientPlane {
        let blocks = self.blocks.iter().map(|b| b.map(f64::round)).collect();
        CoefficientPlane {
            blocks_x: self.blocks_x,
            blocks_y: self.blocks_y,
            blocks,
        }
    }
}

/// Integer quantization levels `X'` per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedPlane {
    blocks_x: usize,
    blocks_y: usize,
    blocks: Vec<LevelBlock>,
}

impl QuantizedPlane {
    pub fn from_blocks(blocks_x: usize, blocks_y: usize, blocks: Vec<LevelBlock>) -> Result<Self> {
        check_shape(blocks_x, blocks_y, blocks.len())?;
        Ok(Self {
            blocks_x,
            blocks_y,
            blocks,
        })
    }

    pub fn blocks_x(&self) -> usize {
        self.blocks_x
    }

    pub fn blocks_y(&self) -> usize {
        self.blocks_y
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[LevelBlock] {
        &self.blocks
    }

    pub fn block(&self, bx: usize, by: usize) -> &LevelBlock {
        &self.blocks[by * self.blocks_x + bx]
    }

    pub fn subband(&self, subband: Subband) -> impl ExactSizeIterator<Item = i32> + '_ {
        let k = subband.index();
        self.blocks.iter().map(move |b| b[k])
    }
}
