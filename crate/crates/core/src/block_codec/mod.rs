//! The block-DCT codec: transform, quantization, zigzag order, the
//! compress/decompress pipeline and fidelity metrics.

mod dct;
mod dump;
mod metrics;
mod pipeline;
mod plane;
mod quant;
mod zigzag;

use std::fmt;

pub use dct::{forward_dct, inverse_dct, LevelShift};
pub use dump::{read_levels_binary, write_coefficients_csv, write_levels_binary, write_levels_csv};
pub use metrics::{mse, psnr};
pub use pipeline::{
    jpeg_pipeline, jpeg_pipeline_with_table, reconstruct_image, transform_image, JpegOutput,
};
pub use plane::{CoefficientBlock, CoefficientPlane, LevelBlock, QuantizedPlane};
pub use quant::{dequantize, quality_to_table, quantize, QuantTable, BASE_LUMINANCE_TABLE};
pub use zigzag::{zigzag_positions, ZIGZAG};

/// A DCT frequency position: `row` is the vertical frequency, `col` the
/// horizontal one. `(0, 0)` is DC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subband {
    pub row: u8,
    pub col: u8,
}

impl Subband {
    pub const DC: Subband = Subband { row: 0, col: 0 };

    /// # Panics
    /// If either coordinate is 8 or larger.
    pub fn new(row: usize, col: usize) -> Self {
        assert!(row < 8 && col < 8, "subband ({row},{col}) out of range");
        Subband {
            row: row as u8,
            col: col as u8,
        }
    }

    /// Inverse of [`Subband::index`].
    pub fn from_index(index: usize) -> Self {
        Subband::new(index / 8, index % 8)
    }

    /// Row-major position inside a 64-entry block.
    pub fn index(self) -> usize {
        usize::from(self.row) * 8 + usize::from(self.col)
    }

    pub fn is_dc(self) -> bool {
        self == Subband::DC
    }

    /// All 64 subbands in row-major order.
    pub fn all() -> impl Iterator<Item = Subband> {
        (0..64).map(Subband::from_index)
    }
}

impl fmt::Display for Subband {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

impl serde::Serialize for Subband {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq([self.row, self.col])
    }
}
