use serde::{Deserialize, Serialize};

use super::plane::{CoefficientPlane, QuantizedPlane};
use super::Subband;
use crate::error::{Error, Result};

/// Reference luminance table (ITU-T T.81 Annex K), row-major.
pub const BASE_LUMINANCE_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// 8×8 quantization steps in row-major order, every step ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u16>>", into = "Vec<Vec<u16>>")]
pub struct QuantTable {
    steps: [u16; 64],
}

impl QuantTable {
    pub fn new(steps: [u16; 64]) -> Result<Self> {
        if let Some(&bad) = steps.iter().find(|&&s| s == 0) {
            return Err(Error::InvalidStep(u32::from(bad)));
        }
        Ok(Self { steps })
    }

    /// Every step equal to `step`.
    pub fn uniform(step: u16) -> Result<Self> {
        Self::new([step; 64])
    }

    pub fn steps(&self) -> &[u16; 64] {
        &self.steps
    }

    pub fn step(&self, subband: Subband) -> u16 {
        self.steps[subband.index()]
    }

    pub fn rows(&self) -> [[u16; 8]; 8] {
        let mut rows = [[0; 8]; 8];
        for (i, row) in rows.iter_mut().enumerate() {
            row.copy_from_slice(&self.steps[i * 8..i * 8 + 8]);
        }
        rows
    }
}

impl TryFrom<Vec<Vec<u16>>> for QuantTable {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u16>>) -> Result<Self> {
        if rows.len() != 8 || rows.iter().any(|r| r.len() != 8) {
            return Err(Error::DimensionMismatch(
                "quantization table must be 8x8".into(),
            ));
        }
        let mut steps = [0; 64];
        for (dst, src) in steps.iter_mut().zip(rows.iter().flatten()) {
            *dst = *src;
        }
        QuantTable::new(steps)
    }
}

impl From<QuantTable> for Vec<Vec<u16>> {
    fn from(t: QuantTable) -> Self {
        t.rows().iter().map(|r| r.to_vec()).collect()
    }
}

/// Scales [`BASE_LUMINANCE_TABLE`] by the usual IJG quality rule.
pub fn quality_to_table(quality: u32) -> Result<QuantTable> {
    if !(1..=100).contains(&quality) {
        return Err(Error::Quality(quality));
    }
    let scale = if quality < 50 {
        5000 / quality
    } else {
        200 - 2 * quality
    };
    let mut steps = [0u16; 64];
    for (dst, &base) in steps.iter_mut().zip(BASE_LUMINANCE_TABLE.iter()) {
        *dst = ((u32::from(base) * scale + 50) / 100).clamp(1, 255) as u16;
    }
    QuantTable::new(steps)
}

/// `X' = round(X / Q)`, half away from zero.
pub fn quantize(plane: &CoefficientPlane, table: &QuantTable) -> QuantizedPlane {
    let blocks = plane
        .blocks()
        .iter()
        .map(|block| {
            let mut levels = [0i32; 64];
            for ((level, &x), &q) in levels.iter_mut().zip(block.iter()).zip(table.steps.iter()) {
                *level = (x / f64::from(q)).round() as i32;
            }
            levels
        })
        .collect();
    QuantizedPlane::from_blocks(plane.blocks_x(), plane.blocks_y(), blocks)
        .expect("shape carried over from a valid plane")
}

/// `Y = Q · X'`.
pub fn dequantize(levels: &QuantizedPlane, table: &QuantTable) -> CoefficientPlane {
    let blocks = levels
        .blocks()
        .iter()
        .map(|block| {
            let mut coeffs = [0.0; 64];
            for ((y, &l), &q) in coeffs.iter_mut().zip(block.iter()).zip(table.steps.iter()) {
                *y = f64::from(l) * f64::from(q);
            }
            coeffs
        })
        .collect();
    CoefficientPlane::from_blocks(levels.blocks_x(), levels.blocks_y(), blocks)
        .expect("shape carried over from a valid plane")
}
