use std::sync::LazyLock;

use crate::pixel_io::{PixelBlock, BLOCK, BLOCK_AREA};

/// Whether pixels are centred on zero (`P − 128`) before the transform.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelShift {
    /// Subtract 128 before the forward transform, add it back after the inverse.
    #[default]
    Centered,
    /// Transform raw pixel values.
    Raw,
}

impl LevelShift {
    fn offset(self) -> f64 {
        match self {
            LevelShift::Centered => 128.0,
            LevelShift::Raw => 0.0,
        }
    }
}

/// `BASIS[u][x] = (1/2)·C(u)·cos((2x+1)uπ/16)` with `C(0) = 1/√2`, so that the
/// 2-D transform carries the overall `1/√(2N) = 1/4` factor.
static BASIS: LazyLock<[[f64; BLOCK]; BLOCK]> = LazyLock::new(|| {
    let mut basis = [[0.0; BLOCK]; BLOCK];
    for (u, row) in basis.iter_mut().enumerate() {
        let scale = if u == 0 {
            0.5 * std::f64::consts::FRAC_1_SQRT_2
        } else {
            0.5
        };
        for (x, v) in row.iter_mut().enumerate() {
            let angle = ((2 * x + 1) * u) as f64 * std::f64::consts::PI / 16.0;
            *v = scale * angle.cos();
        }
    }
    basis
});

/// Orthonormal 8×8 DCT-II of a pixel block.
///
/// Output index `i * 8 + j` holds `D(i, j)`; `i` pairs with pixel rows and
/// `j` with pixel columns.
pub fn forward_dct(block: &PixelBlock, shift: LevelShift) -> [f64; BLOCK_AREA] {
    let basis = &*BASIS;
    let offset = shift.offset();
    // Rows first: tmp[r][j] = Σ_c P[r][c]·B[j][c]
    let mut tmp = [0.0; BLOCK_AREA];
    for r in 0..BLOCK {
        for j in 0..BLOCK {
            let mut acc = 0.0;
            for c in 0..BLOCK {
                acc += (block[r * BLOCK + c] - offset) * basis[j][c];
            }
            tmp[r * BLOCK + j] = acc;
        }
    }
    let mut out = [0.0; BLOCK_AREA];
    for i in 0..BLOCK {
        for j in 0..BLOCK {
            let mut acc = 0.0;
            for r in 0..BLOCK {
                acc += basis[i][r] * tmp[r * BLOCK + j];
            }
            out[i * BLOCK + j] = acc;
        }
    }
    out
}

/// Adjoint of [`forward_dct`]. No rounding or clipping is applied.
pub fn inverse_dct(coeffs: &[f64; BLOCK_AREA], shift: LevelShift) -> PixelBlock {
    let basis = &*BASIS;
    let offset = shift.offset();
    let mut tmp = [0.0; BLOCK_AREA];
    for r in 0..BLOCK {
        for j in 0..BLOCK {
            let mut acc = 0.0;
            for i in 0..BLOCK {
                acc += basis[i][r] * coeffs[i * BLOCK + j];
            }
            tmp[r * BLOCK + j] = acc;
        }
    }
    let mut out = [0.0; BLOCK_AREA];
    for r in 0..BLOCK {
        for c in 0..BLOCK {
            let mut acc = 0.0;
            for j in 0..BLOCK {
                acc += tmp[r * BLOCK + j] * basis[j][c];
            }
            out[r * BLOCK + c] = acc + offset;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Literal double sum of the transform definition.
    fn direct_dct(block: &PixelBlock, offset: f64) -> [f64; 64] {
        let n = 8.0_f64;
        let c = |k: usize| if k == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
        let mut out = [0.0; 64];
        for i in 0..8 {
            for j in 0..8 {
                let mut sum = 0.0;
                for x in 0..8 {
                    for y in 0..8 {
                        sum += (block[x * 8 + y] - offset)
                            * (((2 * x + 1) * i) as f64 * std::f64::consts::PI / (2.0 * n)).cos()
                            * (((2 * y + 1) * j) as f64 * std::f64::consts::PI / (2.0 * n)).cos();
                    }
                }
                out[i * 8 + j] = c(i) * c(j) * sum / (2.0 * n).sqrt();
            }
        }
        out
    }

    #[test]
    fn constant_block_with_shift_is_zero() {
        let d = forward_dct(&[128.0; 64], LevelShift::Centered);
        assert!(d.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn constant_block_without_shift_is_dc_only() {
        let d = forward_dct(&[128.0; 64], LevelShift::Raw);
        assert!((d[0] - 1024.0).abs() < 1e-9);
        assert!(d[1..].iter().all(|v| v.abs() < 1e-9));
        let d = forward_dct(&[3.0; 64], LevelShift::Raw);
        assert!((d[0] - 24.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_of_zero_and_dc() {
        let p = inverse_dct(&[0.0; 64], LevelShift::Centered);
        assert!(p.iter().all(|v| (v - 128.0).abs() < 1e-12));
        let mut c = [0.0; 64];
        c[0] = 8.0;
        let p = inverse_dct(&c, LevelShift::Raw);
        assert!(p.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn matches_literal_sum(vals in proptest::collection::vec(0.0f64..255.0, 64)) {
            let block: PixelBlock = vals.try_into().unwrap();
            for (shift, offset) in [(LevelShift::Centered, 128.0), (LevelShift::Raw, 0.0)] {
                let fast = forward_dct(&block, shift);
                let slow = direct_dct(&block, offset);
                for (a, b) in fast.iter().zip(slow.iter()) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn round_trip_and_parseval(vals in proptest::collection::vec(0.0f64..=255.0, 64)) {
            let block: PixelBlock = vals.try_into().unwrap();
            let coeffs = forward_dct(&block, LevelShift::Centered);
            let back = inverse_dct(&coeffs, LevelShift::Centered);
            for (a, b) in back.iter().zip(block.iter()) {
                prop_assert!((a - b).abs() < 1e-6);
            }
            let energy_px: f64 = block.iter().map(|v| (v - 128.0).powi(2)).sum();
            let energy_dct: f64 = coeffs.iter().map(|v| v * v).sum();
            prop_assert!((energy_px - energy_dct).abs() < 1e-6);
        }
    }
}
