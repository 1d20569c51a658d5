//! Inputs shared by the benchmarks.

use dct_shield::GrayImage;

/// Deterministic textured test image: a few low-frequency waves plus a
/// hashed high-frequency component, so every subband carries energy.
pub fn textured(width: usize, height: usize) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let smooth =
            128.0 + 60.0 * (fx / 23.0).sin() * (fy / 31.0).cos() + 25.0 * ((fx + fy) / 9.0).sin();
        let h = (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
        let grain = ((h >> 59) as f64) - 16.0;
        (smooth + grain).clamp(0.0, 255.0) as u8
    })
    .expect("benchmark images are at least one block")
}
