//! Blocking-artifact suppression applied after dithering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DEBLOCK_STREAM;
use crate::error::{Error, Result};
use crate::pixel_io::GrayImage;

pub const DEFAULT_WINDOW: usize = 3;

/// Median filter with an odd `window`, then add integer noise from
/// `{-1, 0, 1}` and clip to `0..=255`.
///
/// Borders replicate the nearest edge sample. A window of 1 skips both steps
/// and returns the input unchanged. The noise comes from its own stream of
/// `seed`, so it never overlaps the dither draws.
pub fn deblock(img: &GrayImage, window: usize, seed: u64) -> Result<GrayImage> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "deblock window must be odd and positive, got {window}"
        )));
    }
    if window == 1 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width(), img.height());
    let r = (window / 2) as isize;
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DEBLOCK_STREAM);
    let mut scratch = Vec::with_capacity(window * window);
    GrayImage::from_fn(w, h, |x, y| {
        scratch.clear();
        for dy in -r..=r {
            for dx in -r..=r {
                scratch.push(img.get(clamp(x as isize + dx, w), clamp(y as isize + dy, h)));
            }
        }
        let mid = scratch.len() / 2;
        let median = *scratch.select_nth_unstable(mid).1;
        let noise: i16 = rng.random_range(-1..=1);
        (i16::from(median) + noise).clamp(0, 255) as u8
    })
}
