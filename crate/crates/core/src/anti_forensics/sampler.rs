//! Truncated-exponential dither samplers, drawn by closed-form inverse CDF.
//!
//! Each draw consumes exactly one `u64` from the stream so that the position
//! of a coefficient in its subband stream is fixed by its block index.

use rand::RngCore;

use crate::error::{Error, Result};

/// Maps the top 52 of 64 random bits to the open interval (0, 1). Using 53
/// would let the largest value round up to exactly 1.
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

fn check(lambda: f64, step: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rate must be positive, got {lambda}"
        )));
    }
    if !(step >= 1.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step must be at least 1, got {step}"
        )));
    }
    Ok(())
}

/// Keeps `n` strictly inside (−Q/2, Q/2).
fn inside_bin(n: f64, half: f64) -> f64 {
    n.clamp(-half.next_down(), half.next_down())
}

/// Inverse CDF of the density `∝ e^{−λ|n|}` on (−Q/2, Q/2).
pub fn zero_dither_from_unit(lambda: f64, step: f64, u: f64) -> f64 {
    let half = step / 2.0;
    // Fold onto |n|: the magnitude is a truncated exponential on [0, Q/2).
    let v = 2.0 * u - 1.0;
    let mass = -(-lambda * half).exp_m1();
    let magnitude = -(-v.abs() * mass).ln_1p() / lambda;
    inside_bin(magnitude.copysign(v), half)
}

/// Inverse CDF of the density `∝ e^{−sgn(y)·λ·(n + Q/2)}` on (−Q/2, Q/2).
///
/// For positive `y` the mass sits toward the lower edge of the bin, for
/// negative `y` toward the upper edge, i.e. always toward zero magnitude.
pub fn nonzero_dither_from_unit(lambda: f64, step: f64, positive: bool, u: f64) -> f64 {
    let half = step / 2.0;
    let mass = -(-lambda * step).exp_m1();
    // Offset from the bin edge nearest to zero.
    let t = -(-u * mass).ln_1p() / lambda;
    let n = if positive { t - half } else { half - t };
    inside_bin(n, half)
}

/// Dither for a coefficient whose dequantized value is zero.
pub fn sample_dither_zero(lambda: f64, step: f64, rng: &mut impl RngCore) -> Result<f64> {
    check(lambda, step)?;
    Ok(zero_dither_from_unit(
        lambda,
        step,
        open_unit(rng.next_u64()),
    ))
}

/// Dither for a coefficient with a non-zero dequantized value of sign `sign`.
pub fn sample_dither_nonzero(
    lambda: f64,
    step: f64,
    sign: i32,
    rng: &mut impl RngCore,
) -> Result<f64> {
    check(lambda, step)?;
    if sign == 0 {
        return Err(Error::InvalidParameter("sign of y must be ±1".into()));
    }
    Ok(nonzero_dither_from_unit(
        lambda,
        step,
        sign > 0,
        open_unit(rng.next_u64()),
    ))
}

/// Uniform fill of (−Q/2, Q/2), used where the Laplacian model does not apply.
pub fn uniform_dither_from_unit(step: f64, u: f64) -> f64 {
    let half = step / 2.0;
    inside_bin((u - 0.5) * step, half)
}
