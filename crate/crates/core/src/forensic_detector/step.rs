//! Quantization-step estimation from the spectrum of a coefficient histogram.
//!
//! A subband quantized with step `q` has its mass on multiples of `q`. The
//! histogram is then a comb whose DFT power repeats with period `n/q`. Each
//! repeat is a peak, so the smoothed second difference of the power has a
//! deep minimum at every repeat: `q − 1` of them besides frequency zero.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::block_codec::{CoefficientPlane, QuantTable, Subband};
use crate::coeff_model::SubbandHistogram;
use crate::error::{Error, Result};

/// Tuning of [`estimate_quant_step_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// Fraction of the histogram mass that sets the range `R`; values
    /// beyond it are treated as outliers and dropped.
    pub range_quantile: f64,
    /// Upper bound on `R`.
    pub max_range: u64,
    /// Smallest DFT length.
    pub min_fft_len: usize,
    /// Zero-padding factor over the next power of two above `2R + 1`.
    pub oversample: usize,
    /// Length of the centred moving average, odd.
    pub smoothing: usize,
    /// A dip counts only if it lies below `depth_ratio` times the curve's
    /// value at frequency zero. This keeps finite-sample ripple out of `Num`.
    pub depth_ratio: f64,
    /// Check of each candidate step against the histogram itself; `None`
    /// accepts whatever the spectrum says.
    pub lattice: Option<LatticeTest>,
}

/// Verifies that the values outside the zero bin of a candidate step sit
/// near its multiples. Sparse outliers far from a narrow core, and narrow
/// integer histograms, give spectra with comb-like dips that fail this.
/// It assumes one lattice per subband, which a spliced image breaks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeTest {
    /// Least support: the share of values near a multiple, rescaled so
    /// that 0 is the share expected by chance and 1 is every value.
    pub min_support: f64,
    /// The on-lattice count must also be significant against the chance
    /// rate at this level (one-sided binomial test).
    pub alpha: f64,
}

impl Default for LatticeTest {
    fn default() -> Self {
        Self {
            min_support: 0.5,
            alpha: 0.01,
        }
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            range_quantile: 0.999,
            max_range: 4096,
            min_fft_len: 1024,
            oversample: 4,
            smoothing: 5,
            depth_ratio: 0.35,
            lattice: Some(LatticeTest::default()),
        }
    }
}

impl EstimatorConfig {
    fn validate(&self) -> Result<()> {
        if !(self.range_quantile > 0.0 && self.range_quantile <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "range quantile {} outside (0, 1]",
                self.range_quantile
            )));
        }
        if self.smoothing == 0 || self.smoothing % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "smoothing length must be odd, got {}",
                self.smoothing
            )));
        }
        if let Some(test) = &self.lattice {
            for (name, v) in [
                ("lattice support", test.min_support),
                ("lattice alpha", test.alpha),
            ] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} {v} outside [0, 1]"
                    )));
                }
            }
        }
        if self.oversample == 0 || self.max_range == 0 {
            return Err(Error::InvalidParameter(
                "oversample and max_range must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepEstimate {
    pub subband: Subband,
    pub estimated_step: u32,
    /// Number of qualifying minima, `estimated_step − 1`.
    pub num_minima: usize,
    /// Power spectrum `P` for non-negative frequencies; empty when the
    /// histogram had no usable support.
    pub spectrum: Vec<f64>,
    pub note: Option<String>,
}

impl StepEstimate {
    fn trivial(subband: Subband, note: &str) -> Self {
        Self {
            subband,
            estimated_step: 1,
            num_minima: 0,
            spectrum: Vec::new(),
            note: Some(note.to_owned()),
        }
    }
}

/// Estimates the step with [`EstimatorConfig::default`].
pub fn estimate_quant_step(hist: &SubbandHistogram) -> StepEstimate {
    estimate_quant_step_with(hist, &EstimatorConfig::default())
        .expect("default estimator config is valid")
}

pub fn estimate_quant_step_with(
    hist: &SubbandHistogram,
    cfg: &EstimatorConfig,
) -> Result<StepEstimate> {
    cfg.validate()?;
    let subband = hist.subband;
    let mut range = hist.abs_quantile(cfg.range_quantile);
    if range == 0 {
        range = hist.max_abs();
    }
    if range == 0 {
        return Ok(StepEstimate::trivial(subband, "insufficient-support"));
    }
    let range = range.min(cfg.max_range);

    let span = (2 * range + 1) as usize;
    let n = cfg
        .min_fft_len
        .max(span.next_power_of_two() * cfg.oversample);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (&v, &c) in hist.counts() {
        if v.unsigned_abs() <= range {
            buf[(v + range as i64) as usize].re += c as f64;
        }
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();

    let at = |k: isize| power[k.rem_euclid(n as isize) as usize];
    let d2: Vec<f64> = (0..n as isize)
        .map(|k| at(k - 1) - 2.0 * at(k) + at(k + 1))
        .collect();
    let half = (cfg.smoothing / 2) as isize;
    let smooth: Vec<f64> = (0..n as isize)
        .map(|k| {
            (-half..=half)
                .map(|o| d2[(k + o).rem_euclid(n as isize) as usize])
                .sum::<f64>()
                / cfg.smoothing as f64
        })
        .collect();

    let reference = smooth[0];
    let mut spectrum = power;
    spectrum.truncate(n / 2 + 1);
    if reference >= 0.0 || reference.is_nan() {
        return Ok(StepEstimate {
            subband,
            estimated_step: 1,
            num_minima: 0,
            spectrum,
            note: Some("flat spectrum".into()),
        });
    }
    // Dips inside the central lobe are shoulders of the envelope, not comb
    // replicas: a replica is a separate peak, so the curve must climb out of
    // the lobe (turn non-negative) before reaching it.
    let lobe = (1..n).find(|&k| smooth[k] >= 0.0).unwrap_or(n);
    let gate = cfg.depth_ratio * reference;
    let num_minima = (lobe..n.saturating_sub(lobe).max(lobe))
        .filter(|&k| {
            let s = smooth[k];
            s < smooth[k - 1] && s < smooth[(k + 1) % n] && s < gate
        })
        .count();
    let estimated_step = u32::try_from(num_minima + 1)
        .unwrap_or(u32::MAX)
        .min(u32::from(u16::MAX));
    let verdict = cfg
        .lattice
        .and_then(|test| Some((test, lattice_support(hist, estimated_step)?)));
    if let Some((test, lattice)) = verdict {
        if lattice.support < test.min_support || lattice.p_value > test.alpha {
            return Ok(StepEstimate {
                subband,
                estimated_step: 1,
                num_minima: 0,
                spectrum,
                note: Some(format!(
                    "step {estimated_step} rejected: lattice support {:.2}, p = {:.3}",
                    lattice.support, lattice.p_value
                )),
            });
        }
    }
    Ok(StepEstimate {
        subband,
        estimated_step,
        num_minima,
        spectrum,
        note: None,
    })
}

/// Table estimated from a coefficient plane, with per-subband detail.
#[derive(Clone, Debug)]
pub struct TableEstimate {
    pub table: QuantTable,
    /// One entry per subband in row-major order.
    pub steps: Vec<StepEstimate>,
}

impl TableEstimate {
    /// `"(i,j): note"` for every subband that carries a note.
    pub fn notes(&self) -> Vec<String> {
        self.steps
            .iter()
            .filter_map(|s| s.note.as_ref().map(|n| format!("{}: {n}", s.subband)))
            .collect()
    }
}

/// Runs the step estimator on the rounded coefficients of every subband.
pub fn estimate_quant_table(plane: &CoefficientPlane) -> TableEstimate {
    estimate_quant_table_with(plane, &EstimatorConfig::default())
        .expect("default estimator config is valid")
}

pub fn estimate_quant_table_with(
    plane: &CoefficientPlane,
    cfg: &EstimatorConfig,
) -> Result<TableEstimate> {
    let steps = Subband::all()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|sb| estimate_quant_step_with(&SubbandHistogram::from_plane(plane, sb), cfg))
        .collect::<Result<Vec<_>>>()?;
    let table = QuantTable::new(std::array::from_fn(|k| steps[k].estimated_step as u16))?;
    Ok(TableEstimate { table, steps })
}

struct Lattice {
    /// Share of the values outside the zero bin that lie near a multiple
    /// of the step, rescaled so that chance is 0 and every value is 1.
    support: f64,
    /// Probability of at least that many hits if values fell by chance.
    p_value: f64,
}

/// Tests the histogram against the lattice of `step`; `None` for step 1.
/// Values count as on the lattice within `step/8`, at least 1 from step 4
/// up, which absorbs the rounding and clipping drift of decoded
/// coefficients. Steps 2 and 3 need exact multiples, since a tolerance of 1
/// would cover every integer.
fn lattice_support(hist: &SubbandHistogram, step: u32) -> Option<Lattice> {
    let step = u64::from(step);
    if step <= 1 {
        return None;
    }
    let tol = if step <= 3 { 0 } else { (step / 8).max(1) };
    let (mut outside, mut on) = (0u64, 0u64);
    for (&v, &c) in hist.counts() {
        let a = v.unsigned_abs();
        if 2 * a <= step {
            continue;
        }
        outside += c;
        let r = a % step;
        if r.min(step - r) <= tol {
            on += c;
        }
    }
    if outside == 0 {
        return Some(Lattice {
            support: 0.0,
            p_value: 1.0,
        });
    }
    let chance = (2 * tol + 1) as f64 / step as f64;
    let p_value = match on {
        0 => 1.0,
        _ => Binomial::new(chance, outside)
            .map(|b| b.sf(on - 1))
            .unwrap_or(1.0),
    };
    Some(Lattice {
        support: (on as f64 / outside as f64 - chance) / (1.0 - chance),
        p_value,
    })
}
