//! Per-subband coefficient statistics and the maximum-likelihood Laplacian
//! fit computed from quantized data.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::block_codec::{CoefficientPlane, QuantTable, QuantizedPlane, Subband};
use crate::error::{Error, Result};

/// Integer-binned histogram of one subband across all blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubbandHistogram {
    pub subband: Subband,
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl SubbandHistogram {
    /// Bins values after rounding each to the nearest integer.
    pub fn from_values(subband: Subband, values: impl IntoIterator<Item = f64>) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for v in values {
            *counts.entry(v.round() as i64).or_insert(0) += 1;
            total += 1;
        }
        Self {
            subband,
            counts,
            total,
        }
    }

    pub fn from_plane(plane: &CoefficientPlane, subband: Subband) -> Self {
        Self::from_values(subband, plane.subband(subband))
    }

    pub fn from_levels(levels: &QuantizedPlane, subband: Subband) -> Self {
        Self::from_values(subband, levels.subband(subband).map(f64::from))
    }

    pub fn counts(&self) -> &BTreeMap<i64, u64> {
        &self.counts
    }

    pub fn count(&self, value: i64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Largest absolute value present, 0 for an empty histogram.
    pub fn max_abs(&self) -> u64 {
        self.counts
            .keys()
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Smallest `r` such that at least `fraction` of the mass has `|v| ≤ r`.
    pub fn abs_quantile(&self, fraction: f64) -> u64 {
        let mut by_abs: BTreeMap<u64, u64> = BTreeMap::new();
        for (&v, &c) in &self.counts {
            *by_abs.entry(v.unsigned_abs()).or_insert(0) += c;
        }
        let needed = (fraction * self.total as f64).ceil() as u64;
        let mut seen = 0;
        for (&a, &c) in &by_abs {
            seen += c;
            if seen >= needed {
                return a;
            }
        }
        self.max_abs()
    }

    /// Writes `value,count` rows in ascending value order.
    pub fn write_csv(&self, sink: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["value", "count"])?;
        for (v, c) in &self.counts {
            w.write_record([v.to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv sink>", e))
    }

    /// File name used by [`export_histograms`]: `hist_i_j.csv`.
    pub fn file_name(&self) -> String {
        format!("hist_{}_{}.csv", self.subband.row, self.subband.col)
    }
}

/// Writes every histogram to `dir/hist_i_j.csv`.
pub fn export_histograms(histograms: &[SubbandHistogram], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for h in histograms {
        let path = dir.join(h.file_name());
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        h.write_csv(std::io::BufWriter::new(file))?;
    }
    Ok(())
}

/// All 64 histograms of a plane, row-major by subband.
pub fn plane_histograms(plane: &CoefficientPlane) -> Vec<SubbandHistogram> {
    Subband::all()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|sb| SubbandHistogram::from_plane(plane, sb))
        .collect()
}

/// Why a fit cannot drive the Laplacian dither.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    /// Every observation quantized to zero, so the rate estimate diverges.
    AllZeroSubband,
    NegativeRadicand,
    GammaOutOfRange,
    /// DC coefficients are not Laplacian; the numbers are kept for reference.
    ModelMismatch,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Degeneracy::AllZeroSubband => "all-zero subband",
            Degeneracy::NegativeRadicand => "negative radicand",
            Degeneracy::GammaOutOfRange => "gamma outside (0,1)",
            Degeneracy::ModelMismatch => "model-mismatch",
        })
    }
}

/// Maximum-likelihood Laplacian fit of one subband.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LaplacianFit {
    pub subband: Subband,
    pub step: u32,
    pub lambda_ml: f64,
    pub n_total: u64,
    pub n_zero: u64,
    pub n_nonzero: u64,
    /// Sum of absolute dequantized values.
    pub s_abs_sum: f64,
    pub gamma: f64,
    pub degenerate: Option<Degeneracy>,
}

impl LaplacianFit {
    pub fn is_usable(&self) -> bool {
        self.degenerate.is_none()
    }
}

/// Fits a Laplacian rate from dequantized observations `y_k` that lie on the
/// lattice of `step`.
///
/// With `N0` zeros, `N1` non-zeros, `N = N0 + N1` and `S = Σ|y_k|`, the
/// likelihood of the quantized data is maximised at `λ = −(2/Q)·ln γ` where
/// `γ ∈ (0, 1)` is the positive root of
/// `(2NQ + 4S)·γ² + 2N0Q·γ − (4S − 2N1Q) = 0`.
pub fn fit_laplacian(subband: Subband, values: &[f64], step: u32) -> Result<LaplacianFit> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if step == 0 {
        return Err(Error::InvalidStep(0));
    }
    let q = f64::from(step);
    let mut n_zero = 0u64;
    let mut s_abs_sum = 0.0;
    for &y in values {
        if (y / q).round() == 0.0 {
            n_zero += 1;
        } else {
            s_abs_sum += y.abs();
        }
    }
    let n_total = values.len() as u64;
    let n_nonzero = n_total - n_zero;
    let mut fit = LaplacianFit {
        subband,
        step,
        lambda_ml: f64::INFINITY,
        n_total,
        n_zero,
        n_nonzero,
        s_abs_sum,
        gamma: 0.0,
        degenerate: None,
    };
    if n_nonzero == 0 {
        fit.degenerate = Some(Degeneracy::AllZeroSubband);
        return Ok(fit);
    }

    let (n, n0, n1) = (n_total as f64, n_zero as f64, n_nonzero as f64);
    let a = 2.0 * n * q + 4.0 * s_abs_sum;
    let half_b = n0 * q;
    let c = 4.0 * s_abs_sum - 2.0 * n1 * q;
    let radicand = half_b * half_b + a * c;
    if radicand < 0.0 {
        fit.degenerate = Some(Degeneracy::NegativeRadicand);
        return Ok(fit);
    }
    // Rationalised root, stable when N0·Q dominates.
    let gamma = c / (half_b + radicand.sqrt());
    fit.gamma = gamma;
    if !(gamma > 0.0 && gamma < 1.0) {
        fit.degenerate = Some(Degeneracy::GammaOutOfRange);
        return Ok(fit);
    }
    fit.lambda_ml = -2.0 / q * gamma.ln();
    Ok(fit)
}

/// Fits all 64 subbands of a quantized plane. DC is flagged
/// [`Degeneracy::ModelMismatch`] whatever its statistics.
pub fn fit_subbands(levels: &QuantizedPlane, table: &QuantTable) -> Vec<LaplacianFit> {
    Subband::all()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|sb| {
            let q = table.step(sb);
            let values: Vec<f64> = levels
                .subband(sb)
                .map(|l| f64::from(l) * f64::from(q))
                .collect();
            let mut fit = fit_laplacian(sb, &values, u32::from(q))
                .expect("non-empty plane and non-zero step");
            if sb.is_dc() {
                fit.degenerate = Some(Degeneracy::ModelMismatch);
            }
            fit
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SB: Subband = Subband { row: 1, col: 2 };

    /// Exact log-likelihood of lattice data under Laplacian(λ) quantized with step q.
    fn log_likelihood(lambda: f64, q: f64, n0: f64, n1: f64, s: f64) -> f64 {
        let zero = -(-lambda * q / 2.0).exp_m1();
        let nonzero_tail = (-(-lambda * q).exp_m1()).ln() + lambda * q / 2.0 - (2f64).ln();
        n0 * zero.ln() + n1 * nonzero_tail - lambda * s
    }

    fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if f(a) < f(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn all_zero_is_degenerate() {
        let fit = fit_laplacian(SB, &[0.0; 10], 8).unwrap();
        assert_eq!(fit.degenerate, Some(Degeneracy::AllZeroSubband));
        assert_eq!(fit.degenerate.unwrap().to_string(), "all-zero subband");
        assert_eq!(fit.n_zero, 10);
        assert!(!fit.is_usable());
    }

    #[test]
    fn empty_and_zero_step_are_errors() {
        assert!(matches!(fit_laplacian(SB, &[], 8), Err(Error::EmptyInput)));
        assert!(matches!(
            fit_laplacian(SB, &[1.0], 0),
            Err(Error::InvalidStep(0))
        ));
    }

    #[test]
    fn no_zero_observations() {
        // N0 = 0: γ = sqrt((4S − 2N1Q) / (4S + 2N1Q)).
        let values = [10.0, -20.0, 30.0, -10.0, 10.0];
        let fit = fit_laplacian(SB, &values, 10).unwrap();
        let (s, n1, q): (f64, f64, f64) = (80.0, 5.0, 10.0);
        let expect = ((4.0 * s - 2.0 * n1 * q) / (4.0 * s + 2.0 * n1 * q)).sqrt();
        assert!((fit.gamma - expect).abs() < 1e-12);
        let oracle = golden_max(|l| log_likelihood(l, q, 0.0, n1, s), 1e-6, 5.0);
        assert!((fit.lambda_ml - oracle).abs() / oracle < 1e-6);
    }

    #[test]
    fn matches_numeric_likelihood_maximum() {
        for (n0, n1, s, q) in [
            (900.0, 100.0, 2000.0, 10.0),
            (10.0, 990.0, 50000.0, 4.0),
            (5000.0, 3.0, 48.0, 16.0),
        ] {
            let mut values = vec![0.0; n0 as usize];
            // Spread S over n1 lattice points.
            let mut remaining = s;
            for k in 0..n1 as usize {
                let left = n1 as usize - k;
                let v = ((remaining / left as f64 / q).round().max(1.0)) * q;
                values.push(if k % 2 == 0 { v } else { -v });
                remaining -= v;
            }
            let s_real: f64 = values.iter().map(|v: &f64| v.abs()).sum();
            let fit = fit_laplacian(SB, &values, q as u32).unwrap();
            let oracle = golden_max(|l| log_likelihood(l, q, n0, n1, s_real), 1e-8, 10.0);
            assert!(
                (fit.lambda_ml - oracle).abs() / oracle < 1e-6,
                "{} vs {}",
                fit.lambda_ml,
                oracle
            );
        }
    }

    #[test]
    fn dc_is_flagged() {
        let blocks = vec![[3i32; 64]; 4];
        let levels = QuantizedPlane::from_blocks(2, 2, blocks).unwrap();
        let fits = fit_subbands(&levels, &QuantTable::uniform(2).unwrap());
        assert_eq!(fits.len(), 64);
        assert_eq!(fits[0].degenerate, Some(Degeneracy::ModelMismatch));
        assert!(fits[1].is_usable());
        assert_eq!(fits[5].subband, Subband::new(0, 5));
    }

    #[test]
    fn histogram_basics() {
        let blocks = vec![[0.0; 64]; 6];
        let plane = CoefficientPlane::from_blocks(3, 2, blocks).unwrap();
        let h = SubbandHistogram::from_plane(&plane, SB);
        assert_eq!(h.counts().len(), 1);
        assert_eq!(h.count(0), 6);
        assert_eq!(h.total(), 6);

        let h = SubbandHistogram::from_values(SB, [10.0, -10.0, 20.0, 0.0, 30.0, 10.0]);
        assert!(h.counts().keys().all(|v| v % 10 == 0));
        assert_eq!(h.total(), h.counts().values().sum::<u64>());
        assert_eq!(h.abs_quantile(0.5), 10);
        assert_eq!(h.abs_quantile(1.0), 30);
    }

    #[test]
    fn histogram_csv_export() {
        let dir = tempfile::tempdir().unwrap();
        let h = SubbandHistogram::from_values(Subband::new(2, 5), [1.0, 1.0, -3.0]);
        export_histograms(std::slice::from_ref(&h), dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("hist_2_5.csv")).unwrap();
        assert_eq!(text, "value,count\n-3,1\n1,2\n");
    }

    fn lattice_sample() -> impl Strategy<Value = (Vec<i32>, u32)> {
        (proptest::collection::vec(-6i32..=6, 1..200), 1u32..40)
            .prop_filter("needs a non-zero level", |(v, _)| v.iter().any(|&l| l != 0))
    }

    proptest! {
        #[test]
        fn scale_consistency((levels, q) in lattice_sample(), k in 2u32..5) {
            let ys: Vec<f64> = levels.iter().map(|&l| f64::from(l) * f64::from(q)).collect();
            let scaled: Vec<f64> = ys.iter().map(|y| y * f64::from(k)).collect();
            let a = fit_laplacian(SB, &ys, q).unwrap();
            let b = fit_laplacian(SB, &scaled, q * k).unwrap();
            prop_assert!((a.gamma - b.gamma).abs() < 1e-12);
            prop_assert!((a.lambda_ml / f64::from(k) - b.lambda_ml).abs() <= 1e-9 * a.lambda_ml);
        }

        #[test]
        fn permutation_invariant((mut levels, q) in lattice_sample()) {
            let ys = |l: &[i32]| l.iter().map(|&v| f64::from(v) * f64::from(q)).collect::<Vec<_>>();
            let a = fit_laplacian(SB, &ys(&levels), q).unwrap();
            levels.reverse();
            let third = levels.len() / 3;
            levels.rotate_left(third);
            let b = fit_laplacian(SB, &ys(&levels), q).unwrap();
            prop_assert_eq!(a.n_zero, b.n_zero);
            prop_assert!((a.lambda_ml - b.lambda_ml).abs() <= 1e-12 * a.lambda_ml);
        }

        #[test]
        fn nondegenerate_fits_are_in_range((levels, q) in lattice_sample()) {
            let ys: Vec<f64> = levels.iter().map(|&l| f64::from(l) * f64::from(q)).collect();
            let fit = fit_laplacian(SB, &ys, q).unwrap();
            prop_assert!(fit.is_usable());
            prop_assert!(fit.gamma > 0.0 && fit.gamma < 1.0 && fit.lambda_ml > 0.0);
            prop_assert_eq!(fit.n_total, fit.n_zero + fit.n_nonzero);
        }
    }

    #[test]
    fn lambda_decreases_with_heavier_tails() {
        let q = 8.0;
        let (n0, n1) = (500.0, 200.0);
        let mut last = f64::INFINITY;
        for extra in 0..50 {
            // Same counts, S grows along the lattice.
            let s = n1 * q + f64::from(extra) * 40.0 * q;
            let mut values = vec![0.0; n0 as usize];
            values.extend(std::iter::repeat_n(q, n1 as usize - 1));
            values.push(s - (n1 - 1.0) * q);
            let fit = fit_laplacian(SB, &values, q as u32).unwrap();
            assert!(fit.lambda_ml < last);
            last = fit.lambda_ml;
        }
    }
}
