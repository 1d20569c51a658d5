//! Block-DCT compression, compression forensics and anti-forensic dithering
//! for 8-bit grayscale images.
//!
//! The crate is organised the way data flows through an experiment:
//!
//! * [`pixel_io`] reads and writes rasters and cuts them into 8×8 blocks;
//! * [`block_codec`] is the transform codec (DCT, quantization, zigzag, PSNR);
//! * [`coeff_model`] builds per-subband histograms and the maximum-likelihood
//!   Laplacian fit from quantized coefficients;
//! * [`anti_forensics`] draws the conditional dither that refills each
//!   quantization bin and rebuilds a deniable image;
//! * [`forensic_detector`] estimates the quantization table from histogram
//!   spectra and scores blocking artifacts.

pub mod anti_forensics;
pub mod block_codec;
pub mod coeff_model;
mod error;
pub mod forensic_detector;
pub mod pixel_io;

pub use anti_forensics::{antiforensic_pipeline, apply_dither, deblock, DitherConfig, Fallback};
pub use block_codec::{
    jpeg_pipeline, psnr, quality_to_table, CoefficientPlane, LevelShift, QuantTable,
    QuantizedPlane, Subband,
};
pub use coeff_model::{fit_laplacian, LaplacianFit, SubbandHistogram};
pub use error::{Error, Result};
pub use forensic_detector::{compute_bam, forgery_map, ForensicReport, ForgeryMap, Verdict};
pub use pixel_io::{load_image, save_image, GrayImage};
