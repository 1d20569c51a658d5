//! The detector side: estimate the quantization table an image was coded
//! with, measure how far every block sits from that lattice, and map where
//! the measurement is inconsistent.

mod bam;
mod forgery;
mod step;

pub use bam::{
    block_artifact, compute_bam, compute_bam_with, ForensicReport, Verdict, DEFAULT_THRESHOLD,
};
pub use forgery::{forgery_map, forgery_map_with, ForgeryConfig, ForgeryMap};
pub use step::{
    estimate_quant_step, estimate_quant_step_with, estimate_quant_table, estimate_quant_table_with,
    EstimatorConfig, LatticeTest, StepEstimate, TableEstimate,
};
