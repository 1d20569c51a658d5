#![allow(dead_code)]

use std::path::PathBuf;

use dct_shield::{load_image, GrayImage};

pub const CORPUS: [&str; 6] = ["camera", "astronaut", "brick", "gravel", "moon", "coffee"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_image(name: &str) -> GrayImage {
    load_image(corpus_dir().join(format!("{name}.png")))
        .unwrap_or_else(|e| panic!("loading {name}: {e}"))
        .cropped_to_blocks()
}
