use std::path::PathBuf;

use dct_shield::{forgery_map, load_image, GrayImage};
use dct_shield_cli::forge_composite;

const PATCH: (usize, usize, usize) = (128, 128, 192);

fn corpus_image(name: &str) -> GrayImage {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../corpus/{name}.png"));
    load_image(&path).unwrap().cropped_to_blocks()
}

/// Share of outlier blocks that fall inside the patch, and share of patch
/// blocks that are outliers.
fn localization(background: &str, patch: &str) -> (f64, f64) {
    let (x, y, size) = PATCH;
    let patch = corpus_image(patch).crop(x, y, size, size).unwrap();
    let composite = forge_composite(&corpus_image(background), &patch, x, y, 75, 90).unwrap();
    let map = forgery_map(&composite);
    let inside = |bx: usize, by: usize| {
        (x / 8..(x + size) / 8).contains(&bx) && (y / 8..(y + size) / 8).contains(&by)
    };
    let (mut hits, mut flagged) = (0, 0);
    for by in 0..map.blocks_y {
        for bx in 0..map.blocks_x {
            if map.outliers[by * map.blocks_x + bx] {
                flagged += 1;
                hits += usize::from(inside(bx, by));
            }
        }
    }
    let patch_blocks = (size / 8) * (size / 8);
    (
        hits as f64 / flagged.max(1) as f64,
        hits as f64 / patch_blocks as f64,
    )
}

#[test]
fn outlier_blocks_localize_the_patch() {
    for (background, patch) in [
        ("camera", "astronaut"),
        ("gravel", "moon"),
        ("coffee", "camera"),
    ] {
        let (precision, recall) = localization(background, patch);
        assert!(
            precision > 0.5 && recall > 0.5,
            "{background}+{patch}: precision {precision:.2} recall {recall:.2}"
        );
    }
}

#[test]
fn untouched_image_has_no_outlier_cluster() {
    let img = corpus_image("camera");
    let jpeg = dct_shield::jpeg_pipeline(&img, 75).unwrap().decompressed;
    let map = forgery_map(&jpeg);
    assert!(!map.flagged, "inconsistency {}", map.inconsistency);
    assert!(map.outlier_count() < map.per_block_b.len() / 100);
}
