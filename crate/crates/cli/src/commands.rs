use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use dct_shield::block_codec::{
    transform_image, write_coefficients_csv, write_levels_binary, write_levels_csv, JpegOutput,
    LevelShift,
};
use dct_shield::forensic_detector::{compute_bam_with, estimate_quant_table, EstimatorConfig};
use dct_shield::{
    antiforensic_pipeline, forgery_map, jpeg_pipeline, load_image, psnr, save_image, DitherConfig,
    ForensicReport, ForgeryMap, GrayImage,
};
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::{AntiforensicArgs, CompressArgs, DetectArgs, DumpFormat, EvaluateArgs, ForgeArgs};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// `dir/<stem>.<suffix>` next to `input`.
fn sibling(input: &Path, suffix: &str) -> PathBuf {
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    input.with_file_name(format!("{stem}.{suffix}"))
}

fn load(path: &Path) -> CliResult<GrayImage> {
    let img = load_image(path)?;
    let cropped = img.cropped_to_blocks();
    if cropped.width() != img.width() || cropped.height() != img.height() {
        info!(
            "{}: cropped {}x{} to {}x{}",
            path.display(),
            img.width(),
            img.height(),
            cropped.width(),
            cropped.height()
        );
    }
    Ok(cropped)
}

/// Compresses `input` and writes the decompressed image. Returns the output
/// path.
pub fn cmd_compress(args: &CompressArgs) -> CliResult<PathBuf> {
    let img = load(&args.input)?;
    let jpeg = jpeg_pipeline(&img, args.quality)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| sibling(&args.input, &format!("q{}.pgm", args.quality)));
    save_image(&jpeg.decompressed, &out)?;

    let mut manifest = RunManifest::new("compress")
        .input(&args.input)
        .output(&out)
        .quality(args.quality);
    if let Some(dump) = &args.dump_coeffs {
        let mut sink = create(dump)?;
        match args.dump_format {
            DumpFormat::Csv => write_levels_csv(&jpeg.levels, &mut sink)?,
            DumpFormat::Binary => {
                write_levels_binary(&jpeg.levels, &mut sink).map_err(|e| CliError::io(dump, e))?
            }
        }
        manifest = manifest.output(dump).flag(
            "dump_format",
            format!("{:?}", args.dump_format).to_lowercase(),
        );
    }
    manifest.write_beside(&out)?;
    info!("wrote {}", out.display());
    Ok(out)
}

/// Runs the anti-forensic pipeline and writes the result. Returns the output
/// path.
pub fn cmd_antiforensic(args: &AntiforensicArgs) -> CliResult<PathBuf> {
    let img = load(&args.input)?;
    let cfg = DitherConfig {
        seed: args.seed,
        deblock: !args.no_deblock,
        dc_fallback: args.dc_fallback.into(),
        zero_subband_fallback: args.zero_fallback.into(),
        ..DitherConfig::default()
    };
    let out_img = antiforensic_pipeline(&img, args.quality, &cfg)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| sibling(&args.input, &format!("af.q{}.pgm", args.quality)));
    save_image(&out_img.image, &out)?;

    let degenerate = out_img.fits.iter().filter(|f| !f.is_usable()).count();
    let mut manifest = RunManifest::new("antiforensic")
        .input(&args.input)
        .output(&out)
        .quality(args.quality)
        .seed(args.seed)
        .flag("deblock", cfg.deblock)
        .flag("deblock_window", cfg.deblock_window)
        .flag(
            "dc_fallback",
            format!("{:?}", args.dc_fallback).to_lowercase(),
        )
        .flag(
            "zero_fallback",
            format!("{:?}", args.zero_fallback).to_lowercase(),
        )
        .flag("degenerate_subbands", degenerate);
    if let Some(dump) = &args.dump_coeffs {
        write_coefficients_csv(&out_img.dithered, create(dump)?)?;
        manifest = manifest.output(dump);
    }
    manifest.write_beside(&out)?;
    info!(
        "wrote {} ({degenerate} subbands without a Laplacian fit)",
        out.display()
    );
    Ok(out)
}

/// Scores `input` and optionally writes the JSON report.
pub fn cmd_detect(args: &DetectArgs) -> CliResult<ForensicReport> {
    if !args.threshold.is_finite() || args.threshold < 0.0 {
        return Err(CliError::Usage(format!(
            "threshold must be non-negative, got {}",
            args.threshold
        )));
    }
    let img = load(&args.input)?;
    let report = compute_bam_with(&img, args.threshold, &EstimatorConfig::default())?;
    if let Some(path) = &args.report {
        let json =
            serde_json::to_vec_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| CliError::io(path, e))?;
        RunManifest::new("detect")
            .input(&args.input)
            .output(path)
            .flag("threshold", args.threshold)
            .write_beside(path)?;
    }
    Ok(report)
}

/// Compresses `background` at `quality_bg` and `patch` at `quality_patch`,
/// then pastes the whole decompressed patch with its top-left corner at
/// `(x, y)`, clipped to the background.
pub fn forge_composite(
    background: &GrayImage,
    patch: &GrayImage,
    x: usize,
    y: usize,
    quality_bg: u32,
    quality_patch: u32,
) -> CliResult<GrayImage> {
    if x >= background.width() || y >= background.height() {
        return Err(CliError::Usage(format!(
            "paste position ({x}, {y}) lies outside the {}x{} background",
            background.width(),
            background.height()
        )));
    }
    let mut composite = jpeg_pipeline(background, quality_bg)?.decompressed;
    let patch = jpeg_pipeline(patch, quality_patch)?.decompressed;
    let w = patch.width().min(composite.width() - x);
    let h = patch.height().min(composite.height() - y);
    for py in 0..h {
        for px in 0..w {
            composite.set(x + px, y + py, patch.get(px, py));
        }
    }
    Ok(composite)
}

/// Builds the composite, optionally conceals it, and writes the composite,
/// the map as CSV and the map as a heatmap.
pub fn cmd_forge_demo(args: &ForgeArgs) -> CliResult<ForgeryMap> {
    let background = load(&args.background)?;
    let patch = load(&args.patch)?;
    let mut composite = forge_composite(
        &background,
        &patch,
        args.x,
        args.y,
        args.quality_bg,
        args.quality_patch,
    )?;
    if args.conceal {
        composite = antiforensic_pipeline(
            &composite,
            args.quality_bg,
            &DitherConfig::with_seed(args.seed),
        )?
        .image;
    }
    let map = forgery_map(&composite);

    save_image(&composite, &args.out)?;
    let csv_path = sibling(&args.out, "map.csv");
    map.write_csv(create(&csv_path)?)?;
    let heat_path = sibling(&args.out, "map.pgm");
    save_image(&map.heatmap(), &heat_path)?;
    RunManifest::new("forge-demo")
        .input(&args.background)
        .input(&args.patch)
        .output(&args.out)
        .output(&csv_path)
        .output(&heat_path)
        .quality(args.quality_bg)
        .seed(args.seed)
        .flag("quality_patch", args.quality_patch)
        .flag("x", args.x)
        .flag("y", args.y)
        .flag("conceal", args.conceal)
        .flag("inconsistency", map.inconsistency)
        .flag("flagged", map.flagged)
        .write_beside(&args.out)?;
    Ok(map)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationRow {
    pub image: String,
    pub quality: u32,
    pub seed: u64,
    pub bam_jpeg: f64,
    pub bam_attack: f64,
    pub psnr_attack: f64,
    /// Fraction of the 64 table entries the detector recovered exactly from
    /// the compressed image.
    pub table_recovery_rate: f64,
    pub verdict_jpeg: String,
    pub verdict_attack: String,
}

fn corpus_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "pgm")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::io(dir, "no .png or .pgm images found"));
    }
    Ok(files)
}

fn recovery_rate(jpeg: &JpegOutput) -> f64 {
    let est =
        estimate_quant_table(&transform_image(&jpeg.decompressed, LevelShift::Centered).rounded());
    let exact = est
        .table
        .steps()
        .iter()
        .zip(jpeg.table.steps())
        .filter(|(a, b)| a == b)
        .count();
    exact as f64 / 64.0
}

fn evaluate_one(
    path: &Path,
    img: &GrayImage,
    quality: u32,
    seed: u64,
    threshold: f64,
) -> CliResult<EvaluationRow> {
    let estimator = EstimatorConfig::default();
    let jpeg = jpeg_pipeline(img, quality)?;
    let detect_jpeg = compute_bam_with(&jpeg.decompressed, threshold, &estimator)?;
    let attack = antiforensic_pipeline(img, quality, &DitherConfig::with_seed(seed))?;
    let detect_attack = compute_bam_with(&attack.image, threshold, &estimator)?;
    Ok(EvaluationRow {
        image: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        quality,
        seed,
        bam_jpeg: detect_jpeg.bam,
        bam_attack: detect_attack.bam,
        psnr_attack: psnr(img, &attack.image)?,
        table_recovery_rate: recovery_rate(&jpeg),
        verdict_jpeg: detect_jpeg.verdict.to_string(),
        verdict_attack: detect_attack.verdict.to_string(),
    })
}

/// Evaluates every image × quality × seed and writes one CSV row each, in
/// sorted file order.
pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<Vec<EvaluationRow>> {
    if args.qualities.is_empty() || args.seeds.is_empty() {
        return Err(CliError::Usage(
            "need at least one quality and one seed".into(),
        ));
    }
    let files = corpus_files(&args.corpus)?;
    let images = files
        .par_iter()
        .map(|p| load(p))
        .collect::<CliResult<Vec<_>>>()?;

    let jobs: Vec<(usize, u32, u64)> = (0..files.len())
        .flat_map(|i| {
            args.qualities
                .iter()
                .flat_map(move |&q| args.seeds.iter().map(move |&s| (i, q, s)))
        })
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, q, s)| evaluate_one(&files[i], &images[i], q, s, args.threshold))
        .collect::<CliResult<Vec<_>>>()?;

    let mut writer = csv::Writer::from_writer(create(&args.out)?);
    for row in &rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::io(&args.out, e))?;
    }
    writer.flush().map_err(|e| CliError::io(&args.out, e))?;

    let mut manifest = RunManifest::new("evaluate")
        .output(&args.out)
        .flag("qualities", args.qualities.clone())
        .flag("seeds", args.seeds.clone())
        .flag("threshold", args.threshold);
    for f in &files {
        manifest = manifest.input(f);
    }
    manifest.write_beside(&args.out)?;
    Ok(rows)
}
