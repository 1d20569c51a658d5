//! Grayscale rasters, PGM/PNG I/O and the 8×8 block grid.
//!
//! Every downstream stage works on [`BlockGrid`]s. Images whose sides are not
//! multiples of eight are cropped on the right and bottom, never padded, so
//! no synthetic block statistics leak into the forensic measures.

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// Side length of a transform block.
pub const BLOCK: usize = 8;
/// Samples per block.
pub const BLOCK_AREA: usize = BLOCK * BLOCK;

/// One 8×8 block of pixel values in row-major order.
///
/// Values are real so that post-processed blocks can carry out-of-range or
/// fractional values until [`assemble_blocks`] rounds and clips them.
pub type PixelBlock = [f64; BLOCK_AREA];

/// 8-bit luminance raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width < BLOCK || height < BLOCK {
            return Err(Error::TooSmall { width, height });
        }
        if samples.len() != width * height {
            return Err(Error::SampleCount {
                expected: width * height,
                actual: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.samples[y * self.width + x] = value;
    }

    /// Width and height rounded down to whole blocks.
    pub fn block_dims(&self) -> (usize, usize) {
        (self.width / BLOCK, self.height / BLOCK)
    }

    /// Crops to the largest block-aligned region anchored at the origin.
    pub fn cropped_to_blocks(&self) -> GrayImage {
        let (bx, by) = self.block_dims();
        let (w, h) = (bx * BLOCK, by * BLOCK);
        if w == self.width && h == self.height {
            return self.clone();
        }
        let mut samples = Vec::with_capacity(w * h);
        for row in self.samples.chunks_exact(self.width).take(h) {
            samples.extend_from_slice(&row[..w]);
        }
        GrayImage {
            width: w,
            height: h,
            samples,
        }
    }

    /// Copies the `w`×`h` window whose top-left corner is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<GrayImage> {
        if x + w > self.width || y + h > self.height {
            return Err(Error::DimensionMismatch(format!(
                "window {w}x{h}+{x}+{y} exceeds {}x{}",
                self.width, self.height
            )));
        }
        GrayImage::from_fn(w, h, |cx, cy| self.get(x + cx, y + cy))
    }
}

/// The block partition of a (cropped) image.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGrid {
    blocks_x: usize,
    blocks_y: usize,
    blocks: Vec<PixelBlock>,
}

impl BlockGrid {
    pub fn new(blocks_x: usize, blocks_y: usize, blocks: Vec<PixelBlock>) -> Result<Self> {
        if blocks_x == 0 || blocks_y == 0 {
            return Err(Error::DimensionMismatch("empty block grid".into()));
        }
        if blocks.len() != blocks_x * blocks_y {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for a {blocks_x}x{blocks_y} grid",
                blocks.len()
            )));
        }
        Ok(Self {
            blocks_x,
            blocks_y,
            blocks,
        })
    }

    pub fn blocks_x(&self) -> usize {
        self.blocks_x
    }

    pub fn blocks_y(&self) -> usize {
        self.blocks_y
    }

    pub fn blocks(&self) -> &[PixelBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [PixelBlock] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<PixelBlock> {
        self.blocks
    }

    pub fn block(&self, bx: usize, by: usize) -> &PixelBlock {
        &self.blocks[by * self.blocks_x + bx]
    }
}

/// Splits an image into 8×8 blocks, left to right, top to bottom.
pub fn partition_blocks(img: &GrayImage) -> BlockGrid {
    let (blocks_x, blocks_y) = img.block_dims();
    let mut blocks = Vec::with_capacity(blocks_x * blocks_y);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let mut block = [0.0; BLOCK_AREA];
            for r in 0..BLOCK {
                let row = (by * BLOCK + r) * img.width + bx * BLOCK;
                for c in 0..BLOCK {
                    block[r * BLOCK + c] = f64::from(img.samples[row + c]);
                }
            }
            blocks.push(block);
        }
    }
    BlockGrid {
        blocks_x,
        blocks_y,
        blocks,
    }
}

/// Rounds half away from zero and clips to the 8-bit range.
pub fn to_pixel(value: f64) -> u8 {
    value.round().clamp(0.0, 255.0) as u8
}

/// Inverse of [`partition_blocks`]; block values are rounded then clipped.
pub fn assemble_blocks(grid: &BlockGrid) -> GrayImage {
    let width = grid.blocks_x * BLOCK;
    let height = grid.blocks_y * BLOCK;
    let mut samples = vec![0u8; width * height];
    for (index, block) in grid.blocks.iter().enumerate() {
        let (bx, by) = (index % grid.blocks_x, index / grid.blocks_x);
        for r in 0..BLOCK {
            let row = (by * BLOCK + r) * width + bx * BLOCK;
            for c in 0..BLOCK {
                samples[row + c] = to_pixel(block[r * BLOCK + c]);
            }
        }
    }
    GrayImage {
        width,
        height,
        samples,
    }
}

/// Integer-rounded luma of an RGB triple (0.299, 0.587, 0.114).
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    // Weights scaled by 1000 keep the arithmetic exact; the sum is never
    // negative so half-up equals half-away-from-zero here.
    let scaled = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((scaled + 500) / 1000) as u8
}

/// Loads a binary PGM (P5, maxval 255) or an 8-bit PNG.
///
/// Colour PNGs are converted to luminance with [`luma`]; alpha is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes)
    } else {
        Err(Error::Unsupported(format!(
            "{} is neither binary PGM nor PNG",
            path.display()
        )))
    }
}

/// Parses a binary P5 PGM with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        *field = read_pgm_number(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Unsupported(format!(
            "PGM maxval {maxval}, only 255 is supported"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(Error::Format(
                "PGM header not terminated by whitespace".into(),
            ))
        }
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("PGM dimensions overflow".into()))?;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::Format(format!("PGM raster truncated, need {len} bytes")))?;
    GrayImage::new(width, height, raster.to_vec())
}

fn read_pgm_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::Format("PGM header truncated".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("PGM header field is not a number".into()))
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(format!("PNG: {e}")))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Unsupported(format!(
            "PNG bit depth {:?}",
            info.bit_depth
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let samples: Vec<u8> = match info.color_type {
        png::ColorType::Grayscale => data.to_vec(),
        png::ColorType::GrayscaleAlpha => data.chunks_exact(2).map(|p| p[0]).collect(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect(),
        png::ColorType::Rgba => data
            .chunks_exact(4)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect(),
        png::ColorType::Indexed => {
            return Err(Error::Unsupported("indexed-colour PNG".into()));
        }
    };
    GrayImage::new(width, height, samples)
}

/// Serializes as binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.samples);
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), img.width as u32, img.height as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| Error::Format(format!("PNG: {e}"));
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(&img.samples).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

/// Saves as PNG when the extension says so, PGM otherwise.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        save_png(img, path)
    } else {
        save_pgm(img, path)
    }
}
