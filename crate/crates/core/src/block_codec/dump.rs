//! Coefficient dumps.
//!
//! CSV rows are `block_x,block_y,i,j,level`, blocks in raster order and
//! subbands row-major inside each block. The binary form is a sequence of
//! little-endian `i32`: `blocks_x`, `blocks_y`, then every level in the same
//! order as the CSV rows.

use std::io::{Read, Write};

use super::plane::{CoefficientPlane, QuantizedPlane};
use crate::error::{Error, Result};

const HEADER: [&str; 5] = ["block_x", "block_y", "i", "j", "level"];

fn write_rows<W: Write, T: ToString>(
    sink: W,
    blocks_x: usize,
    blocks: impl Iterator<Item = impl IntoIterator<Item = T>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for (index, block) in blocks.enumerate() {
        let (bx, by) = (
            (index % blocks_x).to_string(),
            (index / blocks_x).to_string(),
        );
        for (k, value) in block.into_iter().enumerate() {
            w.write_record([
                bx.as_str(),
                by.as_str(),
                &(k / 8).to_string(),
                &(k % 8).to_string(),
                &value.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv sink>", e))
}

pub fn write_levels_csv(levels: &QuantizedPlane, sink: impl Write) -> Result<()> {
    write_rows(
        sink,
        levels.blocks_x(),
        levels.blocks().iter().map(|b| b.iter().copied()),
    )
}

/// Real-valued coefficients (for example the dithered plane) in the same layout.
pub fn write_coefficients_csv(plane: &CoefficientPlane, sink: impl Write) -> Result<()> {
    write_rows(
        sink,
        plane.blocks_x(),
        plane.blocks().iter().map(|b| b.iter().copied()),
    )
}

pub fn write_levels_binary(levels: &QuantizedPlane, mut sink: impl Write) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(8 + levels.n_blocks() * 256);
    buf.extend_from_slice(&(levels.blocks_x() as i32).to_le_bytes());
    buf.extend_from_slice(&(levels.blocks_y() as i32).to_le_bytes());
    for &v in levels.blocks().iter().flatten() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    sink.write_all(&buf)
}

pub fn read_levels_binary(mut source: impl Read) -> Result<QuantizedPlane> {
    let mut bytes = Vec::new();
    source
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io("<binary dump>", e))?;
    if bytes.len() < 8 || bytes.len() % 4 != 0 {
        return Err(Error::Format(
            "binary dump length is not a whole number of i32".into(),
        ));
    }
    let words: Vec<i32> = bytes
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let (bx, by) = (words[0], words[1]);
    if bx <= 0 || by <= 0 {
        return Err(Error::Format(format!("bad block counts {bx}x{by}")));
    }
    let body = &words[2..];
    if body.len() != bx as usize * by as usize * 64 {
        return Err(Error::Format(format!(
            "{} levels for a {bx}x{by} plane",
            body.len()
        )));
    }
    let blocks = body
        .chunks_exact(64)
        .map(|c| c.try_into().expect("chunk of 64"))
        .collect();
    QuantizedPlane::from_blocks(bx as usize, by as usize, blocks)
}
