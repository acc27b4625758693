//! Minimal portable graymap (PGM) reading and writing.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major pixels, row 0 at the top.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// Maps `u ∈ [-1, 1]` to a gray level, `-1 → 0` and `+1 → 255`, rounding
/// half up. Values outside the interval are clamped.
pub fn to_gray(u: f64) -> u8 {
    let g = (u.clamp(-1.0, 1.0) + 1.0) * 0.5 * 255.0;
    (g + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Inverse of [`to_gray`] on the 256-level lattice.
pub fn from_gray(g: u8) -> f64 {
    2.0 * g as f64 / 255.0 - 1.0
}

/// Encodes a binary (P5) PGM with maxval 255.
pub fn encode_p5(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    std::fs::write(path, encode_p5(img)).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

/// Decodes P2 (ASCII) or P5 (binary) PGM data. Gray levels are rescaled to
/// 0..=255 when maxval differs.
pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    let bad = |m: &str| Error::invalid(format!("malformed PGM: {m}"));
    let mut pos = 0;
    let mut token = || -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token().ok_or_else(|| bad("empty"))?;
    let mut num = |what: &str| -> Result<usize> {
        token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(&format!("missing {what}")))
    };
    let width = num("width")?;
    let height = num("height")?;
    let maxval = num("maxval")?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 255 {
        return Err(bad("unsupported dimensions or maxval"));
    }
    let scale = |v: usize| ((v.min(maxval) * 255 + maxval / 2) / maxval) as u8;
    let count = width * height;
    let pixels = match magic.as_str() {
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            let raster = bytes
                .get(start..start + count)
                .ok_or_else(|| bad("truncated raster"))?;
            raster.iter().map(|&v| scale(v as usize)).collect()
        }
        "P2" => {
            let mut px = Vec::with_capacity(count);
            for _ in 0..count {
                px.push(scale(num("pixel")?));
            }
            px
        }
        other => return Err(bad(&format!("unsupported magic {other}"))),
    };
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}
