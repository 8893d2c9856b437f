//! Binary 8-bit PGM (`P5`, maxval 255) images mapped to `[0, 1]` grids.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inpaint::Grid2D;

const MAXVAL: usize = 255;

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Splits the header into whitespace-separated tokens, skipping `#` comments,
/// and returns them with the offset of the first raster byte.
fn header_tokens(bytes: &[u8]) -> Result<(Vec<&[u8]>, usize)> {
    let mut tokens = Vec::with_capacity(4);
    let mut i = 0;
    while tokens.len() < 4 {
        match bytes.get(i) {
            None => return Err(Error::Pgm("header ends early".into())),
            Some(b'#') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => i += 1,
            Some(_) => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
                    i += 1;
                }
                tokens.push(&bytes[start..i]);
            }
        }
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(i) {
        Some(b) if b.is_ascii_whitespace() => Ok((tokens, i + 1)),
        _ => Err(Error::Pgm("missing separator after maxval".into())),
    }
}

fn parse_number(token: &[u8], what: &str) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Pgm(format!("bad {what}: {:?}", String::from_utf8_lossy(token))))
}

/// Decodes an in-memory PGM file.
pub fn decode_pgm(bytes: &[u8]) -> Result<Grid2D> {
    let (tokens, offset) = header_tokens(bytes)?;
    match tokens[0] {
        b"P5" => {}
        b"P2" => {
            return Err(Error::Pgm(
                "ASCII PGM (P2) is not supported, only binary P5".into(),
            ))
        }
        other => {
            return Err(Error::Pgm(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    }
    let width = parse_number(tokens[1], "width")?;
    let height = parse_number(tokens[2], "height")?;
    let maxval = parse_number(tokens[3], "maxval")?;
    if maxval != MAXVAL {
        return Err(Error::Pgm(format!(
            "unsupported maxval {maxval}, expected {MAXVAL}"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Pgm(format!("empty image {width}×{height}")));
    }
    let n = width * height;
    let raster = &bytes[offset..];
    if raster.len() < n {
        return Err(Error::Pgm(format!(
            "truncated raster: {} of {n} bytes",
            raster.len()
        )));
    }
    let rows: Vec<f64> = raster[..n]
        .iter()
        .map(|&b| f64::from(b) / MAXVAL as f64)
        .collect();
    Grid2D::from_row_major(width, height, &rows)
}

/// Encodes a grid as PGM; values are clamped to `[0, 1]` and rounded to the
/// nearest of the 256 levels.
pub fn encode_pgm(g: &Grid2D) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{MAXVAL}\n", g.width(), g.height()).into_bytes();
    out.extend(g.to_row_major().into_iter().map(quantize));
    out
}

fn quantize(v: f64) -> u8 {
    // NaN maps to 0
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * MAXVAL as f64).round() as u8
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Grid2D> {
    let path = path.as_ref();
    decode_pgm(&fs::read(path).map_err(io_error(path))?)
}

pub fn save_pgm(path: impl AsRef<Path>, g: &Grid2D) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(g)).map_err(io_error(path))
}
