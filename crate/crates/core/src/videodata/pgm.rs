//! Importer turning a directory of per-frame grayscale PGM images into a
//! video tensor.
//!
//! Frames are taken in lexicographic filename order, center-cropped to a
//! square (a convention, not a requirement of any source dataset), stacked,
//! and passed through `preprocess` to the target geometry. Both binary (P5)
//! and ASCII (P2) rasters are accepted, with 1- or 2-byte samples.

use std::path::Path;

use crate::error::{Error, Result};

use super::{preprocess, VideoTensor};

fn malformed(detail: impl Into<String>) -> Error {
    Error::Malformed {
        what: "pgm",
        detail: detail.into(),
    }
}

struct Tokenizer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(malformed("unexpected end of header"));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self) -> Result<u32> {
        let token = self.token()?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(format!("expected a number, got {:?}", token)))
    }
}

/// Parses one PGM image into (width, height, gray values in [0, 1]).
pub(super) fn parse_pgm(bytes: &[u8]) -> Result<(u32, u32, Vec<f32>)> {
    let mut tok = Tokenizer::new(bytes);
    let magic = tok.token()?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => return Err(malformed(format!("expected P5 or P2, got {:?}", other))),
    };
    let width = tok.number()?;
    let height = tok.number()?;
    let maxval = tok.number()?;
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(format!("maxval {maxval} outside 1..=65535")));
    }
    let count = width as usize * height as usize;
    let scale = 1.0 / maxval as f32;

    let samples: Vec<u32> = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let raster = &bytes[tok.pos + 1..];
        if maxval < 256 {
            if raster.len() < count {
                return Err(Error::TruncatedFile);
            }
            raster[..count].iter().map(|&b| b as u32).collect()
        } else {
            if raster.len() < 2 * count {
                return Err(Error::TruncatedFile);
            }
            raster[..2 * count]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                .collect()
        }
    } else {
        (0..count)
            .map(|_| tok.number())
            .collect::<Result<Vec<u32>>>()
            .map_err(|_| Error::TruncatedFile)?
    };

    let mut gray = Vec::with_capacity(count);
    for (i, &s) in samples.iter().enumerate() {
        if s > maxval {
            return Err(malformed(format!("sample {i} = {s} exceeds maxval {maxval}")));
        }
        gray.push(s as f32 * scale);
    }
    Ok((width, height, gray))
}

fn center_crop_square(width: u32, height: u32, gray: &[f32]) -> (u32, Vec<f32>) {
    let side = width.min(height);
    let row0 = ((height - side) / 2) as usize;
    let col0 = ((width - side) / 2) as usize;
    let mut out = Vec::with_capacity(side as usize * side as usize);
    for r in 0..side as usize {
        let start = (row0 + r) * width as usize + col0;
        out.extend_from_slice(&gray[start..start + side as usize]);
    }
    (side, out)
}

/// Imports all `.pgm` files of a directory (lexicographic order) as one
/// video at the target geometry.
pub fn import_pgm_dir(dir: impl AsRef<Path>, target_n: u32, target_t: u32) -> Result<VideoTensor> {
    let mut paths: Vec<_> = std::fs::read_dir(dir.as_ref())?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(malformed(format!(
            "no .pgm files in {}",
            dir.as_ref().display()
        )));
    }

    let mut side = 0u32;
    let mut pixels = Vec::new();
    for path in &paths {
        let bytes = std::fs::read(path)?;
        let (w, h, gray) = parse_pgm(&bytes)
            .map_err(|e| match e {
                Error::Malformed { detail, .. } => malformed(format!(
                    "{}: {detail}",
                    path.file_name().unwrap_or_default().to_string_lossy()
                )),
                other => other,
            })?;
        let (s, cropped) = center_crop_square(w, h, &gray);
        if side == 0 {
            side = s;
        } else if s != side {
            return Err(malformed(format!(
                "frame {} crops to {s}x{s}, expected {side}x{side}",
                path.display()
            )));
        }
        pixels.extend(cropped);
    }
    let raw = VideoTensor::new(side, paths.len() as u32, pixels)?;
    preprocess(&raw, target_n, target_t)
}
