//! Video tensors, the QVID container format, preprocessing, classical
//! difference videos, and the synthetic gesture generator.
//!
//! ## QVID format
//!
//! A purpose-built flat binary container, chosen over video codecs for
//! bit-exactness and trivial parsing:
//!
//! ```text
//! magic    "QVID"            4 bytes
//! version  u16 LE            currently 1
//! reserved u16 LE            0
//! N        u32 LE            frame side length
//! T        u32 LE            frame count
//! pixels   T·N² × f32 LE     values in [0, 1], frame-major, row-major
//! ```
//!
//! A 64×64×32 file is therefore 16 + 4·64·64·32 = 524,304 bytes.
//!
//! ## Manifest format
//!
//! Plain UTF-8 text, one `<relative-path> <class-label>` pair per line,
//! `#` starts a comment. Paths are resolved against the manifest's
//! directory and must not contain whitespace.

mod pgm;
mod synth;

pub use pgm::import_pgm_dir;
pub use synth::{generate_synthetic, motion_band, MotionKind, PixelBand, SyntheticClassSpec};

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::statevec::RawVector;
use crate::wire;

const QVID_MAGIC: &str = "QVID";
const QVID_VERSION: u16 = 1;

/// An N×N×T grid of pixel values in [0, 1], frame-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoTensor {
    n: u32,
    t: u32,
    pixels: Vec<f32>,
}

impl VideoTensor {
    pub fn new(n: u32, t: u32, pixels: Vec<f32>) -> Result<Self> {
        if n == 0 || t == 0 {
            return Err(Error::Malformed {
                what: "video tensor",
                detail: format!("dimensions must be positive, got {n}x{n}x{t}"),
            });
        }
        let expected = n as usize * n as usize * t as usize;
        if pixels.len() != expected {
            return Err(Error::DimensionMismatch {
                left: pixels.len(),
                right: expected,
            });
        }
        for (index, &value) in pixels.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::PixelOutOfRange {
                    index,
                    value: value as f64,
                });
            }
        }
        Ok(Self { n, t, pixels })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn frame(&self, index: u32) -> &[f32] {
        let len = self.n as usize * self.n as usize;
        let start = index as usize * len;
        &self.pixels[start..start + len]
    }

    pub fn pixel(&self, frame: u32, row: u32, col: u32) -> f32 {
        self.pixels[(frame as usize * self.n as usize + row as usize) * self.n as usize
            + col as usize]
    }
}

pub fn write_video(v: &VideoTensor, w: &mut impl Write) -> Result<()> {
    w.write_all(QVID_MAGIC.as_bytes())?;
    wire::write_u16(w, QVID_VERSION)?;
    wire::write_u16(w, 0)?;
    wire::write_u32(w, v.n)?;
    wire::write_u32(w, v.t)?;
    for &p in &v.pixels {
        wire::write_f32(w, p)?;
    }
    Ok(())
}

pub fn read_video(r: &mut impl Read) -> Result<VideoTensor> {
    wire::read_magic(r, QVID_MAGIC)?;
    let version = wire::read_u16(r)?;
    if version != QVID_VERSION {
        return Err(Error::Malformed {
            what: "qvid header",
            detail: format!("unsupported version {version}"),
        });
    }
    let _reserved = wire::read_u16(r)?;
    let n = wire::read_u32(r)?;
    let t = wire::read_u32(r)?;
    // Positive dimensions, and no allocating terabytes on a corrupt header.
    if n == 0 || t == 0 || (n as u128 * n as u128 * t as u128) > (1 << 31) {
        return Err(Error::Malformed {
            what: "qvid header",
            detail: format!("implausible dimensions N={n}, T={t}"),
        });
    }
    let count = n as usize * n as usize * t as usize;
    let mut pixels = Vec::with_capacity(count);
    for _ in 0..count {
        pixels.push(wire::read_f32(r)?);
    }
    VideoTensor::new(n, t, pixels)
}

pub fn save_video(v: &VideoTensor, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_video(v, &mut w)?;
    Ok(w.flush()?)
}

pub fn load_video(path: impl AsRef<Path>) -> Result<VideoTensor> {
    read_video(&mut BufReader::new(File::open(path)?))
}

/// Per-axis box-filter windows: for each output index, the first input index
/// and the overlap weights of the window `[i·scale, (i+1)·scale)`.
fn box_windows(input: u32, output: u32) -> Vec<(usize, Vec<f64>)> {
    let scale = input as f64 / output as f64;
    (0..output)
        .map(|i| {
            let lo = i as f64 * scale;
            let hi = (i + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(input as usize);
            let weights = (first..last)
                .map(|j| {
                    let cell_lo = j as f64;
                    let cell_hi = cell_lo + 1.0;
                    (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0)
                })
                .collect();
            (first, weights)
        })
        .collect()
}

/// Crops/downscales to `target_n`×`target_n` by area averaging and resizes to
/// `target_t` frames by nearest source-index sampling (`floor(j·T/T')`),
/// which never invents pixel values.
pub fn preprocess(raw: &VideoTensor, target_n: u32, target_t: u32) -> Result<VideoTensor> {
    if target_n == 0 || target_t == 0 {
        return Err(Error::InvalidConfig(
            "preprocess targets must be positive".into(),
        ));
    }
    if raw.n() < target_n {
        return Err(Error::TooSmall {
            dim: "frame side",
            actual: raw.n(),
            target: target_n,
        });
    }
    if raw.t() < target_t {
        return Err(Error::TooSmall {
            dim: "frame count",
            actual: raw.t(),
            target: target_t,
        });
    }

    let windows = box_windows(raw.n(), target_n);
    let area = (raw.n() as f64 / target_n as f64).powi(2);
    let out_len = target_n as usize * target_n as usize;
    let mut pixels = Vec::with_capacity(out_len * target_t as usize);
    for j in 0..target_t {
        let src = (j as u64 * raw.t() as u64 / target_t as u64) as u32;
        let frame = raw.frame(src);
        for (row_start, row_weights) in &windows {
            for (col_start, col_weights) in &windows {
                let mut acc = 0.0f64;
                for (dr, wr) in row_weights.iter().enumerate() {
                    let base = (row_start + dr) * raw.n() as usize + col_start;
                    for (dc, wc) in col_weights.iter().enumerate() {
                        acc += wr * wc * frame[base + dc] as f64;
                    }
                }
                pixels.push((acc / area).clamp(0.0, 1.0) as f32);
            }
        }
    }
    VideoTensor::new(target_n, target_t, pixels)
}

/// The classical difference video: pair `p` holds
/// `normalize(frame_p) − normalize(frame_{p+1})`, flattened as
/// `pair·N² + row·N + col`. This matches the quantum path exactly: each
/// block equals the post-selected difference state scaled back by its norm.
/// An all-zero frame normalizes to the zero vector so a static black pair
/// contributes a zero block instead of failing.
pub fn difference_video(v: &VideoTensor) -> Result<RawVector> {
    if v.t() < 2 {
        return Err(Error::TooSmall {
            dim: "frame count",
            actual: v.t(),
            target: 2,
        });
    }
    let frame_len = v.n() as usize * v.n() as usize;
    let normalized: Vec<Vec<f64>> = (0..v.t())
        .map(|f| {
            let frame = v.frame(f);
            let norm = frame
                .iter()
                .map(|&p| (p as f64) * (p as f64))
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                vec![0.0; frame_len]
            } else {
                frame.iter().map(|&p| p as f64 / norm).collect()
            }
        })
        .collect();

    let pairs = v.t() as usize - 1;
    let mut values = vec![0.0f64; frame_len * pairs];
    for p in 0..pairs {
        let block = &mut values[p * frame_len..(p + 1) * frame_len];
        for (slot, (a, b)) in block
            .iter_mut()
            .zip(normalized[p].iter().zip(&normalized[p + 1]))
        {
            *slot = a - b;
        }
    }
    Ok(RawVector::new(values))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Resolved against the manifest's directory.
    pub path: PathBuf,
    pub label: String,
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match (fields.next(), fields.next(), fields.next()) {
            (Some(rel), Some(label), None) => entries.push(ManifestEntry {
                path: base.join(rel),
                label: label.to_string(),
            }),
            _ => {
                return Err(Error::Malformed {
                    what: "manifest",
                    detail: format!(
                        "line {}: expected `<relative-path> <class-label>`",
                        lineno + 1
                    ),
                })
            }
        }
    }
    Ok(entries)
}

/// Writes `<relative-path> <label>` lines. Paths are written as given.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[(String, String)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (rel, label) in entries {
        writeln!(w, "{rel} {label}")?;
    }
    Ok(w.flush()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::difference_transform;
    use crate::statevec::encode_amplitudes;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn checkerboard(n: u32, t: u32) -> VideoTensor {
        let pixels = (0..n as usize * n as usize * t as usize)
            .map(|i| ((i * 37 + i / 13) % 97) as f32 / 96.0)
            .collect();
        VideoTensor::new(n, t, pixels).unwrap()
    }

    #[test]
    fn qvid_round_trip_is_bit_exact() {
        let v = checkerboard(16, 5);
        let mut buf = Vec::new();
        write_video(&v, &mut buf).unwrap();
        let back = read_video(&mut buf.as_slice()).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn qvid_file_size_matches_header_plus_payload() {
        let v = VideoTensor::new(64, 32, vec![0.5; 64 * 64 * 32]).unwrap();
        let mut buf = Vec::new();
        write_video(&v, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 64 * 64 * 32);
        assert_eq!(buf.len(), 524_304);
    }

    #[test]
    fn qvid_rejects_bad_magic_and_truncation() {
        let v = checkerboard(4, 2);
        let mut buf = Vec::new();
        write_video(&v, &mut buf).unwrap();

        let mut corrupt = buf.clone();
        corrupt[0] = b'X';
        assert!(matches!(
            read_video(&mut corrupt.as_slice()),
            Err(Error::BadMagic { .. })
        ));

        let truncated = &buf[..buf.len() - 3];
        assert!(matches!(
            read_video(&mut &truncated[..]),
            Err(Error::TruncatedFile)
        ));
    }

    #[test]
    fn qvid_rejects_out_of_range_pixels() {
        let v = checkerboard(4, 2);
        let mut buf = Vec::new();
        write_video(&v, &mut buf).unwrap();
        buf[16..20].copy_from_slice(&1.5f32.to_le_bytes());
        assert!(matches!(
            read_video(&mut buf.as_slice()),
            Err(Error::PixelOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn preprocess_is_identity_at_target_dimensions() {
        let v = checkerboard(8, 4);
        let out = preprocess(&v, 8, 4).unwrap();
        assert_eq!(v, out);
    }

    #[test]
    fn preprocess_preserves_constants() {
        let v = VideoTensor::new(9, 3, vec![0.25; 9 * 9 * 3]).unwrap();
        let out = preprocess(&v, 6, 2).unwrap();
        for &p in out.pixels() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-6);
        }
    }

    #[test]
    fn preprocess_averages_integer_blocks() {
        // A 4x4 frame of 2x2 blocks downscales to per-block means.
        let frame = vec![
            0.0, 1.0, 0.5, 0.5, //
            1.0, 0.0, 0.5, 0.5, //
            0.2, 0.2, 1.0, 0.0, //
            0.2, 0.2, 0.0, 0.0, //
        ];
        let v = VideoTensor::new(4, 1, frame.iter().map(|&x| x as f32).collect()).unwrap();
        let out = preprocess(&v, 2, 1).unwrap();
        assert_abs_diff_eq!(out.pixel(0, 0, 0), 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(out.pixel(0, 0, 1), 0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(out.pixel(0, 1, 0), 0.2, epsilon = 1e-7);
        assert_abs_diff_eq!(out.pixel(0, 1, 1), 0.25, epsilon = 1e-7);
    }

    #[test]
    fn preprocess_rejects_upscaling() {
        let v = checkerboard(8, 4);
        assert!(matches!(
            preprocess(&v, 16, 4),
            Err(Error::TooSmall { .. })
        ));
        assert!(matches!(preprocess(&v, 8, 9), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn static_video_has_zero_difference() {
        let v = VideoTensor::new(4, 3, vec![0.7; 16 * 3]).unwrap();
        let diff = difference_video(&v).unwrap();
        assert_eq!(diff.len(), 32);
        assert!(diff.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn one_hot_frames_difference() {
        // Frame 0 lights pixel 3, frame 1 lights pixel 7.
        let mut pixels = vec![0.0f32; 32];
        pixels[3] = 1.0;
        pixels[16 + 7] = 1.0;
        let v = VideoTensor::new(4, 2, pixels).unwrap();
        let diff = difference_video(&v).unwrap();
        assert_abs_diff_eq!(diff[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(diff[7], -1.0, epsilon = 1e-12);
        let rest: f64 = diff
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 3 && *i != 7)
            .map(|(_, x)| x.abs())
            .sum();
        assert_eq!(rest, 0.0);
    }

    #[test]
    fn difference_blocks_match_normalized_frame_difference() {
        let v = checkerboard(8, 5);
        let diff = difference_video(&v).unwrap();
        let frame_len = 64;
        for p in 0..4u32 {
            let a = encode_amplitudes(&RawVector::new(
                v.frame(p).iter().map(|&x| x as f64).collect(),
            ))
            .unwrap();
            let b = encode_amplitudes(&RawVector::new(
                v.frame(p + 1).iter().map(|&x| x as f64).collect(),
            ))
            .unwrap();
            for i in 0..frame_len {
                let expected = a.amplitudes()[i] - b.amplitudes()[i];
                assert_abs_diff_eq!(
                    diff[p as usize * frame_len + i],
                    expected,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn difference_blocks_match_quantum_path() {
        let v = checkerboard(8, 5);
        let diff = difference_video(&v).unwrap();
        let frame_len = 64;
        for p in 0..4u32 {
            let to_state = |f: u32| {
                encode_amplitudes(&RawVector::new(
                    v.frame(f).iter().map(|&x| x as f64).collect(),
                ))
                .unwrap()
            };
            let outcome = difference_transform(&to_state(p), &to_state(p + 1)).unwrap();
            let norm = outcome.difference_norm();
            for i in 0..frame_len {
                assert_abs_diff_eq!(
                    diff[p as usize * frame_len + i],
                    outcome.state().amplitudes()[i] * norm,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn manifest_round_trip_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.txt");
        std::fs::write(
            &path,
            "# gesture dataset\nleft_000.qvid sweep_left\n\nright_000.qvid sweep_right # trailing\n",
        )
        .unwrap();
        let entries = read_manifest(&path).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].label, "sweep_left");
        assert_eq!(entries[0].path, dir.path().join("left_000.qvid"));
        assert_eq!(entries[1].label, "sweep_right");
    }

    #[test]
    fn manifest_rejects_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.txt");
        std::fs::write(&path, "only_one_field\n").unwrap();
        assert!(matches!(
            read_manifest(&path),
            Err(Error::Malformed { what: "manifest", .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn qvid_round_trip_property(
            n in 1u32..12,
            t in 1u32..6,
            seed in 0u64..1000,
        ) {
            let count = (n * n * t) as usize;
            let mut state = seed;
            let pixels: Vec<f32> = (0..count)
                .map(|_| {
                    state = crate::seeds::splitmix64(state);
                    (state >> 11) as f32 / (1u64 << 53) as f32
                })
                .collect();
            let v = VideoTensor::new(n, t, pixels).unwrap();
            let mut buf = Vec::new();
            write_video(&v, &mut buf).unwrap();
            let back = read_video(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(v, back);
        }
    }
}
