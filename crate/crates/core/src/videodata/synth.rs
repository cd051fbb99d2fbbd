//! Deterministic synthetic gesture generator.
//!
//! Four motion kinds mirror the gesture classes of the evaluation: a bright
//! square blob sweeping right-to-left, its temporal mirror sweeping
//! left-to-right, a blob growing in place ("approach") and its mirror
//! shrinking ("recede"). The time-reversed kinds are generated by rendering
//! the base kind and reversing the frame order, so equal seeds yield
//! bit-exact temporal mirrors.
//!
//! All motion stays inside a documented pixel band per kind (see
//! [`motion_band`]): sweeps keep blob rows within `[N/4, 3N/4)`, growth
//! keeps the blob inside a centered square. Uniform noise in
//! `[0, noise_amplitude]` is added to every pixel and clipped to 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seeds::{mix64, tags};

use super::VideoTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionKind {
    /// Blob sweeps right-to-left.
    SweepLeft,
    /// Temporal mirror of [`MotionKind::SweepLeft`].
    SweepRight,
    /// Blob grows in place.
    Approach,
    /// Temporal mirror of [`MotionKind::Approach`].
    Recede,
}

impl MotionKind {
    pub const ALL: [MotionKind; 4] = [
        MotionKind::SweepLeft,
        MotionKind::SweepRight,
        MotionKind::Approach,
        MotionKind::Recede,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MotionKind::SweepLeft => "sweep_left",
            MotionKind::SweepRight => "sweep_right",
            MotionKind::Approach => "approach",
            MotionKind::Recede => "recede",
        }
    }

    /// True for the kinds rendered as frame-reversals of their base kind.
    fn is_time_reversed(&self) -> bool {
        matches!(self, MotionKind::SweepRight | MotionKind::Recede)
    }

    fn base(&self) -> MotionKind {
        match self {
            MotionKind::SweepRight => MotionKind::SweepLeft,
            MotionKind::Recede => MotionKind::Approach,
            other => *other,
        }
    }
}

impl std::str::FromStr for MotionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        MotionKind::ALL
            .iter()
            .find(|k| k.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown motion kind `{s}`"))
    }
}

impl std::fmt::Display for MotionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of one synthetic class.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticClassSpec {
    pub kind: MotionKind,
    pub n: u32,
    pub t: u32,
    /// Blob side length range (inclusive). For growth kinds this is the
    /// (start, full-grown) side length.
    pub blob_size: (u32, u32),
    /// For sweeps: columns travelled per frame. For growth kinds: the
    /// fraction of the size range traversed over the video, clamped to
    /// [0, 1].
    pub speed: (f64, f64),
    /// Uniform additive noise amplitude; 0 disables noise.
    pub noise_amplitude: f64,
    pub seed: u64,
}

impl SyntheticClassSpec {
    /// Kind-appropriate defaults at the 64×64×32 evaluation geometry.
    pub fn new(kind: MotionKind, seed: u64) -> Self {
        let (blob_size, speed) = match kind.base() {
            MotionKind::SweepLeft => ((8, 12), (1.2, 1.8)),
            _ => ((8, 28), (0.8, 1.0)),
        };
        Self {
            kind,
            n: 64,
            t: 32,
            blob_size,
            speed,
            noise_amplitude: 0.05,
            seed,
        }
    }
}

/// Inclusive-lo, exclusive-hi pixel rectangle in frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBand {
    pub row_lo: u32,
    pub row_hi: u32,
    pub col_lo: u32,
    pub col_hi: u32,
}

impl PixelBand {
    pub fn contains(&self, row: u32, col: u32) -> bool {
        row >= self.row_lo && row < self.row_hi && col >= self.col_lo && col < self.col_hi
    }

    /// Membership of a flat difference-video index (`pair·N² + row·N + col`);
    /// the band is time-invariant so the pair component is ignored.
    pub fn contains_flat(&self, flat: usize, n: u32) -> bool {
        let in_frame = flat % (n as usize * n as usize);
        let row = (in_frame / n as usize) as u32;
        let col = (in_frame % n as usize) as u32;
        self.contains(row, col)
    }
}

/// The rectangle guaranteed to contain every blob pixel of every video of a
/// class: sweeps use rows `[N/4, 3N/4)` across all columns; growth kinds a
/// centered square sized for the largest blob plus center jitter.
pub fn motion_band(spec: &SyntheticClassSpec) -> PixelBand {
    let n = spec.n;
    match spec.kind.base() {
        MotionKind::SweepLeft => PixelBand {
            row_lo: n / 4,
            row_hi: (3 * n) / 4,
            col_lo: 0,
            col_hi: n,
        },
        _ => {
            let half = grown_size_cap(spec) / 2 + jitter_cap(n) + 1;
            PixelBand {
                row_lo: (n / 2).saturating_sub(half),
                row_hi: (n / 2 + half).min(n),
                col_lo: (n / 2).saturating_sub(half),
                col_hi: (n / 2 + half).min(n),
            }
        }
    }
}

fn jitter_cap(n: u32) -> u32 {
    n / 32
}

fn grown_size_cap(spec: &SyntheticClassSpec) -> u32 {
    spec.blob_size.1.clamp(1, spec.n)
}

fn draw_range_f64(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    if range.1 > range.0 {
        rng.random_range(range.0..range.1)
    } else {
        range.0
    }
}

fn draw_range_u32(rng: &mut impl Rng, lo: u32, hi: u32) -> u32 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Generates `count` videos. Deterministic: video `i` is keyed by
/// `mix64([seed, GENERATE, i])`, so prefixes of longer runs coincide.
pub fn generate_synthetic(spec: &SyntheticClassSpec, count: usize) -> Vec<VideoTensor> {
    (0..count).map(|i| generate_one(spec, i as u64)).collect()
}

fn generate_one(spec: &SyntheticClassSpec, index: u64) -> VideoTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(&[spec.seed, tags::GENERATE, index]));
    let mut pixels = match spec.kind.base() {
        MotionKind::SweepLeft => render_sweep(spec, &mut rng),
        _ => render_growth(spec, &mut rng),
    };
    if spec.noise_amplitude > 0.0 {
        for p in &mut pixels {
            *p = (*p + rng.random_range(0.0..spec.noise_amplitude) as f32).min(1.0);
        }
    }
    let video = VideoTensor::new(spec.n, spec.t, pixels).expect("generator stays in range");
    if spec.kind.is_time_reversed() {
        reverse_frames(&video)
    } else {
        video
    }
}

fn reverse_frames(v: &VideoTensor) -> VideoTensor {
    let mut pixels = Vec::with_capacity(v.pixels().len());
    for f in (0..v.t()).rev() {
        pixels.extend_from_slice(v.frame(f));
    }
    VideoTensor::new(v.n(), v.t(), pixels).expect("frame reversal preserves range")
}

fn paint_blob(pixels: &mut [f32], n: u32, t_index: u32, rows: (u32, u32), cols: (u32, u32)) {
    let frame = t_index as usize * n as usize * n as usize;
    for r in rows.0..rows.1.min(n) {
        for c in cols.0..cols.1.min(n) {
            pixels[frame + r as usize * n as usize + c as usize] = 1.0;
        }
    }
}

/// Right-to-left sweep: the blob starts flush right and moves `speed`
/// columns per frame, resting at the left edge if it arrives early. Blob
/// rows stay inside `[N/4, 3N/4)`.
fn render_sweep(spec: &SyntheticClassSpec, rng: &mut impl Rng) -> Vec<f32> {
    let n = spec.n;
    let band_lo = n / 4;
    let band_hi = (3 * n) / 4;
    let max_size = (band_hi - band_lo).max(1);
    let size = draw_range_u32(
        rng,
        spec.blob_size.0.clamp(1, max_size),
        spec.blob_size.1.clamp(1, max_size),
    );
    let top = draw_range_u32(rng, band_lo, band_hi - size);
    let speed = draw_range_f64(rng, spec.speed);

    let start = (n - size.min(n)) as f64;
    let mut pixels = vec![0.0f32; (n * n * spec.t) as usize];
    for f in 0..spec.t {
        let left = (start - speed * f as f64).round().max(0.0) as u32;
        paint_blob(&mut pixels, n, f, (top, top + size), (left, left + size));
    }
    pixels
}

/// Growth in place: the blob side interpolates from the start size toward
/// the full-grown size, scaled by the speed fraction; the center jitters by
/// up to ±N/32 around the frame center.
fn render_growth(spec: &SyntheticClassSpec, rng: &mut impl Rng) -> Vec<f32> {
    let n = spec.n;
    let s_lo = spec.blob_size.0.clamp(1, n);
    let s_hi = grown_size_cap(spec).max(s_lo);
    let fraction = draw_range_f64(rng, spec.speed).clamp(0.0, 1.0);
    let jitter = jitter_cap(n) as i64;
    let center_r = (n / 2) as i64 + rng.random_range(-jitter..=jitter);
    let center_c = (n / 2) as i64 + rng.random_range(-jitter..=jitter);

    let mut pixels = vec![0.0f32; (n * n * spec.t) as usize];
    let steps = (spec.t - 1).max(1) as f64;
    for f in 0..spec.t {
        let grow = fraction * (s_hi - s_lo) as f64 * f as f64 / steps;
        let size = (s_lo as f64 + grow).round() as i64;
        let half = size / 2;
        let r0 = (center_r - half).clamp(0, (n as i64) - 1) as u32;
        let c0 = (center_c - half).clamp(0, (n as i64) - 1) as u32;
        let r1 = (center_r - half + size).clamp(0, n as i64) as u32;
        let c1 = (center_c - half + size).clamp(0, n as i64) as u32;
        paint_blob(&mut pixels, n, f, (r0, r1), (c0, c1));
    }
    pixels
}
