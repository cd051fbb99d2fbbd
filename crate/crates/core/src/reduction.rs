//! Pixel distributions and reduced registers: the data reduction itself.
//!
//! A class's average difference-video is amplitude-encoded and measured `2^q`
//! times; the drawn flat pixel indices (duplicates kept, since drawing is
//! with replacement) form a weighted distribution of the pixels with the
//! most motion. Any video is then reduced to `2^q` amplitudes by reading its
//! difference video at exactly those indices, one register slot per draw, so
//! recurring hot pixels weight the register and inner products between
//! registers built from the same distribution realize a weighted pixel
//! correlation.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::primitives::IndexSampler;
use crate::seeds::{mix64, tags};
use crate::statevec::{encode_amplitudes, measurement_probabilities, RawVector, Statevector};
use crate::wire;

/// `2^q` flat pixel indices drawn with replacement from the measurement
/// distribution of a class's average difference-video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelDistribution {
    class_id: u32,
    q: u32,
    seed: u64,
    draws: Vec<u32>,
}

impl PixelDistribution {
    pub fn new(class_id: u32, q: u32, seed: u64, draws: Vec<u32>) -> Result<Self> {
        let expected = 1usize
            .checked_shl(q)
            .ok_or_else(|| Error::InvalidConfig(format!("q = {q} is out of range")))?;
        if draws.len() != expected {
            return Err(Error::DimensionMismatch {
                left: draws.len(),
                right: expected,
            });
        }
        Ok(Self {
            class_id,
            q,
            seed,
            draws,
        })
    }

    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws in draw order; duplicates are meaningful.
    pub fn draws(&self) -> &[u32] {
        &self.draws
    }

    /// Serializes as `(class_id: u32, q: u32, seed: u64)` followed by the
    /// `2^q` draw indices, all little-endian (`.qdist`).
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        wire::write_u32(w, self.class_id)?;
        wire::write_u32(w, self.q)?;
        wire::write_u64(w, self.seed)?;
        for &d in &self.draws {
            wire::write_u32(w, d)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let class_id = wire::read_u32(r)?;
        let q = wire::read_u32(r)?;
        if q > 26 {
            return Err(Error::Malformed {
                what: "qdist",
                detail: format!("q = {q} is not plausible"),
            });
        }
        let seed = wire::read_u64(r)?;
        let count = 1usize << q;
        let mut draws = Vec::with_capacity(count);
        for _ in 0..count {
            draws.push(wire::read_u32(r)?);
        }
        Self::new(class_id, q, seed, draws)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        Ok(w.flush()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

/// A `2^q`-amplitude register obtained by reading a video at a class
/// distribution's pixels, or the degenerate marker when every read pixel was
/// zero (no motion anywhere the class cares about).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRegister {
    class_id: u32,
    state: Option<Statevector>,
}

impl ReducedRegister {
    pub fn class_id(&self) -> u32 {
        self.class_id
    }

    /// `None` for the degenerate all-zero register.
    pub fn state(&self) -> Option<&Statevector> {
        self.state.as_ref()
    }

    pub fn is_degenerate(&self) -> bool {
        self.state.is_none()
    }

    pub(crate) fn from_parts(class_id: u32, state: Option<Statevector>) -> Self {
        Self { class_id, state }
    }
}

/// Measures the encoded average video `2^q` times, recording the drawn flat
/// pixel indices in draw order.
///
/// Deterministic under `seed`; indices in the zero-amplitude tail (or any
/// zero-amplitude pixel) never appear.
pub fn extract_distribution(
    class_id: u32,
    avg: &RawVector,
    q: u32,
    seed: u64,
) -> Result<PixelDistribution> {
    let state = encode_amplitudes(avg)?;
    let probabilities = measurement_probabilities(&state);
    let sampler = IndexSampler::new(&probabilities);
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(&[seed, tags::DISTRIBUTION]));
    let count = 1usize
        .checked_shl(q)
        .ok_or_else(|| Error::InvalidConfig(format!("q = {q} is out of range")))?;
    let draws = (0..count).map(|_| sampler.draw(&mut rng) as u32).collect();
    PixelDistribution::new(class_id, q, seed, draws)
}

/// Builds the reduced register: slot `j` carries `video_diff[draws[j]]`,
/// then the `2^q`-vector is normalized. All-zero selections yield the
/// degenerate register.
///
/// # Panics
/// If a draw index is outside `video_diff`; distributions and difference
/// videos must come from the same (N, T) geometry.
pub fn build_reduced_register(video_diff: &RawVector, dist: &PixelDistribution) -> ReducedRegister {
    let values: Vec<f64> = dist
        .draws()
        .iter()
        .map(|&i| video_diff[i as usize])
        .collect();
    let state = encode_amplitudes(&RawVector::new(values)).ok();
    ReducedRegister::from_parts(dist.class_id(), state)
}

/// Fraction of the initial N×N×T video that a register of `q` qubits
/// encodes, `2^q / (N²·T)`.
pub fn coverage_fraction(q: u32, n: u32, t: u32) -> f64 {
    2f64.powi(q as i32) / (n as f64 * n as f64 * t as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn one_hot_average_draws_one_pixel() {
        let mut avg = vec![0.0; 64];
        avg[37] = 0.9;
        let dist = extract_distribution(0, &RawVector::new(avg), 3, 11).unwrap();
        assert_eq!(dist.draws(), &[37u32; 8]);
    }

    #[test]
    fn uniform_support_draws_within_binomial_bounds() {
        // Four equally weighted pixels, 2^10 draws: each count stays inside
        // the 4σ band [192, 320] (σ ≈ 13.9 around 256).
        let mut avg = vec![0.0; 16];
        for i in [2, 5, 11, 14] {
            avg[i] = 1.0;
        }
        let dist = extract_distribution(1, &RawVector::new(avg), 10, 21).unwrap();
        let mut counts = [0usize; 16];
        for &d in dist.draws() {
            counts[d as usize] += 1;
        }
        for (i, &count) in counts.iter().enumerate() {
            if [2, 5, 11, 14].contains(&i) {
                assert!((192..=320).contains(&count), "pixel {i}: count {count}");
            } else {
                assert_eq!(count, 0);
            }
        }
    }

    #[test]
    fn zero_average_is_rejected() {
        assert!(matches!(
            extract_distribution(0, &RawVector::new(vec![0.0; 8]), 2, 0),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn zero_amplitude_pixels_never_drawn() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let avg: Vec<f64> = (0..100)
            .map(|i| if i % 3 == 0 { 0.0 } else { rng.random_range(-1.0..1.0) })
            .collect();
        let dist = extract_distribution(0, &RawVector::new(avg.clone()), 12, 77).unwrap();
        for &d in dist.draws() {
            assert!(avg[d as usize] != 0.0, "drew zero-amplitude pixel {d}");
            assert!((d as usize) < 100, "drew padded tail index {d}");
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let avg = RawVector::new((0..50).map(|i| (i as f64 * 0.17).sin()).collect());
        let a = extract_distribution(3, &avg, 8, 123).unwrap();
        let b = extract_distribution(3, &avg, 8, 123).unwrap();
        assert_eq!(a, b);
        let c = extract_distribution(3, &avg, 8, 124).unwrap();
        assert_ne!(a.draws(), c.draws());
    }

    #[test]
    fn draw_frequencies_converge_in_total_variation() {
        // 2^17 draws against a 256-pixel support keeps TV under 0.05.
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        for trial in 0..5 {
            let avg: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
            let state = encode_amplitudes(&RawVector::new(avg.clone())).unwrap();
            let probabilities = measurement_probabilities(&state);
            let dist = extract_distribution(0, &RawVector::new(avg), 17, 9000 + trial).unwrap();
            let mut counts = vec![0.0f64; 256];
            for &d in dist.draws() {
                counts[d as usize] += 1.0;
            }
            let total = dist.draws().len() as f64;
            let tv: f64 = probabilities
                .iter()
                .zip(&counts)
                .map(|(p, c)| (p - c / total).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv < 0.05, "trial {trial}: tv {tv}");
        }
    }

    #[test]
    fn register_slots_follow_draw_order() {
        let mut diff = vec![0.0; 16];
        diff[5] = 0.3;
        diff[9] = 0.4;
        let dist = PixelDistribution::new(2, 2, 0, vec![5, 5, 9, 2]).unwrap();
        let register = build_reduced_register(&RawVector::new(diff), &dist);
        assert!(!register.is_degenerate());
        let norm = 0.34f64.sqrt();
        let amplitudes = register.state().unwrap().amplitudes();
        assert_abs_diff_eq!(amplitudes[0], 0.3 / norm, epsilon = 1e-12);
        assert_abs_diff_eq!(amplitudes[1], 0.3 / norm, epsilon = 1e-12);
        assert_abs_diff_eq!(amplitudes[2], 0.4 / norm, epsilon = 1e-12);
        assert_abs_diff_eq!(amplitudes[3], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_selection_gives_uniform_register() {
        let mut diff = vec![0.0; 8];
        diff[3] = 0.7;
        let dist = PixelDistribution::new(0, 3, 0, vec![3; 8]).unwrap();
        let register = build_reduced_register(&RawVector::new(diff), &dist);
        let expected = 1.0 / 8f64.sqrt();
        for &a in register.state().unwrap().amplitudes() {
            assert_abs_diff_eq!(a, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn all_zero_selection_is_degenerate() {
        let diff = RawVector::new(vec![0.0; 8]);
        let dist = PixelDistribution::new(0, 2, 0, vec![1, 2, 3, 4]).unwrap();
        let register = build_reduced_register(&diff, &dist);
        assert!(register.is_degenerate());
        assert!(register.state().is_none());
    }

    #[test]
    fn building_is_reproducible_through_stored_seed() {
        let avg = RawVector::new((0..30).map(|i| ((i * i) as f64 * 0.03).cos()).collect());
        let dist = extract_distribution(1, &avg, 6, 555).unwrap();
        let again = extract_distribution(1, &avg, dist.q(), dist.seed()).unwrap();
        assert_eq!(dist, again);
        let a = build_reduced_register(&avg, &dist);
        let b = build_reduced_register(&avg, &again);
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_matches_reported_reductions() {
        assert_abs_diff_eq!(coverage_fraction(4, 64, 32), 1.0 / 8192.0, epsilon = 0.0);
        assert_abs_diff_eq!(coverage_fraction(10, 64, 32), 0.0078125, epsilon = 0.0);
        assert_eq!(coverage_fraction(17, 64, 32), 1.0);
        let tiny = coverage_fraction(5, 64, 32);
        assert!((tiny - 0.000244140625).abs() < 1e-18);
    }

    #[test]
    fn qdist_round_trip() {
        let dist = PixelDistribution::new(7, 4, 0xDEADBEEF, (0..16).collect()).unwrap();
        let mut buf = Vec::new();
        dist.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 16 * 4);
        let back = PixelDistribution::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(dist, back);

        let truncated = &buf[..buf.len() - 2];
        assert!(matches!(
            PixelDistribution::read_from(&mut &truncated[..]),
            Err(Error::TruncatedFile)
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn coverage_doubles_per_qubit(q in 1u32..17, n in 1u32..65, t in 1u32..33) {
            let lo = coverage_fraction(q, n, t);
            let hi = coverage_fraction(q + 1, n, t);
            prop_assert_eq!(hi, 2.0 * lo);
        }

        #[test]
        fn registers_are_unit_norm_unless_degenerate(
            values in prop::collection::vec(-1.0f64..1.0, 16..64),
            q in 1u32..6,
            seed in 0u64..500,
        ) {
            prop_assume!(values.iter().any(|&v| v != 0.0));
            let avg = RawVector::new(values);
            let dist = extract_distribution(0, &avg, q, seed).unwrap();
            let register = build_reduced_register(&avg, &dist);
            // Draws only land on nonzero pixels, so this cannot degenerate.
            let state = register.state().unwrap();
            prop_assert_eq!(state.len(), 1 << q);
            let norm: f64 = state.amplitudes().iter().map(|a| a * a).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-10);
        }
    }
}
