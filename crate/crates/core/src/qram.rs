//! Simulated QRAM: an addressable store of difference frames keyed by
//! (class, video, frame pair), with per-class averaging.
//!
//! The store is a classical in-memory map; quantum output is modeled by
//! re-encoding on retrieval. Stored values are the *un-normalized* classical
//! differences (the post-selected state scaled back by `‖q1 − q2‖`), so the
//! class average weights frames by how much motion they carry. Averaging
//! sums in ascending video id so results are bit-reproducible regardless of
//! insertion order.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::primitives::DifferenceOutcome;
use crate::statevec::{encode_amplitudes, RawVector, Statevector};

/// One frame pair's contribution: a post-selected difference or the
/// degenerate marker for identical frames.
#[derive(Debug, Clone)]
pub enum FrameContribution {
    Diff(DifferenceOutcome),
    Degenerate,
}

impl FrameContribution {
    /// Adapts a `difference_transform` result: the degenerate error becomes
    /// the zero-contribution marker, anything else propagates.
    pub fn from_transform(result: Result<DifferenceOutcome>) -> Result<Self> {
        match result {
            Ok(outcome) => Ok(Self::Diff(outcome)),
            Err(Error::DegenerateDifference) => Ok(Self::Degenerate),
            Err(e) => Err(e),
        }
    }
}

/// A stored difference frame: the classical difference values and their norm
/// (the frame's motion weight; zero for degenerate pairs).
#[derive(Debug, Clone, PartialEq)]
pub struct StoredFrame {
    values: Vec<f64>,
    weight: f64,
}

impl StoredFrame {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Addressable store of difference frames for one dataset configuration.
#[derive(Debug, Clone)]
pub struct QramStore {
    frame_len: usize,
    pairs_per_video: u32,
    entries: BTreeMap<(u32, u32, u32), StoredFrame>,
    videos_by_class: BTreeMap<u32, BTreeSet<u32>>,
}

impl QramStore {
    /// `frame_len` is the pixel count N² of one frame; `pairs_per_video` is
    /// T − 1.
    pub fn new(frame_len: usize, pairs_per_video: u32) -> Self {
        Self {
            frame_len,
            pairs_per_video,
            entries: BTreeMap::new(),
            videos_by_class: BTreeMap::new(),
        }
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn pairs_per_video(&self) -> u32 {
        self.pairs_per_video
    }

    /// Writes one frame pair's difference. The post-selected state is scaled
    /// back by the classical difference norm `2·√p`; a degenerate pair
    /// stores an all-zero frame of weight zero.
    pub fn put_diff_frame(
        &mut self,
        class_id: u32,
        video_id: u32,
        pair_index: u32,
        contribution: &FrameContribution,
    ) -> Result<()> {
        if pair_index >= self.pairs_per_video {
            return Err(Error::PairIndexOutOfRange {
                pair_index,
                pairs_per_video: self.pairs_per_video,
            });
        }
        let frame = match contribution {
            FrameContribution::Degenerate => StoredFrame {
                values: vec![0.0; self.frame_len],
                weight: 0.0,
            },
            FrameContribution::Diff(outcome) => {
                let state = outcome.state();
                if state.len() != self.frame_len.next_power_of_two() {
                    return Err(Error::DimensionMismatch {
                        left: state.len(),
                        right: self.frame_len,
                    });
                }
                let norm = outcome.difference_norm();
                // Drop the zero-padded tail; encoded frames carry no mass
                // beyond the pixel count.
                let values = state.amplitudes()[..self.frame_len]
                    .iter()
                    .map(|a| a * norm)
                    .collect();
                StoredFrame {
                    values,
                    weight: norm,
                }
            }
        };
        let key = (class_id, video_id, pair_index);
        if self.entries.contains_key(&key) {
            return Err(Error::DuplicateKey {
                class_id,
                video_id,
                pair_index,
            });
        }
        self.entries.insert(key, frame);
        self.videos_by_class
            .entry(class_id)
            .or_default()
            .insert(video_id);
        Ok(())
    }

    /// The stored frame for a key, bit-identical to what was written.
    pub fn get(&self, class_id: u32, video_id: u32, pair_index: u32) -> Option<&StoredFrame> {
        self.entries.get(&(class_id, video_id, pair_index))
    }

    /// Retrieval with quantum-state semantics: the stored frame re-encoded
    /// as a register. Degenerate (all-zero) frames cannot be served as a
    /// state and raise [`Error::ZeroVector`].
    pub fn retrieve_state(
        &self,
        class_id: u32,
        video_id: u32,
        pair_index: u32,
    ) -> Result<Statevector> {
        let frame = self
            .get(class_id, video_id, pair_index)
            .ok_or(Error::EmptyClass { class_id })?;
        encode_amplitudes(&RawVector::new(frame.values.clone()))
    }

    pub fn class_ids(&self) -> Vec<u32> {
        self.videos_by_class.keys().copied().collect()
    }

    pub fn video_count(&self, class_id: u32) -> usize {
        self.videos_by_class
            .get(&class_id)
            .map_or(0, BTreeSet::len)
    }

    /// Entry-wise mean difference video over all videos stored for a class:
    /// frames concatenated in temporal order, flat index
    /// `pair·N² + row·N + col`. Requires every video to hold all T − 1
    /// pairs.
    pub fn finalize_class_average(&self, class_id: u32) -> Result<RawVector> {
        let videos = self
            .videos_by_class
            .get(&class_id)
            .filter(|v| !v.is_empty())
            .ok_or(Error::EmptyClass { class_id })?;

        let pairs = self.pairs_per_video as usize;
        let mut sum = vec![0.0f64; self.frame_len * pairs];
        for &video_id in videos {
            for pair_index in 0..self.pairs_per_video {
                let frame = self.entries.get(&(class_id, video_id, pair_index)).ok_or_else(
                    || {
                        let missing = (0..self.pairs_per_video)
                            .filter(|&p| !self.entries.contains_key(&(class_id, video_id, p)))
                            .count() as u32;
                        Error::IncompleteVideo {
                            class_id,
                            video_id,
                            missing,
                        }
                    },
                )?;
                let offset = pair_index as usize * self.frame_len;
                for (slot, value) in sum[offset..offset + self.frame_len]
                    .iter_mut()
                    .zip(&frame.values)
                {
                    *slot += value;
                }
            }
        }
        let count = videos.len() as f64;
        for slot in &mut sum {
            *slot /= count;
        }
        Ok(RawVector::new(sum))
    }
}
