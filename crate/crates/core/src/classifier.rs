//! End-to-end training and classification.
//!
//! Training runs every consecutive frame pair of every labeled video through
//! the difference transform into the QRAM, finalizes a per-class average
//! difference-video, measures it into a pixel distribution and builds the
//! class's training register from the average through its own distribution.
//! Classification reduces a test video through each class's distribution and
//! scores it by inner product estimation against that class's training
//! register. Each class's score lives in its own subspace, per the argmax
//! rule; scores are not normalized across classes.
//!
//! ## Model file (QVRM)
//!
//! ```text
//! magic    "QVRM"          4 bytes
//! version  u16 LE          currently 1
//! k        u32 LE          class count
//! N        u32 LE          frame side
//! T        u32 LE          frame count
//! q        u32 LE          register qubits
//! per class:
//!   average video          N²·(T−1) × f64 LE
//!   distribution           .qdist block (class_id, q, seed, 2^q draws)
//!   register amplitudes    2^q × f64 LE
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::primitives::{difference_transform, inner_product_estimate, ShotPlan};
use crate::qram::{FrameContribution, QramStore};
use crate::reduction::{build_reduced_register, extract_distribution, PixelDistribution, ReducedRegister};
use crate::seeds::{mix64, tags};
use crate::statevec::{encode_amplitudes, RawVector, Statevector};
use crate::videodata::{difference_video, VideoTensor};
use crate::wire;

const QVRM_MAGIC: &str = "QVRM";
const QVRM_VERSION: u16 = 1;

/// Everything trained for one class.
#[derive(Debug, Clone)]
pub struct ClassModel {
    pub class_id: u32,
    pub average_diff_video: RawVector,
    pub distribution: PixelDistribution,
    /// Built from `average_diff_video` through `distribution`; re-derivable
    /// bit-exactly from the stored seed.
    pub training_register: ReducedRegister,
}

/// Post-selection cost counters accumulated during training.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrainStats {
    pub pairs_total: u64,
    pub pairs_degenerate: u64,
    /// Mean of `1/success_probability` over non-degenerate pairs: the
    /// average number of ancilla attempts per stored difference frame.
    pub mean_expected_repeats: f64,
}

/// A trained model set plus the geometry it was trained at.
#[derive(Debug, Clone)]
pub struct ModelSet {
    n: u32,
    t: u32,
    q: u32,
    models: Vec<ClassModel>,
    stats: TrainStats,
}

impl ModelSet {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> u32 {
        self.models.len() as u32
    }

    pub fn models(&self) -> &[ClassModel] {
        &self.models
    }

    pub fn stats(&self) -> TrainStats {
        self.stats
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(QVRM_MAGIC.as_bytes())?;
        wire::write_u16(w, QVRM_VERSION)?;
        wire::write_u32(w, self.k())?;
        wire::write_u32(w, self.n)?;
        wire::write_u32(w, self.t)?;
        wire::write_u32(w, self.q)?;
        for model in &self.models {
            for &v in model.average_diff_video.values() {
                wire::write_f64(w, v)?;
            }
            model.distribution.write_to(w)?;
            let register = model
                .training_register
                .state()
                .expect("training registers are never degenerate");
            for &a in register.amplitudes() {
                wire::write_f64(w, a)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        wire::read_magic(r, QVRM_MAGIC)?;
        let version = wire::read_u16(r)?;
        if version != QVRM_VERSION {
            return Err(Error::Malformed {
                what: "qvrm header",
                detail: format!("unsupported version {version}"),
            });
        }
        let k = wire::read_u32(r)?;
        let n = wire::read_u32(r)?;
        let t = wire::read_u32(r)?;
        let q = wire::read_u32(r)?;
        // Refuse absurd headers before trusting them for allocations.
        let diff_space = n as u128 * n as u128 * (t as u128).saturating_sub(1);
        if n == 0 || t < 2 || k == 0 || q > 26 || diff_space > (1 << 31) {
            return Err(Error::Malformed {
                what: "qvrm header",
                detail: format!("implausible geometry k={k}, N={n}, T={t}, q={q}"),
            });
        }
        let diff_len = n as usize * n as usize * (t as usize - 1);
        let mut models = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let mut avg = Vec::with_capacity(diff_len);
            for _ in 0..diff_len {
                avg.push(wire::read_f64(r)?);
            }
            let distribution = PixelDistribution::read_from(r)?;
            if distribution.q() != q {
                return Err(Error::Malformed {
                    what: "qvrm model",
                    detail: format!(
                        "distribution q {} disagrees with header q {q}",
                        distribution.q()
                    ),
                });
            }
            if let Some(&bad) = distribution.draws().iter().find(|&&d| d as usize >= diff_len) {
                return Err(Error::Malformed {
                    what: "qvrm model",
                    detail: format!("draw index {bad} outside the {diff_len}-pixel video"),
                });
            }
            let mut amplitudes = Vec::with_capacity(1 << q);
            for _ in 0..1usize << q {
                amplitudes.push(wire::read_f64(r)?);
            }
            let state = Statevector::new(amplitudes)?;
            models.push(ClassModel {
                class_id: distribution.class_id(),
                average_diff_video: RawVector::new(avg),
                training_register: ReducedRegister::from_parts(
                    distribution.class_id(),
                    Some(state),
                ),
                distribution,
            });
        }
        Ok(Self {
            n,
            t,
            q,
            models,
            stats: TrainStats::default(),
        })
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

/// Outcome of classifying one video.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub predicted_class: u32,
    /// `(class_id, estimated ⟨v_c|V_c⟩)` in model order.
    pub scores: Vec<(u32, f64)>,
    /// Ancilla measurements per class score; the total budget is k times
    /// this. Zero in exact mode.
    pub shots_per_score: u64,
    /// Set when the maximum was attained by more than one class and the
    /// lowest class id was chosen.
    pub tie_broken: bool,
}

/// Trains one model per class from `(label, video)` pairs.
///
/// Classes are the distinct labels in ascending order. Per-class seeds
/// derive from `base_seed` via `mix64`, so two classes with identical
/// videos get identical averages but different distributions.
pub fn train(dataset: &[(u32, VideoTensor)], q: u32, base_seed: u64) -> Result<ModelSet> {
    let (_, first_video) = dataset
        .first()
        .ok_or_else(|| Error::InvalidConfig("training set is empty".into()))?;
    let (n, t) = (first_video.n(), first_video.t());
    if t < 2 {
        return Err(Error::TooSmall {
            dim: "frame count",
            actual: t,
            target: 2,
        });
    }
    for (_, video) in dataset {
        if video.n() != n || video.t() != t {
            return Err(Error::DimensionMismatch {
                left: (video.n() * video.n() * video.t()) as usize,
                right: (n * n * t) as usize,
            });
        }
    }

    let frame_len = n as usize * n as usize;
    let mut store = QramStore::new(frame_len, t - 1);
    let mut per_class_videos: std::collections::BTreeMap<u32, u32> = Default::default();
    let mut stats = TrainStats::default();
    let mut repeats_sum = 0.0;

    for (label, video) in dataset {
        let video_id = {
            let next = per_class_videos.entry(*label).or_insert(0);
            let id = *next;
            *next += 1;
            id
        };
        let frames: Vec<Statevector> = (0..t)
            .map(|f| {
                encode_amplitudes(&RawVector::new(
                    video.frame(f).iter().map(|&p| p as f64).collect(),
                ))
            })
            .collect::<Result<_>>()?;
        for pair in 0..t - 1 {
            let contribution = FrameContribution::from_transform(difference_transform(
                &frames[pair as usize],
                &frames[pair as usize + 1],
            ))?;
            stats.pairs_total += 1;
            match &contribution {
                FrameContribution::Degenerate => stats.pairs_degenerate += 1,
                FrameContribution::Diff(outcome) => repeats_sum += outcome.expected_repeats(),
            }
            store.put_diff_frame(*label, video_id, pair, &contribution)?;
        }
    }
    let sampled_pairs = stats.pairs_total - stats.pairs_degenerate;
    stats.mean_expected_repeats = if sampled_pairs > 0 {
        repeats_sum / sampled_pairs as f64
    } else {
        0.0
    };

    let mut models = Vec::new();
    for class_id in store.class_ids() {
        let average = store.finalize_class_average(class_id)?;
        let class_seed = mix64(&[base_seed, tags::TRAIN, class_id as u64]);
        let distribution = extract_distribution(class_id, &average, q, class_seed)?;
        let training_register = build_reduced_register(&average, &distribution);
        models.push(ClassModel {
            class_id,
            average_diff_video: average,
            distribution,
            training_register,
        });
    }
    Ok(ModelSet {
        n,
        t,
        q,
        models,
        stats,
    })
}

/// Classifies a video: computes its classical difference video, reduces it
/// through every class distribution, and argmaxes the per-class inner
/// product estimates. Ties break to the lowest class id.
pub fn classify(
    video: &VideoTensor,
    models: &ModelSet,
    plan: &ShotPlan,
) -> Result<ClassificationResult> {
    if video.n() != models.n() || video.t() != models.t() {
        return Err(Error::DimensionMismatch {
            left: (video.n() * video.n() * video.t()) as usize,
            right: (models.n() * models.n() * models.t()) as usize,
        });
    }
    let diff = difference_video(video)?;
    classify_difference(&diff, models, plan)
}

/// Classification entry point at the difference-video level; [`classify`]
/// is this after the classical difference transform.
///
/// A degenerate reduced register (no motion at any of a class's pixels)
/// scores −1: maximal evidence against that class.
pub fn classify_difference(
    diff: &RawVector,
    models: &ModelSet,
    plan: &ShotPlan,
) -> Result<ClassificationResult> {
    if models.models().is_empty() {
        return Err(Error::InvalidConfig("model set has no classes".into()));
    }
    let expected_len =
        models.n() as usize * models.n() as usize * (models.t() as usize - 1);
    if diff.len() != expected_len {
        return Err(Error::DimensionMismatch {
            left: diff.len(),
            right: expected_len,
        });
    }

    let mut scores = Vec::with_capacity(models.models().len());
    for model in models.models() {
        let test_register = build_reduced_register(diff, &model.distribution);
        let score = match (model.training_register.state(), test_register.state()) {
            (Some(train_state), Some(test_state)) => {
                // Independent ancilla stream per class under one budget.
                let class_plan =
                    plan.reseeded(mix64(&[plan.seed(), tags::CLASSIFY, model.class_id as u64]));
                inner_product_estimate(train_state, test_state, &class_plan)?
            }
            // No motion at any pixel this class cares about.
            _ => -1.0,
        };
        scores.push((model.class_id, score));
    }

    let best = scores
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut winners = scores.iter().filter(|&&(_, s)| s == best).map(|&(c, _)| c);
    let predicted_class = winners.next().expect("scores are nonempty");
    let predicted_class = winners.fold(predicted_class, u32::min);
    let tie_broken = scores.iter().filter(|&&(_, s)| s == best).count() > 1;

    Ok(ClassificationResult {
        predicted_class,
        scores,
        shots_per_score: if plan.is_exact() { 0 } else { plan.shots() },
        tie_broken,
    })
}
