//! Experiment runner: (k, M, q) sweeps with repeated trials, accuracy
//! aggregation, cost counters, and CSV/SVG reports.
//!
//! Each (q, trial) cell derives its seed as
//! `mix64([base_seed, k, M, q, trial])`, resamples the dataset and all
//! measurement streams from it, trains on M videos per class, classifies the
//! held-out set and records the accuracy. Cells are independent and run in
//! parallel; aggregation merges them by key, so a full run, a partial
//! re-run, and a parallel run all produce byte-identical reports.
//!
//! ## Config file
//!
//! Flat `key = value` text, `#` comments; every key can be overridden by the
//! CLI flag of the same name. Keys:
//!
//! ```text
//! data            synthetic | manifest       (default synthetic)
//! manifest        path to a dataset manifest (required for data=manifest)
//! kinds           comma list of motion kinds (default sweep_left,approach)
//! n, t            synthetic geometry         (default 64, 32)
//! noise           noise amplitude            (default 0.05)
//! blob_min/max    blob size range            (default per kind)
//! speed_min/max   speed range                (default per kind)
//! m               training videos per class  (default 40)
//! q               comma list and/or a-b ranges, e.g. 5,8,10-12 (default 4-17)
//! trials          trials per q               (default 10)
//! seed            base seed                  (default 42)
//! shots           shots per class score      (default 10000)
//! exact           true | false               (default false)
//! test_per_class  held-out videos per class  (default 100)
//! out             report directory           (default reports)
//! ```

mod config;
mod report;

pub use config::{parse_config_file, parse_key_values, ConfigMap};
pub use report::emit_report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{classify_difference, train};
use crate::error::{Error, Result};
use crate::primitives::ShotPlan;
use crate::seeds::{mix64, tags};
use crate::videodata::{
    difference_video, generate_synthetic, load_video, read_manifest, SyntheticClassSpec,
    VideoTensor,
};

/// Where a sweep's videos come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// One class spec per class; its seed is remixed per trial.
    Synthetic(Vec<SyntheticClassSpec>),
    /// A manifest of QVID files; the train/test split is reshuffled per
    /// trial.
    Manifest(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// Training videos per class (the M in report rows).
    pub m_per_class: usize,
    pub q_list: Vec<u32>,
    pub trials: u32,
    pub base_seed: u64,
    /// Shots per class score in sampled mode.
    pub shots: u64,
    pub exact_mode: bool,
    pub test_per_class: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Checks invariants that do not require loading data: q within
    /// `[1, log2(N²·T)]` for synthetic sources, positive trial/M counts.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.m_per_class < 1 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        if self.test_per_class < 1 {
            return Err(Error::InvalidConfig("test_per_class must be >= 1".into()));
        }
        if self.q_list.is_empty() {
            return Err(Error::InvalidConfig("q list must not be empty".into()));
        }
        if !self.exact_mode && self.shots < 1 {
            return Err(Error::InvalidConfig(
                "shots must be >= 1 in sampled mode".into(),
            ));
        }
        if let DataSource::Synthetic(specs) = &self.data {
            if specs.is_empty() {
                return Err(Error::InvalidConfig("no classes configured".into()));
            }
            let (n, t) = (specs[0].n, specs[0].t);
            if specs.iter().any(|s| s.n != n || s.t != t) {
                return Err(Error::InvalidConfig(
                    "all classes must share the same geometry".into(),
                ));
            }
            self.validate_q_range(n, t)?;
        }
        Ok(())
    }

    fn validate_q_range(&self, n: u32, t: u32) -> Result<()> {
        let space = n as u64 * n as u64 * t as u64;
        let max_q = 63 - space.leading_zeros().min(63);
        for &q in &self.q_list {
            if q < 1 || q as u64 > max_q as u64 {
                return Err(Error::InvalidConfig(format!(
                    "q = {q} outside [1, {max_q}] for {n}x{n}x{t} videos"
                )));
            }
        }
        Ok(())
    }
}

/// One aggregated (k, M, q) row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub k: u32,
    pub m: u32,
    pub q: u32,
    pub mean_accuracy: f64,
    /// Population standard deviation of per-trial accuracies.
    pub std_accuracy: f64,
    pub trials: u32,
    /// Mean ancilla measurements consumed per classification (k·shots; 0 in
    /// exact mode).
    pub mean_shots: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub n: u32,
    pub t: u32,
    pub cells: Vec<SweepCell>,
    /// Per-trial accuracies keyed by q, in trial order.
    pub trial_accuracies: BTreeMap<u32, Vec<f64>>,
}

/// The labeled videos of one trial.
struct TrialData {
    train: Vec<(u32, VideoTensor)>,
    test: Vec<(u32, VideoTensor)>,
}

fn synthetic_trial_data(
    specs: &[SyntheticClassSpec],
    m: usize,
    test_per_class: usize,
    trial_seed: u64,
) -> TrialData {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class_idx, spec) in specs.iter().enumerate() {
        let mut spec = spec.clone();
        spec.seed = mix64(&[trial_seed, tags::GENERATE, class_idx as u64, spec.seed]);
        let videos = generate_synthetic(&spec, m + test_per_class);
        for (i, video) in videos.into_iter().enumerate() {
            if i < m {
                train.push((class_idx as u32, video));
            } else {
                test.push((class_idx as u32, video));
            }
        }
    }
    TrialData { train, test }
}

fn manifest_trial_data(
    videos: &BTreeMap<u32, Vec<VideoTensor>>,
    m: usize,
    test_per_class: usize,
    trial_seed: u64,
) -> Result<TrialData> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (&class_id, class_videos) in videos {
        if class_videos.len() < m + 1 {
            return Err(Error::InvalidConfig(format!(
                "class {class_id} has {} videos; need at least m+1 = {}",
                class_videos.len(),
                m + 1
            )));
        }
        let mut indices: Vec<usize> = (0..class_videos.len()).collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(mix64(&[trial_seed, tags::SPLIT, class_id as u64]));
        indices.shuffle(&mut rng);
        for (i, &idx) in indices.iter().enumerate() {
            if i < m {
                train.push((class_id, class_videos[idx].clone()));
            } else if i < m + test_per_class {
                test.push((class_id, class_videos[idx].clone()));
            }
        }
    }
    Ok(TrialData { train, test })
}

/// Loads every manifest video up front, grouped by class id (labels sorted
/// ascending, numbered from 0).
fn load_manifest_videos(path: &PathBuf) -> Result<BTreeMap<u32, Vec<VideoTensor>>> {
    let entries = read_manifest(path)?;
    if entries.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "manifest {} lists no videos",
            path.display()
        )));
    }
    let mut labels: Vec<&str> = entries.iter().map(|e| e.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let class_of = |label: &str| labels.iter().position(|&l| l == label).unwrap() as u32;

    let mut videos: BTreeMap<u32, Vec<VideoTensor>> = BTreeMap::new();
    for entry in &entries {
        videos
            .entry(class_of(&entry.label))
            .or_default()
            .push(load_video(&entry.path)?);
    }
    let mut dims = videos.values().flatten().map(|v| (v.n(), v.t()));
    let first = dims.next().unwrap();
    if dims.any(|d| d != first) {
        return Err(Error::Malformed {
            what: "manifest dataset",
            detail: "videos disagree on (N, T)".into(),
        });
    }
    Ok(videos)
}

fn run_cell(
    config: &ExperimentConfig,
    manifest_videos: Option<&BTreeMap<u32, Vec<VideoTensor>>>,
    k: u32,
    q: u32,
    trial: u32,
) -> Result<(f64, f64)> {
    let trial_seed = mix64(&[
        config.base_seed,
        k as u64,
        config.m_per_class as u64,
        q as u64,
        trial as u64,
    ]);
    let data = match (&config.data, manifest_videos) {
        (DataSource::Synthetic(specs), _) => {
            synthetic_trial_data(specs, config.m_per_class, config.test_per_class, trial_seed)
        }
        (DataSource::Manifest(_), Some(videos)) => {
            manifest_trial_data(videos, config.m_per_class, config.test_per_class, trial_seed)?
        }
        (DataSource::Manifest(_), None) => unreachable!("manifest videos are preloaded"),
    };

    let models = train(&data.train, q, mix64(&[trial_seed, tags::TRAIN]))?;
    let mut correct = 0usize;
    let mut shots_consumed = 0u64;
    for (i, (label, video)) in data.test.iter().enumerate() {
        let plan = if config.exact_mode {
            ShotPlan::exact()
        } else {
            ShotPlan::sampled(config.shots, mix64(&[trial_seed, tags::CLASSIFY, i as u64]))
        };
        let diff = difference_video(video)?;
        let result = classify_difference(&diff, &models, &plan)?;
        if result.predicted_class == *label {
            correct += 1;
        }
        shots_consumed += result.shots_per_score * result.scores.len() as u64;
    }
    let accuracy = correct as f64 / data.test.len() as f64;
    let mean_shots = shots_consumed as f64 / data.test.len() as f64;
    Ok((accuracy, mean_shots))
}

/// Runs the full sweep. Deterministic: identical configs produce identical
/// accuracies regardless of thread scheduling.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let manifest_videos = match &config.data {
        DataSource::Manifest(path) => Some(load_manifest_videos(path)?),
        DataSource::Synthetic(_) => None,
    };
    let (k, n, t) = match (&config.data, &manifest_videos) {
        (DataSource::Synthetic(specs), _) => (specs.len() as u32, specs[0].n, specs[0].t),
        (_, Some(videos)) => {
            let first = videos.values().flatten().next().unwrap();
            (videos.len() as u32, first.n(), first.t())
        }
        _ => unreachable!(),
    };
    if manifest_videos.is_some() {
        config.validate_q_range(n, t)?;
    }

    let cells: Vec<(u32, u32)> = config
        .q_list
        .iter()
        .flat_map(|&q| (0..config.trials).map(move |trial| (q, trial)))
        .collect();
    let outcomes: BTreeMap<(u32, u32), (f64, f64, f64)> = cells
        .par_iter()
        .map(|&(q, trial)| {
            let started = Instant::now();
            let (accuracy, mean_shots) = run_cell(config, manifest_videos.as_ref(), k, q, trial)
                .map_err(|source| Error::SweepCell {
                    k,
                    m: config.m_per_class as u32,
                    q,
                    trial,
                    source: Box::new(source),
                })?;
            eprintln!(
                "cell k={k} M={} q={q} trial={trial}: accuracy {accuracy:.4}",
                config.m_per_class
            );
            Ok(((q, trial), (accuracy, mean_shots, started.elapsed().as_secs_f64())))
        })
        .collect::<Result<_>>()?;

    let mut result = SweepResult {
        n,
        t,
        cells: Vec::new(),
        trial_accuracies: BTreeMap::new(),
    };
    for &q in &config.q_list {
        let accuracies: Vec<f64> = (0..config.trials)
            .map(|trial| outcomes[&(q, trial)].0)
            .collect();
        let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
        let variance = accuracies
            .iter()
            .map(|a| (a - mean) * (a - mean))
            .sum::<f64>()
            / accuracies.len() as f64;
        let mean_shots = (0..config.trials)
            .map(|trial| outcomes[&(q, trial)].1)
            .sum::<f64>()
            / config.trials as f64;
        let wall_seconds: f64 = (0..config.trials).map(|trial| outcomes[&(q, trial)].2).sum();
        result.cells.push(SweepCell {
            k,
            m: config.m_per_class as u32,
            q,
            mean_accuracy: mean,
            std_accuracy: variance.sqrt(),
            trials: config.trials,
            mean_shots,
            wall_seconds,
        });
        result.trial_accuracies.insert(q, accuracies);
    }
    Ok(result)
}
