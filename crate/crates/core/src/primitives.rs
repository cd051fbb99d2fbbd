//! The three quantum subroutines: finite-shot measurement sampling, the
//! post-selected difference transform, and ancilla-based inner product
//! estimation.
//!
//! Each operation has a sampled mode and an exact mode. The ancilla
//! statistics are sampled directly on their analytic probabilities instead of
//! evolving a full two-register state: entangling |0⟩|a⟩ + |1⟩|b⟩ with a
//! Hadamard on the ancilla makes P(ancilla = 0) = (1 + ⟨a|b⟩)/2, so drawing
//! Bernoulli outcomes at that probability reproduces the measured statistics
//! at O(1) cost per shot. Negative inner products lower the success rate
//! below 1/2 and are therefore distinguishable from positive ones.
//!
//! Random streams are ChaCha8 (a counter-based generator) keyed by
//! `mix64([plan.seed, role-tag])`: independent across roles and call-local,
//! so concurrent calls never share state. Success counts come from the
//! `rand_distr` binomial sampler on that stream; with the generator and
//! sampler versions pinned by the lockfile, every histogram and estimate is
//! bit-reproducible across runs of one build.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::seeds::{mix64, tags};
use crate::statevec::{encode_amplitudes, inner_product_exact, measurement_probabilities};
use crate::statevec::{RawVector, Statevector};

/// Repetition budget and random stream for one sampled estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotPlan {
    shots: u64,
    seed: u64,
    exact_mode: bool,
}

impl ShotPlan {
    /// A sampled plan performing `shots` prepare-and-measure repetitions.
    ///
    /// # Panics
    /// If `shots` is zero.
    pub fn sampled(shots: u64, seed: u64) -> Self {
        assert!(shots >= 1, "a sampled plan needs at least one shot");
        Self {
            shots,
            seed,
            exact_mode: false,
        }
    }

    /// An exact plan: sampling is bypassed and analytic values are returned.
    pub fn exact() -> Self {
        Self::exact_with_shots(1)
    }

    /// Exact plan that still carries a shot count, used to scale expectation
    /// histograms.
    pub fn exact_with_shots(shots: u64) -> Self {
        Self {
            shots,
            seed: 0,
            exact_mode: true,
        }
    }

    /// Same plan, different seed. Callers running several estimates under one
    /// budget derive per-call seeds to keep the streams independent.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_exact(&self) -> bool {
        self.exact_mode
    }
}

/// Outcome counts of repeated register measurement.
///
/// Sampled mode holds integer counts; exact mode holds the expectation
/// `probability × shots` per index. Indices with zero count are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementHistogram {
    counts: BTreeMap<usize, f64>,
    shots: u64,
}

impl MeasurementHistogram {
    pub fn count(&self, index: usize) -> f64 {
        self.counts.get(&index).copied().unwrap_or(0.0)
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn total(&self) -> f64 {
        self.counts.values().sum()
    }

    /// Empirical frequency of `index`.
    pub fn frequency(&self, index: usize) -> f64 {
        self.count(index) / self.shots as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.counts.iter().map(|(&i, &c)| (i, c))
    }

    /// Total variation distance between the empirical frequencies and a
    /// reference distribution over the same index space.
    pub fn total_variation_distance(&self, probabilities: &[f64]) -> f64 {
        let shots = self.shots as f64;
        let mut l1 = 0.0;
        for (i, &p) in probabilities.iter().enumerate() {
            l1 += (self.count(i) / shots - p).abs();
        }
        // Mass the histogram holds outside the reference support.
        for (&i, &c) in &self.counts {
            if i >= probabilities.len() {
                l1 += c / shots;
            }
        }
        l1 / 2.0
    }
}

/// Samples `plan.shots` computational-basis measurements of `s`.
///
/// Exact mode returns the expectation histogram `{i: p_i · shots}` instead of
/// drawing. Identical `(s, plan)` inputs reproduce the identical histogram.
pub fn sample_measurements(s: &Statevector, plan: &ShotPlan) -> MeasurementHistogram {
    let probs = measurement_probabilities(s);
    let mut counts = BTreeMap::new();
    if plan.is_exact() {
        let shots = plan.shots() as f64;
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                counts.insert(i, p * shots);
            }
        }
        return MeasurementHistogram {
            counts,
            shots: plan.shots(),
        };
    }

    let sampler = IndexSampler::new(&probs);
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(&[plan.seed(), tags::MEASURE]));
    for _ in 0..plan.shots() {
        *counts.entry(sampler.draw(&mut rng)).or_insert(0.0) += 1.0;
    }
    MeasurementHistogram {
        counts,
        shots: plan.shots(),
    }
}

/// Inverse-CDF sampler over a discrete distribution. Zero-probability indices
/// are never produced: equal adjacent cumulative values leave them with an
/// empty preimage.
pub(crate) struct IndexSampler {
    cumulative: Vec<f64>,
    last_supported: usize,
}

impl IndexSampler {
    pub(crate) fn new(probabilities: &[f64]) -> Self {
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut acc = 0.0;
        let mut last_supported = 0;
        for (i, &p) in probabilities.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_supported = i;
            }
            cumulative.push(acc);
        }
        Self {
            cumulative,
            last_supported,
        }
    }

    pub(crate) fn draw(&self, rng: &mut impl Rng) -> usize {
        let r: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= r);
        // r can exceed the final cumulative value by rounding; clamp onto the
        // last index that carries probability.
        idx.min(self.last_supported)
    }
}

/// Result of the post-selected ancilla difference transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceOutcome {
    state: Statevector,
    success_probability: f64,
    expected_repeats: f64,
}

impl DifferenceOutcome {
    /// The normalized difference `(q1 − q2)/‖q1 − q2‖`, the register left in
    /// the data rails after the ancilla is found in |1⟩.
    pub fn state(&self) -> &Statevector {
        &self.state
    }

    /// Probability `(1 − ⟨q1|q2⟩)/2` of the ancilla landing in |1⟩.
    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    /// Mean number of prepare-and-measure attempts until post-selection
    /// succeeds, `1 / success_probability`.
    pub fn expected_repeats(&self) -> f64 {
        self.expected_repeats
    }

    /// Norm of the un-normalized difference, `‖q1 − q2‖ = 2·√p`. Scaling
    /// [`state`](Self::state) by this recovers the classical difference of
    /// the two encoded frames.
    pub fn difference_norm(&self) -> f64 {
        2.0 * self.success_probability.sqrt()
    }
}

/// Threshold on `1 − ⟨q1|q2⟩` below which the pair counts as identical.
const DEGENERATE_TOLERANCE: f64 = 1e-12;

/// Converts two equal-length states to their normalized difference via the
/// ancilla-Hadamard construction, post-selecting the |1⟩ branch.
///
/// Identical inputs make the |1⟩ branch unreachable and raise
/// [`Error::DegenerateDifference`]; callers treat such a pair as a
/// zero-contribution frame pair rather than aborting.
pub fn difference_transform(q1: &Statevector, q2: &Statevector) -> Result<DifferenceOutcome> {
    let overlap = inner_product_exact(q1, q2)?;
    if overlap >= 1.0 - DEGENERATE_TOLERANCE {
        return Err(Error::DegenerateDifference);
    }
    let success_probability = ((1.0 - overlap) / 2.0).clamp(0.0, 1.0);
    let difference: Vec<f64> = q1
        .amplitudes()
        .iter()
        .zip(q2.amplitudes())
        .map(|(a, b)| a - b)
        .collect();
    let state = encode_amplitudes(&RawVector::new(difference))?;
    Ok(DifferenceOutcome {
        state,
        success_probability,
        expected_repeats: 1.0 / success_probability,
    })
}

/// Estimates `⟨a|b⟩` from repeated ancilla measurement.
///
/// The ancilla succeeds with probability `p = (1 + ⟨a|b⟩)/2` (clamped to
/// [0, 1] to absorb rounding drift); the estimate is `2·(successes/shots) − 1`
/// and always lies in [−1, 1]. Exact plans return the exact inner product.
pub fn inner_product_estimate(a: &Statevector, b: &Statevector, plan: &ShotPlan) -> Result<f64> {
    let overlap = inner_product_exact(a, b)?;
    if plan.is_exact() {
        return Ok(overlap.clamp(-1.0, 1.0));
    }
    let p = ((1.0 + overlap) / 2.0).clamp(0.0, 1.0);
    let successes = if p == 0.0 {
        0
    } else if p == 1.0 {
        plan.shots()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(&[plan.seed(), tags::ESTIMATE]));
        Binomial::new(plan.shots(), p)
            .expect("probability is clamped to (0, 1)")
            .sample(&mut rng)
    };
    Ok((2.0 * successes as f64 / plan.shots() as f64 - 1.0).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_state(dim: usize, seed: u64) -> Statevector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        encode_amplitudes(&RawVector::new(values)).unwrap()
    }

    #[test]
    fn deterministic_state_always_measures_zero() {
        let s = Statevector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let histogram = sample_measurements(&s, &ShotPlan::sampled(100, 7));
        assert_eq!(histogram.count(0), 100.0);
        assert_eq!(histogram.total(), 100.0);
    }

    #[test]
    fn balanced_state_splits_within_binomial_bounds() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = Statevector::new(vec![h, h]).unwrap();
        let histogram = sample_measurements(&s, &ShotPlan::sampled(1_000_000, 42));
        // 4σ band around the mean, σ = 500.
        assert!(histogram.count(0) >= 498_000.0 && histogram.count(0) <= 502_000.0);
        assert!(histogram.count(1) >= 498_000.0 && histogram.count(1) <= 502_000.0);
        assert_eq!(histogram.total(), 1_000_000.0);
    }

    #[test]
    fn exact_mode_reports_expectation_histogram() {
        let s = Statevector::new(vec![0.6, 0.8]).unwrap();
        let histogram = sample_measurements(&s, &ShotPlan::exact_with_shots(1000));
        assert_abs_diff_eq!(histogram.count(0), 360.0, epsilon = 1e-9);
        assert_abs_diff_eq!(histogram.count(1), 640.0, epsilon = 1e-9);
    }

    #[test]
    fn sampling_is_deterministic_under_fixed_seed() {
        let s = random_state(16, 3);
        let plan = ShotPlan::sampled(5000, 99);
        assert_eq!(sample_measurements(&s, &plan), sample_measurements(&s, &plan));
        let other = sample_measurements(&s, &plan.reseeded(100));
        assert_ne!(sample_measurements(&s, &plan), other);
    }

    #[test]
    fn sampler_never_draws_zero_probability_indices() {
        let probs = vec![0.0, 0.5, 0.0, 0.5, 0.0];
        let sampler = IndexSampler::new(&probs);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let i = sampler.draw(&mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn difference_of_orthogonal_basis_states() {
        let q1 = Statevector::new(vec![1.0, 0.0]).unwrap();
        let q2 = Statevector::new(vec![0.0, 1.0]).unwrap();
        let outcome = difference_transform(&q1, &q2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(outcome.state().amplitudes()[0], h, epsilon = 1e-12);
        assert_abs_diff_eq!(outcome.state().amplitudes()[1], -h, epsilon = 1e-12);
        assert_abs_diff_eq!(outcome.success_probability(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(outcome.expected_repeats(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn difference_of_nearby_states() {
        let q1 = Statevector::new(vec![0.6, 0.8]).unwrap();
        let q2 = Statevector::new(vec![0.8, 0.6]).unwrap();
        let outcome = difference_transform(&q1, &q2).unwrap();
        assert_abs_diff_eq!(outcome.success_probability(), 0.02, epsilon = 1e-12);
        // q1 − q2 = (−0.2, 0.2) normalizes to (−1/√2, 1/√2).
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(outcome.state().amplitudes()[0], -h, epsilon = 1e-12);
        assert_abs_diff_eq!(outcome.state().amplitudes()[1], h, epsilon = 1e-12);
        assert_abs_diff_eq!(outcome.difference_norm(), 0.2 * 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(outcome.expected_repeats(), 50.0, epsilon = 1e-9);
    }

    #[test]
    fn identical_states_are_degenerate() {
        let q = Statevector::new(vec![0.6, 0.8]).unwrap();
        assert!(matches!(
            difference_transform(&q, &q),
            Err(Error::DegenerateDifference)
        ));
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        for seed in 0..50 {
            let q1 = random_state(32, seed);
            let q2 = random_state(32, seed + 1000);
            let overlap = inner_product_exact(&q1, &q2).unwrap();
            let outcome = difference_transform(&q1, &q2).unwrap();
            let zero_branch = (1.0 + overlap) / 2.0;
            assert_abs_diff_eq!(
                outcome.success_probability() + zero_branch,
                1.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn estimate_of_identical_states_is_exactly_one() {
        let s = random_state(64, 5);
        for shots in [1, 10, 1000] {
            let estimate = inner_product_estimate(&s, &s, &ShotPlan::sampled(shots, 17)).unwrap();
            assert_eq!(estimate, 1.0);
        }
    }

    #[test]
    fn exact_estimate_of_orthogonal_states_is_zero() {
        let a = Statevector::new(vec![1.0, 0.0]).unwrap();
        let b = Statevector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(inner_product_estimate(&a, &b, &ShotPlan::exact()).unwrap(), 0.0);
    }

    #[test]
    fn sampled_estimate_converges() {
        let a = Statevector::new(vec![0.6, 0.8]).unwrap();
        let b = Statevector::new(vec![0.8, 0.6]).unwrap();
        let estimate =
            inner_product_estimate(&a, &b, &ShotPlan::sampled(1_000_000, 23)).unwrap();
        // σ = 2·√(p(1−p)/S) ≈ 2.8e-4 at p = 0.98; 0.002 is well past 4σ.
        assert!((estimate - 0.96).abs() < 0.002, "estimate {estimate}");
    }

    #[test]
    fn estimator_is_unbiased() {
        let a = Statevector::new(vec![0.6, 0.8]).unwrap();
        let b = Statevector::new(vec![0.8, 0.6]).unwrap();
        let shots = 10_000u64;
        let p: f64 = 0.98;
        let runs = 1000;
        let mean = (0..runs)
            .map(|seed| {
                inner_product_estimate(&a, &b, &ShotPlan::sampled(shots, seed)).unwrap()
            })
            .sum::<f64>()
            / runs as f64;
        let sigma = (p * (1.0 - p)).sqrt() * 2.0 / (shots as f64).sqrt();
        let bound = 4.0 * sigma / (runs as f64).sqrt();
        assert!((mean - 0.96).abs() < bound, "mean {mean}, bound {bound}");
    }

    #[test]
    fn estimates_stay_in_range() {
        for seed in 0..100 {
            let a = random_state(8, seed);
            let b = random_state(8, seed + 500);
            let estimate =
                inner_product_estimate(&a, &b, &ShotPlan::sampled(3, seed)).unwrap();
            assert!((-1.0..=1.0).contains(&estimate));
        }
    }

    #[test]
    fn exact_mode_matches_oracle() {
        for seed in 0..20 {
            let a = random_state(128, seed);
            let b = random_state(128, seed + 777);
            let exact = inner_product_exact(&a, &b).unwrap();
            let estimate = inner_product_estimate(&a, &b, &ShotPlan::exact()).unwrap();
            assert!((exact - estimate).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_distribution_converges_in_total_variation() {
        // 256-dimensional random states at 1e6 shots stay under TV 0.01.
        for seed in 0..20 {
            let s = random_state(256, 9000 + seed);
            let histogram = sample_measurements(&s, &ShotPlan::sampled(1_000_000, seed));
            let tv = histogram.total_variation_distance(&measurement_probabilities(&s));
            assert!(tv < 0.01, "seed {seed}: tv {tv}");
        }
    }
}
