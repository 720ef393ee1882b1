//! Synthetic datasets with a planted labelling rule.
//!
//! Each pair in the signal carries a planted weight. An instance's clean
//! label is decided by the sum of planted weights over its sequence: at least
//! [`NEUTRAL_BAND`] is Positive, at most `-NEUTRAL_BAND` is Negative, anything
//! in between is Neutral. Label noise is applied afterwards. Since the rule is
//! known, these datasets give classifiers an exact ceiling to be measured
//! against.

use super::{AnnotatedInstance, Dataset, DatasetError, NoiseFlag, SentimentLabel};
use crate::ontology::{enumerate_pairs, make_pair, PairKey, PairKind, SentiPair, SentiPairSequence, SynsetForest};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Half-width of the Neutral band around a zero planted sum.
pub const NEUTRAL_BAND: f64 = 0.25;

/// How far the class ratios may drift from summing to one before being
/// rejected. Ratios quoted to three decimals often sum to 1.002 or so.
const RATIO_TOLERANCE: f64 = 0.005;
const MAX_ATTEMPTS: usize = 200_000;

// Metadata rates used for generated GIFs.
const MIXED_CONTENT_RATE: f64 = 0.7155;
const EXPLANATIVE_TEXT_RATE: f64 = 0.3449;
const MOTION_BLUR_RATE: f64 = 0.15;
const ILLUMINATION_RATE: f64 = 0.10;
const MEAN_DURATION_S: f64 = 17.82;
const MIN_DURATION_S: f64 = 0.3;
const MAX_DURATION_S: f64 = 193.22;

/// Planted weight per pair. Pairs with weight zero still appear in
/// sequences; they act as distractors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSignal {
    pub weights: BTreeMap<PairKey, f64>,
}

impl PlantedSignal {
    pub fn new(weights: impl IntoIterator<Item = (PairKey, f64)>) -> Self {
        PlantedSignal { weights: weights.into_iter().collect() }
    }

    /// Picks `per_kind` ANPs and `per_kind` VNPs from the forest's pair
    /// vocabulary with weights of random sign and magnitude in `[0.3, 1.0]`.
    pub fn random(forest: &SynsetForest, per_kind: usize, seed: u64) -> Result<Self, DatasetError> {
        let pairs = enumerate_pairs(forest, usize::MAX).map_err(|e| DatasetError::InvalidConfig(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = BTreeMap::new();
        for kind in [PairKind::Anp, PairKind::Vnp] {
            let mut of_kind: Vec<&SentiPair> = pairs.iter().filter(|p| p.kind() == kind).collect();
            if of_kind.len() < per_kind {
                return Err(DatasetError::InvalidConfig(format!(
                    "forest has {} {kind} pairs, {per_kind} requested",
                    of_kind.len()
                )));
            }
            of_kind.shuffle(&mut rng);
            for p in of_kind.into_iter().take(per_kind) {
                let magnitude = rng.random_range(0.3..=1.0);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                weights.insert(p.key().clone(), sign * magnitude);
            }
        }
        Ok(PlantedSignal { weights })
    }

    pub fn weight(&self, key: &PairKey) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }

    /// Planted sum over a sequence, counting repeats.
    pub fn score(&self, seq: &SentiPairSequence) -> f64 {
        seq.iter().map(|p| self.weight(p.key())).sum()
    }

    /// The planted sign rule with its Neutral band.
    pub fn label_for(score: f64) -> SentimentLabel {
        if score >= NEUTRAL_BAND {
            SentimentLabel::Positive
        } else if score <= -NEUTRAL_BAND {
            SentimentLabel::Negative
        } else {
            SentimentLabel::Neutral
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n: usize,
    /// Positive, Negative, Neutral.
    pub class_ratios: [f64; 3],
    /// Planted weights; `None` draws [`PlantedSignal::random`] with
    /// `pairs_per_kind` pairs per kind.
    pub signal: Option<PlantedSignal>,
    pub pairs_per_kind: usize,
    /// Probability of replacing the clean label with a different one.
    pub noise_rate: f64,
    /// Fraction of total planted weight mass carried by VNPs.
    pub vnp_signal_share: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Sequences whose planted sum lies closer than this to either band
    /// edge are redrawn, so every clean label is decided with some slack.
    pub margin: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: 1000,
            class_ratios: [0.6, 0.1, 0.3],
            signal: None,
            pairs_per_kind: 20,
            noise_rate: 0.0,
            vnp_signal_share: 0.4,
            min_len: 2,
            max_len: 6,
            margin: 0.1,
            seed: 0,
        }
    }
}

/// A generated dataset plus the ground truth behind it.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    /// The signal after rescaling to the requested VNP share.
    pub signal: PlantedSignal,
    /// Labels before noise.
    pub clean_labels: Vec<SentimentLabel>,
    pub planted_scores: Vec<f64>,
}

/// Exact per-class counts for `n` draws: largest-remainder rounding of the
/// normalized ratios, ties to the earlier class.
pub(crate) fn class_counts(n: usize, ratios: [f64; 3]) -> Result<[usize; 3], DatasetError> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(DatasetError::InvalidRatio(format!("{ratios:?} has a negative or non-finite entry")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > RATIO_TOLERANCE {
        return Err(DatasetError::InvalidRatio(format!("{ratios:?} sums to {sum}, not 1")));
    }
    let exact: Vec<f64> = ratios.iter().map(|r| r / sum * n as f64).collect();
    let mut counts = [0usize; 3];
    for c in 0..3 {
        counts[c] = exact[c].floor() as usize;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = n - counts.iter().sum::<usize>();
    for &c in order.iter().take(short) {
        counts[c] += 1;
    }
    Ok(counts)
}

fn rescale(signal: &PlantedSignal, forest: &SynsetForest, share: f64) -> Result<Vec<(SentiPair, f64)>, DatasetError> {
    let mut resolved = Vec::with_capacity(signal.weights.len());
    for (key, &w) in &signal.weights {
        if !w.is_finite() {
            return Err(DatasetError::InvalidConfig(format!("non-finite planted weight for {key:?}")));
        }
        let pair = make_pair(&key.modifier, &key.noun, forest).map_err(|e| DatasetError::InvalidConfig(e.to_string()))?;
        resolved.push((pair, w));
    }
    let mass = |kind: PairKind| -> f64 { resolved.iter().filter(|(p, _)| p.kind() == kind).map(|(_, w)| w.abs()).sum() };
    let (anp, vnp) = (mass(PairKind::Anp), mass(PairKind::Vnp));
    let total = anp + vnp;
    if total == 0.0 {
        return Err(DatasetError::InvalidConfig("planted signal has no weight".into()));
    }
    if (share > 0.0 && vnp == 0.0) || (share < 1.0 && anp == 0.0) {
        return Err(DatasetError::InvalidConfig(format!(
            "cannot give VNPs {share} of the mass: ANP mass {anp}, VNP mass {vnp}"
        )));
    }
    let anp_scale = if anp > 0.0 { (1.0 - share) * total / anp } else { 0.0 };
    let vnp_scale = if vnp > 0.0 { share * total / vnp } else { 0.0 };
    Ok(resolved
        .into_iter()
        .map(|(p, w)| {
            let scale = if p.kind() == PairKind::Anp { anp_scale } else { vnp_scale };
            (p, w * scale)
        })
        .collect())
}

fn sample_metadata(rng: &mut ChaCha8Rng) -> (f64, Vec<NoiseFlag>) {
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let duration = (-MEAN_DURATION_S * u.ln()).clamp(MIN_DURATION_S, MAX_DURATION_S);
    let duration = (duration * 100.0).round() / 100.0;
    let mut flags = Vec::new();
    if rng.random_bool(MIXED_CONTENT_RATE) {
        flags.push(NoiseFlag::MixedContent);
        if rng.random_bool(EXPLANATIVE_TEXT_RATE / MIXED_CONTENT_RATE) {
            flags.push(NoiseFlag::ExplanativeText);
        }
        if rng.random_bool(MOTION_BLUR_RATE) {
            flags.push(NoiseFlag::MotionBlur);
        }
        if rng.random_bool(ILLUMINATION_RATE) {
            flags.push(NoiseFlag::IlluminationChange);
        }
    }
    (duration, flags)
}

pub fn generate_synthetic(forest: &SynsetForest, config: &SyntheticConfig) -> Result<Synthetic, DatasetError> {
    let counts = class_counts(config.n, config.class_ratios)?;
    for (name, v) in [("noise_rate", config.noise_rate), ("vnp_signal_share", config.vnp_signal_share)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(DatasetError::InvalidConfig(format!("{name} = {v} outside [0, 1]")));
        }
    }
    if !(config.margin >= 0.0 && config.margin < NEUTRAL_BAND) {
        return Err(DatasetError::InvalidConfig(format!("margin {} outside [0, {NEUTRAL_BAND})", config.margin)));
    }
    if config.min_len == 0 || config.min_len > config.max_len {
        return Err(DatasetError::InvalidConfig(format!(
            "sequence length range {}..={} is empty or starts at zero",
            config.min_len, config.max_len
        )));
    }
    let signal = match &config.signal {
        Some(s) => s.clone(),
        None => PlantedSignal::random(forest, config.pairs_per_kind, config.seed ^ 0x5167_4e41_4c00_0000)?,
    };
    let pool = rescale(&signal, forest, config.vnp_signal_share)?;
    let planted = PlantedSignal::new(pool.iter().map(|(p, w)| (p.key().clone(), *w)));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut targets: Vec<SentimentLabel> = Vec::with_capacity(config.n);
    for (c, &count) in counts.iter().enumerate() {
        targets.extend(std::iter::repeat_n(SentimentLabel::CLASSES[c], count));
    }
    targets.shuffle(&mut rng);

    let indices: Vec<usize> = (0..pool.len()).collect();
    let mut instances = Vec::with_capacity(config.n);
    let mut clean_labels = Vec::with_capacity(config.n);
    let mut planted_scores = Vec::with_capacity(config.n);
    for (i, &target) in targets.iter().enumerate() {
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let len = rng.random_range(config.min_len..=config.max_len).min(pool.len());
            let picks: Vec<usize> = indices.choose_multiple(&mut rng, len).copied().collect();
            let score: f64 = picks.iter().map(|&j| pool[j].1).sum();
            let slack = (score.abs() - NEUTRAL_BAND).abs();
            if PlantedSignal::label_for(score) == target && slack >= config.margin {
                found = Some((picks, score));
                break;
            }
        }
        let (picks, score) = found.ok_or(DatasetError::GenerationStalled(target))?;
        let label = if rng.random_bool(config.noise_rate) {
            let others: Vec<SentimentLabel> = SentimentLabel::CLASSES.into_iter().filter(|&l| l != target).collect();
            *others.choose(&mut rng).expect("two other classes")
        } else {
            target
        };
        let (duration, flags) = sample_metadata(&mut rng);
        instances.push(AnnotatedInstance {
            gif_id: format!("synth-{i:05}"),
            sequence: picks.iter().map(|&j| pool[j].0.clone()).collect(),
            label,
            duration_s: Some(duration),
            noise_flags: Some(flags),
        });
        clean_labels.push(target);
        planted_scores.push(score);
    }
    Ok(Synthetic { dataset: Dataset::new(instances), signal: planted, clean_labels, planted_scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::fixture_lexicon;

    fn forest() -> SynsetForest {
        SynsetForest::build(fixture_lexicon()).unwrap().propagate_scores().unwrap()
    }

    #[test]
    fn noiseless_labels_follow_the_rule() {
        let f = forest();
        let cfg = SyntheticConfig { n: 100, noise_rate: 0.0, seed: 3, ..Default::default() };
        let s = generate_synthetic(&f, &cfg).unwrap();
        for inst in &s.dataset.instances {
            assert_eq!(inst.label, PlantedSignal::label_for(s.signal.score(&inst.sequence)));
        }
    }

    #[test]
    fn planted_sums_keep_their_margin() {
        let f = forest();
        let s = generate_synthetic(&f, &SyntheticConfig { n: 200, margin: 0.1, seed: 8, ..Default::default() }).unwrap();
        for score in &s.planted_scores {
            assert!((score.abs() - NEUTRAL_BAND).abs() >= 0.1, "{score}");
        }
        assert!(generate_synthetic(&f, &SyntheticConfig { margin: 0.3, ..Default::default() }).is_err());
    }

    #[test]
    fn zero_vnp_share_zeroes_vnp_weights() {
        let f = forest();
        let cfg = SyntheticConfig { n: 50, vnp_signal_share: 0.0, ..Default::default() };
        let s = generate_synthetic(&f, &cfg).unwrap();
        for (key, w) in &s.signal.weights {
            let p = make_pair(&key.modifier, &key.noun, &f).unwrap();
            if p.kind() == PairKind::Vnp {
                assert_eq!(*w, 0.0);
            }
        }
    }

    #[test]
    fn vnp_share_of_mass() {
        let f = forest();
        let s = generate_synthetic(&f, &SyntheticConfig { n: 10, vnp_signal_share: 0.4, ..Default::default() }).unwrap();
        let (mut anp, mut vnp) = (0.0, 0.0);
        for (key, w) in &s.signal.weights {
            match make_pair(&key.modifier, &key.noun, &f).unwrap().kind() {
                PairKind::Anp => anp += w.abs(),
                PairKind::Vnp => vnp += w.abs(),
            }
        }
        assert!((vnp / (anp + vnp) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn class_counts_follow_ratios() {
        assert_eq!(class_counts(30, [1.0 / 3.0; 3]).unwrap(), [10, 10, 10]);
        // (0.603, 0.078, 0.321) sums to 1.002 and is normalized first:
        // 1124.78 / 145.49 / 598.75 -> floors 1124/145/598, two seats to the
        // largest remainders (positive .78, neutral .75).
        assert_eq!(class_counts(1869, [0.603, 0.078, 0.321]).unwrap(), [1125, 145, 599]);
        assert!(matches!(class_counts(10, [0.5, 0.5, 0.5]), Err(DatasetError::InvalidRatio(_))));
        assert!(matches!(class_counts(10, [1.2, -0.1, -0.1]), Err(DatasetError::InvalidRatio(_))));
    }

    #[test]
    fn paper_ratio_generation() {
        let f = forest();
        let cfg = SyntheticConfig { n: 1869, class_ratios: [0.603, 0.078, 0.321], seed: 11, ..Default::default() };
        let s = generate_synthetic(&f, &cfg).unwrap();
        let mut c = [0usize; 3];
        for l in &s.clean_labels {
            c[l.class_index().unwrap()] += 1;
        }
        assert_eq!(c, [1125, 145, 599]);
    }

    #[test]
    fn deterministic_and_noisy() {
        let f = forest();
        let cfg = SyntheticConfig { n: 400, noise_rate: 0.1, seed: 5, ..Default::default() };
        let a = generate_synthetic(&f, &cfg).unwrap();
        let b = generate_synthetic(&f, &cfg).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let flipped = a.dataset.instances.iter().zip(&a.clean_labels).filter(|(i, l)| i.label != **l).count();
        assert!((20..=60).contains(&flipped), "flipped {flipped}");
    }

    #[test]
    fn bad_config() {
        let f = forest();
        let cfg = SyntheticConfig { noise_rate: 1.5, ..Default::default() };
        assert!(matches!(generate_synthetic(&f, &cfg), Err(DatasetError::InvalidConfig(_))));
        let only_anp = PlantedSignal::new([(PairKey::new("cute.a.01", "dog.n.01"), 1.0)]);
        let cfg = SyntheticConfig { signal: Some(only_anp), vnp_signal_share: 0.5, ..Default::default() };
        assert!(matches!(generate_synthetic(&f, &cfg), Err(DatasetError::InvalidConfig(_))));
    }
}
