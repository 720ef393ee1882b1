use super::{FeatureError, SparseVector};
use crate::ontology::{PairKey, PairKind, SentiPair, SentiPairSequence};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// 1 if the pair occurs at all.
    #[default]
    Binary,
    /// Number of occurrences.
    Count,
    /// Occurrences times the pair's ontology weight.
    Weighted,
}

impl std::str::FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(FeatureMode::Binary),
            "count" => Ok(FeatureMode::Count),
            "weighted" => Ok(FeatureMode::Weighted),
            other => Err(format!("unknown feature mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKey {
    Pair(PairKey),
    /// Two pairs occurring back to back, in that order.
    Bigram(PairKey, PairKey),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub key: FeatureKey,
    /// Pair kind; for bigrams, set only when both halves share a kind.
    pub kind: Option<PairKind>,
    /// Ontology weight; the mean of both halves for bigrams.
    pub weight: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureOptions {
    pub mode: FeatureMode,
    pub min_freq: usize,
    /// Adds consecutive-pair features. Off for the standard experiments.
    pub pair_bigrams: bool,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions { mode: FeatureMode::Binary, min_freq: 1, pair_bigrams: false }
    }
}

/// Vocabulary over pair keys plus an optional selection mask.
///
/// With a mask set, [`FeatureSpace::featurize`] emits vectors over the
/// selected features only, renumbered in vocabulary order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    vocabulary: Vec<VocabEntry>,
    mode: FeatureMode,
    pair_bigrams: bool,
    selected: Option<Vec<bool>>,
    pair_index: HashMap<PairKey, usize>,
    bigram_index: HashMap<(PairKey, PairKey), usize>,
    projection: Option<(Vec<Option<u32>>, usize)>,
}

#[derive(Serialize, Deserialize)]
struct SpaceFile {
    format_version: u32,
    mode: FeatureMode,
    pair_bigrams: bool,
    vocabulary: Vec<VocabEntry>,
    selected: Option<Vec<bool>>,
}

/// Builds the vocabulary from training sequences: every pair occurring at
/// least `min_freq` times, in canonical pair order. Bigrams, when enabled,
/// follow all pairs, ordered by their halves' canonical order.
pub fn build_vocabulary<'a, I>(train: I, options: FeatureOptions) -> Result<FeatureSpace, FeatureError>
where
    I: IntoIterator<Item = &'a SentiPairSequence>,
{
    let mut pairs: HashMap<&PairKey, (&SentiPair, usize)> = HashMap::new();
    let mut bigrams: HashMap<(&PairKey, &PairKey), (&SentiPair, &SentiPair, usize)> = HashMap::new();
    for seq in train {
        for p in seq {
            pairs.entry(p.key()).or_insert((p, 0)).1 += 1;
        }
        if options.pair_bigrams {
            for w in seq.pairs().windows(2) {
                bigrams.entry((w[0].key(), w[1].key())).or_insert((&w[0], &w[1], 0)).2 += 1;
            }
        }
    }
    let min = options.min_freq.max(1);
    let mut kept: Vec<&SentiPair> = pairs.values().filter(|(_, c)| *c >= min).map(|(p, _)| *p).collect();
    kept.sort_by(|a, b| a.canonical_cmp(b));
    let mut vocabulary: Vec<VocabEntry> = kept
        .into_iter()
        .map(|p| VocabEntry {
            key: FeatureKey::Pair(p.key().clone()),
            kind: Some(p.kind()),
            weight: p.weight(),
            label: p.label(),
        })
        .collect();
    if options.pair_bigrams {
        let mut kept: Vec<(&SentiPair, &SentiPair)> =
            bigrams.values().filter(|(_, _, c)| *c >= min).map(|(a, b, _)| (*a, *b)).collect();
        kept.sort_by(|x, y| x.0.canonical_cmp(y.0).then_with(|| x.1.canonical_cmp(y.1)));
        vocabulary.extend(kept.into_iter().map(|(a, b)| VocabEntry {
            key: FeatureKey::Bigram(a.key().clone(), b.key().clone()),
            kind: (a.kind() == b.kind()).then_some(a.kind()),
            weight: (a.weight() + b.weight()) / 2.0,
            label: format!("{} > {}", a.label(), b.label()),
        }));
    }
    if vocabulary.is_empty() {
        return Err(FeatureError::EmptyVocabulary);
    }
    Ok(FeatureSpace::from_parts(vocabulary, options.mode, options.pair_bigrams, None))
}

pub fn featurize(seq: &SentiPairSequence, space: &FeatureSpace) -> SparseVector {
    space.featurize(seq)
}

impl FeatureSpace {
    fn from_parts(vocabulary: Vec<VocabEntry>, mode: FeatureMode, pair_bigrams: bool, selected: Option<Vec<bool>>) -> Self {
        let mut pair_index = HashMap::new();
        let mut bigram_index = HashMap::new();
        for (i, e) in vocabulary.iter().enumerate() {
            match &e.key {
                FeatureKey::Pair(k) => {
                    pair_index.insert(k.clone(), i);
                }
                FeatureKey::Bigram(a, b) => {
                    bigram_index.insert((a.clone(), b.clone()), i);
                }
            }
        }
        let projection = selected.as_ref().map(|mask| {
            let mut next = 0u32;
            let map = mask
                .iter()
                .map(|&on| {
                    on.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect();
            (map, next as usize)
        });
        FeatureSpace { vocabulary, mode, pair_bigrams, selected, pair_index, bigram_index, projection }
    }

    pub fn vocabulary(&self) -> &[VocabEntry] {
        &self.vocabulary
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn pair_bigrams(&self) -> bool {
        self.pair_bigrams
    }

    pub fn selected(&self) -> Option<&[bool]> {
        self.selected.as_deref()
    }

    /// Size of the full vocabulary, ignoring any selection.
    pub fn vocab_len(&self) -> usize {
        self.vocabulary.len()
    }

    /// Dimension of the vectors [`FeatureSpace::featurize`] emits.
    pub fn dim(&self) -> usize {
        match &self.projection {
            Some((_, d)) => *d,
            None => self.vocabulary.len(),
        }
    }

    /// Vocabulary entries of the emitted dimensions, in order.
    pub fn active_entries(&self) -> Vec<&VocabEntry> {
        match &self.selected {
            Some(mask) => self.vocabulary.iter().zip(mask).filter(|(_, &on)| on).map(|(e, _)| e).collect(),
            None => self.vocabulary.iter().collect(),
        }
    }

    pub fn with_mode(&self, mode: FeatureMode) -> FeatureSpace {
        FeatureSpace { mode, ..self.clone() }
    }

    pub fn with_selection(&self, mask: Vec<bool>) -> Result<FeatureSpace, FeatureError> {
        if mask.len() != self.vocabulary.len() {
            return Err(FeatureError::InvalidMask { expected: self.vocabulary.len(), got: mask.len() });
        }
        Ok(FeatureSpace::from_parts(self.vocabulary.clone(), self.mode, self.pair_bigrams, Some(mask)))
    }

    /// Selects the given vocabulary indices.
    pub fn select_indices(&self, indices: &[usize]) -> Result<FeatureSpace, FeatureError> {
        let mut mask = vec![false; self.vocabulary.len()];
        for &i in indices {
            *mask.get_mut(i).ok_or(FeatureError::InvalidMask { expected: self.vocabulary.len(), got: i + 1 })? = true;
        }
        self.with_selection(mask)
    }

    pub fn without_selection(&self) -> FeatureSpace {
        FeatureSpace::from_parts(self.vocabulary.clone(), self.mode, self.pair_bigrams, None)
    }

    /// Bag-of-pairs vector. Pairs outside the vocabulary are ignored and the
    /// order of the sequence is discarded, except through bigram features.
    pub fn featurize(&self, seq: &SentiPairSequence) -> SparseVector {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for p in seq {
            if let Some(&i) = self.pair_index.get(p.key()) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        if self.pair_bigrams {
            for w in seq.pairs().windows(2) {
                if let Some(&i) = self.bigram_index.get(&(w[0].key().clone(), w[1].key().clone())) {
                    *counts.entry(i).or_insert(0.0) += 1.0;
                }
            }
        }
        let entries: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(i, c)| {
                let v = match self.mode {
                    FeatureMode::Binary => 1.0,
                    FeatureMode::Count => c,
                    FeatureMode::Weighted => c * self.vocabulary[i].weight,
                };
                (i as u32, v)
            })
            .collect();
        let full = SparseVector::new(self.vocabulary.len(), entries).expect("indices sorted and in range");
        match &self.projection {
            Some((map, dim)) => full.project(map, *dim),
            None => full,
        }
    }

    pub fn to_json(&self) -> String {
        let file = SpaceFile {
            format_version: FORMAT_VERSION,
            mode: self.mode,
            pair_bigrams: self.pair_bigrams,
            vocabulary: self.vocabulary.clone(),
            selected: self.selected.clone(),
        };
        serde_json::to_string_pretty(&file).expect("feature space serializes")
    }

    pub fn from_json(text: &str) -> Result<FeatureSpace, FeatureError> {
        let file: SpaceFile = serde_json::from_str(text).map_err(|e| FeatureError::Format(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(FeatureError::Format(format!(
                "format version {} not supported (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        if let Some(mask) = &file.selected {
            if mask.len() != file.vocabulary.len() {
                return Err(FeatureError::InvalidMask { expected: file.vocabulary.len(), got: mask.len() });
            }
        }
        Ok(FeatureSpace::from_parts(file.vocabulary, file.mode, file.pair_bigrams, file.selected))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_json() + "\n")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FeatureSpace, FeatureError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| FeatureError::Format(format!("{}: {e}", path.as_ref().display())))?;
        FeatureSpace::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{fixture_lexicon, validate_sequence, SynsetForest};
    use proptest::prelude::*;

    fn forest() -> SynsetForest {
        SynsetForest::build(fixture_lexicon()).unwrap().propagate_scores().unwrap()
    }

    fn seq(f: &SynsetForest, pairs: &[(&str, &str)]) -> SentiPairSequence {
        let keys: Vec<PairKey> = pairs.iter().map(|(m, n)| PairKey::new(*m, *n)).collect();
        validate_sequence(&keys, f).unwrap()
    }

    #[test]
    fn vocabulary_and_threshold() {
        let f = forest();
        let a = seq(&f, &[("cute.a.01", "dog.n.01"), ("sad.a.01", "girl.n.01")]);
        let b = seq(&f, &[("cute.a.01", "dog.n.01"), ("fall.v.01", "cup.n.01")]);
        let space = build_vocabulary([&a, &b], FeatureOptions::default()).unwrap();
        let labels: Vec<&str> = space.vocabulary().iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, ["cute dog", "sad girl", "fall cup"]);
        let space = build_vocabulary([&a, &b], FeatureOptions { min_freq: 2, ..Default::default() }).unwrap();
        assert_eq!(space.vocab_len(), 1);
        let empty = SentiPairSequence::default();
        assert_eq!(build_vocabulary([&empty], FeatureOptions::default()), Err(FeatureError::EmptyVocabulary));
    }

    #[test]
    fn modes() {
        let f = forest();
        // fall (-0.4) + girl (0.0): pair weight -0.4.
        let s = seq(&f, &[("fall.v.01", "girl.n.01"), ("fall.v.01", "girl.n.01"), ("fall.v.01", "girl.n.01")]);
        let space = build_vocabulary([&s], FeatureOptions::default()).unwrap();
        assert_eq!(space.featurize(&s).entries(), &[(0, 1.0)]);
        assert_eq!(space.with_mode(FeatureMode::Count).featurize(&s).entries(), &[(0, 3.0)]);
        let w = space.with_mode(FeatureMode::Weighted).featurize(&s);
        assert!((w.get(0) - (-1.2)).abs() < 1e-12);
        assert_eq!(space.featurize(&SentiPairSequence::default()).nnz(), 0);
    }

    #[test]
    fn unknown_pairs_ignored_and_selection_projects() {
        let f = forest();
        let train = seq(&f, &[("cute.a.01", "dog.n.01"), ("sad.a.01", "girl.n.01"), ("fall.v.01", "cup.n.01")]);
        let space = build_vocabulary([&train], FeatureOptions::default()).unwrap();
        let test = seq(&f, &[("happy.a.01", "baby.n.01"), ("fall.v.01", "cup.n.01")]);
        assert_eq!(space.featurize(&test).entries(), &[(2, 1.0)]);
        let sel = space.select_indices(&[0, 2]).unwrap();
        assert_eq!(sel.dim(), 2);
        assert_eq!(sel.featurize(&test).entries(), &[(1, 1.0)]);
        assert!(space.with_selection(vec![true]).is_err());
    }

    #[test]
    fn bigrams_follow_pairs() {
        let f = forest();
        let s = seq(&f, &[("lovely.a.01", "girl.n.01"), ("frown.v.01", "girl.n.01")]);
        let space = build_vocabulary([&s], FeatureOptions { pair_bigrams: true, ..Default::default() }).unwrap();
        assert_eq!(space.vocab_len(), 3);
        assert_eq!(space.vocabulary()[2].label, "lovely girl > frown girl");
        assert_eq!(space.vocabulary()[2].kind, None);
        assert_eq!(space.featurize(&s).nnz(), 3);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = forest();
        let s = seq(&f, &[("cute.a.01", "dog.n.01"), ("fall.v.01", "cup.n.01"), ("bright.a.02", "sunset.n.01")]);
        let space = build_vocabulary([&s], FeatureOptions { mode: FeatureMode::Weighted, ..Default::default() })
            .unwrap()
            .select_indices(&[1])
            .unwrap();
        let text = space.to_json();
        let back = FeatureSpace::from_json(&text).unwrap();
        assert_eq!(back, space);
        assert_eq!(back.to_json(), text);
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(FeatureSpace::from_json(&bumped), Err(FeatureError::Format(_))));
    }

    proptest! {
        #[test]
        fn featurize_ignores_order(picks in proptest::collection::vec(0usize..40, 0..12), seed: u64) {
            use rand::{SeedableRng, seq::SliceRandom};
            let f = forest();
            let all = crate::ontology::enumerate_pairs(&f, 40).unwrap();
            let pairs: Vec<SentiPair> = picks.iter().map(|&i| all[i].clone()).collect();
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let vocab_src = SentiPairSequence::new(all.clone());
            for mode in [FeatureMode::Binary, FeatureMode::Count, FeatureMode::Weighted] {
                let space = build_vocabulary([&vocab_src], FeatureOptions { mode, ..Default::default() }).unwrap();
                prop_assert_eq!(
                    space.featurize(&SentiPairSequence::new(pairs.clone())),
                    space.featurize(&SentiPairSequence::new(shuffled.clone()))
                );
            }
        }
    }
}
