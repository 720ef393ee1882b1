use super::{Pos, SynsetForest, SynsetId};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairKind {
    /// Adjective + noun.
    #[serde(rename = "ANP")]
    Anp,
    /// Verb + noun.
    #[serde(rename = "VNP")]
    Vnp,
}

impl PairKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::Anp => "ANP",
            PairKind::Vnp => "VNP",
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A raw `(modifier, noun)` reference as it appears in dataset records and
/// annotation payloads, before validation against a forest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairKey {
    pub modifier: SynsetId,
    pub noun: SynsetId,
}

impl PairKey {
    pub fn new(modifier: impl Into<String>, noun: impl Into<String>) -> Self {
        PairKey { modifier: SynsetId(modifier.into()), noun: SynsetId(noun.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Error, Serialize, Deserialize)]
#[serde(tag = "error", content = "synset")]
pub enum PairError {
    #[error("unknown synset `{0}`")]
    UnknownSynset(SynsetId),
    #[error("`{0}` is not a noun")]
    NotANoun(SynsetId),
    #[error("`{0}` is not an adjective or verb")]
    NotAModifier(SynsetId),
    #[error("`{0}` has no sentiment score")]
    MissingScore(SynsetId),
}

impl PairError {
    pub fn code(&self) -> &'static str {
        match self {
            PairError::UnknownSynset(_) => "UnknownSynset",
            PairError::NotANoun(_) => "NotANoun",
            PairError::NotAModifier(_) => "NotAModifier",
            PairError::MissingScore(_) => "MissingScore",
        }
    }
}

/// A validated pair. The lemma and sense of both members are kept so pairs
/// can be put in canonical order without going back to the forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentiPair {
    key: PairKey,
    kind: PairKind,
    weight: f64,
    modifier_lemma: String,
    modifier_sense: u32,
    noun_lemma: String,
    noun_sense: u32,
}

impl SentiPair {
    pub fn key(&self) -> &PairKey {
        &self.key
    }

    pub fn modifier(&self) -> &SynsetId {
        &self.key.modifier
    }

    pub fn noun(&self) -> &SynsetId {
        &self.key.noun
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// "cute dog", "fall cup".
    pub fn label(&self) -> String {
        format!("{} {}", self.modifier_lemma, self.noun_lemma)
    }

    /// Ordering by `(kind, modifier lemma, noun lemma)`, with senses and ids
    /// as final tie-breakers so the order is total.
    pub fn canonical_cmp(&self, other: &SentiPair) -> Ordering {
        (self.kind, &self.modifier_lemma, self.modifier_sense, &self.noun_lemma, self.noun_sense, &self.key).cmp(&(
            other.kind,
            &other.modifier_lemma,
            other.modifier_sense,
            &other.noun_lemma,
            other.noun_sense,
            &other.key,
        ))
    }
}

impl fmt::Display for SentiPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.label(), self.kind)
    }
}

/// Pairs in order of occurrence within one GIF. Duplicates are allowed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentiPairSequence(Vec<SentiPair>);

impl SentiPairSequence {
    pub fn new(pairs: Vec<SentiPair>) -> Self {
        SentiPairSequence(pairs)
    }

    pub fn pairs(&self) -> &[SentiPair] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SentiPair> {
        self.0.iter()
    }

    pub fn keys(&self) -> Vec<PairKey> {
        self.0.iter().map(|p| p.key.clone()).collect()
    }

    pub fn kinds(&self) -> Vec<PairKind> {
        self.0.iter().map(|p| p.kind).collect()
    }

    /// Keeps only pairs of the given kind, preserving order.
    pub fn filtered(&self, kind: PairKind) -> SentiPairSequence {
        SentiPairSequence(self.0.iter().filter(|p| p.kind == kind).cloned().collect())
    }
}

impl<'a> IntoIterator for &'a SentiPairSequence {
    type Item = &'a SentiPair;
    type IntoIter = std::slice::Iter<'a, SentiPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<SentiPair> for SentiPairSequence {
    fn from_iter<I: IntoIterator<Item = SentiPair>>(iter: I) -> Self {
        SentiPairSequence(iter.into_iter().collect())
    }
}

/// Pair weight from the two member scores: their sum, clamped to `[-1, 1]`.
pub fn pair_weight(modifier_score: f64, noun_score: f64) -> f64 {
    (modifier_score + noun_score).clamp(-1.0, 1.0)
}

pub fn make_pair(modifier: &SynsetId, noun: &SynsetId, forest: &SynsetForest) -> Result<SentiPair, PairError> {
    let m = forest.get(modifier).ok_or_else(|| PairError::UnknownSynset(modifier.clone()))?;
    if !m.pos.is_modifier() {
        return Err(PairError::NotAModifier(modifier.clone()));
    }
    let n = forest.get(noun).ok_or_else(|| PairError::UnknownSynset(noun.clone()))?;
    if n.pos != Pos::Noun {
        return Err(PairError::NotANoun(noun.clone()));
    }
    let ms = m.score.ok_or_else(|| PairError::MissingScore(modifier.clone()))?;
    let ns = n.score.ok_or_else(|| PairError::MissingScore(noun.clone()))?;
    Ok(SentiPair {
        key: PairKey { modifier: modifier.clone(), noun: noun.clone() },
        kind: if m.pos == Pos::Adjective { PairKind::Anp } else { PairKind::Vnp },
        weight: pair_weight(ms, ns),
        modifier_lemma: m.lemma.clone(),
        modifier_sense: m.sense,
        noun_lemma: n.lemma.clone(),
        noun_sense: n.sense,
    })
}

/// Every non-root modifier combined with every non-root noun, in canonical
/// order, truncated to `max_pairs`. Tree roots are category placeholders and
/// never enter the vocabulary. Fails only if the forest still has unscored
/// synsets.
pub fn enumerate_pairs(forest: &SynsetForest, max_pairs: usize) -> Result<Vec<SentiPair>, PairError> {
    let mut modifiers: Vec<_> = forest
        .synsets()
        .iter()
        .filter(|s| s.pos.is_modifier() && s.parent.is_some())
        .collect();
    modifiers.sort_by(|a, b| (a.pos, &a.lemma, a.sense, &a.id).cmp(&(b.pos, &b.lemma, b.sense, &b.id)));
    let mut nouns: Vec<_> = forest.synsets_of(Pos::Noun).filter(|s| s.parent.is_some()).collect();
    nouns.sort_by(|a, b| (&a.lemma, a.sense, &a.id).cmp(&(&b.lemma, b.sense, &b.id)));

    let mut out = Vec::with_capacity((modifiers.len() * nouns.len()).min(max_pairs));
    'outer: for m in &modifiers {
        for n in &nouns {
            if out.len() >= max_pairs {
                break 'outer;
            }
            out.push(make_pair(&m.id, &n.id, forest)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationEntry {
    /// Zero-based position in the submitted sequence.
    pub position: usize,
    pub pair: PairKey,
    pub error: PairError,
}

/// Every offending position of a raw sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "position {}: {}", e.position, e.error)?;
        }
        Ok(())
    }
}

pub fn validate_sequence(raw: &[PairKey], forest: &SynsetForest) -> Result<SentiPairSequence, ValidationReport> {
    let mut pairs = Vec::with_capacity(raw.len());
    let mut entries = Vec::new();
    for (position, key) in raw.iter().enumerate() {
        match make_pair(&key.modifier, &key.noun, forest) {
            Ok(p) => pairs.push(p),
            Err(error) => entries.push(ValidationEntry { position, pair: key.clone(), error }),
        }
    }
    if entries.is_empty() {
        Ok(SentiPairSequence(pairs))
    } else {
        Err(ValidationReport { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Synset;

    fn syn(id: &str, pos: Pos, score: Option<f64>, parent: Option<&str>) -> Synset {
        Synset {
            id: SynsetId::new(id),
            lemma: id.to_owned(),
            sense: 1,
            pos,
            gloss: String::new(),
            score,
            parent: parent.map(SynsetId::new),
        }
    }

    fn forest() -> SynsetForest {
        SynsetForest::build(vec![
            syn("adj", Pos::Adjective, Some(0.0), None),
            syn("cute", Pos::Adjective, Some(0.8), Some("adj")),
            syn("lovely", Pos::Adjective, Some(0.8), Some("adj")),
            syn("innocent", Pos::Adjective, Some(0.5), Some("adj")),
            syn("act", Pos::Verb, Some(0.0), None),
            syn("fall", Pos::Verb, Some(-0.4), Some("act")),
            syn("frown", Pos::Verb, Some(-0.6), Some("act")),
            syn("shout", Pos::Verb, Some(-0.5), Some("act")),
            syn("entity", Pos::Noun, Some(0.0), None),
            syn("dog", Pos::Noun, Some(0.0), Some("entity")),
            syn("cat", Pos::Noun, Some(0.1), Some("entity")),
            syn("cup", Pos::Noun, Some(-0.7), Some("entity")),
            syn("girl", Pos::Noun, Some(0.0), Some("entity")),
        ])
        .unwrap()
    }

    fn id(s: &str) -> SynsetId {
        SynsetId::new(s)
    }

    #[test]
    fn cute_dog_is_a_positive_anp() {
        let p = make_pair(&id("cute"), &id("dog"), &forest()).unwrap();
        assert_eq!(p.kind(), PairKind::Anp);
        assert_eq!(p.weight(), 0.8);
        assert_eq!(p.to_string(), "cute dog [ANP]");
    }

    #[test]
    fn falling_cup_clamps() {
        let p = make_pair(&id("fall"), &id("cup"), &forest()).unwrap();
        assert_eq!(p.kind(), PairKind::Vnp);
        assert_eq!(p.weight(), -1.0);
    }

    #[test]
    fn pos_errors() {
        let f = forest();
        assert_eq!(make_pair(&id("dog"), &id("cat"), &f), Err(PairError::NotAModifier(id("dog"))));
        assert_eq!(make_pair(&id("cute"), &id("fall"), &f), Err(PairError::NotANoun(id("fall"))));
        assert_eq!(make_pair(&id("cute"), &id("unicorn"), &f), Err(PairError::UnknownSynset(id("unicorn"))));
    }

    #[test]
    fn missing_score() {
        let f = SynsetForest::build(vec![
            syn("adj", Pos::Adjective, Some(0.0), None),
            syn("odd", Pos::Adjective, None, Some("adj")),
            syn("act", Pos::Verb, Some(0.0), None),
            syn("entity", Pos::Noun, Some(0.0), None),
            syn("dog", Pos::Noun, Some(0.0), Some("entity")),
        ])
        .unwrap();
        assert_eq!(make_pair(&id("odd"), &id("dog"), &f), Err(PairError::MissingScore(id("odd"))));
        assert!(enumerate_pairs(&f, usize::MAX).is_err());
        let f = f.propagate_scores().unwrap();
        assert_eq!(make_pair(&id("odd"), &id("dog"), &f).unwrap().weight(), 0.0);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let f = SynsetForest::build(vec![
            syn("adj", Pos::Adjective, Some(0.0), None),
            syn("cute", Pos::Adjective, Some(0.8), Some("adj")),
            syn("act", Pos::Verb, Some(0.0), None),
            syn("fall", Pos::Verb, Some(-0.4), Some("act")),
            syn("entity", Pos::Noun, Some(0.0), None),
            syn("dog", Pos::Noun, Some(0.0), Some("entity")),
            syn("cup", Pos::Noun, Some(-0.7), Some("entity")),
        ])
        .unwrap();
        let all = enumerate_pairs(&f, usize::MAX).unwrap();
        let labels: Vec<String> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(labels, ["cute cup [ANP]", "cute dog [ANP]", "fall cup [VNP]", "fall dog [VNP]"]);
        let first = enumerate_pairs(&f, 1).unwrap();
        assert_eq!(first, all[..1]);
    }

    #[test]
    fn sequence_validation() {
        let f = forest();
        assert_eq!(validate_sequence(&[], &f), Ok(SentiPairSequence::default()));

        let report = validate_sequence(&[PairKey::new("cute", "dog"), PairKey::new("dog", "cat")], &f).unwrap_err();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].position, 1);
        assert_eq!(report.entries[0].error, PairError::NotAModifier(id("dog")));
    }

    #[test]
    fn figure_four_sequence_keeps_order() {
        let raw = [
            PairKey::new("lovely", "girl"),
            PairKey::new("innocent", "girl"),
            PairKey::new("frown", "girl"),
            PairKey::new("shout", "girl"),
        ];
        let seq = validate_sequence(&raw, &forest()).unwrap();
        assert_eq!(seq.keys(), raw);
        assert_eq!(seq.kinds(), [PairKind::Anp, PairKind::Anp, PairKind::Vnp, PairKind::Vnp]);
    }
}
