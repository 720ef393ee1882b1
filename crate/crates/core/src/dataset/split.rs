use super::{Dataset, DatasetError, SentimentLabel};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Indices into the dataset's instance list, both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold partition of the trainable (non-CantJudge) instances.
///
/// Each class is shuffled with the seed and dealt round-robin over the folds,
/// continuing the deal across classes, so every test fold holds either
/// `floor` or `ceil` of `class_count / k` members of each class.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>, DatasetError> {
    if k < 2 {
        return Err(DatasetError::InvalidFolds(k));
    }
    let mut by_class: [Vec<usize>; 3] = Default::default();
    for (i, inst) in ds.instances.iter().enumerate() {
        if let Some(c) = inst.label.class_index() {
            by_class[c].push(i);
        }
    }
    for (c, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(DatasetError::ClassTooSmall { label: SentimentLabel::CLASSES[c], count: members.len(), k });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: Vec<(usize, usize)> = Vec::new();
    let mut slot = 0usize;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment.push((i, slot % k));
            slot += 1;
        }
    }

    let folds = (0..k)
        .map(|f| {
            let mut test: Vec<usize> = assignment.iter().filter(|(_, a)| *a == f).map(|(i, _)| *i).collect();
            let mut train: Vec<usize> = assignment.iter().filter(|(_, a)| *a != f).map(|(i, _)| *i).collect();
            test.sort_unstable();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect();
    Ok(folds)
}
