use gso::dataset::{
    generate_synthetic, read_dataset, stratified_kfold, write_dataset, LoadMode, PlantedSignal, SentimentLabel, SyntheticConfig, NEUTRAL_BAND,
};
use gso::ontology::{fixture_lexicon, SynsetForest};
use proptest::prelude::*;

fn forest() -> SynsetForest {
    SynsetForest::build(fixture_lexicon()).unwrap().propagate_scores().unwrap()
}

#[test]
fn synthetic_counts_follow_largest_remainder() {
    let f = forest();
    let s = generate_synthetic(&f, &SyntheticConfig { n: 1869, class_ratios: [0.603, 0.078, 0.321], ..Default::default() }).unwrap();
    let count = |l| s.clean_labels.iter().filter(|&&c| c == l).count();
    assert_eq!((count(SentimentLabel::Positive), count(SentimentLabel::Negative), count(SentimentLabel::Neutral)), (1125, 145, 599));
}

#[test]
fn planted_rule_explains_clean_labels() {
    let f = forest();
    let s = generate_synthetic(&f, &SyntheticConfig { n: 300, seed: 9, ..Default::default() }).unwrap();
    for ((inst, &clean), &score) in s.dataset.instances.iter().zip(&s.clean_labels).zip(&s.planted_scores) {
        assert_eq!(PlantedSignal::label_for(score), clean);
        assert!((s.signal.score(&inst.sequence) - score).abs() < 1e-12);
        assert!((score.abs() - NEUTRAL_BAND).abs() >= 0.1 - 1e-12);
        assert_eq!(inst.label, clean, "noise is off");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn folds_partition_and_stratify(n in 30usize..200, k in 2usize..6, seed in any::<u64>()) {
        let f = forest();
        let ds = generate_synthetic(&f, &SyntheticConfig { n, class_ratios: [0.4, 0.3, 0.3], seed, ..Default::default() }).unwrap().dataset;
        let folds = stratified_kfold(&ds, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0usize; ds.len()];
        for fold in &folds {
            for &i in &fold.test {
                seen[i] += 1;
            }
            let mut all: Vec<usize> = fold.train.iter().chain(&fold.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for label in SentimentLabel::CLASSES {
            let total = ds.instances.iter().filter(|i| i.label == label).count();
            for fold in &folds {
                let c = fold.test.iter().filter(|&&i| ds.instances[i].label == label).count();
                prop_assert!(c == total / k || c == total.div_ceil(k));
            }
        }
        prop_assert_eq!(&folds, &stratified_kfold(&ds, k, seed).unwrap());
    }

    #[test]
    fn write_then_read_is_identity(n in 1usize..80, seed in any::<u64>(), noise in 0.0f64..0.5) {
        let f = forest();
        let ds = generate_synthetic(&f, &SyntheticConfig { n, noise_rate: noise, seed, ..Default::default() }).unwrap().dataset;
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice(), &f, LoadMode::Strict).unwrap();
        prop_assert_eq!(&back, &ds);
        let mut again = Vec::new();
        write_dataset(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn vnp_share_is_exact(share in 0.05f64..0.95, seed in any::<u64>()) {
        let f = forest();
        let s = generate_synthetic(&f, &SyntheticConfig { n: 60, vnp_signal_share: share, seed, ..Default::default() }).unwrap();
        let (mut vnp, mut total) = (0.0, 0.0);
        for (key, w) in s.signal.weights.iter() {
            total += w.abs();
            if f.get(&key.modifier).unwrap().pos == gso::ontology::Pos::Verb {
                vnp += w.abs();
            }
        }
        prop_assert!((vnp / total - share).abs() < 1e-9);
    }
}
