use gso::classifiers::{Algorithm, TrainParams};
use gso::dataset::{generate_synthetic, stratified_kfold, SentimentLabel, SyntheticConfig};
use gso::eval::{cross_validate, fit_fold, metrics, ConfusionMatrix, FeatureConfig, Representation};
use gso::ontology::{fixture_lexicon, SynsetForest};
use proptest::prelude::*;

fn forest() -> SynsetForest {
    SynsetForest::build(fixture_lexicon()).unwrap().propagate_scores().unwrap()
}

#[test]
fn no_leakage_from_test_folds() {
    let f = forest();
    let ds = generate_synthetic(&f, &SyntheticConfig { n: 150, noise_rate: 0.1, seed: 8, ..Default::default() }).unwrap().dataset;
    let folds = stratified_kfold(&ds, 5, 1).unwrap();
    for alg in Algorithm::ALL {
        for selection in [false, true] {
            let features = FeatureConfig { selection, ..Default::default() };
            let params = TrainParams::new(alg, 4);
            for fold in &folds {
                let with_test = fit_fold(&ds, &fold.train, &features, &params).unwrap();
                let train_only = ds.subset(&fold.train);
                let all: Vec<usize> = (0..train_only.len()).collect();
                let without = fit_fold(&train_only, &all, &features, &params).unwrap();
                assert_eq!(with_test.model, without.model, "{alg}, selection {selection}");
                assert_eq!(with_test.space.to_json(), without.space.to_json());
            }
        }
    }
}

#[test]
fn noiseless_smo_generalizes() {
    let f = forest();
    let ds = generate_synthetic(&f, &SyntheticConfig { n: 600, seed: 2, ..Default::default() }).unwrap().dataset;
    let r = cross_validate(&ds, &FeatureConfig::default(), &TrainParams::new(Algorithm::Smo, 0), 5, 0).unwrap();
    assert!(r.metrics.accuracy >= 0.9, "{}", r.render());
    assert_eq!(r.metrics.total as usize, ds.len());
}

#[test]
fn cant_judge_never_enters_evaluation() {
    let f = forest();
    let mut ds = generate_synthetic(&f, &SyntheticConfig { n: 120, seed: 3, ..Default::default() }).unwrap().dataset;
    for i in (0..ds.len()).step_by(10) {
        ds.instances[i].label = SentimentLabel::CantJudge;
    }
    let r = cross_validate(&ds, &FeatureConfig::default(), &TrainParams::new(Algorithm::NaiveBayes, 0), 3, 0).unwrap();
    assert_eq!(r.metrics.total as usize, ds.trainable_indices().len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_recall_equals_accuracy(counts in prop::array::uniform3(prop::array::uniform3(0u64..30))) {
        let cm = ConfusionMatrix::new(counts);
        prop_assume!(cm.total() > 0);
        let m = metrics(&cm).unwrap();
        prop_assert!((m.recall - m.accuracy).abs() < 1e-12);
        for v in [m.precision, m.recall, m.f1, m.accuracy] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let support: u64 = m.per_class.iter().map(|c| c.support).sum();
        prop_assert_eq!(support, cm.total());
    }

    #[test]
    fn filtered_representations_only_see_their_kind(seed in any::<u64>()) {
        let f = forest();
        let ds = generate_synthetic(&f, &SyntheticConfig { n: 60, seed, ..Default::default() }).unwrap().dataset;
        let idx: Vec<usize> = (0..ds.len()).collect();
        for rep in [Representation::AnpOnly, Representation::VnpOnly] {
            let fitted = fit_fold(&ds, &idx, &FeatureConfig { representation: rep, ..Default::default() }, &TrainParams::new(Algorithm::NaiveBayes, 0)).unwrap();
            let want = if rep == Representation::AnpOnly { gso::ontology::PairKind::Anp } else { gso::ontology::PairKind::Vnp };
            prop_assert!(fitted.space.vocabulary().iter().all(|e| e.kind == Some(want)));
        }
    }
}
