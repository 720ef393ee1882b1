//! Trains each classifier on one split and reports held-out accuracy.
use gso::classifiers::{train, Algorithm, TrainParams, TrainedModel};
use gso::dataset::{generate_synthetic, SyntheticConfig};
use gso::features::{build_vocabulary, FeatureOptions};
use gso::ontology::{fixture_lexicon, SynsetForest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = SynsetForest::build(fixture_lexicon())?.propagate_scores()?;
    let ds = generate_synthetic(&forest, &SyntheticConfig { n: 800, seed: 11, ..Default::default() })?.dataset;
    let (train_part, test_part) = ds.instances.split_at(600);
    let space = build_vocabulary(train_part.iter().map(|i| &i.sequence), FeatureOptions::default())?;
    let x: Vec<_> = train_part.iter().map(|i| space.featurize(&i.sequence)).collect();
    let y: Vec<_> = train_part.iter().map(|i| i.label).collect();
    let tx: Vec<_> = test_part.iter().map(|i| space.featurize(&i.sequence)).collect();

    for alg in Algorithm::ALL {
        let model = train(&x, &y, &TrainParams::new(alg, 0))?;
        let restored = TrainedModel::from_json(&model.to_json())?;
        let pred = restored.predict_all(&tx)?;
        let hits = pred.iter().zip(test_part).filter(|(p, i)| **p == i.label).count();
        println!("{:<14} {:.1}%", alg.to_string(), 100.0 * hits as f64 / test_part.len() as f64);
    }
    Ok(())
}
