//! Stratified 10-fold cross-validation of one configuration.
use gso::classifiers::{Algorithm, TrainParams};
use gso::dataset::{generate_synthetic, SyntheticConfig};
use gso::eval::{cross_validate, FeatureConfig};
use gso::ontology::{fixture_lexicon, SynsetForest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = SynsetForest::build(fixture_lexicon())?.propagate_scores()?;
    let ds = generate_synthetic(&forest, &SyntheticConfig { n: 600, seed: 5, ..Default::default() })?.dataset;
    for selection in [false, true] {
        let features = FeatureConfig { selection, ..Default::default() };
        let report = cross_validate(&ds, &features, &TrainParams::new(Algorithm::Logistic, 0), 10, 0)?;
        println!("{}\n", report.render());
    }
    Ok(())
}
