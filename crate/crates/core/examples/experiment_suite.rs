//! The full algorithm x selection x representation grid, rendered as tables.
use gso::classifiers::Algorithm;
use gso::dataset::{generate_synthetic, SyntheticConfig};
use gso::eval::{run_suite, SuiteConfig};
use gso::ontology::{fixture_lexicon, SynsetForest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = SynsetForest::build(fixture_lexicon())?.propagate_scores()?;
    let ds = generate_synthetic(&forest, &SyntheticConfig { n: 500, seed: 1, ..Default::default() })?.dataset;
    let config = SuiteConfig {
        algorithms: vec![Algorithm::NaiveBayes, Algorithm::Smo, Algorithm::Logistic],
        ablation_algorithms: vec![Algorithm::Smo, Algorithm::Logistic],
        k: 5,
        ..Default::default()
    };
    let report = run_suite(&ds, &forest, &config)?;
    println!("{}", report.render_paper());
    Ok(())
}
