//! Bag-of-SentiPairs features in the three value modes, then CFS selection.
use gso::dataset::{generate_synthetic, SyntheticConfig};
use gso::features::{binarize_columns, build_vocabulary, cfs_select, CfsConfig, FeatureMode, FeatureOptions};
use gso::ontology::{fixture_lexicon, SynsetForest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = SynsetForest::build(fixture_lexicon())?.propagate_scores()?;
    let ds = generate_synthetic(&forest, &SyntheticConfig { n: 400, seed: 3, ..Default::default() })?.dataset;
    let seqs: Vec<_> = ds.instances.iter().map(|i| &i.sequence).collect();
    let space = build_vocabulary(seqs.iter().copied(), FeatureOptions { min_freq: 2, ..Default::default() })?;
    println!("{} features from {} instances", space.dim(), ds.len());

    let first = seqs[0];
    for mode in [FeatureMode::Binary, FeatureMode::Count, FeatureMode::Weighted] {
        let v = space.with_mode(mode).featurize(first);
        println!("{mode:?}: {:?}", v.entries());
    }

    let rows: Vec<_> = seqs.iter().map(|s| space.featurize(s)).collect();
    let y: Vec<u32> = ds.labels().iter().map(|l| l.class_index().unwrap() as u32).collect();
    let r = cfs_select(&binarize_columns(&rows, space.dim()), &y, CfsConfig::default())?;
    println!("CFS kept {} features, merit {:.4}", r.selected.len(), r.merit);
    for &j in r.selected.iter().take(8) {
        println!("  {:?}", space.vocabulary()[j].key);
    }
    Ok(())
}
