//! Generates a labelled corpus with a planted linear rule and prints its statistics.
use gso::dataset::{compute_stats, generate_synthetic, write_dataset, SyntheticConfig};
use gso::ontology::{fixture_lexicon, SynsetForest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = SynsetForest::build(fixture_lexicon())?.propagate_scores()?;
    let synth = generate_synthetic(&forest, &SyntheticConfig { n: 1869, seed: 7, ..Default::default() })?;
    println!("{}", compute_stats(&synth.dataset).render());

    let mut heaviest: Vec<_> = synth.signal.weights.iter().collect();
    heaviest.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    for (key, w) in heaviest.iter().take(5) {
        println!("{:>8.3}  {}/{}", w, key.modifier, key.noun);
    }

    let mut head = Vec::new();
    write_dataset(&synth.dataset.subset(&[0, 1]), &mut head)?;
    print!("{}", String::from_utf8(head)?);
    Ok(())
}
