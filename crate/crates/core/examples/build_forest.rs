//! Builds the synset forest from the bundled lexicon and walks a path to the root.
use gso::ontology::{read_lexicon_file, Pos, SynsetForest, SynsetId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.jsonl");
    let forest = SynsetForest::build(read_lexicon_file(path)?)?.propagate_scores()?;
    println!("{}", forest.summary().render());

    let girl = SynsetId("girl.n.01".into());
    let path: Vec<String> = forest.path_to_root(&girl).iter().map(|id| id.0.clone()).collect();
    println!("girl.n.01 -> root: {}", path.join(" -> "));

    for pos in Pos::ALL {
        let hits: Vec<&str> = forest.search("s", Some(pos)).iter().map(|s| s.id.0.as_str()).collect();
        println!("{pos:?} starting with 's': {hits:?}");
    }
    Ok(())
}
