//! Turns raw modifier/noun keys into a validated SentiPair sequence.
use gso::ontology::{fixture_lexicon, validate_sequence, PairKey, SynsetForest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = SynsetForest::build(fixture_lexicon())?.propagate_scores()?;
    let raw = [
        PairKey::new("lovely.a.01", "girl.n.01"),
        PairKey::new("innocent.a.01", "girl.n.01"),
        PairKey::new("frown.v.01", "girl.n.01"),
        PairKey::new("shout.v.01", "girl.n.01"),
    ];
    let seq = validate_sequence(&raw, &forest).map_err(|r| format!("{r:?}"))?;
    for p in seq.iter() {
        println!("{:<28} {:?}  weight {:+.3}", p.label(), p.kind(), p.weight());
    }

    // A noun in modifier position is reported with its index.
    let bad = [PairKey::new("cute.a.01", "dog.n.01"), PairKey::new("dog.n.01", "cat.n.01")];
    match validate_sequence(&bad, &forest) {
        Ok(_) => println!("unexpectedly valid"),
        Err(report) => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}
