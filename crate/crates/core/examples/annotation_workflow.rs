//! Seven workers annotate one GIF through a persistent store; the consolidated
//! label is exported as a dataset record.
use gso::annotation::{AnnotationStore, ExportFilter, StoreConfig, Submission, SystemClock};
use gso::dataset::SentimentLabel;
use gso::ontology::{fixture_lexicon, PairKey, SynsetForest};
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let forest = Arc::new(SynsetForest::build(fixture_lexicon())?.propagate_scores()?);
    let dir = tempfile::tempdir()?;
    let store = AnnotationStore::open(dir.path(), forest.clone(), StoreConfig::default(), Arc::new(SystemClock))?;
    store.add_task("gif-0001", "https://media.example/gif-0001.gif", None)?;

    for w in 0..7 {
        let worker = format!("worker-{w}");
        store.register_worker(&worker)?;
        let task = store.next_task(&worker)?.expect("task has capacity");
        let judgment = if w < 4 { SentimentLabel::Positive } else { SentimentLabel::Negative };
        let mut sequence = vec![PairKey::new("lovely.a.01", "girl.n.01")];
        if w % 2 == 0 {
            sequence.push(PairKey::new("shout.v.01", "girl.n.01"));
        }
        let ack = store.submit(&Submission { worker_id: worker, gif_id: task.gif_id, sequence, judgment })?;
        println!("{} -> {:?} ({}/{})", ack.worker_id, ack.status, ack.completed, ack.required_workers);
    }

    let c = store.consolidate("gif-0001")?;
    println!("consolidated {:?} from {:?}", c.label, c.votes);
    drop(store);

    let reopened = AnnotationStore::open(dir.path(), forest, StoreConfig::default(), Arc::new(SystemClock))?;
    print!("{}", reopened.export(ExportFilter::default())?);
    Ok(())
}
