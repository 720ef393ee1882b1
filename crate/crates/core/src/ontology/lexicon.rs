//! Lexicon files: JSON Lines, one synset per line.

use super::{OntologyError, Synset, SynsetForest};
use std::io::{BufRead, Write};
use std::path::Path;

const FIXTURE: &str = include_str!("../../data/lexicon.jsonl");

/// Parses lexicon records. Whitespace-only lines are skipped; anything else
/// that is not a valid record is an error carrying its 1-based line number.
pub fn parse_lexicon<R: BufRead>(reader: R) -> Result<Vec<Synset>, OntologyError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| OntologyError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Synset = serde_json::from_str(&line)
            .map_err(|e| OntologyError::LexiconParse { line: i + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_lexicon_file(path: impl AsRef<Path>) -> Result<Vec<Synset>, OntologyError> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| OntologyError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_lexicon(std::io::BufReader::new(file))
}

/// Writes the forest back out in lexicon format, canonical order.
pub fn write_lexicon<W: Write>(forest: &SynsetForest, mut w: W) -> std::io::Result<()> {
    for s in forest.synsets() {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// The bundled ~60-synset lexicon, with some scores left for propagation.
pub fn fixture_lexicon() -> Vec<Synset> {
    parse_lexicon(FIXTURE.as_bytes()).expect("bundled lexicon parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::Pos;

    #[test]
    fn bundled_fixture_builds() {
        let forest = SynsetForest::build(fixture_lexicon()).unwrap();
        assert!(forest.len() >= 50);
        assert!(!forest.fully_scored());
        let forest = forest.propagate_scores().unwrap();
        assert!(forest.fully_scored());
        assert_eq!(forest.root(Pos::Noun).lemma, "entity");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "{\"id\":\"a\",\"lemma\":\"a\",\"sense\":1,\"pos\":\"adjective\",\"gloss\":\"\",\"score\":null,\"parent\":null}\n\n# comment\n";
        match parse_lexicon(text.as_bytes()) {
            Err(OntologyError::LexiconParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let bad_pos = "{\"id\":\"a\",\"lemma\":\"a\",\"sense\":1,\"pos\":\"adverb\",\"score\":null,\"parent\":null}";
        assert!(matches!(parse_lexicon(bad_pos.as_bytes()), Err(OntologyError::LexiconParse { line: 1, .. })));
    }

    #[test]
    fn write_then_parse_rebuilds_same_forest() {
        let forest = SynsetForest::build(fixture_lexicon()).unwrap();
        let mut buf = Vec::new();
        write_lexicon(&forest, &mut buf).unwrap();
        let again = SynsetForest::build(parse_lexicon(buf.as_slice()).unwrap()).unwrap();
        assert_eq!(forest, again);
    }
}
