//! Triple ingestion, vocabulary construction, and split indexing.
//!
//! Triple files are tab-separated with one fact per line. The default column
//! order is `head<TAB>relation<TAB>tail`, matching the common WN18/FB15k
//! distribution format. The vocabulary covers the union of all splits, so an
//! entity that only occurs in valid/test still receives an index (it simply
//! never trains).

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A fact as read from disk, before indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl RawTriple {
    pub fn new(head: impl Into<String>, relation: impl Into<String>, tail: impl Into<String>) -> Self {
        RawTriple { head: head.into(), relation: relation.into(), tail: tail.into() }
    }
}

/// An integer-indexed fact. Indices are dense and resolve in the owning
/// [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

impl Triple {
    pub fn new(head: usize, relation: usize, tail: usize) -> Self {
        Triple { head, relation, tail }
    }
}

/// Column order of a triple file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TripleFormat {
    /// `head<TAB>relation<TAB>tail` (WN18/FB15k style).
    #[default]
    HeadRelTail,
    /// `head<TAB>tail<TAB>relation`.
    HeadTailRel,
}

/// Bijective label <-> index maps for entities and relations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    entity_to_id: HashMap<String, usize>,
    id_to_entity: Vec<String>,
    relation_to_id: HashMap<String, usize>,
    id_to_relation: Vec<String>,
}

impl Vocabulary {
    pub fn num_entities(&self) -> usize {
        self.id_to_entity.len()
    }

    pub fn num_relations(&self) -> usize {
        self.id_to_relation.len()
    }

    pub fn entity_id(&self, label: &str) -> Option<usize> {
        self.entity_to_id.get(label).copied()
    }

    pub fn relation_id(&self, label: &str) -> Option<usize> {
        self.relation_to_id.get(label).copied()
    }

    pub fn entity_label(&self, id: usize) -> &str {
        &self.id_to_entity[id]
    }

    pub fn relation_label(&self, id: usize) -> &str {
        &self.id_to_relation[id]
    }

    pub fn entity_labels(&self) -> &[String] {
        &self.id_to_entity
    }

    pub fn relation_labels(&self) -> &[String] {
        &self.id_to_relation
    }

    fn intern_entity(&mut self, label: &str) -> usize {
        if let Some(&id) = self.entity_to_id.get(label) {
            return id;
        }
        let id = self.id_to_entity.len();
        self.entity_to_id.insert(label.to_owned(), id);
        self.id_to_entity.push(label.to_owned());
        id
    }

    fn intern_relation(&mut self, label: &str) -> usize {
        if let Some(&id) = self.relation_to_id.get(label) {
            return id;
        }
        let id = self.id_to_relation.len();
        self.relation_to_id.insert(label.to_owned(), id);
        self.id_to_relation.push(label.to_owned());
        id
    }

    /// Rebuild the reverse maps from dense label arrays (checkpoint loading).
    pub(crate) fn from_labels(entities: Vec<String>, relations: Vec<String>) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for (i, label) in entities.iter().enumerate() {
            if vocab.entity_to_id.insert(label.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate entity label {label:?}")));
            }
        }
        for (i, label) in relations.iter().enumerate() {
            if vocab.relation_to_id.insert(label.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate relation label {label:?}")));
            }
        }
        vocab.id_to_entity = entities;
        vocab.id_to_relation = relations;
        Ok(vocab)
    }
}

/// Indexed splits plus the all-true filter set used by filtered evaluation.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub vocab: Vocabulary,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
    all_true: HashSet<Triple>,
}

impl Dataset {
    /// True iff `t` occurs in any split.
    pub fn is_true(&self, t: Triple) -> bool {
        self.all_true.contains(&t)
    }

    pub fn num_true(&self) -> usize {
        self.all_true.len()
    }

    pub fn num_entities(&self) -> usize {
        self.vocab.num_entities()
    }

    pub fn num_relations(&self) -> usize {
        self.vocab.num_relations()
    }

    /// Resolve an indexed triple back to labels.
    pub fn labels_of(&self, t: Triple) -> RawTriple {
        RawTriple::new(
            self.vocab.entity_label(t.head),
            self.vocab.relation_label(t.relation),
            self.vocab.entity_label(t.tail),
        )
    }

    /// Re-express every split in another vocabulary's index space, e.g. the
    /// vocabulary stored in a checkpoint. Fails if sizes differ or a label
    /// does not resolve.
    pub fn reindexed(&self, vocab: &Vocabulary) -> Result<Dataset> {
        if vocab.num_entities() != self.num_entities() || vocab.num_relations() != self.num_relations() {
            return Err(Error::Data(format!(
                "vocabulary mismatch: checkpoint has {} entities / {} relations, dataset has {} / {}",
                vocab.num_entities(),
                vocab.num_relations(),
                self.num_entities(),
                self.num_relations()
            )));
        }
        let map_split = |split: &[Triple]| -> Result<Vec<Triple>> {
            split
                .iter()
                .map(|t| {
                    let raw = self.labels_of(*t);
                    let head = vocab
                        .entity_id(&raw.head)
                        .ok_or_else(|| Error::Data(format!("entity {:?} not in vocabulary", raw.head)))?;
                    let relation = vocab
                        .relation_id(&raw.relation)
                        .ok_or_else(|| Error::Data(format!("relation {:?} not in vocabulary", raw.relation)))?;
                    let tail = vocab
                        .entity_id(&raw.tail)
                        .ok_or_else(|| Error::Data(format!("entity {:?} not in vocabulary", raw.tail)))?;
                    Ok(Triple::new(head, relation, tail))
                })
                .collect()
        };
        let train = map_split(&self.train)?;
        let valid = map_split(&self.valid)?;
        let test = map_split(&self.test)?;
        let all_true = train.iter().chain(&valid).chain(&test).copied().collect();
        Ok(Dataset { vocab: vocab.clone(), train, valid, test, all_true })
    }
}

/// Parse one triple file. Empty lines are skipped; anything else must have
/// exactly three non-empty tab-separated columns.
pub fn load_triples(path: &Path, format: TripleFormat) -> Result<Vec<RawTriple>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: lineno,
                msg: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols.iter().any(|c| c.is_empty()) {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: lineno,
                msg: "empty column".to_owned(),
            });
        }
        let (h, r, t) = match format {
            TripleFormat::HeadRelTail => (cols[0], cols[1], cols[2]),
            TripleFormat::HeadTailRel => (cols[0], cols[2], cols[1]),
        };
        out.push(RawTriple::new(h, r, t));
    }
    Ok(out)
}

/// Index all splits against a shared vocabulary and build the filter set.
///
/// Duplicate triples within one split are dropped (first occurrence kept).
/// Cross-split duplicates are allowed; the filter set is the union.
pub fn build_dataset(train: &[RawTriple], valid: &[RawTriple], test: &[RawTriple]) -> Dataset {
    let mut vocab = Vocabulary::default();
    let index_split = |raw: &[RawTriple], vocab: &mut Vocabulary| -> Vec<Triple> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(raw.len());
        for rt in raw {
            let t = Triple::new(
                vocab.intern_entity(&rt.head),
                vocab.intern_relation(&rt.relation),
                vocab.intern_entity(&rt.tail),
            );
            if seen.insert(t) {
                out.push(t);
            }
        }
        out
    };
    let train = index_split(train, &mut vocab);
    let valid = index_split(valid, &mut vocab);
    let test = index_split(test, &mut vocab);
    let mut all_true = HashSet::with_capacity(train.len() + valid.len() + test.len());
    for t in train.iter().chain(&valid).chain(&test) {
        all_true.insert(*t);
    }
    Dataset { vocab, train, valid, test, all_true }
}

/// Load the three split files and build a [`Dataset`]. Valid/test paths may
/// be `None` for train-only corpora.
pub fn load_dataset(
    train: &Path,
    valid: Option<&Path>,
    test: Option<&Path>,
    format: TripleFormat,
) -> Result<Dataset> {
    let train = load_triples(train, format)?;
    let valid = match valid {
        Some(p) => load_triples(p, format)?,
        None => Vec::new(),
    };
    let test = match test {
        Some(p) => load_triples(p, format)?,
        None => Vec::new(),
    };
    if train.is_empty() {
        return Err(Error::Data("training split is empty".to_owned()));
    }
    Ok(build_dataset(&train, &valid, &test))
}

/// Write indexed triples back out as a head/relation/tail TSV.
pub fn write_triples(path: &Path, triples: &[Triple], vocab: &Vocabulary) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in triples {
        writeln!(
            w,
            "{}\t{}\t{}",
            vocab.entity_label(t.head),
            vocab.relation_label(t.relation),
            vocab.entity_label(t.tail)
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Persist one label array as a two-column `label<TAB>index` TSV.
pub fn write_vocab_tsv(path: &Path, labels: &[String]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (i, label) in labels.iter().enumerate() {
        writeln!(w, "{label}\t{i}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a two-column `label<TAB>index` TSV; indices must be dense from 0.
pub fn read_vocab_tsv(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse = Error::Parse {
            path: path.to_owned(),
            line: lineno,
            msg: "expected `label<TAB>index`".to_owned(),
        };
        let Some((label, id)) = line.rsplit_once('\t') else {
            return Err(parse);
        };
        let Ok(id) = id.trim().parse::<usize>() else {
            return Err(parse);
        };
        if id != labels.len() {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: lineno,
                msg: format!("index {id} out of order (expected {})", labels.len()),
            });
        }
        labels.push(label.to_owned());
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(h: &str, r: &str, t: &str) -> RawTriple {
        RawTriple::new(h, r, t)
    }

    #[test]
    fn parses_tab_separated_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\t_r\tb").unwrap();
        let triples = load_triples(f.path(), TripleFormat::HeadRelTail).unwrap();
        assert_eq!(triples, vec![raw("a", "_r", "b")]);
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let f = tempfile::NamedTempFile::new().unwrap();
        let triples = load_triples(f.path(), TripleFormat::HeadRelTail).unwrap();
        assert!(triples.is_empty());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\t_r\tb").unwrap();
        writeln!(f, "a\tb").unwrap();
        let err = load_triples(f.path(), TripleFormat::HeadRelTail).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn alternate_column_order() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a\tb\t_r").unwrap();
        let triples = load_triples(f.path(), TripleFormat::HeadTailRel).unwrap();
        assert_eq!(triples, vec![raw("a", "_r", "b")]);
    }

    #[test]
    fn vocab_spans_all_splits() {
        let ds = build_dataset(&[raw("a", "r", "b")], &[], &[raw("b", "r", "a")]);
        assert_eq!(ds.num_entities(), 2);
        assert_eq!(ds.num_relations(), 1);
        assert_eq!(ds.num_true(), 2);
    }

    #[test]
    fn within_split_duplicates_removed() {
        let ds = build_dataset(&[raw("a", "r", "b"), raw("a", "r", "b")], &[], &[]);
        assert_eq!(ds.train.len(), 1);
    }

    #[test]
    fn test_only_entity_gets_an_index() {
        let ds = build_dataset(&[raw("a", "r", "b")], &[], &[raw("c", "r", "a")]);
        assert_eq!(ds.num_entities(), 3);
        assert!(ds.vocab.entity_id("c").is_some());
    }

    #[test]
    fn is_true_spans_all_splits() {
        let ds = build_dataset(&[raw("a", "r", "b")], &[raw("b", "r", "c")], &[raw("c", "r", "a")]);
        let test_triple = ds.test[0];
        assert!(ds.is_true(ds.train[0]));
        assert!(ds.is_true(test_triple));
        // a corrupted triple absent from every split
        let fake = Triple::new(test_triple.head, test_triple.relation, test_triple.head);
        assert!(!ds.is_true(fake));
    }

    #[test]
    fn indexing_round_trips_labels() {
        let raws = vec![raw("a", "r", "b"), raw("b", "s", "c")];
        let ds = build_dataset(&raws, &[], &[]);
        for (rt, t) in raws.iter().zip(&ds.train) {
            assert_eq!(&ds.labels_of(*t), rt);
        }
    }

    #[test]
    fn vocab_indices_are_dense_bijections() {
        let ds = build_dataset(&[raw("a", "r", "b"), raw("c", "s", "a")], &[], &[]);
        for id in 0..ds.num_entities() {
            assert_eq!(ds.vocab.entity_id(ds.vocab.entity_label(id)), Some(id));
        }
        for id in 0..ds.num_relations() {
            assert_eq!(ds.vocab.relation_id(ds.vocab.relation_label(id)), Some(id));
        }
    }

    #[test]
    fn filter_set_bounded_by_split_sizes() {
        let ds = build_dataset(
            &[raw("a", "r", "b"), raw("b", "r", "c")],
            &[raw("a", "r", "b")],
            &[raw("c", "r", "a")],
        );
        assert!(ds.num_true() <= ds.train.len() + ds.valid.len() + ds.test.len());
        assert_eq!(ds.num_true(), 3); // valid duplicates a train triple
    }

    #[test]
    fn vocab_tsv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("entities.tsv");
        let labels = vec!["a".to_owned(), "b".to_owned(), "with space".to_owned()];
        write_vocab_tsv(&path, &labels).unwrap();
        assert_eq!(read_vocab_tsv(&path).unwrap(), labels);
    }

    #[test]
    fn triples_tsv_round_trip() {
        let ds = build_dataset(&[raw("a", "r", "b"), raw("b", "s", "c")], &[], &[]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.txt");
        write_triples(&path, &ds.train, &ds.vocab).unwrap();
        let reloaded = load_triples(&path, TripleFormat::HeadRelTail).unwrap();
        let ds2 = build_dataset(&reloaded, &[], &[]);
        assert_eq!(ds.train, ds2.train);
    }
}
