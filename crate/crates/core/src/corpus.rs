//! Line-delimited JSON corpus files and their loaders.
//!
//! Three record shapes, one JSON object per line:
//!
//! - examples: `{"id", "utterance", "program"}` with the program in its
//!   canonical rendering;
//! - trees: `{"id", "tokens": [...], "root": {...}}` where a node is
//!   `{"span": [i, j], "category": <string|null>, "children": [...]}`,
//!   spans half-open and 0-indexed, `"COMPOSED"` reserved for composed
//!   internal nodes and `null` for NULL nodes;
//! - augmented: example fields plus `{"provenance": {...}}`.
//!
//! Tokenization is whitespace on the utterance string, and tree token lists
//! must match it exactly; span indices are meaningless under any other
//! tokenizer. Loaders either yield records or a positioned error, and
//! write∘load / load∘write are identities on valid files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{AugmentedExample, Corpus, CorpusExample, Provenance};
use crate::domain::Domain;
use crate::program::Program;
use crate::tree::{validate_tree, NodeCategory, SpanNode, SpanTree};

/// One training or test pair as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub id: String,
    pub utterance: String,
    pub program: Program,
}

impl ExampleRecord {
    pub fn tokens(&self) -> Vec<String> {
        self.utterance.split_whitespace().map(str::to_string).collect()
    }
}

impl From<&CorpusExample> for ExampleRecord {
    fn from(example: &CorpusExample) -> ExampleRecord {
        ExampleRecord {
            id: example.id.clone(),
            utterance: example.tokens.join(" "),
            program: example.program.clone(),
        }
    }
}

/// One span-tree annotation as stored on disk, keyed to an example id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub root: RawNode,
}

/// The on-disk shape of a span-tree node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawNode {
    pub span: (usize, usize),
    #[serde(default)]
    pub category: Option<String>,
    #[serde(default)]
    pub children: Vec<RawNode>,
}

impl RawNode {
    fn from_span_node(node: &SpanNode) -> RawNode {
        RawNode {
            span: node.span,
            category: match &node.category {
                NodeCategory::Constant(name) => Some(name.clone()),
                NodeCategory::Null => None,
                NodeCategory::Composed => Some(COMPOSED.to_string()),
            },
            children: node.children.iter().map(RawNode::from_span_node).collect(),
        }
    }

    /// Decode to an in-memory node, binarizing unary wrappers. Structural
    /// problems (bad spans, >2 children) are left for tree validation,
    /// which reports them with positions.
    fn to_span_node(&self) -> Result<SpanNode, String> {
        if self.children.len() == 1 {
            let child = &self.children[0];
            if matches!(&self.category, Some(c) if c != COMPOSED)
                && self.category != child.category
            {
                return Err(format!(
                    "unary wrapper at span [{}, {}) carries category {:?}; cannot collapse",
                    self.span.0,
                    self.span.1,
                    self.category.as_deref().unwrap_or("null"),
                ));
            }
            log::warn!(
                "collapsing unary wrapper at span [{}, {})",
                self.span.0,
                self.span.1
            );
            return child.to_span_node();
        }
        Ok(SpanNode {
            span: self.span,
            category: match self.category.as_deref() {
                None => NodeCategory::Null,
                Some(COMPOSED) => NodeCategory::Composed,
                Some(name) => NodeCategory::Constant(name.to_string()),
            },
            children: self
                .children
                .iter()
                .map(RawNode::to_span_node)
                .collect::<Result<Vec<_>, _>>()?,
        })
    }
}

const COMPOSED: &str = "COMPOSED";

/// The on-disk shape of an augmented example.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedRecord {
    pub id: String,
    pub utterance: String,
    pub program: Program,
    pub provenance: ProvenanceRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub host_id: String,
    pub host_span: (usize, usize),
    pub donor_id: String,
    pub donor_span: (usize, usize),
    pub category: String,
    pub donor_program: Program,
}

impl From<&AugmentedExample> for AugmentedRecord {
    fn from(example: &AugmentedExample) -> AugmentedRecord {
        AugmentedRecord {
            id: example.id.clone(),
            utterance: example.utterance(),
            program: example.program.clone(),
            provenance: ProvenanceRecord {
                host_id: example.provenance.host_id.clone(),
                host_span: example.provenance.host_span,
                donor_id: example.provenance.donor_id.clone(),
                donor_span: example.provenance.donor_span,
                category: example.provenance.category.clone(),
                donor_program: example.provenance.donor_program.clone(),
            },
        }
    }
}

impl From<AugmentedRecord> for AugmentedExample {
    fn from(record: AugmentedRecord) -> AugmentedExample {
        AugmentedExample {
            id: record.id,
            tokens: record.utterance.split_whitespace().map(str::to_string).collect(),
            program: record.program,
            provenance: Provenance {
                host_id: record.provenance.host_id,
                host_span: record.provenance.host_span,
                donor_id: record.provenance.donor_id,
                donor_span: record.provenance.donor_span,
                category: record.provenance.category,
                donor_program: record.provenance.donor_program,
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusIoError {
    #[error("{path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    MalformedLine { path: String, line: usize, detail: String },
    #[error("{path}:{line}: duplicate id {id:?}")]
    DuplicateId { path: String, line: usize, id: String },
    #[error("{path}:{line}: tree id {id:?} has no matching example")]
    UnknownId { path: String, line: usize, id: String },
    #[error("{failed} of {total} examples failed validation; first: {first}")]
    Validation { failed: usize, total: usize, first: String },
}

fn read_file(path: &Path) -> Result<String, CorpusIoError> {
    fs::read_to_string(path)
        .map_err(|source| CorpusIoError::Io { path: path.display().to_string(), source })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CorpusIoError> {
    fs::write(path, contents)
        .map_err(|source| CorpusIoError::Io { path: path.display().to_string(), source })
}

/// Non-blank (line number, line) pairs, 1-based.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

/// Load an examples file: ordered records, duplicate ids rejected.
pub fn load_examples(path: impl AsRef<Path>) -> Result<Vec<ExampleRecord>, CorpusIoError> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut records: Vec<ExampleRecord> = Vec::new();
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    for (line_no, line) in lines(&text) {
        let record: ExampleRecord = serde_json::from_str(line).map_err(|e| {
            CorpusIoError::MalformedLine {
                path: path.display().to_string(),
                line: line_no,
                detail: e.to_string(),
            }
        })?;
        if record.utterance.split_whitespace().next().is_none() {
            return Err(CorpusIoError::MalformedLine {
                path: path.display().to_string(),
                line: line_no,
                detail: "empty utterance".to_string(),
            });
        }
        if ids.insert(record.id.clone(), line_no).is_some() {
            return Err(CorpusIoError::DuplicateId {
                path: path.display().to_string(),
                line: line_no,
                id: record.id,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn write_examples(
    records: &[ExampleRecord],
    path: impl AsRef<Path>,
) -> Result<(), CorpusIoError> {
    write_lines(records, path)
}

/// Convert a released tab-separated `utterance<TAB>program` file to example
/// records with synthesized ids. One-way: the TSV carries no ids or trees.
pub fn load_tsv(
    path: impl AsRef<Path>,
    id_prefix: &str,
) -> Result<Vec<ExampleRecord>, CorpusIoError> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut records = Vec::new();
    for (line_no, line) in lines(&text) {
        let (utterance, program) =
            line.split_once('\t').ok_or_else(|| CorpusIoError::MalformedLine {
                path: path.display().to_string(),
                line: line_no,
                detail: "expected utterance<TAB>program".to_string(),
            })?;
        let program = Program::parse(program).map_err(|e| CorpusIoError::MalformedLine {
            path: path.display().to_string(),
            line: line_no,
            detail: e.to_string(),
        })?;
        records.push(ExampleRecord {
            id: format!("{id_prefix}{:05}", records.len()),
            utterance: utterance.trim().to_string(),
            program,
        });
    }
    Ok(records)
}

/// Why one (example, tree) pair was rejected while loading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoadFailure {
    pub id: String,
    pub reason: String,
}

/// What happened while joining a tree file against its examples.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub loaded: usize,
    /// Pairs rejected by validation (lenient mode keeps going).
    pub failures: Vec<LoadFailure>,
    /// Example ids with no tree record.
    pub missing_trees: Vec<String>,
}

impl LoadReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty() && self.missing_trees.is_empty()
    }
}

/// Join a tree file against loaded examples and build a validated corpus.
///
/// Every tree id must resolve to an example. Pairs whose tree fails
/// validation (structure, tokenization, or evaluation mismatch) are
/// excluded and reported; under `strict` the first such report is an
/// error instead.
pub fn load_trees(
    path: impl AsRef<Path>,
    examples: &[ExampleRecord],
    domain: &Domain,
    strict: bool,
) -> Result<(Corpus, LoadReport), CorpusIoError> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let known: BTreeMap<&str, &ExampleRecord> =
        examples.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut trees: BTreeMap<String, TreeRecord> = BTreeMap::new();
    for (line_no, line) in lines(&text) {
        let record: TreeRecord = serde_json::from_str(line).map_err(|e| {
            CorpusIoError::MalformedLine {
                path: path.display().to_string(),
                line: line_no,
                detail: e.to_string(),
            }
        })?;
        if !known.contains_key(record.id.as_str()) {
            return Err(CorpusIoError::UnknownId {
                path: path.display().to_string(),
                line: line_no,
                id: record.id,
            });
        }
        if trees.contains_key(&record.id) {
            return Err(CorpusIoError::DuplicateId {
                path: path.display().to_string(),
                line: line_no,
                id: record.id,
            });
        }
        trees.insert(record.id.clone(), record);
    }

    let mut report = LoadReport::default();
    let mut members = Vec::new();
    for example in examples {
        let Some(record) = trees.get(&example.id) else {
            report.missing_trees.push(example.id.clone());
            continue;
        };
        let reason = match record.root.to_span_node() {
            Ok(_) if record.tokens != example.tokens() => {
                Some("utterance tokens differ from tree tokens".to_string())
            }
            Ok(root) => {
                let verdict =
                    validate_tree(&record.tokens, &root, &example.program, domain);
                if verdict.passed {
                    members.push(CorpusExample {
                        id: example.id.clone(),
                        tokens: record.tokens.clone(),
                        program: example.program.clone(),
                        tree: SpanTree::new(record.tokens.clone(), root)
                            .expect("structure already validated"),
                    });
                    None
                } else {
                    verdict.failure_summary()
                }
            }
            Err(detail) => Some(detail),
        };
        if let Some(reason) = reason {
            log::warn!("excluding {}: {reason}", example.id);
            report.failures.push(LoadFailure { id: example.id.clone(), reason });
        }
    }
    report.loaded = members.len();

    if strict && !report.is_clean() {
        let first = report
            .failures
            .first()
            .map(|f| format!("{}: {}", f.id, f.reason))
            .or_else(|| report.missing_trees.first().map(|id| format!("{id}: no tree record")))
            .unwrap_or_default();
        return Err(CorpusIoError::Validation {
            failed: report.failures.len() + report.missing_trees.len(),
            total: examples.len(),
            first,
        });
    }

    let corpus = Corpus::new(members, domain).expect("members are pre-validated");
    Ok((corpus, report))
}

/// Write every example's tree annotation, one record per line.
pub fn write_trees(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusIoError> {
    let records: Vec<TreeRecord> = corpus
        .examples()
        .iter()
        .map(|example| TreeRecord {
            id: example.id.clone(),
            tokens: example.tokens.clone(),
            root: RawNode::from_span_node(example.tree.root()),
        })
        .collect();
    write_lines(&records, path)
}

pub fn write_augmented(
    augmented: &[AugmentedExample],
    path: impl AsRef<Path>,
) -> Result<(), CorpusIoError> {
    let records: Vec<AugmentedRecord> =
        augmented.iter().map(AugmentedRecord::from).collect();
    write_lines(&records, path)
}

pub fn load_augmented(
    path: impl AsRef<Path>,
) -> Result<Vec<AugmentedExample>, CorpusIoError> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (line_no, line) in lines(&text) {
        let record: AugmentedRecord = serde_json::from_str(line).map_err(|e| {
            CorpusIoError::MalformedLine {
                path: path.display().to_string(),
                line: line_no,
                detail: e.to_string(),
            }
        })?;
        out.push(AugmentedExample::from(record));
    }
    Ok(out)
}

/// Write any serializable report as pretty-printed JSON plus a newline.
pub fn write_report<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<(), CorpusIoError> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    write_file(path.as_ref(), &text)
}

fn write_lines<T: Serialize>(records: &[T], path: impl AsRef<Path>) -> Result<(), CorpusIoError> {
    let mut text = String::new();
    for record in records {
        let line = serde_json::to_string(record).expect("records serialize");
        writeln!(text, "{line}").expect("writing to a string cannot fail");
    }
    write_file(path.as_ref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{augment, AugmentOptions};
    use crate::testutil::{geoquery, largest_city_tree, population_tree, toks};
    use crate::tree::NodeCategory;

    fn geo_examples() -> Vec<ExampleRecord> {
        vec![
            ExampleRecord {
                id: "e1".to_string(),
                utterance: "what is the population of the largest state".to_string(),
                program: Program::parse("answer ( population_1 ( largest ( state ( all ) ) ) )")
                    .unwrap(),
            },
            ExampleRecord {
                id: "e2".to_string(),
                utterance: "what is the largest city in the smallest state in the usa"
                    .to_string(),
                program: Program::parse(
                    "answer ( largest ( city ( loc_2 ( smallest ( state ( loc_2 ( countryid ( usa ) ) ) ) ) ) ) )",
                )
                .unwrap(),
            },
        ]
    }

    fn geo_corpus(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
        let domain = geoquery();
        let examples = geo_examples();
        let members = vec![
            CorpusExample {
                id: "e1".to_string(),
                tokens: toks("what is the population of the largest state"),
                program: examples[0].program.clone(),
                tree: population_tree(),
            },
            CorpusExample {
                id: "e2".to_string(),
                tokens: toks("what is the largest city in the smallest state in the usa"),
                program: examples[1].program.clone(),
                tree: largest_city_tree(),
            },
        ];
        let corpus = Corpus::new(members, &domain).unwrap();
        let examples_path = dir.join("examples.jsonl");
        let trees_path = dir.join("trees.jsonl");
        write_examples(&examples, &examples_path).unwrap();
        write_trees(&corpus, &trees_path).unwrap();
        (examples_path, trees_path)
    }

    #[test]
    fn example_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("examples.jsonl");
        let records = geo_examples();
        write_examples(&records, &path).unwrap();
        let loaded = load_examples(&path).unwrap();
        assert_eq!(loaded, records);
        write_examples(&loaded, dir.path().join("again.jsonl")).unwrap();
        assert_eq!(
            fs::read(&path).unwrap(),
            fs::read(dir.path().join("again.jsonl")).unwrap()
        );
    }

    #[test]
    fn load_examples_reports_positions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");

        fs::write(&path, "{\"id\": \"e1\", \"utterance\": \"a\", \"program\": \"f (\"}\n").unwrap();
        let err = load_examples(&path).unwrap_err();
        assert!(matches!(&err, CorpusIoError::MalformedLine { line: 1, .. }), "{err}");

        fs::write(
            &path,
            concat!(
                "{\"id\": \"e1\", \"utterance\": \"a\", \"program\": \"usa\"}\n",
                "\n",
                "{\"id\": \"e1\", \"utterance\": \"b\", \"program\": \"usa\"}\n",
            ),
        )
        .unwrap();
        let err = load_examples(&path).unwrap_err();
        assert!(
            matches!(&err, CorpusIoError::DuplicateId { line: 3, id, .. } if id == "e1"),
            "{err}"
        );

        fs::write(&path, "{\"id\": \"e1\", \"utterance\": \" \", \"program\": \"usa\"}\n")
            .unwrap();
        let err = load_examples(&path).unwrap_err();
        assert!(err.to_string().contains("empty utterance"), "{err}");

        fs::write(&path, "").unwrap();
        assert!(load_examples(&path).unwrap().is_empty());
    }

    #[test]
    fn tree_file_round_trip_builds_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let (examples_path, trees_path) = geo_corpus(dir.path());
        let examples = load_examples(&examples_path).unwrap();
        let (corpus, report) = load_trees(&trees_path, &examples, &geoquery(), true).unwrap();
        assert_eq!(corpus.len(), 2);
        assert!(report.is_clean());
        assert_eq!(report.loaded, 2);
        assert_eq!(corpus.examples()[0].tree, population_tree());

        write_trees(&corpus, dir.path().join("again.jsonl")).unwrap();
        assert_eq!(
            fs::read(&trees_path).unwrap(),
            fs::read(dir.path().join("again.jsonl")).unwrap()
        );
    }

    #[test]
    fn tree_loading_rejects_unknown_and_duplicate_ids() {
        let dir = tempfile::tempdir().unwrap();
        let (examples_path, trees_path) = geo_corpus(dir.path());
        let examples = load_examples(&examples_path).unwrap();
        let text = fs::read_to_string(&trees_path).unwrap();

        let stranger = text.replace("\"id\":\"e1\"", "\"id\":\"e9\"");
        fs::write(&trees_path, &stranger).unwrap();
        let err = load_trees(&trees_path, &examples, &geoquery(), false).unwrap_err();
        assert!(matches!(&err, CorpusIoError::UnknownId { id, .. } if id == "e9"), "{err}");

        let first_line = text.lines().next().unwrap();
        fs::write(&trees_path, format!("{first_line}\n{text}")).unwrap();
        let err = load_trees(&trees_path, &examples, &geoquery(), false).unwrap_err();
        assert!(matches!(&err, CorpusIoError::DuplicateId { id, .. } if id == "e1"), "{err}");
    }

    #[test]
    fn lenient_loading_excludes_and_reports() {
        let dir = tempfile::tempdir().unwrap();
        let (examples_path, trees_path) = geo_corpus(dir.path());
        let mut examples = load_examples(&examples_path).unwrap();
        // break e1: its program no longer matches the tree evaluation
        examples[0].program =
            Program::parse("answer ( population_1 ( smallest ( state ( all ) ) ) )").unwrap();

        let (corpus, report) =
            load_trees(&trees_path, &examples, &geoquery(), false).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.examples()[0].id, "e2");
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].id, "e1");
        assert!(report.failures[0].reason.contains("diverges"), "{}", report.failures[0].reason);

        let err = load_trees(&trees_path, &examples, &geoquery(), true).unwrap_err();
        assert!(matches!(&err, CorpusIoError::Validation { failed: 1, total: 2, .. }), "{err}");
    }

    #[test]
    fn tokenization_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let (examples_path, trees_path) = geo_corpus(dir.path());
        let mut examples = load_examples(&examples_path).unwrap();
        examples[0].utterance = examples[0].utterance.replace("state", "county");
        let (corpus, report) =
            load_trees(&trees_path, &examples, &geoquery(), false).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.failures[0].reason, "utterance tokens differ from tree tokens");
    }

    #[test]
    fn missing_trees_are_lenient_only() {
        let dir = tempfile::tempdir().unwrap();
        let (examples_path, trees_path) = geo_corpus(dir.path());
        let examples = load_examples(&examples_path).unwrap();
        let text = fs::read_to_string(&trees_path).unwrap();
        let only_first: String = text.lines().take(1).map(|l| format!("{l}\n")).collect();
        fs::write(&trees_path, only_first).unwrap();

        let (corpus, report) =
            load_trees(&trees_path, &examples, &geoquery(), false).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.missing_trees, ["e2"]);
        assert!(load_trees(&trees_path, &examples, &geoquery(), true).is_err());
    }

    #[test]
    fn unary_wrappers_collapse_on_decode() {
        let raw = RawNode {
            span: (0, 2),
            category: Some(COMPOSED.to_string()),
            children: vec![RawNode {
                span: (0, 2),
                category: Some(COMPOSED.to_string()),
                children: vec![
                    RawNode { span: (0, 1), category: Some("largest".to_string()), children: vec![] },
                    RawNode { span: (1, 2), category: Some("state#all".to_string()), children: vec![] },
                ],
            }],
        };
        let node = raw.to_span_node().unwrap();
        assert_eq!(node.children.len(), 2);
        assert_eq!(node.category, NodeCategory::Composed);

        let conflicted = RawNode {
            span: (0, 1),
            category: Some("largest".to_string()),
            children: vec![RawNode {
                span: (0, 1),
                category: Some("state".to_string()),
                children: vec![],
            }],
        };
        let err = conflicted.to_span_node().unwrap_err();
        assert!(err.contains("unary wrapper"), "{err}");
    }

    #[test]
    fn augmented_file_round_trip_is_byte_exact() {
        let dir = tempfile::tempdir().unwrap();
        let (examples_path, trees_path) = geo_corpus(dir.path());
        let examples = load_examples(&examples_path).unwrap();
        let domain = geoquery();
        let (corpus, _) = load_trees(&trees_path, &examples, &domain, true).unwrap();
        let outcome = augment(&corpus, &domain, &AugmentOptions::default());
        assert_eq!(outcome.examples.len(), 4);

        let path = dir.path().join("augmented.jsonl");
        write_augmented(&outcome.examples, &path).unwrap();
        let loaded = load_augmented(&path).unwrap();
        assert_eq!(loaded, outcome.examples);
        write_augmented(&loaded, dir.path().join("again.jsonl")).unwrap();
        assert_eq!(
            fs::read(&path).unwrap(),
            fs::read(dir.path().join("again.jsonl")).unwrap()
        );

        let text = fs::read_to_string(&path).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["host_id", "host_span", "donor_id", "donor_span", "category"] {
            assert!(first["provenance"].get(key).is_some(), "missing provenance key {key}");
        }
    }

    #[test]
    fn tsv_adapter_synthesizes_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.tsv");
        fs::write(&path, "jump right\ti_jump ( i_right )\nrun\ti_run\n").unwrap();
        let records = load_tsv(&path, "scan").unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].id, "scan00000");
        assert_eq!(records[1].id, "scan00001");
        assert_eq!(records[0].utterance, "jump right");
        assert_eq!(records[0].program.render(), "i_jump ( i_right )");

        fs::write(&path, "no tab here\n").unwrap();
        assert!(matches!(
            load_tsv(&path, "x").unwrap_err(),
            CorpusIoError::MalformedLine { line: 1, .. }
        ));
    }

    #[test]
    #[ignore = "regenerates the checked-in pair fixtures"]
    fn regenerate_pair_fixtures() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        let (examples_path, trees_path) = geo_corpus(&dir);
        fs::rename(&examples_path, dir.join("geo_pair_examples.jsonl")).unwrap();
        fs::rename(&trees_path, dir.join("geo_pair_trees.jsonl")).unwrap();
    }

    /// Six navigation commands with left-leaning trees: connectives attach
    /// to the finished left clause before taking the right clause.
    fn scan_demo_corpus() -> Corpus {
        use crate::testutil::{composed, scan};
        let leaf = SpanNode::leaf;
        let trees: Vec<(&str, &str, SpanNode)> = vec![
            (
                "s1",
                "jump right twice",
                composed(
                    composed(leaf(0, 1, "i_jump"), leaf(1, 2, "i_right")),
                    leaf(2, 3, "i_twice"),
                ),
            ),
            (
                "s2",
                "run left and walk",
                composed(
                    composed(
                        composed(leaf(0, 1, "i_run"), leaf(1, 2, "i_left")),
                        leaf(2, 3, "i_and"),
                    ),
                    leaf(3, 4, "i_walk"),
                ),
            ),
            (
                "s3",
                "look opposite right",
                composed(
                    leaf(0, 1, "i_look"),
                    composed(leaf(1, 2, "i_opposite"), leaf(2, 3, "i_right")),
                ),
            ),
            (
                "s4",
                "jump around left twice",
                composed(
                    composed(
                        leaf(0, 1, "i_jump"),
                        composed(leaf(1, 2, "i_around"), leaf(2, 3, "i_left")),
                    ),
                    leaf(3, 4, "i_twice"),
                ),
            ),
            (
                "s5",
                "walk right after run left",
                composed(
                    composed(
                        composed(leaf(0, 1, "i_walk"), leaf(1, 2, "i_right")),
                        leaf(2, 3, "i_after"),
                    ),
                    composed(leaf(3, 4, "i_run"), leaf(4, 5, "i_left")),
                ),
            ),
            ("s6", "run thrice", composed(leaf(0, 1, "i_run"), leaf(1, 2, "i_thrice"))),
        ];
        let domain = scan();
        let members = trees
            .into_iter()
            .map(|(id, utterance, root)| {
                let tokens = toks(utterance);
                let tree = SpanTree::new(tokens.clone(), root).unwrap();
                let program = crate::tree::program_of_tree(&tree, &domain).unwrap();
                CorpusExample { id: id.to_string(), tokens, program, tree }
            })
            .collect();
        Corpus::new(members, &domain).unwrap()
    }

    #[test]
    fn scan_demo_corpus_is_valid_and_augments() {
        let corpus = scan_demo_corpus();
        assert_eq!(corpus.len(), 6);
        assert_eq!(
            corpus.examples()[4].program.render(),
            "i_after ( i_walk ( i_right ) , i_run ( i_left ) )"
        );
        // This domain only labels direction subtrees, so the output is the
        // left/right swap closure and nothing else.
        let outcome = augment(&corpus, &crate::testutil::scan(), &AugmentOptions::default());
        let got: Vec<(String, String)> = outcome
            .examples
            .iter()
            .map(|e| (e.utterance(), e.program.render()))
            .collect();
        let want = [
            ("jump left twice", "i_twice ( i_jump ( i_left ) )"),
            ("run right and walk", "i_and ( i_run ( i_right ) , i_walk )"),
            ("look opposite left", "i_look ( i_opposite ( i_left ) )"),
            ("jump around right twice", "i_twice ( i_jump ( i_around ( i_right ) ) )"),
            ("walk left after run left", "i_after ( i_walk ( i_left ) , i_run ( i_left ) )"),
            ("walk right after run right", "i_after ( i_walk ( i_right ) , i_run ( i_right ) )"),
        ];
        let want: Vec<(String, String)> =
            want.iter().map(|(u, p)| (u.to_string(), p.to_string())).collect();
        assert_eq!(got, want);
    }

    #[test]
    #[ignore = "regenerates the checked-in navigation demo fixtures"]
    fn regenerate_scan_demo_fixtures() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        let corpus = scan_demo_corpus();
        let records: Vec<ExampleRecord> =
            corpus.examples().iter().map(ExampleRecord::from).collect();
        write_examples(&records, dir.join("scan_demo_examples.jsonl")).unwrap();
        write_trees(&corpus, dir.join("scan_demo_trees.jsonl")).unwrap();
    }

    #[test]
    fn report_writer_emits_pretty_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = LoadReport { loaded: 3, ..LoadReport::default() };
        write_report(&report, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["loaded"], 3);
    }
}
