//! Corpus augmentation for semantic parsing by subtree substitution.
//!
//! Semantic-parsing training data pairs a natural-language utterance with a
//! formal program. Each training pair comes annotated with a span tree: a
//! binary tree over the utterance tokens whose bottom-up evaluation by typed
//! function application yields the program. Two subtrees from different
//! examples are exchangeable when their subprograms have the same semantic
//! category; swapping them splices both the token span and the subprogram,
//! producing a new, well-formed (utterance, program) pair.
//!
//! The crate is organized along that pipeline:
//!
//! - [`program`]: the parenthesized functional language (parse, render,
//!   paths, subprogram replacement).
//! - [`domain`]: typed constant inventories, function application, and the
//!   semantic-category function.
//! - [`tree`]: span trees, bottom-up evaluation, validation, exchangeable
//!   subtree enumeration, and splicing.
//! - [`augment`]: the category index and the deterministic augmentation
//!   pipeline with deduplication and sampling.
//! - [`corpus`]: line-delimited JSON corpus formats and loaders.
//! - [`stats`]: complexity metrics and test-set recovery.

pub mod augment;
pub mod corpus;
pub mod domain;
pub mod program;
pub mod stats;
pub mod tree;

#[cfg(test)]
pub(crate) mod testutil;

pub use augment::{
    augment, build_index, dedup, AugmentOptions, AugmentOutcome, AugmentSummary,
    AugmentedExample, CategoryIndex, Corpus, CorpusError, CorpusExample, DedupMode, Provenance,
};
pub use corpus::{
    load_augmented, load_examples, load_trees, load_tsv, write_augmented, write_examples,
    write_report, write_trees, AugmentedRecord, CorpusIoError, ExampleRecord, LoadFailure,
    LoadReport, ProvenanceRecord, RawNode, TreeRecord,
};
pub use domain::{
    load_domain, parse_domain, Application, ApplyError, ConstantDef, ConstantKind, Domain,
    DomainError, FuncMode, OpenSlot, SemanticCategory, TypeError, TypeInfo,
};
pub use program::{ParseError, PathError, Program, ProgramPath};
pub use stats::{complexity_stats, render_table, test_recovery, Recovery, StatsReport};
pub use tree::{
    enumerate_exchangeable_subtrees, evaluate, program_of_tree, splice_tree, splice_utterance,
    validate_structure, validate_tree, Divergence, EvalError, EvaluatedNode, Evaluation,
    NodeCategory, SpanNode, SpanTree, SpliceError, StructuralViolation, SubtreeRef, TreeError,
    TreePath, ValidationReport,
};
