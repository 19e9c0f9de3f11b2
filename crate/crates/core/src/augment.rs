//! The augmentation engine: index exchangeable subtrees by category, splice
//! every cross-example pair, deduplicate, and emit deterministically.
//!
//! For two examples (x¹, z¹) and (x², z²) with subtrees over spans
//! [i1, j1) and [i2, j2) whose subprograms share a semantic category, the
//! substitution produces
//!
//! ```text
//! x′ = x¹[..i1] + x²[i2..j2] + x¹[j1..]
//! z′ = z¹ with the subprogram at the target's position replaced by z²'s
//! ```
//!
//! Every emitted example is cross-checked: the program evaluated from the
//! spliced tree must equal direct program surgery, and the spliced token
//! list must equal the substitution formula. Pairs failing any check are
//! counted and skipped, never fatal.
//!
//! Many donors are interchangeable (same subprogram and same token
//! segment), so the engine splices one representative per distinct donor
//! value and host, and accounts for the rest arithmetically. This changes
//! nothing observable: duplicates would be removed by dedup, and the
//! representative is the pair that provenance-ordered brute force would
//! have kept.

use std::collections::{BTreeMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Domain;
use crate::program::Program;
use crate::tree::{
    enumerate_exchangeable_subtrees, program_of_tree, splice_tree, splice_utterance,
    validate_tree, SpanTree, SubtreeRef,
};

/// One training example with its annotated span tree.
#[derive(Clone, Debug)]
pub struct CorpusExample {
    pub id: String,
    pub tokens: Vec<String>,
    pub program: Program,
    pub tree: SpanTree,
}

/// An ordered, validated training set.
#[derive(Clone, Debug)]
pub struct Corpus {
    examples: Vec<CorpusExample>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("duplicate example id {id:?}")]
    DuplicateId { id: String },
    #[error("example {id:?}: utterance tokens differ from the tree's tokens")]
    TokenMismatch { id: String },
    #[error("example {id:?}: {detail}")]
    Invalid { id: String, detail: String },
}

impl Corpus {
    /// Build a corpus, checking id uniqueness and that every tree evaluates
    /// to its example's program.
    pub fn new(examples: Vec<CorpusExample>, domain: &Domain) -> Result<Corpus, CorpusError> {
        let mut ids = HashSet::new();
        for example in &examples {
            if !ids.insert(example.id.clone()) {
                return Err(CorpusError::DuplicateId { id: example.id.clone() });
            }
            if example.tokens != example.tree.tokens() {
                return Err(CorpusError::TokenMismatch { id: example.id.clone() });
            }
            let report =
                validate_tree(&example.tokens, example.tree.root(), &example.program, domain);
            if !report.passed {
                return Err(CorpusError::Invalid {
                    id: example.id.clone(),
                    detail: report.failure_summary().unwrap_or_else(|| "unknown".to_string()),
                });
            }
        }
        Ok(Corpus { examples })
    }

    pub fn examples(&self) -> &[CorpusExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Exchangeable subtrees of a corpus, keyed by semantic category.
#[derive(Clone, Debug, Default)]
pub struct CategoryIndex {
    buckets: BTreeMap<String, Vec<SubtreeRef>>,
}

impl CategoryIndex {
    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.buckets.keys().map(String::as_str)
    }

    pub fn bucket(&self, category: &str) -> &[SubtreeRef] {
        self.buckets.get(category).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }
}

/// Index every exchangeable subtree of every example. Buckets are ordered
/// by (example id, span); enumeration runs per example in parallel.
pub fn build_index(corpus: &Corpus, domain: &Domain) -> CategoryIndex {
    use rayon::prelude::*;
    let per_example: Vec<Vec<SubtreeRef>> = corpus
        .examples()
        .par_iter()
        .map(|example| {
            enumerate_exchangeable_subtrees(&example.id, &example.tree, domain)
                .expect("corpus examples are validated at construction")
        })
        .collect();
    let mut buckets: BTreeMap<String, Vec<SubtreeRef>> = BTreeMap::new();
    for refs in per_example {
        for r in refs {
            buckets.entry(r.category.clone()).or_default().push(r);
        }
    }
    for bucket in buckets.values_mut() {
        bucket.sort_by(|a, b| (&a.tree_id, a.span).cmp(&(&b.tree_id, b.span)));
    }
    CategoryIndex { buckets }
}

/// What to deduplicate augmented output against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupMode {
    /// Remove pairs equal to a training pair or to an earlier output.
    #[default]
    TrainAndSelf,
    /// Remove only pairs equal to an earlier output.
    SelfOnly,
    /// Keep every spliced pair.
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentOptions {
    /// How many times to feed augmented examples back in as hosts/donors.
    pub rounds: usize,
    /// Keep at most this many outputs, sampled uniformly with `seed`.
    pub max_output: Option<usize>,
    pub seed: u64,
    pub dedup_mode: DedupMode,
    /// Also exchange subtrees within a single example.
    pub allow_same_example: bool,
}

impl Default for AugmentOptions {
    fn default() -> AugmentOptions {
        AugmentOptions {
            rounds: 1,
            max_output: None,
            seed: 0,
            dedup_mode: DedupMode::TrainAndSelf,
            allow_same_example: false,
        }
    }
}

/// Where an augmented example came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    pub host_id: String,
    pub host_span: (usize, usize),
    pub donor_id: String,
    pub donor_span: (usize, usize),
    pub category: String,
    /// The inserted subprogram; kept so segment statistics can be computed
    /// from augmented files alone.
    pub donor_program: Program,
}

/// One augmented (x′, z′) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedExample {
    pub id: String,
    pub tokens: Vec<String>,
    pub program: Program,
    pub provenance: Provenance,
}

impl AugmentedExample {
    pub fn utterance(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Counters describing one augment run; duplicate counts are reported per
/// rule so output sizes can be reconciled under other dedup conventions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AugmentSummary {
    pub n_train: usize,
    pub categories: usize,
    pub pairs_total: u64,
    pub splice_failures: u64,
    pub train_duplicates: u64,
    pub self_duplicates: u64,
    pub emitted: usize,
    pub sampled: Option<usize>,
    pub rounds: usize,
}

#[derive(Clone, Debug)]
pub struct AugmentOutcome {
    pub examples: Vec<AugmentedExample>,
    pub summary: AugmentSummary,
}

struct Member {
    id: String,
    tokens: Vec<String>,
    program: Program,
    tree: SpanTree,
    refs: Vec<SubtreeRef>,
}

struct Candidate {
    host_idx: usize,
    target: SubtreeRef,
    donor_idx: usize,
    donor: SubtreeRef,
    /// Number of interchangeable pairs this candidate stands for.
    stands_for: u64,
}

impl Candidate {
    fn provenance_key(&self) -> (&str, (usize, usize), &str, (usize, usize)) {
        (&self.target.tree_id, self.target.span, &self.donor.tree_id, self.donor.span)
    }
}

/// Run the full augmentation pipeline over a validated corpus.
pub fn augment(corpus: &Corpus, domain: &Domain, options: &AugmentOptions) -> AugmentOutcome {
    use rayon::prelude::*;

    assert!(options.rounds >= 1, "rounds must be at least 1");

    let mut members: Vec<Member> = corpus
        .examples()
        .iter()
        .map(|example| Member {
            id: example.id.clone(),
            tokens: example.tokens.clone(),
            program: example.program.clone(),
            tree: example.tree.clone(),
            refs: enumerate_exchangeable_subtrees(&example.id, &example.tree, domain)
                .expect("corpus examples are validated at construction"),
        })
        .collect();

    let train_keys: HashSet<(String, String)> = corpus
        .examples()
        .iter()
        .map(|e| (e.tokens.join(" "), e.program.render()))
        .collect();

    let mut summary = AugmentSummary {
        n_train: corpus.len(),
        rounds: options.rounds,
        ..AugmentSummary::default()
    };
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut kept: Vec<(AugmentedExample, SpanTree)> = Vec::new();
    let mut kept_converted = 0;
    let mut new_from = 0;

    for _round in 0..options.rounds {
        let round_end = members.len();
        let mut candidates = collect_candidates(&members, new_from, options);
        candidates.sort_by(|a, b| a.provenance_key().cmp(&b.provenance_key()));
        summary.pairs_total += candidates.iter().map(|c| c.stands_for).sum::<u64>();

        let spliced: Vec<Result<(AugmentedExample, SpanTree), String>> = candidates
            .par_iter()
            .map(|candidate| splice_pair(&members, candidate, domain))
            .collect();

        for (candidate, result) in candidates.iter().zip(spliced) {
            let (example, tree) = match result {
                Ok(pair) => pair,
                Err(why) => {
                    log::warn!(
                        "skipping exchange {} [{}, {}) <- {} [{}, {}): {why}",
                        candidate.target.tree_id,
                        candidate.target.span.0,
                        candidate.target.span.1,
                        candidate.donor.tree_id,
                        candidate.donor.span.0,
                        candidate.donor.span.1,
                    );
                    summary.splice_failures += candidate.stands_for;
                    continue;
                }
            };
            let key = (example.utterance(), example.program.render());
            match options.dedup_mode {
                DedupMode::None => kept.push((example, tree)),
                DedupMode::TrainAndSelf if train_keys.contains(&key) => {
                    summary.train_duplicates += candidate.stands_for;
                }
                DedupMode::TrainAndSelf | DedupMode::SelfOnly => {
                    if seen.contains(&key) {
                        summary.self_duplicates += candidate.stands_for;
                    } else {
                        seen.insert(key);
                        // interchangeable donors would all have collided here
                        summary.self_duplicates += candidate.stands_for - 1;
                        kept.push((example, tree));
                    }
                }
            }
        }

        if _round + 1 < options.rounds {
            for (example, tree) in &kept[kept_converted..] {
                let refs = match enumerate_exchangeable_subtrees(&example.id, tree, domain) {
                    Ok(refs) => refs,
                    Err(e) => {
                        log::warn!("not reusing {}: {e}", example.id);
                        Vec::new()
                    }
                };
                members.push(Member {
                    id: example.id.clone(),
                    tokens: example.tokens.clone(),
                    program: example.program.clone(),
                    tree: tree.clone(),
                    refs,
                });
            }
            kept_converted = kept.len();
            new_from = round_end;
        }
    }

    summary.categories = {
        let mut categories: HashSet<&str> = HashSet::new();
        for member in &members[..corpus.len()] {
            categories.extend(member.refs.iter().map(|r| r.category.as_str()));
        }
        categories.len()
    };
    summary.emitted = kept.len();

    let mut examples: Vec<AugmentedExample> = kept.into_iter().map(|(e, _)| e).collect();
    examples.sort_by(|a, b| a.provenance.cmp(&b.provenance));

    if let Some(max_output) = options.max_output {
        if max_output < examples.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            let mut indices =
                rand::seq::index::sample(&mut rng, examples.len(), max_output).into_vec();
            indices.sort_unstable();
            examples = indices.into_iter().map(|i| examples[i].clone()).collect();
        }
        summary.sampled = Some(examples.len());
    }

    AugmentOutcome { examples, summary }
}

/// All pairs to splice this round, collapsed to one representative per
/// (host subtree, distinct donor value). With dedup disabled every pair is
/// its own candidate.
fn collect_candidates(
    members: &[Member],
    new_from: usize,
    options: &AugmentOptions,
) -> Vec<Candidate> {
    let mut buckets: BTreeMap<&str, Vec<(usize, &SubtreeRef)>> = BTreeMap::new();
    for (idx, member) in members.iter().enumerate() {
        for r in &member.refs {
            buckets.entry(r.category.as_str()).or_default().push((idx, r));
        }
    }
    let collapse = options.dedup_mode != DedupMode::None;
    let mut candidates: Vec<Candidate> = Vec::new();
    for bucket in buckets.values_mut() {
        bucket.sort_by(|(_, a), (_, b)| (&a.tree_id, a.span).cmp(&(&b.tree_id, b.span)));
        // donor value: what the exchange actually copies out of the donor
        let values: Vec<(String, String)> = if collapse {
            bucket
                .iter()
                .map(|(idx, r)| {
                    (r.program.render(), members[*idx].tokens[r.span.0..r.span.1].join(" "))
                })
                .collect()
        } else {
            Vec::new()
        };
        for &(host_idx, target) in bucket.iter() {
            let mut by_value: BTreeMap<&(String, String), usize> = BTreeMap::new();
            for (donor_pos, &(donor_idx, donor)) in bucket.iter().enumerate() {
                if !options.allow_same_example && donor.tree_id == target.tree_id {
                    continue;
                }
                if host_idx < new_from && donor_idx < new_from {
                    continue;
                }
                if collapse {
                    if let Some(&at) = by_value.get(&values[donor_pos]) {
                        candidates[at].stands_for += 1;
                        continue;
                    }
                    by_value.insert(&values[donor_pos], candidates.len());
                }
                candidates.push(Candidate {
                    host_idx,
                    target: target.clone(),
                    donor_idx,
                    donor: donor.clone(),
                    stands_for: 1,
                });
            }
        }
    }
    candidates
}

/// Splice one pair and cross-check both routes to (x′, z′).
fn splice_pair(
    members: &[Member],
    candidate: &Candidate,
    domain: &Domain,
) -> Result<(AugmentedExample, SpanTree), String> {
    let host = &members[candidate.host_idx];
    let donor_member = &members[candidate.donor_idx];
    let target = &candidate.target;
    let donor = &candidate.donor;

    let tree = splice_tree(&host.tree, target, &donor_member.tree, donor)
        .map_err(|e| e.to_string())?;
    let program = program_of_tree(&tree, domain).map_err(|e| e.to_string())?;

    let by_surgery = host
        .program
        .replace_at(&target.program_path, &donor.program)
        .map_err(|e| e.to_string())?;
    if program != by_surgery {
        return Err(format!(
            "tree evaluation `{program}` disagrees with program surgery `{by_surgery}`"
        ));
    }

    let (i1, j1) = target.span;
    let (i2, j2) = donor.span;
    let by_formula =
        splice_utterance(&host.tokens, i1, j1, &donor_member.tokens[i2..j2])
            .map_err(|e| e.to_string())?;
    if tree.tokens() != by_formula.as_slice() {
        return Err("spliced tree tokens disagree with the substitution formula".to_string());
    }

    let example = AugmentedExample {
        id: format!("{}:{}-{}+{}:{}-{}", host.id, i1, j1, donor.tree_id, i2, j2),
        tokens: by_formula,
        program,
        provenance: Provenance {
            host_id: host.id.clone(),
            host_span: target.span,
            donor_id: donor.tree_id.clone(),
            donor_span: donor.span,
            category: target.category.clone(),
            donor_program: donor.program.clone(),
        },
    };
    Ok((example, tree))
}

/// Remove augmented examples whose (utterance, canonical program) pair
/// occurs in `against` or earlier in the list. Order is preserved.
pub fn dedup(
    augmented: Vec<AugmentedExample>,
    against: impl IntoIterator<Item = (String, String)>,
) -> Vec<AugmentedExample> {
    let mut seen: HashSet<(String, String)> = against.into_iter().collect();
    let mut out = Vec::with_capacity(augmented.len());
    for example in augmented {
        if seen.insert((example.utterance(), example.program.render())) {
            out.push(example);
        }
    }
    out
}
