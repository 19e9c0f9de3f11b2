//! Span trees over tokenized utterances.
//!
//! A span tree is a binary tree whose nodes cover half-open, 0-indexed token
//! intervals. Leaves carry a constant category or NULL (function words);
//! internal nodes tile their span with exactly two children. Evaluating the
//! tree bottom-up by typed function application yields the example's
//! program: a NULL child is skipped and its sibling's program propagates.
//!
//! While evaluating, each node's subprogram is tracked to the position it
//! occupies inside the root program. Argument subprograms are inserted
//! intact, so their position is the application slot; a node that acted as a
//! function has had an argument grafted into its program and no longer
//! occurs intact, which disqualifies it from exchange.

use std::fmt;

use thiserror::Error;

use crate::domain::{ApplyError, Domain, SemanticCategory};
use crate::program::{Program, ProgramPath};

/// Category annotation on a span-tree node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeCategory {
    /// Leaf naming a domain constant (possibly a composite like `state#all`).
    Constant(String),
    /// Token span contributing no meaning.
    Null,
    /// Internal node whose program arises by composition or propagation.
    Composed,
}

/// A node covering the token interval `[span.0, span.1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanNode {
    pub span: (usize, usize),
    pub category: NodeCategory,
    /// Empty for leaves, exactly two children for internal nodes.
    pub children: Vec<SpanNode>,
}

impl SpanNode {
    pub fn leaf(start: usize, end: usize, constant: impl Into<String>) -> SpanNode {
        SpanNode {
            span: (start, end),
            category: NodeCategory::Constant(constant.into()),
            children: Vec::new(),
        }
    }

    pub fn null_leaf(start: usize, end: usize) -> SpanNode {
        SpanNode { span: (start, end), category: NodeCategory::Null, children: Vec::new() }
    }

    /// Internal node spanning both children; `Null` when every token below
    /// is NULL, `Composed` otherwise.
    pub fn internal(category: NodeCategory, left: SpanNode, right: SpanNode) -> SpanNode {
        SpanNode { span: (left.span.0, right.span.1), category, children: vec![left, right] }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Sequence of child indices (0 = left, 1 = right) addressing a tree node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePath(Vec<usize>);

impl TreePath {
    pub fn new(steps: Vec<usize>) -> TreePath {
        TreePath(steps)
    }

    pub fn root() -> TreePath {
        TreePath(Vec::new())
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for TreePath {
    fn from(steps: Vec<usize>) -> TreePath {
        TreePath(steps)
    }
}

impl fmt::Display for TreePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("(root)");
        }
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

/// A structurally valid span tree; construction checks all invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    tokens: Vec<String>,
    root: SpanNode,
}

impl SpanTree {
    pub fn new(tokens: Vec<String>, root: SpanNode) -> Result<SpanTree, TreeError> {
        let violations = validate_structure(tokens.len(), &root);
        if violations.is_empty() {
            Ok(SpanTree { tokens, root })
        } else {
            Err(TreeError::Structural { violations })
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn root(&self) -> &SpanNode {
        &self.root
    }

    pub fn node_at(&self, path: &TreePath) -> Option<&SpanNode> {
        let mut node = &self.root;
        for &step in path.steps() {
            node = node.children.get(step)?;
        }
        Some(node)
    }
}

/// One invariant breach found while checking a tree's shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralViolation {
    pub span: (usize, usize),
    pub message: String,
}

impl fmt::Display for StructuralViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span [{}, {}): {}", self.span.0, self.span.1, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("invalid span tree: {}", violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Structural { violations: Vec<StructuralViolation> },
}

/// Check every structural invariant of a candidate tree, collecting all
/// breaches instead of stopping at the first.
pub fn validate_structure(token_count: usize, root: &SpanNode) -> Vec<StructuralViolation> {
    let mut violations = Vec::new();
    if token_count == 0 {
        violations.push(StructuralViolation {
            span: (0, 0),
            message: "the token list is empty".to_string(),
        });
    }
    if root.span != (0, token_count) {
        violations.push(StructuralViolation {
            span: root.span,
            message: format!("root does not cover [0, {token_count})"),
        });
    }
    check_node(token_count, root, &mut violations);
    violations
}

fn check_node(token_count: usize, node: &SpanNode, violations: &mut Vec<StructuralViolation>) {
    let (i, j) = node.span;
    if i >= j {
        violations.push(StructuralViolation {
            span: node.span,
            message: "span is empty or inverted".to_string(),
        });
    }
    if j > token_count {
        violations.push(StructuralViolation {
            span: node.span,
            message: format!("span ends past the {token_count} tokens"),
        });
    }
    match node.children.as_slice() {
        [] => {
            if node.category == NodeCategory::Composed {
                violations.push(StructuralViolation {
                    span: node.span,
                    message: "a leaf cannot be COMPOSED".to_string(),
                });
            }
        }
        [left, right] => {
            if let NodeCategory::Constant(name) = &node.category {
                violations.push(StructuralViolation {
                    span: node.span,
                    message: format!("an internal node cannot carry the constant {name:?}"),
                });
            }
            let s = left.span.1;
            if left.span.0 != i || right.span != (s, j) || !(i < s && s < j) {
                violations.push(StructuralViolation {
                    span: node.span,
                    message: format!(
                        "children [{}, {}) and [{}, {}) do not tile the span at a split point",
                        left.span.0, left.span.1, right.span.0, right.span.1
                    ),
                });
            }
            check_node(token_count, left, violations);
            check_node(token_count, right, violations);
        }
        children => {
            violations.push(StructuralViolation {
                span: node.span,
                message: format!("internal nodes take exactly two children, found {}", children.len()),
            });
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown leaf category {symbol:?} at span [{start}, {end})")]
    UnknownConstant { symbol: String, start: usize, end: usize },
    #[error("composition failed at span [{start}, {end}): {source}")]
    Composition {
        start: usize,
        end: usize,
        #[source]
        source: ApplyError,
    },
    #[error("every token is NULL, the tree has no program")]
    NullRoot,
    #[error("the root program `{program}` has an unfilled argument slot")]
    UnsaturatedRoot { program: String },
}

/// One tree node as seen after evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluatedNode {
    pub span: (usize, usize),
    pub tree_path: TreePath,
    /// The node's subprogram; `None` below all-NULL spans.
    pub program: Option<Program>,
    /// Where that subprogram sits intact inside the root program; `None`
    /// when the node acted as a function and its program was extended.
    pub program_path: Option<ProgramPath>,
}

/// Root program plus the per-node evaluation record, in pre-order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub program: Program,
    pub nodes: Vec<EvaluatedNode>,
}

/// Evaluate the tree bottom-up and return the root program.
pub fn program_of_tree(tree: &SpanTree, domain: &Domain) -> Result<Program, EvalError> {
    Ok(evaluate(tree, domain)?.program)
}

/// Evaluate the tree bottom-up, keeping every node's subprogram and its
/// position inside the root program.
pub fn evaluate(tree: &SpanTree, domain: &Domain) -> Result<Evaluation, EvalError> {
    let mut path = Vec::new();
    let (program, nodes) = eval_node(tree.root(), domain, &mut path)?;
    let Some(program) = program else {
        return Err(EvalError::NullRoot);
    };
    let saturated = domain
        .type_of(&program)
        .expect("a composed program only uses known constants")
        .saturated;
    if !saturated {
        return Err(EvalError::UnsaturatedRoot { program: program.render() });
    }
    Ok(Evaluation { program, nodes })
}

fn eval_node(
    node: &SpanNode,
    domain: &Domain,
    path: &mut Vec<usize>,
) -> Result<(Option<Program>, Vec<EvaluatedNode>), EvalError> {
    if node.is_leaf() {
        let program = match &node.category {
            NodeCategory::Null => None,
            NodeCategory::Constant(name) => {
                Some(domain.leaf_program(name).ok_or_else(|| EvalError::UnknownConstant {
                    symbol: name.clone(),
                    start: node.span.0,
                    end: node.span.1,
                })?)
            }
            NodeCategory::Composed => unreachable!("ruled out by structural validation"),
        };
        let entry = EvaluatedNode {
            span: node.span,
            tree_path: TreePath::new(path.clone()),
            program: program.clone(),
            program_path: program.as_ref().map(|_| ProgramPath::root()),
        };
        return Ok((program, vec![entry]));
    }

    path.push(0);
    let (left_program, left_nodes) = eval_node(&node.children[0], domain, path)?;
    path.pop();
    path.push(1);
    let (right_program, right_nodes) = eval_node(&node.children[1], domain, path)?;
    path.pop();

    let (program, left_nodes, right_nodes) = match (left_program, right_program) {
        (None, None) => (None, left_nodes, right_nodes),
        (Some(p), None) => (Some(p), left_nodes, right_nodes),
        (None, Some(p)) => (Some(p), left_nodes, right_nodes),
        (Some(l), Some(r)) => {
            let app = domain.apply(&l, &r).map_err(|source| EvalError::Composition {
                start: node.span.0,
                end: node.span.1,
                source,
            })?;
            let (function_nodes, argument_nodes) = if app.function_is_left {
                (left_nodes, right_nodes)
            } else {
                (right_nodes, left_nodes)
            };
            // The argument subtree is inserted intact at the slot; existing
            // positions inside the function survive unless they contain the
            // insertion point (every prefix of the slot's parent does).
            let slot_parent = &app.slot.steps()[..app.slot.steps().len() - 1];
            let function_nodes: Vec<EvaluatedNode> = function_nodes
                .into_iter()
                .map(|mut entry| {
                    entry.program_path = entry.program_path.filter(|rel| {
                        let rel = rel.steps();
                        !(rel.len() <= slot_parent.len() && slot_parent[..rel.len()] == *rel)
                    });
                    entry
                })
                .collect();
            let argument_nodes: Vec<EvaluatedNode> = argument_nodes
                .into_iter()
                .map(|mut entry| {
                    entry.program_path = entry.program_path.map(|rel| app.slot.join(&rel));
                    entry
                })
                .collect();
            if app.function_is_left {
                (Some(app.program), function_nodes, argument_nodes)
            } else {
                (Some(app.program), argument_nodes, function_nodes)
            }
        }
    };

    let mut nodes = Vec::with_capacity(1 + left_nodes.len() + right_nodes.len());
    nodes.push(EvaluatedNode {
        span: node.span,
        tree_path: TreePath::new(path.clone()),
        program: program.clone(),
        program_path: program.as_ref().map(|_| ProgramPath::root()),
    });
    nodes.extend(left_nodes);
    nodes.extend(right_nodes);
    Ok((program, nodes))
}

/// A subtree eligible for exchange: saturated, categorized, and occurring
/// intact inside its example's program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtreeRef {
    pub tree_id: String,
    pub path: TreePath,
    pub span: (usize, usize),
    pub program: Program,
    /// Position of `program` inside the example's root program.
    pub program_path: ProgramPath,
    /// The semantic-category label; UNDEFINED subtrees are never listed.
    pub category: String,
}

/// List every exchangeable subtree of a tree, ordered by span.
pub fn enumerate_exchangeable_subtrees(
    tree_id: &str,
    tree: &SpanTree,
    domain: &Domain,
) -> Result<Vec<SubtreeRef>, EvalError> {
    let evaluation = evaluate(tree, domain)?;
    let mut refs = Vec::new();
    for node in evaluation.nodes {
        let (Some(program), Some(program_path)) = (node.program, node.program_path) else {
            continue;
        };
        let saturated = domain
            .type_of(&program)
            .expect("evaluated subprograms only use known constants")
            .saturated;
        if !saturated {
            continue;
        }
        let category = match domain
            .semantic_category(&program)
            .expect("evaluated subprograms only use known constants")
        {
            SemanticCategory::Label(label) => label,
            SemanticCategory::Undefined => continue,
        };
        refs.push(SubtreeRef {
            tree_id: tree_id.to_string(),
            path: node.tree_path,
            span: node.span,
            program,
            program_path,
            category,
        });
    }
    refs.sort_by_key(|r| r.span);
    debug_assert!(refs.windows(2).all(|w| w[0].span != w[1].span), "spans are unique per tree");
    Ok(refs)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpliceError {
    #[error("target category {target:?} does not match donor category {donor:?}")]
    CategoryMismatch { target: String, donor: String },
    #[error("subtree reference does not resolve: {detail}")]
    IndexOutOfRange { detail: String },
    #[error("splice produced an invalid tree: {detail}")]
    InvalidResult { detail: String },
}

/// The substitution rule on token lists: the donor segment replaces
/// `x1[i1..j1]`.
pub fn splice_utterance(
    x1: &[String],
    i1: usize,
    j1: usize,
    donor_tokens: &[String],
) -> Result<Vec<String>, SpliceError> {
    if !(i1 < j1 && j1 <= x1.len()) {
        return Err(SpliceError::IndexOutOfRange {
            detail: format!("[{i1}, {j1}) is not a span of a {}-token utterance", x1.len()),
        });
    }
    let mut out = Vec::with_capacity(x1.len() - (j1 - i1) + donor_tokens.len());
    out.extend_from_slice(&x1[..i1]);
    out.extend_from_slice(donor_tokens);
    out.extend_from_slice(&x1[j1..]);
    Ok(out)
}

/// Replace the target subtree of `host` with the donor subtree, re-indexing
/// every span so the result is a valid tree over the spliced token list.
pub fn splice_tree(
    host: &SpanTree,
    target: &SubtreeRef,
    donor_tree: &SpanTree,
    donor: &SubtreeRef,
) -> Result<SpanTree, SpliceError> {
    if target.category != donor.category {
        return Err(SpliceError::CategoryMismatch {
            target: target.category.clone(),
            donor: donor.category.clone(),
        });
    }
    let target_node = resolve(host, target)?;
    let donor_node = resolve(donor_tree, donor)?;

    let (i1, j1) = target_node.span;
    let (i2, j2) = donor_node.span;
    let delta_donor = i1 as isize - i2 as isize;
    let delta_right = (j2 - i2) as isize - (j1 - i1) as isize;

    let tokens = splice_utterance(host.tokens(), i1, j1, &donor_tree.tokens()[i2..j2])?;
    let root = rebuild(host.root(), target, donor_node, delta_donor, delta_right);
    SpanTree::new(tokens, root)
        .map_err(|e| SpliceError::InvalidResult { detail: e.to_string() })
}

fn resolve<'a>(tree: &'a SpanTree, subtree: &SubtreeRef) -> Result<&'a SpanNode, SpliceError> {
    let node = tree.node_at(&subtree.path).ok_or_else(|| SpliceError::IndexOutOfRange {
        detail: format!("no node at path {} in tree {}", subtree.path, subtree.tree_id),
    })?;
    if node.span != subtree.span {
        return Err(SpliceError::IndexOutOfRange {
            detail: format!(
                "node at path {} spans [{}, {}), reference says [{}, {})",
                subtree.path, node.span.0, node.span.1, subtree.span.0, subtree.span.1
            ),
        });
    }
    Ok(node)
}

fn rebuild(
    node: &SpanNode,
    target: &SubtreeRef,
    donor_node: &SpanNode,
    delta_donor: isize,
    delta_right: isize,
) -> SpanNode {
    fn walk(
        node: &SpanNode,
        depth: usize,
        target: &SubtreeRef,
        donor_node: &SpanNode,
        delta_donor: isize,
        delta_right: isize,
    ) -> SpanNode {
        let (i1, j1) = target.span;
        if depth == target.path.steps().len() {
            return shift_subtree(donor_node, delta_donor);
        }
        if node.span.1 <= i1 {
            return node.clone();
        }
        if node.span.0 >= j1 {
            return shift_subtree(node, delta_right);
        }
        // this node contains the target, so only its end moves
        SpanNode {
            span: (node.span.0, offset(node.span.1, delta_right)),
            category: node.category.clone(),
            children: node
                .children
                .iter()
                .enumerate()
                .map(|(k, child)| {
                    if target.path.steps().get(depth) == Some(&k) {
                        walk(child, depth + 1, target, donor_node, delta_donor, delta_right)
                    } else if child.span.1 <= i1 {
                        child.clone()
                    } else {
                        shift_subtree(child, delta_right)
                    }
                })
                .collect(),
        }
    }
    walk(node, 0, target, donor_node, delta_donor, delta_right)
}

fn shift_subtree(node: &SpanNode, delta: isize) -> SpanNode {
    SpanNode {
        span: (offset(node.span.0, delta), offset(node.span.1, delta)),
        category: node.category.clone(),
        children: node.children.iter().map(|c| shift_subtree(c, delta)).collect(),
    }
}

fn offset(value: usize, delta: isize) -> usize {
    (value as isize + delta) as usize
}

/// First path where the expected and evaluated programs differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub path: ProgramPath,
    pub expected: String,
    pub actual: String,
}

/// Everything found while checking an annotated tree against its program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub passed: bool,
    pub structural: Vec<StructuralViolation>,
    /// Evaluation failure, rendered, when the tree has no program.
    pub evaluation: Option<String>,
    pub divergence: Option<Divergence>,
}

impl ValidationReport {
    fn pass() -> ValidationReport {
        ValidationReport { passed: true, structural: Vec::new(), evaluation: None, divergence: None }
    }

    /// One-line summary of the first failure, for logs and reports.
    pub fn failure_summary(&self) -> Option<String> {
        if self.passed {
            return None;
        }
        if let Some(v) = self.structural.first() {
            return Some(v.to_string());
        }
        if let Some(e) = &self.evaluation {
            return Some(e.clone());
        }
        self.divergence.as_ref().map(|d| {
            format!(
                "program diverges at {}: expected {}, evaluated {}",
                d.path, d.expected, d.actual
            )
        })
    }
}

/// Check a candidate tree (raw parts, not yet constructed) against the
/// program it is annotated with. All failures land in the report; nothing
/// is thrown.
pub fn validate_tree(
    tokens: &[String],
    root: &SpanNode,
    program: &Program,
    domain: &Domain,
) -> ValidationReport {
    let structural = validate_structure(tokens.len(), root);
    if !structural.is_empty() {
        return ValidationReport { passed: false, structural, evaluation: None, divergence: None };
    }
    let tree = SpanTree::new(tokens.to_vec(), root.clone())
        .expect("structural validation just passed");
    let evaluated = match program_of_tree(&tree, domain) {
        Ok(p) => p,
        Err(e) => {
            return ValidationReport {
                passed: false,
                structural: Vec::new(),
                evaluation: Some(e.to_string()),
                divergence: None,
            };
        }
    };
    match program.first_divergence(&evaluated) {
        None => ValidationReport::pass(),
        Some((path, expected, actual)) => ValidationReport {
            passed: false,
            structural: Vec::new(),
            evaluation: None,
            divergence: Some(Divergence { path, expected, actual }),
        },
    }
}
