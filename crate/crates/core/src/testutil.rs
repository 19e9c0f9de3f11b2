//! Shared fixtures for unit tests: the two domain configs plus the span
//! trees used across modules.

use crate::domain::{parse_domain, Domain};
use crate::tree::{NodeCategory, SpanNode, SpanTree};

pub fn geoquery() -> Domain {
    parse_domain(include_str!("../fixtures/geoquery.json")).unwrap()
}

pub fn scan() -> Domain {
    parse_domain(include_str!("../fixtures/scan.json")).unwrap()
}

pub fn toks(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub fn composed(left: SpanNode, right: SpanNode) -> SpanNode {
    SpanNode::internal(NodeCategory::Composed, left, right)
}

pub fn null_internal(left: SpanNode, right: SpanNode) -> SpanNode {
    SpanNode::internal(NodeCategory::Null, left, right)
}

/// "what is the population of the largest state", NULL function words
/// grouped with the unsaturated predicate to their left.
pub fn population_tree() -> SpanTree {
    let root = composed(
        composed(
            SpanNode::leaf(0, 1, "answer"),
            null_internal(SpanNode::null_leaf(1, 2), SpanNode::null_leaf(2, 3)),
        ),
        composed(
            composed(
                SpanNode::leaf(3, 4, "population_1"),
                null_internal(SpanNode::null_leaf(4, 5), SpanNode::null_leaf(5, 6)),
            ),
            composed(SpanNode::leaf(6, 7, "largest"), SpanNode::leaf(7, 8, "state#all")),
        ),
    );
    SpanTree::new(toks("what is the population of the largest state"), root).unwrap()
}

/// "what is the largest city in the smallest state in the usa"
pub fn largest_city_tree() -> SpanTree {
    let in_the_usa = composed(
        composed(SpanNode::leaf(9, 10, "loc_2"), SpanNode::null_leaf(10, 11)),
        SpanNode::leaf(11, 12, "countryid#usa"),
    );
    let state = composed(SpanNode::leaf(8, 9, "state"), in_the_usa);
    let smallest = composed(SpanNode::leaf(7, 8, "smallest"), state);
    let in_the = composed(SpanNode::leaf(5, 6, "loc_2"), SpanNode::null_leaf(6, 7));
    let loc = composed(in_the, smallest);
    let city = composed(SpanNode::leaf(4, 5, "city"), loc);
    let largest = composed(SpanNode::leaf(3, 4, "largest"), city);
    let root = composed(
        composed(
            SpanNode::leaf(0, 1, "answer"),
            null_internal(SpanNode::null_leaf(1, 2), SpanNode::null_leaf(2, 3)),
        ),
        largest,
    );
    SpanTree::new(toks("what is the largest city in the smallest state in the usa"), root)
        .unwrap()
}

/// "run right after jump" with the connective attached to the left clause
/// first.
pub fn run_right_after_jump() -> SpanTree {
    let run_right = composed(SpanNode::leaf(0, 1, "i_run"), SpanNode::leaf(1, 2, "i_right"));
    let after = composed(run_right, SpanNode::leaf(2, 3, "i_after"));
    let root = composed(after, SpanNode::leaf(3, 4, "i_jump"));
    SpanTree::new(toks("run right after jump"), root).unwrap()
}

pub const DEEP_QUERY_PROGRAM: &str = "answer ( population_1 ( largest ( city ( loc_2 ( smallest ( state ( loc_2 ( countryid ( usa ) ) ) ) ) ) ) ) )";

/// A three-type toy domain: f, h produce queries from g-terms, g wraps the
/// entities a and b. `g#a` / `g#b` are single-token anchors for g ( a ) and
/// g ( b ).
pub fn toy_domain() -> Domain {
    parse_domain(
        r#"{
            "name": "toy",
            "types": ["e", "t", "q"],
            "constants": [
                {"name": "f", "kind": "predicate", "arity": 1, "arg_types": ["t"], "result_type": "q"},
                {"name": "h", "kind": "predicate", "arity": 2, "arg_types": ["t", "t"], "result_type": "q"},
                {"name": "g", "kind": "predicate", "arity": 1, "arg_types": ["e"], "result_type": "t"},
                {"name": "a", "kind": "entity", "arity": 0, "arg_types": [], "result_type": "e"},
                {"name": "b", "kind": "entity", "arity": 0, "arg_types": [], "result_type": "e"},
                {"name": "g#a", "kind": "entity", "arity": 0, "arg_types": [], "result_type": "t", "leaf_expansion": "g ( a )"},
                {"name": "g#b", "kind": "entity", "arity": 0, "arg_types": [], "result_type": "t", "leaf_expansion": "g ( b )"}
            ],
            "func_mode": "outer_symbol"
        }"#,
    )
    .unwrap()
}
