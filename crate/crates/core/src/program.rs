//! Programs of the parenthesized functional formal language.
//!
//! A program is a rooted tree of constant symbols where every node has at
//! most two children, written as `answer ( largest ( state ( all ) ) )`.
//! Parsing accepts arbitrary whitespace (including none around punctuation)
//! and rendering produces the canonical single-spaced form, so canonical
//! strings can be compared byte-wise for deduplication.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// True for symbols that can appear as a node label: non-empty, no
/// whitespace, and none of the `( ) ,` delimiter characters.
pub fn is_valid_symbol(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ','))
}

/// A node of the formal language: a symbol plus zero, one or two children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Program {
    symbol: String,
    children: Vec<Program>,
}

impl Program {
    /// Leaf node. Panics if `symbol` is not a valid symbol; symbols coming
    /// from input data go through [`Program::parse`] instead.
    pub fn leaf(symbol: impl Into<String>) -> Program {
        let symbol = symbol.into();
        assert!(is_valid_symbol(&symbol), "invalid program symbol: {symbol:?}");
        Program { symbol, children: Vec::new() }
    }

    /// Internal node with one or two children. Panics on an invalid symbol
    /// or more than two children.
    pub fn node(symbol: impl Into<String>, children: Vec<Program>) -> Program {
        let symbol = symbol.into();
        assert!(is_valid_symbol(&symbol), "invalid program symbol: {symbol:?}");
        assert!(children.len() <= 2, "program nodes take at most two children");
        Program { symbol, children }
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn children(&self) -> &[Program] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Parse a program from text. The input is tokenized on whitespace with
    /// `(`, `)` and `,` always forming their own tokens, so both
    /// `f ( a , b )` and `f(a,b)` are accepted.
    pub fn parse(text: &str) -> Result<Program, ParseError> {
        let tokens = lex(text);
        if tokens.is_empty() {
            return Err(ParseError::EmptyInput);
        }
        check_balance(&tokens)?;
        let mut parser = Parser { tokens: &tokens, pos: 0 };
        let program = parser.term()?;
        if parser.pos < parser.tokens.len() {
            return Err(parser.unexpected());
        }
        Ok(program)
    }

    /// Canonical rendering: single spaces between all tokens, `(` after any
    /// symbol with children, ` , ` between two arguments.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Number of whitespace-delimited tokens in the canonical rendering,
    /// counting `(`, `)` and `,` as tokens.
    pub fn token_len(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            // symbol + "(" + ")" + one "," between two arguments
            2 + self.children.len()
                + self.children.iter().map(Program::token_len).sum::<usize>()
        }
    }

    /// Number of symbols (tree nodes), i.e. the token count with parentheses
    /// and commas excluded.
    pub fn symbol_len(&self) -> usize {
        1 + self.children.iter().map(Program::symbol_len).sum::<usize>()
    }

    /// The subtree addressed by `path`.
    pub fn subprogram_at(&self, path: &ProgramPath) -> Result<&Program, PathError> {
        let mut node = self;
        for (depth, &step) in path.steps().iter().enumerate() {
            node = node.children.get(step).ok_or_else(|| PathError::InvalidPath {
                path: path.clone(),
                failed_at: depth,
            })?;
        }
        Ok(node)
    }

    /// A copy of this program with the subtree at `path` replaced by
    /// `donor`. Neither input is modified.
    pub fn replace_at(&self, path: &ProgramPath, donor: &Program) -> Result<Program, PathError> {
        fn rebuild(
            node: &Program,
            path: &ProgramPath,
            depth: usize,
            donor: &Program,
        ) -> Result<Program, PathError> {
            match path.steps().get(depth) {
                None => Ok(donor.clone()),
                Some(&step) => {
                    if step >= node.children.len() {
                        return Err(PathError::InvalidPath { path: path.clone(), failed_at: depth });
                    }
                    let mut children = node.children.clone();
                    children[step] = rebuild(&node.children[step], path, depth + 1, donor)?;
                    Ok(Program { symbol: node.symbol.clone(), children })
                }
            }
        }
        rebuild(self, path, 0, donor)
    }

    /// Pre-order iterator over all nodes.
    pub fn nodes(&self) -> impl Iterator<Item = &Program> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    /// First path at which `self` and `other` differ (pre-order), together
    /// with a description of each side, or `None` when structurally equal.
    pub fn first_divergence(&self, other: &Program) -> Option<(ProgramPath, String, String)> {
        fn walk(a: &Program, b: &Program, prefix: &mut Vec<usize>) -> Option<(Vec<usize>, String, String)> {
            if a.symbol != b.symbol {
                return Some((prefix.clone(), a.symbol.clone(), b.symbol.clone()));
            }
            if a.children.len() != b.children.len() {
                return Some((
                    prefix.clone(),
                    format!("{} with {} children", a.symbol, a.children.len()),
                    format!("{} with {} children", b.symbol, b.children.len()),
                ));
            }
            for (i, (ca, cb)) in a.children.iter().zip(&b.children).enumerate() {
                prefix.push(i);
                if let Some(found) = walk(ca, cb, prefix) {
                    return Some(found);
                }
                prefix.pop();
            }
            None
        }
        let mut prefix = Vec::new();
        walk(self, other, &mut prefix).map(|(steps, a, b)| (ProgramPath::new(steps), a, b))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)?;
        if let Some((first, rest)) = self.children.split_first() {
            write!(f, " ( {first}")?;
            for child in rest {
                write!(f, " , {child}")?;
            }
            f.write_str(" )")?;
        }
        Ok(())
    }
}

impl Serialize for Program {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Program, D::Error> {
        let text = String::deserialize(deserializer)?;
        Program::parse(&text).map_err(D::Error::custom)
    }
}

/// Sequence of child indices (each 0 or 1) addressing a node from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgramPath(Vec<usize>);

impl ProgramPath {
    pub fn new(steps: Vec<usize>) -> ProgramPath {
        ProgramPath(steps)
    }

    pub fn root() -> ProgramPath {
        ProgramPath(Vec::new())
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, step: usize) {
        self.0.push(step);
    }

    /// `self` followed by `tail`.
    pub fn join(&self, tail: &ProgramPath) -> ProgramPath {
        let mut steps = self.0.clone();
        steps.extend_from_slice(&tail.0);
        ProgramPath(steps)
    }
}

impl From<Vec<usize>> for ProgramPath {
    fn from(steps: Vec<usize>) -> ProgramPath {
        ProgramPath(steps)
    }
}

impl fmt::Display for ProgramPath {
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

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("unbalanced parentheses at offset {offset}")]
    UnbalancedParens { offset: usize },
    #[error("unexpected token {token:?} at offset {offset}")]
    UnexpectedToken { offset: usize, token: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("path {path} does not address a node (no child at step {failed_at})")]
    InvalidPath { path: ProgramPath, failed_at: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    text: String,
    offset: usize,
}

fn lex(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (offset, ch) in text.char_indices() {
        if ch.is_whitespace() || matches!(ch, '(' | ')' | ',') {
            if !current.is_empty() {
                tokens.push(Token { text: std::mem::take(&mut current), offset: start });
            }
            if !ch.is_whitespace() {
                tokens.push(Token { text: ch.to_string(), offset });
            }
        } else {
            if current.is_empty() {
                start = offset;
            }
            current.push(ch);
        }
    }
    if !current.is_empty() {
        tokens.push(Token { text: current, offset: start });
    }
    tokens
}

fn check_balance(tokens: &[Token]) -> Result<(), ParseError> {
    let mut depth = 0i64;
    for token in tokens {
        match token.text.as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth < 0 {
                    return Err(ParseError::UnbalancedParens { offset: token.offset });
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        let last = tokens.last().expect("tokens checked non-empty");
        return Err(ParseError::UnbalancedParens { offset: last.offset + last.text.len() });
    }
    Ok(())
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl Parser<'_> {
    fn term(&mut self) -> Result<Program, ParseError> {
        let symbol = match self.tokens.get(self.pos) {
            Some(token) if is_valid_symbol(&token.text) => token.text.clone(),
            _ => return Err(self.unexpected()),
        };
        self.pos += 1;
        let mut children = Vec::new();
        if self.peek_is("(") {
            self.pos += 1;
            children.push(self.term()?);
            while self.peek_is(",") {
                if children.len() == 2 {
                    // arity cap: no domain uses more than two arguments
                    return Err(self.unexpected());
                }
                self.pos += 1;
                children.push(self.term()?);
            }
            if !self.peek_is(")") {
                return Err(self.unexpected());
            }
            self.pos += 1;
        }
        Ok(Program { symbol, children })
    }

    fn peek_is(&self, text: &str) -> bool {
        self.tokens.get(self.pos).is_some_and(|t| t.text == text)
    }

    fn unexpected(&self) -> ParseError {
        match self.tokens.get(self.pos) {
            Some(token) => ParseError::UnexpectedToken {
                offset: token.offset,
                token: token.text.clone(),
            },
            None => {
                let last = self.tokens.last().expect("parser only runs on non-empty input");
                ParseError::UnexpectedToken {
                    offset: last.offset + last.text.len(),
                    token: "<end of input>".to_string(),
                }
            }
        }
    }
}
