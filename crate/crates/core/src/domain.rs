//! Domain schemas: typed constant inventories plus the semantic-category
//! function that decides which program subtrees are exchangeable.
//!
//! A domain declares every symbol a program may use, its kind (entity or
//! predicate), argument and result types, and how categories are assigned:
//! either the outermost symbol of a subprogram or an explicit symbol-to-label
//! map with everything unmapped being [`SemanticCategory::Undefined`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::program::{Program, ProgramPath};

/// Wildcard accepted by argument slots that take any well-typed subprogram.
pub const ANY_TYPE: &str = "any";

/// True when a value of type `found` can fill a slot expecting `expected`.
pub fn type_matches(expected: &str, found: &str) -> bool {
    expected == ANY_TYPE || expected == found
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    /// Nullary symbol such as `usa` or `i_right`.
    Entity,
    /// Function symbol with one or two argument slots.
    Predicate,
}

/// How the semantic category of a subprogram is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuncMode {
    /// Category is the outermost symbol of the subprogram.
    OuterSymbol,
    /// Category is looked up from `func_map` by outermost symbol; symbols
    /// not in the map get [`SemanticCategory::Undefined`].
    ExplicitMap,
}

/// A single declared symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantDef {
    pub name: String,
    pub kind: ConstantKind,
    pub arity: usize,
    pub arg_types: Vec<String>,
    pub result_type: String,
    /// For composite leaf categories such as `state#all`: the program the
    /// leaf stands for, here `state ( all )`.
    pub leaf_expansion: Option<Program>,
    /// When set, the node is already saturated with fewer children than
    /// `arity`, but can still accept arguments up to `arity`. Command
    /// primitives that take an optional direction work this way.
    pub optional_args: bool,
}

/// A validated domain schema.
#[derive(Clone, Debug, Serialize)]
pub struct Domain {
    name: String,
    types: BTreeSet<String>,
    constants: BTreeMap<String, ConstantDef>,
    func_mode: FuncMode,
    func_map: BTreeMap<String, String>,
    tie_break_left: bool,
}

/// Category of a saturated subprogram; only subtrees whose programs share a
/// `Label` are exchangeable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticCategory {
    Label(String),
    Undefined,
}

impl fmt::Display for SemanticCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticCategory::Label(label) => f.write_str(label),
            SemanticCategory::Undefined => f.write_str("UNDEFINED"),
        }
    }
}

/// Result type plus saturation of a well-typed program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeInfo {
    pub result_type: String,
    /// True when every node has all required arguments. Optional-argument
    /// nodes count as saturated at any child count up to their arity.
    pub saturated: bool,
}

/// First place a program can still accept an argument, in pre-order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSlot {
    /// Node the argument would be appended to.
    pub parent: ProgramPath,
    /// Child index the argument would take, always `children.len()`.
    pub index: usize,
    /// Declared type of that argument slot.
    pub expected: String,
}

/// Outcome of composing two programs by function application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Application {
    pub program: Program,
    /// True when the left operand acted as the function.
    pub function_is_left: bool,
    /// Path of the inserted argument inside `program`.
    pub slot: ProgramPath,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown constant {symbol:?}")]
    UnknownConstant { symbol: String },
    #[error("type mismatch at {path}: expected {expected}, found {found}")]
    TypeMismatch { path: ProgramPath, expected: String, found: String },
    #[error("{symbol:?} at {path} takes {arity} arguments, found {given}")]
    ArityExceeded { path: ProgramPath, symbol: String, arity: usize, given: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("no legal application of {left:?} and {right:?}")]
    NoLegalApplication { left: String, right: String },
    #[error("ambiguous application of {left:?} and {right:?}: either operand can be the function")]
    AmbiguousApplication { left: String, right: String },
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("failed to read domain config")]
    Io(#[from] std::io::Error),
    #[error("malformed domain config")]
    Json(#[from] serde_json::Error),
    #[error("invalid domain config: {detail}")]
    SchemaViolation { detail: String },
    #[error("constant {constant:?} references undeclared type {type_name:?}")]
    DanglingTypeReference { constant: String, type_name: String },
    #[error("func_map entry {symbol:?} is not a declared constant")]
    DanglingFuncMapEntry { symbol: String },
    #[error("invalid leaf_expansion for {constant:?}: {detail}")]
    InvalidExpansion { constant: String, detail: String },
}

impl Domain {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constant(&self, symbol: &str) -> Option<&ConstantDef> {
        self.constants.get(symbol)
    }

    pub fn constants(&self) -> impl Iterator<Item = &ConstantDef> {
        self.constants.values()
    }

    pub fn func_mode(&self) -> FuncMode {
        self.func_mode
    }

    /// The program a tree leaf with category `symbol` denotes: the declared
    /// `leaf_expansion` if any, otherwise the bare constant. `None` for
    /// unknown symbols.
    pub fn leaf_program(&self, symbol: &str) -> Option<Program> {
        let def = self.constants.get(symbol)?;
        Some(match &def.leaf_expansion {
            Some(expansion) => expansion.clone(),
            None => Program::leaf(symbol),
        })
    }

    /// Type-check `program` bottom-up, returning its result type and whether
    /// all argument slots are filled.
    pub fn type_of(&self, program: &Program) -> Result<TypeInfo, TypeError> {
        let mut saturated = true;
        let mut path = Vec::new();
        let result_type = self.check_node(program, &mut path, &mut saturated)?;
        Ok(TypeInfo { result_type, saturated })
    }

    fn check_node(
        &self,
        node: &Program,
        path: &mut Vec<usize>,
        saturated: &mut bool,
    ) -> Result<String, TypeError> {
        let def = self.lookup(node.symbol())?;
        let given = node.children().len();
        if given > def.arity {
            return Err(TypeError::ArityExceeded {
                path: ProgramPath::new(path.clone()),
                symbol: def.name.clone(),
                arity: def.arity,
                given,
            });
        }
        if given < def.arity && !def.optional_args {
            *saturated = false;
        }
        for (k, child) in node.children().iter().enumerate() {
            path.push(k);
            let found = self.check_node(child, path, saturated)?;
            if !type_matches(&def.arg_types[k], &found) {
                return Err(TypeError::TypeMismatch {
                    path: ProgramPath::new(path.clone()),
                    expected: def.arg_types[k].clone(),
                    found,
                });
            }
            path.pop();
        }
        Ok(def.result_type.clone())
    }

    /// First node (pre-order) that can still accept an argument.
    pub fn first_open_slot(&self, program: &Program) -> Result<Option<OpenSlot>, TypeError> {
        let mut path = Vec::new();
        self.find_slot(program, &mut path)
    }

    fn find_slot(
        &self,
        node: &Program,
        path: &mut Vec<usize>,
    ) -> Result<Option<OpenSlot>, TypeError> {
        let def = self.lookup(node.symbol())?;
        let given = node.children().len();
        if given < def.arity {
            return Ok(Some(OpenSlot {
                parent: ProgramPath::new(path.clone()),
                index: given,
                expected: def.arg_types[given].clone(),
            }));
        }
        for (k, child) in node.children().iter().enumerate() {
            path.push(k);
            if let Some(slot) = self.find_slot(child, path)? {
                return Ok(Some(slot));
            }
            path.pop();
        }
        Ok(None)
    }

    /// Compose two programs by function application. An unsaturated operand
    /// paired with a saturated one is the function regardless of order; when
    /// both are saturated or both unsaturated, the type system decides which
    /// operand can take the other at its first open slot. If either order
    /// would be legal, the tie break (enabled unless the config sets
    /// `"tie_break": "none"`) takes the left operand and records a warning.
    pub fn apply(&self, left: &Program, right: &Program) -> Result<Application, ApplyError> {
        let left_saturated = self.type_of(left)?.saturated;
        let right_saturated = self.type_of(right)?.saturated;
        if left_saturated != right_saturated {
            let (applied, function_is_left) = if left_saturated {
                (self.applied(right, left)?, false)
            } else {
                (self.applied(left, right)?, true)
            };
            return match applied {
                Some((program, slot)) => Ok(Application { program, function_is_left, slot }),
                None => Err(ApplyError::NoLegalApplication {
                    left: left.render(),
                    right: right.render(),
                }),
            };
        }
        let left_as_function = self.applied(left, right)?;
        let right_as_function = self.applied(right, left)?;
        match (left_as_function, right_as_function) {
            (Some((program, slot)), None) => {
                Ok(Application { program, function_is_left: true, slot })
            }
            (None, Some((program, slot))) => {
                Ok(Application { program, function_is_left: false, slot })
            }
            (Some((program, slot)), Some(_)) => {
                if self.tie_break_left {
                    log::warn!(
                        "ambiguous application of `{left}` and `{right}`; tie break takes the left operand as function"
                    );
                    Ok(Application { program, function_is_left: true, slot })
                } else {
                    Err(ApplyError::AmbiguousApplication {
                        left: left.render(),
                        right: right.render(),
                    })
                }
            }
            (None, None) => Err(ApplyError::NoLegalApplication {
                left: left.render(),
                right: right.render(),
            }),
        }
    }

    /// `function` with `argument` appended at its first open slot, or `None`
    /// when there is no open slot or the argument's result type does not fit.
    fn applied(
        &self,
        function: &Program,
        argument: &Program,
    ) -> Result<Option<(Program, ProgramPath)>, ApplyError> {
        let Some(slot) = self.first_open_slot(function)? else {
            return Ok(None);
        };
        let info = self.type_of(argument)?;
        if !type_matches(&slot.expected, &info.result_type) {
            return Ok(None);
        }
        let parent = function
            .subprogram_at(&slot.parent)
            .expect("open slot path addresses a node of the function");
        let mut children = parent.children().to_vec();
        children.push(argument.clone());
        let widened = Program::node(parent.symbol().to_string(), children);
        let program = function
            .replace_at(&slot.parent, &widened)
            .expect("open slot path addresses a node of the function");
        let mut slot_path = slot.parent;
        slot_path.push(slot.index);
        Ok(Some((program, slot_path)))
    }

    /// The semantic category of a subprogram. Errors only when the program
    /// uses a symbol the domain does not declare.
    pub fn semantic_category(&self, program: &Program) -> Result<SemanticCategory, TypeError> {
        for node in program.nodes() {
            self.lookup(node.symbol())?;
        }
        Ok(match self.func_mode {
            FuncMode::OuterSymbol => SemanticCategory::Label(program.symbol().to_string()),
            FuncMode::ExplicitMap => match self.func_map.get(program.symbol()) {
                Some(label) => SemanticCategory::Label(label.clone()),
                None => SemanticCategory::Undefined,
            },
        })
    }

    fn lookup(&self, symbol: &str) -> Result<&ConstantDef, TypeError> {
        self.constants
            .get(symbol)
            .ok_or_else(|| TypeError::UnknownConstant { symbol: symbol.to_string() })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainConfig {
    name: String,
    types: Vec<String>,
    constants: Vec<ConstantConfig>,
    func_mode: FuncMode,
    #[serde(default)]
    func_map: BTreeMap<String, String>,
    #[serde(default)]
    tie_break: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantConfig {
    name: String,
    kind: ConstantKind,
    #[serde(default)]
    arity: usize,
    #[serde(default)]
    arg_types: Vec<String>,
    result_type: String,
    #[serde(default)]
    leaf_expansion: Option<String>,
    #[serde(default)]
    optional_args: bool,
}

/// Load and validate a domain config from a JSON file.
pub fn load_domain(path: impl AsRef<Path>) -> Result<Domain, DomainError> {
    parse_domain(&std::fs::read_to_string(path)?)
}

/// Parse and validate a domain config from JSON text.
pub fn parse_domain(text: &str) -> Result<Domain, DomainError> {
    let config: DomainConfig = serde_json::from_str(text)?;
    validate(config)
}

fn validate(config: DomainConfig) -> Result<Domain, DomainError> {
    if config.constants.is_empty() {
        return Err(DomainError::SchemaViolation {
            detail: "a domain must declare at least one constant".to_string(),
        });
    }
    let types: BTreeSet<String> = config.types.into_iter().collect();
    let mut constants = BTreeMap::new();
    for c in config.constants {
        if !crate::program::is_valid_symbol(&c.name) {
            return Err(DomainError::SchemaViolation {
                detail: format!("constant name {:?} is not a valid symbol", c.name),
            });
        }
        match c.kind {
            ConstantKind::Entity => {
                if c.arity != 0 || !c.arg_types.is_empty() {
                    return Err(DomainError::SchemaViolation {
                        detail: format!("entity {:?} must have arity 0", c.name),
                    });
                }
                if c.optional_args {
                    return Err(DomainError::SchemaViolation {
                        detail: format!("entity {:?} cannot take optional arguments", c.name),
                    });
                }
            }
            ConstantKind::Predicate => {
                if !(1..=2).contains(&c.arity) {
                    return Err(DomainError::SchemaViolation {
                        detail: format!("predicate {:?} must have arity 1 or 2", c.name),
                    });
                }
                if c.leaf_expansion.is_some() {
                    return Err(DomainError::SchemaViolation {
                        detail: format!(
                            "leaf_expansion is only allowed on entities, found on predicate {:?}",
                            c.name
                        ),
                    });
                }
            }
        }
        if c.arg_types.len() != c.arity {
            return Err(DomainError::SchemaViolation {
                detail: format!(
                    "constant {:?} declares arity {} but {} argument types",
                    c.name,
                    c.arity,
                    c.arg_types.len()
                ),
            });
        }
        for t in c.arg_types.iter().chain(Some(&c.result_type)) {
            if t != ANY_TYPE && !types.contains(t) {
                return Err(DomainError::DanglingTypeReference {
                    constant: c.name.clone(),
                    type_name: t.clone(),
                });
            }
        }
        let leaf_expansion = match &c.leaf_expansion {
            Some(text) => Some(Program::parse(text).map_err(|e| DomainError::InvalidExpansion {
                constant: c.name.clone(),
                detail: e.to_string(),
            })?),
            None => None,
        };
        let def = ConstantDef {
            name: c.name.clone(),
            kind: c.kind,
            arity: c.arity,
            arg_types: c.arg_types,
            result_type: c.result_type,
            leaf_expansion,
            optional_args: c.optional_args,
        };
        if constants.insert(c.name.clone(), def).is_some() {
            return Err(DomainError::SchemaViolation {
                detail: format!("constant {:?} is declared twice", c.name),
            });
        }
    }
    for symbol in config.func_map.keys() {
        if !constants.contains_key(symbol) {
            return Err(DomainError::DanglingFuncMapEntry { symbol: symbol.clone() });
        }
    }
    if config.func_mode == FuncMode::ExplicitMap && config.func_map.is_empty() {
        log::warn!("func_mode is explicit_map but func_map is empty; every category will be UNDEFINED");
    }
    let tie_break_left = match config.tie_break.as_deref() {
        None | Some("left") => true,
        Some("none") => false,
        Some(other) => {
            return Err(DomainError::SchemaViolation {
                detail: format!("unsupported tie_break {other:?}, expected \"left\" or \"none\""),
            });
        }
    };
    let domain = Domain {
        name: config.name,
        types,
        constants,
        func_mode: config.func_mode,
        func_map: config.func_map,
        tie_break_left,
    };
    // Second pass: expansions may reference any constant, so they are only
    // checkable against the complete table.
    for def in domain.constants.values() {
        if let Some(expansion) = &def.leaf_expansion {
            let info = domain.type_of(expansion).map_err(|e| DomainError::InvalidExpansion {
                constant: def.name.clone(),
                detail: e.to_string(),
            })?;
            if !info.saturated {
                return Err(DomainError::InvalidExpansion {
                    constant: def.name.clone(),
                    detail: format!("expansion `{expansion}` is not saturated"),
                });
            }
            if info.result_type != def.result_type {
                return Err(DomainError::InvalidExpansion {
                    constant: def.name.clone(),
                    detail: format!(
                        "expansion `{expansion}` has result type {}, declared {}",
                        info.result_type, def.result_type
                    ),
                });
            }
        }
    }
    Ok(domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geoquery() -> Domain {
        parse_domain(include_str!("../fixtures/geoquery.json")).unwrap()
    }

    fn scan() -> Domain {
        parse_domain(include_str!("../fixtures/scan.json")).unwrap()
    }

    fn p(text: &str) -> Program {
        Program::parse(text).unwrap()
    }

    #[test]
    fn fixture_domains_load() {
        let geo = geoquery();
        assert_eq!(geo.func_mode(), FuncMode::OuterSymbol);
        assert_eq!(geo.constant("state").unwrap().arity, 1);
        assert_eq!(
            geo.constant("state#all").unwrap().leaf_expansion.as_ref().unwrap().render(),
            "state ( all )"
        );
        let scan = scan();
        assert_eq!(scan.func_mode(), FuncMode::ExplicitMap);
        assert!(scan.constant("i_run").unwrap().optional_args);
    }

    #[test]
    fn type_of_accepts_well_typed_programs() {
        let geo = geoquery();
        let info = geo.type_of(&p("answer ( population_1 ( largest ( state ( all ) ) ) )")).unwrap();
        assert_eq!(info, TypeInfo { result_type: "query".to_string(), saturated: true });
        let info = geo.type_of(&p("exclude ( state ( all ) , next_to_2 ( stateid ( texas ) ) )")).unwrap();
        assert_eq!(info.result_type, "place_set");
        assert!(info.saturated);
    }

    #[test]
    fn type_of_rejects_ill_typed_argument() {
        let geo = geoquery();
        let err = geo.type_of(&p("state ( countryid ( usa ) )")).unwrap_err();
        assert_eq!(
            err,
            TypeError::TypeMismatch {
                path: vec![0].into(),
                expected: "place_set".to_string(),
                found: "place".to_string(),
            }
        );
    }

    #[test]
    fn type_of_flags_unsaturated_programs() {
        let geo = geoquery();
        assert!(!geo.type_of(&p("population_1")).unwrap().saturated);
        assert!(!geo.type_of(&p("exclude ( state ( all ) )")).unwrap().saturated);
        assert!(geo.type_of(&p("largest ( state ( all ) )")).unwrap().saturated);
    }

    #[test]
    fn type_of_rejects_overfilled_nodes() {
        let geo = geoquery();
        let err = geo.type_of(&p("usa ( texas )")).unwrap_err();
        assert_eq!(
            err,
            TypeError::ArityExceeded {
                path: ProgramPath::root(),
                symbol: "usa".to_string(),
                arity: 0,
                given: 1,
            }
        );
    }

    #[test]
    fn type_of_rejects_unknown_constants() {
        let geo = geoquery();
        assert_eq!(
            geo.type_of(&p("warp ( all )")).unwrap_err(),
            TypeError::UnknownConstant { symbol: "warp".to_string() }
        );
    }

    #[test]
    fn optional_arguments_saturate_at_any_count() {
        let scan = scan();
        assert!(scan.type_of(&p("i_run")).unwrap().saturated);
        assert!(scan.type_of(&p("i_run ( i_right )")).unwrap().saturated);
        assert!(!scan.type_of(&p("i_twice")).unwrap().saturated);
        let err = scan.type_of(&p("i_run ( i_run )")).unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn first_open_slot_is_preorder() {
        let geo = geoquery();
        assert_eq!(geo.first_open_slot(&p("largest ( state ( all ) )")).unwrap(), None);
        let slot = geo.first_open_slot(&p("population_1")).unwrap().unwrap();
        assert_eq!(slot.parent, ProgramPath::root());
        assert_eq!(slot.index, 0);
        assert_eq!(slot.expected, "place");
        let slot = geo.first_open_slot(&p("exclude ( state ( all ) )")).unwrap().unwrap();
        assert_eq!(slot.parent, ProgramPath::root());
        assert_eq!(slot.index, 1);
    }

    #[test]
    fn open_slot_inside_optional_node_is_found() {
        let scan = scan();
        let slot = scan.first_open_slot(&p("i_run")).unwrap().unwrap();
        assert_eq!((slot.parent.clone(), slot.index), (ProgramPath::root(), 0));
        assert_eq!(slot.expected, "direction");
    }

    #[test]
    fn apply_takes_open_operand_as_function() {
        let geo = geoquery();
        let arg = p("largest ( state ( all ) )");
        let out = geo.apply(&p("population_1"), &arg).unwrap();
        assert_eq!(out.program.render(), "population_1 ( largest ( state ( all ) ) )");
        assert!(out.function_is_left);
        assert_eq!(out.slot, vec![0].into());

        let flipped = geo.apply(&arg, &p("population_1")).unwrap();
        assert_eq!(flipped.program, out.program);
        assert!(!flipped.function_is_left);
    }

    #[test]
    fn apply_fills_second_slot_of_binary_predicate() {
        let geo = geoquery();
        let partial = p("exclude ( state ( all ) )");
        let out = geo.apply(&partial, &p("next_to_2 ( stateid ( texas ) )")).unwrap();
        assert_eq!(
            out.program.render(),
            "exclude ( state ( all ) , next_to_2 ( stateid ( texas ) ) )"
        );
        assert_eq!(out.slot, vec![1].into());
    }

    #[test]
    fn apply_uses_types_when_both_operands_are_open() {
        let scan = scan();
        // i_twice is open for an action, i_run is open for a direction but
        // already saturated, so only i_twice can be the function.
        let out = scan.apply(&p("i_twice"), &p("i_run")).unwrap();
        assert_eq!(out.program.render(), "i_twice ( i_run )");
        assert!(out.function_is_left);

        let out = scan.apply(&p("i_right"), &p("i_run")).unwrap();
        assert_eq!(out.program.render(), "i_run ( i_right )");
        assert!(!out.function_is_left);
    }

    #[test]
    fn apply_composes_two_unsaturated_operands_by_type() {
        let geo = geoquery();
        // answer can take a num-yielding argument even though population_1 is
        // still missing its own argument; the reverse order cannot type-check
        let out = geo.apply(&p("answer"), &p("population_1")).unwrap();
        assert_eq!(out.program.render(), "answer ( population_1 )");
        assert!(!geo.type_of(&out.program).unwrap().saturated);
        // the buried slot is filled next
        let done = geo.apply(&out.program, &p("largest ( state ( all ) )")).unwrap();
        assert_eq!(done.program.render(), "answer ( population_1 ( largest ( state ( all ) ) ) )");
        assert_eq!(done.slot, vec![0, 0].into());
    }

    #[test]
    fn apply_rejects_hopeless_pairs() {
        let geo = geoquery();
        // num does not fit place and num does not fit place_set
        let err = geo.apply(&p("population_1"), &p("count")).unwrap_err();
        assert!(matches!(err, ApplyError::NoLegalApplication { .. }));
        // two saturated entities have no open slot
        let err = geo.apply(&p("usa"), &p("texas")).unwrap_err();
        assert!(matches!(err, ApplyError::NoLegalApplication { .. }));
    }

    const AMBIGUOUS_DOMAIN: &str = r#"{
        "name": "toy",
        "types": ["t"],
        "constants": [
            {"name": "u0", "kind": "predicate", "arity": 1, "arg_types": ["t"], "result_type": "t", "optional_args": true},
            {"name": "u1", "kind": "predicate", "arity": 1, "arg_types": ["t"], "result_type": "t", "optional_args": true}
        ],
        "func_mode": "outer_symbol"
    }"#;

    #[test]
    fn apply_reports_ambiguity_when_tie_break_disabled() {
        let without_tie_break = AMBIGUOUS_DOMAIN.replace(
            "\"func_mode\": \"outer_symbol\"",
            "\"func_mode\": \"outer_symbol\", \"tie_break\": \"none\"",
        );
        let domain = parse_domain(&without_tie_break).unwrap();
        let err = domain.apply(&p("u0"), &p("u1")).unwrap_err();
        assert_eq!(
            err,
            ApplyError::AmbiguousApplication { left: "u0".to_string(), right: "u1".to_string() }
        );
    }

    #[test]
    fn tie_break_defaults_to_left_operand() {
        let domain = parse_domain(AMBIGUOUS_DOMAIN).unwrap();
        let out = domain.apply(&p("u0"), &p("u1")).unwrap();
        assert_eq!(out.program.render(), "u0 ( u1 )");
        assert!(out.function_is_left);
    }

    #[test]
    fn semantic_category_outer_symbol() {
        let geo = geoquery();
        assert_eq!(
            geo.semantic_category(&p("largest ( state ( all ) )")).unwrap(),
            SemanticCategory::Label("largest".to_string())
        );
        assert_eq!(
            geo.semantic_category(&p("loc_2 ( countryid ( usa ) )")).unwrap(),
            SemanticCategory::Label("loc_2".to_string())
        );
        assert_eq!(
            geo.semantic_category(&p("blorp")).unwrap_err(),
            TypeError::UnknownConstant { symbol: "blorp".to_string() }
        );
    }

    #[test]
    fn semantic_category_explicit_map() {
        let scan = scan();
        assert_eq!(
            scan.semantic_category(&p("i_right")).unwrap(),
            SemanticCategory::Label("direction".to_string())
        );
        assert_eq!(
            scan.semantic_category(&p("i_left")).unwrap(),
            SemanticCategory::Label("direction".to_string())
        );
        assert_eq!(
            scan.semantic_category(&p("i_run ( i_right )")).unwrap(),
            SemanticCategory::Undefined
        );
    }

    #[test]
    fn leaf_program_expands_composites() {
        let geo = geoquery();
        assert_eq!(geo.leaf_program("usa").unwrap().render(), "usa");
        assert_eq!(geo.leaf_program("state#all").unwrap().render(), "state ( all )");
        assert_eq!(geo.leaf_program("countryid#usa").unwrap().render(), "countryid ( usa )");
        assert!(geo.leaf_program("nope").is_none());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let no_constants = r#"{"name":"x","types":["t"],"constants":[],"func_mode":"outer_symbol"}"#;
        assert!(matches!(
            parse_domain(no_constants).unwrap_err(),
            DomainError::SchemaViolation { .. }
        ));

        let entity_with_arity = r#"{"name":"x","types":["t"],"constants":[
            {"name":"a","kind":"entity","arity":1,"arg_types":["t"],"result_type":"t"}
        ],"func_mode":"outer_symbol"}"#;
        assert!(matches!(
            parse_domain(entity_with_arity).unwrap_err(),
            DomainError::SchemaViolation { .. }
        ));

        let arity_mismatch = r#"{"name":"x","types":["t"],"constants":[
            {"name":"f","kind":"predicate","arity":2,"arg_types":["t"],"result_type":"t"}
        ],"func_mode":"outer_symbol"}"#;
        assert!(matches!(
            parse_domain(arity_mismatch).unwrap_err(),
            DomainError::SchemaViolation { .. }
        ));

        let dangling_type = r#"{"name":"x","types":["t"],"constants":[
            {"name":"f","kind":"predicate","arity":1,"arg_types":["u"],"result_type":"t"}
        ],"func_mode":"outer_symbol"}"#;
        assert!(matches!(
            parse_domain(dangling_type).unwrap_err(),
            DomainError::DanglingTypeReference { constant, type_name }
                if constant == "f" && type_name == "u"
        ));

        let dangling_func_map = r#"{"name":"x","types":["t"],"constants":[
            {"name":"a","kind":"entity","result_type":"t"}
        ],"func_mode":"explicit_map","func_map":{"b":"t"}}"#;
        assert!(matches!(
            parse_domain(dangling_func_map).unwrap_err(),
            DomainError::DanglingFuncMapEntry { symbol } if symbol == "b"
        ));

        let duplicate = r#"{"name":"x","types":["t"],"constants":[
            {"name":"a","kind":"entity","result_type":"t"},
            {"name":"a","kind":"entity","result_type":"t"}
        ],"func_mode":"outer_symbol"}"#;
        assert!(matches!(
            parse_domain(duplicate).unwrap_err(),
            DomainError::SchemaViolation { .. }
        ));

        let bad_expansion = r#"{"name":"x","types":["t","u"],"constants":[
            {"name":"a","kind":"entity","result_type":"t"},
            {"name":"a#u","kind":"entity","result_type":"u","leaf_expansion":"a"}
        ],"func_mode":"outer_symbol"}"#;
        assert!(matches!(
            parse_domain(bad_expansion).unwrap_err(),
            DomainError::InvalidExpansion { constant, .. } if constant == "a#u"
        ));

        let bad_tie_break = r#"{"name":"x","types":["t"],"constants":[
            {"name":"a","kind":"entity","result_type":"t"}
        ],"func_mode":"outer_symbol","tie_break":"right"}"#;
        assert!(matches!(
            parse_domain(bad_tie_break).unwrap_err(),
            DomainError::SchemaViolation { .. }
        ));
    }
}
