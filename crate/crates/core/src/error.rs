//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeapError {
    #[error("heap locations must be positive, got {0}")]
    NonPositiveLocation(i64),
    #[error("duplicate location {0} in heap literal")]
    DuplicateLocation(i64),
    #[error("cannot combine heaps: location {0} is allocated in both")]
    OverlappingCombine(i64),
    #[error("malformed literal: {0:?}")]
    BadLiteral(String),
    #[error("invalid universe: {0}")]
    BadUniverse(String),
    #[error("enumeration needs {need} elements, exceeding the cap of {cap}")]
    CapExceeded { need: u64, cap: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("unbound variable {0}")]
    UnboundVar(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("predicate {name} expects {expected} arguments, got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("pi binds {0}, which is already in scope")]
    PiRebinding(String),
    #[error("substituting under binder {binder} would capture a variable of {expr}")]
    Capture { binder: String, expr: String },
    #[error("hygiene violation on {symbol}: bound {first} and again {second}")]
    Hygiene { symbol: String, first: String, second: String },
    #[error("predicate {name} recurses under negation at {at}")]
    NonMonotone { name: String, at: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubtypeError {
    #[error("precision gate: {0} is not precise under the ambient variables")]
    ImpreciseFrame(String),
    #[error("consequence failed: {side} entailment does not hold; witness env [{env}], heap {heap}")]
    ConsequenceFailed { side: String, env: String, heap: String },
    #[error("structural mismatch between {left} and {right}")]
    StructuralMismatch { left: String, right: String },
    #[error("script step {step} does not apply: {reason}")]
    ScriptMismatch { step: String, reason: String },
    #[error(transparent)]
    Heap(#[from] HeapError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("term {term} does not match goal type {goal}: {reason}")]
    ShapeMismatch { term: String, goal: String, reason: String },
    #[error("cannot infer a type for {term}; add a cast annotation")]
    NotInferable { term: String },
    #[error("sequencing needs a midcondition: annotate the left operand of `;` with a cast")]
    MidconditionRequired,
    #[error("side condition violated: {0}")]
    SideCondition(String),
    #[error("conjunction premises type different terms")]
    ConjunctionTermMismatch,
    #[error("conjunction requires precise mode; the unrestricted system rejects it")]
    ConjunctionModeViolation,
    #[error("conjunction premises must be triple types")]
    ConjunctionShape,
    #[error("subtyping: {0}")]
    Subtype(#[from] SubtypeError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Heap(#[from] HeapError),
}
