//! Syntax: ASTs, parser, printer, and the structural operations on them.

pub mod ast;
pub mod ops;
pub mod parser;
pub mod pretty;

pub use ast::{
    Assertion, Expr, PredDef, Program, ScriptStep, Term, TermId, TypeContext, TypeExpr, VarId,
};
pub use ops::{
    alpha_eq_assertion, alpha_eq_type, check_hygiene, check_monotone, subst_assertion, subst_type,
    well_formed_assertion, well_formed_expr, well_formed_type, PredTable,
};
pub use parser::{parse_assertion_with, parse_program, parse_type_with};
pub use pretty::{
    assertion_to_string, expr_to_string, program_to_string, script_to_string, term_to_string,
    type_to_string,
};
