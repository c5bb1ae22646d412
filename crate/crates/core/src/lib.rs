//! A checker, interpreter, and semantic-property harness for a small
//! higher-order imperative language with heap operations and Hoare-triple
//! types in the style of separation logic.
//!
//! The crate is organized around the pipeline:
//!
//! 1. [`syntax`]: parse a program file into ASTs, check well-formedness and
//!    the hygiene condition on integer variables.
//! 2. [`assertions`]: evaluate assertions to heap sets over a bounded
//!    [`heap::Universe`], decide entailment and precision, and compute
//!    least fixed points of inductive predicates.
//! 3. [`subtype`]: decide instances of the subtype preorder, including
//!    invariant-extension normalization, frame axioms, and Consequence.
//! 4. [`typecheck`]: check annotated judgments against the typing rules,
//!    producing derivations.
//! 5. [`interp`]: interpret derivations as nondeterministic heap
//!    transformers with an explicit `wrong` outcome.
//! 6. [`harness`]: executable instance checks for the semantic structure:
//!    locality laws of commands, Hoare-triple pers, the conjunction
//!    combinator, coherence, and triple-satisfaction soundness.
//!
//! Quantified checks are discharged over the bounded universe, so every
//! "entailment" here is bounded-model entailment; reports label it as such.

pub mod assertions;
pub mod error;
pub mod harness;
pub mod heap;
pub mod interp;
pub mod pipeline;
pub mod subtype;
pub mod syntax;
pub mod typecheck;
