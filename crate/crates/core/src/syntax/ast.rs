//! Abstract syntax for expressions, assertions, types, terms, and programs.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Integer (stack) variable name.
pub type VarId = String;
/// Term identifier name.
pub type TermId = String;

/// Integer expressions: `E ::= i | 0 | 1 | E+E | E-E`.
///
/// Numeric literals in source are sugar for sums of `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Var(VarId),
    Zero,
    One,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Canonical encoding of a nonnegative literal: `0`, `1`, `(..(1+1)..)+1`.
    pub fn numeral(n: u64) -> Expr {
        match n {
            0 => Expr::Zero,
            1 => Expr::One,
            _ => Expr::Add(Box::new(Expr::numeral(n - 1)), Box::new(Expr::One)),
        }
    }

    /// Inverse of [`Expr::numeral`], when the expression has exactly that shape.
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            Expr::Zero => Some(0),
            Expr::One => Some(1),
            Expr::Add(a, b) => match (a.as_numeral(), &**b) {
                (Some(n), Expr::One) if n >= 1 => Some(n + 1),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn free_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Zero | Expr::One => {}
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
        }
    }

    pub fn subst(&self, var: &str, repl: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == var => repl.clone(),
            Expr::Var(_) | Expr::Zero | Expr::One => self.clone(),
            Expr::Add(a, b) => Expr::Add(Box::new(a.subst(var, repl)), Box::new(b.subst(var, repl))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.subst(var, repl)), Box::new(b.subst(var, repl))),
        }
    }
}

/// Assertions of classical separation logic plus named inductive predicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assertion {
    Eq(Expr, Expr),
    PointsTo(Expr, Expr),
    Emp,
    Star(Box<Assertion>, Box<Assertion>),
    True,
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Not(Box<Assertion>),
    Forall(VarId, Box<Assertion>),
    Exists(VarId, Box<Assertion>),
    /// Call to a declared inductive predicate.
    Named(String, Vec<Expr>),
}

impl Assertion {
    /// `E |-> -`, i.e. `exists k. E |-> k` for a generated `k` not free in `E`.
    pub fn points_to_any(e: Expr, fresh: VarId) -> Assertion {
        debug_assert!(!e.free_vars().contains(&fresh));
        Assertion::Exists(fresh.clone(), Box::new(Assertion::PointsTo(e, Expr::Var(fresh))))
    }

    /// Recognizes the desugared `E |-> -` pattern with a generated binder.
    pub fn as_points_to_any(&self) -> Option<&Expr> {
        match self {
            Assertion::Exists(v, body) if v.starts_with('$') => match &**body {
                Assertion::PointsTo(e, Expr::Var(w)) if w == v && !e.free_vars().contains(v) => {
                    Some(e)
                }
                _ => None,
            },
            _ => None,
        }
    }

    pub fn star(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Star(Box::new(a), Box::new(b))
    }

    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        Assertion::And(Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Assertion::Eq(a, b) | Assertion::PointsTo(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Assertion::Emp | Assertion::True => {}
            Assertion::Star(a, b) | Assertion::And(a, b) | Assertion::Or(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Assertion::Not(a) => a.collect_free(out),
            Assertion::Forall(v, a) | Assertion::Exists(v, a) => {
                let mut inner = BTreeSet::new();
                a.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
            Assertion::Named(_, args) => {
                for e in args {
                    e.collect_free(out);
                }
            }
        }
    }
}

/// Types: Hoare triples, invariant extension, dependent products, arrows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypeExpr {
    Triple(Assertion, Assertion),
    Otimes(Box<TypeExpr>, Assertion),
    Pi(VarId, Box<TypeExpr>),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn triple(pre: Assertion, post: Assertion) -> TypeExpr {
        TypeExpr::Triple(pre, post)
    }

    pub fn otimes(t: TypeExpr, p: Assertion) -> TypeExpr {
        TypeExpr::Otimes(Box::new(t), p)
    }

    pub fn pi(v: &str, t: TypeExpr) -> TypeExpr {
        TypeExpr::Pi(v.to_string(), Box::new(t))
    }

    pub fn arrow(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<VarId>) {
        match self {
            TypeExpr::Triple(p, q) => {
                p.collect_free(out);
                q.collect_free(out);
            }
            TypeExpr::Otimes(t, p) => {
                t.collect_free(out);
                p.collect_free(out);
            }
            TypeExpr::Pi(v, t) => {
                let mut inner = BTreeSet::new();
                t.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
            TypeExpr::Arrow(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
        }
    }
}

/// A step in a subtyping script, mirroring the rules of the subtype relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScriptStep {
    Refl,
    Conseq,
    /// Chain of steps; every step except the last must determine its output.
    Seq(Vec<ScriptStep>),
    Trans(TypeExpr, Box<ScriptStep>, Box<ScriptStep>),
    Arrow(Box<ScriptStep>, Box<ScriptStep>),
    PiStruct(Box<ScriptStep>),
    OtimesStruct(Box<ScriptStep>),
    FrameAx(Assertion),
    DistTriple,
    DistPi,
    DistOtimes,
    DistArrow,
}

/// Pre-terms plus the two derivation annotations `cast` and `frame`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    Var(TermId),
    /// `\x : theta. M`
    Lam(TermId, TypeExpr, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `\i. M`
    LamInt(VarId, Box<Term>),
    /// `M (E)`
    AppInt(Box<Term>, Expr),
    Fix(Box<Term>),
    Ifz(Expr, Box<Term>, Box<Term>),
    Skip,
    Seq(Box<Term>, Box<Term>),
    /// `let i = new in M`
    NewIn(VarId, Box<Term>),
    Free(Expr),
    /// `[E] := E'`
    Write(Expr, Expr),
    /// `let i = [E] in M`
    ReadIn(VarId, Expr, Box<Term>),
    /// `(M : theta)`, optionally `(M : theta by script)`
    Cast(Box<Term>, TypeExpr, Option<ScriptStep>),
    /// `(M @ P)`
    Frame(Box<Term>, Assertion),
}

impl Term {
    /// Free integer variables of the term, including those of embedded
    /// assertions and types.
    pub fn free_int_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_free_int(&mut out);
        out
    }

    fn collect_free_int(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Term::Var(_) | Term::Skip => {}
            Term::Lam(_, ty, m) => {
                ty.collect_free(out);
                m.collect_free_int(out);
            }
            Term::App(a, b) | Term::Seq(a, b) => {
                a.collect_free_int(out);
                b.collect_free_int(out);
            }
            Term::LamInt(i, m) | Term::NewIn(i, m) => {
                let mut inner = BTreeSet::new();
                m.collect_free_int(&mut inner);
                inner.remove(i);
                out.extend(inner);
            }
            Term::AppInt(m, e) => {
                m.collect_free_int(out);
                e.collect_free(out);
            }
            Term::Fix(m) => m.collect_free_int(out),
            Term::Ifz(e, a, b) => {
                e.collect_free(out);
                a.collect_free_int(out);
                b.collect_free_int(out);
            }
            Term::Free(e) => e.collect_free(out),
            Term::Write(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Term::ReadIn(i, e, m) => {
                e.collect_free(out);
                let mut inner = BTreeSet::new();
                m.collect_free_int(&mut inner);
                inner.remove(i);
                out.extend(inner);
            }
            Term::Cast(m, ty, _) => {
                m.collect_free_int(out);
                ty.collect_free(out);
            }
            Term::Frame(m, p) => {
                m.collect_free_int(out);
                p.collect_free(out);
            }
        }
    }

    /// Free term identifiers.
    pub fn free_term_vars(&self) -> BTreeSet<TermId> {
        let mut out = BTreeSet::new();
        self.collect_free_term(&mut out);
        out
    }

    fn collect_free_term(&self, out: &mut BTreeSet<TermId>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Skip | Term::Free(_) | Term::Write(_, _) => {}
            Term::Lam(x, _, m) => {
                let mut inner = BTreeSet::new();
                m.collect_free_term(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
            Term::App(a, b) | Term::Seq(a, b) => {
                a.collect_free_term(out);
                b.collect_free_term(out);
            }
            Term::LamInt(_, m)
            | Term::NewIn(_, m)
            | Term::ReadIn(_, _, m)
            | Term::Fix(m)
            | Term::AppInt(m, _)
            | Term::Cast(m, _, _)
            | Term::Frame(m, _) => m.collect_free_term(out),
            Term::Ifz(_, a, b) => {
                a.collect_free_term(out);
                b.collect_free_term(out);
            }
        }
    }
}

/// Declaration of an inductive predicate, e.g. a linked-list predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredDef {
    pub name: String,
    pub params: Vec<VarId>,
    pub body: Assertion,
}

/// Ordered type context `x1 : theta1, ..., xn : thetan`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeContext(pub Vec<(TermId, TypeExpr)>);

impl TypeContext {
    pub fn lookup(&self, x: &str) -> Option<&TypeExpr> {
        self.0.iter().rev().find(|(n, _)| n == x).map(|(_, t)| t)
    }

    pub fn extended(&self, x: &str, t: TypeExpr) -> TypeContext {
        let mut v = self.0.clone();
        v.push((x.to_string(), t));
        TypeContext(v)
    }

    pub fn free_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        for (_, t) in &self.0 {
            out.extend(t.free_vars());
        }
        out
    }
}

/// A source program: predicate declarations, the stack-variable set, the
/// type context, and one goal judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub preds: Vec<PredDef>,
    pub vars: BTreeSet<VarId>,
    pub ctx: TypeContext,
    pub goal_term: Term,
    pub goal_type: TypeExpr,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::pretty::expr_to_string(self))
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::pretty::assertion_to_string(self))
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::pretty::type_to_string(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::pretty::term_to_string(self))
    }
}
