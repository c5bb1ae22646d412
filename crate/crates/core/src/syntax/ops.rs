//! Substitution, alpha-equivalence, well-formedness, and the hygiene check.

use std::collections::BTreeSet;

use crate::error::SyntaxError;
use crate::syntax::ast::*;

// ---- substitution ----

/// Substitutes `repl` for free occurrences of `var` in an assertion.
/// Fails on capture, which hygienic inputs never trigger.
pub fn subst_assertion(a: &Assertion, var: &str, repl: &Expr) -> Result<Assertion, SyntaxError> {
    Ok(match a {
        Assertion::Eq(l, r) => Assertion::Eq(l.subst(var, repl), r.subst(var, repl)),
        Assertion::PointsTo(l, r) => Assertion::PointsTo(l.subst(var, repl), r.subst(var, repl)),
        Assertion::Emp => Assertion::Emp,
        Assertion::True => Assertion::True,
        Assertion::Star(l, r) => Assertion::Star(
            Box::new(subst_assertion(l, var, repl)?),
            Box::new(subst_assertion(r, var, repl)?),
        ),
        Assertion::And(l, r) => Assertion::And(
            Box::new(subst_assertion(l, var, repl)?),
            Box::new(subst_assertion(r, var, repl)?),
        ),
        Assertion::Or(l, r) => Assertion::Or(
            Box::new(subst_assertion(l, var, repl)?),
            Box::new(subst_assertion(r, var, repl)?),
        ),
        Assertion::Not(inner) => Assertion::Not(Box::new(subst_assertion(inner, var, repl)?)),
        Assertion::Forall(v, body) | Assertion::Exists(v, body) => {
            let forall = matches!(a, Assertion::Forall(_, _));
            if v == var {
                return Ok(a.clone());
            }
            if body.free_vars().contains(var) && repl.free_vars().contains(v) {
                return Err(SyntaxError::Capture { binder: v.clone(), expr: repl.to_string() });
            }
            let inner = subst_assertion(body, var, repl)?;
            if forall {
                Assertion::Forall(v.clone(), Box::new(inner))
            } else {
                Assertion::Exists(v.clone(), Box::new(inner))
            }
        }
        Assertion::Named(name, args) => Assertion::Named(
            name.clone(),
            args.iter().map(|e| e.subst(var, repl)).collect(),
        ),
    })
}

/// `theta[E/i]`: substitutes in every embedded assertion, respecting binders.
pub fn subst_type(t: &TypeExpr, var: &str, repl: &Expr) -> Result<TypeExpr, SyntaxError> {
    Ok(match t {
        TypeExpr::Triple(p, q) => TypeExpr::Triple(
            subst_assertion(p, var, repl)?,
            subst_assertion(q, var, repl)?,
        ),
        TypeExpr::Otimes(base, p) => TypeExpr::Otimes(
            Box::new(subst_type(base, var, repl)?),
            subst_assertion(p, var, repl)?,
        ),
        TypeExpr::Pi(v, body) => {
            if v == var {
                return Ok(t.clone());
            }
            if body.free_vars().contains(var) && repl.free_vars().contains(v) {
                return Err(SyntaxError::Capture { binder: v.clone(), expr: repl.to_string() });
            }
            TypeExpr::Pi(v.clone(), Box::new(subst_type(body, var, repl)?))
        }
        TypeExpr::Arrow(a, b) => TypeExpr::Arrow(
            Box::new(subst_type(a, var, repl)?),
            Box::new(subst_type(b, var, repl)?),
        ),
    })
}

// ---- alpha-equivalence ----

#[derive(Default)]
struct AlphaCtx {
    // pairs of corresponding bound names, innermost last
    bound: Vec<(String, String)>,
}

impl AlphaCtx {
    fn vars_match(&self, l: &str, r: &str) -> bool {
        for (a, b) in self.bound.iter().rev() {
            let hit_l = a == l;
            let hit_r = b == r;
            if hit_l || hit_r {
                return hit_l && hit_r;
            }
        }
        l == r
    }

    fn with<T>(&mut self, l: &str, r: &str, f: impl FnOnce(&mut AlphaCtx) -> T) -> T {
        self.bound.push((l.to_string(), r.to_string()));
        let out = f(self);
        self.bound.pop();
        out
    }
}

fn expr_alpha(ctx: &AlphaCtx, l: &Expr, r: &Expr) -> bool {
    match (l, r) {
        (Expr::Var(a), Expr::Var(b)) => ctx.vars_match(a, b),
        (Expr::Zero, Expr::Zero) | (Expr::One, Expr::One) => true,
        (Expr::Add(a, b), Expr::Add(c, d)) | (Expr::Sub(a, b), Expr::Sub(c, d)) => {
            expr_alpha(ctx, a, c) && expr_alpha(ctx, b, d)
        }
        _ => false,
    }
}

fn assertion_alpha(ctx: &mut AlphaCtx, l: &Assertion, r: &Assertion) -> bool {
    match (l, r) {
        (Assertion::Eq(a, b), Assertion::Eq(c, d))
        | (Assertion::PointsTo(a, b), Assertion::PointsTo(c, d)) => {
            expr_alpha(ctx, a, c) && expr_alpha(ctx, b, d)
        }
        (Assertion::Emp, Assertion::Emp) | (Assertion::True, Assertion::True) => true,
        (Assertion::Star(a, b), Assertion::Star(c, d))
        | (Assertion::And(a, b), Assertion::And(c, d))
        | (Assertion::Or(a, b), Assertion::Or(c, d)) => {
            assertion_alpha(ctx, a, c) && assertion_alpha(ctx, b, d)
        }
        (Assertion::Not(a), Assertion::Not(b)) => assertion_alpha(ctx, a, b),
        (Assertion::Forall(v, a), Assertion::Forall(w, b))
        | (Assertion::Exists(v, a), Assertion::Exists(w, b)) => {
            ctx.with(v, w, |ctx| assertion_alpha(ctx, a, b))
        }
        (Assertion::Named(n, args), Assertion::Named(m, brgs)) => {
            n == m
                && args.len() == brgs.len()
                && args.iter().zip(brgs).all(|(a, b)| expr_alpha(ctx, a, b))
        }
        _ => false,
    }
}

fn type_alpha(ctx: &mut AlphaCtx, l: &TypeExpr, r: &TypeExpr) -> bool {
    match (l, r) {
        (TypeExpr::Triple(p, q), TypeExpr::Triple(p2, q2)) => {
            assertion_alpha(ctx, p, p2) && assertion_alpha(ctx, q, q2)
        }
        (TypeExpr::Otimes(a, p), TypeExpr::Otimes(b, q)) => {
            type_alpha(ctx, a, b) && assertion_alpha(ctx, p, q)
        }
        (TypeExpr::Pi(v, a), TypeExpr::Pi(w, b)) => ctx.with(v, w, |ctx| type_alpha(ctx, a, b)),
        (TypeExpr::Arrow(a, b), TypeExpr::Arrow(c, d)) => {
            type_alpha(ctx, a, c) && type_alpha(ctx, b, d)
        }
        _ => false,
    }
}

/// Alpha-equivalence of assertions.
pub fn alpha_eq_assertion(l: &Assertion, r: &Assertion) -> bool {
    assertion_alpha(&mut AlphaCtx::default(), l, r)
}

/// Alpha-equivalence of types.
pub fn alpha_eq_type(l: &TypeExpr, r: &TypeExpr) -> bool {
    type_alpha(&mut AlphaCtx::default(), l, r)
}

// ---- well-formedness ----

/// Lookup table for declared predicates.
#[derive(Debug, Clone, Default)]
pub struct PredTable(pub Vec<PredDef>);

impl PredTable {
    pub fn get(&self, name: &str) -> Option<&PredDef> {
        self.0.iter().find(|d| d.name == name)
    }
}

pub fn well_formed_expr(delta: &BTreeSet<VarId>, e: &Expr) -> Result<(), SyntaxError> {
    match e.free_vars().iter().find(|v| !delta.contains(*v)) {
        Some(v) => Err(SyntaxError::UnboundVar(v.clone())),
        None => Ok(()),
    }
}

pub fn well_formed_assertion(
    delta: &BTreeSet<VarId>,
    a: &Assertion,
    preds: &PredTable,
) -> Result<(), SyntaxError> {
    // arity and declaredness of named predicates, then the fv side condition
    check_named(a, preds)?;
    match a.free_vars().iter().find(|v| !delta.contains(*v)) {
        Some(v) => Err(SyntaxError::UnboundVar(v.clone())),
        None => Ok(()),
    }
}

fn check_named(a: &Assertion, preds: &PredTable) -> Result<(), SyntaxError> {
    match a {
        Assertion::Named(name, args) => {
            let def = preds
                .get(name)
                .ok_or_else(|| SyntaxError::UnknownPredicate(name.clone()))?;
            if def.params.len() != args.len() {
                return Err(SyntaxError::ArityMismatch {
                    name: name.clone(),
                    expected: def.params.len(),
                    got: args.len(),
                });
            }
            Ok(())
        }
        Assertion::Star(l, r)
        | Assertion::And(l, r)
        | Assertion::Or(l, r) => {
            check_named(l, preds)?;
            check_named(r, preds)
        }
        Assertion::Not(inner) => check_named(inner, preds),
        Assertion::Forall(_, body) | Assertion::Exists(_, body) => check_named(body, preds),
        _ => Ok(()),
    }
}

/// The four type-formation rules: assertions well-formed under the ambient
/// variables, and `pi` binding a variable not already in scope.
pub fn well_formed_type(
    delta: &BTreeSet<VarId>,
    t: &TypeExpr,
    preds: &PredTable,
) -> Result<(), SyntaxError> {
    match t {
        TypeExpr::Triple(p, q) => {
            well_formed_assertion(delta, p, preds)?;
            well_formed_assertion(delta, q, preds)
        }
        TypeExpr::Otimes(base, p) => {
            well_formed_type(delta, base, preds)?;
            well_formed_assertion(delta, p, preds)
        }
        TypeExpr::Pi(v, body) => {
            if delta.contains(v) {
                return Err(SyntaxError::PiRebinding(v.clone()));
            }
            let mut inner = delta.clone();
            inner.insert(v.clone());
            well_formed_type(&inner, body, preds)
        }
        TypeExpr::Arrow(a, b) => {
            well_formed_type(delta, a, preds)?;
            well_formed_type(delta, b, preds)
        }
    }
}

/// Positivity of a predicate definition: recursive occurrences of the
/// predicate's own name may not appear under negation. Earlier predicates
/// are already fixed, so negating them is harmless.
pub fn check_monotone(def: &PredDef, preds: &PredTable) -> Result<(), SyntaxError> {
    fn walk(a: &Assertion, positive: bool, def: &PredDef) -> Result<(), SyntaxError> {
        match a {
            Assertion::Named(name, _) if !positive && *name == def.name => {
                Err(SyntaxError::NonMonotone {
                    name: def.name.clone(),
                    at: name.clone(),
                })
            }
            Assertion::Star(l, r) | Assertion::And(l, r) | Assertion::Or(l, r) => {
                walk(l, positive, def)?;
                walk(r, positive, def)
            }
            Assertion::Not(inner) => walk(inner, false, def),
            Assertion::Forall(_, body) | Assertion::Exists(_, body) => walk(body, positive, def),
            _ => Ok(()),
        }
    }
    let _ = preds;
    walk(&def.body, true, def)
}

// ---- hygiene ----

/// Checks the hygiene condition on integer variables of a term: no symbol
/// names two distinct binders, or a binder and a free variable at once.
/// `delta` contributes the free variables of the enclosing judgment.
pub fn check_hygiene(term: &Term, delta: &BTreeSet<VarId>) -> Result<(), SyntaxError> {
    let mut binders: Vec<(String, String)> = Vec::new();
    collect_int_binders(term, &mut binders);
    for (i, (sym, site)) in binders.iter().enumerate() {
        if let Some((_, other)) = binders[..i].iter().find(|(s, _)| s == sym) {
            return Err(SyntaxError::Hygiene {
                symbol: sym.clone(),
                first: other.clone(),
                second: site.clone(),
            });
        }
        if delta.contains(sym) {
            return Err(SyntaxError::Hygiene {
                symbol: sym.clone(),
                first: "as a declared stack variable".to_string(),
                second: site.clone(),
            });
        }
    }
    let free = term.free_int_vars();
    for (sym, site) in &binders {
        if free.contains(sym) {
            return Err(SyntaxError::Hygiene {
                symbol: sym.clone(),
                first: "as a free variable of the term".to_string(),
                second: site.clone(),
            });
        }
    }
    Ok(())
}

fn collect_int_binders(term: &Term, out: &mut Vec<(String, String)>) {
    match term {
        Term::LamInt(i, body) => {
            out.push((i.clone(), format!("by \\{i}.")));
            collect_int_binders(body, out);
        }
        Term::NewIn(i, body) => {
            out.push((i.clone(), format!("by let {i} = new")));
            collect_int_binders(body, out);
        }
        Term::ReadIn(i, e, body) => {
            out.push((i.clone(), format!("by let {i} = [{e}]")));
            collect_int_binders(body, out);
        }
        Term::Lam(_, _, body)
        | Term::Fix(body)
        | Term::AppInt(body, _)
        | Term::Cast(body, _, _)
        | Term::Frame(body, _) => collect_int_binders(body, out),
        Term::App(a, b) | Term::Seq(a, b) | Term::Ifz(_, a, b) => {
            collect_int_binders(a, out);
            collect_int_binders(b, out);
        }
        Term::Var(_) | Term::Skip | Term::Free(_) | Term::Write(_, _) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_assertion_with, parse_type_with};

    fn lst_preds() -> Vec<(String, usize)> {
        vec![("lst".to_string(), 1)]
    }

    fn ty(s: &str) -> TypeExpr {
        parse_type_with(s, &lst_preds()).unwrap()
    }

    fn asrt(s: &str) -> Assertion {
        parse_assertion_with(s, &lst_preds()).unwrap()
    }

    #[test]
    fn fv_examples() {
        let e = asrt("exists j. i |-> j");
        assert_eq!(e.free_vars(), ["i".to_string()].into());
        let t = ty("pi i. {lst(i)}-{emp}");
        assert!(t.free_vars().is_empty());
        let e = Expr::Add(Box::new(Expr::var("i")), Box::new(Expr::One));
        assert_eq!(e.free_vars(), ["i".to_string()].into());
    }

    #[test]
    fn subst_examples() {
        // ({i |-> -}-{emp})[j/i] = {j |-> -}-{emp}
        let t = ty("{i |-> -}-{emp}");
        let s = subst_type(&t, "i", &Expr::var("j")).unwrap();
        assert!(alpha_eq_type(&s, &ty("{j |-> -}-{emp}")));

        // i not free: unchanged
        let t = ty("{emp}-{emp}");
        assert_eq!(subst_type(&t, "i", &Expr::var("j")).unwrap(), t);

        // binder untouched: (pi k. {i |-> k}-{emp})[1+1/i]
        let t = ty("pi k. {i |-> k}-{emp}");
        let s = subst_type(&t, "i", &Expr::numeral(2)).unwrap();
        assert!(alpha_eq_type(&s, &ty("pi k. {(1+1) |-> k}-{emp}")));
    }

    #[test]
    fn subst_commutes_with_free_vars() {
        let cases = [
            ("{i |-> j}-{lst(i)}", "i"),
            ("pi k. {i |-> k}-{emp}", "i"),
            ("{emp}-{emp}", "i"),
            ("{exists k. i |-> k}-{j = 0}", "j"),
        ];
        let repl = Expr::Add(Box::new(Expr::var("a")), Box::new(Expr::var("b")));
        for (src, var) in cases {
            let t = ty(src);
            let s = subst_type(&t, var, &repl).unwrap();
            let mut expected: BTreeSet<String> = t.free_vars();
            if expected.remove(var) {
                expected.extend(repl.free_vars());
            }
            assert_eq!(s.free_vars(), expected, "case {src}");
        }
    }

    #[test]
    fn capture_is_detected() {
        let t = ty("pi k. {i |-> k}-{emp}");
        assert!(matches!(
            subst_type(&t, "i", &Expr::var("k")),
            Err(SyntaxError::Capture { .. })
        ));
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq_type(&ty("pi i. {lst(i)}-{emp}"), &ty("pi k. {lst(k)}-{emp}")));
        assert!(!alpha_eq_type(&ty("pi i. {lst(i)}-{emp}"), &ty("pi k. {emp}-{lst(k)}")));
        assert!(alpha_eq_assertion(&asrt("i |-> -"), &asrt("exists w. i |-> w")));
        assert!(!alpha_eq_assertion(&asrt("i |-> -"), &asrt("exists w. j |-> w")));
    }

    #[test]
    fn well_formedness() {
        let preds = PredTable(vec![PredDef {
            name: "lst".to_string(),
            params: vec!["i".to_string()],
            body: asrt("(i = 0 ^ emp) | (exists j. (i |-> j) * lst(j))"),
        }]);
        let empty = BTreeSet::new();
        assert!(well_formed_type(&empty, &ty("pi i. {lst(i)}-{emp}"), &preds).is_ok());

        let with_i: BTreeSet<String> = ["i".to_string()].into();
        assert!(matches!(
            well_formed_type(&with_i, &ty("pi i. {emp}-{emp}"), &preds),
            Err(SyntaxError::PiRebinding(_))
        ));

        let jl: BTreeSet<String> = ["j".to_string(), "l".to_string()].into();
        assert!(well_formed_type(&jl, &ty("{j |-> -}-{emp}"), &preds).is_ok());
        assert!(well_formed_type(&empty, &ty("{j |-> -}-{emp}"), &preds).is_err());

        // monotone in delta
        let mut bigger = jl.clone();
        bigger.insert("k".to_string());
        assert!(well_formed_type(&bigger, &ty("{j |-> -}-{emp}"), &preds).is_ok());
    }

    #[test]
    fn arity_mismatch() {
        let preds = PredTable(vec![PredDef {
            name: "lst".to_string(),
            params: vec!["i".to_string()],
            body: Assertion::Emp,
        }]);
        let delta: BTreeSet<String> = ["i".to_string(), "j".to_string()].into();
        let bad = Assertion::Named("lst".to_string(), vec![Expr::var("i"), Expr::var("j")]);
        assert!(matches!(
            well_formed_assertion(&delta, &bad, &preds),
            Err(SyntaxError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn monotonicity_gate() {
        let preds = PredTable::default();
        let ok = PredDef {
            name: "p".into(),
            params: vec!["i".into()],
            body: asrt("(i = 0 ^ emp) | ~(i = 1)"),
        };
        assert!(check_monotone(&ok, &preds).is_ok());
        let bad = PredDef {
            name: "p".into(),
            params: vec!["i".into()],
            body: Assertion::Not(Box::new(Assertion::Named("p".into(), vec![Expr::var("i")]))),
        };
        assert!(check_monotone(&bad, &preds).is_err());
    }

    #[test]
    fn hygiene_examples() {
        use crate::syntax::parser::parse_program;
        // \i. skip with free j is fine
        let p = parse_program("vars j; goal (\\i. skip) : pi i. {j |-> -}-{j |-> -};").unwrap();
        assert!(check_hygiene(&p.goal_term, &p.vars).is_ok());

        // double binder
        let p = parse_program("goal (\\i. (\\i. skip)(0)) : pi i. {emp}-{emp};").unwrap();
        assert!(matches!(
            check_hygiene(&p.goal_term, &p.vars),
            Err(SyntaxError::Hygiene { symbol, .. }) if symbol == "i"
        ));

        // binder clashing with a declared stack variable
        let p = parse_program("vars i; goal let i = new in skip : {emp}-{emp};").unwrap();
        assert!(check_hygiene(&p.goal_term, &p.vars).is_err());

        // distinct read binder and stack variable are fine
        let p = parse_program(
            "vars i; ctx f : pi k. {emp}-{emp}; goal let j = [i] in f(j) : {i |-> -}-{emp};",
        )
        .unwrap();
        assert!(check_hygiene(&p.goal_term, &p.vars).is_ok());
    }
}
