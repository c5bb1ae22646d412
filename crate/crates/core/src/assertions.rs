//! Assertion semantics over a bounded universe: heap-set evaluation,
//! entailment, least fixed points of inductive predicates, and precision.
//!
//! Two evaluation paths exist on purpose. [`SemCtx::eval`] returns the set
//! of *enumerable* heaps satisfying an assertion (points-to facts outside
//! the universe denote the empty set), which keeps quantified checks
//! finite. [`SemCtx::holds`] decides satisfaction for one *concrete* heap
//! without clipping, which keeps triple-satisfaction checks on interpreter
//! outputs faithful. The two paths agree on enumerable heaps.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{HeapError, SyntaxError};
use crate::heap::{Env, Heap, Universe, Val};
use crate::syntax::ast::{Assertion, Expr, PredDef, VarId};
use crate::syntax::ops::{check_monotone, PredTable};

/// An explicit finite set of heaps, tagged with the universe it was
/// computed under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pred {
    pub heaps: BTreeSet<Heap>,
    pub universe: Universe,
}

impl Pred {
    pub fn empty(u: Universe) -> Pred {
        Pred { heaps: BTreeSet::new(), universe: u }
    }

    pub fn emp(u: Universe) -> Pred {
        Pred { heaps: [Heap::empty()].into(), universe: u }
    }

    pub fn from_heaps(heaps: impl IntoIterator<Item = Heap>, u: Universe) -> Pred {
        Pred { heaps: heaps.into_iter().collect(), universe: u }
    }

    pub fn contains(&self, h: &Heap) -> bool {
        self.heaps.contains(h)
    }

    pub fn is_subset(&self, other: &Pred) -> bool {
        self.heaps.is_subset(&other.heaps)
    }

    /// Separating conjunction: all disjoint combinations.
    pub fn star(&self, other: &Pred) -> Pred {
        assert_eq!(self.universe, other.universe, "universe mismatch in star");
        let mut out = BTreeSet::new();
        for h1 in &self.heaps {
            for h2 in &other.heaps {
                if h1.disjoint(h2) {
                    out.insert(h1.combine(h2).expect("disjoint"));
                }
            }
        }
        Pred { heaps: out, universe: self.universe }
    }

    pub fn intersect(&self, other: &Pred) -> Pred {
        assert_eq!(self.universe, other.universe);
        Pred {
            heaps: self.heaps.intersection(&other.heaps).cloned().collect(),
            universe: self.universe,
        }
    }

    pub fn union(&self, other: &Pred) -> Pred {
        assert_eq!(self.universe, other.universe);
        Pred {
            heaps: self.heaps.union(&other.heaps).cloned().collect(),
            universe: self.universe,
        }
    }
}

/// Exact integer evaluation of expressions.
pub fn eval_expr(e: &Expr, env: &Env) -> Result<Val, SyntaxError> {
    Ok(match e {
        Expr::Var(v) => env
            .get(v)
            .ok_or_else(|| SyntaxError::UnboundVar(v.clone()))?,
        Expr::Zero => 0,
        Expr::One => 1,
        Expr::Add(a, b) => eval_expr(a, env)?
            .checked_add(eval_expr(b, env)?)
            .expect("expression arithmetic overflow"),
        Expr::Sub(a, b) => eval_expr(a, env)?
            .checked_sub(eval_expr(b, env)?)
            .expect("expression arithmetic overflow"),
    })
}

/// Fully evaluated denotation of one inductive predicate: a heap set for
/// every argument tuple in the bounded value range.
#[derive(Debug, Clone)]
pub struct PredDen {
    pub arity: usize,
    table: BTreeMap<Vec<Val>, BTreeSet<Heap>>,
}

impl PredDen {
    pub fn at(&self, args: &[Val]) -> BTreeSet<Heap> {
        self.table.get(args).cloned().unwrap_or_default()
    }
}

/// Map from predicate name to its least-fixed-point denotation.
#[derive(Debug, Clone, Default)]
pub struct PredEnv(BTreeMap<String, PredDen>);

impl PredEnv {
    pub fn get(&self, name: &str) -> Option<&PredDen> {
        self.0.get(name)
    }
}

/// Evaluation context: the universe, its enumerated heaps, the declared
/// predicates, and their evaluated denotations.
pub struct SemCtx {
    pub universe: Universe,
    pub all_heaps: Vec<Heap>,
    pub preds: PredTable,
    pub pred_env: PredEnv,
}

impl SemCtx {
    /// Builds a context, computing the least fixed point of every declared
    /// predicate by Kleene iteration from the empty denotation.
    pub fn new(universe: Universe, preds: &PredTable) -> Result<SemCtx, SemError> {
        universe.validate()?;
        let all_heaps = universe.enumerate_heaps()?;
        let mut ctx = SemCtx {
            universe,
            all_heaps,
            preds: PredTable::default(),
            pred_env: PredEnv::default(),
        };
        for def in &preds.0 {
            check_monotone(def, &ctx.preds)?;
            let den = ctx.lfp_pred(def)?;
            ctx.pred_env.0.insert(def.name.clone(), den);
            ctx.preds.0.push(def.clone());
        }
        Ok(ctx)
    }

    fn arg_tuples(&self, arity: usize) -> Vec<Vec<Val>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            let mut next = Vec::new();
            for tuple in &out {
                for v in self.universe.vals() {
                    let mut t = tuple.clone();
                    t.push(v);
                    next.push(t);
                }
            }
            out = next;
        }
        out
    }

    /// Least fixed point of one definition. Earlier predicates are already
    /// resolved in the context; the recursive name is iterated.
    fn lfp_pred(&self, def: &PredDef) -> Result<PredDen, SemError> {
        let tuples = self.arg_tuples(def.params.len());
        let mut current = PredDen {
            arity: def.params.len(),
            table: tuples.iter().map(|t| (t.clone(), BTreeSet::new())).collect(),
        };
        // The chain strictly grows somewhere each round until the fixpoint,
        // so |heaps| * |tuples| + 1 rounds always suffice.
        let max_rounds = self.all_heaps.len() * tuples.len() + 1;
        for _ in 0..=max_rounds {
            let mut next = PredDen { arity: current.arity, table: BTreeMap::new() };
            for tuple in &tuples {
                let env = Env::from_pairs(
                    def.params.iter().cloned().zip(tuple.iter().copied()),
                );
                let set = self.eval_with_self(&def.body, &env, Some((&def.name, &current)))?;
                next.table.insert(tuple.clone(), set);
            }
            let done = next.table == current.table;
            current = next;
            if done {
                return Ok(current);
            }
        }
        unreachable!("Kleene iteration exceeded the finite lattice height");
    }

    /// The set of enumerable heaps satisfying the assertion.
    pub fn eval(&self, a: &Assertion, env: &Env) -> Result<Pred, SemError> {
        let set = self.eval_with_self(a, env, None)?;
        Ok(Pred { heaps: set, universe: self.universe })
    }

    fn eval_with_self(
        &self,
        a: &Assertion,
        env: &Env,
        rec: Option<(&str, &PredDen)>,
    ) -> Result<BTreeSet<Heap>, SemError> {
        Ok(match a {
            Assertion::Eq(l, r) => {
                if eval_expr(l, env)? == eval_expr(r, env)? {
                    self.all_heaps.iter().cloned().collect()
                } else {
                    BTreeSet::new()
                }
            }
            Assertion::PointsTo(l, r) => {
                let m = eval_expr(l, env)?;
                let v = eval_expr(r, env)?;
                if m <= 0 {
                    BTreeSet::new()
                } else if m <= self.universe.loc_max
                    && v >= self.universe.val_min
                    && v <= self.universe.val_max
                {
                    [Heap::singleton(m, v)].into()
                } else {
                    // a cell outside the universe denotes the empty set here
                    BTreeSet::new()
                }
            }
            Assertion::Emp => [Heap::empty()].into(),
            Assertion::True => self.all_heaps.iter().cloned().collect(),
            Assertion::Star(p, q) => {
                let ps = self.eval_with_self(p, env, rec)?;
                let qs = self.eval_with_self(q, env, rec)?;
                let mut out = BTreeSet::new();
                for h1 in &ps {
                    for h2 in &qs {
                        if h1.disjoint(h2) {
                            out.insert(h1.combine(h2).expect("disjoint"));
                        }
                    }
                }
                out
            }
            Assertion::And(p, q) => {
                let ps = self.eval_with_self(p, env, rec)?;
                let qs = self.eval_with_self(q, env, rec)?;
                ps.intersection(&qs).cloned().collect()
            }
            Assertion::Or(p, q) => {
                let ps = self.eval_with_self(p, env, rec)?;
                let qs = self.eval_with_self(q, env, rec)?;
                ps.union(&qs).cloned().collect()
            }
            Assertion::Not(p) => {
                let ps = self.eval_with_self(p, env, rec)?;
                self.all_heaps
                    .iter()
                    .filter(|h| !ps.contains(*h))
                    .cloned()
                    .collect()
            }
            Assertion::Forall(v, body) => {
                let mut acc: Option<BTreeSet<Heap>> = None;
                for n in self.universe.vals() {
                    let s = self.eval_with_self(body, &env.bind(v, n), rec)?;
                    acc = Some(match acc {
                        None => s,
                        Some(prev) => prev.intersection(&s).cloned().collect(),
                    });
                }
                acc.unwrap_or_else(|| self.all_heaps.iter().cloned().collect())
            }
            Assertion::Exists(v, body) => {
                let mut acc = BTreeSet::new();
                for n in self.universe.vals() {
                    acc.extend(self.eval_with_self(body, &env.bind(v, n), rec)?);
                }
                acc
            }
            Assertion::Named(name, args) => {
                let vals: Vec<Val> = args
                    .iter()
                    .map(|e| eval_expr(e, env))
                    .collect::<Result<_, _>>()?;
                match rec {
                    Some((rec_name, den)) if rec_name == name => den.at(&vals),
                    _ => self
                        .pred_env
                        .get(name)
                        .ok_or_else(|| SyntaxError::UnknownPredicate(name.clone()))?
                        .at(&vals),
                }
            }
        })
    }

    /// Satisfaction of an assertion by one concrete heap, without clipping
    /// the heap to the universe. Quantifiers still range over the bounded
    /// value interval, and named predicates are decided by their bounded
    /// denotations (heaps outside the enumerable space never satisfy them).
    pub fn holds(&self, a: &Assertion, env: &Env, h: &Heap) -> Result<bool, SemError> {
        Ok(match a {
            Assertion::Eq(l, r) => eval_expr(l, env)? == eval_expr(r, env)?,
            Assertion::PointsTo(l, r) => {
                let m = eval_expr(l, env)?;
                let v = eval_expr(r, env)?;
                m > 0 && *h == Heap::singleton(m, v)
            }
            Assertion::Emp => h.is_empty(),
            Assertion::True => true,
            Assertion::Star(p, q) => {
                for (h1, h2) in h.splits() {
                    if self.holds(p, env, &h1)? && self.holds(q, env, &h2)? {
                        return Ok(true);
                    }
                }
                false
            }
            Assertion::And(p, q) => self.holds(p, env, h)? && self.holds(q, env, h)?,
            Assertion::Or(p, q) => self.holds(p, env, h)? || self.holds(q, env, h)?,
            Assertion::Not(p) => !self.holds(p, env, h)?,
            Assertion::Forall(v, body) => {
                for n in self.universe.vals() {
                    if !self.holds(body, &env.bind(v, n), h)? {
                        return Ok(false);
                    }
                }
                true
            }
            Assertion::Exists(v, body) => {
                for n in self.universe.vals() {
                    if self.holds(body, &env.bind(v, n), h)? {
                        return Ok(true);
                    }
                }
                false
            }
            Assertion::Named(name, args) => {
                let vals: Vec<Val> = args
                    .iter()
                    .map(|e| eval_expr(e, env))
                    .collect::<Result<_, _>>()?;
                if !h.within(&self.universe) {
                    return Ok(false);
                }
                self.pred_env
                    .get(name)
                    .ok_or_else(|| SyntaxError::UnknownPredicate(name.clone()))?
                    .at(&vals)
                    .contains(h)
            }
        })
    }

    /// Bounded-model entailment: `[[P]] ⊆ [[P2]]` for every environment of
    /// `delta`. Returns a witness when it fails.
    pub fn entails(
        &self,
        delta: &BTreeSet<VarId>,
        p: &Assertion,
        p2: &Assertion,
    ) -> Result<Option<EntailWitness>, SemError> {
        for env in self.universe.enumerate_envs(delta)? {
            let lhs = self.eval(p, &env)?;
            let rhs = self.eval(p2, &env)?;
            if let Some(h) = lhs.heaps.iter().find(|h| !rhs.contains(h)) {
                return Ok(Some(EntailWitness { env, heap: h.clone() }));
            }
        }
        Ok(None)
    }

    /// Precision: at most one subheap of any heap satisfies the assertion,
    /// for every environment. Returns the two-subheap witness when imprecise.
    pub fn precision_witness(
        &self,
        delta: &BTreeSet<VarId>,
        p: &Assertion,
    ) -> Result<Option<PrecisionWitness>, SemError> {
        for env in self.universe.enumerate_envs(delta)? {
            let den = self.eval(p, &env)?;
            for h in &self.all_heaps {
                let mut found: Option<Heap> = None;
                for sub in h.subheaps() {
                    if den.contains(&sub) {
                        if let Some(first) = found {
                            return Ok(Some(PrecisionWitness {
                                env,
                                heap: h.clone(),
                                sub1: first,
                                sub2: sub,
                            }));
                        }
                        found = Some(sub);
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn is_precise(
        &self,
        delta: &BTreeSet<VarId>,
        p: &Assertion,
    ) -> Result<bool, SemError> {
        Ok(self.precision_witness(delta, p)?.is_none())
    }

    pub fn true_pred(&self) -> Pred {
        Pred {
            heaps: self.all_heaps.iter().cloned().collect(),
            universe: self.universe,
        }
    }

    pub fn emp_pred(&self) -> Pred {
        Pred::emp(self.universe)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailWitness {
    pub env: Env,
    pub heap: Heap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionWitness {
    pub env: Env,
    pub heap: Heap,
    pub sub1: Heap,
    pub sub2: Heap,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemError {
    #[error(transparent)]
    Heap(#[from] HeapError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse_assertion_with;
    use crate::syntax::PredTable;

    fn lst_def() -> PredDef {
        PredDef {
            name: "lst".to_string(),
            params: vec!["i".to_string()],
            body: parse_assertion_with(
                "(i = 0 ^ emp) | (exists j. (i |-> j) * lst(j))",
                &[("lst".to_string(), 1)],
            )
            .unwrap(),
        }
    }

    fn inv_def() -> PredDef {
        PredDef {
            name: "inv".to_string(),
            params: vec!["l".to_string()],
            body: parse_assertion_with(
                "exists l'. (l |-> l') * lst(l')",
                &[("lst".to_string(), 1), ("inv".to_string(), 1)],
            )
            .unwrap(),
        }
    }

    fn ctx(loc_max: i64, val_max: i64) -> SemCtx {
        let u = Universe { loc_max, val_min: 0, val_max, fix_budget: 8, cap: 1 << 22 };
        SemCtx::new(u, &PredTable(vec![lst_def(), inv_def()])).unwrap()
    }

    fn asrt(s: &str) -> Assertion {
        parse_assertion_with(s, &[("lst".to_string(), 1), ("inv".to_string(), 1)]).unwrap()
    }

    fn h(pairs: &[(i64, i64)]) -> Heap {
        Heap::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn expr_eval() {
        let env = Env::from_pairs([("i".to_string(), 2), ("j".to_string(), 5)]);
        assert_eq!(eval_expr(&Expr::Zero, &env).unwrap(), 0);
        assert_eq!(eval_expr(&asrt_expr("i+1"), &env).unwrap(), 3);
        assert_eq!(eval_expr(&asrt_expr("j-i"), &env).unwrap(), 3);
        assert!(eval_expr(&Expr::var("k"), &env).is_err());
    }

    fn asrt_expr(s: &str) -> Expr {
        // parse through an assertion and take the left expression
        match parse_assertion_with(&format!("{s} = 0"), &[]).unwrap() {
            Assertion::Eq(e, _) => e,
            _ => unreachable!(),
        }
    }

    #[test]
    fn eval_base_cases() {
        let c = ctx(2, 2);
        let env = Env::from_pairs([("i".to_string(), 0)]);
        assert_eq!(c.eval(&Assertion::Emp, &env).unwrap().heaps, [Heap::empty()].into());
        // positivity guard
        assert!(c.eval(&asrt("i |-> 5"), &env).unwrap().heaps.is_empty());
        // star of two singletons
        let env = Env::empty();
        let p = c.eval(&asrt("(1 |-> 1) * (2 |-> 0)"), &env).unwrap();
        assert_eq!(p.heaps, [h(&[(1, 1), (2, 0)])].into());
    }

    #[test]
    fn star_laws_small() {
        let c = ctx(2, 1);
        let env = Env::empty();
        let preds = [
            c.eval(&Assertion::Emp, &env).unwrap(),
            c.eval(&asrt("1 |-> 0"), &env).unwrap(),
            c.eval(&asrt("true"), &env).unwrap(),
            c.eval(&asrt("1 |-> -"), &env).unwrap(),
        ];
        let empp = c.emp_pred();
        for p in &preds {
            assert_eq!(empp.star(p), *p);
            assert_eq!(p.star(&empp), *p);
            assert!(p.is_subset(&p.star(&c.true_pred())));
            for q in &preds {
                assert_eq!(p.star(q), q.star(p));
                for r in &preds {
                    assert_eq!(p.star(q).star(r), p.star(&q.star(r)));
                }
            }
        }
    }

    #[test]
    fn lst_fixpoint() {
        let c = ctx(2, 2);
        let den = c.pred_env.get("lst").unwrap();
        assert_eq!(den.at(&[0]), [Heap::empty()].into());
        // two unfoldings at argument 1 over locMax=2, vals 0..2
        assert_eq!(den.at(&[1]), [h(&[(1, 0)]), h(&[(1, 2), (2, 0)])].into());
    }

    #[test]
    fn inv_contains_singleton_list() {
        let c = ctx(2, 2);
        let env = Env::from_pairs([("l".to_string(), 1)]);
        let p = c.eval(&asrt("inv(l)"), &env).unwrap();
        assert!(p.contains(&h(&[(1, 0)])));
    }

    #[test]
    fn non_monotone_rejected() {
        let bad = PredDef {
            name: "bad".to_string(),
            params: vec!["i".to_string()],
            body: Assertion::Not(Box::new(Assertion::Named(
                "bad".to_string(),
                vec![Expr::var("i")],
            ))),
        };
        let u = Universe { loc_max: 1, val_min: 0, val_max: 1, fix_budget: 4, cap: 1 << 20 };
        assert!(SemCtx::new(u, &PredTable(vec![bad])).is_err());
    }

    #[test]
    fn entailment() {
        let c = ctx(2, 2);
        let delta: BTreeSet<String> = ["i".to_string()].into();
        // reflexive
        assert!(c.entails(&delta, &asrt("lst(i)"), &asrt("lst(i)")).unwrap().is_none());
        // i |-> 0 entails i |-> -
        assert!(c.entails(&delta, &asrt("i |-> 0"), &asrt("i |-> -")).unwrap().is_none());
        // converse fails with a witness
        let w = c.entails(&delta, &asrt("i |-> -"), &asrt("i |-> 0")).unwrap();
        assert!(w.is_some());
        // the list-unfold equivalence, both directions
        let delta: BTreeSet<String> = ["i".to_string()].into();
        let unfold = asrt("exists j. (i |-> j) * lst(j)");
        let folded = asrt("lst(i) ^ ~(i = 0)");
        assert!(c.entails(&delta, &unfold, &folded).unwrap().is_none());
        assert!(c.entails(&delta, &folded, &unfold).unwrap().is_none());
    }

    #[test]
    fn precision() {
        let c = ctx(2, 2);
        let empty: BTreeSet<String> = BTreeSet::new();
        assert!(c.is_precise(&empty, &Assertion::Emp).unwrap());
        assert!(c.is_precise(&empty, &asrt("1 |-> -")).unwrap());
        let w = c.precision_witness(&empty, &Assertion::True).unwrap().unwrap();
        assert_ne!(w.sub1, w.sub2);
        let lvars: BTreeSet<String> = ["l".to_string()].into();
        assert!(c.is_precise(&lvars, &asrt("inv(l)")).unwrap());
        assert!(c.is_precise(&lvars, &asrt("lst(l)")).unwrap());
    }

    #[test]
    fn precise_star_distributes_over_intersection() {
        let c = ctx(2, 2);
        let env = Env::empty();
        let r = c.eval(&asrt("1 |-> -"), &env).unwrap();
        let p = Pred::from_heaps([h(&[(1, 1)]), h(&[(1, 0), (2, 0)])], c.universe);
        let q = Pred::from_heaps([h(&[(1, 1)]), h(&[(2, 2)])], c.universe);
        assert_eq!(p.intersect(&q).star(&r), p.star(&r).intersect(&q.star(&r)));

        // imprecise r admits the known counterexample
        let c3 = ctx(3, 3);
        let r = c3.true_pred();
        let p = Pred::from_heaps([h(&[(1, 1)])], c3.universe);
        let q = Pred::from_heaps([h(&[(1, 1), (2, 2)])], c3.universe);
        let lhs = p.intersect(&q).star(&r);
        let rhs = p.star(&r).intersect(&q.star(&r));
        assert!(lhs.heaps.is_empty());
        assert!(rhs.contains(&h(&[(1, 1), (2, 2)])));
    }

    #[test]
    fn holds_agrees_with_eval_on_enumerable_heaps() {
        let c = ctx(2, 1);
        let delta: BTreeSet<String> = ["i".to_string()].into();
        let cases = [
            asrt("emp"),
            asrt("i |-> -"),
            asrt("lst(i)"),
            asrt("(1 |-> 0) * true"),
            asrt("~(i = 0)"),
            asrt("forall k. (i = k) | true"),
        ];
        for a in &cases {
            for env in c.universe.enumerate_envs(&delta).unwrap() {
                let den = c.eval(a, &env).unwrap();
                for heap in &c.all_heaps {
                    assert_eq!(
                        c.holds(a, &env, heap).unwrap(),
                        den.contains(heap),
                        "{a} at {env} on {heap}"
                    );
                }
            }
        }
    }

    #[test]
    fn holds_is_not_clipped() {
        let c = ctx(2, 1);
        // value 9 is outside the universe, but the concrete check accepts
        let env = Env::empty();
        assert!(c.holds(&asrt("1 |-> 9"), &env, &h(&[(1, 9)])).unwrap());
        assert!(c.eval(&asrt("1 |-> 9"), &env).unwrap().heaps.is_empty());
    }
}
