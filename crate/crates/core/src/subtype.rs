//! The subtype preorder on types: invariant-extension normalization,
//! structural rules, Consequence, frame axioms, and the precision gate of
//! the restricted system.
//!
//! Every accepted judgment comes back as a [`SubtypeStep`] derivation whose
//! nodes instantiate one rule each. Scripts replay a user-given derivation;
//! without a script both sides are normalized and compared structurally,
//! closing triple leaves by Consequence only. Frame axioms are never
//! invented in script-free mode.

use std::collections::BTreeSet;

use crate::assertions::SemCtx;
use crate::error::SubtypeError;
use crate::syntax::ast::{Assertion, ScriptStep, TypeExpr, VarId};
use crate::syntax::ops::{
    alpha_eq_assertion, alpha_eq_type, subst_type, well_formed_assertion,
};

/// Checking mode: the unrestricted system, or the restricted system that
/// gates every added invariant on precision (and in exchange admits the
/// conjunction rule).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Unrestricted,
    #[default]
    Precise,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "unrestricted" => Some(Mode::Unrestricted),
            "precise" => Some(Mode::Precise),
            _ => None,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Unrestricted => write!(f, "unrestricted"),
            Mode::Precise => write!(f, "precise"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubtypeRule {
    Refl,
    Trans,
    ArrowStruct,
    PiStruct,
    OtimesStruct,
    Consequence,
    FrameAxiom(Assertion),
    DistTriple,
    DistPi,
    DistOtimes,
    DistArrow,
}

impl SubtypeRule {
    pub fn tag(&self) -> &'static str {
        match self {
            SubtypeRule::Refl => "refl",
            SubtypeRule::Trans => "trans",
            SubtypeRule::ArrowStruct => "arrowStruct",
            SubtypeRule::PiStruct => "piStruct",
            SubtypeRule::OtimesStruct => "otimesStruct",
            SubtypeRule::Consequence => "consequence",
            SubtypeRule::FrameAxiom(_) => "frameAxiom",
            SubtypeRule::DistTriple => "distTriple",
            SubtypeRule::DistPi => "distPi",
            SubtypeRule::DistOtimes => "distOtimes",
            SubtypeRule::DistArrow => "distArrow",
        }
    }
}

/// One verified step: the rule, its source and target, and sub-derivations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtypeStep {
    pub rule: SubtypeRule,
    pub source: TypeExpr,
    pub target: TypeExpr,
    pub substeps: Vec<SubtypeStep>,
}

impl SubtypeStep {
    fn leaf(rule: SubtypeRule, source: TypeExpr, target: TypeExpr) -> SubtypeStep {
        SubtypeStep { rule, source, target, substeps: Vec::new() }
    }

    /// Chains steps with transitivity, dropping a needless wrapper for a
    /// single step.
    pub fn chain(steps: Vec<SubtypeStep>) -> SubtypeStep {
        assert!(!steps.is_empty());
        if steps.len() == 1 {
            return steps.into_iter().next().unwrap();
        }
        let source = steps.first().unwrap().source.clone();
        let target = steps.last().unwrap().target.clone();
        SubtypeStep { rule: SubtypeRule::Trans, source, target, substeps: steps }
    }

    /// Collects the rule tags of the derivation in preorder.
    pub fn tags(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule.tag()];
        for s in &self.substeps {
            out.extend(s.tags());
        }
        out
    }
}

/// Rewrites the four distribution axioms left-to-right until no invariant
/// extension remains; `(theta (x) Q) (x) P` fuses to `theta (x) (Q * P)`
/// before distributing.
pub fn normalize_otimes(t: &TypeExpr) -> TypeExpr {
    match t {
        TypeExpr::Triple(_, _) => t.clone(),
        TypeExpr::Pi(v, body) => TypeExpr::Pi(v.clone(), Box::new(normalize_otimes(body))),
        TypeExpr::Arrow(a, b) => TypeExpr::Arrow(
            Box::new(normalize_otimes(a)),
            Box::new(normalize_otimes(b)),
        ),
        TypeExpr::Otimes(base, p) => match &**base {
            TypeExpr::Otimes(inner, q) => normalize_otimes(&TypeExpr::Otimes(
                inner.clone(),
                Assertion::star(q.clone(), p.clone()),
            )),
            _ => push_invariant(&normalize_otimes(base), p),
        },
    }
}

fn push_invariant(t: &TypeExpr, p: &Assertion) -> TypeExpr {
    match t {
        TypeExpr::Triple(pre, post) => TypeExpr::Triple(
            Assertion::star(pre.clone(), p.clone()),
            Assertion::star(post.clone(), p.clone()),
        ),
        TypeExpr::Pi(v, body) => TypeExpr::Pi(v.clone(), Box::new(push_invariant(body, p))),
        TypeExpr::Arrow(a, b) => {
            TypeExpr::Arrow(Box::new(push_invariant(a, p)), Box::new(push_invariant(b, p)))
        }
        TypeExpr::Otimes(_, _) => unreachable!("operand is normal"),
    }
}

/// Decides instances of the subtype preorder over a semantic context.
pub struct SubtypeEngine<'a> {
    pub sem: &'a SemCtx,
    pub mode: Mode,
}

type SResult<T> = Result<T, SubtypeError>;

impl<'a> SubtypeEngine<'a> {
    pub fn new(sem: &'a SemCtx, mode: Mode) -> SubtypeEngine<'a> {
        SubtypeEngine { sem, mode }
    }

    /// Checks `source <= target` under `delta`. With a script, replays it;
    /// without, normalizes both sides and recurses structurally.
    pub fn check(
        &self,
        delta: &BTreeSet<VarId>,
        source: &TypeExpr,
        target: &TypeExpr,
        script: Option<&ScriptStep>,
    ) -> SResult<SubtypeStep> {
        match script {
            Some(s) => self.replay(delta, source, target, s),
            None => self.auto(delta, source, target),
        }
    }

    /// The frame axiom as an operation: `theta <= theta (x) P`, gated on
    /// precision in precise mode.
    pub fn apply_frame(
        &self,
        delta: &BTreeSet<VarId>,
        t: &TypeExpr,
        p: &Assertion,
    ) -> SResult<TypeExpr> {
        self.gate_frame(delta, p)?;
        Ok(TypeExpr::Otimes(Box::new(t.clone()), p.clone()))
    }

    fn gate_frame(&self, delta: &BTreeSet<VarId>, p: &Assertion) -> SResult<()> {
        well_formed_assertion(delta, p, &self.sem.preds)?;
        if self.mode == Mode::Precise {
            if let Some(w) = self.sem.precision_witness(delta, p)? {
                let _ = w;
                return Err(SubtypeError::ImpreciseFrame(p.to_string()));
            }
        }
        Ok(())
    }

    // ---- script-free mode ----

    fn auto(&self, delta: &BTreeSet<VarId>, source: &TypeExpr, target: &TypeExpr) -> SResult<SubtypeStep> {
        let (norm_src, fwd, _) = self.norm_trace(source);
        let (norm_tgt, _, bwd) = self.norm_trace(target);
        let mid = self.structural(delta, &norm_src, &norm_tgt)?;
        let mut steps = Vec::new();
        steps.extend(fwd);
        steps.push(mid);
        steps.extend(bwd);
        Ok(SubtypeStep::chain(steps))
    }

    /// Structural comparison of two normalized types: arrows contra/co,
    /// products congruent, triples closed by Consequence.
    fn structural(
        &self,
        delta: &BTreeSet<VarId>,
        source: &TypeExpr,
        target: &TypeExpr,
    ) -> SResult<SubtypeStep> {
        if alpha_eq_type(source, target) {
            return Ok(SubtypeStep::leaf(SubtypeRule::Refl, source.clone(), target.clone()));
        }
        match (source, target) {
            (TypeExpr::Triple(_, _), TypeExpr::Triple(_, _)) => {
                self.consequence(delta, source, target)
            }
            (TypeExpr::Arrow(a, b), TypeExpr::Arrow(a2, b2)) => {
                let dom = self.structural(delta, a2, a)?;
                let cod = self.structural(delta, b, b2)?;
                Ok(SubtypeStep {
                    rule: SubtypeRule::ArrowStruct,
                    source: source.clone(),
                    target: target.clone(),
                    substeps: vec![dom, cod],
                })
            }
            (TypeExpr::Pi(v, body), TypeExpr::Pi(v2, body2)) => {
                let (body2, binder) = self.align_pi(delta, v, body2, v2)?;
                let mut inner_delta = delta.clone();
                inner_delta.insert(binder);
                let sub = self.structural(&inner_delta, body, &body2)?;
                Ok(SubtypeStep {
                    rule: SubtypeRule::PiStruct,
                    source: source.clone(),
                    target: target.clone(),
                    substeps: vec![sub],
                })
            }
            _ => Err(SubtypeError::StructuralMismatch {
                left: source.to_string(),
                right: target.to_string(),
            }),
        }
    }

    /// Renames the target binder to the source binder, checking the side
    /// condition that the binder is not already in scope.
    fn align_pi(
        &self,
        delta: &BTreeSet<VarId>,
        v: &str,
        body2: &TypeExpr,
        v2: &str,
    ) -> SResult<(TypeExpr, VarId)> {
        if delta.contains(v) {
            return Err(SubtypeError::ScriptMismatch {
                step: "piStruct".into(),
                reason: format!("pi binder {v} is already in scope"),
            });
        }
        if v == v2 {
            return Ok((body2.clone(), v.to_string()));
        }
        if body2.free_vars().contains(v) {
            return Err(SubtypeError::ScriptMismatch {
                step: "piStruct".into(),
                reason: format!("renaming {v2} to {v} would capture"),
            });
        }
        let renamed = subst_type(body2, v2, &crate::syntax::ast::Expr::Var(v.to_string()))?;
        Ok((renamed, v.to_string()))
    }

    /// Consequence between triples, normalizing both sides first. The
    /// entailments are discharged over the bounded model.
    fn consequence(
        &self,
        delta: &BTreeSet<VarId>,
        source: &TypeExpr,
        target: &TypeExpr,
    ) -> SResult<SubtypeStep> {
        let (norm_src, fwd, _) = self.norm_trace(source);
        let (norm_tgt, _, bwd) = self.norm_trace(target);
        let (TypeExpr::Triple(p, q), TypeExpr::Triple(p2, q2)) = (&norm_src, &norm_tgt) else {
            return Err(SubtypeError::ScriptMismatch {
                step: "consequence".into(),
                reason: format!(
                    "both sides must normalize to triples, got {norm_src} and {norm_tgt}"
                ),
            });
        };
        if let Some(w) = self.sem.entails(delta, p2, p)? {
            return Err(SubtypeError::ConsequenceFailed {
                side: "precondition".into(),
                env: w.env.to_string(),
                heap: w.heap.to_string(),
            });
        }
        if let Some(w) = self.sem.entails(delta, q, q2)? {
            return Err(SubtypeError::ConsequenceFailed {
                side: "postcondition".into(),
                env: w.env.to_string(),
                heap: w.heap.to_string(),
            });
        }
        let leaf = SubtypeStep::leaf(SubtypeRule::Consequence, norm_src, norm_tgt);
        let mut steps = Vec::new();
        steps.extend(fwd);
        steps.push(leaf);
        steps.extend(bwd);
        Ok(SubtypeStep::chain(steps))
    }

    // ---- normalization with derivation traces ----

    /// Normalizes a type and produces both directions of the equivalence as
    /// derivations: `fwd : t <= norm(t)` and `bwd : norm(t) <= t`. Empty
    /// vectors mean the type was already normal.
    #[allow(clippy::type_complexity)]
    fn norm_trace(&self, t: &TypeExpr) -> (TypeExpr, Vec<SubtypeStep>, Vec<SubtypeStep>) {
        match t {
            TypeExpr::Triple(_, _) => (t.clone(), Vec::new(), Vec::new()),
            TypeExpr::Pi(v, body) => {
                let (nb, fwd, bwd) = self.norm_trace(body);
                if fwd.is_empty() {
                    return (t.clone(), Vec::new(), Vec::new());
                }
                let nt = TypeExpr::Pi(v.clone(), Box::new(nb));
                let fstep = SubtypeStep {
                    rule: SubtypeRule::PiStruct,
                    source: t.clone(),
                    target: nt.clone(),
                    substeps: vec![SubtypeStep::chain(fwd)],
                };
                let bstep = SubtypeStep {
                    rule: SubtypeRule::PiStruct,
                    source: nt.clone(),
                    target: t.clone(),
                    substeps: vec![SubtypeStep::chain(bwd)],
                };
                (nt, vec![fstep], vec![bstep])
            }
            TypeExpr::Arrow(a, b) => {
                let (na, fa, ba) = self.norm_trace(a);
                let (nb, fb, bb) = self.norm_trace(b);
                if fa.is_empty() && fb.is_empty() {
                    return (t.clone(), Vec::new(), Vec::new());
                }
                let nt = TypeExpr::Arrow(Box::new(na.clone()), Box::new(nb.clone()));
                // contravariance: proving Arrow(a,b) <= Arrow(na,nb) uses
                // na <= a, which is the backward direction for the domain
                let refl = |ty: &TypeExpr| SubtypeStep::leaf(SubtypeRule::Refl, ty.clone(), ty.clone());
                let dom_f = if ba.is_empty() { refl(&na) } else { SubtypeStep::chain(ba.clone()) };
                let cod_f = if fb.is_empty() { refl(&nb) } else { SubtypeStep::chain(fb.clone()) };
                let fstep = SubtypeStep {
                    rule: SubtypeRule::ArrowStruct,
                    source: t.clone(),
                    target: nt.clone(),
                    substeps: vec![dom_f, cod_f],
                };
                let dom_b = if fa.is_empty() { refl(&na) } else { SubtypeStep::chain(fa) };
                let cod_b = if bb.is_empty() { refl(&nb) } else { SubtypeStep::chain(bb) };
                let bstep = SubtypeStep {
                    rule: SubtypeRule::ArrowStruct,
                    source: nt.clone(),
                    target: t.clone(),
                    substeps: vec![dom_b, cod_b],
                };
                (nt, vec![fstep], vec![bstep])
            }
            TypeExpr::Otimes(base, p) => match &**base {
                TypeExpr::Otimes(inner, q) => {
                    let fused = TypeExpr::Otimes(
                        inner.clone(),
                        Assertion::star(q.clone(), p.clone()),
                    );
                    let f1 = SubtypeStep::leaf(SubtypeRule::DistOtimes, t.clone(), fused.clone());
                    let b1 = SubtypeStep::leaf(SubtypeRule::DistOtimes, fused.clone(), t.clone());
                    let (nt, mut fwd, bwd) = self.norm_trace(&fused);
                    let mut f = vec![f1];
                    f.append(&mut fwd);
                    let mut b = bwd;
                    b.push(b1);
                    (nt, f, b)
                }
                _ => {
                    let (nb, fwd_base, bwd_base) = self.norm_trace(base);
                    let mut fwd = Vec::new();
                    let mut bwd_tail = Vec::new();
                    let cur = if fwd_base.is_empty() {
                        t.clone()
                    } else {
                        let lifted = TypeExpr::Otimes(Box::new(nb.clone()), p.clone());
                        fwd.push(SubtypeStep {
                            rule: SubtypeRule::OtimesStruct,
                            source: t.clone(),
                            target: lifted.clone(),
                            substeps: vec![SubtypeStep::chain(fwd_base)],
                        });
                        bwd_tail.push(SubtypeStep {
                            rule: SubtypeRule::OtimesStruct,
                            source: lifted.clone(),
                            target: t.clone(),
                            substeps: vec![SubtypeStep::chain(bwd_base)],
                        });
                        lifted
                    };
                    let (nt, mut push_f, push_b) = self.push_trace(&nb, p, &cur);
                    fwd.append(&mut push_f);
                    let mut bwd = push_b;
                    bwd.append(&mut bwd_tail);
                    (nt, fwd, bwd)
                }
            },
        }
    }

    /// Distributes one invariant through an already-normal type, tracing
    /// each axiom application. `cur` is the source form `normbase (x) P`.
    #[allow(clippy::type_complexity)]
    fn push_trace(
        &self,
        norm_base: &TypeExpr,
        p: &Assertion,
        cur: &TypeExpr,
    ) -> (TypeExpr, Vec<SubtypeStep>, Vec<SubtypeStep>) {
        match norm_base {
            TypeExpr::Triple(pre, post) => {
                let nt = TypeExpr::Triple(
                    Assertion::star(pre.clone(), p.clone()),
                    Assertion::star(post.clone(), p.clone()),
                );
                let f = SubtypeStep::leaf(SubtypeRule::DistTriple, cur.clone(), nt.clone());
                let b = SubtypeStep::leaf(SubtypeRule::DistTriple, nt.clone(), cur.clone());
                (nt, vec![f], vec![b])
            }
            TypeExpr::Pi(v, body) => {
                let dist = TypeExpr::Pi(
                    v.clone(),
                    Box::new(TypeExpr::Otimes(body.clone(), p.clone())),
                );
                let f1 = SubtypeStep::leaf(SubtypeRule::DistPi, cur.clone(), dist.clone());
                let b1 = SubtypeStep::leaf(SubtypeRule::DistPi, dist.clone(), cur.clone());
                let inner_src = TypeExpr::Otimes(body.clone(), p.clone());
                let (ninner, inner_f, inner_b) = self.push_trace(body, p, &inner_src);
                let nt = TypeExpr::Pi(v.clone(), Box::new(ninner));
                let mut fwd = vec![f1];
                if !inner_f.is_empty() {
                    fwd.push(SubtypeStep {
                        rule: SubtypeRule::PiStruct,
                        source: dist.clone(),
                        target: nt.clone(),
                        substeps: vec![SubtypeStep::chain(inner_f)],
                    });
                }
                let mut bwd = Vec::new();
                if !inner_b.is_empty() {
                    bwd.push(SubtypeStep {
                        rule: SubtypeRule::PiStruct,
                        source: nt.clone(),
                        target: dist.clone(),
                        substeps: vec![SubtypeStep::chain(inner_b)],
                    });
                }
                bwd.push(b1);
                (nt, fwd, bwd)
            }
            TypeExpr::Arrow(a, b) => {
                let dist = TypeExpr::Arrow(
                    Box::new(TypeExpr::Otimes(a.clone(), p.clone())),
                    Box::new(TypeExpr::Otimes(b.clone(), p.clone())),
                );
                let f1 = SubtypeStep::leaf(SubtypeRule::DistArrow, cur.clone(), dist.clone());
                let b1 = SubtypeStep::leaf(SubtypeRule::DistArrow, dist.clone(), cur.clone());
                let asrc = TypeExpr::Otimes(a.clone(), p.clone());
                let bsrc = TypeExpr::Otimes(b.clone(), p.clone());
                let (na, af, ab) = self.push_trace(a, p, &asrc);
                let (nb, bf, bb) = self.push_trace(b, p, &bsrc);
                let nt = TypeExpr::Arrow(Box::new(na.clone()), Box::new(nb.clone()));
                let refl =
                    |ty: &TypeExpr| SubtypeStep::leaf(SubtypeRule::Refl, ty.clone(), ty.clone());
                let mut fwd = vec![f1];
                if !(af.is_empty() && bf.is_empty()) {
                    let dom = if ab.is_empty() { refl(&na) } else { SubtypeStep::chain(ab.clone()) };
                    let cod = if bf.is_empty() { refl(&nb) } else { SubtypeStep::chain(bf.clone()) };
                    fwd.push(SubtypeStep {
                        rule: SubtypeRule::ArrowStruct,
                        source: dist.clone(),
                        target: nt.clone(),
                        substeps: vec![dom, cod],
                    });
                }
                let mut bwd = Vec::new();
                if !(af.is_empty() && bf.is_empty()) {
                    let dom = if af.is_empty() { refl(&na) } else { SubtypeStep::chain(af) };
                    let cod = if bb.is_empty() { refl(&nb) } else { SubtypeStep::chain(bb) };
                    bwd.push(SubtypeStep {
                        rule: SubtypeRule::ArrowStruct,
                        source: nt.clone(),
                        target: dist.clone(),
                        substeps: vec![dom, cod],
                    });
                }
                bwd.push(b1);
                (nt, fwd, bwd)
            }
            TypeExpr::Otimes(_, _) => unreachable!("operand is normal"),
        }
    }

    // ---- script replay ----

    fn replay(
        &self,
        delta: &BTreeSet<VarId>,
        source: &TypeExpr,
        target: &TypeExpr,
        script: &ScriptStep,
    ) -> SResult<SubtypeStep> {
        match script {
            ScriptStep::Refl => {
                if alpha_eq_type(source, target) {
                    Ok(SubtypeStep::leaf(SubtypeRule::Refl, source.clone(), target.clone()))
                } else {
                    Err(SubtypeError::ScriptMismatch {
                        step: "refl".into(),
                        reason: format!("{source} and {target} differ"),
                    })
                }
            }
            ScriptStep::Conseq => self.consequence(delta, source, target),
            ScriptStep::Trans(mid, s1, s2) => {
                let a = self.replay(delta, source, mid, s1)?;
                let b = self.replay(delta, mid, target, s2)?;
                Ok(SubtypeStep::chain(vec![a, b]))
            }
            ScriptStep::Seq(steps) => {
                let mut cur = source.clone();
                let mut out = Vec::new();
                for (i, step) in steps.iter().enumerate() {
                    let last = i + 1 == steps.len();
                    if last {
                        out.push(self.replay(delta, &cur, target, step)?);
                        cur = target.clone();
                    } else {
                        let next = self.determined_output(delta, &cur, step)?;
                        out.push(self.replay(delta, &cur, &next, step)?);
                        cur = next;
                    }
                }
                Ok(SubtypeStep::chain(out))
            }
            ScriptStep::Arrow(s_dom, s_cod) => {
                let (TypeExpr::Arrow(a, b), TypeExpr::Arrow(a2, b2)) = (source, target) else {
                    return Err(SubtypeError::ScriptMismatch {
                        step: "arrow".into(),
                        reason: format!("{source} or {target} is not an arrow"),
                    });
                };
                let dom = self.replay(delta, a2, a, s_dom)?;
                let cod = self.replay(delta, b, b2, s_cod)?;
                Ok(SubtypeStep {
                    rule: SubtypeRule::ArrowStruct,
                    source: source.clone(),
                    target: target.clone(),
                    substeps: vec![dom, cod],
                })
            }
            ScriptStep::PiStruct(s) => {
                let (TypeExpr::Pi(v, body), TypeExpr::Pi(v2, body2)) = (source, target) else {
                    return Err(SubtypeError::ScriptMismatch {
                        step: "pi".into(),
                        reason: format!("{source} or {target} is not a product"),
                    });
                };
                let (body2, binder) = self.align_pi(delta, v, body2, v2)?;
                let mut inner = delta.clone();
                inner.insert(binder);
                let sub = self.replay(&inner, body, &body2, s)?;
                Ok(SubtypeStep {
                    rule: SubtypeRule::PiStruct,
                    source: source.clone(),
                    target: target.clone(),
                    substeps: vec![sub],
                })
            }
            ScriptStep::OtimesStruct(s) => {
                let (TypeExpr::Otimes(a, p), TypeExpr::Otimes(b, q)) = (source, target) else {
                    return Err(SubtypeError::ScriptMismatch {
                        step: "otimes".into(),
                        reason: format!("{source} or {target} is not an invariant extension"),
                    });
                };
                if !alpha_eq_assertion(p, q) {
                    return Err(SubtypeError::ScriptMismatch {
                        step: "otimes".into(),
                        reason: format!("invariants {p} and {q} differ"),
                    });
                }
                let sub = self.replay(delta, a, b, s)?;
                Ok(SubtypeStep {
                    rule: SubtypeRule::OtimesStruct,
                    source: source.clone(),
                    target: target.clone(),
                    substeps: vec![sub],
                })
            }
            ScriptStep::FrameAx(p) => {
                let expected = TypeExpr::Otimes(Box::new(source.clone()), p.clone());
                if !alpha_eq_type(&expected, target) {
                    return Err(SubtypeError::ScriptMismatch {
                        step: "frame".into(),
                        reason: format!("target {target} is not {expected}"),
                    });
                }
                self.gate_frame(delta, p)?;
                Ok(SubtypeStep::leaf(
                    SubtypeRule::FrameAxiom(p.clone()),
                    source.clone(),
                    target.clone(),
                ))
            }
            ScriptStep::DistTriple
            | ScriptStep::DistPi
            | ScriptStep::DistOtimes
            | ScriptStep::DistArrow => {
                // these axioms are equivalences: accept either orientation
                let rule = dist_rule(script);
                let fits = match self.try_dist_forward(delta, source, script)? {
                    Some(out) if alpha_eq_type(&out, target) => true,
                    _ => match self.try_dist_forward(delta, target, script)? {
                        Some(out) if alpha_eq_type(&out, source) => true,
                        _ => false,
                    },
                };
                if fits {
                    Ok(SubtypeStep::leaf(rule, source.clone(), target.clone()))
                } else {
                    Err(SubtypeError::ScriptMismatch {
                        step: rule.tag().into(),
                        reason: format!("axiom does not relate {source} and {target}"),
                    })
                }
            }
        }
    }

    /// Output of a step that determines its target from its source, used
    /// for every non-final step of a `(seq ...)` script.
    fn determined_output(
        &self,
        delta: &BTreeSet<VarId>,
        cur: &TypeExpr,
        step: &ScriptStep,
    ) -> SResult<TypeExpr> {
        match step {
            ScriptStep::Refl => Ok(cur.clone()),
            ScriptStep::FrameAx(p) => {
                Ok(TypeExpr::Otimes(Box::new(cur.clone()), p.clone()))
            }
            ScriptStep::DistTriple | ScriptStep::DistPi | ScriptStep::DistOtimes
            | ScriptStep::DistArrow => {
                self.try_dist_forward(delta, cur, step)?.ok_or_else(|| {
                    SubtypeError::ScriptMismatch {
                        step: dist_rule(step).tag().into(),
                        reason: format!("axiom does not apply to {cur}"),
                    }
                })
            }
            _ => Err(SubtypeError::ScriptMismatch {
                step: "seq".into(),
                reason: "only refl, frame, and distribution steps may appear before the last step of (seq ...)".into(),
            }),
        }
    }

    fn try_dist_forward(
        &self,
        delta: &BTreeSet<VarId>,
        t: &TypeExpr,
        step: &ScriptStep,
    ) -> SResult<Option<TypeExpr>> {
        Ok(match (step, t) {
            (ScriptStep::DistTriple, TypeExpr::Otimes(base, p)) => match &**base {
                TypeExpr::Triple(pre, post) => Some(TypeExpr::Triple(
                    Assertion::star(pre.clone(), p.clone()),
                    Assertion::star(post.clone(), p.clone()),
                )),
                _ => None,
            },
            (ScriptStep::DistPi, TypeExpr::Otimes(base, p)) => match &**base {
                TypeExpr::Pi(v, body) => {
                    if delta.contains(v) {
                        return Err(SubtypeError::ScriptMismatch {
                            step: "distPi".into(),
                            reason: format!("pi binder {v} is already in scope"),
                        });
                    }
                    Some(TypeExpr::Pi(
                        v.clone(),
                        Box::new(TypeExpr::Otimes(body.clone(), p.clone())),
                    ))
                }
                _ => None,
            },
            (ScriptStep::DistOtimes, TypeExpr::Otimes(base, p)) => match &**base {
                TypeExpr::Otimes(inner, q) => Some(TypeExpr::Otimes(
                    inner.clone(),
                    Assertion::star(q.clone(), p.clone()),
                )),
                _ => None,
            },
            (ScriptStep::DistArrow, TypeExpr::Otimes(base, p)) => match &**base {
                TypeExpr::Arrow(a, b) => Some(TypeExpr::Arrow(
                    Box::new(TypeExpr::Otimes(a.clone(), p.clone())),
                    Box::new(TypeExpr::Otimes(b.clone(), p.clone())),
                )),
                _ => None,
            },
            _ => None,
        })
    }
}

fn dist_rule(step: &ScriptStep) -> SubtypeRule {
    match step {
        ScriptStep::DistTriple => SubtypeRule::DistTriple,
        ScriptStep::DistPi => SubtypeRule::DistPi,
        ScriptStep::DistOtimes => SubtypeRule::DistOtimes,
        ScriptStep::DistArrow => SubtypeRule::DistArrow,
        _ => unreachable!(),
    }
}
