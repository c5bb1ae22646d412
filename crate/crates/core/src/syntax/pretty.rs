//! Pretty-printing, the inverse of the parser: `parse(print(ast)) == ast`.
//!
//! Canonical numeral expressions print as decimal literals, and the
//! desugared `E |-> -` pattern prints back as `E |-> -` so that reparsing
//! regenerates the same `$`-binders in the same order.

use crate::syntax::ast::*;

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

// prec 0: + and - chains (left-assoc); prec 1: primaries
fn write_expr(out: &mut String, e: &Expr, prec: u8) {
    if let Some(n) = e.as_numeral() {
        out.push_str(&n.to_string());
        return;
    }
    match e {
        Expr::Var(v) => out.push_str(v),
        Expr::Zero => out.push('0'),
        Expr::One => out.push('1'),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let op = if matches!(e, Expr::Add(_, _)) { "+" } else { "-" };
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            write_expr(out, a, 0);
            out.push_str(op);
            write_expr(out, b, 1);
            if wrap {
                out.push(')');
            }
        }
    }
}

pub fn assertion_to_string(a: &Assertion) -> String {
    let mut s = String::new();
    write_assertion(&mut s, a, 0);
    s
}

// prec 0: quantifiers; 1: or; 2: and; 3: star; 4: not; 5: atoms
fn write_assertion(out: &mut String, a: &Assertion, prec: u8) {
    if let Some(e) = a.as_points_to_any() {
        write_expr(out, e, 1);
        out.push_str(" |-> -");
        return;
    }
    match a {
        Assertion::Forall(v, body) | Assertion::Exists(v, body) => {
            let kw = if matches!(a, Assertion::Forall(_, _)) { "forall" } else { "exists" };
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            out.push_str(kw);
            out.push(' ');
            out.push_str(v);
            out.push_str(". ");
            write_assertion(out, body, 0);
            if wrap {
                out.push(')');
            }
        }
        Assertion::Or(l, r) => {
            let wrap = prec > 1;
            if wrap {
                out.push('(');
            }
            write_assertion(out, l, 2);
            out.push_str(" | ");
            write_assertion(out, r, 1);
            if wrap {
                out.push(')');
            }
        }
        Assertion::And(l, r) => {
            let wrap = prec > 2;
            if wrap {
                out.push('(');
            }
            write_assertion(out, l, 3);
            out.push_str(" ^ ");
            write_assertion(out, r, 2);
            if wrap {
                out.push(')');
            }
        }
        Assertion::Star(l, r) => {
            let wrap = prec > 3;
            if wrap {
                out.push('(');
            }
            write_assertion(out, l, 4);
            out.push_str(" * ");
            write_assertion(out, r, 3);
            if wrap {
                out.push(')');
            }
        }
        Assertion::Not(inner) => {
            let wrap = prec > 4;
            if wrap {
                out.push('(');
            }
            out.push('~');
            write_assertion(out, inner, 4);
            if wrap {
                out.push(')');
            }
        }
        Assertion::Eq(l, r) => {
            write_expr(out, l, 1);
            out.push_str(" = ");
            write_expr(out, r, 1);
        }
        Assertion::PointsTo(l, r) => {
            write_expr(out, l, 1);
            out.push_str(" |-> ");
            write_expr(out, r, 1);
        }
        Assertion::Emp => out.push_str("emp"),
        Assertion::True => out.push_str("true"),
        Assertion::Named(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, e) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, e, 0);
            }
            out.push(')');
        }
    }
}

/// Prints an assertion as a valid `@`-operand, parenthesizing compounds.
fn write_assertion_primary(out: &mut String, a: &Assertion) {
    match a {
        Assertion::Emp | Assertion::True | Assertion::Named(_, _) => {
            write_assertion(out, a, 0)
        }
        _ => {
            out.push('(');
            write_assertion(out, a, 0);
            out.push(')');
        }
    }
}

pub fn type_to_string(t: &TypeExpr) -> String {
    let mut s = String::new();
    write_type(&mut s, t, 0);
    s
}

// prec 0: pi body (maximal); 1: arrow; 2: otimes; 3: atoms
fn write_type(out: &mut String, t: &TypeExpr, prec: u8) {
    match t {
        TypeExpr::Pi(v, body) => {
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            out.push_str("pi ");
            out.push_str(v);
            out.push_str(". ");
            write_type(out, body, 0);
            if wrap {
                out.push(')');
            }
        }
        TypeExpr::Arrow(a, b) => {
            let wrap = prec > 1;
            if wrap {
                out.push('(');
            }
            write_type(out, a, 2);
            out.push_str(" -> ");
            write_type(out, b, 1);
            if wrap {
                out.push(')');
            }
        }
        TypeExpr::Otimes(base, p) => {
            let wrap = prec > 2;
            if wrap {
                out.push('(');
            }
            write_type(out, base, 3);
            out.push_str(" @ ");
            write_assertion_primary(out, p);
            if wrap {
                out.push(')');
            }
        }
        TypeExpr::Triple(pre, post) => {
            out.push('{');
            write_assertion(out, pre, 0);
            out.push_str("}-{");
            write_assertion(out, post, 0);
            out.push('}');
        }
    }
}

pub fn script_to_string(s: &ScriptStep) -> String {
    let mut out = String::new();
    write_script(&mut out, s);
    out
}

fn write_script(out: &mut String, s: &ScriptStep) {
    match s {
        ScriptStep::Refl => out.push_str("refl"),
        ScriptStep::Conseq => out.push_str("conseq"),
        ScriptStep::DistTriple => out.push_str("dist_triple"),
        ScriptStep::DistPi => out.push_str("dist_pi"),
        ScriptStep::DistOtimes => out.push_str("dist_otimes"),
        ScriptStep::DistArrow => out.push_str("dist_arrow"),
        ScriptStep::Seq(steps) => {
            out.push_str("(seq");
            for st in steps {
                out.push(' ');
                write_script(out, st);
            }
            out.push(')');
        }
        ScriptStep::FrameAx(p) => {
            out.push_str("(frame ");
            write_assertion(out, p, 0);
            out.push(')');
        }
        ScriptStep::Trans(mid, a, b) => {
            out.push_str("(trans ");
            write_type(out, mid, 3);
            out.push(' ');
            write_script(out, a);
            out.push(' ');
            write_script(out, b);
            out.push(')');
        }
        ScriptStep::Arrow(a, b) => {
            out.push_str("(arrow ");
            write_script(out, a);
            out.push(' ');
            write_script(out, b);
            out.push(')');
        }
        ScriptStep::PiStruct(a) => {
            out.push_str("(pi ");
            write_script(out, a);
            out.push(')');
        }
        ScriptStep::OtimesStruct(a) => {
            out.push_str("(otimes ");
            write_script(out, a);
            out.push(')');
        }
    }
}

pub fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t, 0);
    s
}

// prec 0: seq and binder bodies (maximal); 1: application; 2: atoms
fn write_term(out: &mut String, t: &Term, prec: u8) {
    match t {
        Term::Seq(l, r) => {
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            write_term(out, l, 1);
            out.push_str("; ");
            write_term(out, r, 0);
            if wrap {
                out.push(')');
            }
        }
        Term::App(f, a) => {
            let wrap = prec > 1;
            if wrap {
                out.push('(');
            }
            write_term(out, f, 1);
            out.push(' ');
            write_term(out, a, 2);
            if wrap {
                out.push(')');
            }
        }
        Term::AppInt(f, e) => {
            let wrap = prec > 1;
            if wrap {
                out.push('(');
            }
            write_term(out, f, 1);
            out.push('(');
            write_expr(out, e, 0);
            out.push(')');
            if wrap {
                out.push(')');
            }
        }
        Term::Lam(x, ty, body) => {
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            out.push('\\');
            out.push_str(x);
            out.push_str(" : ");
            write_type(out, ty, 0);
            out.push_str(". ");
            write_term(out, body, 0);
            if wrap {
                out.push(')');
            }
        }
        Term::LamInt(i, body) => {
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            out.push('\\');
            out.push_str(i);
            out.push_str(". ");
            write_term(out, body, 0);
            if wrap {
                out.push(')');
            }
        }
        Term::Fix(m) => {
            let wrap = prec > 1;
            if wrap {
                out.push('(');
            }
            out.push_str("fix ");
            write_term(out, m, 2);
            if wrap {
                out.push(')');
            }
        }
        Term::Ifz(e, a, b) => {
            let wrap = prec > 1;
            if wrap {
                out.push('(');
            }
            out.push_str("ifz ");
            match e {
                Expr::Var(v) if e.as_numeral().is_none() => out.push_str(v),
                _ if e.as_numeral().is_some() => out.push_str(&e.as_numeral().unwrap().to_string()),
                _ => {
                    out.push('(');
                    write_expr(out, e, 0);
                    out.push(')');
                }
            }
            out.push(' ');
            write_term(out, a, 2);
            out.push(' ');
            write_term(out, b, 2);
            if wrap {
                out.push(')');
            }
        }
        Term::Skip => out.push_str("skip"),
        Term::Var(x) => out.push_str(x),
        Term::Free(e) => {
            out.push_str("free(");
            write_expr(out, e, 0);
            out.push(')');
        }
        Term::Write(e, e2) => {
            let wrap = prec > 1;
            if wrap {
                out.push('(');
            }
            out.push('[');
            write_expr(out, e, 0);
            out.push_str("] := ");
            write_expr(out, e2, 0);
            if wrap {
                out.push(')');
            }
        }
        Term::NewIn(i, body) => {
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            out.push_str("let ");
            out.push_str(i);
            out.push_str(" = new in ");
            write_term(out, body, 0);
            if wrap {
                out.push(')');
            }
        }
        Term::ReadIn(i, e, body) => {
            let wrap = prec > 0;
            if wrap {
                out.push('(');
            }
            out.push_str("let ");
            out.push_str(i);
            out.push_str(" = [");
            write_expr(out, e, 0);
            out.push_str("] in ");
            write_term(out, body, 0);
            if wrap {
                out.push(')');
            }
        }
        Term::Cast(m, ty, script) => {
            out.push('(');
            write_term(out, m, 0);
            out.push_str(" : ");
            write_type(out, ty, 0);
            if let Some(s) = script {
                out.push_str(" by ");
                write_script(out, s);
            }
            out.push(')');
        }
        Term::Frame(m, p) => {
            out.push('(');
            write_term(out, m, 0);
            out.push_str(" @ ");
            write_assertion_primary(out, p);
            out.push(')');
        }
    }
}

/// Prints a whole program as re-parseable source.
pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    for def in &p.preds {
        out.push_str("pred ");
        out.push_str(&def.name);
        out.push('(');
        for (i, param) in def.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(param);
        }
        out.push_str(") := ");
        write_assertion(&mut out, &def.body, 0);
        out.push_str(";\n");
    }
    if !p.vars.is_empty() {
        out.push_str("vars ");
        for (i, v) in p.vars.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(v);
        }
        out.push_str(";\n");
    }
    for (x, ty) in &p.ctx.0 {
        out.push_str("ctx ");
        out.push_str(x);
        out.push_str(" : ");
        write_type(&mut out, ty, 0);
        out.push_str(";\n");
    }
    out.push_str("goal ");
    write_term(&mut out, &p.goal_term, 0);
    out.push_str(" : ");
    write_type(&mut out, &p.goal_type, 0);
    out.push_str(";\n");
    out
}
