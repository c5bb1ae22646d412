//! Recursive-descent parser for program files.
//!
//! Grammar sketch (see the crate README for the full syntax):
//!
//! ```text
//! program  := item* "goal" term ":" type ";"
//! item     := "pred" NAME "(" params ")" ":=" assertion ";"
//!           | "vars" (VAR ("," VAR)*)? ";"
//!           | "ctx" NAME ":" type ";"
//!           | "def" NAME ":=" term ";"
//! type     := otimes ("->" type)?
//! otimes   := tyatom ("@" aprim)*
//! tyatom   := "{" assertion "}" "-" "{" assertion "}" | "pi" VAR "." type | "(" type ")"
//! assertion:= ("forall"|"exists") VAR "." assertion | or
//! or       := and ("|" or)?           and   := star ("^" and)?
//! star     := unary ("*" star)?       unary := "~" unary | atom
//! atom     := "emp" | "true" | NAME "(" exprs ")" | "(" assertion ")"
//!           | expr ("=" expr | "|->" (expr | "-"))
//! expr     := prim (("+"|"-") prim)*  prim  := VAR | NUMBER | "(" expr ")"
//! term     := app (";" term)?
//! app      := atomt (atomt | NAME | NUMBER | "(" ... ")")*
//! atomt    := "skip" | "free" "(" expr ")" | "[" expr "]" ":=" expr
//!           | "fix" atomt | "ifz" eatom atomt atomt
//!           | "let" VAR "=" ("new" | "[" expr "]") "in" term
//!           | "\" NAME (":" type)? "." term
//!           | "(" term (":" type ("by" script)? | "@" aprim)? ")"
//! script   := "refl" | "conseq" | "dist_triple" | "dist_pi" | "dist_otimes"
//!           | "dist_arrow" | "(" "seq" script+ ")" | "(" "frame" assertion ")"
//!           | "(" "trans" type script script ")" | "(" "arrow" script script ")"
//!           | "(" "pi" script ")" | "(" "otimes" script ")"
//! ```
//!
//! `E |-> -` desugars at parse time to `exists $k. E |-> k` with a generated
//! binder; generated names start with `$` and cannot be written in source.
//! Identifiers in application position are classified as term or integer
//! variables from the declarations in scope.

use std::collections::BTreeSet;

use crate::error::ParseError;
use crate::syntax::ast::*;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(u64),
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,     // ->
    PointsTo,  // |->
    Assign,    // :=
    Colon,
    Semi,
    Comma,
    Dot,
    Minus,
    Plus,
    Star,
    Caret,
    Bar,
    Tilde,
    Eq,
    At,
    Lambda,
}

#[derive(Debug, Clone)]
struct SpannedTok {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok, out: &mut Vec<SpannedTok>| {
            out.push(SpannedTok { tok, line: tline, col: tcol });
        };
        macro_rules! advance {
            ($n:expr) => {{
                for k in 0..$n {
                    if bytes[i + k] == '\n' {
                        line += 1;
                        col = 1;
                    } else {
                        col += 1;
                    }
                }
                i += $n;
            }};
        }
        if c == '/' && i + 1 < bytes.len() && bytes[i + 1] == '/' {
            while i < bytes.len() && bytes[i] != '\n' {
                advance!(1);
            }
            continue;
        }
        if c.is_whitespace() {
            advance!(1);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_' || bytes[i] == '\'')
            {
                advance!(1);
            }
            let word: String = bytes[start..i].iter().collect();
            push(Tok::Ident(word), &mut out);
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                advance!(1);
            }
            let word: String = bytes[start..i].iter().collect();
            let n: u64 = word.parse().map_err(|_| ParseError {
                line: tline,
                col: tcol,
                msg: format!("number {word} out of range"),
            })?;
            push(Tok::Number(n), &mut out);
            continue;
        }
        let two = if i + 1 < bytes.len() {
            Some((bytes[i], bytes[i + 1]))
        } else {
            None
        };
        let three = if i + 2 < bytes.len() {
            Some((bytes[i], bytes[i + 1], bytes[i + 2]))
        } else {
            None
        };
        if three == Some(('|', '-', '>')) {
            push(Tok::PointsTo, &mut out);
            advance!(3);
            continue;
        }
        if two == Some(('-', '>')) {
            push(Tok::Arrow, &mut out);
            advance!(2);
            continue;
        }
        if two == Some((':', '=')) {
            push(Tok::Assign, &mut out);
            advance!(2);
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '-' => Tok::Minus,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '|' => Tok::Bar,
            '~' => Tok::Tilde,
            '=' => Tok::Eq,
            '@' => Tok::At,
            '\\' => Tok::Lambda,
            _ => {
                return Err(ParseError {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character {c:?}"),
                })
            }
        };
        push(tok, &mut out);
        advance!(1);
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "pred", "vars", "ctx", "def", "goal", "pi", "emp", "true", "forall", "exists", "fix", "skip",
    "free", "let", "new", "in", "ifz", "by", "refl", "conseq", "seq", "frame", "trans", "arrow",
    "otimes", "dist_triple", "dist_pi", "dist_otimes", "dist_arrow",
];

struct DefEntry {
    body: Term,
}

pub struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    gensym: usize,
    // declared predicate names with arities, including the one being defined
    pred_arities: Vec<(String, usize)>,
    defs: Vec<(String, DefEntry)>,
    // scopes used to classify identifiers in application position
    int_scope: Vec<String>,
    term_scope: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            gensym: 0,
            pred_arities: Vec::new(),
            defs: Vec::new(),
            int_scope: Vec::new(),
            term_scope: Vec::new(),
        })
    }

    fn fresh(&mut self) -> String {
        let name = format!("${}", self.gensym);
        self.gensym += 1;
        name
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or_else(|| {
                self.toks
                    .last()
                    .map(|t| (t.line, t.col + 1))
                    .unwrap_or((1, 1))
            })
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: Tok) -> PResult<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {tok:?}, found {:?}", self.peek()))
        }
    }

    fn eat_kw(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Tok::Ident(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            other => self.err(format!("expected `{kw}`, found {other:?}")),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == kw)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) => {
                if KEYWORDS.contains(&w.as_str()) {
                    self.err(format!("`{w}` is a keyword"))
                } else {
                    self.pos += 1;
                    Ok(w)
                }
            }
            other => self.err(format!("expected identifier, found {other:?}")),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.expr_prim()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.expr_prim()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.expr_prim()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn expr_prim(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Number(n)) => {
                self.pos += 1;
                Ok(Expr::numeral(n))
            }
            Some(Tok::Ident(_)) => {
                let name = self.ident()?;
                Ok(Expr::Var(name))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(Tok::RParen)?;
                Ok(e)
            }
            other => self.err(format!("expected expression, found {other:?}")),
        }
    }

    // ---- assertions ----

    fn assertion(&mut self) -> PResult<Assertion> {
        if self.at_kw("forall") || self.at_kw("exists") {
            let forall = self.at_kw("forall");
            self.pos += 1;
            let v = self.ident()?;
            self.eat(Tok::Dot)?;
            let body = self.assertion()?;
            return Ok(if forall {
                Assertion::Forall(v, Box::new(body))
            } else {
                Assertion::Exists(v, Box::new(body))
            });
        }
        self.assertion_or()
    }

    fn assertion_or(&mut self) -> PResult<Assertion> {
        let lhs = self.assertion_and()?;
        if self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            let rhs = self.assertion_or()?;
            Ok(Assertion::Or(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn assertion_and(&mut self) -> PResult<Assertion> {
        let lhs = self.assertion_star()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let rhs = self.assertion_and()?;
            Ok(Assertion::And(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn assertion_star(&mut self) -> PResult<Assertion> {
        let lhs = self.assertion_unary()?;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.assertion_star()?;
            Ok(Assertion::Star(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn assertion_unary(&mut self) -> PResult<Assertion> {
        if self.peek() == Some(&Tok::Tilde) {
            self.pos += 1;
            let inner = self.assertion_unary()?;
            return Ok(Assertion::Not(Box::new(inner)));
        }
        self.assertion_atom()
    }

    fn assertion_atom(&mut self) -> PResult<Assertion> {
        if self.at_kw("emp") {
            self.pos += 1;
            return Ok(Assertion::Emp);
        }
        if self.at_kw("true") {
            self.pos += 1;
            return Ok(Assertion::True);
        }
        // named predicate call: NAME "(" ... ")"
        if let (Some(Tok::Ident(name)), Some(Tok::LParen)) = (self.peek(), self.peek2()) {
            let name = name.clone();
            if !KEYWORDS.contains(&name.as_str()) && self.is_pred(&name) {
                self.pos += 2;
                let mut args = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    loop {
                        args.push(self.expr()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.eat(Tok::RParen)?;
                let expected = self.pred_arity(&name).unwrap();
                if args.len() != expected {
                    return self.err(format!(
                        "predicate {name} expects {expected} arguments, got {}",
                        args.len()
                    ));
                }
                return Ok(Assertion::Named(name, args));
            }
        }
        // parenthesized assertion (backtracks to expression if needed)
        if self.peek() == Some(&Tok::LParen) {
            let save = self.save();
            self.pos += 1;
            if let Ok(a) = self.assertion() {
                if self.peek() == Some(&Tok::RParen) {
                    self.pos += 1;
                    return Ok(a);
                }
            }
            self.restore(save);
        }
        // expression followed by `=` or `|->`
        let e = self.expr()?;
        match self.peek() {
            Some(Tok::Eq) => {
                self.pos += 1;
                let rhs = self.expr()?;
                Ok(Assertion::Eq(e, rhs))
            }
            Some(Tok::PointsTo) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Minus) {
                    self.pos += 1;
                    let fresh = self.fresh();
                    Ok(Assertion::points_to_any(e, fresh))
                } else {
                    let rhs = self.expr()?;
                    Ok(Assertion::PointsTo(e, rhs))
                }
            }
            other => self.err(format!("expected `=` or `|->` after expression, found {other:?}")),
        }
    }

    /// Assertion primary for `@` operands: named call, emp, true, or parenthesized.
    fn assertion_primary(&mut self) -> PResult<Assertion> {
        if self.at_kw("emp") || self.at_kw("true") {
            return self.assertion_atom();
        }
        if let (Some(Tok::Ident(_)), Some(Tok::LParen)) = (self.peek(), self.peek2()) {
            return self.assertion_atom();
        }
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let a = self.assertion()?;
            self.eat(Tok::RParen)?;
            return Ok(a);
        }
        self.err("expected an assertion (parenthesize compound assertions after `@`)")
    }

    fn is_pred(&self, name: &str) -> bool {
        self.pred_arities.iter().any(|(n, _)| n == name)
    }

    fn pred_arity(&self, name: &str) -> Option<usize> {
        self.pred_arities
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| *a)
    }

    // ---- types ----

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let lhs = self.type_otimes()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.type_expr()?;
            Ok(TypeExpr::Arrow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn type_otimes(&mut self) -> PResult<TypeExpr> {
        let mut acc = self.type_atom()?;
        while self.peek() == Some(&Tok::At) {
            self.pos += 1;
            let p = self.assertion_primary()?;
            acc = TypeExpr::Otimes(Box::new(acc), p);
        }
        Ok(acc)
    }

    fn type_atom(&mut self) -> PResult<TypeExpr> {
        if self.at_kw("pi") {
            self.pos += 1;
            let v = self.ident()?;
            self.eat(Tok::Dot)?;
            let body = self.type_expr()?;
            return Ok(TypeExpr::Pi(v, Box::new(body)));
        }
        if self.peek() == Some(&Tok::LBrace) {
            self.pos += 1;
            let pre = self.assertion()?;
            self.eat(Tok::RBrace)?;
            self.eat(Tok::Minus)?;
            self.eat(Tok::LBrace)?;
            let post = self.assertion()?;
            self.eat(Tok::RBrace)?;
            return Ok(TypeExpr::Triple(pre, post));
        }
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let t = self.type_expr()?;
            self.eat(Tok::RParen)?;
            return Ok(t);
        }
        self.err(format!("expected a type, found {:?}", self.peek()))
    }

    // ---- scripts ----

    fn script(&mut self) -> PResult<ScriptStep> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) => {
                let step = match w.as_str() {
                    "refl" => ScriptStep::Refl,
                    "conseq" => ScriptStep::Conseq,
                    "dist_triple" => ScriptStep::DistTriple,
                    "dist_pi" => ScriptStep::DistPi,
                    "dist_otimes" => ScriptStep::DistOtimes,
                    "dist_arrow" => ScriptStep::DistArrow,
                    _ => return self.err(format!("unknown script step `{w}`")),
                };
                self.pos += 1;
                Ok(step)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let head = match self.peek().cloned() {
                    Some(Tok::Ident(w)) => w,
                    other => return self.err(format!("expected script head, found {other:?}")),
                };
                self.pos += 1;
                let step = match head.as_str() {
                    "seq" => {
                        let mut steps = Vec::new();
                        while self.peek() != Some(&Tok::RParen) {
                            steps.push(self.script()?);
                        }
                        if steps.is_empty() {
                            return self.err("empty (seq) script");
                        }
                        ScriptStep::Seq(steps)
                    }
                    "frame" => {
                        let p = self.assertion()?;
                        ScriptStep::FrameAx(p)
                    }
                    "trans" => {
                        let mid = self.type_expr()?;
                        let a = self.script()?;
                        let b = self.script()?;
                        ScriptStep::Trans(mid, Box::new(a), Box::new(b))
                    }
                    "arrow" => {
                        let a = self.script()?;
                        let b = self.script()?;
                        ScriptStep::Arrow(Box::new(a), Box::new(b))
                    }
                    "pi" => ScriptStep::PiStruct(Box::new(self.script()?)),
                    "otimes" => ScriptStep::OtimesStruct(Box::new(self.script()?)),
                    other => return self.err(format!("unknown script head `{other}`")),
                };
                self.eat(Tok::RParen)?;
                Ok(step)
            }
            other => self.err(format!("expected script, found {other:?}")),
        }
    }

    // ---- terms ----

    fn save(&self) -> usize {
        self.pos
    }

    fn restore(&mut self, save: usize) {
        self.pos = save;
    }

    fn in_int_scope(&self, name: &str) -> bool {
        self.int_scope.iter().any(|v| v == name)
    }

    fn in_term_scope(&self, name: &str) -> bool {
        self.term_scope.iter().any(|v| v == name)
    }

    fn lookup_def(&self, name: &str) -> Option<&DefEntry> {
        self.defs.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    fn term(&mut self) -> PResult<Term> {
        let lhs = self.term_app()?;
        if self.peek() == Some(&Tok::Semi) {
            self.pos += 1;
            let rhs = self.term()?;
            Ok(Term::Seq(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn term_app(&mut self) -> PResult<Term> {
        let mut acc = self.term_atom()?;
        loop {
            match self.peek().cloned() {
                Some(Tok::Number(n)) => {
                    self.pos += 1;
                    acc = Term::AppInt(Box::new(acc), Expr::numeral(n));
                }
                Some(Tok::Ident(w)) if !KEYWORDS.contains(&w.as_str()) => {
                    if self.in_int_scope(&w) && !self.in_term_scope(&w) {
                        self.pos += 1;
                        acc = Term::AppInt(Box::new(acc), Expr::Var(w));
                    } else if self.in_term_scope(&w) || self.lookup_def(&w).is_some() {
                        let arg = self.term_atom()?;
                        acc = Term::App(Box::new(acc), Box::new(arg));
                    } else {
                        return self.err(format!("unbound identifier `{w}`"));
                    }
                }
                Some(Tok::Ident(w)) if w == "skip" || w == "fix" || w == "free" || w == "let"
                    || w == "ifz" =>
                {
                    let arg = self.term_atom()?;
                    acc = Term::App(Box::new(acc), Box::new(arg));
                }
                Some(Tok::LParen) => {
                    // integer argument `(E)` or parenthesized term argument
                    let save = self.save();
                    self.pos += 1;
                    let int_arg = self
                        .expr()
                        .ok()
                        .filter(|e| {
                            e.free_vars().iter().all(|v| self.in_int_scope(v))
                                && self.peek() == Some(&Tok::RParen)
                        });
                    match int_arg {
                        Some(e) => {
                            self.pos += 1; // RParen
                            acc = Term::AppInt(Box::new(acc), e);
                        }
                        None => {
                            self.restore(save);
                            let arg = self.term_atom()?;
                            acc = Term::App(Box::new(acc), Box::new(arg));
                        }
                    }
                }
                Some(Tok::Lambda) | Some(Tok::LBracket) => {
                    let arg = self.term_atom()?;
                    acc = Term::App(Box::new(acc), Box::new(arg));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) if w == "skip" => {
                self.pos += 1;
                Ok(Term::Skip)
            }
            Some(Tok::Ident(w)) if w == "free" => {
                self.pos += 1;
                self.eat(Tok::LParen)?;
                let e = self.expr()?;
                self.eat(Tok::RParen)?;
                Ok(Term::Free(e))
            }
            Some(Tok::Ident(w)) if w == "fix" => {
                self.pos += 1;
                let m = self.term_atom()?;
                Ok(Term::Fix(Box::new(m)))
            }
            Some(Tok::Ident(w)) if w == "ifz" => {
                self.pos += 1;
                let e = self.expr_atom_for_ifz()?;
                let then_b = self.term_atom()?;
                let else_b = self.term_atom()?;
                Ok(Term::Ifz(e, Box::new(then_b), Box::new(else_b)))
            }
            Some(Tok::Ident(w)) if w == "let" => {
                self.pos += 1;
                let v = self.ident()?;
                self.eat(Tok::Eq)?;
                if self.at_kw("new") {
                    self.pos += 1;
                    self.eat_kw("in")?;
                    self.int_scope.push(v.clone());
                    let body = self.term();
                    self.int_scope.pop();
                    Ok(Term::NewIn(v, Box::new(body?)))
                } else {
                    self.eat(Tok::LBracket)?;
                    let e = self.expr()?;
                    self.eat(Tok::RBracket)?;
                    self.eat_kw("in")?;
                    self.int_scope.push(v.clone());
                    let body = self.term();
                    self.int_scope.pop();
                    Ok(Term::ReadIn(v, e, Box::new(body?)))
                }
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(Tok::RBracket)?;
                self.eat(Tok::Assign)?;
                let e2 = self.expr()?;
                Ok(Term::Write(e, e2))
            }
            Some(Tok::Lambda) => {
                self.pos += 1;
                let v = self.ident()?;
                if self.peek() == Some(&Tok::Colon) {
                    self.pos += 1;
                    let ty = self.type_expr()?;
                    self.eat(Tok::Dot)?;
                    self.term_scope.push(v.clone());
                    let body = self.term();
                    self.term_scope.pop();
                    Ok(Term::Lam(v, ty, Box::new(body?)))
                } else {
                    self.eat(Tok::Dot)?;
                    self.int_scope.push(v.clone());
                    let body = self.term();
                    self.int_scope.pop();
                    Ok(Term::LamInt(v, Box::new(body?)))
                }
            }
            Some(Tok::Ident(w)) if !KEYWORDS.contains(&w.as_str()) => {
                self.pos += 1;
                if self.in_term_scope(&w) {
                    Ok(Term::Var(w))
                } else if let Some(def) = self.lookup_def(&w) {
                    Ok(def.body.clone())
                } else {
                    self.err(format!("unbound term identifier `{w}`"))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let m = self.term()?;
                let out = match self.peek() {
                    Some(Tok::Colon) => {
                        self.pos += 1;
                        let ty = self.type_expr()?;
                        let script = if self.at_kw("by") {
                            self.pos += 1;
                            Some(self.script()?)
                        } else {
                            None
                        };
                        Term::Cast(Box::new(m), ty, script)
                    }
                    Some(Tok::At) => {
                        self.pos += 1;
                        let p = self.assertion_primary()?;
                        Term::Frame(Box::new(m), p)
                    }
                    _ => m,
                };
                self.eat(Tok::RParen)?;
                Ok(out)
            }
            other => self.err(format!("expected a term, found {other:?}")),
        }
    }

    fn expr_atom_for_ifz(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Number(n)) => {
                self.pos += 1;
                Ok(Expr::numeral(n))
            }
            Some(Tok::Ident(w)) if !KEYWORDS.contains(&w.as_str()) => {
                self.pos += 1;
                Ok(Expr::Var(w))
            }
            other => self.err(format!("expected scrutinee expression, found {other:?}")),
        }
    }

    // ---- program ----

    fn program(&mut self) -> PResult<Program> {
        let mut preds = Vec::new();
        let mut vars: BTreeSet<VarId> = BTreeSet::new();
        let mut ctx = TypeContext::default();
        loop {
            if self.at_kw("pred") {
                self.pos += 1;
                let name = self.ident()?;
                self.eat(Tok::LParen)?;
                let mut params = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    loop {
                        params.push(self.ident()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.eat(Tok::RParen)?;
                self.eat(Tok::Assign)?;
                if self.is_pred(&name) {
                    return self.err(format!("predicate {name} declared twice"));
                }
                self.pred_arities.push((name.clone(), params.len()));
                let body = self.assertion()?;
                self.eat(Tok::Semi)?;
                preds.push(PredDef { name, params, body });
                continue;
            }
            if self.at_kw("vars") {
                self.pos += 1;
                if self.peek() != Some(&Tok::Semi) {
                    loop {
                        let v = self.ident()?;
                        self.int_scope.push(v.clone());
                        vars.insert(v);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.eat(Tok::Semi)?;
                continue;
            }
            if self.at_kw("ctx") {
                self.pos += 1;
                let name = self.ident()?;
                self.eat(Tok::Colon)?;
                let ty = self.type_expr()?;
                self.eat(Tok::Semi)?;
                self.term_scope.push(name.clone());
                ctx.0.push((name, ty));
                continue;
            }
            if self.at_kw("def") {
                self.pos += 1;
                let name = self.ident()?;
                self.eat(Tok::Assign)?;
                let body = self.term()?;
                self.eat(Tok::Semi)?;
                self.defs.push((name, DefEntry { body }));
                continue;
            }
            break;
        }
        self.eat_kw("goal")?;
        let goal_term = self.term()?;
        self.eat(Tok::Colon)?;
        let goal_type = self.type_expr()?;
        self.eat(Tok::Semi)?;
        if self.pos != self.toks.len() {
            return self.err("trailing input after goal declaration");
        }
        Ok(Program { preds, vars, ctx, goal_term, goal_type })
    }
}

/// Parses a whole program file.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    Parser::new(src)?.program()
}

/// Parses a single assertion, for pool specs and tests. Predicate names with
/// the given arities are allowed in calls.
pub fn parse_assertion_with(src: &str, preds: &[(String, usize)]) -> Result<Assertion, ParseError> {
    let mut p = Parser::new(src)?;
    p.pred_arities = preds.to_vec();
    let a = p.assertion()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input after assertion");
    }
    Ok(a)
}

/// Parses a single type, for tests.
pub fn parse_type_with(src: &str, preds: &[(String, usize)]) -> Result<TypeExpr, ParseError> {
    let mut p = Parser::new(src)?;
    p.pred_arities = preds.to_vec();
    let t = p.type_expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input after type");
    }
    Ok(t)
}
