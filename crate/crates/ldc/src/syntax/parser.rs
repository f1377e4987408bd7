//! Recursive-descent parser.
//!
//! `+` means sum in type positions and integer addition in term positions.
//! Type positions are lambda domains, `Pi`/`Sigma` components, operands of
//! `->` and `&`, and anything inside `{ }`; `[ ]` switches back to terms.

use crate::algebra::{Algebra, Grade};

use super::lexer::{lex, Tok, Token};
use super::{
    app, desugar, freshen, inj1, inj2, lam, Entry, GradedContext, Sugar, SyntaxError, Term, WILDCARD,
};

const KEYWORDS: &[&str] = &[
    "let", "in", "case", "of", "if", "then", "else", "Pi", "Sigma", "inj1", "inj2", "eta", "seal", "unseal",
];

const GRADED_PREFIXES: &[&str] = &["let", "case", "T", "eta", "seal", "unseal"];

/// A parsed judgment file: `ctx |- term : type`, all parts but the term optional.
#[derive(Clone, Debug)]
pub struct Judgment {
    pub ctx: GradedContext,
    pub term: Term,
    pub ty: Option<Term>,
}

pub fn parse_term(text: &str, alg: &Algebra) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text, alg)?;
    let t = p.expr()?;
    p.finish()?;
    Ok(freshen(&t))
}

pub fn parse_type(text: &str, alg: &Algebra) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text, alg)?;
    let t = p.in_mode(true, Parser::expr)?;
    p.finish()?;
    Ok(freshen(&t))
}

pub fn parse_context(text: &str, alg: &Algebra) -> Result<GradedContext, SyntaxError> {
    let mut p = Parser::new(text, alg)?;
    let ctx = p.context()?;
    p.finish()?;
    Ok(ctx)
}

pub fn parse_judgment(text: &str, alg: &Algebra) -> Result<Judgment, SyntaxError> {
    let mut p = Parser::new(text, alg)?;
    let ctx = if p.toks.iter().any(|t| t.tok == Tok::Sym("|-")) {
        let ctx = p.context()?;
        p.expect("|-")?;
        ctx
    } else {
        GradedContext::new()
    };
    let term = freshen(&p.expr()?);
    let ty = if p.eat(":") { Some(freshen(&p.in_mode(true, Parser::expr)?)) } else { None };
    p.finish()?;
    Ok(Judgment { ctx, term, ty })
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Token>,
    pos: usize,
    alg: &'a Algebra,
    type_mode: bool,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, alg: &'a Algebra) -> Result<Parser<'a>, SyntaxError> {
        Ok(Parser { text, toks: lex(text)?, pos: 0, alg, type_mode: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::at(self.text, self.toks[self.pos].pos, msg)
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) | Tok::Int(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`, found {}", Self::describe(self.peek()))))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.is_ident(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`, found {}", Self::describe(self.peek()))))
        }
    }

    fn finish(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => Err(self.err(format!("unexpected {}", Self::describe(t)))),
        }
    }

    fn in_mode<T>(&mut self, ty: bool, f: impl FnOnce(&mut Self) -> Result<T, SyntaxError>) -> Result<T, SyntaxError> {
        let saved = std::mem::replace(&mut self.type_mode, ty);
        let out = f(self);
        self.type_mode = saved;
        out
    }

    fn one(&self) -> Grade {
        self.alg.one()
    }

    fn grade_text(&mut self) -> Result<String, SyntaxError> {
        match self.bump() {
            Tok::Int(s) | Tok::Ident(s) => Ok(s),
            Tok::Sym("(") => {
                let a = self.grade_text()?;
                self.expect(",")?;
                let b = self.grade_text()?;
                self.expect(")")?;
                Ok(format!("({a},{b})"))
            }
            t => {
                self.pos -= 1;
                Err(self.err(format!("expected a grade, found {}", Self::describe(&t))))
            }
        }
    }

    fn grade(&mut self) -> Result<Grade, SyntaxError> {
        let at = self.pos;
        let text = self.grade_text()?;
        self.alg
            .parse_grade(&text)
            .map_err(|e| SyntaxError::at(self.text, self.toks[at].pos, e.to_string()))
    }

    /// `^g`, or the algebra's `one` when absent.
    fn opt_grade(&mut self) -> Result<Grade, SyntaxError> {
        if self.eat("^") {
            self.grade()
        } else {
            Ok(self.one())
        }
    }

    fn grade_from_suffix(&self, suffix: &str) -> Result<Grade, SyntaxError> {
        self.alg
            .parse_grade(suffix)
            .map_err(|e| self.err(e.to_string()))
    }

    /// Recognises `kw` and `kw_g`, returning the grade (default `one`).
    fn graded_keyword(&self, kw: &str) -> Option<Result<Grade, SyntaxError>> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Some(Ok(self.one())),
            Tok::Ident(s) => s
                .strip_prefix(kw)
                .and_then(|r| r.strip_prefix('_'))
                .filter(|g| !g.is_empty())
                .map(|g| self.grade_from_suffix(g)),
            _ => None,
        }
    }

    fn is_keyword(s: &str) -> bool {
        KEYWORDS.contains(&s)
            || GRADED_PREFIXES
                .iter()
                .any(|p| s.strip_prefix(p).is_some_and(|r| r.starts_with('_') && r.len() > 1))
    }

    fn binder(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !Self::is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.err(format!("expected a variable, found {}", Self::describe(&t)))),
        }
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        if self.is_sym("\\") {
            return self.lambda();
        }
        if let Some(q0) = self.graded_keyword("let") {
            let q0 = q0?;
            self.bump();
            return self.let_form(q0);
        }
        if let Some(q0) = self.graded_keyword("case") {
            let q0 = q0?;
            self.bump();
            let s = self.expr()?;
            self.expect_kw("of")?;
            let x1 = self.binder()?;
            self.expect(".")?;
            let b1 = self.expr()?;
            self.expect(";")?;
            let x2 = self.binder()?;
            self.expect(".")?;
            let b2 = self.expr()?;
            return Ok(super::case(q0, s, &x1, b1, &x2, b2));
        }
        if self.is_ident("if") {
            self.bump();
            let c = self.expr()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            return Ok(desugar(Sugar::If(self.one(), c, a, b)));
        }
        if self.is_ident("Pi") || self.is_ident("Sigma") {
            let is_pi = self.is_ident("Pi");
            self.bump();
            let x = self.binder()?;
            self.expect(":")?;
            let r = self.opt_grade()?;
            let (a, b) = self.in_mode(true, |p| {
                let a = p.expr()?;
                p.expect(".")?;
                Ok((a, p.expr()?))
            })?;
            return Ok(if is_pi { super::pi(&x, r, a, b) } else { super::sigma(&x, r, a, b) });
        }
        self.arrow()
    }

    fn lambda(&mut self) -> Result<Term, SyntaxError> {
        self.expect("\\")?;
        let r = self.opt_grade()?;
        let x = self.binder()?;
        let dom = if self.eat(":") { Some(self.in_mode(true, Parser::expr)?) } else { None };
        self.expect(".")?;
        let body = self.expr()?;
        Ok(lam(r, &x, dom, body))
    }

    fn let_form(&mut self, q0: Grade) -> Result<Term, SyntaxError> {
        if self.is_ident("unit") {
            self.bump();
            self.expect("=")?;
            let s = self.expr()?;
            self.expect_kw("in")?;
            let b = self.expr()?;
            return Ok(super::let_unit(q0, s, b));
        }
        self.expect("(")?;
        let x = self.binder()?;
        let r = self.opt_grade()?;
        self.expect(",")?;
        let y = self.binder()?;
        self.expect(")")?;
        self.expect("=")?;
        let s = self.expr()?;
        self.expect_kw("in")?;
        let b = self.expr()?;
        Ok(super::let_pair(q0, &x, r, &y, s, b))
    }

    fn arrow(&mut self) -> Result<Term, SyntaxError> {
        let left = self.prod()?;
        if self.eat("->") {
            let right = self.in_mode(true, Parser::expr)?;
            return Ok(super::arrow(self.one(), left, right));
        }
        Ok(left)
    }

    fn graded_prefix(&self) -> bool {
        self.is_sym("{") && *self.peek_at(1) == Tok::Sym("}")
    }

    fn prod(&mut self) -> Result<Term, SyntaxError> {
        if self.graded_prefix() {
            self.bump();
            self.bump();
            self.expect("^")?;
            let r = self.grade()?;
            return self.in_mode(true, |p| {
                let a = p.sum()?;
                if p.eat("->") {
                    Ok(super::arrow(r, a, p.expr()?))
                } else if p.eat("&") {
                    Ok(super::product(r, a, p.prod()?))
                } else {
                    Err(p.err(format!("expected `->` or `&` after graded operand, found {}", Self::describe(p.peek()))))
                }
            });
        }
        let a = self.sum()?;
        if self.eat("&") {
            let b = self.in_mode(true, Parser::prod)?;
            return Ok(super::product(self.one(), a, b));
        }
        Ok(a)
    }

    fn sum(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.app()?;
        while self.eat("+") {
            let right = self.app()?;
            left = if self.type_mode {
                super::sum(left, right)
            } else {
                Term::IntAdd(Box::new(left), Box::new(right))
            };
        }
        Ok(left)
    }

    fn app(&mut self) -> Result<Term, SyntaxError> {
        let mut head = self.prefix()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            let r = self.opt_grade()?;
            head = app(head, arg, r);
        }
        Ok(head)
    }

    /// A prefix form (`inj1 a`, `T_m A`, ...) or an atom.
    fn prefix(&mut self) -> Result<Term, SyntaxError> {
        if self.is_ident("inj1") || self.is_ident("inj2") {
            let first = self.is_ident("inj1");
            self.bump();
            let a = self.prefix()?;
            return Ok(if first { inj1(a) } else { inj2(a) });
        }
        for kw in ["T", "eta", "seal", "unseal"] {
            let Some(g) = self.graded_keyword(kw) else { continue };
            if kw == "T" && self.is_ident("T") {
                break;
            }
            let g = g?;
            self.bump();
            let a = if kw == "T" { self.in_mode(true, Parser::prefix)? } else { self.prefix()? };
            return Ok(desugar(match kw {
                "T" => Sugar::Monad(g, a),
                "eta" => Sugar::Eta(g, a),
                "seal" => Sugar::Seal(g, a),
                _ => Sugar::Unseal(self.one(), g, a),
            }));
        }
        self.atom()
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !Self::is_keyword(s) && s != WILDCARD,
            Tok::Int(_) => true,
            Tok::Sym("(") | Tok::Sym("[") | Tok::Sym("*") => true,
            Tok::Sym("{") => !self.graded_prefix(),
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        if !self.starts_atom() {
            return Err(self.err(format!("expected a term, found {}", Self::describe(self.peek()))));
        }
        match self.bump() {
            Tok::Ident(s) => Ok(match s.as_str() {
                "unit" => Term::Unit,
                "Unit" => Term::UnitType,
                "Int" => Term::IntType,
                "Bool" => desugar(Sugar::Bool),
                "true" => desugar(Sugar::True),
                "false" => desugar(Sugar::False),
                "box" => Term::Sort("box".into()),
                _ => Term::Var(s),
            }),
            Tok::Int(s) => {
                let n = s.parse::<i64>().map_err(|_| {
                    self.pos -= 1;
                    self.err("integer literal out of range")
                })?;
                Ok(Term::IntLit(n))
            }
            Tok::Sym("*") => Ok(Term::Sort("*".into())),
            Tok::Sym("{") => {
                let t = self.in_mode(true, Parser::expr)?;
                self.expect("}")?;
                Ok(t)
            }
            Tok::Sym("[") => {
                let t = self.in_mode(false, Parser::expr)?;
                self.expect("]")?;
                Ok(t)
            }
            Tok::Sym("(") => {
                let a = self.expr()?;
                if self.eat(")") {
                    return Ok(a);
                }
                let r = self.opt_grade()?;
                self.expect(",")?;
                let b = self.expr()?;
                self.expect(")")?;
                Ok(super::pair(a, r, b))
            }
            _ => unreachable!("starts_atom checked"),
        }
    }

    /// `x :^q A, y = a :^r B, ...`, possibly empty.
    fn context(&mut self) -> Result<GradedContext, SyntaxError> {
        let mut ctx = GradedContext::new();
        if self.is_sym("|-") || *self.peek() == Tok::Eof {
            return Ok(ctx);
        }
        loop {
            let at = self.pos;
            let name = self.binder()?;
            let def = if self.eat("=") { Some(freshen(&self.expr()?)) } else { None };
            self.expect(":")?;
            let grade = self.opt_grade()?;
            let ty = freshen(&self.in_mode(true, Parser::expr)?);
            ctx.push(Entry { name, grade, ty, def })
                .map_err(|e| SyntaxError::at(self.text, self.toks[at].pos, e.to_string()))?;
            if !self.eat(",") {
                break;
            }
        }
        Ok(ctx)
    }
}
