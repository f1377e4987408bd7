//! Translation from the linear/nonlinear lambda calculus into the
//! three-grade linear algebra `lin3`.
//!
//! Surface syntax, nonlinear zone:
//! `x`, `()`, `(s, t)`, `fst s`, `snd s`, `fn x:X. s`, `s t`, `G e`.
//! Linear zone: `a`, `*`, `<e, f>`, `let <a, b> = e in f`, `let * = e in f`,
//! `lfn a:A. e`, `e @ f`, `derelict s`, `F s`, `let F x = e in f`.
//! Types: `1`, `I`, `X * Y`, `A <*> B`, `X -> Y`, `A -o B`, `G A`, `F X` and
//! base names. The products bind tighter than the arrows, which associate to
//! the right; `G` and `F` bind tightest.
//!
//! Judgment files hold `Theta ; Gamma |- e : A` (linear) or
//! `Theta |- t : X` (nonlinear), contexts being `x : X, ...`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{Algebra, Grade};
use crate::check::{beta_equal, check, BetaError, CheckError};
use crate::syntax::{self, fresh_name, GradedContext, Name, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LnlType {
    Base(Name),
    One,
    Prod(Box<LnlType>, Box<LnlType>),
    Fun(Box<LnlType>, Box<LnlType>),
    G(Box<LnlType>),
    I,
    Tensor(Box<LnlType>, Box<LnlType>),
    Lolli(Box<LnlType>, Box<LnlType>),
    F(Box<LnlType>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LnlTerm {
    Var(Name),
    Unit,
    Pair(Box<LnlTerm>, Box<LnlTerm>),
    Fst(Box<LnlTerm>),
    Snd(Box<LnlTerm>),
    Lam(Name, LnlType, Box<LnlTerm>),
    App(Box<LnlTerm>, Box<LnlTerm>),
    G(Box<LnlTerm>),
    F(Box<LnlTerm>),
    Star,
    Tensor(Box<LnlTerm>, Box<LnlTerm>),
    LetTensor(Name, Name, Box<LnlTerm>, Box<LnlTerm>),
    LetStar(Box<LnlTerm>, Box<LnlTerm>),
    LLam(Name, LnlType, Box<LnlTerm>),
    LApp(Box<LnlTerm>, Box<LnlTerm>),
    Derelict(Box<LnlTerm>),
    LetF(Name, Box<LnlTerm>, Box<LnlTerm>),
}

fn omega() -> Grade {
    Grade::Omega
}

fn one() -> Grade {
    Grade::nat(1)
}

pub fn translate_type(t: &LnlType) -> Term {
    use LnlType::*;
    match t {
        Base(n) => Term::Var(n.clone()),
        One | I => Term::UnitType,
        Prod(x, y) => syntax::product(omega(), translate_type(x), translate_type(y)),
        Fun(x, y) => syntax::arrow(omega(), translate_type(x), translate_type(y)),
        G(a) => translate_type(a),
        Tensor(a, b) => syntax::product(one(), translate_type(a), translate_type(b)),
        Lolli(a, b) => syntax::arrow(one(), translate_type(a), translate_type(b)),
        F(x) => syntax::product(omega(), translate_type(x), Term::UnitType),
    }
}

fn fresh_for(base: &str, t: &Term, extra: &[&Name]) -> Name {
    let names = t.all_names();
    fresh_name(base, |n| names.contains(n) || extra.iter().any(|e| e.as_str() == n))
}

pub fn translate_term(t: &LnlTerm) -> Term {
    use LnlTerm::*;
    match t {
        Var(x) => Term::Var(x.clone()),
        Unit | Star => Term::Unit,
        Pair(s, u) => syntax::pair(translate_term(s), omega(), translate_term(u)),
        Fst(s) | Snd(s) => {
            let s = translate_term(s);
            let x = fresh_for("x", &s, &[]);
            let y = fresh_for("y", &s, &[&x]);
            let body = Term::Var(if matches!(t, Fst(_)) { x.clone() } else { y.clone() });
            syntax::let_pair(one(), &x, omega(), &y, s, body)
        }
        Lam(x, ty, s) => syntax::lam(omega(), x, Some(translate_type(ty)), translate_term(s)),
        App(s, u) => syntax::app(translate_term(s), translate_term(u), omega()),
        G(e) | Derelict(e) => translate_term(e),
        F(s) => syntax::pair(translate_term(s), omega(), Term::Unit),
        Tensor(e, f) => syntax::pair(translate_term(e), one(), translate_term(f)),
        LetTensor(a, b, e, f) => syntax::let_pair(one(), a, one(), b, translate_term(e), translate_term(f)),
        LetStar(e, f) => syntax::let_unit(one(), translate_term(e), translate_term(f)),
        LLam(a, ty, e) => syntax::lam(one(), a, Some(translate_type(ty)), translate_term(e)),
        LApp(e, f) => syntax::app(translate_term(e), translate_term(f), one()),
        LetF(x, e, f) => {
            let (e, f) = (translate_term(e), translate_term(f));
            let y = fresh_for("y", &f, &[x]);
            syntax::let_pair(one(), x, omega(), &y, e, syntax::let_unit(one(), Term::Var(y.clone()), f))
        }
    }
}

/// A judgment in either zone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LnlJudgment {
    pub theta: Vec<(Name, LnlType)>,
    /// `None` for a nonlinear judgment.
    pub gamma: Option<Vec<(Name, LnlType)>>,
    pub term: LnlTerm,
    pub ty: LnlType,
}

impl LnlJudgment {
    pub fn is_linear(&self) -> bool {
        self.gamma.is_some()
    }

    /// The grade at which the translation is checked.
    pub fn grade(&self) -> Grade {
        if self.is_linear() {
            one()
        } else {
            omega()
        }
    }

    /// `Θ` at ω followed by `Γ` at 1, types translated.
    pub fn translated_context(&self) -> GradedContext {
        let mut ctx = GradedContext::new();
        let theta = self.theta.iter().map(|(x, t)| (x, omega(), t));
        let gamma = self.gamma.iter().flatten().map(|(x, t)| (x, one(), t));
        for (x, g, t) in theta.chain(gamma) {
            ctx = ctx.assume(x, g, translate_type(t)).expect("judgment contexts bind each name once");
        }
        ctx
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub ctx: GradedContext,
    pub term: Term,
    pub ty: Term,
    pub grade: Grade,
    pub result: Result<(), CheckError>,
}

impl Validation {
    pub fn accepted(&self) -> bool {
        self.result.is_ok()
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {} :^{} {}", self.ctx, self.term, self.grade, syntax::print_type(&self.ty))?;
        match &self.result {
            Ok(()) => write!(f, "  [accepted]"),
            Err(e) => write!(f, "  [rejected: {e}]"),
        }
    }
}

/// Checks the translated judgment under `lin3`.
pub fn validate(j: &LnlJudgment) -> Validation {
    let ctx = j.translated_context();
    let term = translate_term(&j.term);
    let ty = translate_type(&j.ty);
    let grade = j.grade();
    let result = check(&Algebra::Lin3, &ctx, &term, &grade, Some(&ty)).map(|_| ());
    Validation { ctx, term, ty, grade, result }
}

/// Whether the translations of `e` and `f` are beta-equal.
pub fn beta_preserved(e: &LnlTerm, f: &LnlTerm, fuel: u64) -> Result<bool, BetaError> {
    beta_equal(&translate_term(e), &translate_term(f), fuel)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {col}: {msg}")]
pub struct LnlParseError {
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
}

const SYMBOLS: &[&str] = &[
    "|-", "<*>", "->", "-o", "()", "(", ")", "<", ">", ",", ".", ":", ";", "*", "@", "=", "⊗", "⊸", "→", "×", "\\", "λ",
];

const KEYWORDS: &[&str] = &["fst", "snd", "fn", "lfn", "let", "in", "derelict", "G", "F", "I"];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, LnlParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let col = src[..pos].chars().count() + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_' || chars[i].1 == '\'') {
                i += 1;
            }
            let word: String = chars[start..i].iter().map(|(_, c)| c).collect();
            out.push((Tok::Ident(word), col));
            continue;
        }
        let rest = &src[pos..];
        match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
            Some(s) => {
                let canon = match *s {
                    "⊗" => "<*>",
                    "⊸" => "-o",
                    "→" => "->",
                    "×" => "*",
                    "λ" => "\\",
                    s => s,
                };
                out.push((Tok::Sym(canon), col));
                i += s.chars().count();
            }
            None => return Err(LnlParseError { col, msg: format!("unexpected character `{c}`") }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, LnlParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, end_col: src.chars().count() + 1 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LnlParseError> {
        Err(LnlParseError { col: self.col(), msg: msg.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.is_kw(k);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), LnlParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), LnlParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{k}`"))
        }
    }

    fn name(&mut self) -> Result<Name, LnlParseError> {
        match self.peek() {
            Some(Tok::Ident(n)) if !KEYWORDS.contains(&n.as_str()) && !n.starts_with(|c: char| c.is_ascii_digit()) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a variable"),
        }
    }

    fn done(&self) -> Result<(), LnlParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn ty(&mut self) -> Result<LnlType, LnlParseError> {
        let lhs = self.ty_prod()?;
        if self.eat_sym("->") {
            Ok(LnlType::Fun(Box::new(lhs), Box::new(self.ty()?)))
        } else if self.eat_sym("-o") {
            Ok(LnlType::Lolli(Box::new(lhs), Box::new(self.ty()?)))
        } else {
            Ok(lhs)
        }
    }

    fn ty_prod(&mut self) -> Result<LnlType, LnlParseError> {
        let mut lhs = self.ty_atom()?;
        loop {
            if self.eat_sym("*") {
                lhs = LnlType::Prod(Box::new(lhs), Box::new(self.ty_atom()?));
            } else if self.eat_sym("<*>") {
                lhs = LnlType::Tensor(Box::new(lhs), Box::new(self.ty_atom()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn ty_atom(&mut self) -> Result<LnlType, LnlParseError> {
        if self.eat_kw("G") {
            return Ok(LnlType::G(Box::new(self.ty_atom()?)));
        }
        if self.eat_kw("F") {
            return Ok(LnlType::F(Box::new(self.ty_atom()?)));
        }
        if self.eat_kw("I") {
            return Ok(LnlType::I);
        }
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        match self.peek() {
            Some(Tok::Ident(n)) if n == "1" => {
                self.pos += 1;
                Ok(LnlType::One)
            }
            Some(Tok::Ident(_)) => Ok(LnlType::Base(self.name()?)),
            _ => self.err("expected a type"),
        }
    }

    fn term(&mut self) -> Result<LnlTerm, LnlParseError> {
        if self.eat_kw("fn") || self.eat_sym("\\") {
            let (x, t) = self.binder()?;
            return Ok(LnlTerm::Lam(x, t, Box::new(self.term()?)));
        }
        if self.eat_kw("lfn") {
            let (x, t) = self.binder()?;
            return Ok(LnlTerm::LLam(x, t, Box::new(self.term()?)));
        }
        if self.eat_kw("let") {
            if self.eat_sym("<") {
                let a = self.name()?;
                self.expect_sym(",")?;
                let b = self.name()?;
                self.expect_sym(">")?;
                let (e, f) = self.let_tail()?;
                return Ok(LnlTerm::LetTensor(a, b, e, f));
            }
            if self.eat_sym("*") {
                let (e, f) = self.let_tail()?;
                return Ok(LnlTerm::LetStar(e, f));
            }
            self.expect_kw("F")?;
            let x = self.name()?;
            let (e, f) = self.let_tail()?;
            return Ok(LnlTerm::LetF(x, e, f));
        }
        self.lapp()
    }

    fn binder(&mut self) -> Result<(Name, LnlType), LnlParseError> {
        let x = self.name()?;
        self.expect_sym(":")?;
        let t = self.ty()?;
        self.expect_sym(".")?;
        Ok((x, t))
    }

    fn let_tail(&mut self) -> Result<(Box<LnlTerm>, Box<LnlTerm>), LnlParseError> {
        self.expect_sym("=")?;
        let e = self.term()?;
        self.expect_kw("in")?;
        Ok((Box::new(e), Box::new(self.term()?)))
    }

    fn lapp(&mut self) -> Result<LnlTerm, LnlParseError> {
        let mut lhs = self.app()?;
        while self.eat_sym("@") {
            lhs = LnlTerm::LApp(Box::new(lhs), Box::new(self.app()?));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Some(Tok::Sym(s)) => matches!(*s, "(" | "()" | "<" | "*"),
            Some(Tok::Ident(n)) => !matches!(n.as_str(), "in" | "let" | "fn" | "lfn"),
            None => false,
        }
    }

    fn app(&mut self) -> Result<LnlTerm, LnlParseError> {
        let mut lhs = self.prefix()?;
        while self.starts_atom() {
            lhs = LnlTerm::App(Box::new(lhs), Box::new(self.prefix()?));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<LnlTerm, LnlParseError> {
        type Ctor = fn(Box<LnlTerm>) -> LnlTerm;
        let table: [(&str, Ctor); 5] =
            [("fst", LnlTerm::Fst), ("snd", LnlTerm::Snd), ("G", LnlTerm::G), ("F", LnlTerm::F), ("derelict", LnlTerm::Derelict)];
        for (kw, ctor) in table {
            if self.eat_kw(kw) {
                return Ok(ctor(Box::new(self.prefix()?)));
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<LnlTerm, LnlParseError> {
        if self.eat_sym("()") {
            return Ok(LnlTerm::Unit);
        }
        if self.eat_sym("*") {
            return Ok(LnlTerm::Star);
        }
        if self.eat_sym("<") {
            let e = self.term()?;
            self.expect_sym(",")?;
            let f = self.term()?;
            self.expect_sym(">")?;
            return Ok(LnlTerm::Tensor(Box::new(e), Box::new(f)));
        }
        if self.eat_sym("(") {
            let s = self.term()?;
            if self.eat_sym(",") {
                let t = self.term()?;
                self.expect_sym(")")?;
                return Ok(LnlTerm::Pair(Box::new(s), Box::new(t)));
            }
            self.expect_sym(")")?;
            return Ok(s);
        }
        Ok(LnlTerm::Var(self.name()?))
    }

    fn ctx(&mut self, seen: &mut BTreeSet<Name>) -> Result<Vec<(Name, LnlType)>, LnlParseError> {
        let mut out = Vec::new();
        if self.is_sym(";") || self.is_sym("|-") {
            return Ok(out);
        }
        loop {
            let col = self.col();
            let x = self.name()?;
            if !seen.insert(x.clone()) {
                return Err(LnlParseError { col, msg: format!("`{x}` is bound twice") });
            }
            self.expect_sym(":")?;
            out.push((x, self.ty()?));
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }
}

pub fn parse_lnl_type(src: &str) -> Result<LnlType, LnlParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.done()?;
    Ok(t)
}

pub fn parse_lnl_term(src: &str) -> Result<LnlTerm, LnlParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.done()?;
    Ok(t)
}

/// `Theta ; Gamma |- e : A` or `Theta |- t : X`.
pub fn parse_lnl_judgment(src: &str) -> Result<LnlJudgment, LnlParseError> {
    let mut p = Parser::new(src)?;
    let mut seen = BTreeSet::new();
    let theta = p.ctx(&mut seen)?;
    let gamma = if p.eat_sym(";") { Some(p.ctx(&mut seen)?) } else { None };
    p.expect_sym("|-")?;
    let term = p.term()?;
    p.expect_sym(":")?;
    let ty = p.ty()?;
    p.done()?;
    Ok(LnlJudgment { theta, gamma, term, ty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_type;

    fn ty(s: &str) -> Term {
        parse_type(s, &Algebra::Lin3).unwrap()
    }

    #[test]
    fn type_clauses() {
        assert_eq!(translate_type(&parse_lnl_type("F X").unwrap()), ty("{}^w X & Unit"));
        assert_eq!(translate_type(&parse_lnl_type("A -o B").unwrap()), ty("{}^1 A -> B"));
        assert_eq!(translate_type(&parse_lnl_type("G A").unwrap()), ty("A"));
        assert_eq!(translate_type(&parse_lnl_type("X * Y -> 1").unwrap()), ty("{}^w ({}^w X & Y) -> Unit"));
        assert_eq!(translate_type(&parse_lnl_type("A <*> I").unwrap()), ty("{}^1 A & Unit"));
    }

    #[test]
    fn linear_identity() {
        let j = parse_lnl_judgment("; |- lfn a:A. a : A -o A").unwrap();
        assert!(validate(&j).accepted());
    }

    #[test]
    fn nonlinear_identity() {
        let j = parse_lnl_judgment("|- fn x:X. x : X -> X").unwrap();
        let v = validate(&j);
        assert_eq!(v.grade, Grade::Omega);
        assert!(v.accepted(), "{v}");
    }

    #[test]
    fn let_f_chain() {
        let j = parse_lnl_judgment("; e : F X |- let F x = e in F (x, x) : F (X * X)").unwrap();
        let v = validate(&j);
        assert!(v.accepted(), "{v}");
        assert!(matches!(v.term, Term::LetPair(..)));
    }

    #[test]
    fn linear_discard_rejected() {
        let j = parse_lnl_judgment("; a : A, b : B |- a : A").unwrap();
        assert!(!validate(&j).accepted());
    }

    #[test]
    fn fresh_names_avoid_capture() {
        let t = translate_term(&parse_lnl_term("fst (x1, x)").unwrap());
        let Term::LetPair(_, x, ..) = t else { panic!("{t}") };
        assert!(x != "x1" && x != "x");
    }

    #[test]
    fn parse_errors_have_columns() {
        let e = parse_lnl_judgment("|- fn x X. x : X").unwrap_err();
        assert_eq!(e.col, 9);
        assert!(parse_lnl_judgment("x : X, x : Y |- x : X").is_err());
    }
}
