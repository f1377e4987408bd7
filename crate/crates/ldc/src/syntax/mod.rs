//! Abstract syntax shared by the simple and dependent fragments.

mod desugar;
mod lexer;
mod parser;
mod print;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{Grade, UsageVector};

pub use desugar::{desugar, Sugar};
pub use parser::{parse_context, parse_judgment, parse_term, parse_type, Judgment};
pub use print::{print_context, print_term, print_type};
pub use subst::{fresh_name, freshen, multi_subst, rename_free, subst};

pub type Name = String;

/// The name used for binders that are never referenced.
pub const WILDCARD: &str = "_";

/// Terms, types and sorts in one grammar.
///
/// A lambda's domain is optional; checkers recover it from an expected type
/// when omitted.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Name),
    Lam(Grade, Name, Option<Box<Term>>, Box<Term>),
    App(Box<Term>, Box<Term>, Grade),
    Unit,
    LetUnit(Grade, Box<Term>, Box<Term>),
    Pair(Box<Term>, Grade, Box<Term>),
    LetPair(Grade, Name, Grade, Name, Box<Term>, Box<Term>),
    Inj1(Box<Term>),
    Inj2(Box<Term>),
    Case(Grade, Box<Term>, Name, Box<Term>, Name, Box<Term>),
    Sort(Name),
    Pi(Name, Grade, Box<Term>, Box<Term>),
    Sigma(Name, Grade, Box<Term>, Box<Term>),
    Sum(Box<Term>, Box<Term>),
    UnitType,
    IntLit(i64),
    IntAdd(Box<Term>, Box<Term>),
    IntType,
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn lam(r: Grade, x: &str, dom: Option<Term>, body: Term) -> Term {
    Term::Lam(r, x.to_string(), dom.map(Box::new), Box::new(body))
}

pub fn app(f: Term, a: Term, r: Grade) -> Term {
    Term::App(Box::new(f), Box::new(a), r)
}

pub fn pair(a: Term, r: Grade, b: Term) -> Term {
    Term::Pair(Box::new(a), r, Box::new(b))
}

pub fn let_pair(q0: Grade, x: &str, r: Grade, y: &str, scrut: Term, body: Term) -> Term {
    Term::LetPair(q0, x.to_string(), r, y.to_string(), Box::new(scrut), Box::new(body))
}

pub fn let_unit(q0: Grade, scrut: Term, body: Term) -> Term {
    Term::LetUnit(q0, Box::new(scrut), Box::new(body))
}

pub fn case(q0: Grade, scrut: Term, x1: &str, b1: Term, x2: &str, b2: Term) -> Term {
    Term::Case(q0, Box::new(scrut), x1.to_string(), Box::new(b1), x2.to_string(), Box::new(b2))
}

/// `Πx:^r A. B`.
pub fn pi(x: &str, r: Grade, a: Term, b: Term) -> Term {
    Term::Pi(x.to_string(), r, Box::new(a), Box::new(b))
}

/// `{}^r A → B`.
pub fn arrow(r: Grade, a: Term, b: Term) -> Term {
    pi(WILDCARD, r, a, b)
}

pub fn sigma(x: &str, r: Grade, a: Term, b: Term) -> Term {
    Term::Sigma(x.to_string(), r, Box::new(a), Box::new(b))
}

/// `{}^r A × B`.
pub fn product(r: Grade, a: Term, b: Term) -> Term {
    sigma(WILDCARD, r, a, b)
}

pub fn sum(a: Term, b: Term) -> Term {
    Term::Sum(Box::new(a), Box::new(b))
}

pub fn inj1(a: Term) -> Term {
    Term::Inj1(Box::new(a))
}

pub fn inj2(a: Term) -> Term {
    Term::Inj2(Box::new(a))
}

impl Term {
    /// Immediate subterms, each paired with the names it binds.
    pub fn children(&self) -> Vec<(&Term, Vec<&str>)> {
        use Term::*;
        match self {
            Var(_) | Unit | Sort(_) | UnitType | IntLit(_) | IntType => vec![],
            Lam(_, x, dom, body) => {
                let mut v: Vec<(&Term, Vec<&str>)> = dom.iter().map(|d| (&**d, vec![])).collect();
                v.push((body, vec![x.as_str()]));
                v
            }
            App(f, a, _) => vec![(f, vec![]), (a, vec![])],
            LetUnit(_, s, b) => vec![(s, vec![]), (b, vec![])],
            Pair(a, _, b) | Sum(a, b) | IntAdd(a, b) => vec![(a, vec![]), (b, vec![])],
            LetPair(_, x, _, y, s, b) => vec![(s, vec![]), (b, vec![x.as_str(), y.as_str()])],
            Inj1(a) | Inj2(a) => vec![(a, vec![])],
            Case(_, s, x1, b1, x2, b2) => vec![(s, vec![]), (b1, vec![x1.as_str()]), (b2, vec![x2.as_str()])],
            Pi(x, _, a, b) | Sigma(x, _, a, b) => vec![(a, vec![]), (b, vec![x.as_str()])],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_fv<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
        if let Term::Var(x) = self {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
            return;
        }
        for (child, binders) in self.children() {
            let n = bound.len();
            bound.extend(binders);
            child.collect_fv(bound, out);
            bound.truncate(n);
        }
    }

    pub fn occurs_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => x == y,
            _ => self
                .children()
                .into_iter()
                .any(|(c, binders)| !binders.contains(&x) && c.occurs_free(x)),
        }
    }

    /// Every name appearing anywhere in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        if let Term::Var(x) = self {
            out.insert(x.clone());
        }
        for (c, binders) in self.children() {
            out.extend(binders.into_iter().map(str::to_string));
            c.collect_names(out);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|(c, _)| c.size()).sum::<usize>()
    }

    /// Every grade annotation in the term.
    pub fn grades(&self) -> Vec<&Grade> {
        let mut out = Vec::new();
        self.collect_grades(&mut out);
        out
    }

    fn collect_grades<'a>(&'a self, out: &mut Vec<&'a Grade>) {
        use Term::*;
        match self {
            Lam(g, ..) | App(_, _, g) | LetUnit(g, ..) | Pair(_, g, _) | Case(g, ..) | Pi(_, g, ..) | Sigma(_, g, ..) => {
                out.push(g)
            }
            LetPair(q0, _, r, ..) => {
                out.push(q0);
                out.push(r);
            }
            _ => {}
        }
        for (c, _) in self.children() {
            c.collect_grades(out);
        }
    }

    /// Values of the call-by-name semantics.
    pub fn is_value(&self) -> bool {
        use Term::*;
        matches!(
            self,
            Lam(..) | Pair(..) | Unit | Inj1(_) | Inj2(_) | Sort(_) | Pi(..) | Sigma(..) | Sum(..) | UnitType | IntLit(_) | IntType
        )
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha(self, other, &mut Vec::new())
    }
}

fn alpha(a: &Term, b: &Term, env: &mut Vec<(String, String)>) -> bool {
    use Term::*;
    let under = |a: &Term, b: &Term, pairs: &[(&str, &str)], env: &mut Vec<(String, String)>| {
        let n = env.len();
        env.extend(pairs.iter().map(|(x, y)| (x.to_string(), y.to_string())));
        let ok = alpha(a, b, env);
        env.truncate(n);
        ok
    };
    match (a, b) {
        (Var(x), Var(y)) => {
            let i = env.iter().rposition(|(l, _)| l == x);
            let j = env.iter().rposition(|(_, r)| r == y);
            match (i, j) {
                (None, None) => x == y,
                (Some(i), Some(j)) => i == j,
                _ => false,
            }
        }
        (Lam(r1, x1, d1, b1), Lam(r2, x2, d2, b2)) => {
            r1 == r2
                && match (d1, d2) {
                    (None, None) => true,
                    (Some(d1), Some(d2)) => alpha(d1, d2, env),
                    _ => false,
                }
                && under(b1, b2, &[(x1, x2)], env)
        }
        (App(f1, a1, r1), App(f2, a2, r2)) => r1 == r2 && alpha(f1, f2, env) && alpha(a1, a2, env),
        (LetUnit(q1, s1, b1), LetUnit(q2, s2, b2)) => q1 == q2 && alpha(s1, s2, env) && alpha(b1, b2, env),
        (Pair(a1, r1, b1), Pair(a2, r2, b2)) => r1 == r2 && alpha(a1, a2, env) && alpha(b1, b2, env),
        (LetPair(q1, x1, r1, y1, s1, b1), LetPair(q2, x2, r2, y2, s2, b2)) => {
            q1 == q2 && r1 == r2 && alpha(s1, s2, env) && under(b1, b2, &[(x1, x2), (y1, y2)], env)
        }
        (Inj1(a1), Inj1(a2)) | (Inj2(a1), Inj2(a2)) => alpha(a1, a2, env),
        (Case(q1, s1, x1, l1, y1, r1), Case(q2, s2, x2, l2, y2, r2)) => {
            q1 == q2 && alpha(s1, s2, env) && under(l1, l2, &[(x1, x2)], env) && under(r1, r2, &[(y1, y2)], env)
        }
        (Pi(x1, r1, a1, b1), Pi(x2, r2, a2, b2)) | (Sigma(x1, r1, a1, b1), Sigma(x2, r2, a2, b2)) => {
            r1 == r2 && alpha(a1, a2, env) && under(b1, b2, &[(x1, x2)], env)
        }
        (Sum(a1, b1), Sum(a2, b2)) | (IntAdd(a1, b1), IntAdd(a2, b2)) => alpha(a1, a2, env) && alpha(b1, b2, env),
        (Sort(s1), Sort(s2)) => s1 == s2,
        (Unit, Unit) | (UnitType, UnitType) | (IntType, IntType) => true,
        (IntLit(m), IntLit(n)) => m == n,
        _ => false,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    At { line: usize, col: usize, msg: String },
}

impl SyntaxError {
    pub(crate) fn at(text: &str, offset: usize, msg: impl Into<String>) -> SyntaxError {
        let before = &text[..offset.min(text.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        SyntaxError::At { line, col, msg: msg.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContextError {
    #[error("variable `{0}` is declared twice")]
    Duplicate(Name),
    #[error("definition of `{name}` refers to `{var}`, which is not declared before it")]
    ForwardReference { name: Name, var: Name },
}

/// One assumption `x :^q A`, optionally carrying a definition `x = a`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Entry {
    pub name: Name,
    pub grade: Grade,
    pub ty: Term,
    pub def: Option<Term>,
}

/// An ordered graded context.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GradedContext {
    entries: Vec<Entry>,
}

impl GradedContext {
    pub fn new() -> GradedContext {
        GradedContext::default()
    }

    pub fn push(&mut self, entry: Entry) -> Result<(), ContextError> {
        if self.lookup(&entry.name).is_some() {
            return Err(ContextError::Duplicate(entry.name));
        }
        if let Some(def) = &entry.def {
            if let Some(v) = def.free_vars().into_iter().find(|v| self.lookup(v).is_none()) {
                return Err(ContextError::ForwardReference { name: entry.name, var: v });
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn assume(mut self, name: &str, grade: Grade, ty: Term) -> Result<GradedContext, ContextError> {
        self.push(Entry { name: name.to_string(), grade, ty, def: None })?;
        Ok(self)
    }

    pub fn define(mut self, name: &str, def: Term, grade: Grade, ty: Term) -> Result<GradedContext, ContextError> {
        self.push(Entry { name: name.to_string(), grade, ty, def: Some(def) })?;
        Ok(self)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn names(&self) -> Vec<Name> {
        self.entries.iter().map(|e| e.name.clone()).collect()
    }

    /// The grades as a usage vector.
    pub fn usage(&self) -> UsageVector {
        UsageVector::new(self.entries.iter().map(|e| (e.name.clone(), e.grade.clone())).collect())
    }

    /// The same context with grades replaced from `u`.
    pub fn with_usage(&self, u: &UsageVector) -> GradedContext {
        let mut out = self.clone();
        for (e, (_, g)) in out.entries.iter_mut().zip(&u.entries) {
            e.grade = g.clone();
        }
        out
    }

    pub fn has_definitions(&self) -> bool {
        self.entries.iter().any(|e| e.def.is_some())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for GradedContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_context(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: u64) -> Grade {
        Grade::nat(n)
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = lam(g(1), "x", None, app(var("x"), var("y"), g(1)));
        assert_eq!(t.free_vars().into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
        assert!(!t.occurs_free("x"));
    }

    #[test]
    fn alpha_equivalence() {
        let a = lam(g(1), "x", None, var("x"));
        let b = lam(g(1), "y", None, var("y"));
        let c = lam(g(2), "y", None, var("y"));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
        let open = lam(g(1), "x", None, var("y"));
        assert!(!open.alpha_eq(&b));
    }

    #[test]
    fn alpha_distinguishes_shadowing() {
        let a = let_pair(g(1), "x", g(1), "y", var("p"), var("x"));
        let b = let_pair(g(1), "y", g(1), "x", var("p"), var("x"));
        assert!(!a.alpha_eq(&b));
    }

    #[test]
    fn context_rejects_duplicates_and_forward_refs() {
        let ctx = GradedContext::new().assume("x", g(1), Term::UnitType).unwrap();
        assert!(ctx.clone().assume("x", g(1), Term::UnitType).is_err());
        assert!(ctx.define("y", var("z"), g(1), Term::UnitType).is_err());
    }
}
