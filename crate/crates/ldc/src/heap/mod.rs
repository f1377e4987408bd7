//! Weighted-heap reduction.
//!
//! A configuration `[H] a` steps at an observer grade `q`. Only variable
//! look-ups consume heap weight: `x ↦^r a` can be read at `q` when
//! `residual(r, q)` exists, and is rebound at that residual.

mod compat;
mod harness;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, Grade};
use crate::syntax::{fresh_name, parse_term, rename_free, subst, Name, SyntaxError, Term};

pub use compat::{compatible, compatible_demands, is_compatible, CompatError, Fragment};
pub use harness::{
    check_irrelevant, check_unchanged, count_lookups, noninterference_test, observe, soundness_run, IrrelevantReport,
    NiOutcome, NiReport, Observation, PreconditionError, SoundnessReport, UnchangedReport,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: Name,
    pub grade: Grade,
    pub term: Term,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeapError {
    #[error("`{0}` is defined twice")]
    Duplicate(Name),
    #[error("definition of `{name}` refers to `{var}`, which is not defined before it")]
    Cyclic { name: Name, var: Name },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Ordered bindings with unique names, each referring only to earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Heap {
    bindings: Vec<Binding>,
}

impl Heap {
    pub fn new() -> Heap {
        Heap::default()
    }

    pub fn push(&mut self, name: &str, grade: Grade, term: Term) -> Result<(), HeapError> {
        if self.lookup(name).is_some() {
            return Err(HeapError::Duplicate(name.to_string()));
        }
        if let Some(v) = term.free_vars().into_iter().find(|v| self.lookup(v).is_none()) {
            return Err(HeapError::Cyclic { name: name.to_string(), var: v });
        }
        self.bindings.push(Binding { name: name.to_string(), grade, term });
        Ok(())
    }

    pub fn with(mut self, name: &str, grade: Grade, term: Term) -> Result<Heap, HeapError> {
        self.push(name, grade, term)?;
        Ok(self)
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.bindings.iter().position(|b| b.name == name)
    }

    pub fn domain(&self) -> BTreeSet<Name> {
        self.bindings.iter().map(|b| b.name.clone()).collect()
    }

    fn set_grade(&mut self, i: usize, g: Grade) {
        self.bindings[i].grade = g;
    }

    /// `a{H}`: substitutes the definitions into `a`, last binding first.
    pub fn fold(&self, a: &Term) -> Term {
        self.bindings.iter().rev().fold(a.clone(), |acc, b| subst(&acc, &b.name, &b.term))
    }

    /// Reads one `x ^g = term` binding per line; `#` starts a comment.
    pub fn parse(text: &str, alg: &Algebra) -> Result<Heap, HeapError> {
        let mut h = Heap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| HeapError::Parse { line: line_no, msg };
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| err("expected `x ^g = term`".into()))?;
            let (name, grade) = lhs.split_once('^').ok_or_else(|| err("missing `^grade`".into()))?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                return Err(err(format!("bad variable name `{name}`")));
            }
            let grade = alg.parse_grade(grade.trim()).map_err(|e| err(e.to_string()))?;
            let term = parse_term(rhs, alg).map_err(|e| match e {
                SyntaxError::At { col, msg, .. } => err(format!("column {col}: {msg}")),
            })?;
            h.push(name, grade, term).map_err(|e| err(e.to_string()))?;
        }
        Ok(h)
    }
}

impl fmt::Display for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bindings {
            writeln!(f, "{} ^{} = {}", b.name, b.grade, b.term)?;
        }
        Ok(())
    }
}

/// Why a configuration cannot step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeapStuck {
    Insufficient { var: Name, available: Grade, demand: Grade },
    ZeroWorld { var: Name },
    Unbound(Name),
    Wrong(String),
}

impl fmt::Display for HeapStuck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeapStuck::Insufficient { var, available, demand } => {
                write!(f, "insufficient resource: `{var}` held at {available} cannot be read at {demand}")
            }
            HeapStuck::ZeroWorld { var } => write!(f, "`{var}` cannot be read in the zero world"),
            HeapStuck::Unbound(x) => write!(f, "`{x}` is not bound in the heap"),
            HeapStuck::Wrong(msg) => f.write_str(msg),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub heap_before: Heap,
    pub term_before: Term,
    pub grade: Grade,
    pub rule: &'static str,
    pub looked_up: Option<Name>,
    /// Bindings allocated by this step, with the binder's annotated type if any.
    pub allocated: Vec<(Name, Option<Term>)>,
    pub heap_after: Heap,
    pub term_after: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeapOutcome {
    Stepped(Box<TraceEntry>),
    Value,
    Stuck(HeapStuck),
}

struct Step {
    heap: Heap,
    term: Term,
    rule: &'static str,
    looked_up: Option<Name>,
    allocated: Vec<(Name, Option<Term>)>,
}

enum Raw {
    Stepped(Step),
    Value,
    Stuck(HeapStuck),
}

/// One heap step of `a` at `q`. Fresh names avoid `support`, the heap's
/// domain and every name in `a`.
pub fn heap_step(alg: &Algebra, h: &Heap, a: &Term, q: &Grade, support: &BTreeSet<Name>) -> Result<HeapOutcome, AlgebraError> {
    Ok(match go(alg, h, a, q, support)? {
        Raw::Value => HeapOutcome::Value,
        Raw::Stuck(s) => HeapOutcome::Stuck(s),
        Raw::Stepped(s) => HeapOutcome::Stepped(Box::new(TraceEntry {
            heap_before: h.clone(),
            term_before: a.clone(),
            grade: q.clone(),
            rule: s.rule,
            looked_up: s.looked_up,
            allocated: s.allocated,
            heap_after: s.heap,
            term_after: s.term,
        })),
    })
}

fn fresh(h: &Heap, support: &BTreeSet<Name>, a: &Term, base: &str, extra: &[Name]) -> Name {
    let names = a.all_names();
    fresh_name(base, |n| {
        support.contains(n) || h.lookup(n).is_some() || names.contains(n) || extra.iter().any(|e| e == n)
    })
}

#[allow(clippy::too_many_arguments)]
fn left(
    alg: &Algebra,
    h: &Heap,
    inner: &Term,
    q: &Grade,
    support: &BTreeSet<Name>,
    frozen: BTreeSet<Name>,
    rule: &'static str,
    rebuild: impl FnOnce(Term) -> Term,
) -> Result<Raw, AlgebraError> {
    let mut s = support.clone();
    s.extend(frozen);
    Ok(match go(alg, h, inner, q, &s)? {
        Raw::Stepped(st) => Raw::Stepped(Step { term: rebuild(st.term), ..st }),
        Raw::Value => Raw::Stuck(HeapStuck::Wrong(format!("rule {rule}: no elimination applies to `{inner}`"))),
        s => s,
    })
}

/// Free variables of the frozen parts of an elimination form.
fn frozen(parts: &[(&Term, &[&Name])]) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for (t, binders) in parts {
        let mut fv = t.free_vars();
        for b in *binders {
            fv.remove(*b);
        }
        out.extend(fv);
    }
    out
}

/// The grade at which beta steps allocate: the least grade a resource-free
/// step can be taken at, lifted to `q` by discarding.
fn alloc_grade(alg: &Algebra, q: &Grade) -> Grade {
    if alg.is_zero(q) {
        return q.clone();
    }
    alg.omega_floor(q).unwrap_or_else(|| q.clone())
}

fn go(alg: &Algebra, h: &Heap, a: &Term, q: &Grade, support: &BTreeSet<Name>) -> Result<Raw, AlgebraError> {
    if a.is_value() {
        return Ok(Raw::Value);
    }
    Ok(match a {
        Term::Var(x) => {
            let Some(i) = h.position(x) else {
                return Ok(Raw::Stuck(HeapStuck::Unbound(x.clone())));
            };
            if alg.is_zero(q) {
                return Ok(Raw::Stuck(HeapStuck::ZeroWorld { var: x.clone() }));
            }
            let b = &h.bindings[i];
            match alg.residual(&b.grade, q)? {
                Some(rest) => {
                    let mut h2 = h.clone();
                    h2.set_grade(i, rest);
                    Raw::Stepped(Step {
                        term: b.term.clone(),
                        heap: h2,
                        rule: "Var",
                        looked_up: Some(x.clone()),
                        allocated: vec![],
                    })
                }
                None => Raw::Stuck(HeapStuck::Insufficient { var: x.clone(), available: b.grade.clone(), demand: q.clone() }),
            }
        }
        Term::App(f, arg, r) => match &**f {
            Term::Lam(r2, x, dom, body) if r2 == r => {
                let x2 = fresh(h, support, a, x, &[]);
                let mut h2 = h.clone();
                h2.bindings.push(Binding { name: x2.clone(), grade: alg.mul(&alloc_grade(alg, q), r)?, term: (**arg).clone() });
                Raw::Stepped(Step {
                    term: rename_free(body, x, &x2),
                    heap: h2,
                    rule: "AppBeta",
                    looked_up: None,
                    allocated: vec![(x2, dom.as_deref().cloned())],
                })
            }
            Term::Lam(r2, ..) => Raw::Stuck(HeapStuck::Wrong(format!("annotation mismatch: lambda at {r2}, application at {r}"))),
            _ => left(alg, h, f, q, support, frozen(&[(arg, &[])]), "AppL", |f2| Term::App(Box::new(f2), arg.clone(), r.clone()))?,
        },
        Term::LetUnit(q0, s, b) => match &**s {
            Term::Unit => Raw::Stepped(Step { term: (**b).clone(), heap: h.clone(), rule: "LetUnitBeta", looked_up: None, allocated: vec![] }),
            _ => left(alg, h, s, &alg.mul(q, q0)?, support, frozen(&[(b, &[])]), "LetUnitL", |s2| {
                Term::LetUnit(q0.clone(), Box::new(s2), b.clone())
            })?,
        },
        Term::LetPair(q0, x, r, y, s, b) => match &**s {
            Term::Pair(a1, r2, a2) if r2 == r => {
                let qq0 = alg.mul(&alloc_grade(alg, q), q0)?;
                let x2 = fresh(h, support, a, x, &[]);
                let y2 = fresh(h, support, a, y, std::slice::from_ref(&x2));
                let mut h2 = h.clone();
                h2.bindings.push(Binding { name: x2.clone(), grade: alg.mul(&qq0, r)?, term: (**a1).clone() });
                h2.bindings.push(Binding { name: y2.clone(), grade: qq0, term: (**a2).clone() });
                let body = if x == y {
                    rename_free(b, y, &y2)
                } else {
                    // Simultaneous renaming through an intermediate name.
                    let tmp = fresh(h, support, a, "t", &[x2.clone(), y2.clone()]);
                    let b1 = rename_free(b, y, &tmp);
                    let b2 = rename_free(&b1, x, &x2);
                    rename_free(&b2, &tmp, &y2)
                };
                Raw::Stepped(Step {
                    term: body,
                    heap: h2,
                    rule: "LetPairBeta",
                    looked_up: None,
                    allocated: vec![(x2, None), (y2, None)],
                })
            }
            Term::Pair(_, r2, _) => Raw::Stuck(HeapStuck::Wrong(format!("annotation mismatch: pair at {r2}, pattern at {r}"))),
            _ => left(alg, h, s, &alg.mul(q, q0)?, support, frozen(&[(b, &[x, y])]), "LetPairL", |s2| {
                Term::LetPair(q0.clone(), x.clone(), r.clone(), y.clone(), Box::new(s2), b.clone())
            })?,
        },
        Term::Case(q0, s, x1, b1, x2, b2) => match &**s {
            Term::Inj1(p) | Term::Inj2(p) => {
                let (x, b, rule) = if matches!(&**s, Term::Inj1(_)) { (x1, b1, "CaseOneBeta") } else { (x2, b2, "CaseTwoBeta") };
                let n = fresh(h, support, a, x, &[]);
                let mut h2 = h.clone();
                h2.bindings.push(Binding { name: n.clone(), grade: alg.mul(&alloc_grade(alg, q), q0)?, term: (**p).clone() });
                Raw::Stepped(Step { term: rename_free(b, x, &n), heap: h2, rule, looked_up: None, allocated: vec![(n, None)] })
            }
            _ => left(
                alg,
                h,
                s,
                &alg.mul(q, q0)?,
                support,
                frozen(&[(b1, &[x1]), (b2, &[x2])]),
                "CaseL",
                |s2| Term::Case(q0.clone(), Box::new(s2), x1.clone(), b1.clone(), x2.clone(), b2.clone()),
            )?,
        },
        Term::IntAdd(l, r) => match (&**l, &**r) {
            (Term::IntLit(m), Term::IntLit(n)) => match m.checked_add(*n) {
                Some(k) => Raw::Stepped(Step { term: Term::IntLit(k), heap: h.clone(), rule: "IntAddBeta", looked_up: None, allocated: vec![] }),
                None => Raw::Stuck(HeapStuck::Wrong("integer overflow".into())),
            },
            (Term::IntLit(_), _) => left(alg, h, r, q, support, frozen(&[(l, &[])]), "IntAddR", |r2| Term::IntAdd(l.clone(), Box::new(r2)))?,
            _ => left(alg, h, l, q, support, frozen(&[(r, &[])]), "IntAddL", |l2| Term::IntAdd(Box::new(l2), r.clone()))?,
        },
        _ => unreachable!("values handled above"),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunEnd {
    Value,
    Stuck(HeapStuck),
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub trace: Vec<TraceEntry>,
    pub heap: Heap,
    pub term: Term,
    pub end: RunEnd,
}

/// Iterates `heap_step` at a fixed grade, recording every step.
pub fn run(alg: &Algebra, h: &Heap, a: &Term, q: &Grade, fuel: u64) -> Result<Run, AlgebraError> {
    let support = BTreeSet::new();
    let (mut heap, mut term, mut trace) = (h.clone(), a.clone(), Vec::new());
    for _ in 0..fuel {
        match heap_step(alg, &heap, &term, q, &support)? {
            HeapOutcome::Stepped(e) => {
                heap = e.heap_after.clone();
                term = e.term_after.clone();
                trace.push(*e);
            }
            HeapOutcome::Value => return Ok(Run { trace, heap, term, end: RunEnd::Value }),
            HeapOutcome::Stuck(s) => return Ok(Run { trace, heap, term, end: RunEnd::Stuck(s) }),
        }
    }
    let end = if term.is_value() { RunEnd::Value } else { RunEnd::FuelExhausted };
    Ok(Run { trace, heap, term, end })
}
