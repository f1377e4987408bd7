//! Call-by-name small-step evaluation.

use thiserror::Error;

use crate::syntax::{fresh_name, rename_free, subst, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped(Term),
    Value,
    Stuck(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("stuck at `{term}`: {reason}")]
    Stuck { term: String, reason: String },
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
}

/// `b{a1/x}{a2/y}` performed simultaneously.
pub fn subst2(b: &Term, x: &str, a1: &Term, y: &str, a2: &Term) -> Term {
    if x == y {
        return subst(b, y, a2);
    }
    let mut taken = b.all_names();
    taken.insert(x.to_string());
    taken.insert(y.to_string());
    taken.extend(a1.free_vars());
    taken.extend(a2.free_vars());
    let y2 = fresh_name(y, |n| taken.contains(n));
    let b = rename_free(b, y, &y2);
    subst(&subst(&b, x, a1), &y2, a2)
}

/// One leftmost call-by-name step. Beta rules fire only when the grade on the
/// introduction form equals the one on the elimination form.
pub fn step(a: &Term) -> StepOutcome {
    use StepOutcome::*;
    if a.is_value() {
        return Value;
    }
    let congr = |inner: &Term, rebuild: &dyn Fn(Term) -> Term, what: &str| match step(inner) {
        Stepped(t) => Stepped(rebuild(t)),
        Value => Stuck(format!("{what} expected, found `{inner}`")),
        s @ Stuck(_) => s,
    };
    match a {
        Term::Var(x) => Stuck(format!("free variable `{x}`")),
        Term::App(f, arg, r) => match &**f {
            Term::Lam(r2, x, _, body) if r2 == r => Stepped(subst(body, x, arg)),
            Term::Lam(r2, ..) => Stuck(format!("annotation mismatch: lambda at {r2}, application at {r}")),
            _ => congr(f, &|f2| Term::App(Box::new(f2), arg.clone(), r.clone()), "function"),
        },
        Term::LetUnit(q0, s, b) => match &**s {
            Term::Unit => Stepped((**b).clone()),
            _ => congr(s, &|s2| Term::LetUnit(q0.clone(), Box::new(s2), b.clone()), "unit"),
        },
        Term::LetPair(q0, x, r, y, s, b) => match &**s {
            Term::Pair(a1, r2, a2) if r2 == r => Stepped(subst2(b, x, a1, y, a2)),
            Term::Pair(_, r2, _) => Stuck(format!("annotation mismatch: pair at {r2}, pattern at {r}")),
            _ => congr(
                s,
                &|s2| Term::LetPair(q0.clone(), x.clone(), r.clone(), y.clone(), Box::new(s2), b.clone()),
                "pair",
            ),
        },
        Term::Case(q0, s, x1, b1, x2, b2) => match &**s {
            Term::Inj1(p) => Stepped(subst(b1, x1, p)),
            Term::Inj2(p) => Stepped(subst(b2, x2, p)),
            _ => congr(
                s,
                &|s2| Term::Case(q0.clone(), Box::new(s2), x1.clone(), b1.clone(), x2.clone(), b2.clone()),
                "injection",
            ),
        },
        Term::IntAdd(l, r) => match (&**l, &**r) {
            (Term::IntLit(m), Term::IntLit(n)) => match m.checked_add(*n) {
                Some(k) => Stepped(Term::IntLit(k)),
                None => Stuck("integer overflow".into()),
            },
            (Term::IntLit(_), _) => congr(r, &|r2| Term::IntAdd(l.clone(), Box::new(r2)), "integer"),
            _ => congr(l, &|l2| Term::IntAdd(Box::new(l2), r.clone()), "integer"),
        },
        _ => unreachable!("values handled above"),
    }
}

/// Steps until a value, failing when stuck or out of fuel.
pub fn normalize(a: &Term, fuel: u64) -> Result<Term, EvalError> {
    let mut t = a.clone();
    for _ in 0..fuel {
        match step(&t) {
            StepOutcome::Stepped(next) => t = next,
            StepOutcome::Value => return Ok(t),
            StepOutcome::Stuck(reason) => return Err(EvalError::Stuck { term: t.to_string(), reason }),
        }
    }
    match step(&t) {
        StepOutcome::Value => Ok(t),
        _ => Err(EvalError::FuelExhausted(fuel)),
    }
}

/// The sequence of terms visited, starting with `a`.
pub fn trace(a: &Term, fuel: u64) -> (Vec<Term>, StepOutcome) {
    let mut out = vec![a.clone()];
    for _ in 0..fuel {
        match step(out.last().expect("non-empty")) {
            StepOutcome::Stepped(next) => out.push(next),
            other => return (out, other),
        }
    }
    let last = step(out.last().expect("non-empty"));
    (out, last)
}
