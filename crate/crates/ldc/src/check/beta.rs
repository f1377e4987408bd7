//! Fuel-bounded beta equality with grade-annotation matching.

use thiserror::Error;

use crate::eval::{step, StepOutcome};
use crate::syntax::{fresh_name, rename_free, Term};

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum BetaError {
    #[error("beta reduction ran out of fuel")]
    FuelExhausted,
}

/// Weak-head normal form under call-by-name, charging one unit of fuel per step.
pub fn whnf(a: &Term, fuel: &mut u64) -> Result<Term, BetaError> {
    let mut t = a.clone();
    loop {
        match step(&t) {
            StepOutcome::Stepped(next) => {
                if *fuel == 0 {
                    return Err(BetaError::FuelExhausted);
                }
                *fuel -= 1;
                t = next;
            }
            _ => return Ok(t),
        }
    }
}

/// Full normal form, for diagnostics.
pub fn normal_form(a: &Term, fuel: &mut u64) -> Result<Term, BetaError> {
    use Term::*;
    let t = whnf(a, fuel)?;
    let bx = |t: Term| Box::new(t);
    Ok(match t {
        Lam(r, x, d, b) => Lam(
            r,
            x,
            d.map(|d| normal_form(&d, fuel)).transpose()?.map(bx),
            bx(normal_form(&b, fuel)?),
        ),
        App(f, a, r) => App(bx(normal_form(&f, fuel)?), bx(normal_form(&a, fuel)?), r),
        LetUnit(q, s, b) => LetUnit(q, bx(normal_form(&s, fuel)?), bx(normal_form(&b, fuel)?)),
        Pair(a, r, b) => Pair(bx(normal_form(&a, fuel)?), r, bx(normal_form(&b, fuel)?)),
        LetPair(q, x, r, y, s, b) => LetPair(q, x, r, y, bx(normal_form(&s, fuel)?), bx(normal_form(&b, fuel)?)),
        Inj1(a) => Inj1(bx(normal_form(&a, fuel)?)),
        Inj2(a) => Inj2(bx(normal_form(&a, fuel)?)),
        Case(q, s, x1, b1, x2, b2) => Case(
            q,
            bx(normal_form(&s, fuel)?),
            x1,
            bx(normal_form(&b1, fuel)?),
            x2,
            bx(normal_form(&b2, fuel)?),
        ),
        Pi(x, r, a, b) => Pi(x, r, bx(normal_form(&a, fuel)?), bx(normal_form(&b, fuel)?)),
        Sigma(x, r, a, b) => Sigma(x, r, bx(normal_form(&a, fuel)?), bx(normal_form(&b, fuel)?)),
        Sum(a, b) => Sum(bx(normal_form(&a, fuel)?), bx(normal_form(&b, fuel)?)),
        IntAdd(a, b) => IntAdd(bx(normal_form(&a, fuel)?), bx(normal_form(&b, fuel)?)),
        t => t,
    })
}

/// Decides whether `a` and `b` are equal up to alpha and beta, comparing grade
/// annotations for equality at every node.
pub fn beta_equal(a: &Term, b: &Term, fuel: u64) -> Result<bool, BetaError> {
    let mut fuel = fuel;
    eq(a, b, &mut fuel)
}

pub(crate) fn beta_equal_with(a: &Term, b: &Term, fuel: &mut u64) -> Result<bool, BetaError> {
    eq(a, b, fuel)
}

/// Renames the binders of two bodies to one common fresh name.
fn open2(x: &str, b1: &Term, y: &str, b2: &Term) -> (Term, Term) {
    if x == y {
        return (b1.clone(), b2.clone());
    }
    let mut taken = b1.all_names();
    taken.extend(b2.all_names());
    let z = fresh_name(x, |n| taken.contains(n));
    (rename_free(b1, x, &z), rename_free(b2, y, &z))
}

fn eq(a: &Term, b: &Term, fuel: &mut u64) -> Result<bool, BetaError> {
    use Term::*;
    if a == b {
        return Ok(true);
    }
    let (a, b) = (whnf(a, fuel)?, whnf(b, fuel)?);
    Ok(match (&a, &b) {
        (Var(x), Var(y)) => x == y,
        (Sort(s), Sort(t)) => s == t,
        (Unit, Unit) | (UnitType, UnitType) | (IntType, IntType) => true,
        (IntLit(m), IntLit(n)) => m == n,
        (Lam(r1, x1, d1, b1), Lam(r2, x2, d2, b2)) => {
            if r1 != r2 {
                return Ok(false);
            }
            if let (Some(d1), Some(d2)) = (d1, d2) {
                if !eq(d1, d2, fuel)? {
                    return Ok(false);
                }
            }
            let (b1, b2) = open2(x1, b1, x2, b2);
            eq(&b1, &b2, fuel)?
        }
        (Pi(x1, r1, a1, b1), Pi(x2, r2, a2, b2)) | (Sigma(x1, r1, a1, b1), Sigma(x2, r2, a2, b2)) => {
            if r1 != r2 || !eq(a1, a2, fuel)? {
                return Ok(false);
            }
            let (b1, b2) = open2(x1, b1, x2, b2);
            eq(&b1, &b2, fuel)?
        }
        (App(f1, a1, r1), App(f2, a2, r2)) => r1 == r2 && eq(f1, f2, fuel)? && eq(a1, a2, fuel)?,
        (Pair(a1, r1, b1), Pair(a2, r2, b2)) => r1 == r2 && eq(a1, a2, fuel)? && eq(b1, b2, fuel)?,
        (Sum(a1, b1), Sum(a2, b2)) | (IntAdd(a1, b1), IntAdd(a2, b2)) => eq(a1, a2, fuel)? && eq(b1, b2, fuel)?,
        (Inj1(a1), Inj1(a2)) | (Inj2(a1), Inj2(a2)) => eq(a1, a2, fuel)?,
        (LetUnit(q1, s1, b1), LetUnit(q2, s2, b2)) => q1 == q2 && eq(s1, s2, fuel)? && eq(b1, b2, fuel)?,
        (LetPair(q1, x1, r1, y1, s1, b1), LetPair(q2, x2, r2, y2, s2, b2)) => {
            if q1 != q2 || r1 != r2 || !eq(s1, s2, fuel)? {
                return Ok(false);
            }
            let (b1, b2) = open2(x1, b1, x2, b2);
            let (b1, b2) = open2(y1, &b1, y2, &b2);
            eq(&b1, &b2, fuel)?
        }
        (Case(q1, s1, x1, l1, y1, r1), Case(q2, s2, x2, l2, y2, r2)) => {
            if q1 != q2 || !eq(s1, s2, fuel)? {
                return Ok(false);
            }
            let (l1, l2) = open2(x1, l1, x2, l2);
            let (r1, r2) = open2(y1, r1, y2, r2);
            eq(&l1, &l2, fuel)? && eq(&r1, &r2, fuel)?
        }
        _ => false,
    })
}
