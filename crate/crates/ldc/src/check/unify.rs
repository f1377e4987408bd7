//! Simple types with metavariables, used to type injections and unannotated binders.

use std::fmt;

use crate::algebra::Grade;
use crate::syntax::{self, Name, Term, WILDCARD};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Base(Name),
    Unit,
    Int,
    Fun(Grade, Box<Ty>, Box<Ty>),
    Prod(Grade, Box<Ty>, Box<Ty>),
    Sum(Box<Ty>, Box<Ty>),
    Hole(usize),
}

impl Ty {
    pub fn fun(r: Grade, a: Ty, b: Ty) -> Ty {
        Ty::Fun(r, Box::new(a), Box::new(b))
    }

    pub fn prod(r: Grade, a: Ty, b: Ty) -> Ty {
        Ty::Prod(r, Box::new(a), Box::new(b))
    }

    pub fn sum(a: Ty, b: Ty) -> Ty {
        Ty::Sum(Box::new(a), Box::new(b))
    }

    /// Reads a simple type; dependent forms and sorts are rejected.
    pub fn from_term(t: &Term) -> Result<Ty, String> {
        Ok(match t {
            Term::Var(n) => Ty::Base(n.clone()),
            Term::UnitType => Ty::Unit,
            Term::IntType => Ty::Int,
            Term::Pi(x, r, a, b) | Term::Sigma(x, r, a, b) => {
                if x != WILDCARD && b.occurs_free(x) {
                    return Err(format!("dependent type `{t}` is outside the simple fragment"));
                }
                let (a, b) = (Ty::from_term(a)?, Ty::from_term(b)?);
                if matches!(t, Term::Pi(..)) {
                    Ty::fun(r.clone(), a, b)
                } else {
                    Ty::prod(r.clone(), a, b)
                }
            }
            Term::Sum(a, b) => Ty::sum(Ty::from_term(a)?, Ty::from_term(b)?),
            Term::Sort(s) => return Err(format!("sort `{s}` is outside the simple fragment")),
            _ => return Err(format!("`{t}` is not a type")),
        })
    }

    /// Unsolved holes print as `?n`.
    pub fn to_term(&self) -> Term {
        match self {
            Ty::Base(n) => Term::Var(n.clone()),
            Ty::Unit => Term::UnitType,
            Ty::Int => Term::IntType,
            Ty::Fun(r, a, b) => syntax::arrow(r.clone(), a.to_term(), b.to_term()),
            Ty::Prod(r, a, b) => syntax::product(r.clone(), a.to_term(), b.to_term()),
            Ty::Sum(a, b) => syntax::sum(a.to_term(), b.to_term()),
            Ty::Hole(n) => Term::Var(format!("?{n}")),
        }
    }

    /// Replaces unsolved holes by `Unit`.
    pub fn default_holes(&self) -> Ty {
        match self {
            Ty::Hole(_) => Ty::Unit,
            Ty::Fun(r, a, b) => Ty::fun(r.clone(), a.default_holes(), b.default_holes()),
            Ty::Prod(r, a, b) => Ty::prod(r.clone(), a.default_holes(), b.default_holes()),
            Ty::Sum(a, b) => Ty::sum(a.default_holes(), b.default_holes()),
            t => t.clone(),
        }
    }

    pub fn has_holes(&self) -> bool {
        match self {
            Ty::Hole(_) => true,
            Ty::Fun(_, a, b) | Ty::Prod(_, a, b) | Ty::Sum(a, b) => a.has_holes() || b.has_holes(),
            _ => false,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_type(&self.to_term()))
    }
}

/// A substitution for holes, grown by unification.
#[derive(Clone, Debug, Default)]
pub struct Unifier {
    slots: Vec<Option<Ty>>,
}

impl Unifier {
    pub fn new() -> Unifier {
        Unifier::default()
    }

    pub fn fresh(&mut self) -> Ty {
        self.slots.push(None);
        Ty::Hole(self.slots.len() - 1)
    }

    /// Resolves holes at the head only.
    pub fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Hole(n) = t {
            match &self.slots[n] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    /// Resolves holes everywhere.
    pub fn zonk(&self, t: &Ty) -> Ty {
        match self.shallow(t) {
            Ty::Fun(r, a, b) => Ty::fun(r, self.zonk(&a), self.zonk(&b)),
            Ty::Prod(r, a, b) => Ty::prod(r, self.zonk(&a), self.zonk(&b)),
            Ty::Sum(a, b) => Ty::sum(self.zonk(&a), self.zonk(&b)),
            t => t,
        }
    }

    fn occurs(&self, n: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Hole(m) => m == n,
            Ty::Fun(_, a, b) | Ty::Prod(_, a, b) | Ty::Sum(a, b) => self.occurs(n, &a) || self.occurs(n, &b),
            _ => false,
        }
    }

    /// Makes `a` and `b` equal, grade annotations included. On failure the
    /// substitution may be partially extended.
    pub fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        let (a, b) = (self.shallow(a), self.shallow(b));
        match (&a, &b) {
            (Ty::Hole(m), Ty::Hole(n)) if m == n => true,
            (Ty::Hole(n), t) | (t, Ty::Hole(n)) => {
                if self.occurs(*n, t) {
                    return false;
                }
                self.slots[*n] = Some(t.clone());
                true
            }
            (Ty::Base(x), Ty::Base(y)) => x == y,
            (Ty::Unit, Ty::Unit) | (Ty::Int, Ty::Int) => true,
            (Ty::Fun(r1, a1, b1), Ty::Fun(r2, a2, b2)) | (Ty::Prod(r1, a1, b1), Ty::Prod(r2, a2, b2)) => {
                r1 == r2 && self.unify(a1, a2) && self.unify(b1, b2)
            }
            (Ty::Sum(a1, b1), Ty::Sum(a2, b2)) => self.unify(a1, a2) && self.unify(b1, b2),
            _ => false,
        }
    }
}
