//! Principal-usage checker for the simple fragment.
//!
//! Every rule is run at a fixed observer grade and returns the least demand it
//! places on each free variable. A context is accepted when each of its grades
//! is `<:` the corresponding demand, which discharges subsumption on the left
//! in one comparison.

use std::collections::BTreeMap;

use crate::algebra::{Algebra, AlgebraError, Grade, UsageVector};
use crate::syntax::{GradedContext, Name, Term};

use super::unify::{Ty, Unifier};
use super::CheckError;

/// Demand per free variable; absent entries mean zero.
pub(crate) type Demand = BTreeMap<Name, Grade>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthResult {
    pub ty: Term,
    pub principal: UsageVector,
}

pub fn synth(alg: &Algebra, skeleton: &[(Name, Term)], a: &Term, q: &Grade) -> Result<SynthResult, CheckError> {
    synth_expected(alg, skeleton, a, q, None)
}

/// Synthesises the type and principal usage of `a` at `q`, optionally against
/// an expected type.
pub fn synth_expected(
    alg: &Algebra,
    skeleton: &[(Name, Term)],
    a: &Term,
    q: &Grade,
    expected: Option<&Term>,
) -> Result<SynthResult, CheckError> {
    require_grades(alg, a)?;
    require_grade(alg, q)?;
    let mut e = Engine { alg, uni: Unifier::new(), scope: Vec::new() };
    for (x, t) in skeleton {
        let ty = Ty::from_term(t).map_err(CheckError::NotSimple)?;
        e.scope.push((x.clone(), ty));
    }
    let exp = match expected {
        Some(t) => Ty::from_term(t).map_err(CheckError::NotSimple)?,
        None => e.uni.fresh(),
    };
    let d = e.infer(a, q, &exp)?;
    let principal = UsageVector::new(
        skeleton
            .iter()
            .map(|(x, _)| (x.clone(), d.get(x).cloned().unwrap_or_else(|| alg.zero())))
            .collect(),
    );
    Ok(SynthResult { ty: e.uni.zonk(&exp).to_term(), principal })
}

/// Checks `ctx ⊢ a :^q A`, returning the type.
pub fn check(
    alg: &Algebra,
    ctx: &GradedContext,
    a: &Term,
    q: &Grade,
    expected: Option<&Term>,
) -> Result<Term, CheckError> {
    let skeleton: Vec<(Name, Term)> = ctx.entries().iter().map(|e| (e.name.clone(), e.ty.clone())).collect();
    let res = synth_expected(alg, &skeleton, a, q, expected)?;
    for (entry, (_, demand)) in ctx.entries().iter().zip(&res.principal.entries) {
        if !alg.leq(&entry.grade, demand)? {
            return Err(CheckError::Usage {
                rule: "SubL",
                var: entry.name.clone(),
                available: entry.grade.clone(),
                demand: demand.clone(),
            });
        }
    }
    Ok(res.ty)
}

/// Joint typing of a heap configuration: each binding at its weight over the
/// earlier bindings, then the term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigTyping {
    /// Unsolved holes default to `Unit`.
    pub types: Vec<Term>,
    pub binding_usage: Vec<UsageVector>,
    pub result: SynthResult,
}

/// A binding in a configuration: name, weight, definition and optional type.
pub type ConfigBinding = (Name, Grade, Term, Option<Term>);

pub fn synth_config(
    alg: &Algebra,
    bindings: &[ConfigBinding],
    a: &Term,
    q: &Grade,
    expected: Option<&Term>,
) -> Result<ConfigTyping, CheckError> {
    require_grades(alg, a)?;
    require_grade(alg, q)?;
    let mut e = Engine { alg, uni: Unifier::new(), scope: Vec::new() };
    let mut demands = Vec::new();
    for (x, w, def, ty) in bindings {
        require_grade(alg, w)?;
        require_grades(alg, def)?;
        let ty = match ty {
            Some(t) => Ty::from_term(t).map_err(CheckError::NotSimple)?,
            None => e.uni.fresh(),
        };
        demands.push(e.infer(def, w, &ty)?);
        e.scope.push((x.clone(), ty));
    }
    let exp = match expected {
        Some(t) => Ty::from_term(t).map_err(CheckError::NotSimple)?,
        None => e.uni.fresh(),
    };
    let d = e.infer(a, q, &exp)?;
    let vector = |d: &Demand, upto: usize| {
        UsageVector::new(
            bindings[..upto]
                .iter()
                .map(|(x, ..)| (x.clone(), d.get(x).cloned().unwrap_or_else(|| alg.zero())))
                .collect(),
        )
    };
    let ground = |t: &Ty| e.uni.zonk(t).default_holes().to_term();
    Ok(ConfigTyping {
        types: e.scope.iter().map(|(_, t)| ground(t)).collect(),
        binding_usage: demands.iter().enumerate().map(|(i, d)| vector(d, i)).collect(),
        result: SynthResult { ty: ground(&exp), principal: vector(&d, bindings.len()) },
    })
}

pub(crate) fn require_grade(alg: &Algebra, g: &Grade) -> Result<(), CheckError> {
    if alg.contains(g) {
        Ok(())
    } else {
        Err(AlgebraError::Mismatch { grade: g.to_string(), algebra: alg.name() }.into())
    }
}

pub(crate) fn require_grades(alg: &Algebra, a: &Term) -> Result<(), CheckError> {
    a.grades().into_iter().try_for_each(|g| require_grade(alg, g))
}

struct Engine<'a> {
    alg: &'a Algebra,
    uni: Unifier,
    scope: Vec<(Name, Ty)>,
}

impl Engine<'_> {
    fn mul(&self, a: &Grade, b: &Grade) -> Result<Grade, CheckError> {
        Ok(self.alg.mul(a, b)?)
    }

    fn plus(&self, mut d1: Demand, d2: Demand) -> Result<Demand, CheckError> {
        for (x, g) in d2 {
            let sum = match d1.get(&x) {
                Some(h) => self.alg.add(h, &g)?,
                None => g,
            };
            d1.insert(x, sum);
        }
        Ok(d1)
    }

    fn scale(&self, q: &Grade, d: Demand) -> Result<Demand, CheckError> {
        d.into_iter().map(|(x, g)| Ok((x, self.mul(q, &g)?))).collect()
    }

    /// Removes the binder `x` from `d`, checking that its grade covers the demand.
    fn bind(&self, rule: &'static str, d: &mut Demand, x: &str, available: Grade) -> Result<(), CheckError> {
        let demand = d.remove(x).unwrap_or_else(|| self.alg.zero());
        if self.alg.leq(&available, &demand)? {
            Ok(())
        } else {
            Err(CheckError::Usage { rule, var: x.to_string(), available, demand })
        }
    }

    fn elim(&self, rule: &'static str, q0: &Grade) -> Result<(), CheckError> {
        if self.alg.leq(q0, &self.alg.one())? {
            Ok(())
        } else {
            Err(CheckError::ElimGrade { rule, q0: q0.clone() })
        }
    }

    fn expect(&mut self, rule: &'static str, expected: &Ty, found: &Ty) -> Result<(), CheckError> {
        if self.uni.unify(expected, found) {
            Ok(())
        } else {
            Err(CheckError::Mismatch {
                rule,
                expected: self.uni.zonk(expected).to_string(),
                found: self.uni.zonk(found).to_string(),
            })
        }
    }

    fn with<T>(&mut self, binds: Vec<(Name, Ty)>, f: impl FnOnce(&mut Self) -> T) -> T {
        let n = self.scope.len();
        self.scope.extend(binds);
        let out = f(self);
        self.scope.truncate(n);
        out
    }

    /// Runs the syntax-directed rule at `q`; when it fails on grades alone,
    /// retries at the `ω` floor of `q` and weakens back by subsumption.
    fn infer(&mut self, a: &Term, q: &Grade, exp: &Ty) -> Result<Demand, CheckError> {
        let Some(floor) = self.alg.omega_floor(q) else { return self.infer_at(a, q, exp) };
        let saved = self.uni.clone();
        match self.infer_at(a, q, exp) {
            Err(e @ (CheckError::Usage { .. } | CheckError::Branches { .. } | CheckError::Unfair { .. })) => {
                self.uni = saved;
                self.infer_at(a, &floor, exp).map_err(|_| e)
            }
            other => other,
        }
    }

    fn infer_at(&mut self, a: &Term, q: &Grade, exp: &Ty) -> Result<Demand, CheckError> {
        match a {
            Term::Var(x) => {
                let ty = self
                    .scope
                    .iter()
                    .rev()
                    .find(|(y, _)| y == x)
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| CheckError::Unbound(x.clone()))?;
                self.expect("Var", exp, &ty)?;
                let mut d = Demand::new();
                if !self.alg.is_zero(q) {
                    d.insert(x.clone(), q.clone());
                }
                Ok(d)
            }
            Term::Lam(r, x, dom, body) => {
                let rule = if self.alg.has_omega() { "LamOmega" } else { "Lam" };
                if self.alg.omega_violation(q, r) {
                    let (q0, q1) = self.alg.omega_factor(q);
                    if self.alg.omega_violation(&q1, r) || q1 == *q {
                        return Err(CheckError::Unfair { binder: r.clone(), grade: q.clone() });
                    }
                    let d = self.infer_at(a, &q1, exp)?;
                    return self.scale(&q0, d);
                }
                let dom_ty = match dom {
                    Some(t) => Ty::from_term(t).map_err(CheckError::NotSimple)?,
                    None => self.uni.fresh(),
                };
                let cod = self.uni.fresh();
                self.expect(rule, exp, &Ty::fun(r.clone(), dom_ty.clone(), cod.clone()))?;
                let mut d = self.with(vec![(x.clone(), dom_ty)], |e| e.infer(body, q, &cod))?;
                self.bind(rule, &mut d, x, self.mul(q, r)?)?;
                Ok(d)
            }
            Term::App(f, arg, r) => {
                let dom = self.uni.fresh();
                let d1 = self.infer(f, q, &Ty::fun(r.clone(), dom.clone(), exp.clone()))?;
                let d2 = self.infer(arg, &self.mul(q, r)?, &dom)?;
                self.plus(d1, d2)
            }
            Term::Unit => {
                self.expect("Unit", exp, &Ty::Unit)?;
                Ok(Demand::new())
            }
            Term::LetUnit(q0, s, b) => {
                self.elim("LetUnit", q0)?;
                let d1 = self.infer(s, &self.mul(q, q0)?, &Ty::Unit)?;
                let d2 = self.infer(b, q, exp)?;
                self.plus(d1, d2)
            }
            Term::Pair(a1, r, a2) => {
                let (t1, t2) = (self.uni.fresh(), self.uni.fresh());
                self.expect("Pair", exp, &Ty::prod(r.clone(), t1.clone(), t2.clone()))?;
                let d1 = self.infer(a1, &self.mul(q, r)?, &t1)?;
                let d2 = self.infer(a2, q, &t2)?;
                self.plus(d1, d2)
            }
            Term::LetPair(q0, x, r, y, s, b) => {
                self.elim("LetPair", q0)?;
                let (t1, t2) = (self.uni.fresh(), self.uni.fresh());
                let qq0 = self.mul(q, q0)?;
                let d1 = self.infer(s, &qq0, &Ty::prod(r.clone(), t1.clone(), t2.clone()))?;
                let mut d2 = self.with(vec![(x.clone(), t1), (y.clone(), t2)], |e| e.infer(b, q, exp))?;
                self.bind("LetPair", &mut d2, y, qq0.clone())?;
                self.bind("LetPair", &mut d2, x, self.mul(&qq0, r)?)?;
                self.plus(d1, d2)
            }
            Term::Inj1(p) | Term::Inj2(p) => {
                let (t1, t2) = (self.uni.fresh(), self.uni.fresh());
                self.expect("Inj", exp, &Ty::sum(t1.clone(), t2.clone()))?;
                let payload = if matches!(a, Term::Inj1(_)) { t1 } else { t2 };
                self.infer(p, q, &payload)
            }
            Term::Case(q0, s, x1, b1, x2, b2) => {
                self.elim("Case", q0)?;
                let (t1, t2) = (self.uni.fresh(), self.uni.fresh());
                let qq0 = self.mul(q, q0)?;
                let d0 = self.infer(s, &qq0, &Ty::sum(t1.clone(), t2.clone()))?;
                let mut l = self.with(vec![(x1.clone(), t1)], |e| e.infer(b1, q, exp))?;
                self.bind("Case", &mut l, x1, qq0.clone())?;
                let mut r = self.with(vec![(x2.clone(), t2)], |e| e.infer(b2, q, exp))?;
                self.bind("Case", &mut r, x2, qq0)?;
                let merged = self.merge(l, r)?;
                self.plus(d0, merged)
            }
            Term::IntLit(_) => {
                self.expect("Int", exp, &Ty::Int)?;
                Ok(Demand::new())
            }
            Term::IntAdd(l, r) => {
                self.expect("IntAdd", exp, &Ty::Int)?;
                let d1 = self.infer(l, q, &Ty::Int)?;
                let d2 = self.infer(r, q, &Ty::Int)?;
                self.plus(d1, d2)
            }
            Term::Sort(_) | Term::Pi(..) | Term::Sigma(..) | Term::Sum(..) | Term::UnitType | Term::IntType => Err(
                CheckError::NotSimple(format!("type `{a}` used as a term is outside the simple fragment")),
            ),
        }
    }

    /// Pointwise greatest lower bound of two branch demands.
    fn merge(&self, l: Demand, mut r: Demand) -> Result<Demand, CheckError> {
        let zero = self.alg.zero();
        let mut out = Demand::new();
        for (x, gl) in l {
            let gr = r.remove(&x).unwrap_or_else(|| zero.clone());
            out.insert(x.clone(), self.meet(&x, gl, gr)?);
        }
        for (x, gr) in r {
            out.insert(x.clone(), self.meet(&x, zero.clone(), gr)?);
        }
        Ok(out)
    }

    fn meet(&self, x: &str, l: Grade, r: Grade) -> Result<Grade, CheckError> {
        self.alg
            .glb(&l, &r)?
            .ok_or(CheckError::Branches { var: x.to_string(), left: l, right: r })
    }
}
