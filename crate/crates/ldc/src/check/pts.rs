//! Checker for the dependent fragment over a pure type system.
//!
//! Premises about types run in the zero world: they are checked at grade zero
//! and their demands are discarded. Conversion folds the context's
//! definitions into both sides before comparing.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::algebra::{Algebra, Grade, UsageVector};
use crate::syntax::{fresh_name, multi_subst, rename_free, subst, GradedContext, Name, Term, WILDCARD};

use super::beta::{beta_equal_with, normal_form, whnf, BetaError};
use super::simple::{require_grade, require_grades, Demand, SynthResult};
use super::CheckError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("type system specification: {0}")]
pub struct PtsSpecError(pub String);

/// Sorts, axioms and rules of a pure type system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PtsSpec {
    pub name: String,
    pub sorts: Vec<Name>,
    pub axioms: Vec<(Name, Name)>,
    pub rules: Vec<(Name, Name, Name)>,
}

fn canon_sort(s: &str) -> String {
    match s.trim() {
        "□" => "box".into(),
        s => s.to_string(),
    }
}

impl PtsSpec {
    pub fn new(name: &str, sorts: &[&str], axioms: &[(&str, &str)], rules: &[(&str, &str, &str)]) -> Result<PtsSpec, PtsSpecError> {
        let spec = PtsSpec {
            name: name.to_string(),
            sorts: sorts.iter().map(|s| canon_sort(s)).collect(),
            axioms: axioms.iter().map(|(a, b)| (canon_sort(a), canon_sort(b))).collect(),
            rules: rules.iter().map(|(a, b, c)| (canon_sort(a), canon_sort(b), canon_sort(c))).collect(),
        };
        let known = |s: &String| spec.sorts.contains(s);
        if spec.sorts.is_empty() {
            return Err(PtsSpecError("no sorts".into()));
        }
        for (a, b) in &spec.axioms {
            if !known(a) || !known(b) {
                return Err(PtsSpecError(format!("axiom {a}:{b} mentions an undeclared sort")));
            }
        }
        for (a, b, c) in &spec.rules {
            if !known(a) || !known(b) || !known(c) {
                return Err(PtsSpecError(format!("rule ({a},{b},{c}) mentions an undeclared sort")));
            }
        }
        Ok(spec)
    }

    /// `stlc`, `system-f`, `cc` or `type-in-type`.
    pub fn preset(name: &str) -> Option<PtsSpec> {
        let base: &[(&str, &str, &str)] = &[("*", "*", "*")];
        let spec = match name {
            "stlc" => PtsSpec::new("stlc", &["*", "box"], &[("*", "box")], base),
            "system-f" => PtsSpec::new("system-f", &["*", "box"], &[("*", "box")], &[("*", "*", "*"), ("box", "*", "*")]),
            "cc" => PtsSpec::new(
                "cc",
                &["*", "box"],
                &[("*", "box")],
                &[("*", "*", "*"), ("box", "*", "*"), ("*", "box", "box"), ("box", "box", "box")],
            ),
            "type-in-type" => PtsSpec::new("type-in-type", &["*"], &[("*", "*")], base),
            _ => return None,
        };
        Some(spec.expect("presets are well formed"))
    }

    /// Parses `sorts: *, box` / `axioms: *:box` / `rules: (*,*,*), (box,*,*)`.
    /// A rule `(s1,s2)` abbreviates `(s1,s2,s2)`.
    pub fn parse(name: &str, text: &str) -> Result<PtsSpec, PtsSpecError> {
        let (mut sorts, mut axioms, mut rules) = (Vec::new(), Vec::new(), Vec::new());
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| PtsSpecError(format!("unrecognised line `{line}`")))?;
            match key.trim() {
                "sorts" => sorts.extend(rest.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from)),
                "axioms" => {
                    for ax in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let (a, b) = ax.split_once(':').ok_or_else(|| PtsSpecError(format!("bad axiom `{ax}`")))?;
                        axioms.push((a.trim().to_string(), b.trim().to_string()));
                    }
                }
                "rules" => {
                    for group in rest.split(')').map(|g| g.trim().trim_start_matches(',').trim()).filter(|g| !g.is_empty()) {
                        let inner = group
                            .strip_prefix('(')
                            .ok_or_else(|| PtsSpecError(format!("bad rule `{group}`")))?;
                        let parts: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).collect();
                        match parts.as_slice() {
                            [a, b] => rules.push((a.clone(), b.clone(), b.clone())),
                            [a, b, c] => rules.push((a.clone(), b.clone(), c.clone())),
                            _ => return Err(PtsSpecError(format!("bad rule `{group})`"))),
                        }
                    }
                }
                k => return Err(PtsSpecError(format!("unknown key `{k}`"))),
            }
        }
        let s: Vec<&str> = sorts.iter().map(String::as_str).collect();
        let a: Vec<(&str, &str)> = axioms.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
        let r: Vec<(&str, &str, &str)> = rules.iter().map(|(x, y, z)| (x.as_str(), y.as_str(), z.as_str())).collect();
        PtsSpec::new(name, &s, &a, &r)
    }

    /// A preset name, or a path to a specification file.
    pub fn from_selector(sel: &str) -> Result<PtsSpec, PtsSpecError> {
        if let Some(p) = PtsSpec::preset(sel) {
            return Ok(p);
        }
        let path = Path::new(sel);
        let text = std::fs::read_to_string(path).map_err(|e| PtsSpecError(format!("{sel}: {e}")))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(sel);
        PtsSpec::parse(name, &text)
    }

    pub fn axiom(&self, s: &str) -> Option<&Name> {
        self.axioms.iter().find(|(a, _)| a == s).map(|(_, b)| b)
    }

    pub fn rule(&self, s1: &str, s2: &str) -> Option<&Name> {
        self.rules.iter().find(|(a, b, _)| a == s1 && b == s2).map(|(_, _, c)| c)
    }

    /// The sort of ordinary data types such as `Unit` and `Int`.
    pub fn base_sort(&self) -> &Name {
        &self.sorts[0]
    }

    /// Replaces free variables named after sorts by sorts.
    pub fn resolve_sorts(&self, t: &Term, bound: &[Name]) -> Term {
        let mut out = t.clone();
        for s in &self.sorts {
            if !bound.contains(s) && out.occurs_free(s) {
                out = subst(&out, s, &Term::Sort(s.clone()));
            }
        }
        out
    }
}

/// Synthesises type and principal usage of `a` at `q` in a context whose
/// entries may carry definitions.
pub fn synth_pts(
    spec: &PtsSpec,
    alg: &Algebra,
    ctx: &GradedContext,
    a: &Term,
    q: &Grade,
    expected: Option<&Term>,
    fuel: u64,
) -> Result<SynthResult, CheckError> {
    require_grade(alg, q)?;
    let mut e = Pts { spec, alg, fuel, scope: Vec::new(), defs: GradedContext::new() };
    let mut bound = Vec::new();
    for entry in ctx.entries() {
        let ty = spec.resolve_sorts(&entry.ty, &bound);
        require_grades(alg, &ty)?;
        e.sort_of(&ty, "Weak")?;
        let def = entry.def.as_ref().map(|d| spec.resolve_sorts(d, &bound));
        if let Some(d) = &def {
            require_grades(alg, d)?;
            e.zero_check(d, &ty)?;
        }
        e.defs.push(crate::syntax::Entry { def, ty: ty.clone(), ..entry.clone() }).expect("context already validated");
        e.scope.push((entry.name.clone(), ty));
        bound.push(entry.name.clone());
    }
    let a = spec.resolve_sorts(a, &bound);
    require_grades(alg, &a)?;
    let expected = expected.map(|t| spec.resolve_sorts(t, &bound));
    if let Some(t) = &expected {
        require_grades(alg, t)?;
        if !matches!(t, Term::Sort(_)) {
            e.sort_of(t, "Conv")?;
        }
    }
    let (ty, d) = e.infer(&a, q, expected.as_ref())?;
    let principal = UsageVector::new(
        ctx.entries()
            .iter()
            .map(|en| (en.name.clone(), d.get(&en.name).cloned().unwrap_or_else(|| alg.zero())))
            .collect(),
    );
    Ok(SynthResult { ty, principal })
}

/// Checks `ctx ⊢ a :^q A` in the dependent fragment, returning the type.
pub fn check_pts(
    spec: &PtsSpec,
    alg: &Algebra,
    ctx: &GradedContext,
    a: &Term,
    q: &Grade,
    expected: Option<&Term>,
    fuel: u64,
) -> Result<Term, CheckError> {
    let res = synth_pts(spec, alg, ctx, a, q, expected, fuel)?;
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

impl From<BetaError> for CheckError {
    fn from(_: BetaError) -> CheckError {
        CheckError::FuelExhausted
    }
}

struct Pts<'a> {
    spec: &'a PtsSpec,
    alg: &'a Algebra,
    fuel: u64,
    scope: Vec<(Name, Term)>,
    defs: GradedContext,
}

impl Pts<'_> {
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

    /// Head normal form after unfolding definitions.
    fn hnf(&mut self, t: &Term) -> Result<Term, CheckError> {
        let t = multi_subst(t, &self.defs);
        Ok(whnf(&t, &mut self.fuel)?)
    }

    fn conv(&mut self, found: &Term, expected: &Term) -> Result<(), CheckError> {
        let (f, e) = (multi_subst(found, &self.defs), multi_subst(expected, &self.defs));
        if beta_equal_with(&f, &e, &mut self.fuel)? {
            return Ok(());
        }
        let mut fuel = self.fuel;
        let nf = |t: &Term, fuel: &mut u64| normal_form(t, fuel).map(|n| n.to_string()).unwrap_or_else(|_| "?".into());
        Err(CheckError::NotConvertible {
            left: found.to_string(),
            right: expected.to_string(),
            left_nf: nf(&f, &mut fuel),
            right_nf: nf(&e, &mut fuel),
        })
    }

    fn mismatch(&self, rule: &'static str, expected: &str, found: &Term) -> CheckError {
        CheckError::Mismatch { rule, expected: expected.to_string(), found: found.to_string() }
    }

    /// The sort classifying `t`, computed in the zero world.
    fn sort_of(&mut self, t: &Term, rule: &'static str) -> Result<Name, CheckError> {
        let zero = self.alg.zero();
        let (ty, _) = self.infer(t, &zero, None)?;
        match self.hnf(&ty)? {
            Term::Sort(s) => Ok(s),
            _ => Err(CheckError::NotSort { rule, term: t.to_string() }),
        }
    }

    fn zero_check(&mut self, t: &Term, ty: &Term) -> Result<(), CheckError> {
        let zero = self.alg.zero();
        self.infer(t, &zero, Some(ty)).map(|_| ())
    }

    /// Picks a name for binder `x` that does not clash with the scope.
    fn enter(&self, x: &str, body: &Term) -> (Name, Term) {
        if x == WILDCARD || !self.scope.iter().any(|(y, _)| y == x) {
            return (x.to_string(), body.clone());
        }
        let mut taken: BTreeSet<Name> = body.all_names();
        taken.extend(self.scope.iter().map(|(y, _)| y.clone()));
        let nx = fresh_name(x, |n| taken.contains(n));
        let body = rename_free(body, x, &nx);
        (nx, body)
    }

    fn with<T>(&mut self, binds: Vec<(Name, Term)>, f: impl FnOnce(&mut Self) -> T) -> T {
        let n = self.scope.len();
        self.scope.extend(binds);
        let out = f(self);
        self.scope.truncate(n);
        out
    }

    fn no_escape(&self, rule: &'static str, ty: &Term, xs: &[&Name]) -> Result<(), CheckError> {
        match xs.iter().find(|x| x.as_str() != WILDCARD && ty.occurs_free(x)) {
            Some(x) => Err(CheckError::Mismatch {
                rule,
                expected: format!("a result type independent of `{x}`"),
                found: ty.to_string(),
            }),
            None => Ok(()),
        }
    }

    fn infer(&mut self, a: &Term, q: &Grade, exp: Option<&Term>) -> Result<(Term, Demand), CheckError> {
        let (ty, d) = self.infer_inner(a, q, exp)?;
        match exp {
            Some(e) => {
                self.conv(&ty, e)?;
                Ok((e.clone(), d))
            }
            None => Ok((ty, d)),
        }
    }

    fn infer_inner(&mut self, a: &Term, q: &Grade, exp: Option<&Term>) -> Result<(Term, Demand), CheckError> {
        match a {
            Term::Var(x) => {
                let ty = self
                    .scope
                    .iter()
                    .rev()
                    .find(|(y, _)| y == x)
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| CheckError::Unbound(x.clone()))?;
                let mut d = Demand::new();
                if !self.alg.is_zero(q) {
                    d.insert(x.clone(), q.clone());
                }
                Ok((ty, d))
            }
            Term::Sort(s) => match self.spec.axiom(s) {
                Some(t) => Ok((Term::Sort(t.clone()), Demand::new())),
                None => Err(CheckError::NoAxiom(s.clone())),
            },
            Term::Pi(x, _, dom, cod) | Term::Sigma(x, _, dom, cod) => {
                let rule = if matches!(a, Term::Pi(..)) { "Pi" } else { "Sigma" };
                let (ta, da) = self.infer(dom, q, None)?;
                let s1 = match self.hnf(&ta)? {
                    Term::Sort(s) => s,
                    _ => return Err(CheckError::NotSort { rule, term: dom.to_string() }),
                };
                let (x2, cod) = self.enter(x, cod);
                let (tb, mut db) = self.with(vec![(x2.clone(), (**dom).clone())], |e| e.infer(&cod, q, None))?;
                let s2 = match self.hnf(&tb)? {
                    Term::Sort(s) => s,
                    _ => return Err(CheckError::NotSort { rule, term: cod.to_string() }),
                };
                db.remove(&x2);
                let s3 = self
                    .spec
                    .rule(&s1, &s2)
                    .ok_or_else(|| CheckError::NoRule { rule, s1: s1.clone(), s2: s2.clone() })?
                    .clone();
                Ok((Term::Sort(s3), self.plus(da, db)?))
            }
            Term::Lam(r, x, dom, body) => {
                if self.alg.omega_violation(q, r) {
                    let (q0, q1) = self.alg.omega_factor(q);
                    if self.alg.omega_violation(&q1, r) || q1 == *q {
                        return Err(CheckError::Unfair { binder: r.clone(), grade: q.clone() });
                    }
                    let (ty, d) = self.infer(a, &q1, exp)?;
                    let d = d.into_iter().map(|(y, g)| Ok((y, self.mul(&q0, &g)?))).collect::<Result<_, CheckError>>()?;
                    return Ok((ty, d));
                }
                let rule = if self.alg.has_omega() { "LamOmega" } else { "Lam" };
                let expected_pi = match exp {
                    Some(e) => match self.hnf(e)? {
                        Term::Pi(z, r2, a2, b2) => {
                            if r2 != *r {
                                return Err(self.mismatch(rule, &format!("a function with binder grade {r}"), e));
                            }
                            Some((z, *a2, *b2))
                        }
                        _ => return Err(self.mismatch(rule, "a function type", e)),
                    },
                    None => None,
                };
                let dom_ty = match (dom, &expected_pi) {
                    (Some(d), _) => (**d).clone(),
                    (None, Some((_, a2, _))) => a2.clone(),
                    (None, None) => return Err(CheckError::NeedsAnnotation(a.to_string())),
                };
                self.sort_of(&dom_ty, rule)?;
                if let (Some(d), Some((_, a2, _))) = (dom, &expected_pi) {
                    self.conv(d, a2)?;
                }
                let (x2, body) = self.enter(x, body);
                let body_exp = expected_pi.as_ref().map(|(z, _, b2)| rename_free(b2, z, &x2));
                let (tb, mut d) =
                    self.with(vec![(x2.clone(), dom_ty.clone())], |e| e.infer(&body, q, body_exp.as_ref()))?;
                self.bind(rule, &mut d, &x2, self.mul(q, r)?)?;
                let pi = Term::Pi(x2, r.clone(), Box::new(dom_ty), Box::new(tb));
                self.sort_of(&pi, rule)?;
                Ok((pi, d))
            }
            Term::App(f, arg, r) => {
                let (tf, df) = self.infer(f, q, None)?;
                let (z, dom, cod) = match self.hnf(&tf)? {
                    Term::Pi(z, r2, dom, cod) if r2 == *r => (z, dom, cod),
                    Term::Pi(_, r2, ..) => {
                        return Err(self.mismatch("App", &format!("a function with binder grade {r}"), &Term::Pi(
                            "_".into(),
                            r2,
                            Box::new(Term::Unit),
                            Box::new(Term::Unit),
                        )))
                    }
                    other => return Err(self.mismatch("App", "a function type", &other)),
                };
                let (_, da) = self.infer(arg, &self.mul(q, r)?, Some(&dom))?;
                Ok((subst(&cod, &z, arg), self.plus(df, da)?))
            }
            Term::Unit => Ok((Term::UnitType, Demand::new())),
            Term::UnitType | Term::IntType => Ok((Term::Sort(self.spec.base_sort().clone()), Demand::new())),
            Term::IntLit(_) => Ok((Term::IntType, Demand::new())),
            Term::IntAdd(l, r) => {
                let (_, d1) = self.infer(l, q, Some(&Term::IntType))?;
                let (_, d2) = self.infer(r, q, Some(&Term::IntType))?;
                Ok((Term::IntType, self.plus(d1, d2)?))
            }
            Term::Sum(l, r) => {
                let (tl, d1) = self.infer(l, q, None)?;
                let (tr, d2) = self.infer(r, q, None)?;
                let (sl, sr) = (self.hnf(&tl)?, self.hnf(&tr)?);
                match (&sl, &sr) {
                    (Term::Sort(s1), Term::Sort(s2)) if s1 == s2 => Ok((sl, self.plus(d1, d2)?)),
                    (Term::Sort(_), Term::Sort(_)) => Err(self.mismatch("Sum", &format!("a summand of sort {sl}"), r)),
                    _ => Err(CheckError::NotSort { rule: "Sum", term: a.to_string() }),
                }
            }
            Term::LetUnit(q0, s, b) => {
                self.elim("LetUnit", q0)?;
                let (_, d1) = self.infer(s, &self.mul(q, q0)?, Some(&Term::UnitType))?;
                let (tb, d2) = self.infer(b, q, exp)?;
                Ok((tb, self.plus(d1, d2)?))
            }
            Term::Pair(a1, r, a2) => {
                let expected_sigma = match exp {
                    Some(e) => match self.hnf(e)? {
                        Term::Sigma(z, r2, ta, tb) if r2 == *r => Some((z, *ta, *tb)),
                        _ => return Err(self.mismatch("Pair", &format!("a pair type with grade {r}"), e)),
                    },
                    None => None,
                };
                let qr = self.mul(q, r)?;
                match expected_sigma {
                    Some((z, ta, tb)) => {
                        let (_, d1) = self.infer(a1, &qr, Some(&ta))?;
                        let (_, d2) = self.infer(a2, q, Some(&subst(&tb, &z, a1)))?;
                        Ok((exp.expect("expected type present").clone(), self.plus(d1, d2)?))
                    }
                    None => {
                        let (ta, d1) = self.infer(a1, &qr, None)?;
                        let (tb, d2) = self.infer(a2, q, None)?;
                        let sigma = crate::syntax::product(r.clone(), ta, tb);
                        self.sort_of(&sigma, "Pair")?;
                        Ok((sigma, self.plus(d1, d2)?))
                    }
                }
            }
            Term::LetPair(q0, x, r, y, s, b) => {
                self.elim("LetPair", q0)?;
                let qq0 = self.mul(q, q0)?;
                let (ts, d1) = self.infer(s, &qq0, None)?;
                let (z, ta, tb) = match self.hnf(&ts)? {
                    Term::Sigma(z, r2, ta, tb) if r2 == *r => (z, *ta, *tb),
                    other => return Err(self.mismatch("LetPair", &format!("a pair type with grade {r}"), &other)),
                };
                let (x2, b) = self.enter(x, b);
                let (y2, b) = {
                    let n = self.scope.len();
                    self.scope.push((x2.clone(), ta.clone()));
                    let out = self.enter(y, &b);
                    self.scope.truncate(n);
                    out
                };
                let tb = rename_free(&tb, &z, &x2);
                let (tbody, mut d2) =
                    self.with(vec![(x2.clone(), ta), (y2.clone(), tb)], |e| e.infer(&b, q, exp))?;
                self.no_escape("LetPair", &tbody, &[&x2, &y2])?;
                self.bind("LetPair", &mut d2, &y2, qq0.clone())?;
                self.bind("LetPair", &mut d2, &x2, self.mul(&qq0, r)?)?;
                Ok((tbody, self.plus(d1, d2)?))
            }
            Term::Inj1(p) | Term::Inj2(p) => {
                let e = exp.ok_or_else(|| CheckError::NeedsAnnotation(a.to_string()))?;
                match self.hnf(e)? {
                    Term::Sum(l, r) => {
                        let target = if matches!(a, Term::Inj1(_)) { l } else { r };
                        let (_, d) = self.infer(p, q, Some(&target))?;
                        Ok((e.clone(), d))
                    }
                    _ => Err(self.mismatch("Inj", "a sum type", e)),
                }
            }
            Term::Case(q0, s, x1, b1, x2, b2) => {
                self.elim("Case", q0)?;
                let qq0 = self.mul(q, q0)?;
                let (ts, d0) = self.infer(s, &qq0, None)?;
                let (tl, tr) = match self.hnf(&ts)? {
                    Term::Sum(l, r) => (*l, *r),
                    other => return Err(self.mismatch("Case", "a sum type", &other)),
                };
                let (n1, b1) = self.enter(x1, b1);
                let (t1, mut l) = self.with(vec![(n1.clone(), tl)], |e| e.infer(&b1, q, exp))?;
                self.no_escape("Case", &t1, &[&n1])?;
                self.bind("Case", &mut l, &n1, qq0.clone())?;
                let (n2, b2) = self.enter(x2, b2);
                let (t2, mut r) = self.with(vec![(n2.clone(), tr)], |e| e.infer(&b2, q, Some(&t1)))?;
                self.no_escape("Case", &t2, &[&n2])?;
                self.bind("Case", &mut r, &n2, qq0)?;
                let zero = self.alg.zero();
                let mut merged = Demand::new();
                let keys: BTreeSet<Name> = l.keys().chain(r.keys()).cloned().collect();
                for k in keys {
                    let gl = l.get(&k).cloned().unwrap_or_else(|| zero.clone());
                    let gr = r.get(&k).cloned().unwrap_or_else(|| zero.clone());
                    let g = self
                        .alg
                        .glb(&gl, &gr)?
                        .ok_or(CheckError::Branches { var: k.clone(), left: gl, right: gr })?;
                    merged.insert(k, g);
                }
                Ok((t1, self.plus(d0, merged)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::DEFAULT_FUEL;
    use crate::syntax::{parse_context, parse_term, parse_type};

    fn tit() -> PtsSpec {
        PtsSpec::preset("type-in-type").unwrap()
    }

    fn run(spec: &PtsSpec, alg: &Algebra, ctx: &str, a: &str, q: &str, ty: Option<&str>) -> Result<Term, CheckError> {
        let ctx = parse_context(ctx, alg).unwrap();
        let a = parse_term(a, alg).unwrap();
        let ty = ty.map(|t| parse_type(t, alg).unwrap());
        check_pts(spec, alg, &ctx, &a, &alg.parse_grade(q).unwrap(), ty.as_ref(), DEFAULT_FUEL)
    }

    #[test]
    fn polymorphic_identity() {
        let alg = Algebra::NatExact;
        let ty = "Pi x:^0 *. Pi y:^1 x. x";
        assert!(run(&tit(), &alg, "", "\\^0 x:*. \\^1 y:x. y", "1", Some(ty)).is_ok());
        assert!(run(&tit(), &alg, "", "\\^0 x:*. \\^1 y:x. y", "1", None).is_ok());
        assert!(run(&tit(), &alg, "", "\\^0 x:*. \\^1 y:x. (y^1, y)", "1", None).is_err());
    }

    #[test]
    fn definitions_convert() {
        let alg = Algebra::NatExact;
        let r = run(&tit(), &alg, "x = Unit :^0 *", "\\^1 y:x. y", "1", Some("Pi y:^1 Unit. Unit"));
        assert!(r.is_ok(), "{r:?}");
        let r = run(&tit(), &alg, "x :^0 *", "\\^1 y:x. y", "1", Some("Pi y:^1 Unit. Unit"));
        assert!(matches!(r, Err(CheckError::NotConvertible { .. })), "{r:?}");
    }

    #[test]
    fn zero_world_is_vacuous() {
        let alg = Algebra::NatExact;
        assert!(run(&tit(), &alg, "", "\\^1 x:Unit. x", "0", Some("Pi x:^1 Unit. Unit")).is_ok());
        assert!(run(&tit(), &alg, "", "\\^1 x:Unit. x", "0", Some("Pi x:^1 (\\^0 a:*. a) Unit ^0. Unit")).is_ok());
    }

    #[test]
    fn sort_rules_enforced() {
        let alg = Algebra::NatExact;
        let stlc = PtsSpec::preset("stlc").unwrap();
        let r = run(&stlc, &alg, "", "\\^0 x:*. \\^1 y:x. y", "1", None);
        assert!(matches!(r, Err(CheckError::NoRule { .. })), "{r:?}");
        let f = PtsSpec::preset("system-f").unwrap();
        assert!(run(&f, &alg, "", "\\^0 x:*. \\^1 y:x. y", "1", None).is_ok());
    }

    #[test]
    fn dependent_application() {
        let alg = Algebra::NatExact;
        let t = run(&tit(), &alg, "", "(\\^0 x:*. \\^1 y:x. y) Unit ^0", "1", None).unwrap();
        assert!(crate::check::beta_equal(&t, &parse_type("Pi y:^1 Unit. Unit", &alg).unwrap(), 100).unwrap());
        assert!(run(&tit(), &alg, "", "(\\^0 x:*. \\^1 y:x. y) Unit ^0 unit ^1", "1", Some("Unit")).is_ok());
    }

    #[test]
    fn spec_file_format() {
        let s = PtsSpec::parse("f", "sorts: *, box\naxioms: *:box\nrules: (*,*,*), (box,*)").unwrap();
        assert_eq!(s.rule("box", "*"), Some(&"*".to_string()));
        assert!(PtsSpec::parse("bad", "sorts: *\naxioms: *:box").is_err());
    }

    #[test]
    fn injections_need_expected_types() {
        let alg = Algebra::NatExact;
        assert!(matches!(run(&tit(), &alg, "", "inj1 unit", "1", None), Err(CheckError::NeedsAnnotation(_))));
        assert!(run(&tit(), &alg, "", "inj1 unit", "1", Some("Bool")).is_ok());
        assert!(run(&tit(), &alg, "b :^1 Bool", "case_1 b of x. inj2 x; y. inj1 y", "1", Some("Bool")).is_ok());
    }
}
