//! Bounded derivation search over the declarative simple rules.
//!
//! Subsumption on both sides of the turnstile is searched rather than
//! computed: every rule instance is tried at each observer grade below the
//! requested one, and context splits are enumerated over a finite candidate
//! set. The search shares no code with the algorithmic checker beyond the
//! algebra operations.

use std::collections::HashMap;
use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, Grade};
use crate::check;
use crate::syntax::{self, GradedContext, Name, Term};

/// Naturals below a context grade that join the split candidates.
const DOWN_SET_LIMIT: u64 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("the search budget needs a non-empty grade set and positive bounds")]
    Budget,
    #[error("grade {0} does not belong to the algebra")]
    Foreign(Grade),
    #[error("the context has definitions; the oracle covers the simple fragment only")]
    Definitions,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Limits on one search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_size: usize,
    pub max_depth: usize,
    pub max_steps: u64,
    /// Candidate grades for subsumption and context splits.
    pub grades: Vec<Grade>,
}

impl SearchBudget {
    /// The carrier when finite, else `{0,1,2,3}` plus `ω` when present.
    pub fn for_algebra(alg: &Algebra) -> SearchBudget {
        SearchBudget {
            max_size: 16,
            max_depth: 24,
            max_steps: 2_000_000,
            grades: alg.carrier().unwrap_or_else(|| alg.sample(3)),
        }
    }

    fn validate(&self, alg: &Algebra) -> Result<(), OracleError> {
        if self.grades.is_empty() || self.max_size == 0 || self.max_depth == 0 || self.max_steps == 0 {
            return Err(OracleError::Budget);
        }
        match self.grades.iter().find(|g| !alg.contains(g)) {
            Some(g) => Err(OracleError::Foreign(g.clone())),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Derivable,
    NotDerivable,
    /// The budget ran out, or a subterm's type could not be read off.
    Exhausted,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Derivable
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Derivable => "derivable",
            Verdict::NotDerivable => "not derivable",
            Verdict::Exhausted => "undecided",
        })
    }
}

/// Whether `ctx ⊢ a :^q ty` has a derivation within `budget`.
pub fn derivable(
    alg: &Algebra,
    ctx: &GradedContext,
    a: &Term,
    q: &Grade,
    ty: &Term,
    budget: &SearchBudget,
) -> Result<Verdict, OracleError> {
    let mut search = Search::new(alg, budget)?;
    search.judgment(ctx, a, q, ty)
}

/// The type the oracle assigns to `a`, if it can find one without guessing.
pub fn synth_type(env: &[(Name, Term)], a: &Term) -> Option<Term> {
    let mut env = env.to_vec();
    synth(&mut env, a)
}

/// Index of an interned grade.
type Id = u16;

type Key = (usize, Id, Vec<Id>);

/// Interned grades with cached operations.
struct Pool<'a> {
    alg: &'a Algebra,
    grades: Vec<Grade>,
    index: HashMap<Grade, Id>,
    add: HashMap<(Id, Id), Id>,
    mul: HashMap<(Id, Id), Id>,
    leq: HashMap<(Id, Id), bool>,
}

impl<'a> Pool<'a> {
    fn new(alg: &'a Algebra) -> Pool<'a> {
        Pool {
            alg,
            grades: Vec::new(),
            index: HashMap::new(),
            add: HashMap::new(),
            mul: HashMap::new(),
            leq: HashMap::new(),
        }
    }

    fn id(&mut self, g: &Grade) -> Id {
        if let Some(&i) = self.index.get(g) {
            return i;
        }
        let i = Id::try_from(self.grades.len()).expect("fewer than 65536 distinct grades");
        self.grades.push(g.clone());
        self.index.insert(g.clone(), i);
        i
    }

    fn add(&mut self, a: Id, b: Id) -> Result<Id, OracleError> {
        if let Some(&c) = self.add.get(&(a, b)) {
            return Ok(c);
        }
        let g = self.alg.add(&self.grades[a as usize], &self.grades[b as usize])?;
        let c = self.id(&g);
        self.add.insert((a, b), c);
        Ok(c)
    }

    fn mul(&mut self, a: Id, b: Id) -> Result<Id, OracleError> {
        if let Some(&c) = self.mul.get(&(a, b)) {
            return Ok(c);
        }
        let g = self.alg.mul(&self.grades[a as usize], &self.grades[b as usize])?;
        let c = self.id(&g);
        self.mul.insert((a, b), c);
        Ok(c)
    }

    fn leq(&mut self, a: Id, b: Id) -> Result<bool, OracleError> {
        if let Some(&c) = self.leq.get(&(a, b)) {
            return Ok(c);
        }
        let c = self.alg.leq(&self.grades[a as usize], &self.grades[b as usize])?;
        self.leq.insert((a, b), c);
        Ok(c)
    }
}

struct Search<'a> {
    alg: &'a Algebra,
    budget: &'a SearchBudget,
    pool: Pool<'a>,
    /// Interned budget grades.
    base: Vec<Id>,
    zero: Id,
    one: Id,
    infinite: bool,
    steps: u64,
    root: Option<(usize, Term)>,
    memo: HashMap<Key, Verdict>,
}

/// Short-circuiting disjunction over alternatives.
struct Any(Verdict);

impl Any {
    fn new() -> Any {
        Any(Verdict::NotDerivable)
    }

    /// Records one alternative; returns true once a derivation is found.
    fn add(&mut self, v: Verdict) -> bool {
        match v {
            Verdict::Derivable => {
                self.0 = v;
                true
            }
            Verdict::Exhausted => {
                self.0 = v;
                false
            }
            Verdict::NotDerivable => false,
        }
    }
}

/// Cartesian product of per-position options.
fn product<T: Clone>(per: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for opts in per {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for v in &out {
            for o in opts {
                let mut v = v.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

impl<'a> Search<'a> {
    fn new(alg: &'a Algebra, budget: &'a SearchBudget) -> Result<Search<'a>, OracleError> {
        budget.validate(alg)?;
        let mut pool = Pool::new(alg);
        let base = budget.grades.iter().map(|g| pool.id(g)).collect();
        let zero = pool.id(&alg.zero());
        let one = pool.id(&alg.one());
        Ok(Search { alg, budget, pool, base, zero, one, infinite: alg.carrier().is_none(), steps: 0, root: None, memo: HashMap::new() })
    }

    fn judgment(&mut self, ctx: &GradedContext, a: &Term, q: &Grade, ty: &Term) -> Result<Verdict, OracleError> {
        if ctx.has_definitions() {
            return Err(OracleError::Definitions);
        }
        for g in std::iter::once(q).chain(ctx.entries().iter().map(|e| &e.grade)).chain(a.grades()) {
            if !self.alg.contains(g) {
                return Err(OracleError::Foreign(g.clone()));
            }
        }
        if a.size() > self.budget.max_size {
            return Ok(Verdict::Exhausted);
        }
        let root = (a as *const Term as usize, ty.clone());
        if self.root.as_ref() != Some(&root) {
            self.memo.clear();
            self.root = Some(root);
        }
        let env: Vec<(Name, Term)> = ctx.entries().iter().map(|e| (e.name.clone(), e.ty.clone())).collect();
        let gamma: Vec<Id> = ctx.entries().iter().map(|e| self.pool.id(&e.grade)).collect();
        let q = self.pool.id(q);
        self.steps = 0;
        self.derive(&env, &gamma, a, q, ty, 0)
    }

    fn below_zero(&mut self, gamma: &[Id]) -> Result<bool, OracleError> {
        for &g in gamma {
            if !self.pool.leq(g, self.zero)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The candidate set at one context position: the budget grades, `g`, and
    /// every natural below `g` when the carrier is infinite.
    fn candidates(&mut self, g: Id) -> Vec<Id> {
        let mut c = self.base.clone();
        if !c.contains(&g) {
            c.push(g);
        }
        if let (true, Grade::Nat(n)) = (self.infinite, &self.pool.grades[g as usize]) {
            let top = u64::try_from(n).unwrap_or(u64::MAX).min(DOWN_SET_LIMIT);
            for k in 0..top {
                let id = self.pool.id(&Grade::nat(k));
                if !c.contains(&id) {
                    c.push(id);
                }
            }
        }
        c
    }

    /// Observer grades reachable by subsumption on the right.
    fn observers(&mut self, q: Id) -> Result<Vec<Id>, OracleError> {
        let mut out = Vec::new();
        for g in self.candidates(q) {
            if self.pool.leq(g, q)? {
                out.push(g);
            }
        }
        Ok(out)
    }

    /// All `(Γ1, Γ2)` over the candidates with `Γ <: Γ1 + Γ2`.
    fn splits(&mut self, gamma: &[Id]) -> Result<Vec<Vec<(Id, Id)>>, OracleError> {
        let mut per = Vec::new();
        for &g in gamma {
            let c = self.candidates(g);
            let mut pairs = Vec::new();
            for &a in &c {
                for &b in &c {
                    let sum = self.pool.add(a, b)?;
                    if self.pool.leq(g, sum)? {
                        pairs.push((a, b));
                    }
                }
            }
            per.push(pairs);
        }
        Ok(product(&per))
    }

    /// All `Γ'` over the candidates with `Γ <: q0 · Γ'`.
    fn scaled_sources(&mut self, gamma: &[Id], q0: Id) -> Result<Vec<Vec<Id>>, OracleError> {
        let mut per = Vec::new();
        for &g in gamma {
            let mut opts = Vec::new();
            for c in self.candidates(g) {
                let scaled = self.pool.mul(q0, c)?;
                if self.pool.leq(g, scaled)? {
                    opts.push(c);
                }
            }
            per.push(opts);
        }
        Ok(product(&per))
    }

    fn derive(
        &mut self,
        env: &[(Name, Term)],
        gamma: &[Id],
        a: &Term,
        q: Id,
        ty: &Term,
        depth: usize,
    ) -> Result<Verdict, OracleError> {
        let key = (a as *const Term as usize, q, gamma.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        self.steps += 1;
        let v = if depth > self.budget.max_depth || self.steps > self.budget.max_steps {
            Verdict::Exhausted
        } else {
            self.rules(env, gamma, a, q, ty, depth)?
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    /// Tries every syntax-directed rule at every observer grade `q' <: q`.
    fn rules(
        &mut self,
        env: &[(Name, Term)],
        gamma: &[Id],
        a: &Term,
        q: Id,
        ty: &Term,
        depth: usize,
    ) -> Result<Verdict, OracleError> {
        if let Term::Lam(..) = a {
            return self.lam(env, gamma, a, q, ty, depth);
        }
        let mut any = Any::new();
        for q1 in self.observers(q)? {
            if any.add(self.rule_at(env, gamma, a, q1, ty, depth)?) {
                break;
            }
        }
        Ok(any.0)
    }

    fn elim_ok(&mut self, q0: &Grade) -> Result<bool, OracleError> {
        let q0 = self.pool.id(q0);
        self.pool.leq(q0, self.one)
    }

    fn rule_at(
        &mut self,
        env: &[(Name, Term)],
        gamma: &[Id],
        a: &Term,
        q: Id,
        ty: &Term,
        depth: usize,
    ) -> Result<Verdict, OracleError> {
        let d = depth + 1;
        let no = Ok(Verdict::NotDerivable);
        match a {
            Term::Var(x) => {
                let Some(i) = env.iter().rposition(|(y, _)| y == x) else { return no };
                if !env[i].1.alpha_eq(ty) || !self.pool.leq(gamma[i], q)? {
                    return no;
                }
                let mut rest = gamma.to_vec();
                rest.remove(i);
                Ok(bool_verdict(self.below_zero(&rest)?))
            }
            Term::Unit => Ok(bool_verdict(*ty == Term::UnitType && self.below_zero(gamma)?)),
            Term::IntLit(_) => Ok(bool_verdict(*ty == Term::IntType && self.below_zero(gamma)?)),
            Term::App(f, arg, r) => {
                let (dom, fun_ty) = match app_types(env, f, arg, r, ty) {
                    Typed::Known(t) => t,
                    Typed::Unknown => return Ok(Verdict::Exhausted),
                    Typed::Mismatch => return no,
                };
                let r = self.pool.id(r);
                let qr = self.pool.mul(q, r)?;
                self.binary(gamma, |s, g1, g2| {
                    both(s.derive(env, g1, f, q, &fun_ty, d)?, || s.derive(env, g2, arg, qr, &dom, d))
                })
            }
            Term::Pair(a1, r, a2) => {
                let Term::Sigma(_, r2, t1, t2) = ty else { return no };
                if r2 != r {
                    return no;
                }
                let r = self.pool.id(r);
                let qr = self.pool.mul(q, r)?;
                self.binary(gamma, |s, g1, g2| {
                    both(s.derive(env, g1, a1, qr, t1, d)?, || s.derive(env, g2, a2, q, t2, d))
                })
            }
            Term::IntAdd(l, r) => {
                if *ty != Term::IntType {
                    return no;
                }
                self.binary(gamma, |s, g1, g2| {
                    both(s.derive(env, g1, l, q, &Term::IntType, d)?, || s.derive(env, g2, r, q, &Term::IntType, d))
                })
            }
            Term::Inj1(p) | Term::Inj2(p) => {
                let Term::Sum(t1, t2) = ty else { return no };
                let payload = if matches!(a, Term::Inj1(_)) { t1 } else { t2 };
                self.derive(env, gamma, p, q, payload, d)
            }
            Term::LetUnit(q0, s0, b) => {
                if !self.elim_ok(q0)? {
                    return no;
                }
                let q0 = self.pool.id(q0);
                let qq0 = self.pool.mul(q, q0)?;
                self.binary(gamma, |s, g1, g2| {
                    both(s.derive(env, g1, s0, qq0, &Term::UnitType, d)?, || s.derive(env, g2, b, q, ty, d))
                })
            }
            Term::LetPair(q0, x, r, y, s0, b) => {
                if !self.elim_ok(q0)? {
                    return no;
                }
                let Some(st) = synth_type(env, s0) else { return Ok(Verdict::Exhausted) };
                let Term::Sigma(_, r2, t1, t2) = st.clone() else { return no };
                if r2 != *r {
                    return no;
                }
                let (q0, r) = (self.pool.id(q0), self.pool.id(r));
                let qq0 = self.pool.mul(q, q0)?;
                let xg = self.pool.mul(qq0, r)?;
                let mut inner = env.to_vec();
                inner.push((x.clone(), *t1));
                inner.push((y.clone(), *t2));
                self.binary(gamma, |s, g1, g2| {
                    let first = s.derive(env, g1, s0, qq0, &st, d)?;
                    both(first, || {
                        let mut g2 = g2.to_vec();
                        g2.push(xg);
                        g2.push(qq0);
                        s.derive(&inner, &g2, b, q, ty, d)
                    })
                })
            }
            Term::Case(q0, s0, x1, b1, x2, b2) => {
                if !self.elim_ok(q0)? {
                    return no;
                }
                let Some(st) = synth_type(env, s0) else { return Ok(Verdict::Exhausted) };
                let Term::Sum(t1, t2) = st.clone() else { return no };
                let q0 = self.pool.id(q0);
                let qq0 = self.pool.mul(q, q0)?;
                let mut left = env.to_vec();
                left.push((x1.clone(), *t1));
                let mut right = env.to_vec();
                right.push((x2.clone(), *t2));
                self.binary(gamma, |s, g1, g2| {
                    let first = s.derive(env, g1, s0, qq0, &st, d)?;
                    let mut g2 = g2.to_vec();
                    g2.push(qq0);
                    both(first, || {
                        let l = s.derive(&left, &g2, b1, q, ty, d)?;
                        both(l, || s.derive(&right, &g2, b2, q, ty, d))
                    })
                })
            }
            Term::Lam(..) => unreachable!("lambdas are handled by `lam`"),
            Term::Sort(_) | Term::Pi(..) | Term::Sigma(..) | Term::Sum(..) | Term::UnitType | Term::IntType => no,
        }
    }

    fn binary(
        &mut self,
        gamma: &[Id],
        mut premises: impl FnMut(&mut Self, &[Id], &[Id]) -> Result<Verdict, OracleError>,
    ) -> Result<Verdict, OracleError> {
        let mut any = Any::new();
        for split in self.splits(gamma)? {
            let (g1, g2): (Vec<Id>, Vec<Id>) = split.into_iter().unzip();
            if any.add(premises(self, &g1, &g2)?) {
                break;
            }
        }
        Ok(any.0)
    }

    /// The lambda rule. With `ω` present the conclusion is `q0 · Γ ⊢ … :^(q0·q1)`
    /// for `q0 ≠ 0`, and `q1 = ω` forces `r = ω`.
    fn lam(
        &mut self,
        env: &[(Name, Term)],
        gamma: &[Id],
        a: &Term,
        q: Id,
        ty: &Term,
        depth: usize,
    ) -> Result<Verdict, OracleError> {
        let Term::Lam(r, x, dom, body) = a else { unreachable!() };
        let Term::Pi(_, r2, t1, t2) = ty else { return Ok(Verdict::NotDerivable) };
        if r2 != r || dom.as_ref().is_some_and(|d| !d.alpha_eq(t1)) {
            return Ok(Verdict::NotDerivable);
        }
        let mut inner = env.to_vec();
        inner.push((x.clone(), (**t1).clone()));
        let rid = self.pool.id(r);
        let mut any = Any::new();
        if !self.alg.has_omega() {
            for q1 in self.observers(q)? {
                let mut g = gamma.to_vec();
                g.push(self.pool.mul(q1, rid)?);
                if any.add(self.derive(&inner, &g, body, q1, t2, depth + 1)?) {
                    break;
                }
            }
            return Ok(any.0);
        }
        let base = self.base.clone();
        let zero = self.zero;
        for &q0 in base.iter().filter(|&&g| g != zero) {
            for &q1 in &base {
                let scaled = self.pool.mul(q0, q1)?;
                let q1g = &self.pool.grades[q1 as usize];
                if self.alg.omega_violation(q1g, r) || !self.pool.leq(scaled, q)? {
                    continue;
                }
                let bound = self.pool.mul(q1, rid)?;
                for mut g in self.scaled_sources(gamma, q0)? {
                    g.push(bound);
                    if any.add(self.derive(&inner, &g, body, q1, t2, depth + 1)?) {
                        return Ok(any.0);
                    }
                }
            }
        }
        Ok(any.0)
    }
}

fn bool_verdict(b: bool) -> Verdict {
    if b {
        Verdict::Derivable
    } else {
        Verdict::NotDerivable
    }
}

/// Conjunction; the second premise is only searched when the first may hold.
fn both(
    first: Verdict,
    second: impl FnOnce() -> Result<Verdict, OracleError>,
) -> Result<Verdict, OracleError> {
    if first == Verdict::NotDerivable {
        return Ok(first);
    }
    let second = second()?;
    Ok(match (first, second) {
        (_, Verdict::NotDerivable) => Verdict::NotDerivable,
        (Verdict::Derivable, Verdict::Derivable) => Verdict::Derivable,
        _ => Verdict::Exhausted,
    })
}

/// A subterm type the oracle either reads off, cannot determine, or finds
/// incompatible with the goal.
enum Typed<T> {
    Known(T),
    Unknown,
    Mismatch,
}

/// The argument and function types at an application with result `ty`.
fn app_types(env: &[(Name, Term)], f: &Term, arg: &Term, r: &Grade, ty: &Term) -> Typed<(Term, Term)> {
    let fun_ty = match (synth_type(env, f), synth_type(env, arg)) {
        (Some(t), _) => t,
        (None, Some(a)) => syntax::arrow(r.clone(), a, ty.clone()),
        (None, None) => return Typed::Unknown,
    };
    match &fun_ty {
        Term::Pi(_, r2, dom, cod) if r2 == r && cod.alpha_eq(ty) => Typed::Known(((**dom).clone(), fun_ty.clone())),
        _ => Typed::Mismatch,
    }
}

fn synth(env: &mut Vec<(Name, Term)>, a: &Term) -> Option<Term> {
    match a {
        Term::Var(x) => env.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t.clone()),
        Term::Lam(r, x, Some(dom), body) => {
            env.push((x.clone(), (**dom).clone()));
            let cod = synth(env, body);
            env.pop();
            Some(syntax::arrow(r.clone(), (**dom).clone(), cod?))
        }
        Term::App(f, _, _) => match synth(env, f)? {
            Term::Pi(_, _, _, cod) => Some(*cod),
            _ => None,
        },
        Term::Unit => Some(Term::UnitType),
        Term::IntLit(_) | Term::IntAdd(..) => Some(Term::IntType),
        Term::LetUnit(_, _, b) => synth(env, b),
        Term::Pair(a1, r, a2) => Some(syntax::product(r.clone(), synth(env, a1)?, synth(env, a2)?)),
        Term::LetPair(_, x, _, y, s, b) => match synth(env, s)? {
            Term::Sigma(_, _, t1, t2) => {
                env.push((x.clone(), *t1));
                env.push((y.clone(), *t2));
                let out = synth(env, b);
                env.truncate(env.len() - 2);
                out
            }
            _ => None,
        },
        Term::Case(_, s, x1, b1, x2, b2) => match synth(env, s)? {
            Term::Sum(t1, t2) => {
                env.push((x1.clone(), *t1));
                let l = synth(env, b1);
                env.pop();
                env.push((x2.clone(), *t2));
                let r = synth(env, b2);
                env.pop();
                l.or(r)
            }
            _ => None,
        },
        _ => None,
    }
}

/// Source of audited terms.
#[derive(Clone, Debug)]
pub enum Generator {
    /// Every term up to the given node count (type annotations not counted).
    Exhaustive { max_size: usize },
    Sampled { seed: u64, count: usize, max_size: usize },
    Given(Vec<Term>),
}

/// What an audit ranges over.
#[derive(Clone, Debug)]
pub struct AuditSpace {
    /// Grades for annotations, observers and context entries.
    pub grades: Vec<Grade>,
    /// Types of the two context variables `x` and `y`.
    pub skeletons: Vec<(Term, Term)>,
    /// Annotations tried on generated lambdas.
    pub domains: Vec<Term>,
}

impl AuditSpace {
    /// `{0,1,2,ω}` restricted to the algebra, over a few small skeletons.
    pub fn standard(alg: &Algebra) -> AuditSpace {
        let grades = [Grade::nat(0), Grade::nat(1), Grade::nat(2), Grade::Omega]
            .into_iter()
            .filter(|g| alg.contains(g))
            .collect();
        let unit = Term::UnitType;
        let bool_ty = syntax::sum(Term::UnitType, Term::UnitType);
        AuditSpace {
            grades,
            skeletons: vec![(unit.clone(), unit.clone()), (unit.clone(), bool_ty)],
            domains: vec![unit],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivergenceKind {
    /// The checker accepts a judgment the search refutes.
    Soundness,
    /// The search derives a judgment the checker rejects.
    Incompleteness,
}

#[derive(Clone, Debug)]
pub struct Divergence {
    pub kind: DivergenceKind,
    pub ctx: GradedContext,
    pub term: Term,
    pub grade: Grade,
    pub ty: Term,
    pub checker: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DivergenceKind::Soundness => "soundness",
            DivergenceKind::Incompleteness => "incompleteness",
        };
        write!(
            f,
            "{kind}: {} ⊢ {} :^{} {} (checker: {})",
            syntax::print_context(&self.ctx),
            self.term,
            self.grade,
            self.ty,
            self.checker
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub algebra: String,
    pub terms: usize,
    pub judgments: usize,
    pub exhausted: usize,
    pub divergences: Vec<Divergence>,
}

impl AuditReport {
    pub fn soundness(&self) -> impl Iterator<Item = &Divergence> {
        self.divergences.iter().filter(|d| d.kind == DivergenceKind::Soundness)
    }

    pub fn incompleteness(&self) -> impl Iterator<Item = &Divergence> {
        self.divergences.iter().filter(|d| d.kind == DivergenceKind::Incompleteness)
    }

    /// A markdown section listing acceptance-only divergences.
    pub fn ledger(&self) -> String {
        let mut out = format!("## {}\n\n", self.algebra);
        let rows: Vec<String> = self.incompleteness().map(|d| format!("- `{d}`\n")).collect();
        if rows.is_empty() {
            out.push_str("No divergences.\n");
        } else {
            out.extend(rows);
        }
        out
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "audit over {}: {} terms, {} judgments, {} soundness divergences, {} incompleteness divergences, {} exhausted",
            self.algebra,
            self.terms,
            self.judgments,
            self.soundness().count(),
            self.incompleteness().count(),
            self.exhausted
        )?;
        for d in &self.divergences {
            writeln!(f, "  {d}")?;
        }
        Ok(())
    }
}

/// Compares the checker with the search on every generated term, observer
/// grade and context grading.
pub fn audit(
    alg: &Algebra,
    budget: &SearchBudget,
    space: &AuditSpace,
    generator: &Generator,
) -> Result<AuditReport, OracleError> {
    budget.validate(alg)?;
    let mut report = AuditReport { algebra: alg.name(), ..AuditReport::default() };
    let names = ["x".to_string(), "y".to_string()];
    let enumerator = Enumerator { space, free: &names };
    let terms = match generator {
        Generator::Exhaustive { max_size } => enumerator.up_to(*max_size),
        Generator::Sampled { seed, count, max_size } => enumerator.sample(*seed, *count, *max_size),
        Generator::Given(ts) => ts.clone(),
    };
    for (tx, ty_y) in &space.skeletons {
        let env = vec![(names[0].clone(), tx.clone()), (names[1].clone(), ty_y.clone())];
        for t in &terms {
            let Some(ty) = synth_type(&env, t) else { continue };
            report.terms += 1;
            let mut search = Search::new(alg, budget)?;
            for q in &space.grades {
                for gx in &space.grades {
                    for gy in &space.grades {
                        let ctx = GradedContext::new()
                            .assume(&names[0], gx.clone(), tx.clone())
                            .and_then(|c| c.assume(&names[1], gy.clone(), ty_y.clone()))
                            .expect("distinct names");
                        report.judgments += 1;
                        let verdict = search.judgment(&ctx, t, q, &ty)?;
                        let checked = check::check(alg, &ctx, t, q, Some(&ty));
                        let kind = match (verdict, &checked) {
                            (Verdict::Exhausted, _) => {
                                report.exhausted += 1;
                                continue;
                            }
                            (Verdict::NotDerivable, Ok(_)) => DivergenceKind::Soundness,
                            (Verdict::Derivable, Err(_)) => DivergenceKind::Incompleteness,
                            _ => continue,
                        };
                        report.divergences.push(Divergence {
                            kind,
                            ctx,
                            term: t.clone(),
                            grade: q.clone(),
                            ty: ty.clone(),
                            checker: match checked {
                                Ok(_) => "accepted".to_string(),
                                Err(e) => e.to_string(),
                            },
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Node count ignoring type annotations.
pub fn shape_size(t: &Term) -> usize {
    match t {
        Term::Lam(_, _, _, b) => 1 + shape_size(b),
        _ => 1 + t.children().iter().map(|(c, _)| shape_size(c)).sum::<usize>(),
    }
}

struct Enumerator<'a> {
    space: &'a AuditSpace,
    free: &'a [Name],
}

impl Enumerator<'_> {
    fn up_to(&self, max_size: usize) -> Vec<Term> {
        let mut memo = HashMap::new();
        (1..=max_size).flat_map(|n| self.exactly(n, 0, &mut memo)).collect()
    }

    /// Terms of `n` nodes with `depth` enclosing binder levels in scope.
    fn exactly(&self, n: usize, depth: usize, memo: &mut HashMap<(usize, usize), Vec<Term>>) -> Vec<Term> {
        if let Some(v) = memo.get(&(n, depth)) {
            return v.clone();
        }
        let g = &self.space.grades;
        let mut out = Vec::new();
        if n == 1 {
            out.extend(self.free.iter().map(|x| Term::Var(x.clone())));
            out.extend((0..depth).map(|i| Term::Var(bound(i))));
            out.push(Term::Unit);
        } else {
            let b = bound(depth);
            for body in self.exactly(n - 1, depth + 1, memo) {
                for r in g {
                    for dom in &self.space.domains {
                        out.push(syntax::lam(r.clone(), &b, Some(dom.clone()), body.clone()));
                    }
                }
            }
            for p in self.exactly(n - 1, depth, memo) {
                out.push(syntax::inj1(p.clone()));
                out.push(syntax::inj2(p));
            }
            for k in 1..n - 1 {
                let lefts = self.exactly(k, depth, memo);
                let rights = self.exactly(n - 1 - k, depth, memo);
                let bodies2 = self.exactly(n - 1 - k, depth + 2, memo);
                for l in &lefts {
                    for r in g {
                        for rt in &rights {
                            out.push(syntax::app(l.clone(), rt.clone(), r.clone()));
                            out.push(syntax::pair(l.clone(), r.clone(), rt.clone()));
                            out.push(syntax::let_unit(r.clone(), l.clone(), rt.clone()));
                        }
                        for q0 in g {
                            for body in &bodies2 {
                                out.push(syntax::let_pair(
                                    q0.clone(),
                                    &b,
                                    r.clone(),
                                    &bound(depth + 1),
                                    l.clone(),
                                    body.clone(),
                                ));
                            }
                        }
                    }
                }
                for l in &lefts {
                    for m in 1..n - 1 - k {
                        let (b1s, b2s) = (self.exactly(m, depth + 1, memo), self.exactly(n - 1 - k - m, depth + 1, memo));
                        for q0 in g {
                            for b1 in &b1s {
                                for b2 in &b2s {
                                    out.push(syntax::case(q0.clone(), l.clone(), &b, b1.clone(), &b, b2.clone()));
                                }
                            }
                        }
                    }
                }
            }
        }
        memo.insert((n, depth), out.clone());
        out
    }

    fn sample(&self, seed: u64, count: usize, max_size: usize) -> Vec<Term> {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut memo = HashMap::new();
        let pools: Vec<Vec<Term>> = (1..=max_size).map(|n| self.exactly(n, 0, &mut memo)).collect();
        let total: usize = pools.iter().map(Vec::len).sum();
        if total == 0 {
            return Vec::new();
        }
        (0..count)
            .map(|_| {
                let mut i = rng.gen_range(0..total);
                let pool = pools.iter().find(|p| {
                    if i < p.len() {
                        true
                    } else {
                        i -= p.len();
                        false
                    }
                });
                pool.expect("index within total")[i].clone()
            })
            .collect()
    }
}

fn bound(i: usize) -> Name {
    format!("z{i}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_context, parse_term, parse_type};

    fn verdict(alg: &Algebra, ctx: &str, term: &str, q: &str, ty: &str) -> Verdict {
        let c = parse_context(ctx, alg).unwrap();
        let a = parse_term(term, alg).unwrap();
        let t = parse_type(ty, alg).unwrap();
        let q = alg.parse_grade(q).unwrap();
        derivable(alg, &c, &a, &q, &t, &SearchBudget::for_algebra(alg)).unwrap()
    }

    #[test]
    fn identity_at_one() {
        let alg = Algebra::NatExact;
        assert_eq!(verdict(&alg, "", "\\^1 x:Unit. x", "1", "{}^1 Unit -> Unit"), Verdict::Derivable);
    }

    #[test]
    fn duplication_refuted() {
        let alg = Algebra::NatExact;
        let ty = "{}^1 Unit -> {}^1 Unit & Unit";
        assert_eq!(verdict(&alg, "", "\\^1 x:Unit. (x^1, x)", "1", ty), Verdict::NotDerivable);
        assert_eq!(verdict(&alg, "", "\\^2 x:Unit. (x^1, x)", "1", "{}^2 Unit -> {}^1 Unit & Unit"), Verdict::Derivable);
    }

    #[test]
    fn zero_world_is_vacuous() {
        let alg = Algebra::NatExact;
        assert_eq!(verdict(&alg, "x :^0 Unit", "(x^1, x)", "0", "{}^1 Unit & Unit"), Verdict::Derivable);
    }

    #[test]
    fn omega_fold() {
        let alg = Algebra::Lin3;
        assert_eq!(verdict(&alg, "", "\\^1 x:Unit. x", "w", "{}^1 Unit -> Unit"), Verdict::Derivable);
        let unfair = "\\^1 x:Unit. (x^1, x)";
        assert_eq!(verdict(&alg, "", unfair, "1", "{}^1 Unit -> {}^1 Unit & Unit"), Verdict::NotDerivable);
    }

    #[test]
    fn discarding_needs_a_bounded_order() {
        let ty = "{}^1 Unit -> Unit";
        assert_eq!(verdict(&Algebra::NatBounded, "", "\\^1 x:Unit. unit", "1", ty), Verdict::Derivable);
        assert_eq!(verdict(&Algebra::NatExact, "", "\\^1 x:Unit. unit", "1", ty), Verdict::NotDerivable);
    }

    #[test]
    fn tiny_budget_is_exhausted_not_false() {
        let alg = Algebra::NatExact;
        let mut budget = SearchBudget::for_algebra(&alg);
        budget.max_depth = 1;
        let a = parse_term("\\^1 x:Unit. \\^1 y:Unit. let_1 unit = y in x", &alg).unwrap();
        let t = parse_type("{}^1 Unit -> {}^1 Unit -> Unit", &alg).unwrap();
        let v = derivable(&alg, &GradedContext::new(), &a, &alg.one(), &t, &budget).unwrap();
        assert_eq!(v, Verdict::Exhausted);
        budget.max_depth = 8;
        let v = derivable(&alg, &GradedContext::new(), &a, &alg.one(), &t, &budget).unwrap();
        assert_eq!(v, Verdict::Derivable);
    }

    #[test]
    fn empty_generator_gives_empty_report() {
        let alg = Algebra::Lin3;
        let space = AuditSpace::standard(&alg);
        let r = audit(&alg, &SearchBudget::for_algebra(&alg), &space, &Generator::Given(vec![])).unwrap();
        assert_eq!((r.terms, r.judgments, r.divergences.len()), (0, 0, 0));
    }

    #[test]
    fn small_exhaustive_audit_agrees() {
        for alg in [Algebra::Lin3, Algebra::NatExact, Algebra::NatBounded] {
            let space = AuditSpace::standard(&alg);
            let r = audit(&alg, &SearchBudget::for_algebra(&alg), &space, &Generator::Exhaustive { max_size: 3 })
                .unwrap();
            assert!(r.terms > 0);
            assert_eq!(r.divergences.len(), 0, "{r}");
        }
    }

    #[test]
    fn enumeration_counts_shapes() {
        let alg = Algebra::Lin3;
        let space = AuditSpace::standard(&alg);
        let e = Enumerator { space: &space, free: &["x".into(), "y".into()] };
        assert_eq!(e.up_to(1).len(), 3);
        assert!(e.up_to(3).iter().all(|t| shape_size(t) <= 3));
        let s = e.sample(7, 20, 4);
        assert_eq!(s.len(), 20);
        assert_eq!(s.iter().map(|t| t.to_string()).collect::<Vec<_>>(), e.sample(7, 20, 4).iter().map(|t| t.to_string()).collect::<Vec<_>>());
    }
}
