//! Shared generators and property bodies for the integration suites.

#![allow(dead_code)]

use std::time::{Duration, Instant};

use ldc::algebra::{Algebra, Grade, UsageVector};
use ldc::check::{check, synth_expected};
use ldc::eval::{step, StepOutcome};
use ldc::heap::{count_lookups, noninterference_test, run, soundness_run, Heap, NiOutcome, RunEnd};
use ldc::oracle::{derivable, SearchBudget, Verdict};
use ldc::syntax::{
    app, arrow, case, inj1, inj2, lam, let_pair, let_unit, pair, product, subst, sum, GradedContext, Name, Term,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const CASES: u32 = 500;
pub const FUEL: u64 = 400;
const TRIES: usize = 400;

pub fn algebra(sel: &str) -> Algebra {
    Algebra::from_selector(sel).expect("builtin algebra")
}

/// The four algebras the property suites range over.
pub fn suite_algebras() -> Vec<Algebra> {
    ["nat-exact", "nat-bounded", "lin3", "lattice:diamond"].into_iter().map(algebra).collect()
}

/// Small grades used for annotations and observers.
pub fn small_grades(alg: &Algebra) -> Vec<Grade> {
    alg.carrier().unwrap_or_else(|| alg.sample(2))
}

pub fn bool_ty() -> Term {
    sum(Term::UnitType, Term::UnitType)
}

/// A seeded, type-directed generator of simple terms.
pub struct Gen<'a> {
    pub alg: &'a Algebra,
    pub rng: StdRng,
    grades: Vec<Grade>,
    elim: Vec<Grade>,
    fresh: usize,
}

impl<'a> Gen<'a> {
    pub fn new(alg: &'a Algebra, seed: u64) -> Gen<'a> {
        let grades = small_grades(alg);
        let one = alg.one();
        let elim: Vec<Grade> = grades.iter().filter(|g| alg.leq(g, &one).unwrap()).cloned().collect();
        Gen { alg, rng: StdRng::seed_from_u64(seed), grades, elim, fresh: 0 }
    }

    pub fn grade(&mut self) -> Grade {
        self.grades.choose(&mut self.rng).unwrap().clone()
    }

    pub fn nonzero_grade(&mut self) -> Grade {
        let xs: Vec<Grade> = self.grades.iter().filter(|g| !self.alg.is_zero(g)).cloned().collect();
        xs.choose(&mut self.rng).unwrap().clone()
    }

    fn elim_grade(&mut self) -> Grade {
        if self.rng.gen_bool(0.7) {
            self.alg.one()
        } else {
            self.elim.choose(&mut self.rng).unwrap().clone()
        }
    }

    fn name(&mut self) -> Name {
        self.fresh += 1;
        format!("z{}", self.fresh)
    }

    pub fn base_ty(&mut self) -> Term {
        if self.rng.gen_bool(0.5) {
            Term::UnitType
        } else {
            bool_ty()
        }
    }

    pub fn ty(&mut self, depth: u32) -> Term {
        match if depth == 0 { 0 } else { self.rng.gen_range(0..4) } {
            0 => Term::UnitType,
            1 => bool_ty(),
            2 => {
                let r = self.grade();
                let (a, b) = (self.base_ty(), self.ty(depth - 1));
                arrow(r, a, b)
            }
            _ => {
                let r = self.grade();
                let (a, b) = (self.base_ty(), self.base_ty());
                product(r, a, b)
            }
        }
    }

    /// A term of type `ty` over `env`.
    pub fn term(&mut self, ty: &Term, env: &[(Name, Term)], depth: u32) -> Term {
        let vars: Vec<&Name> = env.iter().filter(|(_, t)| t == ty).map(|(x, _)| x).collect();
        if !vars.is_empty() && self.rng.gen_bool(if depth == 0 { 0.9 } else { 0.35 }) {
            return Term::Var(vars.choose(&mut self.rng).unwrap().to_string());
        }
        if depth > 0 && self.rng.gen_bool(0.45) {
            return self.elim(ty, env, depth - 1);
        }
        self.intro(ty, env, depth.saturating_sub(1))
    }

    fn intro(&mut self, ty: &Term, env: &[(Name, Term)], depth: u32) -> Term {
        match ty {
            Term::UnitType => Term::Unit,
            Term::Sum(a, b) => {
                if self.rng.gen_bool(0.5) {
                    inj1(self.term(a, env, depth))
                } else {
                    inj2(self.term(b, env, depth))
                }
            }
            Term::Pi(_, r, a, b) => {
                let x = self.name();
                let mut env2 = env.to_vec();
                env2.push((x.clone(), (**a).clone()));
                let body = self.term(b, &env2, depth);
                lam(r.clone(), &x, Some((**a).clone()), body)
            }
            Term::Sigma(_, r, a, b) => {
                let a1 = self.term(a, env, depth);
                let a2 = self.term(b, env, depth);
                pair(a1, r.clone(), a2)
            }
            other => panic!("generator has no intro form for {other}"),
        }
    }

    fn elim(&mut self, ty: &Term, env: &[(Name, Term)], depth: u32) -> Term {
        match self.rng.gen_range(0..4) {
            0 => {
                let (r, a) = (self.grade(), self.base_ty());
                let f = self.term(&arrow(r.clone(), a.clone(), ty.clone()), env, depth);
                let x = self.term(&a, env, depth);
                app(f, x, r)
            }
            1 => {
                let q0 = self.elim_grade();
                let s = self.term(&Term::UnitType, env, depth);
                let b = self.term(ty, env, depth);
                let_unit(q0, s, b)
            }
            2 => {
                let (q0, r) = (self.elim_grade(), self.grade());
                let (a, b) = (self.base_ty(), self.base_ty());
                let s = self.term(&product(r.clone(), a.clone(), b.clone()), env, depth);
                let (x, y) = (self.name(), self.name());
                let mut env2 = env.to_vec();
                env2.push((x.clone(), a));
                env2.push((y.clone(), b));
                let body = self.term(ty, &env2, depth);
                let_pair(q0, &x, r, &y, s, body)
            }
            _ => {
                let q0 = self.elim_grade();
                let (a, b) = (self.base_ty(), self.base_ty());
                let s = self.term(&sum(a.clone(), b.clone()), env, depth);
                let (x1, x2) = (self.name(), self.name());
                let mut e1 = env.to_vec();
                e1.push((x1.clone(), a));
                let b1 = self.term(ty, &e1, depth);
                let mut e2 = env.to_vec();
                e2.push((x2.clone(), b));
                let b2 = self.term(ty, &e2, depth);
                case(q0, s, &x1, b1, &x2, b2)
            }
        }
    }
}

/// An accepted judgment `ctx ⊢ term :^q ty`, with the principal usage.
#[derive(Clone, Debug)]
pub struct Sample {
    pub ctx: GradedContext,
    pub term: Term,
    pub q: Grade,
    pub ty: Term,
    pub principal: UsageVector,
}

pub fn skeleton(ctx: &GradedContext) -> Vec<(Name, Term)> {
    ctx.entries().iter().map(|e| (e.name.clone(), e.ty.clone())).collect()
}

pub fn with_grades(skel: &[(Name, Term)], grades: &[Grade]) -> GradedContext {
    skel.iter()
        .zip(grades)
        .fold(GradedContext::new(), |c, ((x, t), g)| c.assume(x, g.clone(), t.clone()).unwrap())
}

/// Draws judgments until one is accepted. The context is the principal usage,
/// lowered at random where the algebra allows it.
pub fn sample(alg: &Algebra, seed: u64, vars: usize, nonzero: bool, depth: u32) -> Option<Sample> {
    let mut g = Gen::new(alg, seed);
    for _ in 0..TRIES {
        let skel: Vec<(Name, Term)> = ["x", "y"].iter().take(vars).map(|x| (x.to_string(), g.ty(1))).collect();
        let ty = g.ty(1);
        let term = g.term(&ty, &skel, depth);
        let q = if nonzero { g.nonzero_grade() } else { g.grade() };
        let Ok(res) = synth_expected(alg, &skel, &term, &q, Some(&ty)) else { continue };
        let grades: Vec<Grade> = res
            .principal
            .grades()
            .into_iter()
            .map(|d| {
                let below: Vec<Grade> =
                    small_grades(alg).into_iter().filter(|c| alg.leq(c, &d).unwrap()).chain([d.clone()]).collect();
                if g.rng.gen_bool(0.3) {
                    below.choose(&mut g.rng).unwrap().clone()
                } else {
                    d
                }
            })
            .collect();
        let ctx = with_grades(&skel, &grades);
        if check(alg, &ctx, &term, &q, Some(&ty)).is_ok() {
            return Some(Sample { ctx, term, q, ty, principal: res.principal });
        }
    }
    None
}

fn ok_or(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn show(s: &Sample) -> String {
    format!("{} |- {} :^{} {}", s.ctx, s.term, s.q, s.ty)
}

pub fn prop_multiplication(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some(s) = sample(alg, seed, 2, false, 3) else { return vacuous() };
    let r0 = Gen::new(alg, seed ^ 0x9e37).grade();
    let ctx = with_grades(&skeleton(&s.ctx), &alg.vector_scale(&r0, &s.ctx.usage()).unwrap().grades());
    let q = alg.mul(&r0, &s.q).unwrap();
    let res = check(alg, &ctx, &s.term, &q, Some(&s.ty));
    ok_or(res.is_ok(), || format!("{} scaled by {r0}: {:?}", show(&s), res.err()))
}

/// Candidate grades for one split position.
fn split_candidates(alg: &Algebra, gs: &[&Grade]) -> Vec<Grade> {
    let bound = gs
        .iter()
        .filter_map(|g| match g {
            Grade::Nat(n) => u64::try_from(n.clone()).ok(),
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .max(2);
    let mut c = alg.carrier().unwrap_or_else(|| alg.sample(bound));
    c.extend(gs.iter().map(|g| (*g).clone()));
    c
}

pub fn prop_splitting(alg: &Algebra, seed: u64) -> Result<(), String> {
    let mut g = Gen::new(alg, seed ^ 0x51);
    let (q1, q2) = (g.grade(), g.grade());
    let q = alg.add(&q1, &q2).unwrap();
    let Some(s) = sample_at(alg, seed, &q) else { return vacuous() };
    let skel = skeleton(&s.ctx);
    let p1 = synth_expected(alg, &skel, &s.term, &q1, Some(&s.ty)).map_err(|e| format!("{} at {q1}: {e}", show(&s)))?;
    let p2 = synth_expected(alg, &skel, &s.term, &q2, Some(&s.ty)).map_err(|e| format!("{} at {q2}: {e}", show(&s)))?;
    let (mut g1, mut g2) = (Vec::new(), Vec::new());
    for ((e, d1), d2) in s.ctx.entries().iter().zip(p1.principal.grades()).zip(p2.principal.grades()) {
        let cands = split_candidates(alg, &[&e.grade, &d1, &d2]);
        let found = cands.iter().find_map(|a| {
            cands
                .iter()
                .find(|b| {
                    alg.add(a, b).unwrap() == e.grade && alg.leq(a, &d1).unwrap() && alg.leq(b, &d2).unwrap()
                })
                .map(|b| (a.clone(), b.clone()))
        });
        let Some((a, b)) = found else {
            return Err(format!("{}: no split of `{}` into {q1} + {q2} (demands {d1}, {d2})", show(&s), e.name));
        };
        g1.push(a);
        g2.push(b);
    }
    for (gs, qi) in [(&g1, &q1), (&g2, &q2)] {
        let ctx = with_grades(&skel, gs);
        check(alg, &ctx, &s.term, qi, Some(&s.ty)).map_err(|e| format!("{} split part at {qi}: {e}", show(&s)))?;
    }
    Ok(())
}

/// Like [`sample`] but at a fixed observer grade.
pub fn sample_at(alg: &Algebra, seed: u64, q: &Grade) -> Option<Sample> {
    let mut g = Gen::new(alg, seed);
    for _ in 0..TRIES {
        let skel: Vec<(Name, Term)> = ["x", "y"].iter().map(|x| (x.to_string(), g.ty(1))).collect();
        let ty = g.ty(1);
        let term = g.term(&ty, &skel, 3);
        let Ok(res) = synth_expected(alg, &skel, &term, q, Some(&ty)) else { continue };
        let ctx = with_grades(&skel, &res.principal.grades());
        return Some(Sample { ctx, term, q: q.clone(), ty, principal: res.principal });
    }
    None
}

pub fn prop_factorization(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some(s) = sample(alg, seed, 2, true, 3) else { return vacuous() };
    let skel = skeleton(&s.ctx);
    let one = alg.one();
    let p = synth_expected(alg, &skel, &s.term, &one, Some(&s.ty)).map_err(|e| format!("{} at 1: {e}", show(&s)))?;
    let base = with_grades(&skel, &p.principal.grades());
    check(alg, &base, &s.term, &one, Some(&s.ty)).map_err(|e| format!("{} at 1: {e}", show(&s)))?;
    let scaled = alg.vector_scale(&s.q, &p.principal).unwrap();
    ok_or(alg.vector_leq(&s.ctx.usage(), &scaled).unwrap(), || {
        format!("{}: context not below {} · {:?}", show(&s), s.q, p.principal.grades())
    })
}

pub fn prop_substitution(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some(s) = sample(alg, seed, 2, false, 3) else { return vacuous() };
    let (x, r0, a_ty) = {
        let e = &s.ctx.entries()[0];
        (e.name.clone(), e.grade.clone(), e.ty.clone())
    };
    let y = s.ctx.entries()[1].clone();
    let mut g = Gen::new(alg, seed ^ 0xabc);
    let env = vec![(y.name.clone(), y.ty.clone())];
    let arg = (0..TRIES).find_map(|_| {
        let a = g.term(&a_ty, &env, 2);
        synth_expected(alg, &env, &a, &r0, Some(&a_ty)).ok().map(|r| (a, r.principal))
    });
    let Some((arg, delta)) = arg else { return Ok(()) };
    let body = subst(&s.term, &x, &arg);
    let ygrade = alg.add(&y.grade, &delta.grades()[0]).unwrap();
    let ctx = GradedContext::new().assume(&y.name, ygrade, y.ty.clone()).unwrap();
    let res = check(alg, &ctx, &body, &s.q, Some(&s.ty));
    ok_or(res.is_ok(), || format!("{} with {x} := {arg} at {r0}: {:?}", show(&s), res.err()))
}

pub fn prop_preservation(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some(s) = sample(alg, seed, 2, false, 4) else { return vacuous() };
    let mut t = s.term.clone();
    for _ in 0..50 {
        match step(&t) {
            StepOutcome::Stepped(t2) => {
                check(alg, &s.ctx, &t2, &s.q, Some(&s.ty)).map_err(|e| format!("{} steps to {t2}: {e}", show(&s)))?;
                t = t2;
            }
            _ => break,
        }
    }
    Ok(())
}

pub fn prop_progress(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some(s) = sample(alg, seed, 0, false, 4) else { return vacuous() };
    let mut t = s.term.clone();
    for _ in 0..50 {
        match step(&t) {
            StepOutcome::Stepped(t2) => t = t2,
            StepOutcome::Value => return Ok(()),
            StepOutcome::Stuck(why) => return Err(format!("{} reaches stuck {t}: {why}", show(&s))),
        }
    }
    Ok(())
}

/// A closed definition of type `ty` checking at `w`.
pub fn closed_value(alg: &Algebra, g: &mut Gen, ty: &Term, w: &Grade) -> Option<Term> {
    (0..TRIES).find_map(|_| {
        let v = g.term(ty, &[], 2);
        check(alg, &GradedContext::new(), &v, w, Some(ty)).ok().map(|_| v)
    })
}

/// A sample at a nonzero grade and a heap of closed definitions weighted by
/// the context.
pub fn heap_sample(alg: &Algebra, seed: u64) -> Option<(Sample, Heap)> {
    let s = sample(alg, seed, 2, true, 3)?;
    let mut g = Gen::new(alg, seed ^ 0x4ea9);
    let mut h = Heap::new();
    for e in s.ctx.entries() {
        let v = closed_value(alg, &mut g, &e.ty, &e.grade)?;
        h.push(&e.name, e.grade.clone(), v).ok()?;
    }
    Some((s, h))
}

pub fn prop_heap_soundness(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some((s, h)) = heap_sample(alg, seed) else { return Ok(()) };
    let r = soundness_run(alg, &h, &s.ctx, &s.term, &s.q, Some(&s.ty), FUEL)
        .map_err(|e| format!("[{h}] {}: precondition: {e}", show(&s)))?;
    ok_or(r.holds(), || format!("[{h}] {}: {:?}", show(&s), r))
}

pub fn prop_similarity(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some((s, h)) = heap_sample(alg, seed) else { return Ok(()) };
    let r = run(alg, &h, &s.term, &s.q, FUEL).map_err(|e| e.to_string())?;
    for e in &r.trace {
        let before = e.heap_before.fold(&e.term_before);
        let after = e.heap_after.fold(&e.term_after);
        if before.alpha_eq(&after) {
            continue;
        }
        match step(&before) {
            StepOutcome::Stepped(t) if t.alpha_eq(&after) => {}
            other => {
                return Err(format!(
                    "[{h}] {}: rule {} folds {before} to {after}, small step gives {other:?}",
                    show(&s),
                    e.rule
                ))
            }
        }
    }
    Ok(())
}

pub fn prop_oracle_soundness(alg: &Algebra, seed: u64) -> Result<(), String> {
    let Some(s) = sample(alg, seed, 2, false, 2) else { return vacuous() };
    let budget = SearchBudget::for_algebra(alg);
    let v = derivable(alg, &s.ctx, &s.term, &s.q, &s.ty, &budget).map_err(|e| e.to_string())?;
    ok_or(v != Verdict::NotDerivable, || format!("{}: checker accepts, oracle refutes", show(&s)))
}

/// Outcome of one property over one algebra.
pub struct PropOutcome {
    pub name: &'static str,
    pub algebra: String,
    pub cases: u32,
    pub elapsed: Duration,
    pub failure: Option<String>,
}

pub type Property = fn(&Algebra, u64) -> Result<(), String>;

const VACUOUS: &str = "no judgment drawn";

fn vacuous() -> Result<(), String> {
    Err(VACUOUS.into())
}

/// Whether a property is claimed for `alg`. Factorization is false over
/// lattices: it would move `H` information into an `L` world.
pub fn applies(name: &str, alg: &Algebra) -> bool {
    !(name == "Factorization" && alg.is_lattice())
}

/// `∅ ⊢ λx. let (y^H, _) = x in y :^H T_H Bool → Bool` holds over the diamond
/// but its factorization to `L` must not.
pub fn lattice_factorization_refuted() -> Result<(), String> {
    let alg = algebra("lattice:diamond");
    let t = ldc::syntax::parse_term("\\^L x:T_H Bool. let_L (y^H, _) = x in y", &alg).map_err(|e| e.to_string())?;
    let ty = ldc::syntax::parse_type("{}^L T_H Bool -> Bool", &alg).map_err(|e| e.to_string())?;
    let g = |s: &str| alg.parse_grade(s).unwrap();
    let empty = GradedContext::new();
    check(&alg, &empty, &t, &g("H"), Some(&ty)).map_err(|e| format!("at H: {e}"))?;
    match check(&alg, &empty, &t, &g("L"), Some(&ty)) {
        Ok(_) => Err("factorized judgment at L accepted".into()),
        Err(_) => Ok(()),
    }
}

pub const PROPERTIES: [(&str, Property); 8] = [
    ("Multiplication", prop_multiplication),
    ("Splitting", prop_splitting),
    ("Factorization", prop_factorization),
    ("Substitution", prop_substitution),
    ("Preservation", prop_preservation),
    ("Progress", prop_progress),
    ("HeapSoundness", prop_heap_soundness),
    ("Similarity", prop_similarity),
];

/// Runs `prop` for `cases` deterministic seeds under proptest.
pub fn run_property(name: &'static str, prop: Property, alg: &Algebra, cases: u32) -> PropOutcome {
    let config = Config { cases, failure_persistence: None, max_global_rejects: cases * 20, ..Config::default() };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(config, rng);
    let start = Instant::now();
    let result = runner.run(&any::<u64>(), |seed| {
        prop(alg, seed).map_err(|e| if e == VACUOUS { TestCaseError::reject(e) } else { TestCaseError::fail(e) })
    });
    PropOutcome {
        name,
        algebra: alg.name(),
        cases,
        elapsed: start.elapsed(),
        failure: result.err().map(|e| e.to_string()),
    }
}

/// Noninterference over `L ⊑ H`: generated `f : {}^H A → A` accepted at `L`.
pub struct NiSummary {
    pub functions: usize,
    pub violations: Vec<String>,
    pub diverging: usize,
}

pub fn noninterference_harness(count: usize, seed: u64) -> NiSummary {
    let alg = algebra("lattice:lh");
    let (l, h) = (alg.parse_grade("L").unwrap(), alg.parse_grade("H").unwrap());
    let mut g = Gen::new(&alg, seed);
    let mut out = NiSummary { functions: 0, violations: Vec::new(), diverging: 0 };
    let inputs = |ty: &Term| -> Vec<Term> {
        if *ty == bool_ty() {
            vec![inj1(Term::Unit), inj2(Term::Unit)]
        } else {
            vec![Term::Unit, Term::Unit]
        }
    };
    let mut attempts = 0;
    while out.functions < count && attempts < 200_000 {
        attempts += 1;
        let a = g.base_ty();
        let fty = arrow(h.clone(), a.clone(), a.clone());
        let f = g.term(&fty, &[], 3);
        if !matches!(f, Term::Lam(..)) || check(&alg, &GradedContext::new(), &f, &l, Some(&fty)).is_err() {
            continue;
        }
        let xs = inputs(&a);
        let Ok(rep) = noninterference_test(&alg, &f, &xs[0], &xs[1], &h, &l, FUEL) else { continue };
        out.functions += 1;
        match rep.outcome {
            NiOutcome::Violation { left, right } => out.violations.push(format!("{f}: {left:?} vs {right:?}")),
            NiOutcome::BothDiverge => out.diverging += 1,
            NiOutcome::Equal(_) => {}
        }
    }
    out
}

/// Affine usage over `nat-bounded`: `a ↦^1 v` is looked up at most once.
pub struct AffineSummary {
    pub runs: usize,
    pub max_lookups: usize,
    pub failures: Vec<String>,
}

pub fn affine_harness(count: usize, seed: u64) -> AffineSummary {
    let alg = algebra("nat-bounded");
    let one = alg.one();
    let mut g = Gen::new(&alg, seed);
    let mut out = AffineSummary { runs: 0, max_lookups: 0, failures: Vec::new() };
    let mut attempts = 0;
    while out.runs < count && attempts < 200_000 {
        attempts += 1;
        let a = g.base_ty();
        let ty = g.ty(1);
        let skel = vec![("a".to_string(), a.clone())];
        let term = g.term(&ty, &skel, 3);
        if !term.occurs_free("a") {
            continue;
        }
        let ctx = with_grades(&skel, &[one.clone()]);
        if check(&alg, &ctx, &term, &one, Some(&ty)).is_err() {
            continue;
        }
        let Some(v) = closed_value(&alg, &mut g, &a, &one) else { continue };
        let h = Heap::new().with("a", one.clone(), v).unwrap();
        let r = match run(&alg, &h, &term, &one, FUEL) {
            Ok(r) => r,
            Err(e) => {
                out.failures.push(format!("{term}: {e}"));
                continue;
            }
        };
        out.runs += 1;
        let n = count_lookups(&r.trace, "a");
        out.max_lookups = out.max_lookups.max(n);
        if n > 1 || matches!(r.end, RunEnd::Stuck(_)) {
            out.failures.push(format!("{term}: {n} lookups, end {:?}", r.end));
        }
    }
    out
}
