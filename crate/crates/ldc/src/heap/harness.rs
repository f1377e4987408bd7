//! Checks built on heap traces: soundness, the availability lemmas,
//! noninterference and look-up counting.

use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::{Algebra, AlgebraError, Grade};
use crate::check::{check, synth_config, CheckError, ConfigBinding};
use crate::syntax::{GradedContext, Name, Term};

use super::{compatible, compatible_demands, heap_step, run, CompatError, Fragment, Heap, HeapOutcome, RunEnd, TraceEntry};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoundnessReport {
    pub steps: usize,
    pub end: RunEnd,
    /// The first step after which the invariant failed.
    pub violation: Option<String>,
}

impl SoundnessReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none() && !matches!(self.end, RunEnd::Stuck(_))
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PreconditionError {
    #[error("the observer grade is zero")]
    ZeroGrade,
    #[error(transparent)]
    Compat(#[from] CompatError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Runs `[h] a` at `q` for a simple-fragment judgment `ctx ⊢ a :^q A` with
/// `h ⊨ ctx`. After every step the reduct and heap are re-typed jointly and
/// the heap must be compatible with the reduct's principal usage.
pub fn soundness_run(
    alg: &Algebra,
    h: &Heap,
    ctx: &GradedContext,
    a: &Term,
    q: &Grade,
    expected: Option<&Term>,
    fuel: u64,
) -> Result<SoundnessReport, PreconditionError> {
    if alg.is_zero(q) {
        return Err(PreconditionError::ZeroGrade);
    }
    compatible(alg, Fragment::Simple, h, ctx)?;
    let ty = check(alg, ctx, a, q, expected)?;
    let mut types: Vec<(Name, Option<Term>)> = ctx.entries().iter().map(|e| (e.name.clone(), Some(e.ty.clone()))).collect();
    let (mut heap, mut term) = (h.clone(), a.clone());
    let support = BTreeSet::new();
    for steps in 0..fuel as usize {
        let e = match heap_step(alg, &heap, &term, q, &support)? {
            HeapOutcome::Value => return Ok(SoundnessReport { steps, end: RunEnd::Value, violation: None }),
            HeapOutcome::Stuck(s) => {
                let violation = Some(format!("stuck after {steps} steps: {s}"));
                return Ok(SoundnessReport { steps, end: RunEnd::Stuck(s), violation });
            }
            HeapOutcome::Stepped(e) => e,
        };
        types.extend(e.allocated.iter().cloned());
        heap = e.heap_after;
        term = e.term_after;
        if let Err(msg) = reduct_compatible(alg, &heap, &types, &term, q, &ty) {
            let violation = Some(format!("after step {} ({}): {msg}", steps + 1, e.rule));
            return Ok(SoundnessReport { steps: steps + 1, end: RunEnd::FuelExhausted, violation });
        }
    }
    let end = if term.is_value() { RunEnd::Value } else { RunEnd::FuelExhausted };
    Ok(SoundnessReport { steps: fuel as usize, end, violation: None })
}

fn reduct_compatible(
    alg: &Algebra,
    heap: &Heap,
    types: &[(Name, Option<Term>)],
    term: &Term,
    q: &Grade,
    ty: &Term,
) -> Result<(), String> {
    let bindings: Vec<ConfigBinding> = heap
        .bindings()
        .iter()
        .map(|b| {
            let t = types.iter().find(|(n, _)| *n == b.name).and_then(|(_, t)| t.clone());
            (b.name.clone(), b.grade.clone(), b.term.clone(), t)
        })
        .collect();
    let typing = synth_config(alg, &bindings, term, q, Some(ty)).map_err(|e| format!("reduct does not check: {e}"))?;
    compatible_demands(alg, heap, &typing.result.principal.grades(), &typing.binding_usage)
        .map_err(|e| format!("heap no longer compatible: {e}"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnchangedReport {
    /// Unavailable bindings inspected, summed over steps.
    pub checked: usize,
    pub violations: Vec<String>,
}

impl UnchangedReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A binding that cannot fund a read at the step's grade keeps its weight.
pub fn check_unchanged(alg: &Algebra, trace: &[TraceEntry]) -> Result<UnchangedReport, AlgebraError> {
    let mut report = UnchangedReport { checked: 0, violations: Vec::new() };
    for (i, e) in trace.iter().enumerate() {
        for (j, b) in e.heap_before.bindings().iter().enumerate() {
            if alg.residual(&b.grade, &e.grade)?.is_some() {
                continue;
            }
            report.checked += 1;
            let after = &e.heap_after.bindings()[j];
            if after.grade != b.grade {
                report.violations.push(format!("step {i}: `{}` went from {} to {}", b.name, b.grade, after.grade));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrrelevantReport {
    /// Whether the binding was unavailable at the run's grade.
    pub precondition: bool,
    pub steps: usize,
    pub first_difference: Option<usize>,
}

impl IrrelevantReport {
    pub fn holds(&self) -> bool {
        !self.precondition || self.first_difference.is_none()
    }
}

/// Runs `[h] a` twice, the second time with `x`'s definition replaced, and
/// compares the traces with `x`'s definition masked out.
pub fn check_irrelevant(
    alg: &Algebra,
    h: &Heap,
    a: &Term,
    q: &Grade,
    x: &str,
    replacement: &Term,
    fuel: u64,
) -> Result<IrrelevantReport, AlgebraError> {
    let Some(i) = h.position(x) else {
        return Ok(IrrelevantReport { precondition: false, steps: 0, first_difference: None });
    };
    if alg.residual(&h.bindings()[i].grade, q)?.is_some() {
        return Ok(IrrelevantReport { precondition: false, steps: 0, first_difference: None });
    }
    let mut h2 = h.clone();
    h2.bindings[i].term = replacement.clone();
    let (r1, r2) = (run(alg, h, a, q, fuel)?, run(alg, &h2, a, q, fuel)?);
    let masked = |heap: &Heap| {
        let mut m = heap.clone();
        m.bindings[i].term = Term::Unit;
        m
    };
    let same = |e1: &TraceEntry, e2: &TraceEntry| {
        e1.term_before == e2.term_before
            && e1.term_after == e2.term_after
            && e1.rule == e2.rule
            && masked(&e1.heap_before) == masked(&e2.heap_before)
            && masked(&e1.heap_after) == masked(&e2.heap_after)
    };
    let mut first_difference = r1.trace.iter().zip(&r2.trace).position(|(e1, e2)| !same(e1, e2));
    if first_difference.is_none() && (r1.trace.len() != r2.trace.len() || r1.end != r2.end) {
        first_difference = Some(r1.trace.len().min(r2.trace.len()));
    }
    Ok(IrrelevantReport { precondition: true, steps: r1.trace.len(), first_difference })
}

pub fn count_lookups(trace: &[TraceEntry], x: &str) -> usize {
    trace.iter().filter(|e| e.looked_up.as_deref() == Some(x)).count()
}

/// What an observer at some grade sees of a value, forcing visible parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observation {
    Unit,
    Int(i64),
    Inj1(Box<Observation>),
    Inj2(Box<Observation>),
    /// The first component is `None` when hidden from the observer.
    Pair(Option<Box<Observation>>, Box<Observation>),
    Function,
    Type(String),
    Diverged,
    Stuck(String),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Unit => f.write_str("unit"),
            Observation::Int(n) => write!(f, "{n}"),
            Observation::Inj1(o) => write!(f, "inj1 {o}"),
            Observation::Inj2(o) => write!(f, "inj2 {o}"),
            Observation::Pair(Some(a), b) => write!(f, "({a}, {b})"),
            Observation::Pair(None, b) => write!(f, "(<hidden>, {b})"),
            Observation::Function => f.write_str("<function>"),
            Observation::Type(t) => f.write_str(t),
            Observation::Diverged => f.write_str("<diverged>"),
            Observation::Stuck(s) => write!(f, "<stuck: {s}>"),
        }
    }
}

/// Evaluates `a` in `heap` at `q` and then its visible components.
pub fn observe(alg: &Algebra, heap: &mut Heap, a: &Term, q: &Grade, fuel: &mut u64) -> Result<Observation, AlgebraError> {
    let mut term = a.clone();
    let support = BTreeSet::new();
    loop {
        match heap_step(alg, heap, &term, q, &support)? {
            HeapOutcome::Value => break,
            HeapOutcome::Stuck(s) => return Ok(Observation::Stuck(s.to_string())),
            HeapOutcome::Stepped(e) => {
                if *fuel == 0 {
                    return Ok(Observation::Diverged);
                }
                *fuel -= 1;
                *heap = e.heap_after;
                term = e.term_after;
            }
        }
    }
    Ok(match &term {
        Term::Unit => Observation::Unit,
        Term::IntLit(n) => Observation::Int(*n),
        Term::Inj1(p) => Observation::Inj1(Box::new(observe(alg, heap, p, q, fuel)?)),
        Term::Inj2(p) => Observation::Inj2(Box::new(observe(alg, heap, p, q, fuel)?)),
        Term::Pair(a1, r, a2) => {
            let qr = alg.mul(q, r)?;
            let visible = if alg.is_lattice() { alg.leq(&qr, q)? } else { !alg.is_zero(&qr) };
            let first = if visible { Some(Box::new(observe(alg, heap, a1, &qr, fuel)?)) } else { None };
            Observation::Pair(first, Box::new(observe(alg, heap, a2, q, fuel)?))
        }
        Term::Lam(..) => Observation::Function,
        t => Observation::Type(t.to_string()),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NiOutcome {
    Equal(Observation),
    BothDiverge,
    Violation { left: Observation, right: Observation },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiReport {
    pub function_type: Term,
    pub outcome: NiOutcome,
}

impl NiReport {
    pub fn holds(&self) -> bool {
        !matches!(self.outcome, NiOutcome::Violation { .. })
    }
}

/// Runs `f a1 ^high` and `f a2 ^high` at `low` and compares what `low` sees.
pub fn noninterference_test(
    alg: &Algebra,
    f: &Term,
    a1: &Term,
    a2: &Term,
    high: &Grade,
    low: &Grade,
    fuel: u64,
) -> Result<NiReport, CheckError> {
    let empty = GradedContext::new();
    let fty = check(alg, &empty, f, low, None)?;
    let dom = match &fty {
        Term::Pi(_, r, dom, _) if r == high => (**dom).clone(),
        other => {
            return Err(CheckError::Mismatch {
                rule: "App",
                expected: format!("a function with binder grade {high}"),
                found: other.to_string(),
            })
        }
    };
    check(alg, &empty, a1, high, Some(&dom))?;
    check(alg, &empty, a2, high, Some(&dom))?;
    let go = |arg: &Term| -> Result<Observation, CheckError> {
        let app = Term::App(Box::new(f.clone()), Box::new(arg.clone()), high.clone());
        let mut fuel = fuel;
        Ok(observe(alg, &mut Heap::new(), &app, low, &mut fuel)?)
    };
    let (left, right) = (go(a1)?, go(a2)?);
    let outcome = match (left, right) {
        (Observation::Diverged, Observation::Diverged) => NiOutcome::BothDiverge,
        (l, r) if l == r && !matches!(l, Observation::Stuck(_)) => NiOutcome::Equal(l),
        (left, right) => NiOutcome::Violation { left, right },
    };
    Ok(NiReport { function_type: fty, outcome })
}
