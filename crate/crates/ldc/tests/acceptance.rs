//! End-to-end acceptance: one pass/fail line per criterion.

mod common;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ldc::algebra::{verify_axioms, Algebra, Grade};
use ldc::check::check;
use ldc::heap::{run, Heap, RunEnd};
use ldc::lnl;
use ldc::oracle::{audit, AuditSpace, Generator, SearchBudget};
use ldc::syntax::{parse_judgment, parse_term, parse_type};

use common::{
    affine_harness, algebra, applies, lattice_factorization_refuted, noninterference_harness, run_property,
    suite_algebras, CASES, PROPERTIES,
};

const TABLE_BUDGET: Duration = Duration::from_secs(1);
const SUITE_BUDGET: Duration = Duration::from_secs(60);
const NI_FUNCTIONS: usize = 50;
const AFFINE_RUNS: usize = 50;
const LNL_MIN_JUDGMENTS: usize = 20;
const LNL_MIN_PAIRS: usize = 5;
const AUDIT_MAX_SIZE: usize = 5;
const HEAP_FUEL: u64 = 1_000;
const BETA_FUEL: u64 = 10_000;

type Outcome = Result<String, String>;

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(rel)
}

fn grade(alg: &Algebra, g: &str) -> Grade {
    alg.parse_grade(g).unwrap_or_else(|e| panic!("grade {g}: {e}"))
}

/// Whether `term : ty` checks at `q` under the empty context.
fn closed(alg: &Algebra, q: &str, term: &str, ty: &str) -> Result<bool, String> {
    let t = parse_term(term, alg).map_err(|e| format!("{term}: {e}"))?;
    let ty = parse_type(ty, alg).map_err(|e| format!("{ty}: {e}"))?;
    Ok(check(alg, &ldc::syntax::GradedContext::new(), &t, &grade(alg, q), Some(&ty)).is_ok())
}

/// Whether the judgment `ctx |- term : ty` checks at `q`.
fn judgment(alg: &Algebra, q: &str, text: &str) -> Result<bool, String> {
    let j = parse_judgment(text, alg).map_err(|e| format!("{text}: {e}"))?;
    Ok(check(alg, &j.ctx, &j.term, &grade(alg, q), j.ty.as_ref()).is_ok())
}

/// Runs a table of `(expected, grade, judgment)` rows.
fn table(alg: &Algebra, rows: &[(bool, &str, &str)]) -> Result<usize, String> {
    let mut ok = 0;
    for (want, q, text) in rows {
        let got = judgment(alg, q, text)?;
        if got != *want {
            return Err(format!("`{text}` at {q}: expected {}, got {}", verdict(*want), verdict(got)));
        }
        ok += 1;
    }
    Ok(ok)
}

fn verdict(b: bool) -> &'static str {
    if b {
        "accept"
    } else {
        "reject"
    }
}

fn nat_bounded_table() -> Outcome {
    let alg = algebra("nat-bounded");
    let rows = [
        (true, "1", r"\^1 x:A. x : {}^1 A -> A"),
        (true, "2", r"\^1 x:A. x : {}^1 A -> A"),
        (true, "1", r"\^1 x:{}^1 A & A. let_1 (x1^1, x2) = x in x1 : {}^1 ({}^1 A & A) -> A"),
        (false, "1", r"\^0 x:A. x : {}^0 A -> A"),
        (false, "1", r"\^1 x:A. (x^1, x) : {}^1 A -> {}^1 A & A"),
        (false, "1", r"\^1 x:A. (x^2, unit) : {}^1 A -> {}^2 A & Unit"),
    ];
    let start = Instant::now();
    let n = table(&alg, &rows)?;
    let elapsed = start.elapsed();
    if elapsed > TABLE_BUDGET {
        return Err(format!("{n}/6 in {elapsed:?}, over {TABLE_BUDGET:?}"));
    }
    Ok(format!("{n}/6 in {elapsed:?}"))
}

fn diamond_table() -> Outcome {
    let alg = algebra("lattice:diamond");
    let rows = [
        (true, "H", r"\^L x:Bool. x : {}^L Bool -> Bool"),
        (true, "L", r"\^H x:Bool. eta_M1 (eta_M2 x) : {}^H Bool -> T_M1 (T_M2 Bool)"),
        (false, "L", r"\^H x:Bool. x : {}^H Bool -> Bool"),
        (false, "M1", "x :^H Bool |- x : Bool"),
    ];
    Ok(format!("{}/4", table(&alg, &rows)?))
}

fn join_fork() -> Outcome {
    let alg = algebra("lattice:diamond");
    let elems = alg.carrier().expect("finite lattice");
    let bot = alg.one().to_string();
    let (mut c1, mut c2) = (0, 0);
    for l1 in &elems {
        for l2 in &elems {
            let j = alg.mul(l1, l2).map_err(|e| e.to_string())?;
            let join = format!(
                r"\x. eta_{j} (let (y^{l2}, _) = (let (z^{l1}, _) = x in z) in y) : T_{l1} (T_{l2} Bool) -> T_{j} Bool"
            );
            let fork = format!(r"\x. eta_{l1} (eta_{l2} (let (y^{j}, _) = x in y)) : T_{j} Bool -> T_{l1} (T_{l2} Bool)");
            if !judgment(&alg, &bot, &join)? {
                return Err(format!("c1 rejected for ({l1}, {l2})"));
            }
            c1 += 1;
            if !judgment(&alg, &bot, &fork)? {
                return Err(format!("c2 rejected for ({l1}, {l2})"));
            }
            c2 += 1;
        }
    }
    Ok(format!("c1 {c1}/16, c2 {c2}/16"))
}

/// `(algebra, heap file, grade, printed successor heap or None for Stuck)`.
fn heap_table() -> Outcome {
    let lht = format!("lattice:{}", corpus("lht.lat").display());
    let rows: [(&str, &str, &str, Option<&str>); 6] = [
        ("nat-exact", "x1true.hp", "1", Some("x ^0 = true")),
        ("nat-exact", "x0true.hp", "1", None),
        ("nat-exact", "x2true.hp", "2", Some("x ^0 = true")),
        ("nat-exact", "x1true.hp", "2", None),
        (&lht, "xLtrue.hp", "H", Some("x ^L = true")),
        (&lht, "xHtrue.hp", "L", None),
    ];
    let mut ok = 0;
    for (sel, file, q, want) in rows {
        let alg = Algebra::from_selector(sel).map_err(|e| e.to_string())?;
        let text = std::fs::read_to_string(corpus(&format!("heaps/{file}"))).map_err(|e| e.to_string())?;
        let h = Heap::parse(&text, &alg).map_err(|e| e.to_string())?;
        let x = parse_term("x", &alg).map_err(|e| e.to_string())?;
        let r = run(&alg, &h, &x, &grade(&alg, q), HEAP_FUEL).map_err(|e| e.to_string())?;
        let heap = r.heap.to_string();
        let value = parse_term("true", &alg).map_err(|e| e.to_string())?;
        let good = match (want, &r.end) {
            (Some(expected), RunEnd::Value) => {
                Heap::parse(expected, &alg).map_err(|e| e.to_string())? == r.heap && r.term == value
            }
            (None, RunEnd::Stuck(_)) => true,
            _ => false,
        };
        if !good {
            return Err(format!("{file} at {q} under {sel}: ended {:?} with heap `{}`", r.end, heap.trim()));
        }
        ok += 1;
    }
    Ok(format!("{ok}/6"))
}

fn omega_examples() -> Outcome {
    let unfair = (r"\^1 x:A. (x^1, x)", "{}^1 A -> {}^1 A & A");
    let identity = (r"\^1 x:A. x", "{}^1 A -> A");
    for sel in ["lin3", "aff3", "nat-exact-omega", "nat-bounded-omega"] {
        let alg = algebra(sel);
        if closed(&alg, "1", unfair.0, unfair.1)? {
            return Err(format!("unfair derivation accepted at 1 under {sel}"));
        }
        if !closed(&alg, "w", identity.0, identity.1)? {
            return Err(format!("identity rejected at w under {sel}"));
        }
    }
    Ok("4/4 algebras".into())
}

fn product_examples() -> Outcome {
    let alg = algebra("product(lin3,lattice:lmh)");
    let j1 = |x: &str| format!("x :^{x} Int |- x + x : Int");
    let j2 = |x: &str, y: &str| format!("x :^{x} Int, y :^{y} Bool |- if y then x + x else x : Int");
    let rows = [
        (true, "(1,L)", j1("(w,L)")),
        (true, "(1,M)", j2("(w,L)", "(1,M)")),
        (false, "(1,L)", j1("(1,L)")),
        (false, "(1,L)", j1("(w,H)")),
        (false, "(1,M)", j2("(w,L)", "(1,H)")),
    ];
    let rows: Vec<(bool, &str, &str)> = rows.iter().map(|(b, q, t)| (*b, *q, t.as_str())).collect();
    Ok(format!("{}/5", table(&alg, &rows)?))
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for alg in suite_algebras() {
        for (name, prop) in PROPERTIES {
            if !applies(name, &alg) {
                lattice_factorization_refuted().map_err(|e| format!("{name} over {}: {e}", alg.name()))?;
                continue;
            }
            let out = run_property(name, prop, &alg, CASES);
            if let Some(f) = out.failure {
                return Err(format!("{name} over {}: {f}", out.algebra));
            }
            runs += 1;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > SUITE_BUDGET {
        return Err(format!("{runs} suites took {elapsed:?}, over {SUITE_BUDGET:?}"));
    }
    Ok(format!(
        "{runs} suites x {CASES} cases, 0 counterexamples, {elapsed:.1?}; Factorization over diamond n/a (refuted by the H/L counterexample)"
    ))
}

fn harnesses() -> Outcome {
    let ni = noninterference_harness(NI_FUNCTIONS, 7);
    if ni.functions < NI_FUNCTIONS {
        return Err(format!("only {} of {NI_FUNCTIONS} functions generated", ni.functions));
    }
    if let Some(v) = ni.violations.first() {
        return Err(format!("noninterference: {v}"));
    }
    let aff = affine_harness(AFFINE_RUNS, 11);
    if aff.runs < AFFINE_RUNS {
        return Err(format!("only {} of {AFFINE_RUNS} affine runs", aff.runs));
    }
    if let Some(f) = aff.failures.first() {
        return Err(format!("affine usage: {f}"));
    }
    Ok(format!(
        "NI {}/{NI_FUNCTIONS} ({} diverging pairs), affine {}/{AFFINE_RUNS} (max lookups {})",
        ni.functions, ni.diverging, aff.runs, aff.max_lookups
    ))
}

fn lnl_corpus() -> Outcome {
    let lines = |f: &str| -> Result<Vec<String>, String> {
        let text = std::fs::read_to_string(corpus(&format!("lnl/{f}"))).map_err(|e| e.to_string())?;
        Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect())
    };
    let mut judgments = 0;
    for src in lines("judgments.lnl")? {
        let j = lnl::parse_lnl_judgment(&src).map_err(|e| format!("{src}: {e}"))?;
        let v = lnl::validate(&j);
        if let Err(e) = &v.result {
            return Err(format!("{src}: {e}"));
        }
        judgments += 1;
    }
    let mut pairs = 0;
    for src in lines("beta.lnl")? {
        let (l, r) = src.split_once("==").ok_or_else(|| format!("{src}: no `==`"))?;
        let e = lnl::parse_lnl_term(l.trim()).map_err(|e| e.to_string())?;
        let f = lnl::parse_lnl_term(r.trim()).map_err(|e| e.to_string())?;
        if !lnl::beta_preserved(&e, &f, BETA_FUEL).map_err(|e| e.to_string())? {
            return Err(format!("{src}: not beta-equal after translation"));
        }
        pairs += 1;
    }
    if judgments < LNL_MIN_JUDGMENTS || pairs < LNL_MIN_PAIRS {
        return Err(format!("{judgments} judgments, {pairs} pairs"));
    }
    Ok(format!("{judgments} judgments checked, {pairs} beta pairs preserved"))
}

fn oracle_audit() -> Outcome {
    let mut ledger = String::from("# Incompleteness ledger\n\nJudgments the checker accepts but the search refutes.\n\n");
    let mut summary = Vec::new();
    for sel in ["lin3", "nat-exact"] {
        let alg = algebra(sel);
        let budget = SearchBudget::for_algebra(&alg);
        let r = audit(&alg, &budget, &AuditSpace::standard(&alg), &Generator::Exhaustive { max_size: AUDIT_MAX_SIZE })
            .map_err(|e| e.to_string())?;
        if let Some(d) = r.soundness().next() {
            return Err(format!("{sel}: {d}"));
        }
        let _ = writeln!(ledger, "{}", r.ledger());
        summary.push(format!("{sel}: {} judgments, {} incomplete", r.judgments, r.incompleteness().count()));
    }
    std::fs::write(corpus("incompleteness.md"), ledger).map_err(|e| e.to_string())?;
    Ok(format!("0 soundness divergences ({})", summary.join("; ")))
}

/// A distributivity witness `(a, b, c)` with its two sides.
fn has_witness(alg: &Algebra, law: &str, args: [&str; 3], lhs: &str, rhs: &str) -> bool {
    let r = verify_axioms(alg, 0);
    let want: Vec<Grade> = args.iter().map(|a| grade(alg, a)).collect();
    r.law(law).is_some_and(|l| {
        l.witnesses.iter().any(|w| {
            w.args == want && w.lhs == Some(grade(alg, lhs)) && w.rhs == Some(grade(alg, rhs))
        })
    })
}

fn axioms() -> Outcome {
    let builtins = [
        "nat-exact",
        "nat-bounded",
        "nat-exact-omega",
        "nat-bounded-omega",
        "lin3",
        "aff3",
        "lattice:diamond",
        "lattice:lmh",
        "lattice:lh",
        "lattice:m3",
        "lattice:n5",
    ];
    for sel in builtins {
        let r = verify_axioms(&algebra(sel), 6);
        if let Some(l) = r.failures().first() {
            return Err(format!("{sel} fails {}", l.law));
        }
    }
    let (m3, n5) = (algebra("lattice:m3"), algebra("lattice:n5"));
    let join = "distributive-join-over-meet";
    let meet = "distributive-meet-over-join";
    let expected = [
        (&m3, join, ["l1", "l3", "l2"], "l2", "top"),
        (&m3, meet, ["l1", "l3", "l2"], "l2", "bot"),
        (&n5, join, ["l2", "l3", "l1"], "l1", "l3"),
        (&n5, meet, ["l1", "l2", "l3"], "l3", "l1"),
    ];
    for (alg, law, args, lhs, rhs) in expected {
        if !has_witness(alg, law, args, lhs, rhs) {
            return Err(format!("{}: no {law} witness {args:?} with lhs {lhs}, rhs {rhs}", alg.name()));
        }
    }
    Ok(format!("{} builtins pass; M3 and N5 witnesses match", builtins.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("nat-bounded accept/reject table", nat_bounded_table),
        ("diamond lattice table", diamond_table),
        ("join/fork over the diamond", join_fork),
        ("heap reduction table", heap_table),
        ("omega: unfair rejected, identity at w", omega_examples),
        ("product algebra examples", product_examples),
        ("property suites", property_suites),
        ("noninterference and affine harnesses", harnesses),
        ("LNL translation corpus", lnl_corpus),
        ("oracle audit", oracle_audit),
        ("algebra laws and witnesses", axioms),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let t = start.elapsed();
        match out {
            Ok(detail) => println!("[{:>2}] PASS {name}: {detail} ({t:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("[{:>2}] FAIL {name}: {why} ({t:.2?})", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
