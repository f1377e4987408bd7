//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{verify_axioms, Algebra, Grade};
use crate::check::{self, PtsSpec};
use crate::eval::{self, StepOutcome};
use crate::heap::{self, Heap, RunEnd};
use crate::lnl;
use crate::oracle::{self, AuditSpace, Generator, SearchBudget, Verdict};
use crate::syntax::{self, parse_judgment, parse_type};

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Parser, Debug)]
#[command(name = "ldc", version, about = "Grade-parametric linear dependency calculus toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub session: SessionArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SessionArgs {
    /// nat-exact | nat-bounded | nat-exact-omega | nat-bounded-omega | lin3 | aff3 | lattice:<file> | product(<a>,<b>)
    #[arg(long, global = true, default_value = "nat-exact")]
    pub algebra: String,
    /// Step budget for evaluation and conversion.
    #[arg(long, global = true, env = "LDC_FUEL", default_value_t = DEFAULT_FUEL)]
    pub fuel: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Print every step of a run.
    #[arg(long, global = true)]
    pub trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a judgment file `ctx |- term : type`.
    Check {
        file: PathBuf,
        #[arg(long)]
        grade: Option<String>,
        /// Expected type, overriding the one in the file.
        #[arg(long)]
        expected: Option<String>,
        /// Use the dependent checker with a preset (stlc, system-f, cc, type-in-type) or a spec file.
        #[arg(long, num_args = 0..=1, default_missing_value = "type-in-type")]
        pts: Option<String>,
    },
    /// Call-by-name evaluation of a term file.
    Eval { file: PathBuf },
    /// Weighted-heap evaluation of a term against a heap file.
    Heap {
        heap: PathBuf,
        term: PathBuf,
        #[arg(long)]
        grade: Option<String>,
    },
    /// Translate LNL judgments or terms, one per line, and check each translation.
    TranslateLnl { file: PathBuf },
    /// Decide a judgment by derivation search, or audit the checker against the search.
    Oracle {
        file: Option<PathBuf>,
        #[arg(long)]
        grade: Option<String>,
        /// Largest audited term, in nodes.
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        /// Sample this many terms instead of enumerating them all.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        max_depth: usize,
    },
    /// Algebra utilities.
    Algebra {
        #[command(subcommand)]
        action: AlgebraCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum AlgebraCommand {
    /// Check the laws the algebra claims.
    Verify {
        /// Defaults to `--algebra`.
        selector: Option<String>,
        #[arg(long, default_value_t = 64)]
        sample_bound: u64,
        /// Print every recorded counterexample, not just the first.
        #[arg(long)]
        all_witnesses: bool,
    },
}

/// Resolved session settings.
#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub algebra: Algebra,
    pub selector: String,
    pub fuel: u64,
    pub format: Format,
    pub trace: bool,
}

impl SessionConfig {
    pub fn from_args(args: &SessionArgs) -> Result<SessionConfig> {
        let algebra = Algebra::from_selector(&args.algebra).with_context(|| format!("--algebra {}", args.algebra))?;
        if args.fuel == 0 {
            bail!("--fuel must be positive");
        }
        Ok(SessionConfig {
            algebra,
            selector: args.algebra.clone(),
            fuel: args.fuel,
            format: args.format,
            trace: args.trace,
        })
    }

    fn grade(&self, text: Option<&str>) -> Result<Grade> {
        match text {
            Some(t) => Ok(self.algebra.parse_grade(t)?),
            None => Ok(self.algebra.one()),
        }
    }
}

/// Whether a command succeeded in the domain sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Accepted,
    Rejected,
}

/// Collects report lines in the chosen format.
pub struct Report {
    format: Format,
    lines: Vec<String>,
}

impl Report {
    fn new(format: Format, command: &str, settings: Value) -> Report {
        let mut r = Report { format, lines: Vec::new() };
        match format {
            Format::Human => {
                let fields: Vec<String> = settings
                    .as_object()
                    .map(|o| o.iter().map(|(k, v)| format!("{k}={}", plain(v))).collect())
                    .unwrap_or_default();
                r.lines.push(format!("# ldc {command} {}", fields.join(" ")));
            }
            Format::Structured => r.lines.push(json!({"header": command, "settings": settings}).to_string()),
        }
        r
    }

    fn emit(&mut self, human: impl Into<String>, structured: Value) {
        match self.format {
            Format::Human => self.lines.push(human.into()),
            Format::Structured => self.lines.push(structured.to_string()),
        }
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs a parsed command line, writing the report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status> {
    let cfg = SessionConfig::from_args(&cli.session)?;
    let (report, status) = match &cli.command {
        Command::Check { file, grade, expected, pts } => {
            cmd_check(&cfg, file, grade.as_deref(), expected.as_deref(), pts.as_deref())?
        }
        Command::Eval { file } => cmd_eval(&cfg, file)?,
        Command::Heap { heap, term, grade } => cmd_heap(&cfg, heap, term, grade.as_deref())?,
        Command::TranslateLnl { file } => cmd_translate_lnl(&cfg, file)?,
        Command::Oracle { file, grade, max_size, count, seed, max_depth } => {
            let opts = OracleOptions { max_size: *max_size, count: *count, seed: *seed, max_depth: *max_depth };
            cmd_oracle(&cfg, file.as_deref(), grade.as_deref(), &opts)?
        }
        Command::Algebra { action: AlgebraCommand::Verify { selector, sample_bound, all_witnesses } } => {
            cmd_algebra_verify(&cfg, selector.as_deref(), *sample_bound, *all_witnesses)?
        }
    };
    out.write_all(report.text().as_bytes())?;
    Ok(status)
}

/// Entry point for the binary: 0 on success, 1 on rejection, 2 on misuse.
pub fn main_with(args: impl IntoIterator<Item = String>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(Status::Accepted) => ExitCode::SUCCESS,
        Ok(Status::Rejected) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn cmd_check(
    cfg: &SessionConfig,
    file: &Path,
    grade: Option<&str>,
    expected: Option<&str>,
    pts: Option<&str>,
) -> Result<(Report, Status)> {
    let alg = &cfg.algebra;
    let text = read(file)?;
    let j = parse_judgment(&text, alg).with_context(|| file.display().to_string())?;
    let q = cfg.grade(grade)?;
    let ty = match expected {
        Some(t) => Some(parse_type(t, alg).context("--expected")?),
        None => j.ty.clone(),
    };
    let spec = pts.map(PtsSpec::from_selector).transpose()?;
    let settings = json!({
        "algebra": alg.name(),
        "grade": q.to_string(),
        "pts": spec.as_ref().map_or("none".to_string(), |s| s.name.clone()),
        "fuel": cfg.fuel,
        "file": file.display().to_string(),
    });
    let mut report = Report::new(cfg.format, "check", settings);
    let result = match &spec {
        Some(s) => check::check_pts(s, alg, &j.ctx, &j.term, &q, ty.as_ref(), cfg.fuel),
        None => check::check(alg, &j.ctx, &j.term, &q, ty.as_ref()),
    };
    let judgment = if j.ctx.is_empty() {
        format!("|- {} :^{}", j.term, q)
    } else {
        format!("{} |- {} :^{}", syntax::print_context(&j.ctx), j.term, q)
    };
    let status = match result {
        Ok(t) => {
            report.emit(
                format!("accepted: {judgment} {}", syntax::print_type(&t)),
                json!({"result": "accepted", "grade": q.to_string(), "type": syntax::print_type(&t)}),
            );
            Status::Accepted
        }
        Err(e) => {
            report.emit(
                format!("rejected: {judgment}\n  {e}"),
                json!({"result": "rejected", "grade": q.to_string(), "error": e.to_string()}),
            );
            Status::Rejected
        }
    };
    Ok((report, status))
}

pub fn cmd_eval(cfg: &SessionConfig, file: &Path) -> Result<(Report, Status)> {
    let text = read(file)?;
    let j = parse_judgment(&text, &cfg.algebra).with_context(|| file.display().to_string())?;
    let settings = json!({"algebra": cfg.algebra.name(), "fuel": cfg.fuel, "file": file.display().to_string()});
    let mut report = Report::new(cfg.format, "eval", settings);
    let (terms, end) = eval::trace(&j.term, cfg.fuel);
    if cfg.trace {
        for (i, t) in terms.iter().enumerate() {
            report.emit(format!("{i:>4}  {t}"), json!({"step": i, "term": t.to_string()}));
        }
    }
    let last = terms.last().cloned().unwrap_or_else(|| j.term.clone());
    let steps = terms.len().saturating_sub(1);
    let (outcome, detail, status) = match end {
        StepOutcome::Value => ("value", last.to_string(), Status::Accepted),
        StepOutcome::Stuck(why) => ("stuck", format!("{last}: {why}"), Status::Rejected),
        StepOutcome::Stepped(_) => ("fuel-exhausted", last.to_string(), Status::Rejected),
    };
    report.emit(
        format!("{outcome} after {steps} steps: {detail}"),
        json!({"result": outcome, "steps": steps, "term": last.to_string(), "detail": detail}),
    );
    Ok((report, status))
}

pub fn cmd_heap(cfg: &SessionConfig, heap_file: &Path, term_file: &Path, grade: Option<&str>) -> Result<(Report, Status)> {
    let alg = &cfg.algebra;
    let h = Heap::parse(&read(heap_file)?, alg).with_context(|| heap_file.display().to_string())?;
    let j = parse_judgment(&read(term_file)?, alg).with_context(|| term_file.display().to_string())?;
    let q = cfg.grade(grade)?;
    let settings = json!({
        "algebra": alg.name(),
        "grade": q.to_string(),
        "fuel": cfg.fuel,
        "heap": heap_file.display().to_string(),
        "term": term_file.display().to_string(),
    });
    let mut report = Report::new(cfg.format, "heap", settings);
    let run = heap::run(alg, &h, &j.term, &q, cfg.fuel)?;
    if cfg.trace {
        for (i, e) in run.trace.iter().enumerate() {
            report.emit(
                format!("{i:>4}  [{}] {}  ==>  {}", e.rule, e.term_before, e.term_after),
                json!({
                    "step": i,
                    "rule": e.rule,
                    "term": e.term_after.to_string(),
                    "heap": bindings_json(&e.heap_after),
                }),
            );
        }
    }
    let (outcome, status, detail) = match &run.end {
        RunEnd::Value => ("value", Status::Accepted, String::new()),
        RunEnd::Stuck(s) => ("stuck", Status::Rejected, s.to_string()),
        RunEnd::FuelExhausted => ("fuel-exhausted", Status::Rejected, String::new()),
    };
    let mut human = format!("{outcome} after {} steps: {}", run.trace.len(), run.term);
    if !detail.is_empty() {
        human.push_str(&format!("\n  {detail}"));
    }
    human.push_str("\nfinal heap:");
    for b in run.heap.bindings() {
        human.push_str(&format!("\n  {} ^{} = {}", b.name, b.grade, b.term));
    }
    report.emit(
        human,
        json!({
            "result": outcome,
            "steps": run.trace.len(),
            "term": run.term.to_string(),
            "detail": detail,
            "heap": bindings_json(&run.heap),
        }),
    );
    Ok((report, status))
}

fn bindings_json(h: &Heap) -> Value {
    Value::Array(
        h.bindings()
            .iter()
            .map(|b| json!({"name": b.name, "grade": b.grade.to_string(), "term": b.term.to_string()}))
            .collect(),
    )
}

pub fn cmd_translate_lnl(cfg: &SessionConfig, file: &Path) -> Result<(Report, Status)> {
    let text = read(file)?;
    let settings = json!({"algebra": "lin3", "file": file.display().to_string()});
    let mut report = Report::new(cfg.format, "translate-lnl", settings);
    let mut status = Status::Accepted;
    for (n, line) in text.lines().enumerate() {
        let src = line.trim();
        if src.is_empty() || src.starts_with('#') {
            continue;
        }
        let lineno = n + 1;
        let at = || format!("{}:{lineno}", file.display());
        if let Some((lhs, rhs)) = src.split_once("==") {
            let e = lnl::parse_lnl_term(lhs.trim()).with_context(at)?;
            let f = lnl::parse_lnl_term(rhs.trim()).with_context(at)?;
            let (te, tf) = (lnl::translate_term(&e), lnl::translate_term(&f));
            let equal = lnl::beta_preserved(&e, &f, cfg.fuel).with_context(at)?;
            if !equal {
                status = Status::Rejected;
            }
            let verdict = if equal { "beta-equal" } else { "not beta-equal" };
            report.emit(
                format!("{lineno}: {te} == {tf}  [{verdict}]"),
                json!({"line": lineno, "lhs": te.to_string(), "rhs": tf.to_string(), "beta_equal": equal}),
            );
        } else if src.contains("|-") || src.contains('⊢') {
            let j = lnl::parse_lnl_judgment(src).with_context(at)?;
            let v = lnl::validate(&j);
            if !v.accepted() {
                status = Status::Rejected;
            }
            report.emit(
                format!("{lineno}: {v}"),
                json!({
                    "line": lineno,
                    "term": v.term.to_string(),
                    "type": syntax::print_type(&v.ty),
                    "grade": v.grade.to_string(),
                    "result": if v.accepted() { "accepted" } else { "rejected" },
                    "error": v.result.as_ref().err().map(|e| e.to_string()),
                }),
            );
        } else {
            let t = lnl::parse_lnl_term(src).with_context(at)?;
            let out = lnl::translate_term(&t);
            report.emit(format!("{lineno}: {out}"), json!({"line": lineno, "term": out.to_string()}));
        }
    }
    Ok((report, status))
}

pub struct OracleOptions {
    pub max_size: usize,
    pub count: Option<usize>,
    pub seed: u64,
    pub max_depth: usize,
}

pub fn cmd_oracle(
    cfg: &SessionConfig,
    file: Option<&Path>,
    grade: Option<&str>,
    opts: &OracleOptions,
) -> Result<(Report, Status)> {
    let alg = &cfg.algebra;
    let mut budget = SearchBudget::for_algebra(alg);
    budget.max_depth = opts.max_depth;
    let grades: Vec<String> = budget.grades.iter().map(Grade::to_string).collect();
    if let Some(file) = file {
        let j = parse_judgment(&read(file)?, alg).with_context(|| file.display().to_string())?;
        let q = cfg.grade(grade)?;
        let Some(ty) = j.ty.clone() else { bail!("{}: the oracle needs a type after `:`", file.display()) };
        let settings = json!({"algebra": alg.name(), "grade": q.to_string(), "grades": grades, "file": file.display().to_string()});
        let mut report = Report::new(cfg.format, "oracle", settings);
        let v = oracle::derivable(alg, &j.ctx, &j.term, &q, &ty, &budget)?;
        report.emit(v.to_string(), json!({"result": v.to_string()}));
        let status = if v == Verdict::Derivable { Status::Accepted } else { Status::Rejected };
        return Ok((report, status));
    }
    let generator = match opts.count {
        Some(count) => Generator::Sampled { seed: opts.seed, count, max_size: opts.max_size },
        None => Generator::Exhaustive { max_size: opts.max_size },
    };
    let settings = json!({
        "algebra": alg.name(),
        "max_size": opts.max_size,
        "grades": grades,
        "generator": if opts.count.is_some() { format!("sampled(seed={})", opts.seed) } else { "exhaustive".into() },
    });
    let mut report = Report::new(cfg.format, "oracle", settings);
    let r = oracle::audit(alg, &budget, &AuditSpace::standard(alg), &generator)?;
    let unsound = r.soundness().count();
    report.emit(
        r.to_string().trim_end().to_string(),
        json!({
            "terms": r.terms,
            "judgments": r.judgments,
            "soundness": unsound,
            "incompleteness": r.incompleteness().count(),
            "exhausted": r.exhausted,
            "divergences": r.divergences.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        }),
    );
    Ok((report, if unsound == 0 { Status::Accepted } else { Status::Rejected }))
}

pub fn cmd_algebra_verify(
    cfg: &SessionConfig,
    selector: Option<&str>,
    sample_bound: u64,
    all_witnesses: bool,
) -> Result<(Report, Status)> {
    let alg = match selector {
        Some(s) => Algebra::from_selector(s)?,
        None => cfg.algebra.clone(),
    };
    let r = verify_axioms(&alg, sample_bound);
    let settings = json!({"algebra": alg.name(), "sample_bound": sample_bound, "exhaustive": r.exhaustive});
    let mut report = Report::new(cfg.format, "algebra verify", settings);
    for law in &r.laws {
        let verdict = match (law.holds(), law.claimed) {
            (true, _) => "holds",
            (false, true) => "FAILS",
            (false, false) => "fails (not claimed)",
        };
        let shown = if all_witnesses { law.witnesses.len() } else { law.witnesses.len().min(1) };
        let mut human = format!("{:<28} {verdict}", law.law);
        match shown {
            0 => {}
            1 => human.push_str(&format!("  witness {}", law.witnesses[0])),
            _ => {
                for w in &law.witnesses {
                    human.push_str(&format!("\n    witness {w}"));
                }
            }
        }
        let witnesses: Vec<String> = law.witnesses[..shown].iter().map(|w| w.to_string()).collect();
        report.emit(
            human,
            json!({
                "law": law.law,
                "claimed": law.claimed,
                "holds": law.holds(),
                "witnesses": witnesses,
            }),
        );
    }
    let status = if r.passed() { Status::Accepted } else { Status::Rejected };
    Ok((report, status))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ldc").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let c = cli(&["check", "f.ldc"]);
        assert_eq!(c.session.algebra, "nat-exact");
        assert_eq!(c.session.format, Format::Human);
        assert!(matches!(c.command, Command::Check { pts: None, .. }));
        let c = cli(&["check", "f.ldc", "--pts"]);
        assert!(matches!(c.command, Command::Check { pts: Some(ref p), .. } if p == "type-in-type"));
    }

    #[test]
    fn misuse_is_a_parse_error() {
        assert!(Cli::try_parse_from(["ldc", "frobnicate"]).is_err());
        assert!(Cli::try_parse_from(["ldc", "check"]).is_err());
    }

    #[test]
    fn header_lists_settings() {
        let r = Report::new(Format::Human, "check", json!({"algebra": "lin3", "grade": "1"}));
        assert_eq!(r.text(), "# ldc check algebra=lin3 grade=1\n");
        let r = Report::new(Format::Structured, "check", json!({"algebra": "lin3"}));
        assert_eq!(r.text(), "{\"header\":\"check\",\"settings\":{\"algebra\":\"lin3\"}}\n");
    }
}
