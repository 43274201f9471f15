//! The `hornlin` command line.
//!
//! Exit codes: 0 success (no counterexample, `sat`, all clauses valid),
//! 1 counterexample, invalid clause or `unsat`, 2 usage, input or solver
//! invocation error, 3 unknown, timeout or exhausted budget.
//!
//! Inputs are either a program and its specification (`prog.imp
//! prog.spec`; the specification defaults to `prog.spec` next to the
//! program) or a clause file (`.chc`, `.pl` in clause syntax, `.smt2` in
//! SMT-LIB). With `--json` one JSON object per input is written to stdout,
//! one per line. Otherwise the produced clauses go to stdout (or `--out`)
//! and the stage report to stderr; `check` and `verify` print their report
//! on stdout.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::chc::{parse_clauses, ClauseSet};
use crate::encode::Problem;
use crate::pipeline::{after_ri, linearize_set, StageSummary};
use crate::solve::{
    bounded_counterexample, confirm_violation, emit_smtlib, parse_smtlib, parse_solution, run_external, solver_command,
    verify_solution, ExternalVerdict, OracleResult, Verdict, DEFAULT_BUDGET, DEFAULT_DEPTH,
};
use crate::transform::{remove_interpreter, TransformError, TransformTrace};

#[derive(Debug, Parser)]
#[command(name = "hornlin", version, about = "Constrained Horn clause encoding, interpreter removal and linearization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a program and its specification as clauses.
    Encode(StageArgs),
    /// Encode, then remove the interpreter.
    Ri(StageArgs),
    /// Linearize a clause set (programs go through `ri` first).
    Lin(StageArgs),
    /// Encode, remove the interpreter, linearize and write SMT-LIB.
    Pipeline(PipelineArgs),
    /// Search for a counterexample up to a depth bound.
    Check(CheckArgs),
    /// Check a symbolic interpretation against a clause set.
    Verify(VerifyArgs),
    /// Write a clause set in SMT-LIB, optionally running a solver on it.
    Emit(EmitArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Input files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Write the result here instead of stdout (single input only).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Number of inputs processed in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[command(flatten)]
    pub common: Common,
    /// Write the transformation trace here (single input only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Solver command; the script path is appended. HL_SOLVER overrides it.
    #[arg(long)]
    pub solver: Option<String>,
    /// Solver timeout in seconds.
    #[arg(long, default_value_t = 120.0)]
    pub timeout: f64,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub common: Common,
    /// Write the transformation traces of both stages here (single input only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also write `<stem>.encode.chc`, `<stem>.ri.chc` and `<stem>.lin.chc`
    /// into this directory.
    #[arg(long)]
    pub stages: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    /// Maximum number of clause resolutions.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Clause set (or program and specification).
    #[arg(required = true, num_args = 1..=2)]
    pub clauses: Vec<PathBuf>,
    /// Solution file with `sigma p(X..) :- c.` lines.
    #[arg(long)]
    pub solution: PathBuf,
    /// Print a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Input {
    Program { program: PathBuf, spec: PathBuf },
    Clauses(PathBuf),
}

impl Input {
    fn name(&self) -> String {
        match self {
            Input::Program { program, .. } => program.display().to_string(),
            Input::Clauses(p) => p.display().to_string(),
        }
    }

    fn stem(&self) -> String {
        let p = match self {
            Input::Program { program, .. } => program,
            Input::Clauses(p) => p,
        };
        p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
    }
}

fn ext(p: &Path) -> &str {
    p.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn resolve_inputs(paths: &[PathBuf]) -> anyhow::Result<Vec<Input>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < paths.len() {
        let p = &paths[i];
        match ext(p) {
            "imp" => {
                if let Some(s) = paths.get(i + 1).filter(|s| ext(s) == "spec") {
                    out.push(Input::Program { program: p.clone(), spec: s.clone() });
                    i += 2;
                    continue;
                }
                out.push(Input::Program { program: p.clone(), spec: p.with_extension("spec") });
            }
            "chc" | "pl" | "smt2" => out.push(Input::Clauses(p.clone())),
            "spec" => return Err(usage(format!("{}: a specification must follow its program", p.display()))),
            _ => return Err(usage(format!("{}: unknown input type (expected .imp, .chc, .pl or .smt2)", p.display()))),
        }
        i += 1;
    }
    Ok(out)
}

fn read(p: &Path) -> anyhow::Result<String> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn load_problem(program: &Path, spec: &Path) -> anyhow::Result<Problem> {
    let (ptext, stext) = (read(program)?, read(spec)?);
    Problem::load(&ptext, &stext).map_err(|e| usage(format!("{}: {e}", program.display())))
}

fn load_clauses(p: &Path) -> anyhow::Result<ClauseSet> {
    let text = read(p)?;
    let r = if ext(p) == "smt2" { parse_smtlib(&text) } else { parse_clauses(&text) };
    r.map_err(|e| usage(format!("{}:{e}", p.display())))
}

/// Result of one command on one input.
#[derive(Debug, Default)]
struct Outcome {
    code: u8,
    /// The main artifact (clauses, SMT-LIB).
    artifact: String,
    /// Human-readable report.
    report: String,
    json: Value,
    trace: Option<String>,
    /// Extra files to write.
    files: Vec<(PathBuf, String)>,
}

fn summaries_json(s: &[StageSummary]) -> Value {
    serde_json::to_value(s).expect("plain data")
}

fn report_lines(s: &[StageSummary]) -> String {
    s.iter().map(|s| format!("{s}\n")).collect()
}

fn solver_outcome(script: &str, args: &SolverArgs) -> Option<(ExternalVerdict, u8)> {
    let cmd = solver_command(args.solver.as_deref())?;
    let timeout = Duration::from_secs_f64(args.timeout.max(0.0));
    let v = run_external(script, &cmd, timeout);
    let code = match v {
        ExternalVerdict::Sat => 0,
        ExternalVerdict::Unsat => 1,
        ExternalVerdict::Unknown | ExternalVerdict::Timeout => 3,
        ExternalVerdict::SolverError(_) => 2,
    };
    Some((v, code))
}

fn run_encode(input: &Input) -> anyhow::Result<Outcome> {
    let Input::Program { program, spec } = input else {
        return Err(usage(format!("{}: `encode` needs a program", input.name())));
    };
    let pr = load_problem(program, spec)?;
    let s = vec![StageSummary::of("encode", &pr.pc, 0, 0)];
    Ok(Outcome {
        artifact: pr.pc.to_string(),
        report: report_lines(&s),
        json: json!({ "input": input.name(), "stages": summaries_json(&s) }),
        ..Outcome::default()
    })
}

fn run_ri(input: &Input) -> anyhow::Result<Outcome> {
    let Input::Program { program, spec } = input else {
        return Err(usage(format!("{}: `ri` needs a program", input.name())));
    };
    let pr = load_problem(program, spec)?;
    let ri = remove_interpreter(&pr.opsem)?;
    let set = after_ri(&pr, &ri);
    let s =
        vec![StageSummary::of("encode", &pr.pc, 0, 0), StageSummary::of("ri", &set, ri.defs.len(), ri.defs.max_body())];
    Ok(Outcome {
        artifact: set.to_string(),
        report: report_lines(&s),
        json: json!({ "input": input.name(), "stages": summaries_json(&s) }),
        trace: Some(ri.trace.to_string()),
        ..Outcome::default()
    })
}

fn lin_input(input: &Input) -> anyhow::Result<(ClauseSet, Vec<StageSummary>, Option<TransformTrace>)> {
    match input {
        Input::Program { program, spec } => {
            let pr = load_problem(program, spec)?;
            let ri = remove_interpreter(&pr.opsem)?;
            let set = after_ri(&pr, &ri);
            let s = vec![
                StageSummary::of("encode", &pr.pc, 0, 0),
                StageSummary::of("ri", &set, ri.defs.len(), ri.defs.max_body()),
            ];
            Ok((set, s, Some(ri.trace)))
        }
        Input::Clauses(p) => {
            let set = load_clauses(p)?;
            let s = vec![StageSummary::of("input", &set, 0, 0)];
            Ok((set, s, None))
        }
    }
}

fn run_lin(input: &Input) -> anyhow::Result<Outcome> {
    let (set, mut s, _) = lin_input(input)?;
    if let Some(c) = set.definite().find(|c| !c.is_linear()) {
        return Err(usage(format!("{}: definite clause is not linear: {c}", input.name())));
    }
    let lin = linearize_set(&set)?;
    s.push(StageSummary::of("lin", &lin.clauses, lin.defs.len(), lin.defs.max_body()));
    Ok(Outcome {
        artifact: lin.clauses.to_string(),
        report: report_lines(&s),
        json: json!({ "input": input.name(), "stages": summaries_json(&s) }),
        trace: Some(lin.trace.to_string()),
        ..Outcome::default()
    })
}

fn run_pipeline_cmd(input: &Input, args: &PipelineArgs) -> anyhow::Result<Outcome> {
    let Input::Program { program, spec } = input else {
        return Err(usage(format!("{}: `pipeline` needs a program", input.name())));
    };
    let pr = load_problem(program, spec)?;
    let ri = remove_interpreter(&pr.opsem)?;
    let set = after_ri(&pr, &ri);
    let lin = linearize_set(&set)?;
    let s = vec![
        StageSummary::of("encode", &pr.pc, 0, 0),
        StageSummary::of("ri", &set, ri.defs.len(), ri.defs.max_body()),
        StageSummary::of("lin", &lin.clauses, lin.defs.len(), lin.defs.max_body()),
    ];
    let script = emit_smtlib(&lin.clauses);
    let mut out = Outcome {
        report: report_lines(&s),
        trace: Some(format!("# remove_interpreter\n{}# linearize\n{}", ri.trace, lin.trace)),
        ..Outcome::default()
    };
    if let Some(dir) = &args.stages {
        let stem = input.stem();
        out.files.push((dir.join(format!("{stem}.encode.chc")), pr.pc.to_string()));
        out.files.push((dir.join(format!("{stem}.ri.chc")), set.to_string()));
        out.files.push((dir.join(format!("{stem}.lin.chc")), lin.clauses.to_string()));
    }
    let solver = solver_outcome(&script, &args.solver);
    if let Some((v, code)) = &solver {
        out.report.push_str(&format!("solver: {v}\n"));
        out.code = *code;
    }
    out.json = json!({
        "input": input.name(),
        "stages": summaries_json(&s),
        "solver": solver.map(|(v, _)| v.to_string()),
    });
    out.artifact = script;
    Ok(out)
}

fn run_check(input: &Input, args: &CheckArgs) -> anyhow::Result<Outcome> {
    let (set, problem) = match input {
        Input::Program { program, spec } => {
            let pr = load_problem(program, spec)?;
            (pr.pc.clone(), Some(pr))
        }
        Input::Clauses(p) => (load_clauses(p)?, None),
    };
    let r = bounded_counterexample(&set, args.depth, args.budget);
    let mut report = format!("{r}");
    if !report.ends_with('\n') {
        report.push('\n');
    }
    let (verdict, code) = match &r {
        OracleResult::NoCexUpTo(_) => ("no-counterexample", 0),
        OracleResult::Cex(_) => ("counterexample", 1),
        OracleResult::BudgetExhausted => ("budget-exhausted", 3),
        OracleResult::Unknown => ("unknown", 3),
    };
    let mut violation = None;
    if let (Some(cex), Some(pr)) = (r.cex(), &problem) {
        if let Some(v) = confirm_violation(pr, cex, args.depth.max(DEFAULT_DEPTH)) {
            report.push_str(&format!("violation: {v}\n"));
            violation = Some(v.to_string());
        }
    }
    let json = json!({
        "input": input.name(),
        "verdict": verdict,
        "depth": args.depth,
        "goal": r.cex().map(|c| c.goal + 1),
        "witness": r.cex().map(|c| {
            c.witness.iter().map(|(k, v)| (k.to_string(), Value::String(v.to_string()))).collect::<serde_json::Map<_, _>>()
        }),
        "violation": violation,
    });
    Ok(Outcome { code, report, json, ..Outcome::default() })
}

fn run_emit(input: &Input, args: &EmitArgs) -> anyhow::Result<Outcome> {
    let set = match input {
        Input::Program { program, spec } => load_problem(program, spec)?.pc,
        Input::Clauses(p) => load_clauses(p)?,
    };
    let script = emit_smtlib(&set);
    let mut out = Outcome::default();
    let solver = solver_outcome(&script, &args.solver);
    if let Some((v, code)) = &solver {
        out.report = format!("solver: {v}\n");
        out.code = *code;
    }
    out.json = json!({
        "input": input.name(),
        "clauses": set.len(),
        "solver": solver.map(|(v, _)| v.to_string()),
    });
    out.artifact = script;
    Ok(out)
}

fn run_verify(args: &VerifyArgs) -> anyhow::Result<Outcome> {
    let inputs = resolve_inputs(&args.clauses)?;
    let [input] = inputs.as_slice() else {
        return Err(usage("`verify` takes one clause set"));
    };
    let set = match input {
        Input::Program { program, spec } => {
            let pr = load_problem(program, spec)?;
            let ri = remove_interpreter(&pr.opsem)?;
            after_ri(&pr, &ri)
        }
        Input::Clauses(p) => load_clauses(p)?,
    };
    let sigma =
        parse_solution(&read(&args.solution)?).map_err(|e| usage(format!("{}:{e}", args.solution.display())))?;
    let r = verify_solution(&set, &sigma).map_err(|e| usage(e.to_string()))?;
    let mut report = String::new();
    for (i, (c, v)) in set.iter().zip(&r.verdicts).enumerate() {
        report.push_str(&format!("clause {}: {v}\n", i + 1));
        if matches!(v, Verdict::Invalid(_)) {
            report.push_str(&format!("  {c}\n"));
        }
    }
    let code = if r.first_invalid().is_some() {
        1
    } else if r.any_unknown() {
        3
    } else {
        0
    };
    let verdicts: Vec<String> = r
        .verdicts
        .iter()
        .map(|v| match v {
            Verdict::Valid => "valid",
            Verdict::Invalid(_) => "invalid",
            Verdict::Unknown => "unknown",
        })
        .map(str::to_string)
        .collect();
    let json = json!({
        "input": input.name(),
        "solution": args.solution.display().to_string(),
        "verdicts": verdicts,
        "all_valid": r.all_valid(),
    });
    Ok(Outcome { code, report, json, ..Outcome::default() })
}

/// Runs `f` on every input, `jobs` at a time, keeping input order.
fn run_all<F>(inputs: &[Input], jobs: usize, f: F) -> Vec<anyhow::Result<Outcome>>
where
    F: Fn(&Input) -> anyhow::Result<Outcome> + Sync,
{
    let jobs = jobs.clamp(1, inputs.len().max(1));
    if jobs == 1 {
        return inputs.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<anyhow::Result<Outcome>>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= inputs.len() {
                    break;
                }
                let r = f(&inputs[i]);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });
    results.into_iter().map(|m| m.into_inner().unwrap().expect("every input processed")).collect()
}

fn write_file(p: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))
}

/// Prints outcomes in input order and combines their exit codes: an input
/// error wins over a counterexample, which wins over an undecided result.
fn finish(
    inputs: &[Input],
    results: Vec<anyhow::Result<Outcome>>,
    common: &Common,
    trace: Option<&Path>,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> u8 {
    let many = inputs.len() > 1;
    let mut codes = Vec::new();
    for (input, r) in inputs.iter().zip(results) {
        let o = match r {
            Ok(o) => o,
            Err(e) => {
                let _ = writeln!(err, "error: {e:#}");
                codes.push(error_code(&e));
                continue;
            }
        };
        let mut code = o.code;
        let mut fail = |msg: String, code: &mut u8| {
            let _ = writeln!(err, "error: {msg}");
            *code = 2;
        };
        for (p, text) in &o.files {
            if let Err(e) = write_file(p, text) {
                fail(e, &mut code);
            }
        }
        if let (Some(p), Some(t)) = (trace, &o.trace) {
            if let Err(e) = write_file(p, t) {
                fail(e, &mut code);
            }
        }
        let artifact_to_stdout = common.out.is_none() && !common.json && !o.artifact.is_empty();
        if let Some(p) = &common.out {
            if !o.artifact.is_empty() {
                if let Err(e) = write_file(p, &o.artifact) {
                    fail(e, &mut code);
                }
            }
        }
        if common.json {
            let _ = writeln!(out, "{}", o.json);
        } else {
            if many {
                let _ = writeln!(out, "== {}", input.name());
            }
            if artifact_to_stdout {
                let _ = write!(out, "{}", o.artifact);
                let _ = write!(err, "{}", o.report);
            } else {
                let _ = write!(out, "{}", o.report);
            }
        }
        codes.push(code);
    }
    combine(&codes)
}

fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<TransformError>() {
        Some(TransformError::Budget(_)) => 3,
        _ => 2,
    }
}

fn combine(codes: &[u8]) -> u8 {
    [2, 1, 3].into_iter().find(|c| codes.contains(c)).unwrap_or(0)
}

fn run_stage<F>(
    common: &Common,
    trace: Option<&Path>,
    f: F,
    out: &mut dyn std::io::Write,
    err: &mut dyn std::io::Write,
) -> u8
where
    F: Fn(&Input) -> anyhow::Result<Outcome> + Sync,
{
    let inputs = match resolve_inputs(&common.inputs) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    if inputs.len() > 1 && (common.out.is_some() || trace.is_some()) {
        let _ = writeln!(err, "error: --out and --trace take a single input");
        return 2;
    }
    let results = run_all(&inputs, common.jobs, f);
    finish(&inputs, results, common, trace, out, err)
}

/// Runs a parsed command, writing to the given streams.
pub fn execute(cli: &Cli, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> u8 {
    match &cli.command {
        Command::Encode(a) => run_stage(&a.common, a.trace.as_deref(), run_encode, out, err),
        Command::Ri(a) => run_stage(&a.common, a.trace.as_deref(), run_ri, out, err),
        Command::Lin(a) => run_stage(&a.common, a.trace.as_deref(), run_lin, out, err),
        Command::Pipeline(a) => run_stage(&a.common, a.trace.as_deref(), |i| run_pipeline_cmd(i, a), out, err),
        Command::Check(a) => run_stage(&a.common, None, |i| run_check(i, a), out, err),
        Command::Emit(a) => run_stage(&a.common, None, |i| run_emit(i, a), out, err),
        Command::Verify(a) => match run_verify(a) {
            Ok(o) => {
                if a.json {
                    let _ = writeln!(out, "{}", o.json);
                } else {
                    let _ = write!(out, "{}", o.report);
                }
                o.code
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e:#}");
                2
            }
        },
    }
}

/// Parses `argv` and runs it against stdout and stderr.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = execute(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_pair_programs_with_specs() {
        let p = |s: &str| PathBuf::from(s);
        let r = resolve_inputs(&[p("a.imp"), p("b.spec"), p("c.chc"), p("d.imp")]).unwrap();
        assert_eq!(
            r,
            vec![
                Input::Program { program: p("a.imp"), spec: p("b.spec") },
                Input::Clauses(p("c.chc")),
                Input::Program { program: p("d.imp"), spec: p("d.spec") },
            ]
        );
        assert!(resolve_inputs(&[p("x.txt")]).is_err());
        assert!(resolve_inputs(&[p("x.spec")]).is_err());
    }

    #[test]
    fn exit_code_precedence() {
        assert_eq!(combine(&[0, 3, 1]), 1);
        assert_eq!(combine(&[0, 3]), 3);
        assert_eq!(combine(&[1, 2]), 2);
        assert_eq!(combine(&[]), 0);
    }
}
