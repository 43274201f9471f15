//! Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use hornlin::chc::{canonicalize, clause_sets_equivalent, parse_clause, parse_clauses, Clause, ClauseSet};
use hornlin::corpus::{corpus, find, mutate_base_case};
use hornlin::encode::{build_pcorr, Problem};
use hornlin::pipeline::run_pipeline;
use hornlin::solve::{
    bounded_counterexample, confirm_violation, emit_smtlib, parse_solution, run_external, solver_command,
    transport_solution, verify_solution, ExternalVerdict, OracleResult, SymbolicInterp, DEFAULT_BUDGET,
};
use hornlin::spec::{check_functionality, parse_spec, SampleStatus};
use hornlin::transform::{linearize, remove_interpreter};
use num_bigint::BigInt;

const FIB: &str = "0: while (n>0) { t=u; u=u+v; v=t; n=n-1 }\nh: halt\n";
const FIB_SPEC: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}
fib(0,1).
fib(1,1).
fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).
";

const G: &str = "
false :- F>1, r_fibonacci(0,F).
false :- F<1, r_fibonacci(0,F).
false :- F>1, r_fibonacci(1,F).
false :- F<1, r_fibonacci(1,F).
false :- N1>=0, N2=N1+1, N3=N2+1, F3>F1+F2, r_fibonacci(N1,F1), r_fibonacci(N2,F2), r_fibonacci(N3,F3).
false :- N1>=0, N2=N1+1, N3=N2+1, F3<F1+F2, r_fibonacci(N1,F1), r_fibonacci(N2,F2), r_fibonacci(N3,F3).
";

// The loop predicate is `r1` here.
const E: &str = "
r_fibonacci(N,F) :- N>=0, U=1, V=0, T=0, r1(N,U,V,T,N1,F,V1,T1).
r1(N,U,V,T,N,U,V,T) :- N=<0.
r1(N,U,V,T,N2,U2,V2,T2) :- N>=1, N1=N-1, U1=U+V, V1=U, T1=U, r1(N1,U1,V1,T1,N2,U2,V2,T2).
";

const G5: &str = "false :- N1>=0, N2=N1+1, N3=N2+1, F3>F1+F2,
    r_fibonacci(N1,F1), r_fibonacci(N2,F2), r_fibonacci(N3,F3).";

// The golden goal calls new1 with the three (N,F) pairs in reverse order;
// new1's body is symmetric in them, so it is written here in head order.
const C3: &str = "false :- N1>=0, N2=N1+1, N3=N2+1, F3>F1+F2, U=1, V=0, new1(N1,U,V,F1,N2,F2,N3,F3).";

// The fourth new1 clause is printed without `W=U+V`; it is restored here.
const LINEARIZED: &str = "
new1(N1,U,V,U,N2,U,N3,U) :- N1=<0, N2=<0, N3=<0.
new1(N1,U,V,U,N2,U,N3,F3) :- N1=<0, N2=<0, N4=N3-1, W=U+V, N3>=1, new2(N4,W,U,F3).
new1(N1,U,V,U,N2,F2,N3,U) :- N1=<0, N4=N2-1, W=U+V, N2>=1, N3=<0, new2(N4,W,U,F2).
new1(N1,U,V,U,N2,F2,N3,F3) :- N1=<0, N4=N2-1, N2>=1, N5=N3-1, W=U+V, N3>=1, new3(N4,W,U,F2,N5,F3).
new1(N1,U,V,F1,N2,U,N3,U) :- N4=N1-1, W=U+V, N1>=1, N2=<0, N3=<0, new2(N4,W,U,F1).
new1(N1,U,V,F1,N2,U,N3,F3) :- N4=N1-1, N1>=1, N2=<0, N5=N3-1, W=U+V, N3>=1, new3(N4,W,U,F1,N5,F3).
new1(N1,U,V,F1,N2,F2,N3,U) :- N4=N1-1, N1>=1, N5=N2-1, W=U+V, N2>=1, N3=<0, new3(N4,W,U,F1,N5,F2).
new1(N1,U,V,F1,N2,F2,N3,F3) :- N4=N1-1, N1>=1, N5=N2-1, N2>=1, N6=N3-1, W=U+V, N3>=1, new1(N4,W,U,F1,N5,F2,N6,F3).
new2(N,U,V,U) :- N=<0.
new2(N,U,V,F) :- N2=N-1, W=U+V, N>=1, new2(N2,W,U,F).
new3(N1,U,V,U,N2,U) :- N1=<0, N2=<0.
new3(N1,U,V,U,N2,F2) :- N1=<0, N3=N2-1, W=U+V, N2>=1, new2(N3,W,U,F2).
new3(N1,U,V,F1,N2,F2) :- N3=N1-1, N1>=1, N4=N2-1, W=U+V, N2>=1, new3(N3,W,U,F1,N4,F2).
new3(N1,U,V,F1,N2,U) :- N3=N1-1, W=U+V, N1>=1, N2=<0, new2(N3,W,U,F1).
";

const DOUBLING: &str = "
p(X,Y) :- X=0, Y=0.
p(X1,Y1) :- X1=X+1, Y1=Y+2, p(X,Y).
false :- Y>2*X, p(X,Y).
";

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Report {
    status: Status,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Report {
    Report { status: Status::Pass, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Report {
    Report { status: Status::Fail, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Report) -> (Report, Duration) {
    let t = Instant::now();
    let mut r = f();
    let d = t.elapsed();
    if let (Some(l), Status::Pass) = (limit, &r.status) {
        if d > l {
            r = fail(format!("{} but took {:.2?} (limit {:.0?})", r.detail, d, l));
        }
    }
    (r, d)
}

fn clauses(text: &str) -> Vec<Clause> {
    parse_clauses(text).unwrap().into_clauses()
}

fn goal_generation() -> Report {
    let t = parse_spec(FIB_SPEC).unwrap();
    let goals = build_pcorr(&t).unwrap();
    let mut got: Vec<String> = goals.iter().map(|c| canonicalize(c).to_string()).collect();
    let mut want: Vec<String> = clauses(G).iter().map(|c| canonicalize(c).to_string()).collect();
    got.sort();
    want.sort();
    if goals.len() == 6 && got == want {
        pass("6 goals equal after canonical renaming")
    } else {
        fail(format!("got {} goals:\n{}", goals.len(), goals))
    }
}

fn ri_golden() -> Report {
    let pr = Problem::load(FIB, FIB_SPEC).unwrap();
    let ri = match remove_interpreter(&pr.opsem) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let arity = ri.clauses.arity("r1");
    match clause_sets_equivalent(ri.clauses.clauses(), &clauses(E)) {
        Ok(()) if ri.clauses.len() == 3 && arity == Some(8) => {
            pass("3 clauses equivalent to E1-E3, loop predicate r1/8")
        }
        Ok(()) => fail(format!("{} clauses, r1 arity {arity:?}", ri.clauses.len())),
        Err(m) => fail(format!("mismatch:\n{m}")),
    }
}

fn lin_golden() -> Report {
    let e = clauses(E);
    let g = parse_clause(G5).unwrap();
    let out = match linearize(&e, &[g]) {
        Ok(o) => o,
        Err(err) => return fail(err.to_string()),
    };
    let arities: Vec<(String, usize)> =
        out.defs.entries().iter().map(|d| (d.pred.clone(), d.clause.head.as_ref().unwrap().arity())).collect();
    let want_arities = vec![("new1".to_string(), 8), ("new2".to_string(), 4), ("new3".to_string(), 6)];
    if arities != want_arities {
        return fail(format!("definitions {arities:?}"));
    }
    let mut want = e.clone();
    want.push(parse_clause(C3).unwrap());
    want.extend(clauses(LINEARIZED));
    match clause_sets_equivalent(out.clauses.clauses(), &want) {
        Ok(()) => pass(format!("E1-E3, C3 and 14 derived clauses; definitions {arities:?}")),
        Err(m) => fail(format!("mismatch:\n{m}")),
    }
}

fn linearity() -> Report {
    let mut n = 0;
    let mut clauses_out = 0;
    for item in corpus() {
        let st = match run_pipeline(item.program, item.spec) {
            Ok(s) => s,
            Err(e) => return fail(format!("{}: {e}", item.name)),
        };
        let m = st.after_ri.goals().map(|g| g.body.len()).max().unwrap_or(0);
        if let Some(c) = st.lin.clauses.iter().find(|c| c.body.len() > 1) {
            return fail(format!("{}: nonlinear output clause {c}", item.name));
        }
        if let Some(d) = st.lin.defs.entries().iter().find(|d| d.clause.body.len() > m) {
            return fail(format!("{}: definition {} wider than {m}", item.name, d.clause));
        }
        n += 1;
        clauses_out += st.lin.clauses.len();
    }
    pass(format!("{n} programs, {clauses_out} output clauses, all linear, definitions within goal width"))
}

fn verdict_kind(r: &OracleResult) -> &'static str {
    match r {
        OracleResult::NoCexUpTo(_) => "no-cex",
        OracleResult::Cex(_) => "cex",
        OracleResult::BudgetExhausted => "budget",
        OracleResult::Unknown => "unknown",
    }
}

fn equisatisfiability() -> Report {
    let mut checked = 0;
    let mut confirmed = 0;
    for item in corpus() {
        let mut variants = vec![(0, item.spec.to_string())];
        for d in [1, -1, 2] {
            match mutate_base_case(item.spec, d) {
                Ok(s) => variants.push((d, s)),
                Err(e) => return fail(format!("{}: cannot mutate: {e}", item.name)),
            }
        }
        for (delta, spec) in variants {
            let name = format!("{} ({delta:+})", item.name);
            let st = match run_pipeline(item.program, &spec) {
                Ok(s) => s,
                Err(e) => return fail(format!("{name}: {e}")),
            };
            let sets: [(&str, &ClauseSet); 3] =
                [("encode", &st.problem.pc), ("ri", &st.after_ri), ("lin", &st.lin.clauses)];
            let rs: Vec<OracleResult> =
                sets.iter().map(|(_, s)| bounded_counterexample(s, 8, DEFAULT_BUDGET)).collect();
            let kinds: Vec<&str> = rs.iter().map(verdict_kind).collect();
            if kinds.iter().any(|k| *k != "cex" && *k != "no-cex") || kinds.windows(2).any(|w| w[0] != w[1]) {
                return fail(format!("{name}: verdicts {kinds:?}"));
            }
            for ((stage, set), r) in sets.iter().zip(&rs) {
                if let Some(c) = r.cex() {
                    if let Err(e) = c.replay(set) {
                        return fail(format!("{name}: {stage} counterexample does not replay: {e}"));
                    }
                }
            }
            if delta != 0 {
                let Some(cex) = rs[0].cex() else {
                    return fail(format!("{name}: no counterexample for a mutated specification"));
                };
                if confirm_violation(&st.problem, cex, 12).is_none() {
                    return fail(format!("{name}: counterexample not confirmed by execution\n{cex}"));
                }
                confirmed += 1;
            } else if kinds[0] != "no-cex" {
                return fail(format!("{name}: counterexample for the original specification"));
            }
            checked += 1;
        }
    }
    pass(format!("{checked} variants agree across stages; {confirmed} mutations confirmed by execution"))
}

fn monotonicity() -> Report {
    let mut names = Vec::new();
    for name in ["doubling", "add", "subtract"] {
        let item = find(name).unwrap();
        let st = run_pipeline(item.program, item.spec).unwrap();
        let sigma = parse_solution(item.solution.unwrap()).unwrap();
        let r = verify_solution(&st.after_ri, &sigma).unwrap();
        if !r.all_valid() {
            return fail(format!("{name}: input solution not valid: {:?}", r.verdicts));
        }
        let t = match transport_solution(&sigma, &st.lin.defs) {
            Ok(t) => t,
            Err(e) => return fail(format!("{name}: {e}")),
        };
        let r = verify_solution(&st.lin.clauses, &t).unwrap();
        if !r.all_valid() {
            return fail(format!("{name}: transported solution fails: {:?}", r.first_invalid()));
        }
        names.push(name);
    }
    pass(format!("transported solutions valid after linearization for {}", names.join(", ")))
}

/// Checks that `w` makes clause `c`'s body true and its head false under
/// `sigma`.
fn witness_refutes(
    c: &Clause,
    sigma: &SymbolicInterp,
    w: &std::collections::BTreeMap<hornlin::lin::Var, BigInt>,
) -> bool {
    let mut full = w.clone();
    for v in c.vars() {
        full.entry(v).or_default();
    }
    let body = c.constraint.holds_int(&full) == Some(true)
        && c.body.iter().all(|a| sigma.instantiate(a).unwrap().holds_int(&full) == Some(true));
    let head = match &c.head {
        None => false,
        Some(h) => sigma.instantiate(h).unwrap().holds_int(&full) == Some(true),
    };
    body && !head
}

fn solution_verification() -> Report {
    let set = parse_clauses(DOUBLING).unwrap();
    let good = parse_solution("sigma p(X,Y) :- Y=2*X, X>=0.").unwrap();
    let r = verify_solution(&set, &good).unwrap();
    if !r.all_valid() {
        return fail(format!("valid solution rejected: {:?}", r.verdicts));
    }
    let bad = parse_solution("sigma p(X,Y) :- X>=0.").unwrap();
    let r = verify_solution(&set, &bad).unwrap();
    let Some((i, w)) = r.first_invalid() else {
        return fail("corrupted solution accepted");
    };
    if !witness_refutes(&set.clauses()[i], &bad, w) {
        return fail(format!("witness {w:?} does not refute clause {}", i + 1));
    }
    let w: Vec<String> = w.iter().map(|(v, x)| format!("{v}={x}")).collect();
    pass(format!("valid solution accepted; corrupted one refuted on clause {} with {}", i + 1, w.join(", ")))
}

fn functionality() -> Report {
    let t = parse_spec(FIB_SPEC).unwrap();
    let samples: Vec<Vec<BigInt>> = (0..=6).map(|n| vec![BigInt::from(n)]).collect();
    let r = check_functionality(&t, &samples, 12);
    let want: Vec<Option<BigInt>> = [1, 1, 2, 3, 5, 8, 13].into_iter().map(|v| Some(BigInt::from(v))).collect();
    let all_unique = r.samples.iter().all(|(_, s)| matches!(s, SampleStatus::Unique(_)));
    if r.values() == want && r.violations() == 0 && all_unique {
        pass("values 1,1,2,3,5,8,13, no violations")
    } else {
        fail(format!("report:\n{r}"))
    }
}

fn main() {
    // The external solver runs in the background while the other criteria
    // are checked.
    let solver = solver_command(None);
    let external = solver.clone().map(|cmd| {
        std::thread::spawn(move || {
            let st = run_pipeline(FIB, FIB_SPEC).unwrap();
            let limit = Duration::from_secs(120);
            let pre = std::thread::spawn({
                let script = emit_smtlib(&st.after_ri);
                let cmd = cmd.clone();
                move || {
                    let t = Instant::now();
                    (run_external(&script, &cmd, limit), t.elapsed())
                }
            });
            let t = Instant::now();
            let post = run_external(&emit_smtlib(&st.lin.clauses), &cmd, limit);
            let post_time = t.elapsed();
            let (pre, pre_time) = pre.join().unwrap();
            (post, post_time, pre, pre_time)
        })
    });

    let mut results: Vec<(usize, Report, Duration)> = Vec::new();
    type Check = (usize, Option<u64>, fn() -> Report);
    let checks: [Check; 8] = [
        (1, Some(1), goal_generation),
        (2, Some(1), ri_golden),
        (3, Some(5), lin_golden),
        (4, Some(30), linearity),
        (5, Some(300), equisatisfiability),
        (6, Some(10), monotonicity),
        (7, Some(1), solution_verification),
        (9, Some(5), functionality),
    ];
    for (n, limit, f) in checks {
        let (r, d) = timed(limit.map(Duration::from_secs), f);
        results.push((n, r, d));
    }

    let (ext, ext_time) = match external {
        None => {
            (Report { status: Status::Skip, detail: "no solver configured (set HL_SOLVER)".into() }, Duration::ZERO)
        }
        Some(h) => {
            let (post, post_time, pre, pre_time) = h.join().unwrap();
            let note = format!("before linearization: {pre} after {pre_time:.1?} (not asserted)");
            let cmd = solver.unwrap_or_default();
            let r = if post == ExternalVerdict::Sat {
                pass(format!("`{cmd}`: sat after linearization; {note}"))
            } else {
                fail(format!("`{cmd}`: {post} after linearization; {note}"))
            };
            (r, post_time)
        }
    };
    results.push((8, ext, ext_time));
    results.sort_by_key(|(n, _, _)| *n);

    let mut failed = 0;
    for (n, r, d) in &results {
        let tag = match r.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("criterion {n}: {tag} ({d:.2?}) {}", r.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
