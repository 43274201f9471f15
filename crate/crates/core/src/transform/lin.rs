//! Linearization: turns goals with several atoms into linear clauses over
//! new predicates, each defined by a conjunction of atoms.

use std::collections::VecDeque;

use super::{fold_vars, replay, DefsTable, TraceStep, TransformError, TransformTrace};
use crate::chc::{drop_defined_locals, merge_equal_definitions, Atom, Clause, ClauseSet};
use crate::lin::VarGen;

#[derive(Debug, Clone)]
pub struct LinOutput {
    pub clauses: ClauseSet,
    pub defs: DefsTable,
    pub trace: TransformTrace,
}

/// Unfolds every body atom once, left to right, with the linear clauses.
fn unfold_all(lcls: &[Clause], c: &Clause) -> Vec<Clause> {
    let mut gen = VarGen::with_prefix("_L");
    let mut done = Vec::new();
    let mut work = vec![(c.clone(), 0usize)];
    while let Some((c, pos)) = work.pop() {
        if pos >= c.body.len() {
            done.push(c);
            continue;
        }
        let before = c.body.len();
        let rs = super::unfold(&c, pos, lcls, &mut gen);
        for r in rs.into_iter().rev() {
            let next = pos + 1 + r.body.len() - before;
            work.push((r, next));
        }
    }
    done.iter().map(|c| drop_defined_locals(&merge_equal_definitions(c)).flatten(&mut gen)).collect()
}

fn fold_with(c: &Clause, pred: &str, vs: &[crate::lin::Var]) -> Clause {
    Clause::new(c.head.clone(), c.constraint.clone(), vec![Atom::with_vars(pred, vs)]).tidy()
}

/// Linearizes `gls` with respect to the linear clauses `lcls`. The output
/// holds `lcls` followed by the derived clauses.
pub fn linearize(lcls: &[Clause], gls: &[Clause]) -> Result<LinOutput, TransformError> {
    if let Some(c) = lcls.iter().find(|c| !c.is_linear()) {
        return Err(TransformError::Nonlinear(c.to_string()));
    }
    if let Some(c) = gls.iter().find(|c| !c.is_goal()) {
        return Err(TransformError::NotAGoal(c.to_string()));
    }
    let mut defs = DefsTable::new("new");
    let mut trace = TransformTrace::default();
    let mut out: Vec<Clause> = lcls.to_vec();
    for c in lcls {
        trace.push(TraceStep::Emit { clause: c.clone() });
    }
    // Goals that are already linear are unfolded once and kept as they are.
    let mut queue: VecDeque<(Clause, bool)> = gls.iter().map(|g| (g.clone(), g.body.len() <= 1)).collect();
    while let Some((c, keep)) = queue.pop_front() {
        let results = unfold_all(lcls, &c);
        trace.push(TraceStep::Unfold { clause: c, atom: None, results: results.clone() });
        for e in results {
            if keep || e.body.is_empty() {
                let e = e.tidy();
                trace.push(TraceStep::Emit { clause: e.clone() });
                out.push(e);
                continue;
            }
            let vs = fold_vars(&e);
            let (p, fresh) = defs.lookup_or_define(&e.body, &vs);
            if fresh {
                let def = defs.entries().last().unwrap().clause.clone();
                trace.push(TraceStep::Define { def: def.clone() });
                queue.push_back((def, false));
            }
            let folded = fold_with(&e, &p, &vs);
            trace.push(TraceStep::Fold { clause: e, result: folded.clone() });
            trace.push(TraceStep::Emit { clause: folded.clone() });
            out.push(folded);
        }
    }
    let clauses = ClauseSet::from_clauses(out).map_err(|e| TransformError::Arity(e.to_string()))?;
    Ok(LinOutput { clauses, defs, trace })
}

/// Re-derives every step of a linearization trace and returns the emitted
/// clauses.
pub fn replay_linearize(lcls: &[Clause], gls: &[Clause], trace: &TransformTrace) -> Result<ClauseSet, TransformError> {
    let inputs: Vec<Clause> = lcls.iter().chain(gls).cloned().collect();
    replay(
        trace,
        &inputs,
        "new",
        |c, pos| match pos {
            None => Some(unfold_all(lcls, c)),
            Some(_) => None,
        },
        |c, defs| {
            let vs = fold_vars(c);
            defs.lookup(&c.body, &vs).map(|d| fold_with(c, &d.pred, &vs))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::{canonicalize, parse_clause, parse_clauses};

    pub(crate) const E: &str = "r_fibonacci(N,F) :- N>=0, U=1, V=0, T=0, r1(N,U,V,T,N1,F,V1,T1).
        r1(N,U,V,T,N,U,V,T) :- N=<0.
        r1(N,U,V,T,N2,U2,V2,T2) :- N>=1, N1=N-1, U1=U+V, V1=U, T1=U, r1(N1,U1,V1,T1,N2,U2,V2,T2).";
    pub(crate) const G5: &str = "false :- N1>=0, N2=N1+1, N3=N2+1, F3>F1+F2,
        r_fibonacci(N1,F1), r_fibonacci(N2,F2), r_fibonacci(N3,F3).";

    #[test]
    fn fibonacci_goal_definitions() {
        let e = parse_clauses(E).unwrap();
        let g = parse_clause(G5).unwrap();
        let out = linearize(e.clauses(), &[g]).unwrap();
        let arities: Vec<usize> = out.defs.entries().iter().map(|d| d.clause.head.as_ref().unwrap().arity()).collect();
        assert_eq!(arities, vec![8, 4, 6]);
        assert!(out.clauses.all_linear());
        let count = |p: &str| out.clauses.defining(p).count();
        assert_eq!((count("new1"), count("new2"), count("new3")), (8, 2, 4));
        assert_eq!(out.clauses.len(), 3 + 1 + 8 + 2 + 4);
        let c1 = out.defs.entries()[0].clause.to_string();
        let want = parse_clause(
            "new1(N1,U,V,F1,N2,F2,N3,F3) :- r1(N1,U,V,V,X1,F1,Y1,Z1), r1(N2,U,V,V,X2,F2,Y2,Z2), r1(N3,U,V,V,X3,F3,Y3,Z3).",
        )
        .unwrap();
        assert_eq!(canonicalize(&out.defs.entries()[0].clause), canonicalize(&want), "{c1}");
    }

    #[test]
    fn replay_reproduces_output() {
        let e = parse_clauses(E).unwrap();
        let g = parse_clause(G5).unwrap();
        let out = linearize(e.clauses(), std::slice::from_ref(&g)).unwrap();
        let again = replay_linearize(e.clauses(), &[g], &out.trace).unwrap();
        assert_eq!(again.len(), out.clauses.len());
    }

    #[test]
    fn inputs_are_checked() {
        let e = parse_clauses(E).unwrap();
        let g = parse_clause(G5).unwrap();
        assert!(matches!(linearize(std::slice::from_ref(&g), std::slice::from_ref(&g)), Err(TransformError::Nonlinear(_))));
        assert!(matches!(linearize(e.clauses(), e.clauses()), Err(TransformError::NotAGoal(_))));
    }

    #[test]
    fn linear_goals_are_only_unfolded() {
        let e = parse_clauses(E).unwrap();
        let g = parse_clause("false :- F>1, r_fibonacci(0,F).").unwrap();
        let out = linearize(e.clauses(), &[g]).unwrap();
        assert!(out.clauses.all_linear());
        assert!(out.defs.is_empty());
        assert_eq!(out.clauses.len(), 4);
        let last = out.clauses.clauses().last().unwrap();
        assert_eq!(last.body[0].pred, "r1");
    }
}
