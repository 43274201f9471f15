//! Removal of the interpreter: unfolds the interpreter predicates away and
//! introduces one predicate per loop head.

use std::collections::VecDeque;

use super::{replay, DefsTable, TraceStep, TransformError, TransformTrace};
use crate::chc::{drop_defined_locals, merge_aliases_where, propagate_constants_at, Atom, Clause, ClauseSet};
use crate::encode::{OpSem, REACH};
use crate::lin::VarGen;

/// Upper bound on unfolding steps; reached only by malformed inputs.
const MAX_UNFOLDS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct RiOutput {
    pub clauses: ClauseSet,
    pub defs: DefsTable,
    pub trace: TransformTrace,
}

fn simplify(o: &OpSem, c: &Clause) -> Clause {
    let c = propagate_constants_at(c, |p| o.label_positions(p));
    let c = merge_aliases_where(&c, |c, x, y| {
        let h = c.head_vars();
        h.contains(x) && h.contains(y)
    });
    drop_defined_locals(&c)
}

fn unfold_at(o: &OpSem, c: &Clause, pos: usize, gen: &mut VarGen) -> Vec<Clause> {
    super::unfold(c, pos, o.clauses.clauses(), gen).iter().map(|r| simplify(o, r)).collect()
}

/// Unfolds at the first atom, then keeps unfolding the leftmost unfoldable
/// atom. Results come out in derivation order.
fn cascade(
    o: &OpSem,
    c: Clause,
    gen: &mut VarGen,
    trace: &mut TransformTrace,
    count: &mut usize,
) -> Result<Vec<Clause>, TransformError> {
    let mut out = Vec::new();
    let mut stack = vec![(c, true)];
    while let Some((c, first)) = stack.pop() {
        let pos = if first && !c.body.is_empty() { Some(0) } else { c.body.iter().position(|a| o.unfoldable(a)) };
        let Some(pos) = pos else {
            out.push(c);
            continue;
        };
        *count += 1;
        if *count > MAX_UNFOLDS {
            return Err(TransformError::Budget(MAX_UNFOLDS));
        }
        let results = unfold_at(o, &c, pos, gen);
        trace.push(TraceStep::Unfold { clause: c, atom: Some(pos), results: results.clone() });
        stack.extend(results.into_iter().rev().map(|r| (r, false)));
    }
    Ok(out)
}

fn fold_reach(c: &Clause, defs: &mut DefsTable, mut define: impl FnMut(&Clause)) -> Clause {
    let body = c
        .body
        .iter()
        .map(|a| {
            if a.pred != REACH {
                return a.clone();
            }
            let vs = a.vars();
            let (p, fresh) = defs.lookup_or_define(std::slice::from_ref(a), &vs);
            if fresh {
                define(&defs.entries().last().unwrap().clause);
            }
            Atom::with_vars(p, &vs)
        })
        .collect();
    Clause::new(c.head.clone(), c.constraint.clone(), body)
}

/// Removes `initCf`, `finalCf`, `reach` and `tr` from the clauses defining
/// the program relation.
pub fn remove_interpreter(o: &OpSem) -> Result<RiOutput, TransformError> {
    let mut defs = DefsTable::new("r");
    let mut trace = TransformTrace::default();
    let mut gen = VarGen::with_prefix("_R");
    let mut queue: VecDeque<Clause> = o.clauses.defining(&o.relation).cloned().collect();
    let mut out = Vec::new();
    let mut count = 0;
    while let Some(c) = queue.pop_front() {
        for d in cascade(o, c, &mut gen, &mut trace, &mut count)? {
            let mut introduced = Vec::new();
            let folded = fold_reach(&d, &mut defs, |def| introduced.push(def.clone()));
            for def in introduced {
                trace.push(TraceStep::Define { def: def.clone() });
                queue.push_back(def);
            }
            let folded = folded.tidy();
            if folded != d {
                trace.push(TraceStep::Fold { clause: d, result: folded.clone() });
            }
            trace.push(TraceStep::Emit { clause: folded.clone() });
            out.push(folded);
        }
    }
    let clauses = ClauseSet::from_clauses(out).map_err(|e| TransformError::Arity(e.to_string()))?;
    Ok(RiOutput { clauses, defs, trace })
}

/// Re-derives every step of an interpreter-removal trace and returns the
/// emitted clauses.
pub fn replay_remove_interpreter(o: &OpSem, trace: &TransformTrace) -> Result<ClauseSet, TransformError> {
    let inputs: Vec<Clause> = o.clauses.defining(&o.relation).cloned().collect();
    replay(
        trace,
        &inputs,
        "r",
        |c, pos| {
            let pos = pos?;
            let mut gen = VarGen::with_prefix("_R");
            Some(unfold_at(o, c, pos, &mut gen))
        },
        |c, defs| {
            let mut missing = false;
            let mut scratch = defs.clone();
            let r = fold_reach(c, &mut scratch, |_| missing = true);
            (!missing).then(|| r.tidy())
        },
    )
}
