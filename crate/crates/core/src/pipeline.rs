//! Encode, remove the interpreter, linearize.

use serde::Serialize;

use crate::chc::{Clause, ClauseSet};
use crate::encode::{EncodeError, OpSem, Problem};
use crate::transform::{linearize, remove_interpreter, LinOutput, RiOutput, TransformError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Clause counts and widths after one stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageSummary {
    pub stage: String,
    pub clauses: usize,
    pub goals: usize,
    pub definitions: usize,
    pub max_body_width: usize,
    pub max_definition_width: usize,
}

impl StageSummary {
    pub fn of(stage: &str, s: &ClauseSet, definitions: usize, max_definition_width: usize) -> Self {
        StageSummary {
            stage: stage.to_string(),
            clauses: s.len(),
            goals: s.goals().count(),
            definitions,
            max_body_width: s.max_body_width(),
            max_definition_width,
        }
    }
}

impl std::fmt::Display for StageSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} clauses ({} goals), {} definitions, max body width {}",
            self.stage, self.clauses, self.goals, self.definitions, self.max_body_width
        )
    }
}

/// `clauses` followed by the non-interpreter, non-relation clauses of `pc`
/// (auxiliary predicates and goals). Used to rebuild a full clause set after
/// interpreter removal.
pub fn replace_opsem(pc: &ClauseSet, opsem: &OpSem, clauses: &ClauseSet) -> ClauseSet {
    let rest = pc.iter().filter(|c| match c.head_pred() {
        Some(p) => !OpSem::is_interpreter(p) && p != opsem.relation,
        None => true,
    });
    ClauseSet::from_clauses(clauses.iter().chain(rest).cloned()).expect("consistent signatures")
}

/// The clause set after interpreter removal: the program clauses, the
/// auxiliary clauses and the goals.
pub fn after_ri(pr: &Problem, ri: &RiOutput) -> ClauseSet {
    replace_opsem(&pr.pc, &pr.opsem, &ri.clauses)
}

/// Linearizes a clause set: its definite clauses are the linear part and
/// its goals the (possibly nonlinear) rest.
pub fn linearize_set(s: &ClauseSet) -> Result<LinOutput, TransformError> {
    let lcls: Vec<Clause> = s.definite().cloned().collect();
    let gls: Vec<Clause> = s.goals().cloned().collect();
    linearize(&lcls, &gls)
}

/// All intermediate results of the full pipeline.
#[derive(Debug, Clone)]
pub struct Stages {
    pub problem: Problem,
    pub ri: RiOutput,
    pub after_ri: ClauseSet,
    pub lin: LinOutput,
}

impl Stages {
    pub fn summaries(&self) -> Vec<StageSummary> {
        vec![
            StageSummary::of("encode", &self.problem.pc, 0, 0),
            StageSummary::of("ri", &self.after_ri, self.ri.defs.len(), self.ri.defs.max_body()),
            StageSummary::of("lin", &self.lin.clauses, self.lin.defs.len(), self.lin.defs.max_body()),
        ]
    }
}

pub fn run_pipeline(program: &str, spec: &str) -> Result<Stages, PipelineError> {
    let problem = Problem::load(program, spec)?;
    let ri = remove_interpreter(&problem.opsem)?;
    let after_ri = after_ri(&problem, &ri);
    let lin = linearize_set(&after_ri)?;
    Ok(Stages { problem, ri, after_ri, lin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::{bounded_counterexample, OracleResult};

    const FIB: &str = "0: while (n>0) { t=u; u=u+v; v=t; n=n-1 }\nh: halt\n";
    const FIB_SPEC: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}\n\
        fib(0,1).\nfib(1,1).\n\
        fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).\n";

    #[test]
    fn fibonacci_end_to_end() {
        let st = run_pipeline(FIB, FIB_SPEC).unwrap();
        assert_eq!(st.after_ri.len(), 3 + 6);
        assert!(st.lin.clauses.all_linear());
        assert_eq!(st.lin.clauses.goals().count(), 6);
        let s = st.summaries();
        assert_eq!(s[2].max_body_width, 1);
        assert!(s[2].max_definition_width <= 3);
        assert_eq!(bounded_counterexample(&st.lin.clauses, 8, 1_000_000), OracleResult::NoCexUpTo(8));
    }
}
