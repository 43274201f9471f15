//! Bounded search for counterexamples: goals are unfolded to a fixed depth
//! and every atom-free branch is checked for an integer solution.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use super::{Control, Engine, Query, Step};
use crate::chc::{Clause, ClauseSet};
use crate::encode::Problem;
use crate::imp::{interpret, DEFAULT_MAX_STEPS};
use crate::lin::{sat_z, LinConstraint, Var, ZSat, DEFAULT_BRANCH_BUDGET};
use crate::spec::derivable_values;

pub const DEFAULT_DEPTH: usize = 8;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// A derivation of `false` from the goal at index `goal` of the clause set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub goal: usize,
    pub clause: Clause,
    pub steps: Vec<Step>,
    /// Conjunction of the goal constraint and everything the steps added.
    pub constraint: LinConstraint,
    pub witness: BTreeMap<Var, BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    NoCexUpTo(usize),
    Cex(Box<Counterexample>),
    BudgetExhausted,
    /// Some branch could not be decided over the integers.
    Unknown,
}

impl OracleResult {
    pub fn is_cex(&self) -> bool {
        matches!(self, OracleResult::Cex(_))
    }

    pub fn cex(&self) -> Option<&Counterexample> {
        match self {
            OracleResult::Cex(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for OracleResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleResult::NoCexUpTo(d) => write!(f, "no counterexample up to depth {d}"),
            OracleResult::Cex(c) => write!(f, "{c}"),
            OracleResult::BudgetExhausted => write!(f, "budget exhausted"),
            OracleResult::Unknown => write!(f, "unknown"),
        }
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "counterexample for goal {}: {}", self.goal + 1, self.clause)?;
        let w: Vec<String> = self
            .clause
            .body_vars()
            .iter()
            .chain(self.clause.constraint.vars().iter())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|v| format!("{v}={}", self.witness.get(v).cloned().unwrap_or_default()))
            .collect();
        writeln!(f, "witness: {}", w.join(", "))?;
        for (atom, args) in self.ground_atoms() {
            let a: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            writeln!(f, "  {atom}({})", a.join(","))?;
        }
        Ok(())
    }
}

impl Counterexample {
    /// The atoms resolved along the derivation, evaluated under the witness.
    pub fn ground_atoms(&self) -> Vec<(String, Vec<BigInt>)> {
        self.steps
            .iter()
            .map(|s| {
                let args = s
                    .atom
                    .args
                    .iter()
                    .map(|t| t.to_expr().eval_int(&self.witness).map(|r| r.to_integer()).unwrap_or_default())
                    .collect();
                (s.atom.pred.clone(), args)
            })
            .collect()
    }

    /// Checks the witness against the derivation in exact arithmetic: the goal
    /// constraint and every step's contribution must hold, and every resolved
    /// clause must define the atom's predicate.
    pub fn replay(&self, set: &ClauseSet) -> Result<(), String> {
        let holds = |c: &LinConstraint| c.holds_int(&self.witness) == Some(true);
        if set.clauses().get(self.goal) != Some(&self.clause) {
            return Err(format!("goal {} is not {}", self.goal, self.clause));
        }
        if !holds(&self.clause.constraint) {
            return Err(format!("witness violates the goal constraint {}", self.clause.constraint));
        }
        for (i, s) in self.steps.iter().enumerate() {
            let Some(k) = set.clauses().get(s.clause) else {
                return Err(format!("step {i}: no clause {}", s.clause));
            };
            if k.head_pred() != Some(s.atom.pred.as_str()) {
                return Err(format!("step {i}: clause {k} does not define {}", s.atom));
            }
            if !holds(&s.added) {
                return Err(format!("step {i}: witness violates {}", s.added));
            }
            for t in &s.atom.args {
                match t.to_expr().eval_int(&self.witness) {
                    Some(v) if v.is_integer() => {}
                    _ => return Err(format!("step {i}: {} is not ground under the witness", s.atom)),
                }
            }
        }
        if !holds(&self.constraint) {
            return Err("witness violates the accumulated constraint".into());
        }
        Ok(())
    }
}

/// Unfolds every goal of `set` to `depth` and looks for an integer model of
/// an atom-free branch. `budget` bounds the clause resolutions tried over
/// all goals.
pub fn bounded_counterexample(set: &ClauseSet, depth: usize, budget: u64) -> OracleResult {
    let engine = Engine::new(set);
    let mut budget = budget;
    let mut unknown = false;
    let mut exhausted = false;
    for (gi, goal) in set.clauses().iter().enumerate() {
        if !goal.is_goal() {
            continue;
        }
        let mut found = None;
        let r = engine.explore(&Query::from_goal(goal), depth, &mut budget, |c, steps| {
            match sat_z(c, DEFAULT_BRANCH_BUDGET) {
                ZSat::Sat(mut w) => {
                    let free = goal.vars().into_iter().chain(steps.iter().flat_map(|s| s.atom.vars()));
                    for v in free {
                        w.entry(v).or_default();
                    }
                    found = Some(Counterexample {
                        goal: gi,
                        clause: goal.clone(),
                        steps: steps.to_vec(),
                        constraint: c.clone(),
                        witness: w,
                    });
                    Control::Stop
                }
                ZSat::Unsat => Control::Continue,
                ZSat::Unknown => {
                    unknown = true;
                    Control::Continue
                }
            }
        });
        if let Some(c) = found {
            return OracleResult::Cex(Box::new(c));
        }
        if r.budget_exhausted {
            exhausted = true;
            break;
        }
    }
    if exhausted {
        OracleResult::BudgetExhausted
    } else if unknown {
        OracleResult::Unknown
    } else {
        OracleResult::NoCexUpTo(depth)
    }
}

/// A run of the program contradicting the specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub args: Vec<BigInt>,
    /// Value computed by the interpreter.
    pub computed: BigInt,
    /// Values the specification derives for `args` (empty if none).
    pub expected: Vec<BigInt>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.args.iter().map(|x| x.to_string()).collect();
        let e: Vec<String> = self.expected.iter().map(|x| x.to_string()).collect();
        write!(
            f,
            "on ({}) the program computes {} but the specification gives {{{}}}",
            a.join(","),
            self.computed,
            e.join(",")
        )
    }
}

/// Replays a counterexample of a partial-correctness set on the
/// interpreter. Each program-relation atom of the derivation gives
/// parameter values and an output; the first run whose output the
/// specification does not derive (searching to `depth`) is returned.
pub fn confirm_violation(pr: &Problem, cex: &Counterexample, depth: usize) -> Option<Violation> {
    let t = &pr.triple;
    let f = t.f_def().first()?.head.as_ref()?.pred.clone();
    let order = &pr.opsem.state;
    for (pred, args) in cex.ground_atoms() {
        if pred != pr.opsem.relation {
            continue;
        }
        let (params, z) = args.split_at(args.len() - 1);
        let env = t.initial_env(order, params);
        let out = interpret(&pr.program, &env, DEFAULT_MAX_STEPS);
        let Some(computed) = out.env().and_then(|e| e.get(&t.result_var)).cloned() else {
            continue;
        };
        if computed != z[0] {
            continue;
        }
        let expected = derivable_values(&t.spec, &f, params, depth)?;
        if !expected.contains(&computed) {
            return Some(Violation { args: params.to_vec(), computed, expected });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clauses;

    const FIB: &str = "0: while (n>0) { t=u; u=u+v; v=t; n=n-1 }\nh: halt\n";
    const FIB_SPEC: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}\n\
        fib(0,1).\nfib(1,1).\n\
        fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).\n";

    #[test]
    fn atom_free_goal() {
        let s = parse_clauses("false :- X>0.").unwrap();
        let r = bounded_counterexample(&s, 0, 10);
        let c = r.cex().unwrap();
        assert_eq!(c.witness[&Var::new("X")], BigInt::from(1));
        c.replay(&s).unwrap();
    }

    #[test]
    fn fibonacci_has_no_shallow_counterexample() {
        let pr = Problem::load(FIB, FIB_SPEC).unwrap();
        assert_eq!(bounded_counterexample(&pr.pc, 8, DEFAULT_BUDGET), OracleResult::NoCexUpTo(8));
    }

    #[test]
    fn wrong_base_case_is_found_and_confirmed() {
        let spec = FIB_SPEC.replace("fib(1,1).", "fib(1,2).");
        let pr = Problem::load(FIB, &spec).unwrap();
        let r = bounded_counterexample(&pr.pc, 12, DEFAULT_BUDGET);
        let c = r.cex().expect("counterexample");
        c.replay(&pr.pc).unwrap();
        let gi = pr.pc.clauses()[..c.goal].iter().filter(|k| k.is_goal()).count();
        assert!(matches!(gi, 2 | 3), "{c}");
        let rel: Vec<_> = c.ground_atoms().into_iter().filter(|(p, _)| *p == pr.opsem.relation).collect();
        assert_eq!(rel[0].1[0], BigInt::from(1));
        let v = confirm_violation(&pr, c, 12).unwrap();
        assert_eq!(v.computed, BigInt::from(1));
        assert_eq!(v.expected, vec![BigInt::from(2)]);
    }

    #[test]
    fn tampered_witness_fails_replay() {
        let s = parse_clauses("p(X) :- X>=3.\nfalse :- Y<5, p(Y).").unwrap();
        let mut c = bounded_counterexample(&s, 2, 100).cex().unwrap().clone();
        c.replay(&s).unwrap();
        c.witness.insert(Var::new("Y"), BigInt::from(1));
        assert!(c.replay(&s).is_err());
    }
}
