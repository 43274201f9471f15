//! Symbolic interpretations and checking that one solves a clause set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;

use crate::chc::{Atom, Clause, ClauseSet, Parser, Term};
use crate::lin::{
    eliminate, entails, sat_z, Entailment, LinConstraint, LinError, LinExpr, Var, ZSat, DEFAULT_BRANCH_BUDGET,
};
use crate::syntax::{ParseError, Tok};
use crate::transform::DefsTable;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("no interpretation for predicate `{0}`")]
    Missing(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("interpretation of `{pred}` mentions `{var}`, which is not a parameter")]
    FreeVariable { pred: String, var: String },
    #[error("interpretation of `{pred}` has arity {found}, expected {expected}")]
    Arity { pred: String, expected: usize, found: usize },
    #[error("could not eliminate variables for `{0}`: {1}")]
    Elimination(String, LinError),
}

/// Maps each predicate to a constraint over its formal parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicInterp {
    map: BTreeMap<String, (Vec<Var>, LinConstraint)>,
}

impl SymbolicInterp {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the interpretation of `pred`. The constraint may
    /// only mention `params`.
    pub fn insert(&mut self, pred: &str, params: Vec<Var>, c: LinConstraint) -> Result<(), VerifyError> {
        if let Some(v) = c.vars().into_iter().find(|v| !params.contains(v)) {
            return Err(VerifyError::FreeVariable { pred: pred.into(), var: v.to_string() });
        }
        self.map.insert(pred.to_string(), (params, c));
        Ok(())
    }

    pub fn get(&self, pred: &str) -> Option<(&[Var], &LinConstraint)> {
        self.map.get(pred).map(|(p, c)| (p.as_slice(), c))
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }

    /// Σ(A): the constraint with the atom's arguments for the parameters.
    pub fn instantiate(&self, a: &Atom) -> Result<LinConstraint, VerifyError> {
        let (params, c) = self.map.get(&a.pred).ok_or_else(|| VerifyError::Missing(a.pred.clone()))?;
        if params.len() != a.arity() {
            return Err(VerifyError::Arity { pred: a.pred.clone(), expected: a.arity(), found: params.len() });
        }
        let s: BTreeMap<Var, LinExpr> = params.iter().cloned().zip(a.args.iter().map(Term::to_expr)).collect();
        Ok(c.substitute(&s))
    }
}

impl fmt::Display for SymbolicInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, (params, c)) in &self.map {
            let h = Atom::with_vars(p.clone(), params);
            if c.is_true() {
                writeln!(f, "sigma {h}.")?;
            } else {
                writeln!(f, "sigma {h} :- {c}.")?;
            }
        }
        Ok(())
    }
}

/// Reads `sigma p(X1,...,Xm) :- constraint.` lines. Lines without a body
/// interpret the predicate as true.
pub fn parse_solution(text: &str) -> Result<SymbolicInterp, VerifyError> {
    let mut p = Parser::new(text)?;
    let mut out = SymbolicInterp::new();
    while !p.at_eof() {
        match p.peek() {
            Tok::Ident(s) if s == "sigma" => {
                p.next();
            }
            _ => return Err(p.error("expected `sigma`").into()),
        }
        let (line, col) = p.position();
        let cs = p.clause()?;
        if cs.len() != 1 {
            return Err(ParseError::new(line, col, "an interpretation must be a conjunction").into());
        }
        let c = &cs[0];
        let Some(h) = &c.head else {
            return Err(ParseError::new(line, col, "an interpretation needs a head atom").into());
        };
        if !c.body.is_empty() {
            return Err(ParseError::new(line, col, "an interpretation cannot mention atoms").into());
        }
        let params: Vec<Var> = h.args.iter().filter_map(|t| t.as_var().cloned()).collect();
        let distinct: BTreeSet<&Var> = params.iter().collect();
        if params.len() != h.arity() || distinct.len() != params.len() {
            return Err(ParseError::new(line, col, "head arguments must be distinct variables").into());
        }
        out.insert(&h.pred, params, c.constraint.clone())?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// An integer assignment making the body true and the head false.
    Invalid(BTreeMap<Var, BigInt>),
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid(w) => {
                let w: Vec<String> = w.iter().map(|(v, x)| format!("{v}={x}")).collect();
                write!(f, "invalid: {}", w.join(", "))
            }
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

/// Per-clause verdicts of `sigma` on `set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub verdicts: Vec<Verdict>,
}

impl VerifyReport {
    pub fn all_valid(&self) -> bool {
        self.verdicts.iter().all(|v| *v == Verdict::Valid)
    }

    pub fn first_invalid(&self) -> Option<(usize, &BTreeMap<Var, BigInt>)> {
        self.verdicts.iter().enumerate().find_map(|(i, v)| match v {
            Verdict::Invalid(w) => Some((i, w)),
            _ => None,
        })
    }

    pub fn any_unknown(&self) -> bool {
        self.verdicts.contains(&Verdict::Unknown)
    }
}

/// Checks `c ∧ Σ(A1) ∧ ... ∧ Σ(An) → Σ(A0)` over the integers.
pub fn verify_clause(c: &Clause, sigma: &SymbolicInterp) -> Result<Verdict, VerifyError> {
    let mut ante = c.constraint.clone();
    for a in &c.body {
        ante = ante.and(&sigma.instantiate(a)?);
    }
    let Some(h) = &c.head else {
        return Ok(match sat_z(&ante, DEFAULT_BRANCH_BUDGET) {
            ZSat::Sat(w) => Verdict::Invalid(w),
            ZSat::Unsat => Verdict::Valid,
            ZSat::Unknown => Verdict::Unknown,
        });
    };
    let cons = sigma.instantiate(h)?;
    Ok(match entails(&ante, &cons) {
        Entailment::Valid => Verdict::Valid,
        Entailment::Invalid(w) => Verdict::Invalid(w),
        Entailment::Unknown => Verdict::Unknown,
    })
}

pub fn verify_solution(set: &ClauseSet, sigma: &SymbolicInterp) -> Result<VerifyReport, VerifyError> {
    let verdicts = set.iter().map(|c| verify_clause(c, sigma)).collect::<Result<_, _>>()?;
    Ok(VerifyReport { verdicts })
}

/// Extends `sigma` to the introduced predicates: the interpretation of
/// `newp(X..) :- A1,...,Ak` is Σ(A1) ∧ ... ∧ Σ(Ak) with the variables
/// other than `X..` eliminated.
pub fn transport_solution(sigma: &SymbolicInterp, defs: &DefsTable) -> Result<SymbolicInterp, VerifyError> {
    let mut out = sigma.clone();
    for d in defs.entries() {
        let h = d.clause.head.as_ref().expect("definitions have heads");
        let params: Vec<Var> = h.args.iter().filter_map(|t| t.as_var().cloned()).collect();
        let mut conj = LinConstraint::truth();
        for a in &d.clause.body {
            conj = conj.and(&out.instantiate(a)?);
        }
        let locals: BTreeSet<Var> = conj.vars().into_iter().filter(|v| !params.contains(v)).collect();
        let projected = eliminate(&conj, &locals).map_err(|e| VerifyError::Elimination(d.pred.clone(), e))?;
        out.insert(&d.pred, params, projected)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clauses;

    const DOUBLING: &str = "p(X,Y) :- X=0, Y=0.\np(X1,Y1) :- X1=X+1, Y1=Y+2, p(X,Y).\nfalse :- Y>2*X, p(X,Y).";

    #[test]
    fn doubling_solution_is_valid() {
        let s = parse_clauses(DOUBLING).unwrap();
        let sigma = parse_solution("sigma p(X,Y) :- Y=2*X, X>=0.").unwrap();
        let r = verify_solution(&s, &sigma).unwrap();
        assert!(r.all_valid(), "{:?}", r);
    }

    #[test]
    fn weakened_doubling_solution_fails_on_the_goal() {
        let s = parse_clauses(DOUBLING).unwrap();
        let sigma = parse_solution("sigma p(X,Y) :- X>=0.").unwrap();
        let r = verify_solution(&s, &sigma).unwrap();
        let (i, w) = r.first_invalid().unwrap();
        assert_eq!(i, 2);
        let x = &w[&Var::new("X")];
        let y = &w[&Var::new("Y")];
        assert!(*y > x * 2 && *x >= BigInt::from(0));
    }

    #[test]
    fn true_everywhere_solves_definite_sets() {
        let s = parse_clauses("p(X) :- X=0.\np(X) :- X=Y+1, p(Y).\nq(X,Y) :- p(X), p(Y).").unwrap();
        let sigma = parse_solution("sigma p(X).\nsigma q(A,B).").unwrap();
        assert!(verify_solution(&s, &sigma).unwrap().all_valid());
    }

    #[test]
    fn missing_predicate() {
        let s = parse_clauses(DOUBLING).unwrap();
        let sigma = parse_solution("sigma q(X).").unwrap();
        assert_eq!(verify_solution(&s, &sigma), Err(VerifyError::Missing("p".into())));
    }

    #[test]
    fn malformed_solutions() {
        assert!(parse_solution("p(X) :- X>0.").is_err());
        assert!(parse_solution("sigma p(X) :- Y>0.").is_err());
        assert!(parse_solution("sigma p(X,X) :- X>0.").is_err());
        assert!(parse_solution("sigma p(X) :- X>0, q(X).").is_err());
        assert!(parse_solution("sigma p(X) :- X>0 ; X<0.").is_err());
    }

    #[test]
    fn transported_interpretation_projects_locals() {
        let mut defs = DefsTable::new("new");
        let c = crate::chc::parse_clause("false :- p(A,B), p(B,C).").unwrap();
        defs.lookup_or_define(&c.body, &[Var::new("A"), Var::new("C")]);
        let sigma = parse_solution("sigma p(X,Y) :- Y=X+1.").unwrap();
        let t = transport_solution(&sigma, &defs).unwrap();
        let (params, c) = t.get("new1").unwrap();
        assert_eq!(params.len(), 2);
        assert_eq!(c.to_string(), "A=C-2");
    }
}
