//! Bundled example programs with their specifications.

use num_bigint::BigInt;

use crate::chc::{Atom, Clause, ClauseSet, Term};
use crate::lin::LinExpr;
use crate::spec::{parse_spec, SpecError};

#[derive(Debug, Clone, Copy)]
pub struct CorpusItem {
    pub name: &'static str,
    pub program: &'static str,
    pub spec: &'static str,
    /// A solution of the clause set obtained after interpreter removal, in
    /// `sigma` syntax, when one exists in linear arithmetic.
    pub solution: Option<&'static str>,
}

macro_rules! item {
    ($name:literal) => {
        item!($name, None)
    };
    ($name:literal, $sol:expr) => {
        CorpusItem {
            name: $name,
            program: include_str!(concat!("../corpus/", $name, ".imp")),
            spec: include_str!(concat!("../corpus/", $name, ".spec")),
            solution: $sol,
        }
    };
}

pub fn corpus() -> Vec<CorpusItem> {
    vec![
        item!("fibonacci"),
        item!("gcd"),
        item!("integer_division"),
        item!("remainder"),
        item!("sum_first_integers"),
        item!("integer_multiplication"),
        item!("hanoi"),
        item!("lucas"),
        item!("padovan"),
        item!("perrin"),
        item!("doubling", Some(include_str!("../corpus/doubling.sigma"))),
        item!("add", Some(include_str!("../corpus/add.sigma"))),
        item!("subtract", Some(include_str!("../corpus/subtract.sigma"))),
    ]
}

pub fn find(name: &str) -> Option<CorpusItem> {
    corpus().into_iter().find(|c| c.name == name)
}

/// Adds `delta` to the result argument of the first clause of the
/// specified function that has no recursive call, returning the new
/// specification text.
pub fn mutate_base_case(spec: &str, delta: i64) -> Result<String, SpecError> {
    let mut t = parse_spec(spec)?;
    let clauses: Vec<Clause> = t.spec.clauses().to_vec();
    let i = clauses
        .iter()
        .position(|c| c.head_pred() == Some(t.post.as_str()) && c.body.iter().all(|a| a.pred != t.post))
        .ok_or_else(|| SpecError::EmptyDefinition(t.post.clone()))?;
    let mut c = clauses[i].clone();
    let h = c.head.as_mut().unwrap();
    let last = h.args.last().unwrap().to_expr() + LinExpr::constant_int(BigInt::from(delta));
    let mut args = h.args.clone();
    *args.last_mut().unwrap() = Term::from_expr(last);
    *h = Atom::new(h.pred.clone(), args);
    let mut out = clauses;
    out[i] = c;
    t.spec = ClauseSet::from_clauses(out).expect("same signature");
    Ok(t.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::Problem;

    #[test]
    fn every_item_loads() {
        for c in corpus() {
            Problem::load(c.program, c.spec).unwrap_or_else(|e| panic!("{}: {e}", c.name));
        }
        assert!(corpus().len() >= 10);
    }

    #[test]
    fn base_case_mutation() {
        let c = find("fibonacci").unwrap();
        let m = mutate_base_case(c.spec, 1).unwrap();
        let t = parse_spec(&m).unwrap();
        assert_eq!(t.spec.clauses()[0].to_string(), "fib(0,2).");
        assert_eq!(t.spec.clauses()[1].to_string(), "fib(1,1).");
        let g = find("gcd").unwrap();
        let m = mutate_base_case(g.spec, -1).unwrap();
        assert!(m.contains("gcd(X,X,X-1)"), "{m}");
    }

    #[test]
    fn bundled_solutions_verify_before_and_after_linearization() {
        use crate::pipeline::run_pipeline;
        use crate::solve::{parse_solution, transport_solution, verify_solution};
        let mut n = 0;
        for c in corpus() {
            let Some(text) = c.solution else { continue };
            let st = run_pipeline(c.program, c.spec).unwrap();
            let sigma = parse_solution(text).unwrap();
            let r = verify_solution(&st.after_ri, &sigma).unwrap();
            assert!(r.all_valid(), "{}: {:?}", c.name, r);
            let t = transport_solution(&sigma, &st.lin.defs).unwrap();
            let r = verify_solution(&st.lin.clauses, &t).unwrap();
            assert!(r.all_valid(), "{}: {:?}", c.name, r);
            n += 1;
        }
        assert!(n >= 3);
    }
}
