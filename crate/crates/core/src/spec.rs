//! Functional Horn specifications: a triple `{pre} prog {f(P1,...,Ps,z)}`
//! followed by the clauses defining `f` and its auxiliary predicates.
//!
//! ```text
//! spec     ::= ["triple"] "{" binding ("," binding)* "}" ident "{" post "}" clause*
//! binding  ::= var "=" Param | var "=" int | atom | expr rel expr
//! post     ::= ident "(" Param ("," Param)* "," var ")"
//! ```
//!
//! Program variables are lowercase, parameters uppercase. A binding `u=1`
//! pins a program variable to a constant; any other non-binding item is part
//! of the precondition over the parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;

use crate::chc::{Atom, Clause, ClauseSet, Parser, Term};
use crate::imp::ImpProgram;
use crate::lin::{entails, sat_z, Entailment, LinAtomicRel, LinConstraint, LinExpr, Var, ZSat};
use crate::solve::{Control, Engine, Query};
use crate::syntax::{ParseError, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Param(Var),
    Const(BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("`{pred}` occurs in an auxiliary clause: {clause}")]
    PostInAux { pred: String, clause: String },
    #[error("auxiliary clause is not linear: {0}")]
    NonlinearAux(String),
    #[error("specifications cannot contain goals: {0}")]
    Goal(String),
    #[error("`{0}` is not a variable of the program")]
    UnknownVariable(String),
    #[error("program variable `{0}` is bound twice")]
    DuplicateBinding(String),
    #[error("parameter `{0}` of the postcondition is not bound to a program variable")]
    UnboundParam(String),
    #[error("parameter `{0}` is bound but does not occur in the postcondition")]
    UnusedParam(String),
    #[error("precondition mentions `{0}`, which is not a parameter")]
    PreVariable(String),
    #[error("`{pred}` has arity {found} but the postcondition needs {expected}")]
    Arity { pred: String, expected: usize, found: usize },
    #[error("no clause defines `{0}`")]
    EmptyDefinition(String),
}

/// A parsed and partitioned specification.
#[derive(Debug, Clone)]
pub struct SpecTriple {
    pub program: String,
    /// Program variables in binding order.
    pub bindings: Vec<(String, Binding)>,
    pub pre: LinConstraint,
    pub pre_atoms: Vec<Atom>,
    pub post: String,
    pub params: Vec<Var>,
    pub result_var: String,
    pub spec: ClauseSet,
}

impl SpecTriple {
    /// Clauses whose head predicate is the postcondition.
    pub fn f_def(&self) -> Vec<&Clause> {
        self.spec.iter().filter(|c| c.head_pred() == Some(self.post.as_str())).collect()
    }

    pub fn aux(&self) -> Vec<&Clause> {
        self.spec.iter().filter(|c| c.head_pred() != Some(self.post.as_str())).collect()
    }

    pub fn binding(&self, var: &str) -> Option<&Binding> {
        self.bindings.iter().find(|(v, _)| v == var).map(|(_, b)| b)
    }

    /// Validates the triple against the program's variables.
    pub fn check_against(&self, p: &ImpProgram) -> Result<(), SpecError> {
        for (v, _) in &self.bindings {
            if !p.vars.contains(v) {
                return Err(SpecError::UnknownVariable(v.clone()));
            }
        }
        if !p.vars.contains(&self.result_var) {
            return Err(SpecError::UnknownVariable(self.result_var.clone()));
        }
        Ok(())
    }

    /// The environment tuple: bound variables in binding order, then the
    /// remaining program variables in program order.
    pub fn env_order(&self, vars: &[String]) -> Vec<String> {
        let mut out: Vec<String> = self.bindings.iter().map(|(v, _)| v.clone()).collect();
        for v in vars {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    /// `pre(P1,...,Ps) :- c, atoms.`
    pub fn pre_clause(&self) -> Clause {
        Clause::new(Some(Atom::with_vars("pre", &self.params)), self.pre.clone(), self.pre_atoms.clone())
    }

    /// Initial environment of the program for the given parameter values.
    /// Unbound variables start at 0.
    pub fn initial_env(&self, vars: &[String], args: &[BigInt]) -> BTreeMap<String, BigInt> {
        let vals: BTreeMap<&Var, &BigInt> = self.params.iter().zip(args).collect();
        vars.iter()
            .map(|v| {
                let x = match self.binding(v) {
                    Some(Binding::Param(q)) => vals.get(q).map(|x| (*x).clone()).unwrap_or_default(),
                    Some(Binding::Const(c)) => c.clone(),
                    None => BigInt::from(0),
                };
                (v.clone(), x)
            })
            .collect()
    }
}

impl fmt::Display for SpecTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items: Vec<String> = self
            .bindings
            .iter()
            .map(|(v, b)| match b {
                Binding::Param(p) => format!("{v}={p}"),
                Binding::Const(c) => format!("{v}={c}"),
            })
            .collect();
        items.extend(self.pre.conjuncts().iter().map(|r| r.to_string()));
        items.extend(self.pre_atoms.iter().map(|a| a.to_string()));
        let mut args: Vec<String> = self.params.iter().map(|p| p.to_string()).collect();
        args.push(self.result_var.clone());
        writeln!(f, "{{{}}} {} {{{}({})}}", items.join(", "), self.program, self.post, args.join(","))?;
        write!(f, "{}", self.spec)
    }
}

enum Item {
    Bind(String, Binding),
    Rel(LinAtomicRel),
    Atom(Atom),
}

fn binding_item(p: &mut Parser) -> Result<Item, ParseError> {
    if let (Tok::Ident(v), Tok::Eq) = (p.peek().clone(), p.peek_at(1).clone()) {
        p.next();
        p.next();
        let e = p.expr()?;
        if let Some(q) = e.as_var() {
            return Ok(Item::Bind(v, Binding::Param(q.clone())));
        }
        if let Some(n) = e.as_int() {
            return Ok(Item::Bind(v, Binding::Const(n)));
        }
        return Err(p.error(format!("`{v}` must be bound to a parameter or an integer")));
    }
    if matches!(p.peek(), Tok::Ident(_)) {
        return Ok(Item::Atom(p.atom()?));
    }
    let mut alts = p.relation()?;
    if alts.len() != 1 {
        return Err(p.error("disequalities are not allowed in a precondition"));
    }
    let (mut rels, _) = alts.remove(0);
    Ok(Item::Rel(rels.remove(0)))
}

/// Parses a specification file.
pub fn parse_spec(text: &str) -> Result<SpecTriple, SpecError> {
    let mut p = Parser::new(text)?;
    if matches!(p.peek(), Tok::Ident(s) if s == "triple") {
        p.next();
    }
    p.expect(Tok::LBrace)?;
    let mut bindings: Vec<(String, Binding)> = Vec::new();
    let mut pre = Vec::new();
    let mut pre_atoms = Vec::new();
    if *p.peek() != Tok::RBrace {
        loop {
            match binding_item(&mut p)? {
                Item::Bind(v, b) => {
                    if bindings.iter().any(|(w, _)| *w == v) {
                        return Err(SpecError::DuplicateBinding(v));
                    }
                    bindings.push((v, b));
                }
                Item::Rel(r) => pre.push(r),
                Item::Atom(a) => pre_atoms.push(a),
            }
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    p.expect(Tok::RBrace)?;
    let program = p.ident()?;
    p.expect(Tok::LBrace)?;
    let post = p.ident()?;
    p.expect(Tok::LParen)?;
    let mut params = Vec::new();
    let result_var;
    loop {
        if let Tok::Ident(v) = p.peek().clone() {
            p.next();
            result_var = v;
            break;
        }
        let e = p.expr()?;
        match e.as_var() {
            Some(v) => params.push(v.clone()),
            None => return Err(p.error("postcondition arguments must be parameters").into()),
        }
        if !p.eat(&Tok::Comma) {
            return Err(p.error("the last postcondition argument must be a program variable").into());
        }
    }
    p.expect(Tok::RParen)?;
    p.expect(Tok::RBrace)?;
    let mut spec = ClauseSet::new();
    while !p.at_eof() {
        let (line, col) = p.position();
        for c in p.clause()? {
            spec.push(c).map_err(|e| ParseError::new(line, col, e.to_string()))?;
        }
    }
    let t = SpecTriple { program, bindings, pre: LinConstraint::new(pre), pre_atoms, post, params, result_var, spec };
    validate(&t)?;
    Ok(t)
}

fn validate(t: &SpecTriple) -> Result<(), SpecError> {
    let bound: BTreeSet<&Var> = t
        .bindings
        .iter()
        .filter_map(|(_, b)| match b {
            Binding::Param(q) => Some(q),
            Binding::Const(_) => None,
        })
        .collect();
    for q in &t.params {
        if !bound.contains(q) {
            return Err(SpecError::UnboundParam(q.to_string()));
        }
    }
    for q in &bound {
        if !t.params.contains(q) {
            return Err(SpecError::UnusedParam(q.to_string()));
        }
    }
    for v in t.pre.vars().iter().chain(t.pre_atoms.iter().flat_map(|a| a.vars()).collect::<Vec<_>>().iter()) {
        if !t.params.contains(v) {
            return Err(SpecError::PreVariable(v.to_string()));
        }
    }
    if let Some(n) = t.spec.arity(&t.post) {
        if n != t.params.len() + 1 {
            return Err(SpecError::Arity { pred: t.post.clone(), expected: t.params.len() + 1, found: n });
        }
    }
    for c in t.spec.iter() {
        if c.is_goal() {
            return Err(SpecError::Goal(c.to_string()));
        }
    }
    for c in t.aux() {
        if c.body.iter().any(|a| a.pred == t.post) {
            return Err(SpecError::PostInAux { pred: t.post.clone(), clause: c.to_string() });
        }
        if !c.is_linear() {
            return Err(SpecError::NonlinearAux(c.to_string()));
        }
    }
    if t.pre_atoms.iter().any(|a| a.pred == t.post) {
        return Err(SpecError::PostInAux { pred: t.post.clone(), clause: "precondition".into() });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleStatus {
    /// Exactly one result value was derived.
    Unique(BigInt),
    /// No derivation within the depth bound: totality unconfirmed.
    NoValue,
    /// Two or more distinct values: the specification is not functional.
    NotFunctional(Vec<BigInt>),
    /// The sample does not satisfy the precondition (or it could not be
    /// confirmed within the bound).
    OutsidePre,
    /// Budget or branch-and-bound limits were hit.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalityReport {
    pub samples: Vec<(Vec<BigInt>, SampleStatus)>,
}

impl FunctionalityReport {
    pub fn violations(&self) -> usize {
        self.samples.iter().filter(|(_, s)| matches!(s, SampleStatus::NotFunctional(_))).count()
    }

    pub fn values(&self) -> Vec<Option<BigInt>> {
        self.samples
            .iter()
            .map(|(_, s)| match s {
                SampleStatus::Unique(v) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for FunctionalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (args, s) in &self.samples {
            let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            write!(f, "({}): ", args.join(","))?;
            match s {
                SampleStatus::Unique(v) => writeln!(f, "{v}")?,
                SampleStatus::NoValue => writeln!(f, "no value derived (totality unconfirmed)")?,
                SampleStatus::NotFunctional(vs) => {
                    let vs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                    writeln!(f, "NOT FUNCTIONAL: {}", vs.join(", "))?
                }
                SampleStatus::OutsidePre => writeln!(f, "precondition not satisfied")?,
                SampleStatus::Unknown => writeln!(f, "unknown (limits reached)")?,
            }
        }
        Ok(())
    }
}

const SAMPLE_BUDGET: u64 = 1_000_000;
const Z_BUDGET: u64 = 10_000;

/// Values `y` with `f(args, y)` derivable within `depth`. `None` when a
/// limit was reached before the enumeration finished.
pub fn derivable_values(spec: &ClauseSet, f: &str, args: &[BigInt], depth: usize) -> Option<Vec<BigInt>> {
    let y = Var::new("_Y");
    let mut targs: Vec<Term> = args.iter().map(|a| Term::Int(a.clone())).collect();
    targs.push(Term::Var(y.clone()));
    let q = Query { constraint: LinConstraint::truth(), atoms: vec![Atom::new(f, targs)] };
    let engine = Engine::new(spec);
    let mut budget = SAMPLE_BUDGET;
    let mut values: Vec<BigInt> = Vec::new();
    let mut incomplete = false;
    let r = engine.explore(&q, depth, &mut budget, |c, _| {
        let w = match sat_z(c, Z_BUDGET) {
            ZSat::Sat(w) => w,
            ZSat::Unsat => return Control::Continue,
            ZSat::Unknown => {
                incomplete = true;
                return Control::Continue;
            }
        };
        let v = w.get(&y).cloned().unwrap_or_default();
        if !values.contains(&v) {
            values.push(v.clone());
        }
        let pinned = LinConstraint::single(LinAtomicRel::eq(LinExpr::var(y.clone()), LinExpr::constant_int(v)));
        match entails(c, &pinned) {
            Entailment::Valid => {}
            Entailment::Invalid(w2) => {
                let v2 = w2.get(&y).cloned().unwrap_or_default();
                if !values.contains(&v2) {
                    values.push(v2);
                }
            }
            Entailment::Unknown => incomplete = true,
        }
        if values.len() > 1 {
            Control::Stop
        } else {
            Control::Continue
        }
    });
    if values.len() > 1 {
        return Some(values);
    }
    if r.budget_exhausted || incomplete {
        return None;
    }
    Some(values)
}

/// Whether the parameter values satisfy the precondition, searching pre
/// atoms up to `depth`.
pub fn satisfies_pre(t: &SpecTriple, args: &[BigInt], depth: usize) -> bool {
    let env: BTreeMap<Var, LinExpr> =
        t.params.iter().cloned().zip(args.iter().map(|a| LinExpr::constant_int(a.clone()))).collect();
    let c = t.pre.substitute(&env);
    if c.is_false() {
        return false;
    }
    if t.pre_atoms.is_empty() {
        return c.is_true() || sat_z(&c, Z_BUDGET).is_sat();
    }
    let atoms = t.pre_atoms.iter().map(|a| a.substitute(&env)).collect();
    let engine = Engine::new(&t.spec);
    let mut budget = SAMPLE_BUDGET;
    let mut found = false;
    engine.explore(&Query { constraint: c, atoms }, depth, &mut budget, |leaf, _| {
        if sat_z(leaf, Z_BUDGET).is_sat() {
            found = true;
            Control::Stop
        } else {
            Control::Continue
        }
    });
    found
}

/// Bounded check of totality and functionality of the postcondition on
/// sampled parameter tuples.
pub fn check_functionality(t: &SpecTriple, samples: &[Vec<BigInt>], depth: usize) -> FunctionalityReport {
    let mut out = Vec::new();
    for args in samples {
        let status = if args.len() != t.params.len() || !satisfies_pre(t, args, depth) {
            SampleStatus::OutsidePre
        } else {
            match derivable_values(&t.spec, &t.post, args, depth) {
                None => SampleStatus::Unknown,
                Some(vs) if vs.is_empty() => SampleStatus::NoValue,
                Some(mut vs) if vs.len() == 1 => SampleStatus::Unique(vs.remove(0)),
                Some(vs) => SampleStatus::NotFunctional(vs),
            }
        };
        out.push((args.clone(), status));
    }
    FunctionalityReport { samples: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIB_SPEC: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}\n\
        S1. fib(0,1).\n\
        S2. fib(1,1).\n\
        S3. fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).\n";

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn fibonacci_triple() {
        let t = parse_spec(FIB_SPEC).unwrap();
        assert_eq!(t.program, "fibonacci");
        assert_eq!(t.params, vec![Var::new("N")]);
        assert_eq!(t.result_var, "u");
        assert_eq!(t.binding("u"), Some(&Binding::Const(BigInt::from(1))));
        assert_eq!(t.binding("n"), Some(&Binding::Param(Var::new("N"))));
        assert_eq!(t.pre.to_string(), "N>=0");
        assert_eq!(t.f_def().len(), 3);
        assert!(t.aux().is_empty());
    }

    #[test]
    fn identity_spec() {
        let t = parse_spec("triple {x=X} id {f(X,x)}\nf(X,X).").unwrap();
        assert_eq!(t.f_def().len(), 1);
        assert!(t.aux().is_empty());
    }

    #[test]
    fn post_in_aux_is_rejected() {
        let e = parse_spec("{x=X} p {f(X,x)}\nf(X,Y) :- g(X,Y).\ng(X,Y) :- f(X,Y).").unwrap_err();
        assert!(matches!(e, SpecError::PostInAux { .. }));
    }

    #[test]
    fn nonlinear_aux_is_rejected() {
        let e = parse_spec("{x=X} p {f(X,x)}\nf(X,Y) :- g(X,Y).\ng(X,Y) :- h(X), h(Y).").unwrap_err();
        assert!(matches!(e, SpecError::NonlinearAux(_)));
    }

    #[test]
    fn parameters_must_be_bound() {
        let e = parse_spec("{x=X} p {f(X,Y,x)}\nf(X,Y,X).").unwrap_err();
        assert_eq!(e, SpecError::UnboundParam("Y".into()));
    }

    #[test]
    fn unknown_program_variable() {
        let t = parse_spec("{w=X} p {f(X,x)}\nf(X,X).").unwrap();
        let p = crate::imp::parse_imp("x = x + 1; halt").unwrap();
        assert_eq!(t.check_against(&p), Err(SpecError::UnknownVariable("w".into())));
    }

    #[test]
    fn fibonacci_is_functional_on_samples() {
        let t = parse_spec(FIB_SPEC).unwrap();
        let samples: Vec<Vec<BigInt>> = (0..=6).map(|n| ints(&[n])).collect();
        let r = check_functionality(&t, &samples, 12);
        let expect: Vec<Option<BigInt>> = [1, 1, 2, 3, 5, 8, 13].iter().map(|&v| Some(BigInt::from(v))).collect();
        assert_eq!(r.values(), expect);
        assert_eq!(r.violations(), 0);
    }

    #[test]
    fn two_facts_are_not_functional() {
        let t = parse_spec("{x=X} p {f(X,x)}\nf(X,0).\nf(X,1).").unwrap();
        let r = check_functionality(&t, &[ints(&[3])], 4);
        assert_eq!(r.violations(), 1);
    }

    #[test]
    fn missing_base_case() {
        let t = parse_spec("{x=X} p {f(X,x)}\nf(X,Y) :- X>0, f(X-1,Y).").unwrap();
        let r = check_functionality(&t, &[ints(&[1])], 6);
        assert_eq!(r.samples[0].1, SampleStatus::NoValue);
    }

    #[test]
    fn samples_outside_pre() {
        let t = parse_spec(FIB_SPEC).unwrap();
        let r = check_functionality(&t, &[ints(&[-1])], 6);
        assert_eq!(r.samples[0].1, SampleStatus::OutsidePre);
    }
}
