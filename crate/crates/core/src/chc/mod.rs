//! Constrained Horn clauses over the integers.

mod canon;
mod equiv;
mod parse;
mod simplify;
mod unify;

pub use canon::{canonicalize, canonicalize_with_renaming};
pub use equiv::{clause_sets_equivalent, clauses_equivalent, Mismatch};
pub use parse::{parse_clause, parse_clauses, Parser};
pub use simplify::{
    drop_defined_locals, merge_aliases, merge_aliases_where, merge_equal_definitions, propagate_constants_at,
};
pub use unify::{unify_atoms, unify_or_constrain};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;

use crate::lin::{LinAtomicRel, LinConstraint, LinExpr, Var, VarGen};

/// An argument of an atom: a variable, an integer, or a linear expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Int(BigInt),
    Lin(LinExpr),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn int(n: i64) -> Term {
        Term::Int(BigInt::from(n))
    }

    /// Folds an expression to the simplest term denoting it.
    pub fn from_expr(e: LinExpr) -> Term {
        if let Some(v) = e.as_var() {
            return Term::Var(v.clone());
        }
        if let Some(n) = e.as_int() {
            return Term::Int(n);
        }
        Term::Lin(e)
    }

    pub fn to_expr(&self) -> LinExpr {
        match self {
            Term::Var(v) => LinExpr::var(v.clone()),
            Term::Int(n) => LinExpr::constant_int(n.clone()),
            Term::Lin(e) => e.clone(),
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn vars(&self) -> Vec<Var> {
        match self {
            Term::Var(v) => vec![v.clone()],
            Term::Int(_) => vec![],
            Term::Lin(e) => e.vars().cloned().collect(),
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Int(_) => false,
            Term::Lin(e) => e.mentions(v),
        }
    }

    pub fn substitute(&self, map: &BTreeMap<Var, LinExpr>) -> Term {
        match self {
            Term::Var(v) => match map.get(v) {
                Some(e) => Term::from_expr(e.clone()),
                None => self.clone(),
            },
            Term::Int(_) => self.clone(),
            Term::Lin(e) => Term::from_expr(e.substitute(map)),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::Int(_) => self.clone(),
            Term::Lin(e) => Term::from_expr(e.rename(map)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Lin(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { pred: pred.into(), args }
    }

    /// An atom whose arguments are the given variables.
    pub fn with_vars(pred: impl Into<String>, vars: &[Var]) -> Self {
        Atom::new(pred, vars.iter().cloned().map(Term::Var).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in &self.args {
            for v in a.vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn is_flat(&self) -> bool {
        self.args.iter().all(Term::is_var)
    }

    pub fn substitute(&self, map: &BTreeMap<Var, LinExpr>) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.substitute(map)).collect() }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.rename(map)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// `head ← constraint, body`. A missing head means `false`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub head: Option<Atom>,
    pub constraint: LinConstraint,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Option<Atom>, constraint: LinConstraint, body: Vec<Atom>) -> Self {
        Clause { head, constraint, body }
    }

    pub fn fact(head: Atom, constraint: LinConstraint) -> Self {
        Clause::new(Some(head), constraint, vec![])
    }

    pub fn goal(constraint: LinConstraint, body: Vec<Atom>) -> Self {
        Clause::new(None, constraint, body)
    }

    pub fn is_goal(&self) -> bool {
        self.head.is_none()
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn is_linear(&self) -> bool {
        self.body.len() <= 1
    }

    pub fn head_pred(&self) -> Option<&str> {
        self.head.as_ref().map(|h| h.pred.as_str())
    }

    /// All variables in order of first occurrence: head, constraint, body.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |v: Var| {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        };
        if let Some(h) = &self.head {
            h.vars().into_iter().for_each(&mut push);
        }
        for r in self.constraint.conjuncts() {
            r.vars().cloned().for_each(&mut push);
        }
        for a in &self.body {
            a.vars().into_iter().for_each(&mut push);
        }
        out
    }

    pub fn head_vars(&self) -> BTreeSet<Var> {
        self.head.iter().flat_map(|h| h.vars()).collect()
    }

    pub fn body_vars(&self) -> BTreeSet<Var> {
        self.body.iter().flat_map(|a| a.vars()).collect()
    }

    pub fn substitute(&self, map: &BTreeMap<Var, LinExpr>) -> Clause {
        Clause {
            head: self.head.as_ref().map(|h| h.substitute(map)),
            constraint: self.constraint.substitute(map),
            body: self.body.iter().map(|a| a.substitute(map)).collect(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Clause {
        Clause {
            head: self.head.as_ref().map(|h| h.rename(map)),
            constraint: self.constraint.rename(map),
            body: self.body.iter().map(|a| a.rename(map)).collect(),
        }
    }

    /// A variant with every variable replaced by a fresh one.
    pub fn rename_apart(&self, gen: &mut VarGen) -> Clause {
        gen.reserve_all(self.vars().iter());
        let map: BTreeMap<Var, Var> = self.vars().into_iter().map(|v| (v, gen.fresh())).collect();
        self.rename(&map)
    }

    /// Moves every non-variable body argument into the constraint. Equal
    /// terms share one fresh variable.
    pub fn flatten(&self, gen: &mut VarGen) -> Clause {
        gen.reserve_all(self.vars().iter());
        let mut pinned: Vec<(Term, Var)> = Vec::new();
        let mut extra = Vec::new();
        let body = self
            .body
            .iter()
            .map(|a| {
                let args = a
                    .args
                    .iter()
                    .map(|t| {
                        if t.is_var() {
                            return t.clone();
                        }
                        if let Some((_, v)) = pinned.iter().find(|(u, _)| u == t) {
                            return Term::Var(v.clone());
                        }
                        let v = gen.fresh();
                        extra.push(LinAtomicRel::eq(LinExpr::var(v.clone()), t.to_expr()));
                        pinned.push((t.clone(), v.clone()));
                        Term::Var(v)
                    })
                    .collect();
                Atom::new(a.pred.clone(), args)
            })
            .collect();
        Clause {
            head: self.head.clone(),
            constraint: LinConstraint::new(self.constraint.conjuncts().iter().cloned().chain(extra)),
            body,
        }
    }
}

impl Clause {
    /// Renames generated variables (those starting with `_`) to `X1`, `X2`,
    /// ... avoiding the names already in use.
    pub fn tidy(&self) -> Clause {
        let vars = self.vars();
        let used: BTreeSet<&str> = vars.iter().map(|v| v.name()).filter(|n| !n.starts_with('_')).collect();
        let mut map = BTreeMap::new();
        let mut k = 0;
        for v in &vars {
            if !v.name().starts_with('_') {
                continue;
            }
            let name = loop {
                k += 1;
                let n = format!("X{k}");
                if !used.contains(n.as_str()) {
                    break n;
                }
            };
            map.insert(v.clone(), Var::new(name));
        }
        self.rename(&map)
    }
}

/// Flattens with a private fresh-variable source.
pub fn flatten(c: &Clause) -> Clause {
    let mut gen = VarGen::new();
    c.flatten(&mut gen)
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Some(h) => write!(f, "{h}")?,
            None => write!(f, "false")?,
        }
        if self.constraint.is_true() && self.body.is_empty() {
            if self.head.is_none() {
                write!(f, " :- true")?;
            }
            return write!(f, ".");
        }
        write!(f, " :- ")?;
        let mut first = true;
        for r in self.constraint.conjuncts() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
            first = false;
        }
        for a in &self.body {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
            first = false;
        }
        write!(f, ".")
    }
}

impl std::str::FromStr for Clause {
    type Err = crate::syntax::ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_clause(s)
    }
}

/// Variable bindings. Kept idempotent: no bound variable occurs in any
/// binding's right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// Adds `v ↦ t` and composes so the result stays idempotent. Returns
    /// `false` (and leaves `self` unchanged) when `t` mentions `v` or `v` is
    /// already bound.
    pub fn bind(&mut self, v: Var, t: Term) -> bool {
        let t = self.apply_term(&t);
        if t.as_var() == Some(&v) {
            return true;
        }
        if t.mentions(&v) || self.map.contains_key(&v) {
            return false;
        }
        let single: BTreeMap<Var, LinExpr> = [(v.clone(), t.to_expr())].into_iter().collect();
        for rhs in self.map.values_mut() {
            *rhs = rhs.substitute(&single);
        }
        self.map.insert(v, t);
        true
    }

    pub fn as_exprs(&self) -> BTreeMap<Var, LinExpr> {
        self.map.iter().map(|(k, t)| (k.clone(), t.to_expr())).collect()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.substitute(&self.as_exprs())
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.substitute(&self.as_exprs())
    }

    pub fn apply_constraint(&self, c: &LinConstraint) -> LinConstraint {
        c.substitute(&self.as_exprs())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        write!(f, "}}")
    }
}

pub fn apply_subst(c: &Clause, s: &Substitution) -> Clause {
    if s.is_empty() {
        return c.clone();
    }
    c.substitute(&s.as_exprs())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("predicate `{pred}` used with arity {found} but declared with arity {expected}")]
pub struct ArityError {
    pub pred: String,
    pub expected: usize,
    pub found: usize,
}

/// An ordered sequence of clauses with a consistent predicate signature.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClauseSet {
    clauses: Vec<Clause>,
    arities: BTreeMap<String, usize>,
}

impl ClauseSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = Clause>) -> Result<Self, ArityError> {
        let mut s = ClauseSet::new();
        for c in clauses {
            s.push(c)?;
        }
        Ok(s)
    }

    pub fn declare(&mut self, pred: &str, arity: usize) -> Result<(), ArityError> {
        match self.arities.get(pred) {
            Some(&a) if a != arity => Err(ArityError { pred: pred.to_string(), expected: a, found: arity }),
            _ => {
                self.arities.insert(pred.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn push(&mut self, c: Clause) -> Result<(), ArityError> {
        for a in c.head.iter().chain(c.body.iter()) {
            self.declare(&a.pred, a.arity())?;
        }
        self.clauses.push(c);
        Ok(())
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Clause>) -> Result<(), ArityError> {
        for c in cs {
            self.push(c)?;
        }
        Ok(())
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Clause> {
        self.clauses.iter()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn arity(&self, pred: &str) -> Option<usize> {
        self.arities.get(pred).copied()
    }

    pub fn signature(&self) -> &BTreeMap<String, usize> {
        &self.arities
    }

    pub fn goals(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.is_goal())
    }

    pub fn definite(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.is_goal())
    }

    pub fn defining(&self, pred: &str) -> impl Iterator<Item = &Clause> + '_ {
        let pred = pred.to_string();
        self.clauses.iter().filter(move |c| c.head_pred() == Some(pred.as_str()))
    }

    pub fn max_body_width(&self) -> usize {
        self.clauses.iter().map(|c| c.body.len()).max().unwrap_or(0)
    }

    pub fn all_linear(&self) -> bool {
        self.clauses.iter().all(Clause::is_linear)
    }

    /// Predicates occurring anywhere, in order of first occurrence.
    pub fn predicates(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.clauses {
            for a in c.head.iter().chain(c.body.iter()) {
                if !out.contains(&a.pred) {
                    out.push(a.pred.clone());
                }
            }
        }
        out
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a ClauseSet {
    type Item = &'a Clause;
    type IntoIter = std::slice::Iter<'a, Clause>;
    fn into_iter(self) -> Self::IntoIter {
        self.clauses.iter()
    }
}
