//! Depth-bounded SLD-style unfolding of a query against definite clauses.
//!
//! The leftmost atom is always expanded first. An atom created by expanding
//! an atom at level `d` sits at level `d + 1`; atoms at level `max_depth`
//! are not expanded, so every derivation branch uses at most `max_depth`
//! nested expansions. Branches whose constraint is unsatisfiable over the
//! rationals are dropped immediately.

use std::collections::{BTreeSet, HashMap};

use crate::chc::{Atom, Clause, ClauseSet, Term};
use crate::lin::{eliminate, sat_q, LinAtomicRel, LinConstraint, QSat, Var, VarGen};

/// Constraint and atoms still to be derived.
#[derive(Debug, Clone)]
pub struct Query {
    pub constraint: LinConstraint,
    pub atoms: Vec<Atom>,
}

impl Query {
    pub fn from_goal(c: &Clause) -> Self {
        Query { constraint: c.constraint.clone(), atoms: c.body.clone() }
    }
}

/// One expansion: `atom` (as it stood in the derivation) was resolved with
/// clause number `clause`, contributing `added`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub level: usize,
    pub atom: Atom,
    pub clause: usize,
    pub added: LinConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Exploration {
    /// Some branch still had atoms at the depth bound.
    pub truncated: bool,
    pub budget_exhausted: bool,
    pub stopped: bool,
    pub expansions: u64,
}

/// Resolves `atom` against a renamed-apart clause head: head variables are
/// bound to the atom's arguments, all other argument pairs become equalities.
/// `local` tells which variables belong to the renamed clause.
pub fn resolve_head(
    atom: &Atom,
    head: &Atom,
    local: impl Fn(&Var) -> bool,
) -> (crate::chc::Substitution, Vec<LinAtomicRel>) {
    let mut s = crate::chc::Substitution::new();
    let mut eqs = Vec::new();
    for (a, h) in atom.args.iter().zip(&head.args) {
        let h = s.apply_term(h);
        if let Term::Var(v) = &h {
            if local(v) && s.get(v).is_none() && s.bind(v.clone(), a.clone()) {
                continue;
            }
        }
        if *a != h {
            eqs.push(LinAtomicRel::eq(a.to_expr(), h.to_expr()));
        }
    }
    (s, eqs)
}

pub struct Engine<'a> {
    clauses: &'a [Clause],
    by_pred: HashMap<&'a str, Vec<usize>>,
}

struct Node {
    constraint: LinConstraint,
    /// `constraint` projected onto the variables of `atoms`; satisfiable
    /// over the rationals exactly when `constraint` is.
    live: LinConstraint,
    atoms: Vec<(Atom, usize)>,
    steps: Vec<Step>,
}

impl<'a> Engine<'a> {
    /// Uses the definite clauses of `set`; goals are ignored.
    pub fn new(set: &'a ClauseSet) -> Self {
        Self::from_slice(set.clauses())
    }

    pub fn from_slice(clauses: &'a [Clause]) -> Self {
        let mut by_pred: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, c) in clauses.iter().enumerate() {
            if let Some(p) = c.head_pred() {
                by_pred.entry(p).or_default().push(i);
            }
        }
        Engine { clauses, by_pred }
    }

    /// Visits every atom-free derivation of `q` within the depth bound, in
    /// depth-first order. `budget` is decremented once per expansion tried.
    pub fn explore(
        &self,
        q: &Query,
        max_depth: usize,
        budget: &mut u64,
        mut visit: impl FnMut(&LinConstraint, &[Step]) -> Control,
    ) -> Exploration {
        let mut out = Exploration::default();
        let mut gen = VarGen::with_prefix("_D");
        gen.reserve_all(q.constraint.vars().iter());
        for a in &q.atoms {
            gen.reserve_all(a.vars().iter());
        }
        if q.constraint.is_false() || sat_q(&q.constraint) == Ok(QSat::Unsat) {
            return out;
        }
        let mut stack = vec![Node {
            constraint: q.constraint.clone(),
            live: q.constraint.clone(),
            atoms: q.atoms.iter().map(|a| (a.clone(), 0)).collect(),
            steps: vec![],
        }];
        while let Some(node) = stack.pop() {
            if node.atoms.is_empty() {
                if visit(&node.constraint, &node.steps) == Control::Stop {
                    out.stopped = true;
                    return out;
                }
                continue;
            }
            let (atom, level) = node.atoms[0].clone();
            if level >= max_depth {
                out.truncated = true;
                continue;
            }
            let Some(cands) = self.by_pred.get(atom.pred.as_str()) else {
                continue;
            };
            let mut children = Vec::new();
            for &ci in cands {
                if *budget == 0 {
                    out.budget_exhausted = true;
                    return out;
                }
                *budget -= 1;
                out.expansions += 1;
                let k = self.clauses[ci].rename_apart(&mut gen);
                let head = k.head.as_ref().unwrap();
                let locals: BTreeSet<Var> = k.vars().into_iter().collect();
                let (s, eqs) = resolve_head(&atom, head, |v| locals.contains(v));
                let added = LinConstraint::new(
                    eqs.into_iter().chain(s.apply_constraint(&k.constraint).conjuncts().iter().cloned()),
                );
                let mut atoms: Vec<(Atom, usize)> = k.body.iter().map(|b| (s.apply_atom(b), level + 1)).collect();
                atoms.extend(node.atoms[1..].iter().cloned());
                let Some(live) = project_live(&node.live.and(&added), &atoms) else {
                    continue;
                };
                let constraint = node.constraint.and(&added);
                let mut steps = node.steps.clone();
                steps.push(Step { level, atom: atom.clone(), clause: ci, added });
                children.push(Node { constraint, live, atoms, steps });
            }
            // Preserve clause order in the depth-first traversal.
            stack.extend(children.into_iter().rev());
        }
        out
    }
}

/// Projects `c` onto the variables of `atoms`; `None` when `c` is
/// unsatisfiable over the rationals.
fn project_live(c: &LinConstraint, atoms: &[(Atom, usize)]) -> Option<LinConstraint> {
    if c.is_false() {
        return None;
    }
    let keep: BTreeSet<Var> = atoms.iter().flat_map(|(a, _)| a.vars()).collect();
    let drop: BTreeSet<Var> = c.vars().into_iter().filter(|v| !keep.contains(v)).collect();
    match eliminate(c, &drop) {
        Ok(p) if p.is_false() || sat_q(&p) == Ok(QSat::Unsat) => None,
        Ok(p) => Some(p),
        Err(_) => match sat_q(c) {
            Ok(QSat::Unsat) => None,
            _ => Some(c.clone()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::{parse_clause, parse_clauses};

    #[test]
    fn enumerates_within_depth() {
        let s = parse_clauses("nat(0).\nnat(N) :- N=M+1, nat(M).").unwrap();
        let e = Engine::new(&s);
        let q =
            Query { constraint: LinConstraint::truth(), atoms: vec![parse_clause("nat(X).").unwrap().head.unwrap()] };
        let mut budget = 1000;
        let mut leaves = 0;
        let r = e.explore(&q, 3, &mut budget, |_, _| {
            leaves += 1;
            Control::Continue
        });
        // nat(0), nat(1), nat(2) within three levels.
        assert_eq!(leaves, 3);
        assert!(r.truncated);
    }

    #[test]
    fn prunes_unsatisfiable_branches() {
        let s = parse_clauses("p(X) :- X<0.\np(X) :- X>0.").unwrap();
        let e = Engine::new(&s);
        let g = parse_clause("false :- X>5, p(X).").unwrap();
        let mut budget = 100;
        let mut leaves = vec![];
        e.explore(&Query::from_goal(&g), 4, &mut budget, |c, steps| {
            leaves.push((c.clone(), steps.len()));
            Control::Continue
        });
        assert_eq!(leaves.len(), 1);
    }

    #[test]
    fn budget_is_reported() {
        let s = parse_clauses("nat(0).\nnat(N) :- N=M+1, nat(M).").unwrap();
        let e = Engine::new(&s);
        let q =
            Query { constraint: LinConstraint::truth(), atoms: vec![parse_clause("nat(X).").unwrap().head.unwrap()] };
        let mut budget = 3;
        let r = e.explore(&q, 50, &mut budget, |_, _| Control::Continue);
        assert!(r.budget_exhausted);
    }
}
