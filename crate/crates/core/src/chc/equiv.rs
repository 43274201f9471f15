//! Semantic comparison of clauses up to variable renaming.
//!
//! Two clauses are equivalent when they have the same predicate skeleton and
//! the constraints they impose on the argument positions agree over the
//! integers after projecting away all other variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lin::{eliminate, entails, Entailment, LinAtomicRel, LinConstraint, LinExpr, Var};

use super::{Atom, Clause};

#[derive(Debug, Clone, Default)]
pub struct Mismatch {
    pub only_left: Vec<Clause>,
    pub only_right: Vec<Clause>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.only_left {
            writeln!(f, "only in left:  {c}")?;
        }
        for c in &self.only_right {
            writeln!(f, "only in right: {c}")?;
        }
        Ok(())
    }
}

type Sig = (String, usize);

fn skeleton(c: &Clause) -> (Option<Sig>, Vec<Sig>) {
    let sk = |a: &Atom| (a.pred.clone(), a.arity());
    (c.head.as_ref().map(sk), c.body.iter().map(sk).collect())
}

/// The constraint a clause puts on its argument positions, named `P<i>_<j>`
/// (`i = 0` for the head, `i ≥ 1` for body atoms).
fn positional_constraint(c: &Clause) -> Option<LinConstraint> {
    let mut rels: Vec<LinAtomicRel> = c.constraint.conjuncts().to_vec();
    let mut positions = BTreeSet::new();
    let atoms = c.head.iter().map(|h| (0, h)).chain(c.body.iter().enumerate().map(|(i, a)| (i + 1, a)));
    for (i, a) in atoms {
        for (j, t) in a.args.iter().enumerate() {
            let p = Var::new(format!("P{i}_{j}#"));
            rels.push(LinAtomicRel::eq(LinExpr::var(p.clone()), t.to_expr()));
            positions.insert(p);
        }
    }
    let all = LinConstraint::new(rels);
    let others: BTreeSet<Var> = all.vars().into_iter().filter(|v| !positions.contains(v)).collect();
    eliminate(&all, &others).ok()
}

pub fn clauses_equivalent(a: &Clause, b: &Clause) -> bool {
    if skeleton(a) != skeleton(b) {
        return false;
    }
    let (Some(pa), Some(pb)) = (positional_constraint(a), positional_constraint(b)) else {
        return false;
    };
    entails(&pa, &pb) == Entailment::Valid && entails(&pb, &pa) == Entailment::Valid
}

/// Pairs every clause of `left` with a distinct equivalent clause of
/// `right`.
pub fn clause_sets_equivalent(left: &[Clause], right: &[Clause]) -> Result<(), Mismatch> {
    let mut used = vec![false; right.len()];
    let mut m = Mismatch::default();
    let mut cache: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    for (i, a) in left.iter().enumerate() {
        let hit = (0..right.len())
            .find(|&j| !used[j] && *cache.entry((i, j)).or_insert_with(|| clauses_equivalent(a, &right[j])));
        match hit {
            Some(j) => used[j] = true,
            None => m.only_left.push(a.clone()),
        }
    }
    for (j, b) in right.iter().enumerate() {
        if !used[j] {
            m.only_right.push(b.clone());
        }
    }
    if m.only_left.is_empty() && m.only_right.is_empty() {
        Ok(())
    } else {
        Err(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clause;

    fn cl(s: &str) -> Clause {
        parse_clause(s).unwrap()
    }

    #[test]
    fn renaming_and_flattening_do_not_matter() {
        let a = cl("r(N,U,V,T,N,U,V,T) :- N=<0.");
        let b = cl("r(A,B,C,D,E,F,G,H) :- A=<0, E=A, F=B, G=C, H=D.");
        assert!(clauses_equivalent(&a, &b));
        let c = cl("r(A,B,C,D,E,F,G,H) :- A=<0, E=A, F=B, G=C.");
        assert!(!clauses_equivalent(&a, &c));
    }

    #[test]
    fn sets() {
        let l = vec![cl("p(0)."), cl("p(X) :- X=Y+1, p(Y).")];
        let r = vec![cl("p(A) :- A=B+1, p(B)."), cl("p(Z) :- Z=0.")];
        assert!(clause_sets_equivalent(&l, &r).is_ok());
        let r2 = vec![cl("p(A) :- A=B+2, p(B)."), cl("p(Z) :- Z=0.")];
        let m = clause_sets_equivalent(&l, &r2).unwrap_err();
        assert_eq!(m.only_left.len(), 1);
    }
}
