//! Equivalence-preserving clause simplifications over the integers.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::Clause;
use crate::lin::{LinAtomicRel, LinConstraint, LinExpr, Var};

fn atom_vars(c: &Clause) -> BTreeSet<Var> {
    let mut s = c.head_vars();
    s.extend(c.body_vars());
    s
}

/// Removes variables that occur only in the constraint and are defined by
/// an equality in which they have coefficient ±1.
pub fn drop_defined_locals(c: &Clause) -> Clause {
    let keep = atom_vars(c);
    let mut rels: Vec<LinAtomicRel> = c.constraint.conjuncts().to_vec();
    'outer: loop {
        for (i, r) in rels.iter().enumerate() {
            if !r.is_equality() {
                continue;
            }
            for (x, k) in r.expr().coeffs() {
                if keep.contains(x) || !k.abs().is_one() {
                    continue;
                }
                // k*x + rest = 0  =>  x = -rest/k
                let rest = r.expr().clone() - LinExpr::term(x.clone(), k.clone());
                let def = rest * (-k.recip());
                let map = BTreeMap::from([(x.clone(), def)]);
                let next: Vec<LinAtomicRel> =
                    rels.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.substitute(&map)).collect();
                let c = LinConstraint::new(next);
                rels = c.conjuncts().to_vec();
                continue 'outer;
            }
        }
        break;
    }
    Clause::new(c.head.clone(), LinConstraint::new(rels), c.body.clone())
}

/// `x = y` between two variables.
fn alias(e: &LinExpr) -> Option<(Var, Var)> {
    if !e.constant_term().is_zero() || e.coeffs().len() != 2 {
        return None;
    }
    let mut it = e.coeffs().iter();
    let (x, a) = it.next()?;
    let (y, b) = it.next()?;
    if a.abs().is_one() && (a.clone() + b).is_zero() {
        Some((x.clone(), y.clone()))
    } else {
        None
    }
}

/// Replaces one side of every equality `X = Y` by the other, keeping the
/// variable that occurs first in the clause.
pub fn merge_aliases(c: &Clause) -> Clause {
    merge_aliases_where(c, |_, _, _| true)
}

/// Like [`merge_aliases`], restricted to the pairs accepted by `allow`.
pub fn merge_aliases_where(c: &Clause, allow: impl Fn(&Clause, &Var, &Var) -> bool) -> Clause {
    let mut c = c.clone();
    loop {
        let found = c
            .constraint
            .conjuncts()
            .iter()
            .filter(|r| r.is_equality())
            .filter_map(|r| alias(r.expr()))
            .find(|(x, y)| allow(&c, x, y));
        let Some((x, y)) = found else {
            return c;
        };
        let order = c.vars();
        let px = order.iter().position(|v| *v == x);
        let py = order.iter().position(|v| *v == y);
        let (keep, drop) = if px <= py { (x, y) } else { (y, x) };
        c = c.rename(&BTreeMap::from([(drop, keep)]));
    }
}

/// Identifies variables given the same definition by two equalities, such
/// as `X = U+V` and `Y = U+V`, or `X = 1` and `Y = 1`.
pub fn merge_equal_definitions(c: &Clause) -> Clause {
    let mut c = merge_aliases(c);
    loop {
        let eqs: Vec<&LinAtomicRel> = c.constraint.conjuncts().iter().filter(|r| r.is_equality()).collect();
        let mut found = None;
        'search: for (i, a) in eqs.iter().enumerate() {
            for b in &eqs[i + 1..] {
                for d in [a.expr().clone() - b.expr().clone(), a.expr().clone() + b.expr().clone()] {
                    if let Some(p) = alias(&d) {
                        found = Some(p);
                        break 'search;
                    }
                }
            }
        }
        let Some((x, y)) = found else {
            return c;
        };
        let extra = LinAtomicRel::eq(LinExpr::var(x), LinExpr::var(y));
        c = merge_aliases(&Clause::new(c.head.clone(), c.constraint.with(extra), c.body.clone()));
    }
}

/// Replaces every variable that the constraint pins to an integer constant
/// at the given argument positions, as in `L = 3, reach(L,...)`.
pub fn propagate_constants_at(c: &Clause, positions: impl Fn(&str) -> Vec<usize>) -> Clause {
    let mut c = c.clone();
    loop {
        let mut pinned: BTreeMap<Var, LinExpr> = BTreeMap::new();
        for a in c.body.iter() {
            for i in positions(&a.pred) {
                let Some(v) = a.args.get(i).and_then(|t| t.as_var()) else {
                    continue;
                };
                for r in c.constraint.conjuncts() {
                    if r.is_equality() && r.expr().coeffs().len() == 1 && r.expr().coeffs().contains_key(v) {
                        let k = r.expr().coeff(v);
                        let val = -r.expr().constant_term().clone() / k;
                        if val.is_integer() {
                            pinned.insert(v.clone(), LinExpr::constant(val));
                        }
                    }
                }
            }
        }
        if pinned.is_empty() {
            return c;
        }
        c = c.substitute(&pinned);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clause;

    #[test]
    fn locals_defined_by_equalities_disappear() {
        let c = parse_clause("false :- F3=F1+F2, Z>F3, r(N1,F1), r(N2,F2), r(N3,Z).").unwrap();
        let d = drop_defined_locals(&c);
        assert_eq!(d.to_string(), "false :- Z>F1+F2, r(N1,F1), r(N2,F2), r(N3,Z).");
    }

    #[test]
    fn non_unit_definitions_stay() {
        let c = parse_clause("p(X) :- 2*Y=X.").unwrap();
        assert_eq!(drop_defined_locals(&c), c);
    }

    #[test]
    fn aliases_keep_the_first_variable() {
        let c = parse_clause("r(N,U,V,T,N1,F,V1,T1) :- N=<0, N1=N, F=U, V1=V, T1=T.").unwrap();
        assert_eq!(merge_aliases(&c).to_string(), "r(N,U,V,T,N,U,V,T) :- N=<0.");
    }

    #[test]
    fn equal_definitions_are_shared() {
        let c = parse_clause("false :- U=1, V>=0, U2=1, T>=0, T=V, W=U+V, W2=U+V, p(U,V,T,U2,W,W2).").unwrap();
        let d = merge_equal_definitions(&c);
        assert_eq!(d.body[0].to_string(), "p(U,V,V,U,W,W)");
    }

    #[test]
    fn label_constants_propagate() {
        let c = parse_clause("p(X) :- L=3, M=X, reach(L,X,M).").unwrap();
        let d = propagate_constants_at(&c, |p| if p == "reach" { vec![0, 2] } else { vec![] });
        assert_eq!(d.body[0].to_string(), "reach(3,X,M)");
    }
}
