use crate::lin::{LinAtomicRel, LinExpr, Var};

use super::{Atom, Substitution, Term};

/// Most general unifier. Expressions unify only with variables or with
/// syntactically equal expressions.
pub fn unify_atoms(a1: &Atom, a2: &Atom) -> Option<Substitution> {
    if a1.pred != a2.pred || a1.arity() != a2.arity() {
        return None;
    }
    let mut s = Substitution::new();
    for (t1, t2) in a1.args.iter().zip(&a2.args) {
        let t1 = s.apply_term(t1);
        let t2 = s.apply_term(t2);
        if t1 == t2 {
            continue;
        }
        let ok = match (&t1, &t2) {
            (Term::Var(x), _) => s.bind(x.clone(), t2.clone()),
            (_, Term::Var(y)) => s.bind(y.clone(), t1.clone()),
            _ => false,
        };
        if !ok {
            return None;
        }
    }
    Some(s)
}

/// Unification modulo arithmetic: argument pairs that are not syntactically
/// unifiable become equality constraints. Variables satisfying `prefer` are
/// bound first, so callers can keep the names of one side. Returns `None`
/// only for predicate/arity mismatch or distinct integer constants.
pub fn unify_or_constrain(
    a1: &Atom,
    a2: &Atom,
    prefer: impl Fn(&Var) -> bool,
) -> Option<(Substitution, Vec<LinAtomicRel>)> {
    if a1.pred != a2.pred || a1.arity() != a2.arity() {
        return None;
    }
    let mut s = Substitution::new();
    let mut eqs: Vec<(Term, Term)> = Vec::new();
    for (t1, t2) in a1.args.iter().zip(&a2.args) {
        let t1 = s.apply_term(t1);
        let t2 = s.apply_term(t2);
        if t1 == t2 {
            continue;
        }
        if let (Term::Int(_), Term::Int(_)) = (&t1, &t2) {
            return None;
        }
        let mut order = [(&t1, &t2), (&t2, &t1)];
        if let Term::Var(y) = &t2 {
            if prefer(y) && !matches!(&t1, Term::Var(x) if prefer(x)) {
                order.swap(0, 1);
            }
        }
        let mut bound = false;
        for (l, r) in order {
            if let Term::Var(x) = l {
                if s.bind(x.clone(), r.clone()) {
                    bound = true;
                    break;
                }
            }
        }
        if !bound {
            eqs.push((t1, t2));
        }
    }
    let rels = eqs
        .iter()
        .map(|(l, r)| {
            let l: LinExpr = s.apply_term(l).to_expr();
            let r: LinExpr = s.apply_term(r).to_expr();
            LinAtomicRel::eq(l, r)
        })
        .collect();
    Some((s, rels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clause;

    fn atom(s: &str) -> Atom {
        parse_clause(&format!("{s}.")).unwrap().head.unwrap()
    }

    #[test]
    fn binds_variables() {
        let s = unify_atoms(&atom("r(N,U)"), &atom("r(5,F)")).unwrap();
        assert_eq!(s.get(&Var::new("N")), Some(&Term::int(5)));
        assert_eq!(s.get(&Var::new("U")), Some(&Term::var("F")));
    }

    #[test]
    fn predicate_mismatch() {
        assert!(unify_atoms(&atom("p(X)"), &atom("q(X)")).is_none());
        assert!(unify_atoms(&atom("p(1)"), &atom("p(2)")).is_none());
        assert!(unify_atoms(&atom("p(X+1)"), &atom("p(Y+1)")).is_none());
    }

    #[test]
    fn unifier_equalizes() {
        let a = atom("p(X,Y,X)");
        let b = atom("p(Z,Z+1,W)");
        let s = unify_atoms(&a, &b).unwrap();
        assert_eq!(s.apply_atom(&a), s.apply_atom(&b));
    }

    #[test]
    fn constrain_falls_back_to_equalities() {
        let a = atom("p(X,X)");
        let b = atom("p(Y+1,Y)");
        let (s, eqs) = unify_or_constrain(&a, &b, |_| false).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!(eqs[0].is_false() || s.apply_atom(&a) != s.apply_atom(&b));
        let (_, eqs) = unify_or_constrain(&atom("p(X+1)"), &atom("p(2*Y)"), |_| false).unwrap();
        assert_eq!(eqs.len(), 1);
    }

    #[test]
    fn preferred_side_is_bound() {
        let (s, _) = unify_or_constrain(&atom("p(A)"), &atom("p(B)"), |v| v.name() == "B").unwrap();
        assert_eq!(s.get(&Var::new("B")), Some(&Term::var("A")));
    }
}
