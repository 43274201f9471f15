//! Renaming clauses to a representative of their alpha-equivalence class.
//!
//! Variables in argument position are numbered by first occurrence (head,
//! then body left to right). The remaining ones (inside expressions or only
//! in the constraint) are ordered by a signature of their occurrences,
//! refined as more variables get numbered; genuine ties are broken by trying
//! each candidate and keeping the smallest printed result.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Signed;

use crate::lin::{fmt_rat, LinExpr, Var};

use super::{Atom, Clause, Term};

const MAX_TIE_LEAVES: usize = 64;

pub fn canonicalize(c: &Clause) -> Clause {
    canonicalize_with_renaming(c).0
}

/// The canonical clause and the renaming that produced it.
pub fn canonicalize_with_renaming(c: &Clause) -> (Clause, BTreeMap<Var, Var>) {
    let mut order: Vec<Var> = Vec::new();
    let mut seen = BTreeSet::new();
    for a in c.head.iter().chain(c.body.iter()) {
        for t in &a.args {
            if let Term::Var(v) = t {
                if seen.insert(v.clone()) {
                    order.push(v.clone());
                }
            }
        }
    }
    let rest: BTreeSet<Var> = c.vars().into_iter().filter(|v| !seen.contains(v)).collect();
    let mut leaves = 0;
    let (clause, _, map) = complete(c, order, rest, &mut leaves);
    (clause, map)
}

fn complete(
    c: &Clause,
    mut order: Vec<Var>,
    mut rest: BTreeSet<Var>,
    leaves: &mut usize,
) -> (Clause, String, BTreeMap<Var, Var>) {
    while !rest.is_empty() {
        let idx: HashMap<&Var, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut sigs: Vec<(Vec<String>, Var)> = rest.iter().map(|v| (signature(c, v, &idx), v.clone())).collect();
        sigs.sort();
        let best = sigs[0].0.clone();
        let ties: Vec<Var> = sigs.iter().take_while(|(s, _)| *s == best).map(|(_, v)| v.clone()).collect();
        if ties.len() == 1 || *leaves >= MAX_TIE_LEAVES {
            let v = ties[0].clone();
            rest.remove(&v);
            order.push(v);
            continue;
        }
        let mut best_result: Option<(Clause, String, BTreeMap<Var, Var>)> = None;
        for v in ties {
            let mut o = order.clone();
            o.push(v.clone());
            let mut r = rest.clone();
            r.remove(&v);
            let cand = complete(c, o, r, leaves);
            if best_result.as_ref().is_none_or(|b| cand.1 < b.1) {
                best_result = Some(cand);
            }
        }
        return best_result.unwrap();
    }
    *leaves += 1;
    let map: BTreeMap<Var, Var> =
        order.iter().enumerate().map(|(i, v)| (v.clone(), Var::new(format!("V{i}")))).collect();
    let renamed = c.rename(&map);
    let clause = Clause { head: renamed.head, constraint: renamed.constraint.sorted(), body: renamed.body };
    let text = clause.to_string();
    (clause, text, map)
}

fn signature(c: &Clause, v: &Var, idx: &HashMap<&Var, usize>) -> Vec<String> {
    let mut ctx = Vec::new();
    let atoms: Vec<(String, &Atom)> = c
        .head
        .iter()
        .map(|h| ("h".to_string(), h))
        .chain(c.body.iter().enumerate().map(|(i, a)| (format!("b{i}"), a)))
        .collect();
    for (tag, a) in atoms {
        for (j, t) in a.args.iter().enumerate() {
            if let Term::Lin(e) = t {
                if e.mentions(v) {
                    ctx.push(format!("{tag}.{j}:{}", render(e, v, idx)));
                }
            }
        }
    }
    for r in c.constraint.conjuncts() {
        if r.expr().mentions(v) {
            let e = r.expr();
            let mut s = render(e, v, idx);
            if r.is_equality() {
                let n = render(&-e.clone(), v, idx);
                if n < s {
                    s = n;
                }
            }
            ctx.push(format!("{}:{s}", r.rel().symbol()));
        }
    }
    ctx.sort();
    ctx
}

fn render(e: &LinExpr, v: &Var, idx: &HashMap<&Var, usize>) -> String {
    let mut parts: Vec<String> = e
        .coeffs()
        .iter()
        .filter(|(w, _)| *w != v)
        .map(|(w, k)| match idx.get(w) {
            Some(i) => format!("{}*V{i}", fmt_rat(k)),
            None => format!("{}*?", fmt_rat(k)),
        })
        .collect();
    parts.sort();
    let k = e.constant_term();
    let sign = if k.is_negative() { "n" } else { "p" };
    format!("{}|{}|{sign}{}", fmt_rat(&e.coeff(v)), parts.join(","), fmt_rat(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::parse_clause;

    fn cl(s: &str) -> Clause {
        parse_clause(s).unwrap()
    }

    #[test]
    fn first_occurrence_numbering() {
        let c = canonicalize(&cl("p(X) :- X>0, q(X,Y)."));
        assert_eq!(c.to_string(), "p(V0) :- V0>0, q(V0,V1).");
        let d = canonicalize(&cl("p(A) :- A>0, q(A,B)."));
        assert_eq!(c, d);
    }

    #[test]
    fn constraint_only_variables_are_alpha_invariant() {
        let a = cl("p(X) :- X=Y+Z, Y>=0, Z>=1.");
        let b = cl("p(X) :- X=B+A, A>=1, B>=0.");
        assert_eq!(canonicalize(&a), canonicalize(&b));
        let g5 = cl("false :- N1>=0, N2=N1+1, N3=N2+1, F3>F1+F2, r(N1,F1), r(N2,F2), r(N3,F3).");
        let once = canonicalize(&g5);
        assert_eq!(canonicalize(&once), once);
    }

    #[test]
    fn symmetric_ties() {
        let a = cl("false :- A>B, B>C, C>A.");
        let b = cl("false :- Y>Z, X>Y, Z>X.");
        assert_eq!(canonicalize(&a), canonicalize(&b));
    }
}
