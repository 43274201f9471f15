//! Integer satisfiability by branch and bound over the rational procedure.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use super::fm::{witness_q, FmConfig};
use super::{LinAtomicRel, LinConstraint, LinExpr, Rat, Rel, Var, VarGen};

pub const DEFAULT_BRANCH_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZSat {
    Sat(BTreeMap<Var, BigInt>),
    Unsat,
    Unknown,
}

impl ZSat {
    pub fn is_sat(&self) -> bool {
        matches!(self, ZSat::Sat(_))
    }
}

/// Integer satisfiability. Explores at most `budget` branch-and-bound nodes;
/// `Unknown` when that runs out or a node exceeds the elimination budget.
pub fn sat_z(c: &LinConstraint, budget: u64) -> ZSat {
    if c.is_false() {
        return ZSat::Unsat;
    }
    let vars = c.vars();
    let Some((root, defs)) = eliminate_equalities(tighten(c), &vars) else {
        return ZSat::Unsat;
    };
    let mut stack = vec![root];
    let mut nodes = 0u64;
    let mut unknown = false;
    while let Some(node) = stack.pop() {
        nodes += 1;
        if nodes > budget {
            return ZSat::Unknown;
        }
        let model = match witness_q(&node, FmConfig::default()) {
            Ok(Some(m)) => m,
            Ok(None) => continue,
            Err(_) => {
                unknown = true;
                continue;
            }
        };
        let fractional = model.iter().find(|(_, val)| !val.is_integer());
        match fractional {
            None => {
                let mut out: BTreeMap<Var, BigInt> = model.into_iter().map(|(k, v)| (k, v.to_integer())).collect();
                for (x, e) in defs.iter().rev() {
                    for v in e.vars() {
                        out.entry(v.clone()).or_default();
                    }
                    let val = e.eval_int(&out).expect("assigned").to_integer();
                    out.insert(x.clone(), val);
                }
                out.retain(|v, _| vars.contains(v));
                for v in &vars {
                    out.entry(v.clone()).or_default();
                }
                debug_assert_eq!(c.holds_int(&out), Some(true));
                return ZSat::Sat(out);
            }
            Some((x, val)) => {
                let x = LinExpr::var(x.clone());
                let down = LinAtomicRel::new(x.clone(), Rel::Le, LinExpr::constant(val.floor()));
                let up = LinAtomicRel::new(x, Rel::Ge, LinExpr::constant(val.ceil()));
                stack.push(node.with(up));
                stack.push(node.with(down));
            }
        }
    }
    if unknown {
        ZSat::Unknown
    } else {
        ZSat::Unsat
    }
}

fn tighten(c: &LinConstraint) -> LinConstraint {
    LinConstraint::new(c.conjuncts().iter().map(LinAtomicRel::tightened))
}

/// Removes the equalities of `c` by integral unimodular substitutions,
/// returning the remaining inequalities and the substitutions in the order
/// they were made. `None` when some equality has no integer solution.
fn eliminate_equalities(
    mut c: LinConstraint,
    vars: &std::collections::BTreeSet<Var>,
) -> Option<(LinConstraint, Vec<(Var, LinExpr)>)> {
    let mut gen = VarGen::with_prefix("_k");
    gen.reserve_all(vars);
    let mut defs = Vec::new();
    loop {
        if c.is_false() {
            return None;
        }
        let Some(eq) = c.conjuncts().iter().find(|r| r.is_equality()) else {
            return Some((c, defs));
        };
        let e = eq.expr();
        let (x, a) =
            e.coeffs().iter().min_by_key(|(_, k)| k.numer().abs()).map(|(v, k)| (v.clone(), k.to_integer()))?;
        let def = if a.abs().is_one() {
            // a·x + rest = 0  gives  x = -rest / a
            (LinExpr::term(x.clone(), Rat::from_integer(a.clone())) - e.clone()) * Rat::from_integer(a)
        } else {
            // x = t - Σ ⌊aᵢ/a⌋·xᵢ - ⌊c/a⌋ leaves a·t + Σ (aᵢ mod a)·xᵢ + (c mod a) = 0
            let mut d = LinExpr::var(gen.fresh());
            for (v, k) in e.coeffs() {
                if *v != x {
                    d = d - LinExpr::term(v.clone(), Rat::from_integer(k.to_integer().div_floor(&a)));
                }
            }
            d - LinExpr::constant_int(e.constant_term().to_integer().div_floor(&a))
        };
        let map = BTreeMap::from([(x.clone(), def.clone())]);
        c = tighten(&c.substitute(&map));
        defs.push((x, def));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Entailment {
    Valid,
    /// An integer model of `c1` violating `c2`.
    Invalid(BTreeMap<Var, BigInt>),
    Unknown,
}

/// Whether every integer model of `c1` satisfies `c2`.
pub fn entails(c1: &LinConstraint, c2: &LinConstraint) -> Entailment {
    entails_with(c1, c2, DEFAULT_BRANCH_BUDGET)
}

pub fn entails_with(c1: &LinConstraint, c2: &LinConstraint, budget: u64) -> Entailment {
    let mut unknown = false;
    for d in c2.conjuncts() {
        for alt in d.negate_int() {
            match sat_z(&c1.with(alt), budget) {
                ZSat::Sat(m) => return Entailment::Invalid(m),
                ZSat::Unknown => unknown = true,
                ZSat::Unsat => {}
            }
        }
    }
    if unknown {
        Entailment::Unknown
    } else {
        Entailment::Valid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin::{sat_q, QSat, Rat};

    fn v(name: &str) -> LinExpr {
        LinExpr::var(Var::new(name))
    }
    fn k(n: i64) -> LinExpr {
        LinExpr::constant_int(n)
    }
    fn rel(a: LinExpr, r: Rel, b: LinExpr) -> LinAtomicRel {
        LinAtomicRel::new(a, r, b)
    }

    #[test]
    fn rational_but_not_integer() {
        // 2X = 1
        let c = LinConstraint::single(rel(v("X") * Rat::from_integer(2.into()), Rel::Eq, k(1)));
        assert_eq!(sat_q(&c).unwrap(), QSat::Sat);
        assert_eq!(sat_z(&c, 100), ZSat::Unsat);
        // 0 < 3X < 3
        let c = LinConstraint::new([
            rel(v("X") * Rat::from_integer(3.into()), Rel::Gt, k(0)),
            rel(v("X") * Rat::from_integer(3.into()), Rel::Lt, k(3)),
        ]);
        assert_eq!(sat_z(&c, 100), ZSat::Unsat);
    }

    #[test]
    fn branching_finds_integer_point() {
        // 2X + 2Y = 6 + 2Z, 3X - Y >= 1, X <= 5
        let two = Rat::from_integer(2.into());
        let c = LinConstraint::new([
            rel(v("X") * two.clone() + v("Y") * two.clone(), Rel::Eq, k(6) + v("Z") * two),
            rel(v("X") * Rat::from_integer(3.into()) - v("Y"), Rel::Ge, k(1)),
            rel(v("X"), Rel::Le, k(5)),
            rel(v("Z"), Rel::Ge, k(0)),
        ]);
        match sat_z(&c, 1000) {
            ZSat::Sat(m) => assert_eq!(c.holds_int(&m), Some(true)),
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_equalities() {
        let n = |i: i64| Rat::from_integer(i.into());
        // 2X + 2Y + 3Z = -1 has integer points in every direction
        let c = LinConstraint::single(rel(v("X") * n(2) + v("Y") * n(2) + v("Z") * n(3), Rel::Eq, k(-1)));
        match sat_z(&c, 50) {
            ZSat::Sat(m) => assert_eq!(c.holds_int(&m), Some(true)),
            other => panic!("{other:?}"),
        }
        assert_eq!(entails(&c, &c), Entailment::Valid);
        // 6X + 10Y = 15Z + 1 and 6X + 9Y = 3
        let c = LinConstraint::new([
            rel(v("X") * n(6) + v("Y") * n(10), Rel::Eq, v("Z") * n(15) + k(1)),
            rel(v("X") * n(6) + v("Y") * n(9), Rel::Eq, k(3)),
            rel(v("X"), Rel::Ge, k(7)),
        ]);
        match sat_z(&c, 50) {
            ZSat::Sat(m) => assert_eq!(c.holds_int(&m), Some(true)),
            other => panic!("{other:?}"),
        }
        // 4X + 6Y = 9Z + 1 and Z = 2W
        let c = LinConstraint::new([
            rel(v("X") * n(4) + v("Y") * n(6), Rel::Eq, v("Z") * n(9) + k(1)),
            rel(v("Z"), Rel::Eq, v("W") * n(2)),
        ]);
        assert_eq!(sat_z(&c, 50), ZSat::Unsat);
    }

    #[test]
    fn entailment() {
        let c1 = LinConstraint::new([rel(v("X"), Rel::Ge, k(1)), rel(v("Y"), Rel::Eq, v("X") + k(1))]);
        let c2 = LinConstraint::single(rel(v("Y"), Rel::Gt, k(1)));
        assert_eq!(entails(&c1, &c2), Entailment::Valid);
        let c3 = LinConstraint::single(rel(v("Y"), Rel::Gt, k(2)));
        match entails(&c1, &c3) {
            Entailment::Invalid(m) => {
                assert_eq!(c1.holds_int(&m), Some(true));
                assert_eq!(c3.holds_int(&m), Some(false));
            }
            other => panic!("{other:?}"),
        }
        // X > 0 entails X >= 1 over the integers
        let gt = LinConstraint::single(rel(v("X"), Rel::Gt, k(0)));
        let ge = LinConstraint::single(rel(v("X"), Rel::Ge, k(1)));
        assert_eq!(entails(&gt, &ge), Entailment::Valid);
    }

    #[test]
    fn disequality_split() {
        // X = 3 entails X != ... is not expressible; check X=3 |= X=3 via both sides.
        let c1 = LinConstraint::single(rel(v("X"), Rel::Eq, k(3)));
        assert_eq!(entails(&c1, &c1), Entailment::Valid);
        let c2 = LinConstraint::single(rel(v("X"), Rel::Eq, k(4)));
        assert!(matches!(entails(&c1, &c2), Entailment::Invalid(_)));
    }
}
