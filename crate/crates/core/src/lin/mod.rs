//! Exact linear integer arithmetic.
//!
//! Constraints are conjunctions of atomic relations `e ⋈ 0` where `e` is a
//! linear expression with rational coefficients and `⋈` is one of `=`, `≥`,
//! `>`. Relations written with `≤` or `<` are flipped on construction, and
//! every relation is scaled to coprime integer coefficients, so two relations
//! with the same meaning over the rationals compare equal.
//!
//! Satisfiability over the rationals is decided by Fourier–Motzkin
//! elimination ([`sat_q`]); integer satisfiability uses branch and bound on
//! top of it ([`sat_z`]).

mod expr;
mod fm;
mod integer;

pub use expr::{LinExpr, Var, VarGen};
pub use fm::{eliminate, eliminate_with, sat_q, sat_q_with, witness_q, FmConfig, QSat};
pub use integer::{entails, entails_with, sat_z, Entailment, ZSat, DEFAULT_BRANCH_BUDGET};

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinError {
    #[error("elimination exceeded the budget of {0} intermediate rows")]
    ResourceLimit(usize),
}

/// Relation symbols as written by a user. Only `Eq`, `Ge` and `Gt` survive
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Ge,
    Gt,
    Le,
    Lt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Le => "=<",
            Rel::Lt => "<",
        }
    }

    fn flipped(self) -> Rel {
        match self {
            Rel::Eq => Rel::Eq,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
            Rel::Le => Rel::Ge,
            Rel::Lt => Rel::Gt,
        }
    }
}

/// A single normalized relation `expr ⋈ 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinAtomicRel {
    expr: LinExpr,
    rel: Rel,
}

impl LinAtomicRel {
    /// `lhs ⋈ rhs`.
    pub fn new(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> Self {
        Self::from_zero_form(lhs - rhs, rel)
    }

    /// `expr ⋈ 0`.
    pub fn from_zero_form(expr: LinExpr, rel: Rel) -> Self {
        let (expr, rel) = match rel {
            Rel::Le => (-expr, Rel::Ge),
            Rel::Lt => (-expr, Rel::Gt),
            r => (expr, r),
        };
        let mut expr = expr.scaled_to_coprime_integers();
        if rel == Rel::Eq {
            let leading_negative = match expr.coeffs().values().next() {
                Some(c) => c.is_negative(),
                None => expr.constant_term().is_negative(),
            };
            if leading_negative {
                expr = -expr;
            }
        }
        if expr.is_constant() {
            let holds = match rel {
                Rel::Eq => expr.constant_term().is_zero(),
                Rel::Ge => !expr.constant_term().is_negative(),
                Rel::Gt => expr.constant_term().is_positive(),
                _ => unreachable!(),
            };
            return if holds { Self::truth() } else { Self::falsity() };
        }
        LinAtomicRel { expr, rel }
    }

    pub fn truth() -> Self {
        LinAtomicRel { expr: LinExpr::zero(), rel: Rel::Eq }
    }

    pub fn falsity() -> Self {
        LinAtomicRel { expr: LinExpr::constant_int(-1), rel: Rel::Ge }
    }

    pub fn eq(lhs: LinExpr, rhs: LinExpr) -> Self {
        Self::new(lhs, Rel::Eq, rhs)
    }

    pub fn expr(&self) -> &LinExpr {
        &self.expr
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    pub fn is_ground(&self) -> bool {
        self.expr.is_constant()
    }

    pub fn is_true(&self) -> bool {
        *self == Self::truth()
    }

    pub fn is_false(&self) -> bool {
        *self == Self::falsity()
    }

    pub fn is_equality(&self) -> bool {
        self.rel == Rel::Eq
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.expr.coeffs().keys()
    }

    pub fn coeff(&self, v: &Var) -> Rat {
        self.expr.coeff(v)
    }

    pub fn substitute(&self, map: &BTreeMap<Var, LinExpr>) -> Self {
        Self::from_zero_form(self.expr.substitute(map), self.rel)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Self {
        Self::from_zero_form(self.expr.rename(map), self.rel)
    }

    /// Truth value under an assignment; `None` if a variable is unassigned.
    pub fn holds(&self, assignment: &BTreeMap<Var, Rat>) -> Option<bool> {
        let v = self.expr.eval(assignment)?;
        Some(match self.rel {
            Rel::Eq => v.is_zero(),
            Rel::Ge => !v.is_negative(),
            Rel::Gt => v.is_positive(),
            _ => unreachable!(),
        })
    }

    pub fn holds_int(&self, assignment: &BTreeMap<Var, BigInt>) -> Option<bool> {
        let rat: BTreeMap<Var, Rat> =
            assignment.iter().map(|(k, v)| (k.clone(), Rat::from_integer(v.clone()))).collect();
        self.holds(&rat)
    }

    /// Negation over the integers. Coefficients are integral after
    /// normalization, so `¬(e ≥ 0)` is `-e - 1 ≥ 0` and `¬(e > 0)` is
    /// `-e ≥ 0`. A negated equality yields two alternatives.
    pub fn negate_int(&self) -> Vec<LinAtomicRel> {
        let one = LinExpr::constant_int(1);
        match self.rel {
            Rel::Ge => vec![Self::from_zero_form(-self.expr.clone() - one, Rel::Ge)],
            Rel::Gt => vec![Self::from_zero_form(-self.expr.clone(), Rel::Ge)],
            Rel::Eq => vec![
                Self::from_zero_form(self.expr.clone() - one.clone(), Rel::Ge),
                Self::from_zero_form(-self.expr.clone() - one, Rel::Ge),
            ],
            _ => unreachable!(),
        }
    }

    /// Integer tightening: strict relations become non-strict, and
    /// coefficients are divided by their gcd with the constant rounded down.
    /// Equalities whose gcd does not divide the constant become false.
    pub(crate) fn tightened(&self) -> LinAtomicRel {
        if self.is_ground() {
            return self.clone();
        }
        let (expr, rel) = match self.rel {
            Rel::Gt => (self.expr.clone() - LinExpr::constant_int(1), Rel::Ge),
            r => (self.expr.clone(), r),
        };
        let g = expr.coeffs().values().fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()));
        if g.is_zero() || g.is_one() {
            return Self::from_zero_form(expr, rel);
        }
        let c = expr.constant_term().numer().clone();
        let g_rat = Rat::from_integer(g.clone());
        let mut coeffs = BTreeMap::new();
        for (v, k) in expr.coeffs() {
            coeffs.insert(v.clone(), k / &g_rat);
        }
        match rel {
            Rel::Eq => {
                if !(&c % &g).is_zero() {
                    return Self::falsity();
                }
                Self::from_zero_form(LinExpr::from_parts(coeffs, Rat::from_integer(c / g)), Rel::Eq)
            }
            _ => Self::from_zero_form(LinExpr::from_parts(coeffs, Rat::from_integer(c.div_floor(&g))), Rel::Ge),
        }
    }
}

impl fmt::Display for LinAtomicRel {
    /// Prints `lhs ⋈ rhs` with positive terms on the left, e.g. `N1=N-1`,
    /// `N=<0`, `F3>F1+F2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut left = LinExpr::zero();
        let mut right = LinExpr::zero();
        for (v, c) in self.expr.coeffs() {
            if c.is_positive() {
                left = left + LinExpr::term(v.clone(), c.clone());
            } else {
                right = right + LinExpr::term(v.clone(), -c.clone());
            }
        }
        right = right - LinExpr::constant(self.expr.constant_term().clone());
        if left.coeffs().is_empty() {
            // No positive terms: print `right ⋈' 0`-style with the relation flipped.
            let r = self.rel.flipped();
            if right.coeffs().is_empty() {
                return write!(f, "{}{}0", self.expr.constant_term(), self.rel.symbol());
            }
            // right ⋈' left, where left is 0: move the constant back.
            let k = right.constant_term().clone();
            let lhs = right - LinExpr::constant(k.clone());
            return write!(f, "{}{}{}", lhs, r.symbol(), fmt_rat(&-k));
        }
        write!(f, "{}{}{}", left, self.rel.symbol(), right)
    }
}

pub(crate) fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A conjunction of normalized relations. The empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinConstraint {
    conjuncts: Vec<LinAtomicRel>,
}

impl LinConstraint {
    pub fn truth() -> Self {
        Self::default()
    }

    pub fn falsity() -> Self {
        LinConstraint { conjuncts: vec![LinAtomicRel::falsity()] }
    }

    /// Builds a conjunction, dropping true conjuncts and exact duplicates.
    /// Any false conjunct collapses the whole constraint to `false`.
    pub fn new(rels: impl IntoIterator<Item = LinAtomicRel>) -> Self {
        let mut conjuncts: Vec<LinAtomicRel> = Vec::new();
        for r in rels {
            if r.is_true() {
                continue;
            }
            if r.is_false() {
                return Self::falsity();
            }
            if !conjuncts.contains(&r) {
                conjuncts.push(r);
            }
        }
        LinConstraint { conjuncts }
    }

    pub fn single(r: LinAtomicRel) -> Self {
        Self::new([r])
    }

    pub fn conjuncts(&self) -> &[LinAtomicRel] {
        &self.conjuncts
    }

    pub fn is_true(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn is_false(&self) -> bool {
        self.conjuncts.len() == 1 && self.conjuncts[0].is_false()
    }

    pub fn len(&self) -> usize {
        self.conjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn and(&self, other: &LinConstraint) -> LinConstraint {
        conjoin(self, other)
    }

    pub fn with(&self, r: LinAtomicRel) -> LinConstraint {
        Self::new(self.conjuncts.iter().cloned().chain(std::iter::once(r)))
    }

    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        self.conjuncts.iter().flat_map(|r| r.vars().cloned()).collect()
    }

    pub fn substitute(&self, map: &BTreeMap<Var, LinExpr>) -> Self {
        Self::new(self.conjuncts.iter().map(|r| r.substitute(map)))
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Self {
        Self::new(self.conjuncts.iter().map(|r| r.rename(map)))
    }

    pub fn holds(&self, assignment: &BTreeMap<Var, Rat>) -> Option<bool> {
        let mut all = true;
        for r in &self.conjuncts {
            all &= r.holds(assignment)?;
        }
        Some(all)
    }

    pub fn holds_int(&self, assignment: &BTreeMap<Var, BigInt>) -> Option<bool> {
        let rat: BTreeMap<Var, Rat> =
            assignment.iter().map(|(k, v)| (k.clone(), Rat::from_integer(v.clone()))).collect();
        self.holds(&rat)
    }

    /// Conjuncts in a name-independent-by-construction order (structural).
    pub fn sorted(&self) -> LinConstraint {
        let mut c = self.conjuncts.clone();
        c.sort();
        c.dedup();
        LinConstraint { conjuncts: c }
    }
}

impl FromIterator<LinAtomicRel> for LinConstraint {
    fn from_iter<I: IntoIterator<Item = LinAtomicRel>>(iter: I) -> Self {
        Self::new(iter)
    }
}

impl fmt::Display for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjuncts.is_empty() {
            return write!(f, "true");
        }
        for (i, r) in self.conjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Concatenates two conjunctions, evaluating ground conjuncts away.
pub fn conjoin(c1: &LinConstraint, c2: &LinConstraint) -> LinConstraint {
    LinConstraint::new(c1.conjuncts.iter().chain(c2.conjuncts.iter()).cloned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> LinExpr {
        LinExpr::var(Var::new(name))
    }
    fn k(n: i64) -> LinExpr {
        LinExpr::constant_int(n)
    }

    #[test]
    fn relations_normalize_to_coprime_integer_form() {
        let a = LinAtomicRel::new(v("X") * Rat::from_integer(2.into()), Rel::Le, k(4));
        let b = LinAtomicRel::new(k(2), Rel::Ge, v("X"));
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "X=<2");
    }

    #[test]
    fn equality_sign_is_fixed() {
        let a = LinAtomicRel::eq(v("N1"), v("N") - k(1));
        let b = LinAtomicRel::eq(v("N") - k(1), v("N1"));
        assert_eq!(a, b);
    }

    #[test]
    fn display_is_readable() {
        let r = LinAtomicRel::new(v("F3"), Rel::Gt, v("F1") + v("F2"));
        assert_eq!(r.to_string(), "F3>F1+F2");
        let r = LinAtomicRel::new(v("N"), Rel::Le, k(0));
        assert_eq!(r.to_string(), "N=<0");
        let r = LinAtomicRel::new(v("N"), Rel::Ge, k(1));
        assert_eq!(r.to_string(), "N>=1");
    }

    #[test]
    fn conjoin_drops_truth_and_evaluates_ground() {
        let x_pos = LinConstraint::single(LinAtomicRel::new(v("X"), Rel::Gt, k(0)));
        assert_eq!(conjoin(&x_pos, &LinConstraint::truth()), x_pos);

        let rhs = LinConstraint::new([LinAtomicRel::new(v("X"), Rel::Le, k(5)), LinAtomicRel::eq(v("Y"), v("X"))]);
        let both = conjoin(&x_pos, &rhs);
        assert_eq!(both.len(), 3);
        assert_eq!(both.to_string(), "X>0, X=<5, X=Y");

        let ground = LinConstraint::new([LinAtomicRel::new(k(3), Rel::Gt, k(1))]);
        let x2 = LinConstraint::single(LinAtomicRel::eq(v("X"), k(2)));
        assert_eq!(conjoin(&ground, &x2), x2);

        let bad = LinConstraint::new([LinAtomicRel::new(k(1), Rel::Gt, k(3))]);
        assert!(conjoin(&bad, &x2).is_false());
    }

    #[test]
    fn integer_negation() {
        let r = LinAtomicRel::new(v("N"), Rel::Gt, k(0));
        let n = r.negate_int();
        assert_eq!(n, vec![LinAtomicRel::new(v("N"), Rel::Le, k(0))]);
        let r = LinAtomicRel::new(v("N"), Rel::Ge, k(0));
        assert_eq!(r.negate_int(), vec![LinAtomicRel::new(v("N"), Rel::Le, k(-1))]);
        let r = LinAtomicRel::eq(v("N"), k(0));
        assert_eq!(r.negate_int().len(), 2);
    }

    #[test]
    fn tightening() {
        let r = LinAtomicRel::new(v("X") * Rat::from_integer(2.into()), Rel::Gt, k(1));
        // 2X > 1  ->  2X - 2 >= 0  ->  X >= 1
        assert_eq!(r.tightened(), LinAtomicRel::new(v("X"), Rel::Ge, k(1)));
        let e = LinAtomicRel::eq(v("X") * Rat::from_integer(2.into()), k(1));
        assert!(e.tightened().is_false());
    }
}
