use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{fmt_rat, Rat};

/// A logic variable. Names starting with `_` are reserved for fresh variables
/// produced by [`VarGen`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// Source of fresh variables `<prefix><n>`.
#[derive(Debug, Clone)]
pub struct VarGen {
    prefix: &'static str,
    next: u64,
}

impl Default for VarGen {
    fn default() -> Self {
        VarGen { prefix: "_G", next: 0 }
    }
}

impl VarGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_prefix(prefix: &'static str) -> Self {
        VarGen { prefix, next: 0 }
    }

    pub fn fresh(&mut self) -> Var {
        self.next += 1;
        Var::new(format!("{}{}", self.prefix, self.next))
    }

    /// Makes sure `v` will never be produced.
    pub fn reserve(&mut self, v: &Var) {
        if let Some(n) = v.name().strip_prefix(self.prefix).and_then(|d| d.parse::<u64>().ok()) {
            self.next = self.next.max(n);
        }
    }

    pub fn reserve_all<'a>(&mut self, vs: impl IntoIterator<Item = &'a Var>) {
        for v in vs {
            self.reserve(v);
        }
    }
}

/// `Σ cᵢ·xᵢ + c₀` with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinExpr {
    coeffs: BTreeMap<Var, Rat>,
    constant: Rat,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(v: Var) -> Self {
        Self::term(v, Rat::one())
    }

    pub fn term(v: Var, c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(v, c);
        }
        LinExpr { coeffs, constant: Rat::zero() }
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn constant_int(c: impl Into<BigInt>) -> Self {
        Self::constant(Rat::from_integer(c.into()))
    }

    pub fn from_parts(coeffs: BTreeMap<Var, Rat>, constant: Rat) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        LinExpr { coeffs, constant }
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, Rat> {
        &self.coeffs
    }

    pub fn coeff(&self, v: &Var) -> Rat {
        self.coeffs.get(v).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> &Rat {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The variable `x` if this expression is exactly `1·x + 0`.
    pub fn as_var(&self) -> Option<&Var> {
        if self.constant.is_zero() && self.coeffs.len() == 1 {
            let (v, c) = self.coeffs.iter().next().unwrap();
            if c.is_one() {
                return Some(v);
            }
        }
        None
    }

    /// The integer value if this expression is an integral constant.
    pub fn as_int(&self) -> Option<BigInt> {
        if self.is_constant() && self.constant.is_integer() {
            Some(self.constant.numer().clone())
        } else {
            None
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.contains_key(v)
    }

    /// Simultaneous substitution.
    pub fn substitute(&self, map: &BTreeMap<Var, LinExpr>) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            match map.get(v) {
                Some(e) => out = out + e.clone() * c.clone(),
                None => out = out + LinExpr::term(v.clone(), c.clone()),
            }
        }
        out
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> LinExpr {
        let mut coeffs = BTreeMap::new();
        for (v, c) in &self.coeffs {
            let w = map.get(v).cloned().unwrap_or_else(|| v.clone());
            let e = coeffs.entry(w).or_insert_with(Rat::zero);
            *e += c;
        }
        LinExpr::from_parts(coeffs, self.constant.clone())
    }

    pub fn eval(&self, assignment: &BTreeMap<Var, Rat>) -> Option<Rat> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * assignment.get(v)?;
        }
        Some(acc)
    }

    pub fn eval_int(&self, assignment: &BTreeMap<Var, BigInt>) -> Option<Rat> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * Rat::from_integer(assignment.get(v)?.clone());
        }
        Some(acc)
    }

    /// Multiplies through so that all coefficients and the constant are
    /// integers with gcd 1 (gcd taken with sign +).
    pub(crate) fn scaled_to_coprime_integers(self) -> LinExpr {
        let mut lcm = BigInt::one();
        for c in self.coeffs.values().chain(std::iter::once(&self.constant)) {
            lcm = lcm.lcm(c.denom());
        }
        let mut g = BigInt::zero();
        for c in self.coeffs.values().chain(std::iter::once(&self.constant)) {
            let n = c.numer() * (&lcm / c.denom());
            g = g.gcd(&n);
        }
        if g.is_zero() {
            return self;
        }
        let factor = Rat::new(lcm, g);
        if factor.is_one() {
            return self;
        }
        self * factor
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            if a.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{}*{v}", fmt_rat(&a))?;
            }
            first = false;
        }
        if first {
            return write!(f, "{}", fmt_rat(&self.constant));
        }
        if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, "{sign}{}", fmt_rat(&self.constant.abs()))?;
        }
        Ok(())
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (v, c) in rhs.coeffs {
            let e = self.coeffs.entry(v.clone()).or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                self.coeffs.remove(&v);
            }
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(mut self) -> LinExpr {
        for c in self.coeffs.values_mut() {
            *c = -c.clone();
        }
        self.constant = -self.constant;
        self
    }
}

impl Mul<Rat> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: Rat) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        for c in self.coeffs.values_mut() {
            *c *= &k;
        }
        self.constant *= k;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_cancels() {
        let x = LinExpr::var(Var::new("X"));
        let e = x.clone() + LinExpr::constant_int(3) - x;
        assert!(e.is_constant());
        assert_eq!(e.as_int(), Some(BigInt::from(3)));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let x = Var::new("X");
        let y = Var::new("Y");
        let e = LinExpr::var(x.clone()) + LinExpr::var(y.clone()) * Rat::from_integer(2.into());
        let mut m = BTreeMap::new();
        m.insert(x.clone(), LinExpr::var(y.clone()));
        m.insert(y.clone(), LinExpr::var(x.clone()));
        let s = e.substitute(&m);
        assert_eq!(s.coeff(&x), Rat::from_integer(2.into()));
        assert_eq!(s.coeff(&y), Rat::one());
    }

    #[test]
    fn display() {
        let e = LinExpr::var(Var::new("N")) - LinExpr::constant_int(1);
        assert_eq!(e.to_string(), "N-1");
        let e = LinExpr::var(Var::new("A")) * Rat::from_integer((-2).into());
        assert_eq!(e.to_string(), "-2*A");
    }
}
