//! Fourier–Motzkin elimination over the rationals.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};

use super::{LinAtomicRel, LinConstraint, LinError, LinExpr, Rat, Rel, Var};

#[derive(Debug, Clone, Copy)]
pub struct FmConfig {
    /// Upper bound on the number of rows alive after any elimination step.
    pub max_rows: usize,
}

impl Default for FmConfig {
    fn default() -> Self {
        FmConfig { max_rows: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QSat {
    Sat,
    Unsat,
}

/// One elimination step, kept for back-substitution.
enum Step {
    /// `var = expr`, `expr` not mentioning `var`.
    Subst(Var, LinExpr),
    /// The rows that bounded `var` when it was eliminated.
    Bounds(Var, Vec<LinAtomicRel>),
}

struct Projection {
    rows: Vec<LinAtomicRel>,
    steps: Vec<Step>,
    feasible: bool,
}

fn project(
    input: &[LinAtomicRel],
    targets: &BTreeSet<Var>,
    cfg: FmConfig,
    record: bool,
) -> Result<Projection, LinError> {
    let mut steps = Vec::new();
    let mut remaining: BTreeSet<Var> = targets.clone();
    let infeasible = |steps| Projection { rows: vec![LinAtomicRel::falsity()], steps, feasible: false };
    let mut rows = compact(input.iter().filter(|r| !r.is_true()).cloned().collect());

    loop {
        if rows.iter().any(|r| r.is_false()) {
            return Ok(infeasible(steps));
        }
        remaining.retain(|v| rows.iter().any(|r| r.expr().mentions(v)));
        if remaining.is_empty() {
            break;
        }

        // Equalities first: exact substitution, no growth.
        let eq_pick = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_equality())
            .flat_map(|(i, r)| {
                r.expr()
                    .coeffs()
                    .iter()
                    .filter(|(v, _)| remaining.contains(*v))
                    .map(move |(v, c)| (c.abs(), i, v.clone()))
            })
            .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        if let Some((_, i, v)) = eq_pick {
            let eq = rows.remove(i);
            let c = eq.coeff(&v);
            // c·v + rest = 0  →  v = -rest / c
            let rest = eq.expr().clone() - LinExpr::term(v.clone(), c.clone());
            let def = rest * (-Rat::one() / c);
            let mut m = BTreeMap::new();
            m.insert(v.clone(), def.clone());
            rows = rows.iter().map(|r| r.substitute(&m)).filter(|r| !r.is_true()).collect();
            rows = compact(rows);
            if record {
                steps.push(Step::Subst(v, def));
            }
            continue;
        }

        // Pick the variable producing the fewest new rows.
        let mut best: Option<(usize, Var)> = None;
        for v in &remaining {
            let pos = rows.iter().filter(|r| r.coeff(v).is_positive()).count();
            let neg = rows.iter().filter(|r| r.coeff(v).is_negative()).count();
            let cost = pos * neg;
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, v.clone()));
            }
        }
        let (_, v) = best.unwrap();
        let (bounds, keep): (Vec<_>, Vec<_>) = rows.into_iter().partition(|r| r.expr().mentions(&v));
        let mut next = keep;
        let (pos, neg): (Vec<_>, Vec<_>) = bounds.iter().partition(|r| r.coeff(&v).is_positive());
        for p in &pos {
            for n in &neg {
                let a = p.coeff(&v);
                let b = -n.coeff(&v);
                let e = p.expr().clone() * b + n.expr().clone() * a;
                let rel = if p.rel() == Rel::Gt || n.rel() == Rel::Gt { Rel::Gt } else { Rel::Ge };
                let r = LinAtomicRel::from_zero_form(e, rel);
                if r.is_false() {
                    return Ok(infeasible(steps));
                }
                if !r.is_true() {
                    next.push(r);
                }
            }
            if next.len() > cfg.max_rows * 4 {
                next = compact(next);
                if next.len() > cfg.max_rows {
                    return Err(LinError::ResourceLimit(cfg.max_rows));
                }
            }
        }
        rows = compact(next);
        if rows.len() > cfg.max_rows {
            return Err(LinError::ResourceLimit(cfg.max_rows));
        }
        if record {
            steps.push(Step::Bounds(v, bounds));
        }
    }
    Ok(Projection { rows, steps, feasible: true })
}

/// Removes duplicates and keeps, for inequalities with identical variable
/// parts, only the tightest one. Detects `e ≥ k` against `-e ≥ k'` clashes
/// only through later elimination.
fn compact(rows: Vec<LinAtomicRel>) -> Vec<LinAtomicRel> {
    let mut eqs: Vec<LinAtomicRel> = Vec::new();
    let mut best: HashMap<BTreeMap<Var, Rat>, (Rat, Rel)> = HashMap::new();
    let mut order: Vec<BTreeMap<Var, Rat>> = Vec::new();
    for r in rows {
        if r.is_equality() {
            if !eqs.contains(&r) {
                eqs.push(r);
            }
            continue;
        }
        let key = r.expr().coeffs().clone();
        let k = r.expr().constant_term().clone();
        match best.get_mut(&key) {
            None => {
                order.push(key.clone());
                best.insert(key, (k, r.rel()));
            }
            Some((bk, brel)) => {
                // Σ + k ⋈ 0: smaller k is tighter; at equal k strict wins.
                if k < *bk || (k == *bk && r.rel() == Rel::Gt) {
                    *bk = k;
                    *brel = r.rel();
                }
            }
        }
    }
    let mut out = eqs;
    for key in order {
        let (k, rel) = best.remove(&key).unwrap();
        out.push(LinAtomicRel::from_zero_form(LinExpr::from_parts(key, k), rel));
    }
    out
}

/// Rational satisfiability with the default row budget.
pub fn sat_q(c: &LinConstraint) -> Result<QSat, LinError> {
    sat_q_with(c, FmConfig::default())
}

pub fn sat_q_with(c: &LinConstraint, cfg: FmConfig) -> Result<QSat, LinError> {
    if c.is_false() {
        return Ok(QSat::Unsat);
    }
    let vars = c.vars();
    let p = project(c.conjuncts(), &vars, cfg, false)?;
    Ok(if p.feasible { QSat::Sat } else { QSat::Unsat })
}

/// A rational model if one exists. Values are integers whenever the
/// eliminated bounds leave room for one.
pub fn witness_q(c: &LinConstraint, cfg: FmConfig) -> Result<Option<BTreeMap<Var, Rat>>, LinError> {
    if c.is_false() {
        return Ok(None);
    }
    let vars = c.vars();
    let p = project(c.conjuncts(), &vars, cfg, true)?;
    if !p.feasible {
        return Ok(None);
    }
    let mut model: BTreeMap<Var, Rat> = BTreeMap::new();
    for step in p.steps.iter().rev() {
        match step {
            Step::Subst(v, e) => {
                for w in e.vars() {
                    model.entry(w.clone()).or_insert_with(Rat::zero);
                }
                let val = e.eval(&model).expect("all variables assigned");
                model.insert(v.clone(), val);
            }
            Step::Bounds(v, rows) => {
                let val = pick_value(v, rows, &mut model);
                model.insert(v.clone(), val);
            }
        }
    }
    for v in vars {
        model.entry(v).or_insert_with(Rat::zero);
    }
    debug_assert_eq!(c.holds(&model), Some(true));
    Ok(Some(model))
}

fn pick_value(v: &Var, rows: &[LinAtomicRel], model: &mut BTreeMap<Var, Rat>) -> Rat {
    // (bound, strict)
    let mut lo: Option<(Rat, bool)> = None;
    let mut hi: Option<(Rat, bool)> = None;
    for r in rows {
        let a = r.coeff(v);
        let rest = r.expr().clone() - LinExpr::term(v.clone(), a.clone());
        for w in rest.vars() {
            if w != v {
                model.entry(w.clone()).or_insert_with(Rat::zero);
            }
        }
        let rv = rest.eval(model).expect("all variables assigned");
        let strict = r.rel() == Rel::Gt;
        // a·v + rv ⋈ 0
        let b = -rv / &a;
        if a.is_positive() {
            if lo.as_ref().is_none_or(|(l, s)| b > *l || (b == *l && strict && !*s)) {
                lo = Some((b, strict));
            }
        } else if hi.as_ref().is_none_or(|(h, s)| b < *h || (b == *h && strict && !*s)) {
            hi = Some((b, strict));
        }
    }
    let lo_int = lo.as_ref().map(|(l, s)| if *s { l.floor() + Rat::one() } else { l.ceil() });
    let hi_int = hi.as_ref().map(|(h, s)| if *s { h.ceil() - Rat::one() } else { h.floor() });
    let zero = Rat::zero();
    match (&lo_int, &hi_int) {
        (Some(l), Some(h)) if l <= h => clamp(&zero, l, h),
        (Some(l), None) => {
            if *l > zero {
                l.clone()
            } else {
                zero
            }
        }
        (None, Some(h)) => {
            if *h < zero {
                h.clone()
            } else {
                zero
            }
        }
        (None, None) => zero,
        _ => {
            // No integer fits; the rational interval is still non-empty.
            let (l, ls) = lo.unwrap();
            let (h, _) = hi.unwrap();
            if l == h && !ls {
                l
            } else {
                (l + h) / Rat::from_integer(2.into())
            }
        }
    }
}

fn clamp(x: &Rat, l: &Rat, h: &Rat) -> Rat {
    if x < l {
        l.clone()
    } else if x > h {
        h.clone()
    } else {
        x.clone()
    }
}

/// Projects `c` onto the variables it does not share with `vars`
/// (∃ vars. c), exact over the rationals.
pub fn eliminate(c: &LinConstraint, vars: &BTreeSet<Var>) -> Result<LinConstraint, LinError> {
    eliminate_with(c, vars, FmConfig::default())
}

pub fn eliminate_with(c: &LinConstraint, vars: &BTreeSet<Var>, cfg: FmConfig) -> Result<LinConstraint, LinError> {
    if c.is_false() {
        return Ok(LinConstraint::falsity());
    }
    let p = project(c.conjuncts(), vars, cfg, false)?;
    if !p.feasible {
        return Ok(LinConstraint::falsity());
    }
    Ok(LinConstraint::new(p.rows))
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
    fn rel(a: LinExpr, r: Rel, b: LinExpr) -> LinAtomicRel {
        LinAtomicRel::new(a, r, b)
    }

    #[test]
    fn simple_sat_and_unsat() {
        let c = LinConstraint::new([rel(v("X"), Rel::Gt, k(0)), rel(v("X"), Rel::Lt, k(1))]);
        assert_eq!(sat_q(&c).unwrap(), QSat::Sat);
        let c = LinConstraint::new([rel(v("X"), Rel::Gt, k(0)), rel(v("X"), Rel::Lt, k(0))]);
        assert_eq!(sat_q(&c).unwrap(), QSat::Unsat);
        let c = LinConstraint::new([
            rel(v("X"), Rel::Ge, v("Y") + k(1)),
            rel(v("Y"), Rel::Ge, v("Z") + k(1)),
            rel(v("Z"), Rel::Ge, v("X")),
        ]);
        assert_eq!(sat_q(&c).unwrap(), QSat::Unsat);
    }

    #[test]
    fn witness_satisfies() {
        let c = LinConstraint::new([
            rel(v("X") + v("Y"), Rel::Eq, k(7)),
            rel(v("X"), Rel::Ge, k(3)),
            rel(v("Y"), Rel::Gt, v("X")),
        ]);
        let m = witness_q(&c, FmConfig::default()).unwrap().unwrap();
        assert_eq!(c.holds(&m), Some(true));
    }

    #[test]
    fn eliminate_projects() {
        // ∃Y. X = Y + 1 ∧ Y >= 0   ≡   X >= 1
        let c = LinConstraint::new([rel(v("X"), Rel::Eq, v("Y") + k(1)), rel(v("Y"), Rel::Ge, k(0))]);
        let p = eliminate(&c, &[Var::new("Y")].into_iter().collect()).unwrap();
        assert_eq!(p, LinConstraint::single(rel(v("X"), Rel::Ge, k(1))));
    }

    #[test]
    fn row_budget_is_reported() {
        // A dense system that blows up when eliminated with a tiny budget.
        let names: Vec<String> = (0..6).map(|i| format!("X{i}")).collect();
        let mut rows = Vec::new();
        for i in 0..names.len() {
            for j in 0..names.len() {
                if i != j {
                    rows.push(rel(v(&names[i]) + v(&names[j]), Rel::Ge, k((i * j) as i64)));
                    rows.push(rel(v(&names[i]) - v(&names[j]), Rel::Le, k((i + j) as i64)));
                }
            }
        }
        let c = LinConstraint::new(rows);
        let r = sat_q_with(&c, FmConfig { max_rows: 5 });
        assert_eq!(r, Err(LinError::ResourceLimit(5)));
    }
}
