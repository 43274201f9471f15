//! SMT-LIB 2 scripts in the HORN logic.
//!
//! Emitted grammar:
//!
//! ```text
//! script  ::= (set-logic HORN) decl* assert* (check-sat)
//! decl    ::= (declare-fun P (Int*) Bool)
//! assert  ::= (assert (forall ((X Int)+) body)) | (assert body)
//! body    ::= head | (=> ante head)
//! ante    ::= (and lit+) | lit
//! lit     ::= (P term*) | (rel term term)        rel ∈ {=, <=, >=, <, >}
//! head    ::= (P term*) | false
//! term    ::= X | n | (- n) | (+ term+) | (- term+) | (* n term)
//! ```
//!
//! The parser also accepts `not`, `distinct`, `true`, nested `and`,
//! `exists` in antecedents, goals written `(not (exists (...) ante))`,
//! `declare-rel`, and ignores `set-info`, `set-option`, `get-model` and
//! `exit`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::chc::{Atom, Clause, ClauseSet, Term};
use crate::lin::{LinAtomicRel, LinConstraint, LinExpr, Rat, Rel, Var};
use crate::syntax::ParseError;

fn num(r: &Rat) -> String {
    let i = r.to_integer();
    if i.is_negative() {
        format!("(- {})", -i)
    } else {
        i.to_string()
    }
}

fn term(e: &LinExpr) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (v, c) in e.coeffs() {
        if c.is_one() {
            parts.push(v.to_string());
        } else {
            parts.push(format!("(* {} {v})", num(c)));
        }
    }
    if !e.constant_term().is_zero() || parts.is_empty() {
        parts.push(num(e.constant_term()));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn rel(r: &LinAtomicRel) -> String {
    // Split into positive and negative parts, as in `(>= X (+ Y 1))`.
    let mut lhs = LinExpr::zero();
    let mut rhs = LinExpr::zero();
    for (v, c) in r.expr().coeffs() {
        if c.is_positive() {
            lhs = lhs + LinExpr::term(v.clone(), c.clone());
        } else {
            rhs = rhs + LinExpr::term(v.clone(), -c.clone());
        }
    }
    let k = r.expr().constant_term();
    if k.is_positive() {
        lhs = lhs + LinExpr::constant(k.clone());
    } else {
        rhs = rhs + LinExpr::constant(-k.clone());
    }
    let op = match r.rel() {
        Rel::Eq => "=",
        Rel::Ge => ">=",
        Rel::Gt => ">",
        _ => unreachable!("normalized relations only"),
    };
    format!("({op} {} {})", term(&lhs), term(&rhs))
}

fn atom(a: &Atom) -> String {
    if a.args.is_empty() {
        return a.pred.clone();
    }
    let args: Vec<String> = a.args.iter().map(|t| term(&t.to_expr())).collect();
    format!("({} {})", a.pred, args.join(" "))
}

fn clause(c: &Clause) -> String {
    let head = c.head.as_ref().map(atom).unwrap_or_else(|| "false".into());
    let mut lits: Vec<String> = c.constraint.conjuncts().iter().filter(|r| !r.is_true()).map(rel).collect();
    lits.extend(c.body.iter().map(atom));
    let body = match lits.len() {
        0 => head,
        1 => format!("(=> {} {head})", lits[0]),
        _ => format!("(=> (and {}) {head})", lits.join(" ")),
    };
    let vars = c.vars();
    if vars.is_empty() {
        body
    } else {
        let vs: Vec<String> = vars.iter().map(|v| format!("({v} Int)")).collect();
        format!("(forall ({}) {body})", vs.join(" "))
    }
}

/// Prints `s` as a HORN-logic script: declarations in signature order, then
/// one assertion per clause in the order of `s`.
pub fn emit_smtlib(s: &ClauseSet) -> String {
    let mut out = String::from("(set-logic HORN)\n");
    for (p, n) in s.signature() {
        let sorts = vec!["Int"; *n].join(" ");
        let _ = writeln!(out, "(declare-fun {p} ({sorts}) Bool)");
    }
    for c in s {
        let _ = writeln!(out, "(assert {})", clause(c));
    }
    out.push_str("(check-sat)\n");
    out
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Atom(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.pos();
        ParseError::new(l, c, msg)
    }

    fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, ..) => Some(s),
            _ => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v, ..) => Some(v),
            _ => None,
        }
    }

    /// The head symbol of a list.
    fn head(&self) -> Option<&str> {
        self.list().and_then(|v| v.first()).and_then(Sexp::symbol)
    }
}

fn read(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, usize, usize)> = vec![(Vec::new(), 1, 1)];
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    macro_rules! bump {
        ($c:expr) => {
            if $c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
    }
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        match c {
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    bump!(c);
                }
            }
            '(' => {
                chars.next();
                bump!(c);
                stack.push((Vec::new(), l0, c0));
            }
            ')' => {
                chars.next();
                bump!(c);
                let (items, l, cc) = stack.pop().unwrap();
                let Some(top) = stack.last_mut() else {
                    return Err(ParseError::new(l0, c0, "unbalanced `)`"));
                };
                top.0.push(Sexp::List(items, l, cc));
            }
            c if c.is_whitespace() => {
                chars.next();
                bump!(c);
            }
            '|' => {
                chars.next();
                bump!(c);
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('|') => {
                            col += 1;
                            break;
                        }
                        Some(c) => {
                            bump!(c);
                            s.push(c);
                        }
                        None => return Err(ParseError::new(l0, c0, "unterminated quoted symbol")),
                    }
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(s, l0, c0));
            }
            '"' => return Err(ParseError::new(l0, c0, "string literals are not supported")),
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    chars.next();
                    bump!(c);
                    s.push(c);
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(s, l0, c0));
            }
        }
    }
    if stack.len() != 1 {
        let (_, l, c) = stack.last().unwrap();
        return Err(ParseError::new(*l, *c, "unclosed `(`"));
    }
    Ok(stack.pop().unwrap().0)
}

/// A conjunction in an antecedent.
#[derive(Debug, Clone, Default)]
struct Alt {
    rels: Vec<LinAtomicRel>,
    atoms: Vec<Atom>,
}

struct Reader {
    sig: BTreeMap<String, usize>,
    /// Bound variables, innermost last.
    scope: Vec<String>,
}

impl Reader {
    fn is_var(&self, s: &str) -> bool {
        self.scope.iter().any(|v| v == s)
    }

    fn binders(&mut self, vs: &Sexp) -> Result<usize, ParseError> {
        let list = vs.list().ok_or_else(|| vs.err("expected a variable list"))?;
        for b in list {
            let pair = b.list().ok_or_else(|| b.err("expected `(name sort)`"))?;
            let [name, sort] = pair else {
                return Err(b.err("expected `(name sort)`"));
            };
            let name = name.symbol().ok_or_else(|| name.err("expected a variable name"))?;
            match sort.symbol() {
                Some("Int") => {}
                Some(s) => return Err(sort.err(format!("unsupported sort `{s}`"))),
                None => return Err(sort.err("unsupported sort")),
            }
            self.scope.push(name.to_string());
        }
        Ok(list.len())
    }

    fn term(&self, e: &Sexp) -> Result<LinExpr, ParseError> {
        match e {
            Sexp::Atom(s, ..) => {
                if let Ok(n) = s.parse::<BigInt>() {
                    return Ok(LinExpr::constant_int(n));
                }
                if s.contains('.') && s.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                    return Err(e.err(format!("decimal `{s}` is not an integer")));
                }
                if self.is_var(s) {
                    return Ok(LinExpr::var(Var::new(s)));
                }
                Err(e.err(format!("unbound symbol `{s}`")))
            }
            Sexp::List(items, ..) => {
                let op = e.head().ok_or_else(|| e.err("expected an arithmetic term"))?;
                let args = items[1..].iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                match (op, args.len()) {
                    ("+", n) if n >= 1 => Ok(args.into_iter().reduce(|a, b| a + b).unwrap()),
                    ("-", 1) => Ok(-args.into_iter().next().unwrap()),
                    ("-", n) if n >= 2 => {
                        let mut it = args.into_iter();
                        let first = it.next().unwrap();
                        Ok(it.fold(first, |a, b| a - b))
                    }
                    ("*", n) if n >= 1 => {
                        let mut acc = LinExpr::constant_int(1);
                        for a in args {
                            if a.is_constant() {
                                acc = acc * a.constant_term().clone();
                            } else if acc.is_constant() {
                                acc = a * acc.constant_term().clone();
                            } else {
                                return Err(e.err("nonlinear multiplication"));
                            }
                        }
                        Ok(acc)
                    }
                    (op, _) => Err(e.err(format!("unsupported term `{op}`"))),
                }
            }
        }
    }

    fn pred_app(&self, e: &Sexp) -> Result<Option<Atom>, ParseError> {
        let (name, args) = match e {
            Sexp::Atom(s, ..) => (s.as_str(), &[][..]),
            Sexp::List(items, ..) => match items.first().and_then(Sexp::symbol) {
                Some(s) => (s, &items[1..]),
                None => return Ok(None),
            },
        };
        let Some(&n) = self.sig.get(name) else {
            return Ok(None);
        };
        if args.len() != n {
            return Err(e.err(format!("`{name}` expects {n} arguments")));
        }
        let args = args.iter().map(|a| self.term(a).map(Term::from_expr)).collect::<Result<_, _>>()?;
        Ok(Some(Atom::new(name, args)))
    }

    fn relation(&self, op: &str, a: LinExpr, b: LinExpr) -> Option<Vec<Vec<LinAtomicRel>>> {
        let r = |rel| vec![vec![LinAtomicRel::new(a.clone(), rel, b.clone())]];
        Some(match op {
            "=" => r(Rel::Eq),
            "<=" => r(Rel::Le),
            ">=" => r(Rel::Ge),
            "<" => r(Rel::Lt),
            ">" => r(Rel::Gt),
            _ => return None,
        })
    }

    /// Alternatives whose disjunction is equivalent to `e`.
    fn ante(&mut self, e: &Sexp) -> Result<Vec<Alt>, ParseError> {
        if let Some(a) = self.pred_app(e)? {
            return Ok(vec![Alt { rels: vec![], atoms: vec![a] }]);
        }
        match e {
            Sexp::Atom(s, ..) if s == "true" => return Ok(vec![Alt::default()]),
            Sexp::Atom(s, ..) if s == "false" => return Ok(vec![]),
            Sexp::Atom(s, ..) => return Err(e.err(format!("unsupported formula `{s}`"))),
            _ => {}
        }
        let items = e.list().unwrap();
        let op = e.head().ok_or_else(|| e.err("expected a formula"))?;
        match op {
            "and" => {
                let mut acc = vec![Alt::default()];
                for x in &items[1..] {
                    let alts = self.ante(x)?;
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &alts {
                            let mut c = a.clone();
                            c.rels.extend(b.rels.iter().cloned());
                            c.atoms.extend(b.atoms.iter().cloned());
                            next.push(c);
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
            "or" => {
                let mut out = Vec::new();
                for x in &items[1..] {
                    out.extend(self.ante(x)?);
                }
                Ok(out)
            }
            "exists" => {
                if items.len() != 3 {
                    return Err(e.err("malformed `exists`"));
                }
                let n = self.binders(&items[1])?;
                let r = self.ante(&items[2]);
                self.scope.truncate(self.scope.len() - n);
                r
            }
            "not" => {
                if items.len() != 2 {
                    return Err(e.err("malformed `not`"));
                }
                let inner = &items[1];
                let alts = self.ante(inner)?;
                let [alt] = alts.as_slice() else {
                    return Err(inner.err("only a negated relation is supported"));
                };
                if !alt.atoms.is_empty() || alt.rels.len() != 1 {
                    return Err(inner.err("only a negated relation is supported"));
                }
                let r = LinConstraint::new(alt.rels.clone());
                match r.conjuncts() {
                    [] => Ok(vec![]),
                    [r] if r.is_false() => Ok(vec![Alt::default()]),
                    [r] => Ok(r.negate_int().into_iter().map(|n| Alt { rels: vec![n], atoms: vec![] }).collect()),
                    _ => unreachable!(),
                }
            }
            "distinct" => {
                let [_, a, b] = items else {
                    return Err(e.err("`distinct` with two arguments expected"));
                };
                let (a, b) = (self.term(a)?, self.term(b)?);
                Ok(vec![
                    Alt { rels: vec![LinAtomicRel::new(a.clone(), Rel::Lt, b.clone())], atoms: vec![] },
                    Alt { rels: vec![LinAtomicRel::new(a, Rel::Gt, b)], atoms: vec![] },
                ])
            }
            _ => {
                if items.len() != 3 {
                    return Err(e.err(format!("unsupported formula `{op}`")));
                }
                let (a, b) = (self.term(&items[1])?, self.term(&items[2])?);
                let alts = self.relation(op, a, b).ok_or_else(|| e.err(format!("unsupported formula `{op}`")))?;
                Ok(alts.into_iter().map(|rels| Alt { rels, atoms: vec![] }).collect())
            }
        }
    }

    fn head(&self, e: &Sexp) -> Result<Option<Atom>, ParseError> {
        if e.symbol() == Some("false") {
            return Ok(None);
        }
        self.pred_app(e)?.map(Some).ok_or_else(|| e.err("expected a predicate application or `false`"))
    }

    fn clauses(&mut self, e: &Sexp) -> Result<Vec<Clause>, ParseError> {
        match e.head() {
            Some("forall") => {
                let items = e.list().unwrap();
                if items.len() != 3 {
                    return Err(e.err("malformed `forall`"));
                }
                let n = self.binders(&items[1])?;
                let r = self.clauses(&items[2]);
                self.scope.truncate(self.scope.len() - n);
                r
            }
            Some("=>") => {
                let items = e.list().unwrap();
                if items.len() != 3 {
                    return Err(e.err("malformed `=>`"));
                }
                let alts = self.ante(&items[1])?;
                let head = self.head(&items[2])?;
                Ok(alts.into_iter().map(|a| Clause::new(head.clone(), LinConstraint::new(a.rels), a.atoms)).collect())
            }
            Some("not") => {
                let items = e.list().unwrap();
                if items.len() != 2 {
                    return Err(e.err("malformed `not`"));
                }
                let alts = self.ante(&items[1])?;
                Ok(alts.into_iter().map(|a| Clause::new(None, LinConstraint::new(a.rels), a.atoms)).collect())
            }
            _ => {
                let head = self.head(e)?;
                if head.is_none() {
                    return Err(e.err("asserting `false` is not a Horn clause"));
                }
                Ok(vec![Clause::new(head, LinConstraint::truth(), vec![])])
            }
        }
    }
}

/// Reads a HORN-logic script.
pub fn parse_smtlib(text: &str) -> Result<ClauseSet, ParseError> {
    let mut r = Reader { sig: BTreeMap::new(), scope: Vec::new() };
    let mut out = ClauseSet::new();
    for cmd in read(text)? {
        let items = cmd.list().ok_or_else(|| cmd.err("expected a command"))?;
        match cmd.head() {
            Some("set-logic") => match items.get(1).and_then(Sexp::symbol) {
                Some("HORN") => {}
                _ => return Err(cmd.err("only the HORN logic is supported")),
            },
            Some("set-info" | "set-option" | "check-sat" | "get-model" | "exit") => {}
            Some(c @ ("declare-fun" | "declare-rel")) => {
                let name = items.get(1).and_then(Sexp::symbol).ok_or_else(|| cmd.err("expected a name"))?;
                let sorts =
                    items.get(2).and_then(Sexp::list).ok_or_else(|| cmd.err("expected an argument sort list"))?;
                for s in sorts {
                    match s.symbol() {
                        Some("Int") => {}
                        Some(x) => return Err(s.err(format!("unsupported sort `{x}`"))),
                        None => return Err(s.err("unsupported sort")),
                    }
                }
                if c == "declare-fun" {
                    match items.get(3) {
                        Some(s) if s.symbol() == Some("Bool") && items.len() == 4 => {}
                        Some(s) if s.symbol() == Some("Int") => {
                            return Err(s.err("uninterpreted functions are not Horn predicates"))
                        }
                        Some(s) => return Err(s.err("predicates must have sort Bool")),
                        None => return Err(cmd.err("missing result sort")),
                    }
                }
                r.sig.insert(name.to_string(), sorts.len());
                out.declare(name, sorts.len()).map_err(|e| cmd.err(e.to_string()))?;
            }
            Some("assert") => {
                let [_, body] = items else {
                    return Err(cmd.err("`assert` takes one formula"));
                };
                for c in r.clauses(body)? {
                    out.push(c).map_err(|e| cmd.err(e.to_string()))?;
                }
            }
            Some(other) => return Err(cmd.err(format!("unsupported command `{other}`"))),
            None => return Err(cmd.err("expected a command")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chc::{canonicalize, parse_clauses};

    fn round_trip(text: &str) {
        let s = parse_clauses(text).unwrap();
        let script = emit_smtlib(&s);
        let back = parse_smtlib(&script).unwrap_or_else(|e| panic!("{e}\n{script}"));
        let a: Vec<_> = s.iter().map(canonicalize).collect();
        let b: Vec<_> = back.iter().map(canonicalize).collect();
        assert_eq!(a, b, "{script}");
    }

    #[test]
    fn emits_declarations_and_implications() {
        let s = parse_clauses("p(X) :- X=0.\nfalse :- X>0, p(X).").unwrap();
        let script = emit_smtlib(&s);
        assert_eq!(
            script,
            "(set-logic HORN)\n\
             (declare-fun p (Int) Bool)\n\
             (assert (forall ((X Int)) (=> (= X 0) (p X))))\n\
             (assert (forall ((X Int)) (=> (and (> X 0) (p X)) false)))\n\
             (check-sat)\n"
        );
    }

    #[test]
    fn round_trips() {
        round_trip("p(X) :- X=0.\nfalse :- X>0, p(X).");
        round_trip("p(0,1).\np(X,Y) :- X>=1, 2*Y=X+3, p(X-1,Z), Z=<Y-7.");
        round_trip("q.\nfalse :- q.");
    }

    #[test]
    fn reads_handwritten_scripts() {
        let script = "; two clauses\n(set-logic HORN)\n(declare-fun inv (Int) Bool)\n\
            (assert (forall ((x Int)) (=> (and (<= 0 x) (<= x 3)) (inv x))))\n\
            (assert (not (exists ((x Int)) (and (inv x) (not (< x 10))))))\n(check-sat)\n(exit)\n";
        let s = parse_smtlib(script).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.clauses()[1].is_goal());
        assert_eq!(s.clauses()[1].constraint.to_string(), "x>=10");
    }

    #[test]
    fn distinct_splits_into_two_clauses() {
        let script = "(set-logic HORN)(declare-fun p (Int Int) Bool)\
            (assert (forall ((x Int) (y Int)) (=> (and (p x y) (distinct x y)) false)))";
        assert_eq!(parse_smtlib(script).unwrap().len(), 2);
    }

    #[test]
    fn real_sort_is_rejected_with_location() {
        let script = "(set-logic HORN)\n(declare-fun p (Real) Bool)\n";
        let e = parse_smtlib(script).unwrap_err();
        assert_eq!((e.line, e.col), (2, 17));
        let script = "(set-logic HORN)\n(declare-fun p (Int) Bool)\n(assert (forall ((x Real)) (p x)))";
        assert_eq!(parse_smtlib(script).unwrap_err().line, 3);
    }

    #[test]
    fn nonlinear_terms_are_rejected() {
        let script = "(set-logic HORN)(declare-fun p (Int) Bool)(assert (forall ((x Int)) (=> (= (* x x) 4) (p x))))";
        assert!(parse_smtlib(script).is_err());
    }
}
