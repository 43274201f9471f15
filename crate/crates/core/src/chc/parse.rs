//! Prolog-style clause syntax.
//!
//! ```text
//! clause  ::= head [":-" body] "."
//! head    ::= "false" | atom
//! body    ::= conj (";" conj)*
//! conj    ::= item ("," item)*
//! item    ::= "true" | atom | expr rel expr | "(" body ")"
//! rel     ::= "=" | "=<" | "<=" | ">=" | "<" | ">" | "\=" | "=\=" | "!="
//! ```
//!
//! Disjunctions and disequalities are split into one clause per disjunct.

use num_traits::Zero;

use crate::lin::{LinAtomicRel, LinConstraint, LinExpr, Rat, Rel, Var};
use crate::syntax::{tokenize, ParseError, Spanned, Tok};

use super::{Atom, Clause, ClauseSet, Term};

/// One alternative of a body: constraint conjuncts and atoms in order.
type Alt = (Vec<LinAtomicRel>, Vec<Atom>);

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    anon: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, anon: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn position(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    pub fn error(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.position();
        ParseError::new(l, c, msg)
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", t.describe(), self.peek().describe())))
        }
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            t => Err(self.error(format!("expected identifier, found {}", t.describe()))),
        }
    }

    /// A clause, split into one clause per disjunct of its body. A leading
    /// `Name.` tag (as in `S1. fib(0,1).`) is skipped.
    pub fn clause(&mut self) -> Result<Vec<Clause>, ParseError> {
        if matches!(self.peek(), Tok::Var(_)) && *self.peek_at(1) == Tok::Dot {
            self.next();
            self.next();
        }
        let head = match self.peek().clone() {
            Tok::Ident(s) if s == "false" => {
                self.next();
                None
            }
            Tok::Ident(_) => Some(self.atom()?),
            t => return Err(self.error(format!("expected clause head, found {}", t.describe()))),
        };
        let alts = if self.eat(&Tok::Neck) { self.body()? } else { vec![(vec![], vec![])] };
        self.expect(Tok::Dot)?;
        Ok(alts.into_iter().map(|(rels, atoms)| Clause::new(head.clone(), LinConstraint::new(rels), atoms)).collect())
    }

    pub fn atom(&mut self) -> Result<Atom, ParseError> {
        let pred = self.ident()?;
        if matches!(pred.as_str(), "true" | "false") {
            return Err(self.error(format!("`{pred}` cannot be used as a predicate")));
        }
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(Term::from_expr(self.expr()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Atom::new(pred, args))
    }

    pub fn body(&mut self) -> Result<Vec<Alt>, ParseError> {
        let mut alts = self.conj()?;
        while self.eat(&Tok::Semi) {
            alts.extend(self.conj()?);
        }
        Ok(alts)
    }

    fn conj(&mut self) -> Result<Vec<Alt>, ParseError> {
        let mut acc: Vec<Alt> = vec![(vec![], vec![])];
        loop {
            let item = self.item()?;
            let mut next = Vec::with_capacity(acc.len() * item.len());
            for (r0, a0) in &acc {
                for (r1, a1) in &item {
                    let mut r = r0.clone();
                    r.extend(r1.iter().cloned());
                    let mut a = a0.clone();
                    a.extend(a1.iter().cloned());
                    next.push((r, a));
                }
            }
            acc = next;
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(acc)
    }

    fn item(&mut self) -> Result<Vec<Alt>, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.next();
                Ok(vec![(vec![], vec![])])
            }
            Tok::Ident(_) => Ok(vec![(vec![], vec![self.atom()?])]),
            Tok::LParen => {
                let save = self.pos;
                match self.relation() {
                    Ok(r) => Ok(r),
                    Err(first) => {
                        self.pos = save;
                        self.next();
                        let inner = self.body().map_err(|_| first)?;
                        self.expect(Tok::RParen)?;
                        Ok(inner)
                    }
                }
            }
            _ => self.relation(),
        }
    }

    /// `e1 rel e2`; a disequality yields two alternatives.
    pub fn relation(&mut self) -> Result<Vec<Alt>, ParseError> {
        let lhs = self.expr()?;
        let save = self.pos;
        let rel = match self.next() {
            Tok::Eq => Some(Rel::Eq),
            Tok::Le => Some(Rel::Le),
            Tok::Lt => Some(Rel::Lt),
            Tok::Ge => Some(Rel::Ge),
            Tok::Gt => Some(Rel::Gt),
            Tok::Neq => None,
            t => {
                self.pos = save;
                return Err(self.error(format!("expected a relation, found {}", t.describe())));
            }
        };
        let rhs = self.expr()?;
        Ok(match rel {
            Some(r) => vec![(vec![LinAtomicRel::new(lhs, r, rhs)], vec![])],
            None => vec![
                (vec![LinAtomicRel::new(lhs.clone(), Rel::Lt, rhs.clone())], vec![]),
                (vec![LinAtomicRel::new(lhs, Rel::Gt, rhs)], vec![]),
            ],
        })
    }

    pub fn expr(&mut self) -> Result<LinExpr, ParseError> {
        let mut acc = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc + self.product()?;
            } else if self.eat(&Tok::Minus) {
                acc = acc - self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<LinExpr, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary()?;
            acc = if let Some(k) = const_of(&acc) {
                rhs * k
            } else if let Some(k) = const_of(&rhs) {
                acc * k
            } else {
                return Err(self.error("nonlinear product"));
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<LinExpr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.unary()?);
        }
        let save = self.pos;
        match self.next() {
            Tok::Int(n) => {
                let mut r = Rat::from_integer(n);
                if self.eat(&Tok::Slash) {
                    match self.next() {
                        Tok::Int(d) if !d.is_zero() => r /= Rat::from_integer(d),
                        _ => return Err(self.error("expected a nonzero integer denominator")),
                    }
                }
                Ok(LinExpr::constant(r))
            }
            Tok::Var(name) => {
                if name == "_" {
                    self.anon += 1;
                    return Ok(LinExpr::var(Var::new(format!("_A{}", self.anon))));
                }
                Ok(LinExpr::var(Var::new(name)))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            t => {
                self.pos = save;
                Err(self.error(format!("expected a term, found {}", t.describe())))
            }
        }
    }
}

fn const_of(e: &LinExpr) -> Option<Rat> {
    if e.is_constant() {
        Some(e.constant_term().clone())
    } else {
        None
    }
}

/// Parses a file of clauses.
pub fn parse_clauses(text: &str) -> Result<ClauseSet, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = ClauseSet::new();
    while !p.at_eof() {
        let (line, col) = p.position();
        for c in p.clause()? {
            out.push(c).map_err(|e| ParseError::new(line, col, e.to_string()))?;
        }
    }
    Ok(out)
}

/// Parses exactly one clause (without disjunctions).
pub fn parse_clause(text: &str) -> Result<Clause, ParseError> {
    let mut p = Parser::new(text)?;
    let mut cs = p.clause()?;
    if !p.at_eof() {
        return Err(p.error("trailing input after clause"));
    }
    if cs.len() != 1 {
        return Err(ParseError::new(1, 1, "clause has a disjunctive body"));
    }
    Ok(cs.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prolog_style_clauses() {
        let s = parse_clauses(
            "fib(0,1).\nfib(1,1).\n\
             fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).\n\
             false :- F>1, r_fibonacci(0,F).",
        )
        .unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.arity("fib"), Some(2));
        assert!(s.clauses()[3].is_goal());
        assert_eq!(s.clauses()[2].body.len(), 2);
    }

    #[test]
    fn disjunction_and_disequality_split() {
        let s = parse_clauses("p(X) :- X=0 ; X=1.\nfalse :- Y\\=Z, q(Y,Z).").unwrap();
        assert_eq!(s.len(), 4);
        let s = parse_clauses("p(X) :- (X=0 ; X=1), q(X).").unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|c| c.body.len() == 1));
    }

    #[test]
    fn parenthesized_arithmetic() {
        let c = parse_clause("p(X) :- (X+1)*2 > 3.").unwrap();
        assert_eq!(c.constraint.to_string(), "2*X>1");
        let e = parse_clause("p(X) :- X*Y > 3.").unwrap_err();
        assert!(e.message.contains("nonlinear"));
    }

    #[test]
    fn tags_are_skipped() {
        let s = parse_clauses("S1. fib(0,1).\nG1. false :- F>1, r_fibonacci(0,F).").unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn round_trip() {
        let text = "new1(N1,U,V,U,N2,U,N3,F3) :- N1=<0, N2=<0, N4=N3-1, W=U+V, N3>=1, new2(N4,W,U,F3).";
        let c = parse_clause(text).unwrap();
        let again = parse_clause(&c.to_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn errors_are_located() {
        let e = parse_clauses("p(X) :- X>0.\nq(Y) :- Y >.").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_clauses("p(X).\np(X,Y).").unwrap_err();
        assert!(e.message.contains("arity"));
    }
}
