//! A small imperative language: integer variables, assignments, `if`,
//! `while`, `goto` and a single `halt`.
//!
//! ```text
//! program ::= stmt (";"? stmt)*
//! stmt    ::= [label ":"] ( var "=" expr | "if" "(" cond ")" block ["else" block]
//!           | "while" "(" cond ")" block | "goto" label | "halt" | "{" program "}" )
//! block   ::= stmt | "{" program "}"
//! cond    ::= expr ("==" | "!=" | "<" | "<=" | ">" | ">=") expr
//! label   ::= identifier | integer
//! ```

mod interp;
mod normalize;

pub use interp::{eval_structured, interpret, Env, Outcome, DEFAULT_MAX_STEPS};
pub use normalize::{normalize_jumps, Command, NormProgram};

use std::fmt;

use crate::lin::{LinAtomicRel, LinExpr, Rel, Var};
use crate::syntax::{tokenize, ParseError, Spanned, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// A single comparison between linear expressions over program variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cond {
    pub lhs: LinExpr,
    pub op: CmpOp,
    pub rhs: LinExpr,
}

impl Cond {
    /// The condition as a disjunction of relations (two for `!=`).
    pub fn holds_as(&self) -> Vec<LinAtomicRel> {
        let mk = |r| LinAtomicRel::new(self.lhs.clone(), r, self.rhs.clone());
        match self.op {
            CmpOp::Eq => vec![mk(Rel::Eq)],
            CmpOp::Ne => vec![mk(Rel::Lt), mk(Rel::Gt)],
            CmpOp::Lt => vec![mk(Rel::Lt)],
            CmpOp::Le => vec![mk(Rel::Le)],
            CmpOp::Gt => vec![mk(Rel::Gt)],
            CmpOp::Ge => vec![mk(Rel::Ge)],
        }
    }

    /// The negation as a disjunction, exact over the integers.
    pub fn fails_as(&self) -> Vec<LinAtomicRel> {
        let mk = |r| LinAtomicRel::new(self.lhs.clone(), r, self.rhs.clone());
        match self.op {
            CmpOp::Ne => vec![mk(Rel::Eq)],
            _ => {
                // A single relation; its integer negation.
                let r = &self.holds_as()[0];
                r.negate_int()
            }
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.lhs, self.op.symbol(), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign(String, LinExpr),
    If(Cond, Vec<LStmt>, Vec<LStmt>),
    While(Cond, Vec<LStmt>),
    Goto(String),
    Halt,
    Block(Vec<LStmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LStmt {
    pub label: Option<String>,
    pub stmt: Stmt,
    pub line: usize,
    pub col: usize,
}

/// A parsed program with its structured control flow intact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpProgram {
    pub stmts: Vec<LStmt>,
    /// Program variables in order of first textual occurrence.
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImpError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{line}:{col}: duplicate label `{label}`")]
    DuplicateLabel { label: String, line: usize, col: usize },
    #[error("{line}:{col}: jump to undefined label `{label}`")]
    UndefinedLabel { label: String, line: usize, col: usize },
    #[error("multiple halt commands (second at {line}:{col})")]
    MultipleHalt { line: usize, col: usize },
    #[error("missing halt command")]
    MissingHalt,
    #[error("execution can run past the last command")]
    FallsOffEnd,
}

impl ImpProgram {
    pub fn halt_count(&self) -> usize {
        fn count(stmts: &[LStmt]) -> usize {
            stmts
                .iter()
                .map(|s| match &s.stmt {
                    Stmt::Halt => 1,
                    Stmt::If(_, a, b) => count(a) + count(b),
                    Stmt::While(_, b) | Stmt::Block(b) => count(b),
                    _ => 0,
                })
                .sum()
        }
        count(&self.stmts)
    }

    pub fn has_goto(&self) -> bool {
        fn any(stmts: &[LStmt]) -> bool {
            stmts.iter().any(|s| match &s.stmt {
                Stmt::Goto(_) => true,
                Stmt::If(_, a, b) => any(a) || any(b),
                Stmt::While(_, b) | Stmt::Block(b) => any(b),
                _ => false,
            })
        }
        any(&self.stmts)
    }
}

/// Parses program text and checks labels and the halt command.
pub fn parse_imp(text: &str) -> Result<ImpProgram, ImpError> {
    let mut p = ImpParser { toks: tokenize(text)?, pos: 0, vars: Vec::new() };
    let mut stmts = Vec::new();
    while p.peek() != &Tok::Eof {
        stmts.push(p.stmt()?);
        while p.eat(&Tok::Semi) {}
    }
    let prog = ImpProgram { stmts, vars: p.vars };
    check_labels(&prog)?;
    Ok(prog)
}

fn check_labels(p: &ImpProgram) -> Result<(), ImpError> {
    let mut labels: Vec<String> = Vec::new();
    let mut halts: Vec<(usize, usize)> = Vec::new();
    let mut gotos: Vec<(String, usize, usize)> = Vec::new();
    fn walk(
        stmts: &[LStmt],
        labels: &mut Vec<String>,
        halts: &mut Vec<(usize, usize)>,
        gotos: &mut Vec<(String, usize, usize)>,
    ) -> Result<(), ImpError> {
        for s in stmts {
            if let Some(l) = &s.label {
                if labels.contains(l) {
                    return Err(ImpError::DuplicateLabel { label: l.clone(), line: s.line, col: s.col });
                }
                labels.push(l.clone());
            }
            match &s.stmt {
                Stmt::Halt => halts.push((s.line, s.col)),
                Stmt::Goto(l) => gotos.push((l.clone(), s.line, s.col)),
                Stmt::If(_, a, b) => {
                    walk(a, labels, halts, gotos)?;
                    walk(b, labels, halts, gotos)?;
                }
                Stmt::While(_, b) | Stmt::Block(b) => walk(b, labels, halts, gotos)?,
                Stmt::Assign(..) => {}
            }
        }
        Ok(())
    }
    walk(&p.stmts, &mut labels, &mut halts, &mut gotos)?;
    if halts.is_empty() {
        return Err(ImpError::MissingHalt);
    }
    if halts.len() > 1 {
        let (line, col) = halts[1];
        return Err(ImpError::MultipleHalt { line, col });
    }
    for (l, line, col) in gotos {
        if !labels.contains(&l) {
            return Err(ImpError::UndefinedLabel { label: l, line, col });
        }
    }
    Ok(())
}

struct ImpParser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: Vec<String>,
}

impl ImpParser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn err(&self, msg: impl Into<String>) -> ImpError {
        let (l, c) = self.here();
        ImpError::Parse(ParseError::new(l, c, msg))
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ImpError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {}, found {}", t.describe(), self.peek().describe())))
        }
    }

    fn note_var(&mut self, v: &str) {
        if !self.vars.iter().any(|w| w == v) {
            self.vars.push(v.to_string());
        }
    }

    fn label_token(&self, t: &Tok) -> Option<String> {
        match t {
            Tok::Ident(s) | Tok::Var(s) if !is_keyword(s) => Some(s.clone()),
            Tok::Int(n) => Some(n.to_string()),
            _ => None,
        }
    }

    fn stmt(&mut self) -> Result<LStmt, ImpError> {
        let (line, col) = self.here();
        let mut label = None;
        if let Some(l) = self.label_token(&self.peek().clone()) {
            if *self.peek2() == Tok::Colon {
                self.next();
                self.next();
                label = Some(l);
            }
        }
        let stmt = self.bare_stmt()?;
        Ok(LStmt { label, stmt, line, col })
    }

    fn bare_stmt(&mut self) -> Result<Stmt, ImpError> {
        match self.peek().clone() {
            Tok::LBrace => Ok(Stmt::Block(self.block()?)),
            Tok::Ident(k) if k == "halt" => {
                self.next();
                Ok(Stmt::Halt)
            }
            Tok::Ident(k) if k == "goto" => {
                self.next();
                let t = self.next();
                match self.label_token(&t) {
                    Some(l) => Ok(Stmt::Goto(l)),
                    None => Err(self.err(format!("expected a label, found {}", t.describe()))),
                }
            }
            Tok::Ident(k) if k == "while" => {
                self.next();
                let c = self.paren_cond()?;
                let body = self.block()?;
                Ok(Stmt::While(c, body))
            }
            Tok::Ident(k) if k == "if" => {
                self.next();
                let c = self.paren_cond()?;
                let then = self.block()?;
                let els = if matches!(self.peek(), Tok::Ident(k) if k == "else") {
                    self.next();
                    self.block()?
                } else {
                    vec![]
                };
                Ok(Stmt::If(c, then, els))
            }
            Tok::Ident(v) | Tok::Var(v) if !is_keyword(&v) => {
                self.next();
                self.expect(Tok::Eq)?;
                self.note_var(&v);
                let e = self.expr()?;
                Ok(Stmt::Assign(v, e))
            }
            t => Err(self.err(format!("expected a statement, found {}", t.describe()))),
        }
    }

    fn block(&mut self) -> Result<Vec<LStmt>, ImpError> {
        if !self.eat(&Tok::LBrace) {
            return Ok(vec![self.stmt()?]);
        }
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if *self.peek() == Tok::Eof {
                return Err(self.err("unclosed `{`"));
            }
            out.push(self.stmt()?);
            while self.eat(&Tok::Semi) {}
        }
        Ok(out)
    }

    fn paren_cond(&mut self) -> Result<Cond, ImpError> {
        self.expect(Tok::LParen)?;
        let lhs = self.expr()?;
        let op = match self.next() {
            Tok::Eq => {
                self.expect(Tok::Eq).map_err(|_| self.err("use `==` for comparison"))?;
                CmpOp::Eq
            }
            Tok::Neq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            t => return Err(self.err(format!("expected a comparison, found {}", t.describe()))),
        };
        let rhs = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(Cond { lhs, op, rhs })
    }

    fn expr(&mut self) -> Result<LinExpr, ImpError> {
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

    fn product(&mut self) -> Result<LinExpr, ImpError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary()?;
            acc = if acc.is_constant() {
                rhs * acc.constant_term().clone()
            } else if rhs.is_constant() {
                acc * rhs.constant_term().clone()
            } else {
                return Err(self.err("nonlinear product"));
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<LinExpr, ImpError> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.unary()?);
        }
        let save = self.pos;
        match self.next() {
            Tok::Int(n) => Ok(LinExpr::constant_int(n)),
            Tok::Ident(v) | Tok::Var(v) if !is_keyword(&v) => {
                self.note_var(&v);
                Ok(LinExpr::var(Var::new(v)))
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            t => {
                self.pos = save;
                Err(self.err(format!("expected an expression, found {}", t.describe())))
            }
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "while" | "if" | "else" | "goto" | "halt")
}

impl fmt::Display for ImpProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_stmts(f: &mut fmt::Formatter<'_>, stmts: &[LStmt], indent: usize) -> fmt::Result {
            for s in stmts {
                write!(f, "{:indent$}", "")?;
                if let Some(l) = &s.label {
                    write!(f, "{l}: ")?;
                }
                match &s.stmt {
                    Stmt::Assign(v, e) => writeln!(f, "{v} = {e};")?,
                    Stmt::Goto(l) => writeln!(f, "goto {l};")?,
                    Stmt::Halt => writeln!(f, "halt")?,
                    Stmt::While(c, b) => {
                        writeln!(f, "while ({c}) {{")?;
                        write_stmts(f, b, indent + 2)?;
                        writeln!(f, "{:indent$}}}", "")?;
                    }
                    Stmt::If(c, a, b) => {
                        writeln!(f, "if ({c}) {{")?;
                        write_stmts(f, a, indent + 2)?;
                        if b.is_empty() {
                            writeln!(f, "{:indent$}}}", "")?;
                        } else {
                            writeln!(f, "{:indent$}}} else {{", "")?;
                            write_stmts(f, b, indent + 2)?;
                            writeln!(f, "{:indent$}}}", "")?;
                        }
                    }
                    Stmt::Block(b) => {
                        writeln!(f, "{{")?;
                        write_stmts(f, b, indent + 2)?;
                        writeln!(f, "{:indent$}}}", "")?;
                    }
                }
            }
            Ok(())
        }
        write_stmts(f, &self.stmts, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FIB: &str = "0: while (n>0) { t=u; u=u+v; v=t; n=n-1 }\nh: halt";

    #[test]
    fn fibonacci_parses_to_two_commands() {
        let p = parse_imp(FIB).unwrap();
        assert_eq!(p.stmts.len(), 2);
        assert_eq!(p.stmts[0].label.as_deref(), Some("0"));
        assert!(matches!(p.stmts[0].stmt, Stmt::While(_, ref b) if b.len() == 4));
        assert_eq!(p.stmts[1].stmt, Stmt::Halt);
        assert_eq!(p.vars, vec!["n", "t", "u", "v"]);
    }

    #[test]
    fn single_halt() {
        let p = parse_imp("h: halt").unwrap();
        assert_eq!(p.stmts.len(), 1);
    }

    #[test]
    fn label_errors() {
        assert!(matches!(parse_imp("halt; halt"), Err(ImpError::MultipleHalt { .. })));
        assert!(matches!(parse_imp("x = 1"), Err(ImpError::MissingHalt)));
        assert!(matches!(parse_imp("a: x=1; a: halt"), Err(ImpError::DuplicateLabel { .. })));
        assert!(matches!(parse_imp("goto b; halt"), Err(ImpError::UndefinedLabel { .. })));
    }

    #[test]
    fn syntax_errors_are_located() {
        match parse_imp("x = 1;\nwhile (x > ) { x = x - 1 }\nhalt") {
            Err(ImpError::Parse(e)) => assert_eq!((e.line, e.col), (2, 12)),
            other => panic!("{other:?}"),
        }
        assert!(parse_imp("x = y * z; halt").is_err());
    }

    #[test]
    fn pretty_printing_reparses() {
        let src = "a = 3; while (a != 0) { if (a > 1) { a = a - 2 } else { a = a - 1 } }; halt";
        let p = parse_imp(src).unwrap();
        let q = parse_imp(&p.to_string()).unwrap();
        assert_eq!(p.stmts.len(), q.stmts.len());
        assert_eq!(p.to_string(), q.to_string());
    }
}
