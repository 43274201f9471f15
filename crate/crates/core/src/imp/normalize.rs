//! Lowering of structured control flow to conditional and unconditional
//! jumps.

use std::collections::BTreeMap;
use std::fmt;

use super::{Cond, ImpError, ImpProgram, LStmt, Stmt};
use crate::lin::LinExpr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Assign(String, LinExpr),
    /// Jump to `then` if the condition holds, to `els` otherwise.
    CondJump {
        cond: Cond,
        then: usize,
        els: usize,
    },
    Jump(usize),
    Halt,
}

/// A program in jump-normal form. Jump targets are command indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormProgram {
    pub vars: Vec<String>,
    pub labels: Vec<String>,
    pub commands: Vec<Command>,
}

impl NormProgram {
    pub fn halt_index(&self) -> usize {
        self.commands.iter().position(|c| *c == Command::Halt).expect("normalized program has a halt")
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    /// Successor indices of command `i`.
    pub fn successors(&self, i: usize) -> Vec<usize> {
        match &self.commands[i] {
            Command::Assign(..) => vec![i + 1],
            Command::CondJump { then, els, .. } => vec![*then, *els],
            Command::Jump(t) => vec![*t],
            Command::Halt => vec![],
        }
    }

    /// Commands that are the target of a jump from the same or a later
    /// command. Every cycle of the control-flow graph passes through one.
    pub fn back_edge_targets(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for i in 0..self.commands.len() {
            for t in self.successors(i) {
                if t <= i && !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for NormProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.commands.iter().enumerate() {
            write!(f, "{}: ", self.labels[i])?;
            match c {
                Command::Assign(v, e) => writeln!(f, "{v} = {e}")?,
                Command::CondJump { cond, then, els } => {
                    writeln!(f, "if ({cond}) goto {} else goto {}", self.labels[*then], self.labels[*els])?
                }
                Command::Jump(t) => writeln!(f, "goto {}", self.labels[*t])?,
                Command::Halt => writeln!(f, "halt")?,
            }
        }
        Ok(())
    }
}

enum Target {
    Index(usize),
    Label(String),
    Pending,
}

struct Lowering {
    cmds: Vec<(Command, Target, Target)>,
    labels: BTreeMap<String, usize>,
    names: Vec<Option<String>>,
}

impl Lowering {
    fn push(&mut self, c: Command, a: Target, b: Target) -> usize {
        self.cmds.push((c, a, b));
        self.names.push(None);
        self.cmds.len() - 1
    }

    fn here(&self) -> usize {
        self.cmds.len()
    }

    fn stmts(&mut self, stmts: &[LStmt]) {
        for s in stmts {
            let start = self.here();
            if let Some(l) = &s.label {
                self.labels.insert(l.clone(), start);
            }
            self.stmt(&s.stmt);
            if let Some(l) = &s.label {
                if start == self.here() {
                    // Empty block: the label points at whatever comes next.
                    continue;
                }
                if self.names[start].is_none() {
                    self.names[start] = Some(l.clone());
                }
            }
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Assign(v, e) => {
                self.push(Command::Assign(v.clone(), e.clone()), Target::Pending, Target::Pending);
            }
            Stmt::Halt => {
                self.push(Command::Halt, Target::Pending, Target::Pending);
            }
            Stmt::Goto(l) => {
                self.push(Command::Jump(0), Target::Label(l.clone()), Target::Pending);
            }
            Stmt::Block(b) => self.stmts(b),
            Stmt::While(c, body) => {
                let head = self.push(jump_on(c), Target::Index(self.here() + 1), Target::Pending);
                self.stmts(body);
                self.push(Command::Jump(0), Target::Index(head), Target::Pending);
                let exit = self.here();
                self.cmds[head].2 = Target::Index(exit);
            }
            Stmt::If(c, then, els) => {
                if let (Some(a), Some(b)) = (single_goto(then), single_goto(els)) {
                    self.push(jump_on(c), Target::Label(a), Target::Label(b));
                    return;
                }
                let head = self.push(jump_on(c), Target::Index(self.here() + 1), Target::Pending);
                self.stmts(then);
                if els.is_empty() {
                    let exit = self.here();
                    self.cmds[head].2 = Target::Index(exit);
                } else {
                    let skip = self.push(Command::Jump(0), Target::Pending, Target::Pending);
                    let else_start = self.here();
                    self.cmds[head].2 = Target::Index(else_start);
                    self.stmts(els);
                    let exit = self.here();
                    self.cmds[skip].1 = Target::Index(exit);
                }
            }
        }
    }
}

fn jump_on(c: &Cond) -> Command {
    Command::CondJump { cond: c.clone(), then: 0, els: 0 }
}

fn single_goto(b: &[LStmt]) -> Option<String> {
    match b {
        [LStmt { label: None, stmt: Stmt::Goto(l), .. }] => Some(l.clone()),
        _ => None,
    }
}

/// Lowers `while` and `if` to jumps. A `while` at index `L` becomes
/// `L: if (c) goto L+1 else goto exit`, the body, and `goto L`.
pub fn normalize_jumps(p: &ImpProgram) -> Result<NormProgram, ImpError> {
    let mut lw = Lowering { cmds: Vec::new(), labels: BTreeMap::new(), names: Vec::new() };
    lw.stmts(&p.stmts);
    let n = lw.cmds.len();
    let resolve = |t: &Target, labels: &BTreeMap<String, usize>| -> Result<usize, ImpError> {
        match t {
            Target::Index(i) => Ok(*i),
            Target::Label(l) => {
                labels.get(l).copied().ok_or_else(|| ImpError::UndefinedLabel { label: l.clone(), line: 0, col: 0 })
            }
            Target::Pending => unreachable!("unpatched jump"),
        }
    };
    let mut commands = Vec::with_capacity(n);
    for (i, (c, a, b)) in lw.cmds.iter().enumerate() {
        let c = match c {
            Command::CondJump { cond, .. } => {
                Command::CondJump { cond: cond.clone(), then: resolve(a, &lw.labels)?, els: resolve(b, &lw.labels)? }
            }
            Command::Jump(_) => Command::Jump(resolve(a, &lw.labels)?),
            Command::Assign(..) if i + 1 == n => return Err(ImpError::FallsOffEnd),
            other => other.clone(),
        };
        commands.push(c);
    }
    let prog = NormProgram {
        vars: p.vars.clone(),
        labels: lw.names.iter().enumerate().map(|(i, l)| l.clone().unwrap_or_else(|| format!("#{i}"))).collect(),
        commands,
    };
    for i in 0..n {
        if prog.successors(i).iter().any(|&t| t >= n) {
            return Err(ImpError::FallsOffEnd);
        }
    }
    if prog.commands.iter().filter(|c| **c == Command::Halt).count() != 1 {
        return Err(ImpError::MissingHalt);
    }
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imp::parse_imp;

    const FIB: &str = "0: while (n>0) { t=u; u=u+v; v=t; n=n-1 }\nh: halt";

    #[test]
    fn fibonacci_has_seven_commands() {
        let p = normalize_jumps(&parse_imp(FIB).unwrap()).unwrap();
        assert_eq!(p.len(), 7);
        assert!(matches!(p.commands[0], Command::CondJump { then: 1, els: 6, .. }));
        assert!(matches!(&p.commands[1], Command::Assign(v, _) if v == "t"));
        assert!(matches!(&p.commands[4], Command::Assign(v, _) if v == "n"));
        assert_eq!(p.commands[5], Command::Jump(0));
        assert_eq!(p.commands[6], Command::Halt);
        assert_eq!(p.labels[0], "0");
        assert_eq!(p.labels[6], "h");
        assert_eq!(p.back_edge_targets(), vec![0]);
    }

    #[test]
    fn direct_conditional_jump() {
        let p = normalize_jumps(&parse_imp("0: if (n>0) goto 1 else goto h; 1: n = n - 1; goto 0; h: halt").unwrap())
            .unwrap();
        assert_eq!(p.len(), 4);
        assert!(matches!(p.commands[0], Command::CondJump { then: 1, els: 3, .. }));
        assert_eq!(p.back_edge_targets(), vec![0]);
    }

    #[test]
    fn nested_loops_have_distinct_headers() {
        let src = "while (i < n) { j = 0; while (j < i) { j = j + 1 }; i = i + 1 }; halt";
        let p = normalize_jumps(&parse_imp(src).unwrap()).unwrap();
        assert_eq!(p.back_edge_targets().len(), 2);
    }

    #[test]
    fn falling_off_the_end() {
        let p = parse_imp("halt; x = 1").unwrap();
        assert_eq!(normalize_jumps(&p), Err(ImpError::FallsOffEnd));
        let p = parse_imp("goto e; halt; e: while (x > 0) { x = x - 1 }").unwrap();
        assert_eq!(normalize_jumps(&p), Err(ImpError::FallsOffEnd));
    }
}
