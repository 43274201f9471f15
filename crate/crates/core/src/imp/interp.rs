use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{CmpOp, Command, Cond, LStmt, NormProgram, Stmt};
use crate::lin::LinExpr;

pub const DEFAULT_MAX_STEPS: u64 = 100_000;

pub type Env = BTreeMap<String, BigInt>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Halted { env: Env, steps: u64 },
    OutOfFuel,
}

impl Outcome {
    pub fn env(&self) -> Option<&Env> {
        match self {
            Outcome::Halted { env, .. } => Some(env),
            Outcome::OutOfFuel => None,
        }
    }
}

fn eval(e: &LinExpr, env: &Env) -> BigInt {
    let mut acc = e.constant_term().to_integer();
    for (v, c) in e.coeffs() {
        let x = env.get(v.name()).cloned().unwrap_or_else(BigInt::zero);
        acc += c.to_integer() * x;
    }
    acc
}

fn test(c: &Cond, env: &Env) -> bool {
    let l = eval(&c.lhs, env);
    let r = eval(&c.rhs, env);
    match c.op {
        CmpOp::Eq => l == r,
        CmpOp::Ne => l != r,
        CmpOp::Lt => l < r,
        CmpOp::Le => l <= r,
        CmpOp::Gt => l > r,
        CmpOp::Ge => l >= r,
    }
}

/// Runs a normalized program. Variables missing from `env` start at 0.
/// Each executed command other than `halt` is one step.
pub fn interpret(p: &NormProgram, env: &Env, max_steps: u64) -> Outcome {
    let mut env: Env = p.vars.iter().map(|v| (v.clone(), env.get(v).cloned().unwrap_or_else(BigInt::zero))).collect();
    let mut pc = 0;
    let mut steps = 0;
    loop {
        match &p.commands[pc] {
            Command::Halt => return Outcome::Halted { env, steps },
            _ if steps >= max_steps => return Outcome::OutOfFuel,
            Command::Assign(v, e) => {
                let x = eval(e, &env);
                env.insert(v.clone(), x);
                pc += 1;
            }
            Command::CondJump { cond, then, els } => {
                pc = if test(cond, &env) { *then } else { *els };
            }
            Command::Jump(t) => pc = *t,
        }
        steps += 1;
    }
}

/// Direct evaluation of a goto-free structured program, used to check the
/// lowering. `None` if the program uses `goto` or runs out of fuel.
pub fn eval_structured(stmts: &[LStmt], env: &Env, max_steps: u64) -> Option<Env> {
    fn run(stmts: &[LStmt], env: &mut Env, fuel: &mut u64) -> Option<bool> {
        for s in stmts {
            if *fuel == 0 {
                return None;
            }
            *fuel -= 1;
            match &s.stmt {
                Stmt::Assign(v, e) => {
                    let x = eval(e, env);
                    env.insert(v.clone(), x);
                }
                Stmt::Halt => return Some(true),
                Stmt::Goto(_) => return None,
                Stmt::Block(b) => {
                    if run(b, env, fuel)? {
                        return Some(true);
                    }
                }
                Stmt::If(c, a, b) => {
                    let branch = if test(c, env) { a } else { b };
                    if run(branch, env, fuel)? {
                        return Some(true);
                    }
                }
                Stmt::While(c, b) => {
                    while test(c, env) {
                        if *fuel == 0 {
                            return None;
                        }
                        *fuel -= 1;
                        if run(b, env, fuel)? {
                            return Some(true);
                        }
                    }
                }
            }
        }
        Some(false)
    }
    let mut env = env.clone();
    let mut fuel = max_steps;
    run(stmts, &mut env, &mut fuel)?;
    Some(env)
}
