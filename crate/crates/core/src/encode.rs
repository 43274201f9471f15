//! Translation of a program and its specification into constrained Horn
//! clauses.
//!
//! A configuration is flattened into the atom arguments: a label (the
//! command index) followed by one integer per program variable. For a
//! program `prog` with parameters `P1..Ps` and result variable `zk`:
//!
//! ```text
//! r_prog(P1,...,Ps,Zk) :- initCf(L,X..,P1,...,Ps), reach(L,X..,H,Y..), finalCf(H,Y..,Zk).
//! initCf(0,X..,P1,...,Ps) :- bindings and precondition.
//! reach(L,X..,L,X..).
//! reach(L,X..,M,Z..) :- tr(L,X..,K,Y..), reach(K,Y..,M,Z..).
//! finalCf(h,X..,Xk).
//! tr(i,X..,j,Y..) :- one clause per transition of command i.
//! ```

use std::collections::BTreeSet;

use crate::chc::{canonicalize, drop_defined_locals, ArityError, Atom, Clause, ClauseSet, Term};
use crate::imp::{normalize_jumps, parse_imp, Command, ImpError, ImpProgram, NormProgram};
use crate::lin::{LinAtomicRel, LinConstraint, LinExpr, Rel, Var, VarGen};
use crate::spec::{parse_spec, Binding, SpecError, SpecTriple};

pub const INIT: &str = "initCf";
pub const FINAL: &str = "finalCf";
pub const REACH: &str = "reach";
pub const TR: &str = "tr";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("program: {0}")]
    Program(#[from] ImpError),
    #[error("specification: {0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Arity(#[from] ArityError),
}

/// The clauses encoding a program's semantics together with the facts the
/// interpreter-removal step needs about them.
#[derive(Debug, Clone)]
pub struct OpSem {
    pub clauses: ClauseSet,
    /// Name of the `r_prog` predicate.
    pub relation: String,
    /// Program variables in environment-tuple order.
    pub state: Vec<String>,
    /// Labels at which a cycle of the control-flow graph may be entered.
    pub cut_labels: Vec<usize>,
    pub halt: usize,
}

impl OpSem {
    pub fn arity(&self) -> usize {
        self.state.len()
    }

    /// Argument positions holding labels for each interpreter predicate.
    pub fn label_positions(&self, pred: &str) -> Vec<usize> {
        let s = self.state.len();
        match pred {
            INIT | FINAL => vec![0],
            REACH | TR => vec![0, s + 1],
            _ => vec![],
        }
    }

    /// Unfoldability annotation of an atom.
    pub fn unfoldable(&self, a: &Atom) -> bool {
        match a.pred.as_str() {
            INIT | FINAL | TR => true,
            REACH => match &a.args[0] {
                Term::Int(l) => {
                    let l: usize = l.try_into().unwrap_or(usize::MAX);
                    !self.cut_labels.contains(&l)
                }
                _ => false,
            },
            _ => false,
        }
    }

    pub fn is_interpreter(pred: &str) -> bool {
        matches!(pred, INIT | FINAL | REACH | TR)
    }
}

/// Hands out clause variable names that do not collide within a clause.
struct Namer {
    used: BTreeSet<String>,
}

impl Namer {
    fn new<'a>(reserved: impl IntoIterator<Item = &'a Var>) -> Self {
        Namer { used: reserved.into_iter().map(|v| v.name().to_string()).collect() }
    }

    fn name(&mut self, base: &str) -> Var {
        let mut n = base.to_string();
        let mut k = 1;
        while self.used.contains(&n) {
            n = format!("{base}{k}");
            k += 1;
        }
        self.used.insert(n.clone());
        Var::new(n)
    }

    fn state(&mut self, vars: &[String]) -> Vec<Var> {
        vars.iter().map(|v| self.name(&v.to_uppercase())).collect()
    }
}

fn label(i: usize) -> Term {
    Term::Int(i.into())
}

fn vars_terms(vs: &[Var]) -> Vec<Term> {
    vs.iter().cloned().map(Term::Var).collect()
}

fn config(l: Term, vs: &[Var]) -> Vec<Term> {
    let mut v = vec![l];
    v.extend(vars_terms(vs));
    v
}

fn pair(l1: Term, s1: &[Var], l2: Term, s2: &[Var]) -> Vec<Term> {
    let mut v = config(l1, s1);
    v.extend(config(l2, s2));
    v
}

/// Maps an expression over program variables to one over state variables.
fn over_state(e: &LinExpr, order: &[String], state: &[Var]) -> LinExpr {
    let map = order.iter().map(Var::new).zip(state.iter().cloned()).collect();
    e.rename(&map)
}

/// Builds the operational-semantics clauses for a normalized program.
pub fn encode_opsem(p: &NormProgram, t: &SpecTriple) -> Result<OpSem, EncodeError> {
    let order = t.env_order(&p.vars);
    let relation = format!("r_{}", t.program);
    let halt = p.halt_index();
    let mut out = ClauseSet::new();

    // r_prog
    {
        let mut nm = Namer::new(&t.params);
        let zk = nm.name("Zk");
        let l0 = nm.name("L");
        let s0 = nm.state(&order);
        let lh = nm.name("H");
        let sh = nm.state(&order);
        let mut head_args = vars_terms(&t.params);
        head_args.push(Term::Var(zk.clone()));
        let mut init_args = config(Term::Var(l0.clone()), &s0);
        init_args.extend(vars_terms(&t.params));
        let mut fin_args = config(Term::Var(lh.clone()), &sh);
        fin_args.push(Term::Var(zk));
        out.push(Clause::new(
            Some(Atom::new(&relation, head_args)),
            LinConstraint::truth(),
            vec![
                Atom::new(INIT, init_args),
                Atom::new(REACH, pair(Term::Var(l0), &s0, Term::Var(lh), &sh)),
                Atom::new(FINAL, fin_args),
            ],
        ))?;
    }

    // initCf
    {
        let mut nm = Namer::new(&t.params);
        let s = nm.state(&order);
        let mut rels = Vec::new();
        for (v, x) in order.iter().zip(&s) {
            let rhs = match t.binding(v) {
                Some(Binding::Param(q)) => LinExpr::var(q.clone()),
                Some(Binding::Const(c)) => LinExpr::constant_int(c.clone()),
                None => LinExpr::zero(),
            };
            rels.push(LinAtomicRel::eq(LinExpr::var(x.clone()), rhs));
        }
        rels.extend(t.pre.conjuncts().iter().cloned());
        let mut args = config(label(0), &s);
        args.extend(vars_terms(&t.params));
        out.push(Clause::new(Some(Atom::new(INIT, args)), LinConstraint::new(rels), t.pre_atoms.clone()))?;
    }

    // finalCf
    {
        let mut nm = Namer::new([]);
        let s = nm.state(&order);
        let k = order.iter().position(|v| *v == t.result_var).expect("result variable belongs to the program");
        let mut args = config(label(halt), &s);
        args.push(Term::Var(s[k].clone()));
        out.push(Clause::fact(Atom::new(FINAL, args), LinConstraint::truth()))?;
    }

    // reach
    {
        let mut nm = Namer::new([]);
        let l = nm.name("L");
        let s = nm.state(&order);
        out.push(Clause::fact(
            Atom::new(REACH, pair(Term::Var(l.clone()), &s, Term::Var(l.clone()), &s)),
            LinConstraint::truth(),
        ))?;
        let k = nm.name("K");
        let s1 = nm.state(&order);
        let m = nm.name("M");
        let s2 = nm.state(&order);
        out.push(Clause::new(
            Some(Atom::new(REACH, pair(Term::Var(l.clone()), &s, Term::Var(m.clone()), &s2))),
            LinConstraint::truth(),
            vec![
                Atom::new(TR, pair(Term::Var(l), &s, Term::Var(k.clone()), &s1)),
                Atom::new(REACH, pair(Term::Var(k), &s1, Term::Var(m), &s2)),
            ],
        ))?;
    }

    // tr
    for (i, cmd) in p.commands.iter().enumerate() {
        let mut nm = Namer::new([]);
        let s = nm.state(&order);
        let step =
            |j: usize, c: LinConstraint, s2: &[Var]| Clause::fact(Atom::new(TR, pair(label(i), &s, label(j), s2)), c);
        match cmd {
            Command::Assign(v, e) => {
                let k = order.iter().position(|w| w == v).expect("assigned variable belongs to the program");
                let mut s2 = s.clone();
                s2[k] = nm.name(&format!("{}1", v.to_uppercase()));
                let c = LinConstraint::single(LinAtomicRel::eq(LinExpr::var(s2[k].clone()), over_state(e, &order, &s)));
                out.push(step(i + 1, c, &s2))?;
            }
            Command::CondJump { cond, then, els } => {
                for r in cond.holds_as() {
                    let c = LinConstraint::single(over_rel(&r, &order, &s));
                    out.push(step(*then, c, &s))?;
                }
                for r in cond.fails_as() {
                    let c = LinConstraint::single(over_rel(&r, &order, &s));
                    out.push(step(*els, c, &s))?;
                }
            }
            Command::Jump(j) => out.push(step(*j, LinConstraint::truth(), &s))?,
            Command::Halt => {}
        }
    }

    Ok(OpSem { clauses: out, relation, state: order, cut_labels: p.back_edge_targets(), halt })
}

fn over_rel(r: &LinAtomicRel, order: &[String], s: &[Var]) -> LinAtomicRel {
    LinAtomicRel::from_zero_form(over_state(r.expr(), order, s), r.rel()).tightened()
}

/// The partial-correctness goals: for each clause `f(X..,Y) :- c, B` two
/// goals `false :- c, Z>Y, B', r_prog(X..,Z)` and the same with `Z<Y`,
/// where `B'` is `B` with `f` replaced by `r_prog`.
pub fn build_pcorr(t: &SpecTriple) -> Result<ClauseSet, EncodeError> {
    let f_def = t.f_def();
    if f_def.is_empty() {
        return Err(SpecError::EmptyDefinition(t.post.clone()).into());
    }
    let relation = format!("r_{}", t.program);
    let mut out = ClauseSet::new();
    for c in f_def {
        let head = c.head.as_ref().expect("definite clause");
        let (xs, y) = head.args.split_at(head.args.len() - 1);
        let y = &y[0];
        let mut gen = VarGen::with_prefix("Z");
        gen.reserve_all(c.vars().iter());
        let z = if c.vars().iter().any(|v| v.name() == "Z") { gen.fresh() } else { Var::new("Z") };
        let mut body: Vec<Atom> = c
            .body
            .iter()
            .map(|a| if a.pred == t.post { Atom::new(&relation, a.args.clone()) } else { a.clone() })
            .collect();
        let mut args = xs.to_vec();
        args.push(Term::Var(z.clone()));
        body.push(Atom::new(&relation, args));
        for rel in [Rel::Gt, Rel::Lt] {
            let cmp = LinAtomicRel::new(LinExpr::var(z.clone()), rel, y.to_expr());
            let g = Clause::goal(c.constraint.with(cmp), body.clone());
            let mut g = drop_defined_locals(&g);
            if let Some(yv) = y.as_var() {
                if !g.vars().contains(yv) {
                    g = g.rename(&[(z.clone(), yv.clone())].into_iter().collect());
                }
            }
            out.push(g)?;
        }
    }
    Ok(out)
}

/// `F_pcorr ∪ Aux ∪ OpSem` without duplicates; definite clauses first.
pub fn assemble_pc(opsem: &OpSem, t: &SpecTriple) -> Result<ClauseSet, EncodeError> {
    let goals = build_pcorr(t)?;
    let mut seen = BTreeSet::new();
    let mut out = ClauseSet::new();
    let definite = opsem.clauses.iter().chain(t.aux());
    for c in definite.chain(goals.goals()) {
        if seen.insert(canonicalize(c).to_string()) {
            out.push(c.clone())?;
        }
    }
    Ok(out)
}

/// A program with its specification, encoded.
#[derive(Debug, Clone)]
pub struct Problem {
    pub source: ImpProgram,
    pub program: NormProgram,
    pub triple: SpecTriple,
    pub opsem: OpSem,
    pub pc: ClauseSet,
}

impl Problem {
    pub fn load(program: &str, spec: &str) -> Result<Problem, EncodeError> {
        let source = parse_imp(program)?;
        let triple = parse_spec(spec)?;
        triple.check_against(&source)?;
        let program = normalize_jumps(&source)?;
        let opsem = encode_opsem(&program, &triple)?;
        let pc = assemble_pc(&opsem, &triple)?;
        Ok(Problem { source, program, triple, opsem, pc })
    }

    /// The goals of the encoded problem.
    pub fn goals(&self) -> ClauseSet {
        ClauseSet::from_clauses(self.pc.goals().cloned()).expect("subset of a consistent set")
    }
}
