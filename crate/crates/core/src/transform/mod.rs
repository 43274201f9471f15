//! Unfold/define/fold transformations: removal of the interpreter and
//! linearization.

mod lin;
mod ri;

pub use lin::{linearize, replay_linearize, LinOutput};
pub use ri::{remove_interpreter, replay_remove_interpreter, RiOutput};

use std::collections::HashMap;
use std::fmt;

use crate::chc::{canonicalize, Atom, Clause, ClauseSet};
use crate::lin::{sat_q, LinConstraint, QSat, Var, VarGen};
use crate::solve::resolve_head;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("clause is not linear: {0}")]
    Nonlinear(String),
    #[error("not a goal: {0}")]
    NotAGoal(String),
    #[error("trace replay diverged at step {step}: {message}")]
    Replay { step: usize, message: String },
    #[error("gave up after {0} unfolding steps")]
    Budget(usize),
    #[error("{0}")]
    Arity(String),
}

/// Unfolds the body atom at `pos` of `c` with every clause of `cls` whose
/// head has the same predicate. Results whose constraint is unsatisfiable
/// over the rationals are dropped.
pub fn unfold(c: &Clause, pos: usize, cls: &[Clause], gen: &mut VarGen) -> Vec<Clause> {
    gen.reserve_all(c.vars().iter());
    let atom = &c.body[pos];
    let mut out = Vec::new();
    for k in cls {
        let Some(h) = &k.head else { continue };
        if h.pred != atom.pred || h.arity() != atom.arity() {
            continue;
        }
        let k = k.rename_apart(gen);
        let locals: std::collections::BTreeSet<Var> = k.vars().into_iter().collect();
        let (s, eqs) = resolve_head(atom, k.head.as_ref().unwrap(), |v| locals.contains(v));
        let constraint = LinConstraint::new(
            c.constraint
                .conjuncts()
                .iter()
                .cloned()
                .chain(eqs)
                .chain(s.apply_constraint(&k.constraint).conjuncts().iter().cloned()),
        );
        if constraint.is_false() || matches!(sat_q(&constraint), Ok(QSat::Unsat)) {
            continue;
        }
        let mut body: Vec<Atom> = c.body[..pos].to_vec();
        body.extend(k.body.iter().map(|b| s.apply_atom(b)));
        body.extend(c.body[pos + 1..].iter().cloned());
        out.push(Clause::new(c.head.clone(), constraint, body));
    }
    out
}

/// Unfolding with a private fresh-variable source.
pub fn unfold_with(c: &Clause, pos: usize, cls: &ClauseSet) -> Vec<Clause> {
    let mut gen = VarGen::with_prefix("_U");
    unfold(c, pos, cls.clauses(), &mut gen)
}

/// An introduced predicate and its defining clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub pred: String,
    pub clause: Clause,
}

/// Introduced definitions, keyed by the canonical form of their body
/// (together with the head variable tuple).
#[derive(Debug, Clone)]
pub struct DefsTable {
    prefix: String,
    entries: Vec<Definition>,
    index: HashMap<String, usize>,
}

impl DefsTable {
    /// New predicates are named `<prefix>1`, `<prefix>2`, ...
    pub fn new(prefix: &str) -> Self {
        DefsTable { prefix: prefix.to_string(), entries: Vec::new(), index: HashMap::new() }
    }

    fn key(body: &[Atom], head_vars: &[Var]) -> String {
        let c = Clause::new(Some(Atom::with_vars("$", head_vars)), LinConstraint::truth(), body.to_vec());
        canonicalize(&c).to_string()
    }

    /// The predicate defined by `newp(head_vars) :- body`, introducing it on
    /// a miss. The flag tells whether it was introduced by this call.
    pub fn lookup_or_define(&mut self, body: &[Atom], head_vars: &[Var]) -> (String, bool) {
        let key = Self::key(body, head_vars);
        if let Some(&i) = self.index.get(&key) {
            return (self.entries[i].pred.clone(), false);
        }
        let pred = format!("{}{}", self.prefix, self.entries.len() + 1);
        let clause = Clause::new(Some(Atom::with_vars(&pred, head_vars)), LinConstraint::truth(), body.to_vec());
        self.index.insert(key, self.entries.len());
        self.entries.push(Definition { pred: pred.clone(), clause: clause.tidy() });
        (pred, true)
    }

    pub fn lookup(&self, body: &[Atom], head_vars: &[Var]) -> Option<&Definition> {
        self.index.get(&Self::key(body, head_vars)).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[Definition] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest number of atoms in a definition body.
    pub fn max_body(&self) -> usize {
        self.entries.iter().map(|d| d.clause.body.len()).max().unwrap_or(0)
    }

    pub fn clauses(&self) -> Vec<Clause> {
        self.entries.iter().map(|d| d.clause.clone()).collect()
    }
}

/// One rule application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    /// `clause` was unfolded (at `atom`, or at every atom when `None`),
    /// giving `results`.
    Unfold {
        clause: Clause,
        atom: Option<usize>,
        results: Vec<Clause>,
    },
    Define {
        def: Clause,
    },
    Fold {
        clause: Clause,
        result: Clause,
    },
    /// `clause` is part of the output.
    Emit {
        clause: Clause,
    },
}

fn canon(c: &Clause) -> String {
    canonicalize(c).to_string()
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Unfold { clause, atom, results } => {
                let at = atom.map(|i| i.to_string()).unwrap_or_else(|| "*".into());
                let rs: Vec<String> = results.iter().map(canon).collect();
                write!(f, "unfold {at} | {} | {}", canon(clause), rs.join(" ; "))
            }
            TraceStep::Define { def } => write!(f, "define | {}", canon(def)),
            TraceStep::Fold { clause, result } => {
                write!(f, "fold | {} | {}", canon(clause), canon(result))
            }
            TraceStep::Emit { clause } => write!(f, "emit | {}", canon(clause)),
        }
    }
}

/// The sequence of rule applications performed by a transformation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransformTrace {
    pub steps: Vec<TraceStep>,
}

impl TransformTrace {
    pub fn push(&mut self, s: TraceStep) {
        self.steps.push(s);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, f: impl Fn(&TraceStep) -> bool) -> usize {
        self.steps.iter().filter(|s| f(s)).count()
    }
}

impl fmt::Display for TransformTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Whether two clause lists are equal after canonical renaming.
pub(crate) fn same_clauses(a: &[Clause], b: &[Clause]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| canon(x) == canon(y))
}

/// The folded clause: `H :- c, newp(X..)` where `X..` are the variables of
/// the body atoms that also occur in the head or the constraint, in order
/// of first occurrence.
pub(crate) fn fold_vars(c: &Clause) -> Vec<Var> {
    let mut outer: std::collections::BTreeSet<Var> = c.head_vars();
    outer.extend(c.constraint.vars());
    let mut out = Vec::new();
    for a in &c.body {
        for v in a.vars() {
            if outer.contains(&v) && !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

pub(crate) fn replay_error(step: usize, message: impl Into<String>) -> TransformError {
    TransformError::Replay { step, message: message.into() }
}

/// Checks a trace step by step. `unfold` recomputes an unfolding step and
/// `fold` the folding of a clause with the definitions seen so far. Every
/// clause a step works on must have been produced earlier.
pub(crate) fn replay(
    trace: &TransformTrace,
    inputs: &[Clause],
    prefix: &str,
    unfold: impl Fn(&Clause, Option<usize>) -> Option<Vec<Clause>>,
    fold: impl Fn(&Clause, &DefsTable) -> Option<Clause>,
) -> Result<ClauseSet, TransformError> {
    let mut known: std::collections::HashSet<String> = inputs.iter().map(canon).collect();
    let mut defs = DefsTable::new(prefix);
    let mut out = Vec::new();
    for (i, s) in trace.steps.iter().enumerate() {
        match s {
            TraceStep::Unfold { clause, atom, results } => {
                if !known.contains(&canon(clause)) {
                    return Err(replay_error(i, format!("unknown clause {clause}")));
                }
                let again = unfold(clause, *atom).ok_or_else(|| replay_error(i, "unfolding not applicable"))?;
                if !same_clauses(&again, results) {
                    return Err(replay_error(i, format!("unfolding {clause} gives different clauses")));
                }
                known.extend(results.iter().map(canon));
            }
            TraceStep::Define { def } => {
                let Some(h) = &def.head else {
                    return Err(replay_error(i, "definition without head"));
                };
                let vs: Vec<Var> = h.args.iter().filter_map(|t| t.as_var().cloned()).collect();
                if vs.len() != h.arity() || !def.constraint.is_true() || def.body.is_empty() {
                    return Err(replay_error(i, format!("malformed definition {def}")));
                }
                let (p, fresh) = defs.lookup_or_define(&def.body, &vs);
                if !fresh || p != h.pred {
                    return Err(replay_error(i, format!("definition {def} clashes with {p}")));
                }
                known.insert(canon(def));
            }
            TraceStep::Fold { clause, result } => {
                if !known.contains(&canon(clause)) {
                    return Err(replay_error(i, format!("unknown clause {clause}")));
                }
                match fold(clause, &defs) {
                    Some(r) if canon(&r) == canon(result) => {
                        known.insert(canon(result));
                    }
                    _ => return Err(replay_error(i, format!("folding {clause} does not give {result}"))),
                }
            }
            TraceStep::Emit { clause } => {
                if !known.contains(&canon(clause)) {
                    return Err(replay_error(i, format!("emitted clause {clause} was never derived")));
                }
                out.push(clause.clone());
            }
        }
    }
    ClauseSet::from_clauses(out).map_err(|e| TransformError::Arity(e.to_string()))
}
