//! Bounded checking, solution verification and solver interfaces.

mod derive;

pub use derive::{resolve_head, Control, Engine, Exploration, Query, Step};
mod oracle;
pub use oracle::{
    bounded_counterexample, confirm_violation, Counterexample, OracleResult, Violation, DEFAULT_BUDGET, DEFAULT_DEPTH,
};
mod verify;
pub use verify::{
    parse_solution, transport_solution, verify_clause, verify_solution, SymbolicInterp, Verdict, VerifyError,
    VerifyReport,
};
mod smtlib;
pub use smtlib::{emit_smtlib, parse_smtlib};
mod external;
pub use external::{classify, run_external, solver_command, ExternalVerdict, SOLVER_ENV};
