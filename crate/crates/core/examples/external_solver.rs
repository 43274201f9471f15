//! Hands the linearized Fibonacci clauses to a Horn solver named by
//! `HL_SOLVER` (for instance `z3`), or by the first argument.

use std::time::Duration;

use hornlin::corpus::find;
use hornlin::pipeline::run_pipeline;
use hornlin::solve::{emit_smtlib, run_external, solver_command};

fn main() {
    let arg = std::env::args().nth(1);
    let Some(cmd) = solver_command(arg.as_deref()) else {
        println!("no solver configured; set HL_SOLVER or pass a command");
        return;
    };
    let item = find("fibonacci").unwrap();
    let st = run_pipeline(item.program, item.spec).unwrap();
    for (name, set) in [("after ri", &st.after_ri), ("after lin", &st.lin.clauses)] {
        let v = run_external(&emit_smtlib(set), &cmd, Duration::from_secs(20));
        println!("{name}: {v}");
    }
}
