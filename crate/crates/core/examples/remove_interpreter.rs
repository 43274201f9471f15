//! Specializes the Fibonacci semantics clauses into a loop predicate and
//! prints the unfold/define/fold trace.

use hornlin::encode::Problem;
use hornlin::transform::{remove_interpreter, replay_remove_interpreter};

const PROGRAM: &str = "0: while (n>0) { t=u; u=u+v; v=t; n=n-1 }\nh: halt\n";
const SPEC: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}
fib(0,1).
fib(1,1).
fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).
";

fn main() {
    let pr = Problem::load(PROGRAM, SPEC).expect("valid input");
    let ri = remove_interpreter(&pr.opsem).expect("terminates");
    println!("{}", ri.clauses);
    for d in ri.defs.entries() {
        println!("definition {}: {}", d.pred, d.clause);
    }
    println!("\n{} trace steps", ri.trace.len());
    let again = replay_remove_interpreter(&pr.opsem, &ri.trace).expect("trace replays");
    println!("replayed to {} clauses", again.len());
}
