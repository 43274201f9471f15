//! Linearizes the Fibonacci goal with two recursive calls.

use hornlin::chc::parse_clauses;
use hornlin::transform::linearize;

const LOOP: &str = "
r_fibonacci(N,F) :- N>=0, U=1, V=0, T=0, r1(N,U,V,T,N1,F,V1,T1).
r1(N,U,V,T,N,U,V,T) :- N=<0.
r1(N,U,V,T,N2,U2,V2,T2) :- N>=1, N1=N-1, U1=U+V, V1=U, T1=U, r1(N1,U1,V1,T1,N2,U2,V2,T2).
";
const GOAL: &str =
    "false :- N1>=0, N2=N1+1, N3=N2+1, F3>F1+F2, r_fibonacci(N1,F1), r_fibonacci(N2,F2), r_fibonacci(N3,F3).";

fn main() {
    let lcls = parse_clauses(LOOP).unwrap().into_clauses();
    let gls = parse_clauses(GOAL).unwrap().into_clauses();
    let out = linearize(&lcls, &gls).expect("linearizes");
    for d in out.defs.entries() {
        println!("{}", d.clause);
    }
    println!();
    print!("{}", out.clauses);
    println!("\nall linear: {}", out.clauses.all_linear());
}
