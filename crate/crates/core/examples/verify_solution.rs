//! Checks a hand-written solution of the doubling clauses, then a wrong one,
//! and carries the right one over to the linearized clauses.

use hornlin::corpus::find;
use hornlin::pipeline::run_pipeline;
use hornlin::solve::{parse_solution, transport_solution, verify_solution};

fn main() {
    let item = find("doubling").unwrap();
    let st = run_pipeline(item.program, item.spec).unwrap();
    print!("{}", st.after_ri);

    let sigma = parse_solution(item.solution.unwrap()).unwrap();
    println!("\n{sigma}");
    let r = verify_solution(&st.after_ri, &sigma).unwrap();
    println!("all valid: {}", r.all_valid());

    let wrong = parse_solution("sigma r_doubling(N,Y) :- N>=0.\nsigma r1(N,Y,N1,Y1) :- N>=0, N1=0.").unwrap();
    let r = verify_solution(&st.after_ri, &wrong).unwrap();
    if let Some((i, w)) = r.first_invalid() {
        println!("wrong solution fails clause {}: {}", i + 1, st.after_ri.clauses()[i]);
        let w: Vec<String> = w.iter().map(|(v, x)| format!("{v}={x}")).collect();
        println!("  witness {}", w.join(", "));
    }

    let t = transport_solution(&sigma, &st.lin.defs).unwrap();
    println!("\n{t}");
    let r = verify_solution(&st.lin.clauses, &t).unwrap();
    println!("linearized, all valid: {}", r.all_valid());
}
