//! Looks for counterexamples in a correct and a broken specification, and
//! replays the broken one through the interpreter.

use hornlin::corpus::{find, mutate_base_case};
use hornlin::encode::Problem;
use hornlin::solve::{bounded_counterexample, confirm_violation, DEFAULT_BUDGET};

fn main() {
    let item = find("lucas").unwrap();
    let ok = Problem::load(item.program, item.spec).unwrap();
    println!("{}", bounded_counterexample(&ok.pc, 8, DEFAULT_BUDGET));

    let spec = mutate_base_case(item.spec, 1).unwrap();
    println!("\nmutated:\n{spec}");
    let bad = Problem::load(item.program, &spec).unwrap();
    let r = bounded_counterexample(&bad.pc, 8, DEFAULT_BUDGET);
    let cex = r.cex().expect("a counterexample");
    print!("{cex}");
    cex.replay(&bad.pc).expect("witness replays");
    match confirm_violation(&bad, cex, 12) {
        Some(v) => println!("{v}"),
        None => println!("not confirmed by execution"),
    }
}
