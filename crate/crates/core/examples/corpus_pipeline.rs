//! Runs every bundled program through encoding, interpreter removal and
//! linearization, and checks each stage with the bounded oracle.

use std::time::Instant;

use hornlin::corpus::corpus;
use hornlin::pipeline::run_pipeline;
use hornlin::solve::{bounded_counterexample, DEFAULT_BUDGET, DEFAULT_DEPTH};

fn main() {
    let verbose = std::env::args().any(|a| a == "-v");
    for item in corpus() {
        let start = Instant::now();
        let st = run_pipeline(item.program, item.spec).expect("corpus item");
        println!("== {}", item.name);
        for s in st.summaries() {
            println!("  {s}");
        }
        if verbose {
            println!("{}", st.after_ri);
            println!("{}", st.lin.clauses);
        }
        for (stage, set) in [("encode", &st.problem.pc), ("ri", &st.after_ri), ("lin", &st.lin.clauses)] {
            let t = Instant::now();
            let r = bounded_counterexample(set, DEFAULT_DEPTH, DEFAULT_BUDGET);
            println!("  oracle after {stage}: {r} ({:.2?})", t.elapsed());
        }
        println!("  total {:.2?}", start.elapsed());
    }
}
