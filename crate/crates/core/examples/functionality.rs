//! Samples a specification for totality and functionality.

use hornlin::spec::{check_functionality, parse_spec};
use num_bigint::BigInt;

const FIB: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}
fib(0,1).
fib(1,1).
fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).
";

// fib(2,_) has two values here.
const BROKEN: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}
fib(0,1).
fib(1,1).
fib(2,3).
fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).
";

fn main() {
    let samples: Vec<Vec<BigInt>> = (-1..=6).map(|n| vec![BigInt::from(n)]).collect();
    for text in [FIB, BROKEN] {
        let t = parse_spec(text).unwrap();
        let r = check_functionality(&t, &samples, 12);
        print!("{r}");
        println!("violations: {}\n", r.violations());
    }
}
