//! Parses a small program, lowers it to jumps and runs it.

use hornlin::imp::{interpret, normalize_jumps, parse_imp, Env, DEFAULT_MAX_STEPS};
use num_bigint::BigInt;

const GCD: &str = "
while (a != b) {
  if (a > b) { a = a - b } else { b = b - a }
}
halt
";

fn main() {
    let p = parse_imp(GCD).expect("valid program");
    let n = normalize_jumps(&p).expect("lowers");
    println!("{n}");
    for (a, b) in [(12, 18), (7, 5), (9, 9)] {
        let env: Env = [("a".to_string(), BigInt::from(a)), ("b".to_string(), BigInt::from(b))].into();
        let out = interpret(&n, &env, DEFAULT_MAX_STEPS);
        println!("gcd({a},{b}) -> {:?}", out.env().map(|e| &e["a"]));
    }
}
