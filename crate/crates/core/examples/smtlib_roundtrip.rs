use hornlin::chc::{clause_sets_equivalent, parse_clauses};
use hornlin::solve::{emit_smtlib, parse_smtlib};

const CLAUSES: &str = "
p(X,Y) :- X=0, Y=0.
p(X1,Y1) :- X1=X+1, Y1=Y+2, p(X,Y).
false :- Y>2*X, p(X,Y).
";

fn main() {
    let s = parse_clauses(CLAUSES).unwrap();
    let text = emit_smtlib(&s);
    print!("{text}");
    let back = parse_smtlib(&text).unwrap();
    println!("\nround trip equivalent: {}", clause_sets_equivalent(s.clauses(), back.clauses()).is_ok());

    match parse_smtlib("(set-logic HORN)\n(declare-fun p (Real) Bool)\n") {
        Ok(_) => println!("accepted"),
        Err(e) => println!("rejected: {e}"),
    }
}
