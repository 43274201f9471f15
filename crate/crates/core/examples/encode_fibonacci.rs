use hornlin::encode::Problem;

const PROGRAM: &str = "0: while (n>0) { t=u; u=u+v; v=t; n=n-1 }\nh: halt\n";
const SPEC: &str = "{n=N, N>=0, u=1, v=0, t=0} fibonacci {fib(N,u)}
fib(0,1).
fib(1,1).
fib(N3,F3) :- N1>=0, N2=N1+1, N3=N2+1, F3=F1+F2, fib(N1,F1), fib(N2,F2).
";

fn main() {
    let pr = Problem::load(PROGRAM, SPEC).expect("valid input");
    println!("normalized program:\n{}", pr.program);
    println!("state tuple: {:?}, cut labels {:?}", pr.opsem.state, pr.opsem.cut_labels);
    println!("\npartial-correctness clauses:\n{}", pr.pc);
}
