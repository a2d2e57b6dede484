use super::*;
use std::fmt::Write;

fn binders(vs: &[Binder]) -> String {
    vs.iter().map(|(v, s)| format!("({v} {s})")).collect::<Vec<_>>().join(" ")
}

fn list(head: &str, xs: &[Term]) -> String {
    let mut s = format!("({head}");
    for x in xs {
        s.push(' ');
        s.push_str(&term(x));
    }
    s.push(')');
    s
}

/// S-expression rendering of a single term.
pub fn term(t: &Term) -> String {
    match t {
        Term::Var(v, _) => v.to_string(),
        Term::Elem(s, i) => format!("{s}${i}"),
        Term::Int(n) => n.to_string(),
        Term::Bool(b) => b.to_string(),
        Term::App(f, xs) if xs.is_empty() => f.to_string(),
        Term::App(f, xs) => list(f, xs),
        Term::Eq(a, b) => format!("(= {} {})", term(a), term(b)),
        Term::Not(a) => format!("(not {})", term(a)),
        Term::And(xs) => list("and", xs),
        Term::Or(xs) => list("or", xs),
        Term::Implies(a, b) => format!("(=> {} {})", term(a), term(b)),
        Term::Iff(a, b) => format!("(iff {} {})", term(a), term(b)),
        Term::Ite(c, a, b) => format!("(ite {} {} {})", term(c), term(a), term(b)),
        Term::Forall(vs, b) => format!("(forall ({}) {})", binders(vs), term(b)),
        Term::Exists(vs, b) => format!("(exists ({}) {})", binders(vs), term(b)),
        Term::Closure { reflexive, def, x, y, args } => {
            let mut xs = vec![(**x).clone(), (**y).clone()];
            xs.extend(args.iter().cloned());
            list(&format!("{} {def}", if *reflexive { "rclosure" } else { "closure" }), &xs)
        }
        Term::IntBin(op, a, b) => {
            let o = match op {
                IntOp::Add => "+",
                IntOp::Sub => "-",
                IntOp::Mul => "*",
                IntOp::Div => "div",
                IntOp::Rem => "rem",
            };
            format!("({o} {} {})", term(a), term(b))
        }
        Term::Cmp(op, a, b) => format!("({} {} {})", if *op == Cmp::Lt { "<" } else { "<=" }, term(a), term(b)),
        Term::Sum(xs) => list("sum", xs),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&term(self))
    }
}

/// Full textual dump of a theory, one declaration per line.
pub fn print_theory(th: &Theory) -> String {
    let mut s = String::new();
    writeln!(s, "(bitwidth {})", th.bitwidth).unwrap();
    for (n, k) in &th.sorts {
        writeln!(s, "(declare-sort {n} {k})").unwrap();
    }
    for (n, so) in &th.consts {
        writeln!(s, "(declare-const {n} {so})").unwrap();
    }
    for f in &th.funcs {
        let args: Vec<String> = f.args.iter().map(|a| a.to_string()).collect();
        writeln!(s, "(declare-fun {} ({}) {})", f.name, args.join(" "), f.ret).unwrap();
    }
    for d in &th.defs {
        writeln!(s, "(define-fun {} ({}) {} {})", d.name, binders(&d.params), d.ret, term(&d.body)).unwrap();
    }
    for a in &th.axioms {
        writeln!(s, "(assert {})", term(a)).unwrap();
    }
    s
}
