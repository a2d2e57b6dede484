use crate::ground::{tuples, GroundTheory};
use crate::ir::*;
use std::fmt::Write;

pub fn quote(s: &str) -> String {
    format!("|{s}|")
}

/// SMT-LIB name of a domain element.
pub fn elem_name(sort: &str, i: u32) -> String {
    quote(&format!("elem${sort}${i}"))
}

fn sort_name(s: &Sort) -> String {
    match s {
        Sort::Int => "Int".into(),
        Sort::U(n) => quote(n),
    }
}

fn ret_name(r: &Ret) -> String {
    match r {
        Ret::Bool => "Bool".into(),
        Ret::Sort(s) => sort_name(s),
    }
}

#[derive(Default)]
struct Features {
    ints: bool,
    nonlinear: bool,
    div: bool,
}

fn scan(t: &Term, f: &mut Features) {
    t.visit(&mut |x| match x {
        Term::Int(_) | Term::Cmp(..) | Term::Sum(_) => f.ints = true,
        Term::IntBin(op, a, b) => {
            f.ints = true;
            let lit = |t: &Term| matches!(t, Term::Int(_));
            match op {
                IntOp::Mul if !lit(a) && !lit(b) => f.nonlinear = true,
                IntOp::Div | IntOp::Rem => {
                    f.div = true;
                    f.nonlinear = true;
                }
                _ => {}
            }
        }
        _ => {}
    });
}

pub fn term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

fn write_list(out: &mut String, head: &str, xs: &[&Term]) {
    out.push('(');
    out.push_str(head);
    for x in xs {
        out.push(' ');
        write_term(out, x);
    }
    out.push(')');
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v, _) => out.push_str(&quote(v)),
        Term::Elem(s, i) => out.push_str(&elem_name(s, *i)),
        Term::Int(n) if *n < 0 => {
            let _ = write!(out, "(- {})", n.unsigned_abs());
        }
        Term::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Term::App(f, args) if args.is_empty() => out.push_str(&quote(f)),
        Term::App(f, args) => write_list(out, &quote(f), &args.iter().collect::<Vec<_>>()),
        Term::Eq(a, b) => write_list(out, "=", &[a, b]),
        Term::Not(a) => write_list(out, "not", &[a]),
        Term::And(xs) => write_list(out, "and", &xs.iter().collect::<Vec<_>>()),
        Term::Or(xs) => write_list(out, "or", &xs.iter().collect::<Vec<_>>()),
        Term::Implies(a, b) => write_list(out, "=>", &[a, b]),
        Term::Iff(a, b) => write_list(out, "=", &[a, b]),
        Term::Ite(c, a, b) => write_list(out, "ite", &[c, a, b]),
        Term::Forall(vs, b) | Term::Exists(vs, b) => {
            let q = if matches!(t, Term::Forall(..)) { "forall" } else { "exists" };
            let _ = write!(out, "({q} (");
            let bs: Vec<String> = vs.iter().map(|(n, s)| format!("({} {})", quote(n), sort_name(s))).collect();
            out.push_str(&bs.join(" "));
            out.push_str(") ");
            write_term(out, b);
            out.push(')');
        }
        Term::Closure { .. } => panic!("closures must be lowered before emission"),
        Term::IntBin(op, a, b) => {
            let f = match op {
                IntOp::Add => "+",
                IntOp::Sub => "-",
                IntOp::Mul => "*",
                IntOp::Div => "portus_tdiv",
                IntOp::Rem => "portus_trem",
            };
            out.push_str("(portus_wrap ");
            write_list(out, f, &[a, b]);
            out.push(')');
        }
        Term::Cmp(op, a, b) => write_list(out, if *op == Cmp::Lt { "<" } else { "<=" }, &[a, b]),
        Term::Sum(xs) if xs.len() == 1 => write_term(out, &xs[0]),
        Term::Sum(xs) => {
            out.push_str("(portus_wrap ");
            write_list(out, "+", &xs.iter().collect::<Vec<_>>());
            out.push(')');
        }
    }
}

/// Terms whose values determine the interpretation of every declared symbol.
pub fn model_terms(g: &GroundTheory) -> Vec<Term> {
    let th = &g.theory;
    let mut out = Vec::new();
    for (n, k) in &th.sorts {
        out.extend((1..=*k).map(|i| Term::Elem(n.clone(), i)));
    }
    out.extend(th.consts.iter().map(|(c, _)| Term::app(c, vec![])));
    for f in &th.funcs {
        for args in tuples(th, &f.args) {
            out.push(Term::app(&f.name, args));
        }
    }
    out
}

/// SMT-LIB 2.6 script for a ground theory, ending in `check-sat` and a `get-value`
/// over `model_terms`.
pub fn emit_smtlib(g: &GroundTheory) -> String {
    let th = &g.theory;
    let mut feat = Features::default();
    g.all_axioms().for_each(|a| scan(a, &mut feat));
    th.defs.iter().for_each(|d| scan(&d.body, &mut feat));
    feat.ints |= g.uses_ints();
    let logic = match (feat.ints, feat.nonlinear) {
        (false, _) => "QF_UF",
        (true, false) => "QF_UFLIA",
        (true, true) => "QF_UFNIA",
    };
    let mut out = String::new();
    let _ = writeln!(out, "(set-logic {logic})");
    out.push_str("(set-option :produce-models true)\n");
    for (n, k) in &th.sorts {
        let _ = writeln!(out, "(declare-sort {} 0)", quote(n));
        for i in 1..=*k {
            let _ = writeln!(out, "(declare-const {} {})", elem_name(n, i), quote(n));
        }
        if *k >= 2 {
            let els: Vec<String> = (1..=*k).map(|i| elem_name(n, i)).collect();
            let _ = writeln!(out, "(assert (distinct {}))", els.join(" "));
        }
    }
    if feat.ints {
        let m = 1i64 << th.bitwidth;
        let h = m / 2;
        let _ = writeln!(out, "(define-fun portus_wrap ((x Int)) Int (- (mod (+ x {h}) {m}) {h}))");
    }
    if feat.div {
        out.push_str(
            "(define-fun portus_tdiv ((a Int) (b Int)) Int (ite (= b 0) 0 (ite (>= a 0) (ite (> b 0) (div a b) (- (div a (- b)))) (ite (> b 0) (- (div (- a) b)) (div (- a) (- b))))))\n",
        );
        out.push_str("(define-fun portus_trem ((a Int) (b Int)) Int (ite (= b 0) a (- a (* b (portus_tdiv a b)))))\n");
    }
    for (c, s) in &th.consts {
        let _ = writeln!(out, "(declare-const {} {})", quote(c), sort_name(s));
    }
    for f in &th.funcs {
        let args: Vec<String> = f.args.iter().map(sort_name).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) {})", quote(&f.name), args.join(" "), ret_name(&f.ret));
    }
    for d in &th.defs {
        let ps: Vec<String> = d.params.iter().map(|(n, s)| format!("({} {})", quote(n), sort_name(s))).collect();
        let _ = writeln!(out, "(define-fun {} ({}) {} {})", quote(&d.name), ps.join(" "), ret_name(&d.ret), term(&d.body));
    }
    for a in g.all_axioms() {
        let _ = writeln!(out, "(assert {})", term(a));
    }
    out.push_str("(check-sat)\n");
    let terms = model_terms(g);
    if !terms.is_empty() {
        let ts: Vec<String> = terms.iter().map(term).collect();
        let _ = writeln!(out, "(get-value ({}))", ts.join(" "));
    }
    out
}
