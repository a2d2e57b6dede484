use super::*;
use crate::frontend::query::Selector;
use crate::pipeline::load_query;

fn q(src: &str) -> Query {
    load_query(src, &Selector::Index(0)).unwrap()
}

fn sat(src: &str) -> bool {
    let q = q(src);
    let r = enumerate(&q, DEFAULT_CAP).unwrap();
    if let Verdict::Sat(i) = &r.verdict {
        assert_eq!(check_instance(&q, i).unwrap(), Vec::<String>::new(), "witness for {src}");
    }
    r.is_sat()
}

#[test]
fn identity_function_witness() {
    assert!(sat("sig A { f: A } run { some a: A | a.f = a } for exactly 3 A"));
}

#[test]
fn check_at_scope_zero_has_counterexample() {
    assert!(sat("sig A {} check { some A } for 0 A"));
}

#[test]
fn some_none_is_unsat() {
    assert!(!sat("sig A {} run { some none }"));
}

#[test]
fn nonexact_scopes_include_smaller_sizes() {
    assert!(sat("sig A {} run { #A = 2 } for 3"));
    assert!(sat("sig A {} run { no A } for 3"));
    assert!(!sat("sig A {} run { #A = 4 } for 3"));
}

#[test]
fn hierarchy_is_respected() {
    assert!(!sat("abstract sig A {} sig B, C extends A {} run { some A - B - C } for 3"));
    assert!(!sat("sig A {} sig B, C extends A {} run { some B & C } for 3"));
    assert!(sat("sig A {} sig B in A {} run { some B and B != A } for 2"));
    assert!(!sat("sig A {} one sig B extends A {} run { #B = 2 } for 3"));
}

#[test]
fn field_multiplicities() {
    assert!(!sat("sig A { f: one A } run { some a: A | no a.f } for 3"));
    assert!(sat("sig A { f: lone A } run { some a: A | no a.f } for 3"));
    assert!(!sat("sig A { f: A -> one A } run { some a, b: A | no b.(a.f) } for 2"));
}

#[test]
fn ordering_is_linear() {
    let src = "open util/ordering[A]\nsig A {}\nrun { all a: A | a in first.*next } for 4";
    assert!(sat(src));
    assert!(!sat("open util/ordering[A]\nsig A {}\nrun { some a: A | a.next = first } for 4"));
}

fn atoms(names: &[&str]) -> TupleSet {
    names.iter().map(|n| vec![Atom::name(*n)]).collect()
}

fn pairs(ps: &[(&str, &str)]) -> TupleSet {
    ps.iter().map(|(a, b)| vec![Atom::name(*a), Atom::name(*b)]).collect()
}

#[test]
fn textbook_closure() {
    let r = pairs(&[("a", "b"), ("b", "c")]);
    assert_eq!(closure(&r), pairs(&[("a", "b"), ("b", "c"), ("a", "c")]));
}

#[test]
fn closure_equals_iterated_composition() {
    let r = pairs(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]);
    let mut acc = r.clone();
    let mut pow = r.clone();
    for _ in 0..4 {
        pow = join(&pow, &r);
        acc.extend(pow.iter().cloned());
    }
    assert_eq!(closure(&r), acc);
}

/// An instance with `A = {a1, a2}`, `B = {b1}` and `r = {(a1,a2),(a2,b1)}` at bitwidth 4.
fn micro() -> Instance {
    let mut i = Instance { bitwidth: 4, ..Instance::default() };
    i.sig_atoms.insert("A".into(), [Atom::name("a1"), Atom::name("a2")].into());
    i.sig_atoms.insert("B".into(), [Atom::name("b1")].into());
    i.field_tuples.insert("r".into(), pairs(&[("a1", "a2"), ("a2", "b1")]));
    i
}

fn eval_expr(ret: &str, src: &str) -> TupleSet {
    let i = micro();
    let text = format!("sig A {{ r: set univ }} sig B {{}} fun e: {ret} {{ {src} }} run {{}}");
    let q2 = load_query(&text, &Selector::Index(0)).unwrap();
    let Body::Rel(e) = &q2.model.def("e").unwrap().body else { panic!() };
    Evaluator::new(&q2.model, &i).expr(e).unwrap()
}

fn set(src: &str) -> TupleSet {
    eval_expr("set univ", src)
}

fn rel(src: &str) -> TupleSet {
    eval_expr("univ->univ", src)
}

fn eval_int(src: &str) -> i64 {
    let i = micro();
    let text = format!("sig A {{ r: set univ }} sig B {{}} fun e: Int {{ {src} }} run {{}}");
    let q2 = load_query(&text, &Selector::Index(0)).unwrap();
    match &q2.model.def("e").unwrap().body {
        Body::Int(x) => Evaluator::new(&q2.model, &i).int(x).unwrap(),
        Body::Rel(e) => {
            let s = Evaluator::new(&q2.model, &i).expr(e).unwrap();
            match s.iter().next().map(|t| &t[0]) {
                Some(Atom::Int(n)) => *n,
                _ => panic!("not an integer: {s:?}"),
            }
        }
        _ => panic!(),
    }
}

fn eval_bool(src: &str) -> bool {
    let i = micro();
    let text = format!("sig A {{ r: set univ }} sig B {{}} pred p {{ {src} }} run {{}}");
    let q2 = load_query(&text, &Selector::Index(0)).unwrap();
    let Body::Formula(f) = &q2.model.def("p").unwrap().body else { panic!() };
    Evaluator::new(&q2.model, &i).formula(f).unwrap()
}

#[test]
fn pinned_micro_expressions() {
    assert_eq!(set("A"), atoms(&["a1", "a2"]));
    assert_eq!(set("A + B"), atoms(&["a1", "a2", "b1"]));
    assert_eq!(set("A - B"), atoms(&["a1", "a2"]));
    assert_eq!(set("A & B"), atoms(&[]));
    assert_eq!(set("A.r"), atoms(&["a2", "b1"]));
    assert_eq!(set("r.B"), atoms(&["a2"]));
    assert_eq!(rel("~r"), pairs(&[("a2", "a1"), ("b1", "a2")]));
    assert_eq!(rel("^r"), pairs(&[("a1", "a2"), ("a2", "b1"), ("a1", "b1")]));
    assert_eq!(rel("A <: r"), pairs(&[("a1", "a2"), ("a2", "b1")]));
    assert_eq!(rel("r :> B"), pairs(&[("a2", "b1")]));
    assert_eq!(rel("r ++ (A -> B)"), pairs(&[("a1", "b1"), ("a2", "b1")]));
    assert_eq!(rel("B -> A"), pairs(&[("b1", "a1"), ("b1", "a2")]));
    assert_eq!(set("{ x: A | some x.r & B }"), atoms(&["a2"]));
    assert_eq!(eval_int("#A"), 2);
    assert_eq!(eval_int("#(A -> A)"), 4);
    assert_eq!(eval_int("plus[7, 1]"), -8);
    assert_eq!(eval_int("sum x: A | #x.r"), 2);
    assert!(eval_bool("A in A + B"));
    assert!(eval_bool("all x: A | lone x.r"));
    assert!(!eval_bool("some A & B"));
}
