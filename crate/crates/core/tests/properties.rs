use portus_core::difftest::generate_models;
use portus_core::frontend::{load, pretty::print_model};
use portus_core::ground::{eval, ground, simplify, Interp, DEFAULT_BUDGET};
use portus_core::instance::{Atom, Instance};
use portus_core::ir::*;
use portus_core::oracle::{closure, join, TupleSet};
use proptest::prelude::*;
use std::collections::BTreeSet;

const N: u32 = 3;
const BITS: u32 = 3;

fn theory() -> Theory {
    let s = Sort::named("S");
    Theory {
        sorts: vec![(sym("S"), N)],
        bitwidth: BITS,
        consts: vec![(sym("k"), Sort::Int), (sym("c"), s.clone())],
        funcs: vec![
            FuncDecl { name: sym("p"), args: vec![s.clone()], ret: Ret::Bool },
            FuncDecl { name: sym("r"), args: vec![s.clone(), s.clone()], ret: Ret::Bool },
            FuncDecl { name: sym("f"), args: vec![s.clone()], ret: Ret::Sort(s) },
        ],
        ..Theory::default()
    }
}

fn el(i: u32) -> Term {
    Term::Elem(sym("S"), i)
}

/// Random values for every symbol of `theory()`.
fn interp() -> impl Strategy<Value = Interp> {
    (
        prop::collection::vec(any::<bool>(), N as usize),
        prop::collection::vec(any::<bool>(), (N * N) as usize),
        prop::collection::vec(1..=N, N as usize),
        -4i64..4,
        1..=N,
    )
        .prop_map(|(p, r, f, k, c)| {
            let mut i = Interp::default();
            for x in 1..=N {
                i.set(&sym("p"), vec![el(x)], Term::Bool(p[(x - 1) as usize]));
                i.set(&sym("f"), vec![el(x)], el(f[(x - 1) as usize]));
                for y in 1..=N {
                    i.set(&sym("r"), vec![el(x), el(y)], Term::Bool(r[((x - 1) * N + y - 1) as usize]));
                }
            }
            i.set(&sym("k"), vec![], Term::Int(k));
            i.set(&sym("c"), vec![], el(c));
            i
        })
}

fn elem_term(vars: Vec<Sym>, depth: u32) -> BoxedStrategy<Term> {
    let s = Sort::named("S");
    let mut leaves = vec![(1..=N).prop_map(el).boxed(), Just(Term::app(&sym("c"), vec![])).boxed()];
    if !vars.is_empty() {
        let s = s.clone();
        leaves.push(prop::sample::select(vars.clone()).prop_map(move |v| Term::var(&v, &s)).boxed());
    }
    let leaf = prop::strategy::Union::new(leaves).boxed();
    if depth == 0 {
        return leaf;
    }
    prop_oneof![
        3 => leaf,
        1 => elem_term(vars, depth - 1).prop_map(|t| Term::App(sym("f"), vec![t])),
    ]
    .boxed()
}

fn int_term(vars: Vec<Sym>, depth: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![(-4i64..4).prop_map(Term::Int), Just(Term::app(&sym("k"), vec![]))].boxed();
    if depth == 0 {
        return leaf;
    }
    let op = prop::sample::select(vec![IntOp::Add, IntOp::Sub, IntOp::Mul, IntOp::Div, IntOp::Rem]);
    prop_oneof![
        2 => leaf,
        2 => (op, int_term(vars.clone(), depth - 1), int_term(vars.clone(), depth - 1))
            .prop_map(|(o, a, b)| Term::IntBin(o, Box::new(a), Box::new(b))),
        1 => (bool_term(vars.clone(), depth - 1, false), int_term(vars.clone(), depth - 1), int_term(vars, depth - 1))
            .prop_map(|(c, a, b)| Term::Ite(Box::new(c), Box::new(a), Box::new(b))),
    ]
    .boxed()
}

fn bool_term(vars: Vec<Sym>, depth: u32, quant: bool) -> BoxedStrategy<Term> {
    let e = || elem_term(vars.clone(), 1);
    let cmp = prop::sample::select(vec![Cmp::Lt, Cmp::Le]);
    let leaf = prop_oneof![
        any::<bool>().prop_map(Term::Bool),
        e().prop_map(|x| Term::App(sym("p"), vec![x])),
        (e(), e()).prop_map(|(x, y)| Term::App(sym("r"), vec![x, y])),
        (e(), e()).prop_map(|(x, y)| Term::Eq(Box::new(x), Box::new(y))),
        (cmp, int_term(vars.clone(), depth.min(1)), int_term(vars.clone(), depth.min(1)))
            .prop_map(|(c, a, b)| Term::Cmp(c, Box::new(a), Box::new(b))),
    ]
    .boxed();
    if depth == 0 {
        return leaf;
    }
    let sub = |v: &Vec<Sym>| bool_term(v.clone(), depth - 1, quant);
    let mut alts: Vec<(u32, BoxedStrategy<Term>)> = vec![
        (2, leaf),
        (1, sub(&vars).prop_map(|t| Term::Not(Box::new(t))).boxed()),
        (1, prop::collection::vec(sub(&vars), 0..3).prop_map(Term::And).boxed()),
        (1, prop::collection::vec(sub(&vars), 0..3).prop_map(Term::Or).boxed()),
        (1, (sub(&vars), sub(&vars)).prop_map(|(a, b)| Term::Implies(Box::new(a), Box::new(b))).boxed()),
        (1, (sub(&vars), sub(&vars)).prop_map(|(a, b)| Term::Iff(Box::new(a), Box::new(b))).boxed()),
        (
            1,
            (sub(&vars), sub(&vars), sub(&vars))
                .prop_map(|(c, a, b)| Term::Ite(Box::new(c), Box::new(a), Box::new(b)))
                .boxed(),
        ),
    ];
    if quant {
        let v = sym(&format!("v{depth}"));
        let mut inner = vars.clone();
        inner.push(v.clone());
        let s = Sort::named("S");
        let body = sub(&inner);
        alts.push((
            2,
            (any::<bool>(), body)
                .prop_map(move |(all, b)| {
                    let bs = vec![(v.clone(), s.clone())];
                    if all {
                        Term::Forall(bs, Box::new(b))
                    } else {
                        Term::Exists(bs, Box::new(b))
                    }
                })
                .boxed(),
        ));
        // a guarded body gives the grounder's witness elimination something to find
        let v = sym(&format!("w{depth}"));
        let mut inner = vars.clone();
        inner.push(v.clone());
        let s = Sort::named("S");
        alts.push((
            1,
            (any::<bool>(), elem_term(vars.clone(), 1), sub(&inner))
                .prop_map(move |(all, t, b)| {
                    let x = Term::var(&v, &s);
                    let bs = vec![(v.clone(), s.clone())];
                    let eq = Term::Eq(Box::new(x), Box::new(t));
                    if all {
                        Term::Forall(bs, Box::new(Term::Implies(Box::new(eq), Box::new(b))))
                    } else {
                        Term::Exists(bs, Box::new(Term::And(vec![eq, b])))
                    }
                })
                .boxed(),
        ));
    }
    prop::strategy::Union::new_weighted(alts).boxed()
}

fn truth(th: &Theory, i: &Interp, t: &Term) -> bool {
    match eval(th, i, t).unwrap() {
        Term::Bool(b) => b,
        v => panic!("{t} evaluated to {v}"),
    }
}

fn pairs_strategy(max: u32) -> impl Strategy<Value = (u32, Vec<(u32, u32)>)> {
    (1..=max).prop_flat_map(|k| (Just(k), prop::collection::vec((1..=k, 1..=k), 0..(k * 2) as usize)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplify_preserves_value(t in bool_term(vec![], 3, false), i in interp()) {
        let th = theory();
        prop_assert_eq!(truth(&th, &i, &t), truth(&th, &i, &simplify(&t, BITS)));
    }

    #[test]
    fn simplified_ints_wrap(t in int_term(vec![], 3), i in interp()) {
        let th = theory();
        let v = eval(&th, &i, &t).unwrap();
        prop_assert_eq!(&v, &eval(&th, &i, &simplify(&t, BITS)).unwrap());
        if let Term::Int(n) = v {
            prop_assert!((th.min_int()..=th.max_int()).contains(&n));
        }
    }

    #[test]
    fn grounding_preserves_truth(t in bool_term(vec![], 3, true), i in interp()) {
        let mut th = theory();
        th.axioms.push(t.clone());
        let g = ground(&th, DEFAULT_BUDGET).unwrap();
        for a in g.all_axioms() {
            prop_assert!(portus_core::ground::is_ground(a), "not ground: {}", a);
        }
        let grounded = g.all_axioms().all(|a| truth(&g.theory, &i, a));
        prop_assert_eq!(truth(&th, &i, &t), grounded);
    }

    #[test]
    fn squaring_lowering_matches_fixed_point((k, edges) in pairs_strategy(8), reflexive in any::<bool>()) {
        let s = Sort::named("S");
        let mut th = Theory { sorts: vec![(sym("S"), k)], bitwidth: 4, ..Theory::default() };
        th.funcs.push(FuncDecl { name: sym("r"), args: vec![s.clone(), s.clone()], ret: Ret::Bool });
        let (x, y) = (sym("x"), sym("y"));
        th.defs.push(FuncDef {
            name: sym("e"),
            params: vec![(x.clone(), s.clone()), (y.clone(), s.clone())],
            ret: Ret::Bool,
            body: Term::app(&sym("r"), vec![Term::var(&x, &s), Term::var(&y, &s)]),
        });
        let mut i = Interp::default();
        let set: BTreeSet<(u32, u32)> = edges.iter().cloned().collect();
        for a in 1..=k {
            for b in 1..=k {
                i.set(&sym("r"), vec![el(a), el(b)], Term::Bool(set.contains(&(a, b))));
            }
        }
        let atom = |n: u32| Atom::name(format!("S${n}"));
        let rel: TupleSet = set.iter().map(|(a, b)| vec![atom(*a), atom(*b)]).collect();
        let mut expected = closure(&rel);
        if reflexive {
            expected.extend((1..=k).map(|a| vec![atom(a), atom(a)]));
        }
        for a in 1..=k {
            for b in 1..=k {
                let mut one = th.clone();
                one.axioms.push(Term::Closure { reflexive, def: sym("e"), x: Box::new(el(a)), y: Box::new(el(b)), args: vec![] });
                let g = ground(&one, DEFAULT_BUDGET).unwrap();
                prop_assert!(g.theory.defs.len() as u32 == 1 + portus_core::ground::squarings(k as u64));
                let holds = g.all_axioms().all(|t| truth(&g.theory, &i, t));
                prop_assert_eq!(holds, expected.contains(&vec![atom(a), atom(b)]), "({}, {}) in {:?}", a, b, set);
            }
        }
    }

    #[test]
    fn closure_is_iterated_composition((k, edges) in pairs_strategy(6)) {
        let atom = |n: u32| Atom::name(format!("a{n}"));
        let rel: TupleSet = edges.iter().map(|(a, b)| vec![atom(*a), atom(*b)]).collect();
        let mut acc = rel.clone();
        let mut pow = rel.clone();
        for _ in 1..k {
            pow = join(&pow, &rel);
            acc.extend(pow.iter().cloned());
        }
        prop_assert_eq!(closure(&rel), acc);
    }

    #[test]
    fn wrap_matches_reference(v in any::<i32>(), bits in 1u32..16) {
        let w = wrap(v as i64, bits);
        let m = 1i64 << bits;
        prop_assert!(-(m / 2) <= w && w < m / 2);
        prop_assert_eq!((w - v as i64).rem_euclid(m), 0);
    }

    #[test]
    fn printed_models_reparse(seed in 0u64..1000) {
        for (name, src) in generate_models(seed, 3) {
            let m = load(&src).unwrap();
            let printed = print_model(&m);
            let again = load(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
            prop_assert_eq!(&printed, &print_model(&again));
        }
    }

    #[test]
    fn instance_json_round_trips(atoms in prop::collection::btree_set(0u32..6, 0..5), ints in prop::collection::vec(-8i64..8, 0..4)) {
        let mut inst = Instance { bitwidth: 4, ..Instance::default() };
        inst.sig_atoms.insert("A".into(), atoms.iter().map(|n| Atom::name(format!("A${n}"))).collect());
        inst.field_tuples.insert(
            "f".into(),
            atoms.iter().zip(ints.iter().cycle()).map(|(a, n)| vec![Atom::name(format!("A${a}")), Atom::Int(*n)]).collect(),
        );
        let text = serde_json::to_string(&inst).unwrap();
        prop_assert_eq!(serde_json::from_str::<Instance>(&text).unwrap(), inst);
    }
}

#[test]
fn corpus_models_print_and_reparse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        let m = load(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let printed = print_model(&m);
        let again = load(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", path.display()));
        assert_eq!(printed, print_model(&again), "{}", path.display());
        assert_eq!(m.commands.len(), again.commands.len());
    }
}

/// Renames every bound variable by appending `tag`.
fn rename_bound(t: &Term, tag: &str, bound: &[Sym]) -> Term {
    let go = |x: &Term| rename_bound(x, tag, bound);
    let gb = |x: &Term| Box::new(go(x));
    match t {
        Term::Var(v, s) if bound.contains(v) => Term::Var(sym(&format!("{v}{tag}")), s.clone()),
        Term::App(f, xs) => Term::App(f.clone(), xs.iter().map(go).collect()),
        Term::Eq(a, b) => Term::Eq(gb(a), gb(b)),
        Term::Implies(a, b) => Term::Implies(gb(a), gb(b)),
        Term::Iff(a, b) => Term::Iff(gb(a), gb(b)),
        Term::IntBin(o, a, b) => Term::IntBin(*o, gb(a), gb(b)),
        Term::Cmp(o, a, b) => Term::Cmp(*o, gb(a), gb(b)),
        Term::Not(a) => Term::Not(gb(a)),
        Term::And(xs) => Term::And(xs.iter().map(go).collect()),
        Term::Or(xs) => Term::Or(xs.iter().map(go).collect()),
        Term::Sum(xs) => Term::Sum(xs.iter().map(go).collect()),
        Term::Ite(c, a, b) => Term::Ite(gb(c), gb(a), gb(b)),
        Term::Forall(vs, b) | Term::Exists(vs, b) => {
            let mut inner = bound.to_vec();
            inner.extend(vs.iter().map(|v| v.0.clone()));
            let vs2 = vs.iter().map(|(v, s)| (sym(&format!("{v}{tag}")), s.clone())).collect();
            let b2 = Box::new(rename_bound(b, tag, &inner));
            if matches!(t, Term::Forall(..)) {
                Term::Forall(vs2, b2)
            } else {
                Term::Exists(vs2, b2)
            }
        }
        other => other.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn alpha_equivalence_is_an_equivalence(t in bool_term(vec![], 3, true)) {
        let a = rename_bound(&t, "_a", &[]);
        let b = rename_bound(&t, "_b", &[]);
        prop_assert!(alpha_equivalent(&t, &t, &[]));
        prop_assert!(alpha_equivalent(&t, &a, &[]));
        prop_assert!(alpha_equivalent(&a, &t, &[]));
        prop_assert!(alpha_equivalent(&a, &b, &[]));
        prop_assert!(alpha_equivalent(&t, &b, &[]));
    }

    #[test]
    fn alpha_equivalence_sees_body_changes(t in bool_term(vec![], 3, true)) {
        let negated = Term::Not(Box::new(t.clone()));
        prop_assert!(!alpha_equivalent(&t, &negated, &[]));
    }
}
