use portus_core::frontend::query::Selector;
use portus_core::ir::{print, print_theory, well_sorted, Ret, Term};
use portus_core::oracle::enumerate;
use portus_core::pipeline::load_query;
use portus_core::sorts::PolicyMode::{self, Default as Dflt, Partition};
use portus_core::translate::{translate_query, ScopeStyle, TransOptions, Translation};
use portus_core::Error;

fn tr(src: &str, scalar_opt: bool, policy: PolicyMode) -> Translation {
    try_tr(src, scalar_opt, policy).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

fn try_tr(src: &str, scalar_opt: bool, policy: PolicyMode) -> portus_core::Result<Translation> {
    let q = load_query(src, &Selector::Index(0))?;
    translate_query(&q, &TransOptions { scalar_opt, policy, ..TransOptions::default() })
}

fn goal(t: &Translation) -> String {
    print::term(t.theory.axioms.last().unwrap())
}

fn text(t: &Translation) -> String {
    print_theory(&t.theory)
}

fn count(t: &Term, pred: &dyn Fn(&Term) -> bool) -> usize {
    let mut n = 0;
    t.visit(&mut |u| n += pred(u) as usize);
    n
}

#[test]
fn single_sig_default_policy() {
    let t = tr("sig A {} run {} for 3", true, Dflt);
    assert_eq!(t.theory.sorts.len(), 1);
    assert_eq!(&*t.theory.sorts[0].0, "univ");
    assert_eq!(t.theory.sorts[0].1, 3);
    assert!(t.theory.func("in$A").is_some());
}

#[test]
fn abstract_parent_is_covered() {
    let t = tr("abstract sig A {} sig A1, A2 extends A {} run {} for 3", true, Partition);
    let s = text(&t);
    assert!(s.contains("(iff (or (in$A1 e$1) (in$A2 e$1)) (in$A e$1))"), "{s}");
    assert!(s.contains("(not (and (in$A1 x$2) (in$A2 x$2)))"), "{s}");
    assert!(s.contains("(=> (in$A1 m$3) (in$A m$3))"), "{s}");
}

#[test]
fn top_level_sigs_in_one_sort_are_disjoint() {
    let t = tr("sig A, B {} run {} for 2", true, Dflt);
    assert!(text(&t).contains("(forall ((x$1 univ)) (not (and (in$A x$1) (in$B x$1))))"));
}

#[test]
fn one_sig_without_scalar_opt_gets_multiplicity_axiom() {
    let t = tr("one sig A {} sig B {} run {} for 2", false, Dflt);
    assert!(text(&t).contains("(exists ((m$1 univ)) (and (in$A m$1) (forall ((m$2 univ)) (=> (in$A m$2) (= m$1 m$2)))))"));
}

#[test]
fn exact_scope_filling_its_sort_elides_membership() {
    let t = tr("sig A {} sig B {} run { some A } for exactly 2 A, exactly 2 B", true, Partition);
    assert!(t.theory.func("in$A").is_none());
    assert!(t.theory.func("in$B").is_none());
    assert_eq!(goal(&t), "true");
}

#[test]
fn one_field_general_path() {
    let t = tr("sig A { f: one B } sig B {} run {} for 2", false, Partition);
    let f = t.theory.func("f").unwrap();
    assert_eq!(f.args.len(), 2);
    let s = text(&t);
    assert!(s.contains("(forall ((x$8 A) (x$9 B)) (=> (f x$8 x$9) (in$A x$8)))"), "{s}");
}

#[test]
fn arrow_multiplicity_uses_declaration_formula() {
    let t = tr("sig A { f: B -> one C } sig B {} sig C {} run {} for 2", false, Partition);
    let fields = print::term(&t.theory.axioms[0]);
    assert!(fields.contains("forall"), "{fields}");
    assert!(!enumerate(&load_query("sig A { f: B -> one C } sig B {} sig C {} run { some a: A | some b: B | no b.(a.f) } for 2", &Selector::Index(0)).unwrap(), 1_000_000).unwrap().is_sat());
}

#[test]
fn univ_field_is_indefinite() {
    for pol in [Dflt, Partition] {
        let e = try_tr("sig A { f: univ } run {}", true, pol).err().unwrap();
        assert!(matches!(e, Error::IndefiniteSort { .. }), "{e}");
        assert_eq!(e.exit_code(), 3);
    }
}

#[test]
fn quantifier_over_mixed_bound_is_split() {
    let t = tr("sig A { n: one Int } run { all x: A + Int | some n.x } for 2", false, Partition);
    let g = goal(&t);
    assert!(g.contains("(forall ((x$") && g.contains(" A))") && g.contains(" Int))"), "{g}");
}

#[test]
fn empty_binder_short_circuits() {
    assert_eq!(goal(&tr("sig A {} run { no x: none | x = x } for 2", true, Partition)), "true");
    assert_eq!(goal(&tr("sig A {} run { some x: none | x = x } for 2", true, Partition)), "false");
}

#[test]
fn implies_else_becomes_ite() {
    let t = tr("sig A {} sig B {} run { some A => some B else no B } for 2", true, Partition);
    assert!(goal(&t).starts_with("(ite (exists ((m$1 A)) (in$A m$1))"), "{}", goal(&t));
}

#[test]
fn transpose_swaps_arguments() {
    let t = tr("sig A { f: set A } run { all x, y: A | y -> x in ~f } for 2", false, Partition);
    assert!(goal(&t).contains("(=> (and (= m$8 y$7) (= m$9 x$6)) (f m$9 m$8))"), "{}", goal(&t));
}

#[test]
fn variable_membership_is_equality() {
    let t = tr("sig A {} run { some x: A | all y: A | y in x } for 2", false, Partition);
    assert!(goal(&t).contains("(= m$3 x$1)") || goal(&t).contains("(= y$2 x$1)"), "{}", goal(&t));
}

#[test]
fn join_over_disjoint_sorts_is_false() {
    let t = tr("sig A {} sig B { g: set B } run { some x: A | some x.g } for 2", false, Partition);
    assert_eq!(goal(&t), "false");
}

#[test]
fn closure_definitions() {
    let t = tr("sig A { f: set A } run { some x: A | some x.^f } for 2", false, Partition);
    assert_eq!(t.theory.defs.len(), 1);
    assert_eq!(t.theory.defs[0].params.len(), 2);
    assert!(goal(&t).contains("(closure aux$11 j$8 m$7)"), "{}", goal(&t));

    let t = tr("sig A { g: A -> A } run { some x, y: A | y in x.^(y.g) } for 2", false, Partition);
    assert_eq!(t.theory.defs[0].params.len(), 3);
    assert!(goal(&t).contains("(closure aux$16 j$11 m$10 y$9)"), "{}", goal(&t));

    let t = tr("sig A { f: set A } run { some x: A | some x.*f } for 2", false, Partition);
    assert!(goal(&t).contains("(rclosure aux$11"), "{}", goal(&t));
}

#[test]
fn cardinality_of_none_and_one_sig() {
    let t = tr("sig A {} run { #none = 0 } for 2", true, Partition);
    assert_eq!(goal(&t), "true");
    let t = tr("one sig A {} run { #A = 1 } for 2", true, Partition);
    assert_eq!(goal(&t), "true");
    let q = load_query("one sig A {} run { #A != 1 } for 2", &Selector::Index(0)).unwrap();
    assert!(!enumerate(&q, 1000).unwrap().is_sat());
}

#[test]
fn cardinality_counts_every_tuple() {
    let t = tr("sig S1 {} sig S2 {} sig F { r: set S1 -> S2 } run { some x: F | #x.r = 2 } for 3 S1, 2 S2, 1 F", false, Partition);
    let g = t.theory.axioms.last().unwrap();
    let sums = count(g, &|u| matches!(u, Term::Sum(xs) if xs.len() == 6));
    assert_eq!(sums, 1);
    let ites = count(g, &|u| matches!(u, Term::Ite(_, a, b) if **a == Term::Int(1) && **b == Term::Int(0)));
    assert_eq!(ites, 6);
}

#[test]
fn ordering_next_chain() {
    let t = tr("open util/ordering[A] sig A {} run { some x: A | some x.next and x in first } for 3", true, Partition);
    let next = t.theory.def("next$A").unwrap();
    assert_eq!(print::term(&next.body), "(ite (= x$2 A$1) A$2 A$3)");
    assert_eq!(goal(&t), "(exists ((x$1 A)) (and (not (= x$1 A$3)) (= x$1 A$1)))");

    let t = tr("open util/ordering[A] sig A {} run { some x: A | some x.next } for 1", true, Partition);
    assert_eq!(goal(&t), "false");
}

#[test]
fn ordering_prev_chain() {
    let t = tr("open util/ordering[A] sig A {} run { some x: A | some x.prev } for 4", true, Partition);
    let prev = t.theory.def("prev$A").unwrap();
    assert_eq!(print::term(&prev.body).matches("ite").count(), 2);
}

#[test]
fn equivalent_calls_share_a_definition() {
    let t = tr("sig A {} pred nonempty[s: A] { some s } run { some y, z: A | nonempty[y] and nonempty[z] } for 2", true, Partition);
    assert_eq!(t.theory.defs.len(), 1);
    assert!(goal(&t).contains("(nonempty$4 y$1) (nonempty$4 z$2)"), "{}", goal(&t));
}

#[test]
fn different_call_shapes_get_new_definitions() {
    let t = tr("sig A {} fun ne[s: set A]: set A { s } run { some y, z: A | some ne[y] and some ne[y+z] } for 2", true, Partition);
    assert_eq!(t.theory.defs.len(), 2);
    assert_eq!(t.theory.defs[0].params.len(), 2);
    assert_eq!(t.theory.defs[1].params.len(), 3);
}

#[test]
fn zero_argument_predicate_defined_once() {
    let t = tr("sig A {} pred ready { some A } run { ready and (some A implies ready) } for 2", true, Partition);
    assert_eq!(t.theory.defs.len(), 1);
    assert!(t.theory.defs[0].params.is_empty());
    assert_eq!(goal(&t).matches("ready$").count(), 2);
}

#[test]
fn translation_is_deterministic_and_well_sorted() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut checked = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let src = std::fs::read_to_string(e.unwrap().path()).unwrap();
        for (name, opts) in TransOptions::configurations() {
            let q = load_query(&src, &Selector::Index(0)).unwrap();
            let a = translate_query(&q, &opts).unwrap();
            let b = translate_query(&q, &opts).unwrap();
            assert_eq!(print_theory(&a.theory), print_theory(&b.theory), "{name}\n{src}");
            if let Err(errs) = well_sorted(&a.theory) {
                panic!("{name}: {errs:?}\n{src}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 400);
}

#[test]
fn scope_styles_differ_only_in_scope_axioms() {
    let q = load_query("sig A {} sig B {} run { some A } for 2", &Selector::Index(0)).unwrap();
    let card = translate_query(&q, &TransOptions { scope_axioms: ScopeStyle::Cardinality, ..TransOptions::default() }).unwrap();
    let cons = translate_query(&q, &TransOptions::default()).unwrap();
    assert!(card.theory.consts.is_empty());
    assert_eq!(cons.theory.consts.len(), 4);
    assert!(cons.theory.consts.iter().all(|(n, _)| n.starts_with("scope_")));
}

#[test]
fn scalar_fields_are_functions() {
    let t = tr("sig A { f: one B, g: lone B, h: B -> one B } sig B {} run {} for 2", true, Partition);
    let f = t.theory.func("f").unwrap();
    assert_eq!((f.args.len(), &f.ret), (1, &Ret::Sort(portus_core::ir::Sort::named("B"))));
    assert!(t.theory.func("dom$f").is_none());
    assert_eq!(t.theory.func("g").unwrap().args.len(), 1);
    assert_eq!(t.theory.func("dom$g").unwrap().ret, Ret::Bool);
    assert_eq!(t.theory.func("h").unwrap().args.len(), 2);
    assert!(text(&t).contains("(=> (in$A a$1) (in$B (f a$1)))"), "{}", text(&t));
}

#[test]
fn one_sig_becomes_a_constant() {
    let t = tr("one sig Root {} sig A {} run { some Root } for 2", true, Partition);
    assert!(t.theory.func("in$Root").is_none());
    let t = tr("open util/ordering[O] sig O {} one sig A extends O {} run {} for exactly 3 O", true, Partition);
    assert!(t.theory.func("in$A").is_some());
    let t = tr("sig A {} one sig D in A {} run {} for 2", true, Partition);
    assert!(t.theory.func("in$D").is_some());
}

#[test]
fn cast_sites_are_logged() {
    let t = tr("sig A { f: one A } run { some x: A | x.f = x } for 2", true, Partition);
    assert!(t.casts.iter().any(|c| c.expr.contains("f") && c.value.contains("(f x$")), "{:?}", t.casts);
    let t = tr("sig A { h: A -> one A } run { some x, y: A | some y.(x.h) } for 2", true, Partition);
    assert!(t.casts.iter().any(|c| c.value.contains("(h x$") && c.value.contains("y$")), "{:?}", t.casts);
    let t = tr("sig A { f: lone A, g: lone A } run { some x: A | some x.(f ++ g) } for 2", true, Partition);
    assert!(t.casts.iter().any(|c| c.value.starts_with("(ite (dom$g")), "{:?}", t.casts);
}

fn corpus() -> Vec<(String, String)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn smt_for(model: &std::sync::Arc<portus_core::frontend::ast::Model>, i: usize) -> String {
    let q = portus_core::frontend::query::select_command(model, &Selector::Index(i)).unwrap();
    let (_, g) = portus_core::pipeline::translate_and_ground(&q, &Default::default()).unwrap();
    portus_core::smt::emit::emit_smtlib(&g)
}

#[test]
fn emission_is_byte_stable() {
    for (name, src) in corpus() {
        let m = std::sync::Arc::new(portus_core::frontend::load(&src).unwrap());
        for i in 0..m.commands.len() {
            let again = std::sync::Arc::new(portus_core::frontend::load(&src).unwrap());
            assert_eq!(smt_for(&m, i), smt_for(&again, i), "{name} command {i}");
        }
    }
}

#[test]
fn emission_matches_golden_file() {
    let src = include_str!("corpus/scalar_chain.als");
    let m = std::sync::Arc::new(portus_core::frontend::load(src).unwrap());
    assert_eq!(smt_for(&m, 0), include_str!("golden/scalar_chain.smt2"));
}

#[test]
fn earlier_selection_does_not_affect_later_one() {
    for (name, src) in corpus() {
        let m = std::sync::Arc::new(portus_core::frontend::load(&src).unwrap());
        let n = m.commands.len();
        let direct: Vec<String> = (0..n).map(|j| smt_for(&m, j)).collect();
        for i in (0..n).rev() {
            let _ = smt_for(&m, i);
            for (j, d) in direct.iter().enumerate() {
                assert_eq!(&smt_for(&m, j), d, "{name}: {i} then {j}");
            }
        }
    }
}
