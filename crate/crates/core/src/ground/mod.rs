//! Finite-model grounding: quantifier expansion over domain elements, closure lowering
//! by iterative squaring, range formulas and simplification.

pub mod eval;

pub use eval::{eval, Interp};

use crate::error::{Error, Result};
use crate::ir::*;
use std::collections::HashMap;

pub const DEFAULT_BUDGET: usize = 5_000_000;

/// A theory without quantifiers or closures; `range` holds the range formulas separately
/// from the translated axioms.
#[derive(Clone, Debug, Default)]
pub struct GroundTheory {
    pub theory: Theory,
    pub range: Vec<Term>,
    pub nodes: usize,
}

impl GroundTheory {
    pub fn all_axioms(&self) -> impl Iterator<Item = &Term> {
        self.range.iter().chain(&self.theory.axioms)
    }

    pub fn uses_ints(&self) -> bool {
        let th = &self.theory;
        let int_sig = th.consts.iter().any(|(_, s)| *s == Sort::Int)
            || th.funcs.iter().any(|f| f.args.contains(&Sort::Int) || f.ret == Ret::Sort(Sort::Int))
            || th.defs.iter().any(|d| d.params.iter().any(|p| p.1 == Sort::Int) || d.ret == Ret::Sort(Sort::Int));
        let mut found = false;
        let mut scan = |t: &Term| {
            t.visit(&mut |x| {
                if matches!(x, Term::Int(_) | Term::IntBin(..) | Term::Cmp(..) | Term::Sum(_)) {
                    found = true;
                }
            })
        };
        self.all_axioms().for_each(&mut scan);
        th.defs.iter().for_each(|d| scan(&d.body));
        int_sig || found
    }
}

/// Number of squaring steps needed so that paths of length up to `k` are covered.
pub fn squarings(k: u64) -> u32 {
    if k <= 1 {
        0
    } else {
        64 - (k - 1).leading_zeros()
    }
}

/// All tuples over the given sorts, in lexicographic element order.
pub fn tuples(th: &Theory, sorts: &[Sort]) -> Vec<Vec<Term>> {
    let mut out = vec![vec![]];
    for s in sorts {
        let els = th.elements(s);
        out = out
            .into_iter()
            .flat_map(|t| {
                els.iter().map(move |e| {
                    let mut t = t.clone();
                    t.push(e.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Range formulas for every declared constant and function.
pub fn range_formulas(th: &Theory) -> Vec<Term> {
    let within = |t: Term, s: &Sort| match s {
        Sort::Int => Term::and([
            Term::cmp(Cmp::Le, Term::Int(th.min_int()), t.clone()),
            Term::cmp(Cmp::Le, t, Term::Int(th.max_int())),
        ]),
        Sort::U(_) => Term::or(th.elements(s).into_iter().map(|e| Term::eq(t.clone(), e))),
    };
    let mut out = Vec::new();
    for (c, s) in &th.consts {
        out.push(within(Term::app(c, vec![]), s));
    }
    for f in &th.funcs {
        if let Ret::Sort(s) = &f.ret {
            for args in tuples(th, &f.args) {
                out.push(within(Term::app(&f.name, args), s));
            }
        }
    }
    out
}

pub fn ground(th: &Theory, budget: usize) -> Result<GroundTheory> {
    let mut g = Grounder::new(th, true, budget);
    for d in &th.defs {
        let body = g.run(&d.body)?;
        g.defs.push(FuncDef { body, ..d.clone() });
    }
    let mut axioms = Vec::new();
    for a in &th.axioms {
        let t = g.run(a)?;
        if !t.is_true() {
            axioms.push(t);
        }
    }
    let mut ex = th.extraction.clone();
    for (_, rows) in &mut ex.sigs {
        for (_, t) in rows.iter_mut() {
            *t = g.run(t)?;
        }
    }
    for (_, rows) in &mut ex.fields {
        match rows {
            FieldRows::Pred(rs) => {
                for (_, t) in rs.iter_mut() {
                    *t = g.run(t)?;
                }
            }
            FieldRows::Func(rs) => {
                for (_, guard, v) in rs.iter_mut() {
                    *guard = g.run(guard)?;
                    *v = g.run(v)?;
                }
            }
        }
    }
    let range = range_formulas(th);
    let nodes = g.nodes + range.iter().map(Term::size).sum::<usize>();
    if nodes > budget {
        return Err(over_budget(budget));
    }
    Ok(GroundTheory {
        theory: Theory { defs: g.defs, axioms, extraction: ex, ..th.clone() },
        range,
        nodes,
    })
}

/// Constant folding and witness elimination, leaving quantifiers and closures in place.
pub fn simplify(t: &Term, bitwidth: u32) -> Term {
    let th = Theory { bitwidth, ..Theory::default() };
    let mut g = Grounder::new(&th, false, usize::MAX);
    g.run(t).expect("simplification has no budget")
}

fn over_budget(budget: usize) -> Error {
    Error::Resource(format!("ground theory exceeds {budget} nodes; raise --ground-budget or lower the scopes"))
}

struct Grounder<'a> {
    th: &'a Theory,
    expand: bool,
    budget: usize,
    nodes: usize,
    defs: Vec<FuncDef>,
    squares: HashMap<Sym, Sym>,
}

type Env = Vec<(Sym, Term)>;

impl<'a> Grounder<'a> {
    fn new(th: &'a Theory, expand: bool, budget: usize) -> Self {
        Grounder { th, expand, budget, nodes: 0, defs: Vec::new(), squares: HashMap::new() }
    }

    fn run(&mut self, t: &Term) -> Result<Term> {
        let r = self.g(t, &mut Vec::new())?;
        self.nodes += r.size();
        if self.nodes > self.budget {
            return Err(over_budget(self.budget));
        }
        Ok(r)
    }

    fn g(&mut self, t: &Term, env: &mut Env) -> Result<Term> {
        Ok(match t {
            Term::Var(v, _) => env.iter().rev().find(|(k, _)| k == v).map(|(_, x)| x.clone()).unwrap_or_else(|| t.clone()),
            Term::Elem(..) | Term::Int(_) | Term::Bool(_) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), self.all(args, env)?),
            Term::Eq(a, b) => Term::eq(self.g(a, env)?, self.g(b, env)?),
            Term::Not(a) => Term::not(self.g(a, env)?),
            Term::And(xs) => {
                let mut out = Vec::new();
                for x in xs {
                    let x = self.g(x, env)?;
                    if x.is_false() {
                        return Ok(FALSE);
                    }
                    out.push(x);
                }
                Term::and(out)
            }
            Term::Or(xs) => {
                let mut out = Vec::new();
                for x in xs {
                    let x = self.g(x, env)?;
                    if x.is_true() {
                        return Ok(TRUE);
                    }
                    out.push(x);
                }
                Term::or(out)
            }
            Term::Implies(a, b) => {
                let a = self.g(a, env)?;
                if a.is_false() {
                    return Ok(TRUE);
                }
                Term::implies(a, self.g(b, env)?)
            }
            Term::Iff(a, b) => Term::iff(self.g(a, env)?, self.g(b, env)?),
            Term::Ite(c, a, b) => match self.g(c, env)? {
                Term::Bool(true) => self.g(a, env)?,
                Term::Bool(false) => self.g(b, env)?,
                c => Term::ite(c, self.g(a, env)?, self.g(b, env)?),
            },
            Term::Forall(vs, body) => self.quant(true, vs, body, env)?,
            Term::Exists(vs, body) => self.quant(false, vs, body, env)?,
            Term::Closure { reflexive, def, x, y, args } => {
                let x = self.g(x, env)?;
                let y = self.g(y, env)?;
                let args = self.all(args, env)?;
                if !self.expand {
                    return Ok(Term::Closure { reflexive: *reflexive, def: def.clone(), x: Box::new(x), y: Box::new(y), args });
                }
                let r = self.lower_closure(def)?;
                let mut full = vec![x.clone(), y.clone()];
                full.extend(args);
                let app = Term::app(&r, full);
                if *reflexive {
                    Term::or([Term::eq(x, y), app])
                } else {
                    app
                }
            }
            Term::IntBin(op, a, b) => match (self.g(a, env)?, self.g(b, env)?) {
                (Term::Int(x), Term::Int(y)) => Term::Int(int_op(*op, x, y, self.bits())),
                (a, b) => Term::int_bin(*op, a, b),
            },
            Term::Cmp(op, a, b) => match (self.g(a, env)?, self.g(b, env)?) {
                (Term::Int(x), Term::Int(y)) => Bool(match op {
                    Cmp::Lt => x < y,
                    Cmp::Le => x <= y,
                }),
                (a, b) => Term::cmp(*op, a, b),
            },
            Term::Sum(xs) => {
                let mut k = 0i64;
                let mut rest = Vec::new();
                for x in xs {
                    match self.g(x, env)? {
                        Term::Int(n) => k = k.wrapping_add(n),
                        Term::Sum(ys) => rest.extend(ys),
                        y => rest.push(y),
                    }
                }
                let k = self.wrap(k);
                if rest.is_empty() {
                    Term::Int(k)
                } else {
                    if k != 0 {
                        rest.push(Term::Int(k));
                    }
                    Term::sum(rest)
                }
            }
        })
    }

    fn bits(&self) -> u32 {
        if self.th.bitwidth == 0 {
            63
        } else {
            self.th.bitwidth
        }
    }

    fn wrap(&self, v: i64) -> i64 {
        wrap(v, self.bits())
    }

    fn all(&mut self, xs: &[Term], env: &mut Env) -> Result<Vec<Term>> {
        xs.iter().map(|x| self.g(x, env)).collect()
    }

    fn quant(&mut self, forall: bool, vs: &[Binder], body: &Term, env: &mut Env) -> Result<Term> {
        let mut vs = vs.to_vec();
        let mark = env.len();
        while let Some((i, w)) = witness(forall, &vs, body) {
            let w = self.g(&w, env)?;
            env.push((vs.remove(i).0, w));
        }
        let r = if vs.is_empty() {
            self.g(body, env)
        } else if !self.expand {
            self.g(body, env).map(|b| if forall { Term::forall(vs, b) } else { Term::exists(vs, b) })
        } else {
            self.expand_quant(forall, &vs, body, env)
        };
        env.truncate(mark);
        r
    }

    fn expand_quant(&mut self, forall: bool, vs: &[Binder], body: &Term, env: &mut Env) -> Result<Term> {
        let sorts: Vec<Sort> = vs.iter().map(|(_, s)| s.clone()).collect();
        let count: u64 = sorts.iter().map(|s| self.th.sort_size(s)).product();
        if count.saturating_mul(body.size() as u64) > (self.budget.saturating_sub(self.nodes)) as u64 * 4 + 1024 {
            return Err(over_budget(self.budget));
        }
        let mut parts = Vec::new();
        let mut total = 0usize;
        for tup in tuples(self.th, &sorts) {
            let mark = env.len();
            env.extend(vs.iter().map(|(n, _)| n.clone()).zip(tup));
            let r = self.g(body, env);
            env.truncate(mark);
            let r = r?;
            match (forall, &r) {
                (true, Term::Bool(false)) => return Ok(FALSE),
                (false, Term::Bool(true)) => return Ok(TRUE),
                (true, Term::Bool(true)) | (false, Term::Bool(false)) => continue,
                _ => {}
            }
            total += r.size();
            if self.nodes + total > self.budget {
                return Err(over_budget(self.budget));
            }
            parts.push(r);
        }
        Ok(if forall { Term::and(parts) } else { Term::or(parts) })
    }

    /// Name of the definition computing the transitive closure of `def`, creating
    /// the squaring chain on first use.
    fn lower_closure(&mut self, def: &Sym) -> Result<Sym> {
        if let Some(r) = self.squares.get(def) {
            return Ok(r.clone());
        }
        let p = self
            .defs
            .iter()
            .find(|d| &d.name == def)
            .cloned()
            .ok_or_else(|| Error::Eval(format!("closure over unknown definition {def}")))?;
        let k = self.th.sort_size(&p.params[0].1);
        let mut cur = p.name.clone();
        for j in 1..=squarings(k) {
            let name = sym(&format!("{}$sq{j}", p.name));
            let z = sym(&format!("{}$z", p.name));
            let zs = p.params[0].1.clone();
            let zt = Term::var(&z, &zs);
            let ps: Vec<Term> = p.params.iter().map(|(n, s)| Term::var(n, s)).collect();
            let with = |a: &Term, b: &Term| {
                let mut v = vec![a.clone(), b.clone()];
                v.extend(ps[2..].iter().cloned());
                Term::app(&cur, v)
            };
            let body = Term::or([
                Term::app(&cur, ps.clone()),
                Term::exists(vec![(z, zs)], Term::and([with(&ps[0], &zt), with(&zt, &ps[1])])),
            ]);
            let body = self.run(&body)?;
            self.defs.push(FuncDef { name: name.clone(), params: p.params.clone(), ret: Ret::Bool, body });
            cur = name;
        }
        self.squares.insert(def.clone(), cur.clone());
        Ok(cur)
    }
}

/// A bound variable fixed by an equation in the guard of a universal or the body of an
/// existential, together with its value.
fn witness(forall: bool, vs: &[Binder], body: &Term) -> Option<(usize, Term)> {
    let guard = if forall {
        match body {
            Term::Implies(g, _) => &**g,
            _ => return None,
        }
    } else {
        body
    };
    let conj: &[Term] = match guard {
        Term::And(xs) => xs,
        g => std::slice::from_ref(g),
    };
    for c in conj {
        let Term::Eq(a, b) = c else { continue };
        for (x, t) in [(a, b), (b, a)] {
            let Term::Var(v, _) = &**x else { continue };
            let Some(i) = vs.iter().position(|(n, _)| n == v) else { continue };
            if vs.iter().all(|(n, _)| !t.contains_var(n)) {
                return Some((i, (**t).clone()));
            }
        }
    }
    None
}

/// True when no quantifier or closure node remains.
pub fn is_ground(t: &Term) -> bool {
    let mut ok = true;
    t.visit(&mut |x| {
        if matches!(x, Term::Forall(..) | Term::Exists(..) | Term::Closure { .. }) {
            ok = false;
        }
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Sort {
        Sort::named("S")
    }

    fn theory(k: u32) -> Theory {
        Theory { sorts: vec![(sym("S"), k)], bitwidth: 4, ..Theory::default() }
    }

    fn p(x: Term) -> Term {
        Term::app(&sym("p"), vec![x])
    }

    #[test]
    fn forall_expands_to_conjunction() {
        let mut th = theory(2);
        let x = sym("x");
        th.axioms.push(Term::forall(vec![(x.clone(), s())], p(Term::var(&x, &s()))));
        let g = ground(&th, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.theory.axioms, vec![Term::and([p(Term::elem(&sym("S"), 1)), p(Term::elem(&sym("S"), 2))])]);
    }

    #[test]
    fn existential_witness_is_substituted() {
        let x = sym("x");
        let c = Term::app(&sym("c"), vec![]);
        let body = Term::and([p(Term::var(&x, &s())), Term::eq(Term::var(&x, &s()), c.clone())]);
        let t = simplify(&Term::exists(vec![(x, s())], body), 4);
        assert_eq!(t, p(c));
    }

    #[test]
    fn nested_quantifiers() {
        let mut th = theory(2);
        let (x, y) = (sym("x"), sym("y"));
        let r = Term::app(&sym("r"), vec![Term::var(&x, &s()), Term::var(&y, &s())]);
        th.axioms.push(Term::forall(vec![(x, s())], Term::exists(vec![(y, s())], r)));
        let g = ground(&th, DEFAULT_BUDGET).unwrap();
        let Term::And(parts) = &g.theory.axioms[0] else { panic!() };
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| matches!(p, Term::Or(d) if d.len() == 2)));
    }

    #[test]
    fn range_formula_shapes() {
        let mut th = theory(2);
        th.consts.push((sym("c"), s()));
        th.funcs.push(FuncDecl { name: sym("f"), args: vec![s()], ret: Ret::Sort(s()) });
        th.funcs.push(FuncDecl { name: sym("h"), args: vec![s()], ret: Ret::Sort(Sort::Int) });
        let r = range_formulas(&th);
        assert_eq!(r.len(), 5);
        assert!(matches!(&r[0], Term::Or(d) if d.len() == 2));
        assert!(matches!(&r[1], Term::Or(d) if d.len() == 2));
        let h = Term::app(&sym("h"), vec![Term::elem(&sym("S"), 1)]);
        assert_eq!(r[3], Term::and([Term::cmp(Cmp::Le, Term::Int(-8), h.clone()), Term::cmp(Cmp::Le, h, Term::Int(7))]));
    }

    #[test]
    fn squaring_counts() {
        assert_eq!(squarings(1), 0);
        assert_eq!(squarings(2), 1);
        assert_eq!(squarings(3), 2);
        assert_eq!(squarings(4), 2);
        assert_eq!(squarings(5), 3);
    }

    fn closure_theory(k: u32, trailing: bool) -> Theory {
        let mut th = theory(k);
        let (x, y, a) = (sym("x"), sym("y"), sym("a"));
        let mut params = vec![(x.clone(), s()), (y.clone(), s())];
        let mut args = vec![Term::var(&x, &s()), Term::var(&y, &s())];
        if trailing {
            params.push((a.clone(), s()));
            args.push(Term::var(&a, &s()));
        }
        th.funcs.push(FuncDecl { name: sym("e"), args: params.iter().map(|p| p.1.clone()).collect(), ret: Ret::Bool });
        th.defs.push(FuncDef { name: sym("p"), params, ret: Ret::Bool, body: Term::app(&sym("e"), args) });
        let c = Term::Closure {
            reflexive: false,
            def: sym("p"),
            x: Box::new(Term::elem(&sym("S"), 1)),
            y: Box::new(Term::elem(&sym("S"), 2)),
            args: if trailing { vec![Term::elem(&sym("S"), 1)] } else { vec![] },
        };
        th.axioms.push(c);
        th
    }

    #[test]
    fn closure_over_four_elements_uses_two_squarings() {
        let g = ground(&closure_theory(4, false), DEFAULT_BUDGET).unwrap();
        assert_eq!(g.theory.defs.len(), 3);
        assert_eq!(g.theory.axioms[0], Term::app(&sym("p$sq2"), vec![Term::elem(&sym("S"), 1), Term::elem(&sym("S"), 2)]));
        assert!(g.theory.defs.iter().all(|d| is_ground(&d.body)));
    }

    #[test]
    fn closure_over_one_element_is_the_relation() {
        let mut th = closure_theory(1, false);
        th.axioms[0] = Term::Closure {
            reflexive: false,
            def: sym("p"),
            x: Box::new(Term::elem(&sym("S"), 1)),
            y: Box::new(Term::elem(&sym("S"), 1)),
            args: vec![],
        };
        let g = ground(&th, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.theory.defs.len(), 1);
        assert_eq!(g.theory.axioms[0], Term::app(&sym("p"), vec![Term::elem(&sym("S"), 1), Term::elem(&sym("S"), 1)]));
    }

    #[test]
    fn squarings_carry_trailing_arguments() {
        let g = ground(&closure_theory(3, true), DEFAULT_BUDGET).unwrap();
        assert!(g.theory.defs.iter().all(|d| d.params.len() == 3));
    }

    #[test]
    fn simplify_examples() {
        let d1 = Term::elem(&sym("S"), 1);
        assert_eq!(simplify(&Term::Eq(Box::new(d1.clone()), Box::new(d1)), 4), TRUE);
        assert_eq!(simplify(&Term::And(vec![FALSE, p(Term::app(&sym("c"), vec![]))]), 4), FALSE);
        let (a, b) = (Term::app(&sym("a"), vec![]), Term::app(&sym("b"), vec![]));
        assert_eq!(simplify(&Term::Ite(Box::new(TRUE), Box::new(a.clone()), Box::new(b)), 4), a);
        assert_eq!(simplify(&Term::int_bin(IntOp::Add, Term::Int(7), Term::Int(1)), 4), Term::Int(-8));
    }

    #[test]
    fn budget_is_enforced() {
        let mut th = theory(50);
        let vs: Vec<Binder> = ["x", "y", "z"].iter().map(|n| (sym(n), s())).collect();
        let body = Term::app(&sym("r"), vs.iter().map(|(n, s)| Term::var(n, s)).collect());
        th.axioms.push(Term::forall(vs, body));
        assert!(matches!(ground(&th, 10_000), Err(Error::Resource(_))));
    }
}
