//! Sort resolvants and the default and partition sort policies.

use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::frontend::query::Query;
use crate::ir::{sym, Sort, Sym};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Sort tuples over-approximating the tuples of an expression.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Resolvant {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Sort>>,
}

impl Resolvant {
    pub fn empty(arity: usize) -> Self {
        Resolvant { arity, tuples: BTreeSet::new() }
    }

    pub fn single(t: Vec<Sort>) -> Self {
        Resolvant { arity: t.len(), tuples: [t].into() }
    }

    pub fn unary(sorts: impl IntoIterator<Item = Sort>) -> Self {
        Resolvant { arity: 1, tuples: sorts.into_iter().map(|s| vec![s]).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn is_definite(&self) -> bool {
        self.tuples.len() == 1
    }

    pub fn definite(&self) -> Option<&Vec<Sort>> {
        if self.is_definite() {
            self.tuples.iter().next()
        } else {
            None
        }
    }

    pub fn union(&self, o: &Resolvant) -> Resolvant {
        Resolvant { arity: self.arity, tuples: self.tuples.union(&o.tuples).cloned().collect() }
    }

    pub fn inter(&self, o: &Resolvant) -> Resolvant {
        Resolvant { arity: self.arity, tuples: self.tuples.intersection(&o.tuples).cloned().collect() }
    }

    pub fn product(&self, o: &Resolvant) -> Resolvant {
        let mut tuples = BTreeSet::new();
        for a in &self.tuples {
            for b in &o.tuples {
                tuples.insert(a.iter().chain(b).cloned().collect());
            }
        }
        Resolvant { arity: self.arity + o.arity, tuples }
    }

    pub fn join(&self, o: &Resolvant) -> Resolvant {
        let mut tuples = BTreeSet::new();
        for a in &self.tuples {
            for b in &o.tuples {
                if a.last() == b.first() {
                    tuples.insert(a[..a.len() - 1].iter().chain(&b[1..]).cloned().collect());
                }
            }
        }
        Resolvant { arity: self.arity + o.arity - 2, tuples }
    }

    pub fn transpose(&self) -> Resolvant {
        Resolvant { arity: 2, tuples: self.tuples.iter().map(|t| vec![t[1].clone(), t[0].clone()]).collect() }
    }

    /// Tuples whose first column lies in `firsts`.
    pub fn dom_restrict(&self, firsts: &Resolvant) -> Resolvant {
        let ok: BTreeSet<&Sort> = firsts.tuples.iter().map(|t| &t[0]).collect();
        Resolvant { arity: self.arity, tuples: self.tuples.iter().filter(|t| ok.contains(&t[0])).cloned().collect() }
    }

    /// Tuples whose last column lies in `lasts`.
    pub fn ran_restrict(&self, lasts: &Resolvant) -> Resolvant {
        let ok: BTreeSet<&Sort> = lasts.tuples.iter().map(|t| &t[0]).collect();
        Resolvant {
            arity: self.arity,
            tuples: self.tuples.iter().filter(|t| ok.contains(t.last().unwrap())).cloned().collect(),
        }
    }

    pub fn column(&self, i: usize) -> BTreeSet<Sort> {
        self.tuples.iter().map(|t| t[i].clone()).collect()
    }
}

pub fn is_definite(r: &Resolvant) -> bool {
    r.is_definite()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyMode {
    #[default]
    Default,
    Partition,
}

impl std::str::FromStr for PolicyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "default" => Ok(PolicyMode::Default),
            "partition" => Ok(PolicyMode::Partition),
            _ => Err(format!("unknown sort policy `{s}` (expected default or partition)")),
        }
    }
}

pub const DEFAULT_SORT: &str = "univ";

#[derive(Clone, Debug)]
pub struct SortPolicy {
    pub mode: PolicyMode,
    /// Sort of every top-level signature.
    pub sig_to_sort: BTreeMap<String, Sort>,
    /// Uninterpreted sorts with their sizes, in order of first declaration.
    pub sort_sizes: Vec<(Sym, u32)>,
    pub bitwidth: u32,
}

impl SortPolicy {
    /// Sorts of a signature: one per top-level ancestor.
    pub fn sorts_of(&self, model: &Model, sig: &str) -> BTreeSet<Sort> {
        model.tops_of(sig).iter().map(|t| self.sig_to_sort[t].clone()).collect()
    }

    /// The sort of a signature whose top-level ancestors share one sort.
    pub fn sort_of(&self, model: &Model, sig: &str) -> Option<Sort> {
        let s = self.sorts_of(model, sig);
        if s.len() == 1 {
            s.into_iter().next()
        } else {
            None
        }
    }

    pub fn size(&self, s: &Sort) -> u64 {
        match s {
            Sort::Int => 1u64 << self.bitwidth,
            Sort::U(n) => self.sort_sizes.iter().find(|(m, _)| m == n).map(|(_, k)| *k as u64).unwrap_or(0),
        }
    }

    /// Every sort, Int last.
    pub fn all_sorts(&self) -> Vec<Sort> {
        let mut v: Vec<Sort> = self.sort_sizes.iter().map(|(n, _)| Sort::U(n.clone())).collect();
        v.push(Sort::Int);
        v
    }

    /// Top-level signatures mapped to a sort, in declaration order.
    pub fn tops_in<'m>(&self, model: &'m Model, s: &Sort) -> Vec<&'m Sig> {
        model.top_level().filter(|t| self.sig_to_sort[&t.name] == *s).collect()
    }
}

/// Binding of quantified variables to the resolvants of their bounds.
#[derive(Clone, Debug, Default)]
pub struct SortContext {
    pub bindings: Vec<(String, Resolvant)>,
}

impl SortContext {
    pub fn with(&self, v: &str, r: Resolvant) -> SortContext {
        let mut c = self.clone();
        c.bindings.push((v.to_string(), r));
        c
    }

    pub fn get(&self, v: &str) -> Option<&Resolvant> {
        self.bindings.iter().rev().find(|(n, _)| n == v).map(|(_, r)| r)
    }
}

/// Resolvant of `e` under `policy`; variables not bound in `ctx` resolve to the empty set.
pub fn resolvant(model: &Model, policy: &SortPolicy, ctx: &SortContext, e: &Expr) -> Resolvant {
    let r = |x: &Expr| resolvant(model, policy, ctx, x);
    match &e.kind {
        EK::Sig(s) => Resolvant::unary(policy.sorts_of(model, s)),
        EK::Field(f) => {
            let fd = model.field(f).unwrap();
            let owner = Resolvant::unary(policy.sorts_of(model, &fd.owner));
            let mut out = Resolvant::empty(e.arity);
            for t in &owner.tuples {
                let c = SortContext::default().with("this", Resolvant::single(t.clone()));
                out = out.union(&Resolvant::single(t.clone()).product(&resolvant(model, policy, &c, &fd.bound)));
            }
            out
        }
        EK::Var(v) => ctx.get(v).cloned().unwrap_or_else(|| Resolvant::empty(1)),
        EK::Univ => Resolvant::unary(policy.all_sorts()),
        EK::Iden => Resolvant { arity: 2, tuples: policy.all_sorts().into_iter().map(|s| vec![s.clone(), s]).collect() },
        EK::None => Resolvant::empty(e.arity),
        EK::IntSig | EK::IntAtom(_) => Resolvant::single(vec![Sort::Int]),
        EK::Ord(rel, s) => {
            let ss = policy.sorts_of(model, s);
            match rel {
                OrdRel::First | OrdRel::Last => Resolvant::unary(ss),
                OrdRel::Next | OrdRel::Prev => {
                    Resolvant { arity: 2, tuples: ss.into_iter().map(|s| vec![s.clone(), s]).collect() }
                }
            }
        }
        EK::Union(a, b) | EK::Override(a, b) => r(a).union(&r(b)),
        EK::Inter(a, b) => r(a).inter(&r(b)),
        EK::Diff(a, _) => r(a),
        EK::Join(a, b) => r(a).join(&r(b)),
        EK::Product(a, _, _, b) => r(a).product(&r(b)),
        EK::DomR(a, b) => r(b).dom_restrict(&r(a)),
        EK::RanR(a, b) => r(a).ran_restrict(&r(b)),
        EK::Transpose(a) => r(a).transpose(),
        EK::Closure(a) => r(a),
        EK::RClosure(a) => {
            let iden = Expr::new(EK::Iden, 2, e.span);
            r(a).union(&r(&iden))
        }
        EK::Ite(_, a, b) => r(a).union(&r(b)),
        EK::Compr(ds, _) => {
            let mut c = ctx.clone();
            let mut out = Resolvant::single(vec![]);
            for d in ds {
                let b = resolvant(model, policy, &c, &d.bound);
                for v in &d.vars {
                    out = out.product(&b);
                    c = c.with(v, b.clone());
                }
            }
            out
        }
        EK::Call(f, args) => {
            let def = model.def(f).unwrap();
            let Body::Rel(body) = &def.body else { return Resolvant::empty(e.arity) };
            let mut c = SortContext::default();
            for (p, a) in def.params.iter().zip(args) {
                c = c.with(&p.name, r(a));
            }
            resolvant(model, policy, &c, body)
        }
    }
}

/// The default policy: every signature shares the sort `univ`.
pub fn default_policy(q: &Query) -> SortPolicy {
    let m = &q.model;
    let u = Sort::U(sym(DEFAULT_SORT));
    let sig_to_sort = m.top_level().map(|s| (s.name.clone(), u.clone())).collect();
    let size: u32 = m.top_level().map(|s| q.scope(&s.name).size).sum();
    SortPolicy { mode: PolicyMode::Default, sig_to_sort, sort_sizes: vec![(sym(DEFAULT_SORT), size.max(1))], bitwidth: q.bitwidth }
}

/// Policy for the requested mode.
pub fn make_policy(q: &Query, mode: PolicyMode) -> Result<SortPolicy> {
    match mode {
        PolicyMode::Default => Ok(default_policy(q)),
        PolicyMode::Partition => compute_partition(q),
    }
}

/// Per-sort sizes, Int included.
pub fn sort_sizes(policy: &SortPolicy) -> BTreeMap<Sort, u64> {
    policy.all_sorts().into_iter().map(|s| (s.clone(), policy.size(&s))).collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // the earlier-declared signature stays the representative
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

fn partition_policy(q: &Query, tops: &[&Sig], uf: &mut UnionFind) -> SortPolicy {
    let mut sig_to_sort = BTreeMap::new();
    let mut sizes: Vec<(Sym, u32)> = Vec::new();
    for (i, t) in tops.iter().enumerate() {
        let rep = uf.find(i);
        let name = sym(&tops[rep].name);
        sig_to_sort.insert(t.name.clone(), Sort::U(name.clone()));
        let sc = q.scope(&t.name).size;
        match sizes.iter_mut().find(|(n, _)| *n == name) {
            Some((_, k)) => *k += sc,
            None => sizes.push((name, sc)),
        }
    }
    for (_, k) in &mut sizes {
        *k = (*k).max(1);
    }
    SortPolicy { mode: PolicyMode::Partition, sig_to_sort, sort_sizes: sizes, bitwidth: q.bitwidth }
}

/// Partition policy: top-level signatures share a sort only where some expression
/// requires a definite sort spanning both. Iterates to a fixed point.
pub fn compute_partition(q: &Query) -> Result<SortPolicy> {
    let m = &q.model;
    let tops: Vec<&Sig> = m.top_level().collect();
    let mut uf = UnionFind((0..tops.len()).collect());
    loop {
        let policy = partition_policy(q, &tops, &mut uf);
        let mut c = Collector { model: m, policy: &policy, merges: Vec::new() };
        c.collect(q)?;
        let mut changed = false;
        for group in c.merges {
            let idx: Vec<usize> = tops
                .iter()
                .enumerate()
                .filter(|(_, t)| group.contains(&policy.sig_to_sort[&t.name]))
                .map(|(i, _)| i)
                .collect();
            for w in idx.windows(2) {
                changed |= uf.union(w[0], w[1]);
            }
        }
        if !changed {
            return Ok(policy);
        }
    }
}

/// Error for a definite-sort requirement that would mix Int with signature sorts.
pub fn int_mix_error(model: &Model, policy: &SortPolicy, e: &Expr, what: &str) -> Error {
    let mut merge = Vec::new();
    let mut group: Vec<String> = model
        .top_level()
        .filter(|t| {
            let s = &policy.sig_to_sort[&t.name];
            resolvant_mentions(&resolvant(model, policy, &SortContext::default(), e), s)
        })
        .map(|t| t.name.clone())
        .collect();
    group.push("Int".into());
    merge.push(group);
    Error::IndefiniteSort {
        span: e.span,
        message: format!("{what} mixes integers with other atoms and has no single sort"),
        merge,
    }
}

fn resolvant_mentions(r: &Resolvant, s: &Sort) -> bool {
    r.tuples.iter().any(|t| t.contains(s))
}

/// Resolvant of a field relation, the owner prepended.
pub fn field_resolvant(model: &Model, policy: &SortPolicy, f: &Field) -> Resolvant {
    resolvant(model, policy, &SortContext::default(), &Expr::new(EK::Field(f.name.clone()), f.arity(), f.span))
}

struct Collector<'a> {
    model: &'a Model,
    policy: &'a SortPolicy,
    merges: Vec<BTreeSet<Sort>>,
}

impl Collector<'_> {
    fn collect(&mut self, q: &Query) -> Result<()> {
        let m = self.model;
        for s in &m.sigs {
            if let Parent::In(_) = s.parent {
                let ss = self.policy.sorts_of(m, &s.name);
                if ss.len() > 1 {
                    self.merges.push(ss);
                }
            }
        }
        for f in &m.fields {
            let r = field_resolvant(m, self.policy, f);
            for i in 0..r.arity {
                self.column(r.column(i), || {
                    let e = Expr::new(EK::Field(f.name.clone()), f.arity(), f.span);
                    int_mix_error(m, self.policy, &e, &format!("field `{}`", f.name))
                })?;
            }
            for o in self.policy.sorts_of(m, &f.owner) {
                let ctx = SortContext::default().with("this", Resolvant::single(vec![o]));
                self.expr(&f.bound, &ctx)?;
            }
        }
        self.formula(&q.goal, &SortContext::default())
    }

    fn column(&mut self, col: BTreeSet<Sort>, err: impl FnOnce() -> Error) -> Result<()> {
        if col.len() > 1 && col.contains(&Sort::Int) {
            return Err(err());
        }
        if col.len() > 1 {
            self.merges.push(col);
        }
        Ok(())
    }

    fn res(&self, e: &Expr, ctx: &SortContext) -> Resolvant {
        resolvant(self.model, self.policy, ctx, e)
    }

    fn decls(&mut self, ds: &[Decl], ctx: &SortContext) -> Result<SortContext> {
        let mut c = ctx.clone();
        for d in ds {
            self.expr(&d.bound, &c)?;
            let r = self.res(&d.bound, &c);
            for v in &d.vars {
                c = c.with(v, r.clone());
            }
        }
        Ok(c)
    }

    fn call(&mut self, f: &str, args: &[Expr], ctx: &SortContext) -> Result<()> {
        for a in args {
            self.expr(a, ctx)?;
        }
        let def = self.model.def(f).unwrap();
        let map = |v: &str| def.params.iter().position(|p| p.name == v).map(|i| args[i].clone());
        match &def.body {
            Body::Formula(b) => self.formula(&b.subst(&map), ctx),
            Body::Rel(b) => self.expr(&b.subst(&map), ctx),
            Body::Int(b) => self.int(&b.subst(&map), ctx),
        }
    }

    fn expr(&mut self, e: &Expr, ctx: &SortContext) -> Result<()> {
        match &e.kind {
            EK::Closure(a) | EK::RClosure(a) => {
                let r = self.res(a, ctx);
                let both: BTreeSet<Sort> = r.column(0).union(&r.column(1)).cloned().collect();
                self.column(both, || int_mix_error(self.model, self.policy, a, "closure operand"))?;
                self.expr(a, ctx)
            }
            EK::Ite(c, a, b) => {
                self.formula(c, ctx)?;
                self.expr(a, ctx)?;
                self.expr(b, ctx)
            }
            EK::Compr(ds, f) => {
                let c = self.decls(ds, ctx)?;
                self.formula(f, &c)
            }
            EK::Call(f, args) => self.call(f, args, ctx),
            EK::IntAtom(i) => self.int(i, ctx),
            _ => {
                for c in e.children() {
                    self.expr(c, ctx)?;
                }
                Ok(())
            }
        }
    }

    fn int(&mut self, i: &IntExpr, ctx: &SortContext) -> Result<()> {
        match i {
            IntExpr::Lit(_) => Ok(()),
            IntExpr::Card(e) | IntExpr::FromRel(e) => self.expr(e, ctx),
            IntExpr::Bin(_, a, b) => {
                self.int(a, ctx)?;
                self.int(b, ctx)
            }
            IntExpr::Neg(a) => self.int(a, ctx),
            IntExpr::Sum(ds, b) => {
                let c = self.decls(ds, ctx)?;
                self.int(b, &c)
            }
            IntExpr::Ite(c, a, b) => {
                self.formula(c, ctx)?;
                self.int(a, ctx)?;
                self.int(b, ctx)
            }
            IntExpr::Call(f, args) => self.call(f, args, ctx),
        }
    }

    fn formula(&mut self, f: &Formula, ctx: &SortContext) -> Result<()> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Not(a) => self.formula(a, ctx),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|g| self.formula(g, ctx)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.formula(a, ctx)?;
                self.formula(b, ctx)
            }
            Formula::Ite(c, a, b) => {
                self.formula(c, ctx)?;
                self.formula(a, ctx)?;
                self.formula(b, ctx)
            }
            Formula::In(a, b) | Formula::Eq(a, b) => {
                self.expr(a, ctx)?;
                self.expr(b, ctx)
            }
            Formula::IntCmp(_, a, b) => {
                self.int(a, ctx)?;
                self.int(b, ctx)
            }
            Formula::Mult(_, e) => self.expr(e, ctx),
            Formula::Quant(_, ds, b) => {
                let c = self.decls(ds, ctx)?;
                self.formula(b, &c)
            }
            Formula::Call(f, args) => self.call(f, args, ctx),
        }
    }
}

/// JSON description of a policy: sorts with sizes and the sort of every signature.
pub fn dump_sorts(model: &Model, policy: &SortPolicy) -> serde_json::Value {
    let sorts: Vec<serde_json::Value> = policy
        .all_sorts()
        .iter()
        .map(|s| {
            let sigs: Vec<&str> = match s {
                Sort::Int => vec![],
                _ => policy.tops_in(model, s).iter().map(|t| t.name.as_str()).collect(),
            };
            serde_json::json!({ "name": s.to_string(), "size": policy.size(s), "sigs": sigs })
        })
        .collect();
    let sig_to_sort: BTreeMap<&str, Vec<String>> = model
        .sigs
        .iter()
        .map(|s| (s.name.as_str(), policy.sorts_of(model, &s.name).iter().map(|x| x.to_string()).collect()))
        .collect();
    serde_json::json!({
        "policy": policy.mode,
        "bitwidth": policy.bitwidth,
        "sorts": sorts,
        "sigToSort": sig_to_sort,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;
    use crate::frontend::query::{select_command, Selector};
    use std::sync::Arc;

    fn query(src: &str) -> Query {
        select_command(&Arc::new(load(src).unwrap()), &Selector::Index(0)).unwrap()
    }

    fn s(n: &str) -> Sort {
        Sort::named(n)
    }

    #[test]
    fn join_rule() {
        let a = Resolvant::single(vec![s("S1"), s("S2")]);
        let b = Resolvant { arity: 2, tuples: [vec![s("S2"), s("S3")], vec![s("S4"), s("S3")]].into() };
        assert_eq!(a.join(&b), Resolvant::single(vec![s("S1"), s("S3")]));
    }

    #[test]
    fn definiteness() {
        assert!(Resolvant::single(vec![s("S1"), s("S2")]).is_definite());
        assert!(!Resolvant::unary([s("S1"), s("S2")]).is_definite());
        assert!(!Resolvant::empty(1).is_definite());
    }

    #[test]
    fn field_bound_merges() {
        let q = query("sig S { f: A + B } sig A, B, C {} run {} for 3 but 2 B");
        let p = compute_partition(&q).unwrap();
        assert_eq!(p.sig_to_sort["A"], p.sig_to_sort["B"]);
        assert_ne!(p.sig_to_sort["S"], p.sig_to_sort["A"]);
        assert_ne!(p.sig_to_sort["C"], p.sig_to_sort["A"]);
        assert_eq!(p.size(&p.sig_to_sort["A"]), 5);
    }

    #[test]
    fn in_needs_no_merge() {
        let q = query("sig A, B {} run { A in A + B }");
        let p = compute_partition(&q).unwrap();
        assert_ne!(p.sig_to_sort["A"], p.sig_to_sort["B"]);
    }

    #[test]
    fn int_mixing() {
        let q = query("sig A { f: B + Int } sig B {} run {}");
        assert!(matches!(compute_partition(&q), Err(Error::IndefiniteSort { .. })));
    }

    #[test]
    fn zero_scope_bumped() {
        let q = query("sig A {} sig B {} run {} for 3 but 0 B");
        let p = compute_partition(&q).unwrap();
        assert_eq!(p.size(&p.sig_to_sort["B"]), 1);
        assert_eq!(p.size(&Sort::Int), 16);
    }

    #[test]
    fn closure_operand_merges() {
        let q = query("sig A { r: set B } sig B { s: set A } run { some ^(r + s) }");
        let p = compute_partition(&q).unwrap();
        assert_eq!(p.sig_to_sort["A"], p.sig_to_sort["B"]);
    }

    #[test]
    fn iden_includes_int() {
        let q = query("sig S1 {} sig S2 {} run {}");
        let p = compute_partition(&q).unwrap();
        let e = Expr::new(EK::Iden, 2, crate::span::Span::default());
        let r = resolvant(&q.model, &p, &SortContext::default(), &e);
        assert_eq!(r.tuples.len(), 3);
        assert!(r.tuples.contains(&vec![Sort::Int, Sort::Int]));
    }
}
