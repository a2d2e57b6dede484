//! Translation of a query into a many-sorted first-order theory.

mod formula;
mod member;

use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::frontend::query::Query;
use crate::ir::*;
use crate::scalar::{Cast, CastLog};
use crate::sorts::{self, make_policy, PolicyMode, Resolvant, SortContext, SortPolicy};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeStyle {
    Cardinality,
    #[default]
    Constants,
}

impl std::str::FromStr for ScopeStyle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cardinality" => Ok(ScopeStyle::Cardinality),
            "constants" => Ok(ScopeStyle::Constants),
            _ => Err(format!("unknown scope axiom style `{s}` (expected cardinality or constants)")),
        }
    }
}

/// Deliberate translation faults used to check that differential testing notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectedBug {
    /// Drops the disjointness axioms between sibling and top-level signatures.
    NoDisjointness,
    /// Translates `e1 - e2` as `e1`.
    DiffIgnoresRight,
}

impl std::str::FromStr for InjectedBug {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "no-disjointness" => Ok(InjectedBug::NoDisjointness),
            "diff-ignores-right" => Ok(InjectedBug::DiffIgnoresRight),
            _ => Err(format!("unknown injected bug `{s}`")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransOptions {
    pub scalar_opt: bool,
    pub scope_axioms: ScopeStyle,
    pub policy: PolicyMode,
    pub short_circuit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_bug: Option<InjectedBug>,
}

impl Default for TransOptions {
    fn default() -> Self {
        TransOptions {
            scalar_opt: true,
            scope_axioms: ScopeStyle::Constants,
            policy: PolicyMode::Default,
            short_circuit: true,
            inject_bug: None,
        }
    }
}

impl TransOptions {
    /// All eight combinations of sort policy, scalar optimisation and scope-axiom style.
    pub fn configurations() -> Vec<(String, TransOptions)> {
        let mut out = Vec::new();
        for policy in [PolicyMode::Default, PolicyMode::Partition] {
            for scalar_opt in [false, true] {
                for scope_axioms in [ScopeStyle::Cardinality, ScopeStyle::Constants] {
                    let name = format!(
                        "{}/{}/{}",
                        if policy == PolicyMode::Default { "default" } else { "partition" },
                        if scalar_opt { "scalar" } else { "noscalar" },
                        if scope_axioms == ScopeStyle::Cardinality { "cardinality" } else { "constants" },
                    );
                    out.push((name, TransOptions { scalar_opt, scope_axioms, policy, ..TransOptions::default() }));
                }
            }
        }
        out
    }
}

/// Result of translation: the theory plus the policy and cast sites used to build it.
#[derive(Clone, Debug)]
pub struct Translation {
    pub theory: Theory,
    pub policy: SortPolicy,
    pub casts: Vec<CastLog>,
}

#[derive(Clone, Debug)]
pub(crate) enum SigRepr {
    Pred(Sym),
    /// Every element of the sort belongs to the signature.
    Elided,
    Const(Term),
}

#[derive(Clone, Debug)]
pub(crate) enum FieldRepr {
    Pred { sym: Sym, sorts: Vec<Sort> },
    /// `args` includes the owner; `guard` is a template over `params`.
    Func { sym: Sym, args: Vec<Sort>, ret: Sort, params: Vec<Sym>, guard: Term },
}

#[derive(Clone, Debug)]
pub(crate) struct OrdInfo {
    pub sort: Sym,
    pub elems: Vec<u32>,
    pub next: Option<Sym>,
    pub prev: Option<Sym>,
}

/// Alloy variables bound to sorted IR terms.
#[derive(Clone, Debug, Default)]
pub(crate) struct Ctx {
    vars: Vec<(String, Term, Sort)>,
}

impl Ctx {
    pub fn with(&self, v: &str, t: Term, s: Sort) -> Ctx {
        let mut c = self.clone();
        c.vars.push((v.to_string(), t, s));
        c
    }

    pub fn get(&self, v: &str) -> Option<(&Term, &Sort)> {
        self.vars.iter().rev().find(|(n, _, _)| n == v).map(|(_, t, s)| (t, s))
    }

    pub fn sort_ctx(&self) -> SortContext {
        SortContext { bindings: self.vars.iter().map(|(n, _, s)| (n.clone(), Resolvant::single(vec![s.clone()]))).collect() }
    }
}

pub(crate) type TS = (Term, Sort);

pub(crate) struct Translator<'a> {
    pub q: &'a Query,
    pub m: &'a Model,
    pub pol: SortPolicy,
    pub opts: TransOptions,
    pub th: Theory,
    pub sigs: BTreeMap<String, SigRepr>,
    pub fields: BTreeMap<String, FieldRepr>,
    pub ords: BTreeMap<String, OrdInfo>,
    /// (callee, definition) pairs for call and closure reuse.
    pub def_cache: Vec<(String, Sym)>,
    pub counter: usize,
    pub casts: Vec<CastLog>,
}

/// Translates a query under the given options.
pub fn translate_query(q: &Query, opts: &TransOptions) -> Result<Translation> {
    let pol = make_policy(q, opts.policy)?;
    translate_with_policy(q, opts, pol)
}

pub fn translate_with_policy(q: &Query, opts: &TransOptions, pol: SortPolicy) -> Result<Translation> {
    let th = Theory { sorts: pol.sort_sizes.clone(), bitwidth: q.bitwidth, ..Default::default() };
    let mut t = Translator {
        q,
        m: &q.model,
        pol,
        opts: opts.clone(),
        th,
        sigs: BTreeMap::new(),
        fields: BTreeMap::new(),
        ords: BTreeMap::new(),
        def_cache: Vec::new(),
        counter: 0,
        casts: Vec::new(),
    };
    t.run()?;
    Ok(Translation { theory: t.th, policy: t.pol, casts: t.casts })
}

fn span_of_sig(m: &Model, s: &str) -> crate::span::Span {
    m.sig(s).map(|s| s.span).unwrap_or_default()
}

impl<'a> Translator<'a> {
    fn run(&mut self) -> Result<()> {
        self.assign_sigs()?;
        self.declare_fields()?;
        self.sig_axioms()?;
        self.field_axioms()?;
        self.scope_axioms()?;
        let goal = self.formula(&self.q.goal.clone(), &Ctx::default())?;
        self.th.axioms.push(goal);
        self.extraction()?;
        Ok(())
    }

    pub fn fresh(&mut self, base: &str) -> Sym {
        self.counter += 1;
        sym(&format!("{base}${}", self.counter))
    }

    pub fn fresh_var(&mut self, base: &str, s: &Sort) -> (Sym, Term) {
        let n = self.fresh(base);
        let t = Term::var(&n, s);
        (n, t)
    }

    pub fn res(&self, e: &Expr, ctx: &Ctx) -> Resolvant {
        sorts::resolvant(self.m, &self.pol, &ctx.sort_ctx(), e)
    }

    /// Candidate sort tuples for quantification, widened to every tuple when short-circuiting is off.
    pub fn candidates(&self, r: &Resolvant) -> Vec<Vec<Sort>> {
        if !r.is_empty() || self.opts.short_circuit {
            return r.tuples.iter().cloned().collect();
        }
        let all = self.pol.all_sorts();
        let mut out: Vec<Vec<Sort>> = vec![vec![]];
        for _ in 0..r.arity {
            out = out.into_iter().flat_map(|t| all.iter().map(move |s| [t.clone(), vec![s.clone()]].concat())).collect();
        }
        out
    }

    pub fn elements(&self, s: &Sort) -> Vec<Term> {
        self.th.elements(s)
    }

    pub fn sig_sort(&self, sig: &str) -> Result<Sort> {
        self.pol.sort_of(self.m, sig).ok_or_else(|| Error::IndefiniteSort {
            span: span_of_sig(self.m, sig),
            message: format!("signature `{sig}` spans several sorts"),
            merge: vec![self.m.tops_of(sig).into_iter().collect()],
        })
    }

    /// Membership of a sorted term in a signature.
    pub fn sig_member(&self, sig: &str, t: &TS) -> Term {
        if !self.pol.sorts_of(self.m, sig).contains(&t.1) {
            return FALSE;
        }
        match &self.sigs[sig] {
            SigRepr::Pred(p) => Term::app(p, vec![t.0.clone()]),
            SigRepr::Elided => TRUE,
            SigRepr::Const(c) => Term::eq(t.0.clone(), c.clone()),
        }
    }

    /// Membership in `univ`: some top-level signature of the term's sort.
    pub fn univ(&self, t: &TS) -> Term {
        match &t.1 {
            Sort::Int => TRUE,
            s => Term::or(self.pol.tops_in(self.m, s).iter().map(|top| self.sig_member(&top.name, t)).collect::<Vec<_>>()),
        }
    }

    fn one_sig_eligible(&self, s: &Sig) -> bool {
        let m = self.m;
        let ordered_desc = |name: &str| {
            let mut stack = vec![name.to_string()];
            while let Some(n) = stack.pop() {
                for c in m.children(&n) {
                    if c.ordered {
                        return true;
                    }
                    stack.push(c.name.clone());
                }
            }
            false
        };
        self.opts.scalar_opt
            && s.mult == Some(Mult::One)
            && !matches!(s.parent, Parent::In(_))
            && !s.ordered
            && !m.ancestors(&s.name).iter().any(|a| {
                let a = m.sig(a).unwrap();
                a.ordered || a.mult == Some(Mult::One)
            })
            && !ordered_desc(&s.name)
    }

    /// Chooses a representation per signature, allocates ordering and one-sig elements
    /// and declares membership predicates.
    fn assign_sigs(&mut self) -> Result<()> {
        let m = self.m;
        let mut order: Vec<&Sig> = Vec::new();
        fn dfs<'m>(m: &'m Model, s: &'m Sig, out: &mut Vec<&'m Sig>) {
            out.push(s);
            for c in m.children(&s.name) {
                dfs(m, c, out);
            }
        }
        for t in m.top_level() {
            dfs(m, t, &mut order);
        }
        let mut next_free: BTreeMap<Sym, u32> = BTreeMap::new();
        let mut overflow = false;
        for s in &order {
            let want = if s.ordered {
                self.q.scope(&s.name).size
            } else if self.one_sig_eligible(s) {
                1
            } else {
                continue;
            };
            let Sort::U(sort) = self.sig_sort(&s.name)? else { unreachable!() };
            let size = self.pol.size(&Sort::U(sort.clone())) as u32;
            let start = *next_free.get(&sort).unwrap_or(&1);
            if start + want - 1 > size {
                overflow = true;
                continue;
            }
            next_free.insert(sort.clone(), start + want);
            let elems: Vec<u32> = (start..start + want).collect();
            if s.ordered {
                self.ords.insert(s.name.clone(), OrdInfo { sort, elems, next: None, prev: None });
            } else {
                self.sigs.insert(s.name.clone(), SigRepr::Const(Term::Elem(sort, start)));
            }
        }
        if overflow {
            self.th.axioms.push(FALSE);
        }
        for s in &m.sigs {
            if self.sigs.contains_key(&s.name) {
                continue;
            }
            let sort = self.sig_sort(&s.name)?;
            let sc = self.q.scope(&s.name);
            let repr = if s.parent == Parent::Top && sc.exact && sc.size as u64 == self.pol.size(&sort) {
                SigRepr::Elided
            } else {
                let p = sym(&format!("in${}", s.name));
                self.th.funcs.push(FuncDecl { name: p.clone(), args: vec![sort], ret: Ret::Bool });
                SigRepr::Pred(p)
            };
            self.sigs.insert(s.name.clone(), repr);
        }
        let ords: Vec<(String, OrdInfo)> = self.ords.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        for (sig, info) in ords {
            let sort = Sort::U(info.sort.clone());
            for &i in &info.elems {
                let ax = self.sig_member(&sig, &(Term::Elem(info.sort.clone(), i), sort.clone()));
                self.th.axioms.push(ax);
            }
        }
        Ok(())
    }

    /// Flattened right-nested arrow chain: operands and whether only the final arrow carries a
    /// function-like multiplicity.
    fn function_shape(f: &Field) -> Option<(Vec<&Expr>, &Expr, bool)> {
        if f.bound.arity == 1 {
            return match f.mult {
                Mult::One => Some((vec![], &f.bound, true)),
                Mult::Lone => Some((vec![], &f.bound, false)),
                _ => None,
            };
        }
        let mut dom = Vec::new();
        let mut cur = &f.bound;
        loop {
            let EK::Product(a, lm, rm, b) = &cur.kind else { return None };
            if matches!(lm, Some(m) if *m != Mult::Set) || has_mults(a) {
                return None;
            }
            dom.push(&**a);
            match rm {
                None | Some(Mult::Set) => cur = b,
                Some(Mult::One) | Some(Mult::Lone) if b.arity == 1 && !has_mults(b) => {
                    return Some((dom, &**b, *rm == Some(Mult::One)));
                }
                _ => return None,
            }
        }
    }

    fn declare_fields(&mut self) -> Result<()> {
        let m = self.m;
        for f in &m.fields {
            let r = sorts::field_resolvant(m, &self.pol, f);
            let Some(sorts) = r.definite().cloned() else {
                for i in 0..r.arity {
                    let col = r.column(i);
                    if col.len() > 1 && col.contains(&Sort::Int) {
                        let e = Expr::new(EK::Field(f.name.clone()), f.arity(), f.span);
                        return Err(sorts::int_mix_error(m, &self.pol, &e, &format!("field `{}`", f.name)));
                    }
                }
                let merge = r
                    .tuples
                    .iter()
                    .flatten()
                    .filter_map(|s| match s {
                        Sort::U(_) => Some(self.pol.tops_in(m, s).iter().map(|t| t.name.clone()).collect::<Vec<_>>()),
                        Sort::Int => None,
                    })
                    .collect();
                return Err(Error::IndefiniteSort {
                    span: f.span,
                    message: format!("field `{}` has no single sort under the {:?} policy", f.name, self.pol.mode),
                    merge,
                });
            };
            let shape = if self.opts.scalar_opt { Self::function_shape(f) } else { None };
            let fsym = sym(&f.name);
            match shape {
                Some((dom, range, total)) => {
                    let args: Vec<Sort> = sorts[..sorts.len() - 1].to_vec();
                    let ret = sorts.last().unwrap().clone();
                    self.th.funcs.push(FuncDecl { name: fsym.clone(), args: args.clone(), ret: Ret::Sort(ret.clone()) });
                    let params: Vec<Sym> = args.iter().map(|_| self.fresh("a")).collect();
                    let pts: Vec<TS> = params.iter().zip(&args).map(|(p, s)| (Term::var(p, s), s.clone())).collect();
                    let ctx = Ctx::default().with("this", pts[0].0.clone(), pts[0].1.clone());
                    let mut dom_terms = vec![self.sig_member(&f.owner, &pts[0])];
                    let mut k = 1;
                    for d in &dom {
                        dom_terms.push(self.member(&pts[k..k + d.arity], d, &ctx)?);
                        k += d.arity;
                    }
                    let in_dom = Term::and(dom_terms);
                    let binders: Vec<Binder> = params.iter().cloned().zip(args.iter().cloned()).collect();
                    let guard = if total {
                        in_dom
                    } else {
                        let dp = sym(&format!("dom${}", f.name));
                        self.th.funcs.push(FuncDecl { name: dp.clone(), args: args.clone(), ret: Ret::Bool });
                        let g = Term::app(&dp, pts.iter().map(|p| p.0.clone()).collect());
                        self.th.axioms.push(Term::forall(binders.clone(), Term::implies(g.clone(), in_dom)));
                        g
                    };
                    let val = (Term::app(&fsym, pts.iter().map(|p| p.0.clone()).collect()), ret.clone());
                    let in_range = self.member(&[val], range, &ctx)?;
                    self.th.axioms.push(Term::forall(binders, Term::implies(guard.clone(), in_range)));
                    self.fields.insert(f.name.clone(), FieldRepr::Func { sym: fsym, args, ret, params, guard });
                }
                None => {
                    self.th.funcs.push(FuncDecl { name: fsym.clone(), args: sorts.clone(), ret: Ret::Bool });
                    self.fields.insert(f.name.clone(), FieldRepr::Pred { sym: fsym, sorts });
                }
            }
        }
        Ok(())
    }

    fn disjoint(&mut self, a: &str, b: &str) -> Result<()> {
        let (sa, sb) = (self.pol.sorts_of(self.m, a), self.pol.sorts_of(self.m, b));
        for s in sa.intersection(&sb) {
            let (x, xt) = self.fresh_var("x", s);
            let ts = (xt, s.clone());
            let body = Term::not(Term::and([self.sig_member(a, &ts), self.sig_member(b, &ts)]));
            self.th.axioms.push(Term::forall(vec![(x, s.clone())], body));
        }
        Ok(())
    }

    fn sig_axioms(&mut self) -> Result<()> {
        let m = self.m;
        let sig_expr = |n: &str| Expr::new(EK::Sig(n.to_string()), 1, span_of_sig(m, n));
        let union = |names: &[String]| {
            names.iter().skip(1).fold(sig_expr(&names[0]), |acc, n| Expr::union(acc, sig_expr(n)))
        };
        let ctx = Ctx::default();
        let inject_no_disj = self.opts.inject_bug == Some(InjectedBug::NoDisjointness);
        for s in &m.sigs {
            match &s.parent {
                Parent::Top => {}
                Parent::Extends(p) => {
                    let ax = self.formula(&Formula::In(sig_expr(&s.name), sig_expr(p)), &ctx)?;
                    self.th.axioms.push(ax);
                }
                Parent::In(ps) => {
                    let ax = self.formula(&Formula::In(sig_expr(&s.name), union(ps)), &ctx)?;
                    self.th.axioms.push(ax);
                }
            }
            let kids: Vec<String> = m.children(&s.name).map(|c| c.name.clone()).collect();
            if s.is_abstract && !kids.is_empty() {
                let ax = self.formula(&Formula::Eq(union(&kids), sig_expr(&s.name)), &ctx)?;
                self.th.axioms.push(ax);
            }
            if !inject_no_disj {
                for i in 0..kids.len() {
                    for j in i + 1..kids.len() {
                        self.disjoint(&kids[i], &kids[j])?;
                    }
                }
            }
            if let Some(mu) = s.mult {
                let op = match mu {
                    Mult::One => Some(MultOp::One),
                    Mult::Lone => Some(MultOp::Lone),
                    Mult::Some => Some(MultOp::Some),
                    Mult::Set => None,
                };
                if let (Some(op), false) = (op, matches!(self.sigs[&s.name], SigRepr::Const(_))) {
                    let ax = self.formula(&Formula::Mult(op, sig_expr(&s.name)), &ctx)?;
                    self.th.axioms.push(ax);
                }
            }
        }
        if !inject_no_disj {
            let tops: Vec<String> = m.top_level().map(|s| s.name.clone()).collect();
            for i in 0..tops.len() {
                for j in i + 1..tops.len() {
                    self.disjoint(&tops[i], &tops[j])?;
                }
            }
        }
        Ok(())
    }

    fn field_axioms(&mut self) -> Result<()> {
        let m = self.m;
        for f in &m.fields {
            let sp = f.span;
            let this = Expr::var("this", sp);
            let fe = Expr::new(EK::Field(f.name.clone()), f.arity(), sp);
            let xf = Expr::join(this, fe);
            let mut body = vec![];
            if f.bound.arity == 1 {
                let op = match f.mult {
                    Mult::One => Some(MultOp::One),
                    Mult::Lone => Some(MultOp::Lone),
                    Mult::Some => Some(MultOp::Some),
                    Mult::Set => None,
                };
                if let Some(op) = op {
                    body.push(Formula::Mult(op, xf.clone()));
                }
            }
            body.push(Formula::In(xf, f.bound.clone()));
            let decl = Decl {
                vars: vec!["this".into()],
                disj: false,
                bound: Expr::new(EK::Sig(f.owner.clone()), 1, sp),
                span: sp,
            };
            let ax = self.formula(&Formula::Quant(Quant::All, vec![decl], Box::new(Formula::and(body))), &Ctx::default())?;
            self.th.axioms.push(ax);
            if let FieldRepr::Pred { sym: p, sorts } = self.fields[&f.name].clone() {
                let vs: Vec<(Sym, Term)> = sorts.iter().map(|s| self.fresh_var("x", s)).collect();
                let binders: Vec<Binder> = vs.iter().zip(&sorts).map(|((n, _), s)| (n.clone(), s.clone())).collect();
                let app = Term::app(&p, vs.iter().map(|(_, t)| t.clone()).collect());
                let owner = self.sig_member(&f.owner, &(vs[0].1.clone(), sorts[0].clone()));
                self.th.axioms.push(Term::forall(binders, Term::implies(app, owner)));
            }
        }
        Ok(())
    }

    fn tuples_of(&self, sorts: &[Sort]) -> Vec<Vec<Term>> {
        let mut out: Vec<Vec<Term>> = vec![vec![]];
        for s in sorts {
            let es = self.elements(s);
            out = out.into_iter().flat_map(|t| es.iter().map(move |e| [t.clone(), vec![e.clone()]].concat())).collect();
        }
        out
    }

    fn extraction(&mut self) -> Result<()> {
        let m = self.m;
        let val = |t: &Term| match t {
            Term::Elem(s, i) => Val::U(s.clone(), *i),
            Term::Int(n) => Val::I(*n),
            _ => unreachable!(),
        };
        let mut ex = Extraction::default();
        for s in &m.sigs {
            let sort = self.sig_sort(&s.name)?;
            let rows = self
                .elements(&sort)
                .into_iter()
                .map(|e| (val(&e), self.sig_member(&s.name, &(e.clone(), sort.clone()))))
                .collect();
            ex.sigs.push((s.name.clone(), rows));
        }
        for f in &m.fields {
            let rows = match self.fields[&f.name].clone() {
                FieldRepr::Pred { sym: p, sorts } => FieldRows::Pred(
                    self.tuples_of(&sorts)
                        .into_iter()
                        .map(|t| (t.iter().map(val).collect(), Term::app(&p, t)))
                        .collect(),
                ),
                FieldRepr::Func { sym: p, args, params, guard, .. } => FieldRows::Func(
                    self.tuples_of(&args)
                        .into_iter()
                        .map(|t| {
                            let pairs: Vec<(Sym, Term)> = params.iter().cloned().zip(t.iter().cloned()).collect();
                            (t.iter().map(val).collect(), guard.subst_vars(&pairs), Term::app(&p, t))
                        })
                        .collect(),
                ),
            };
            ex.fields.push((f.name.clone(), rows));
        }
        for (sig, info) in &self.ords {
            ex.orderings.push((sig.clone(), info.elems.iter().map(|i| Val::U(info.sort.clone(), *i)).collect()));
        }
        self.th.extraction = ex;
        Ok(())
    }

    pub fn log_cast(&mut self, e: &Expr, c: &Cast, site: &str) {
        self.casts.push(CastLog {
            site: site.to_string(),
            expr: e.to_string(),
            line: e.span.line,
            col: e.span.col,
            args: c.args.iter().map(|(_, s)| s.to_string()).collect(),
            sort: c.sort.to_string(),
            value: c.value.to_string(),
            guard: c.guard.to_string(),
        });
    }
}

/// True when an arrow expression carries a multiplicity other than `set` anywhere along its spine.
pub(crate) fn has_mults(e: &Expr) -> bool {
    match &e.kind {
        EK::Product(a, l, r, b) => {
            matches!(l, Some(m) if *m != Mult::Set) || matches!(r, Some(m) if *m != Mult::Set) || has_mults(a) || has_mults(b)
        }
        _ => false,
    }
}
