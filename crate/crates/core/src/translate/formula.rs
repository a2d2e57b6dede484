//! Formulas, quantifiers, multiplicities and integer expressions.

use super::*;

/// One choice of sorts for a list of binders.
struct Inst {
    binders: Vec<Binder>,
    terms: Vec<TS>,
    guard: Term,
    ctx: Ctx,
}

/// A relation seen through fixed leading and trailing columns of an expression.
#[derive(Clone)]
struct View<'e> {
    base: &'e Expr,
    prefix: Vec<TS>,
    suffix: Vec<TS>,
}

impl<'e> View<'e> {
    fn of(e: &'e Expr) -> Self {
        View { base: e, prefix: vec![], suffix: vec![] }
    }

    fn arity(&self) -> usize {
        self.base.arity - self.prefix.len() - self.suffix.len()
    }
}

impl Translator<'_> {
    fn view_res(&self, v: &View, ctx: &Ctx) -> Resolvant {
        let r = self.res(v.base, ctx);
        let (p, s) = (v.prefix.len(), v.suffix.len());
        let n = v.base.arity;
        let ps: Vec<Sort> = v.prefix.iter().map(|t| t.1.clone()).collect();
        let ss: Vec<Sort> = v.suffix.iter().map(|t| t.1.clone()).collect();
        Resolvant {
            arity: v.arity(),
            tuples: r
                .tuples
                .iter()
                .filter(|t| t[..p] == ps[..] && t[n - s..] == ss[..])
                .map(|t| t[p..n - s].to_vec())
                .collect(),
        }
    }

    fn view_member(&mut self, v: &View, ts: &[TS], ctx: &Ctx) -> Result<Term> {
        let mut all = v.prefix.clone();
        all.extend(ts.iter().cloned());
        all.extend(v.suffix.iter().cloned());
        self.member(&all, v.base, ctx)
    }

    fn fresh_tuple(&mut self, sorts: &[Sort], base: &str) -> (Vec<Binder>, Vec<TS>) {
        let mut bs = Vec::new();
        let mut ts = Vec::new();
        for s in sorts {
            let (n, t) = self.fresh_var(base, s);
            bs.push((n, s.clone()));
            ts.push((t, s.clone()));
        }
        (bs, ts)
    }

    fn tuple_eq(a: &[TS], b: &[TS]) -> Term {
        if a.iter().zip(b).any(|(x, y)| x.1 != y.1) {
            return FALSE;
        }
        Term::and(a.iter().zip(b).map(|(x, y)| Term::eq(x.0.clone(), y.0.clone())).collect::<Vec<_>>())
    }

    /// Instantiations of a binder list, one per combination of candidate sorts.
    fn instances(&mut self, ds: &[Decl], ctx: &Ctx) -> Result<Vec<Inst>> {
        let mut out = vec![Inst { binders: vec![], terms: vec![], guard: TRUE, ctx: ctx.clone() }];
        for d in ds {
            for (vi, v) in d.vars.iter().enumerate() {
                let mut next = Vec::new();
                for inst in out {
                    let r = self.res(&d.bound, &inst.ctx);
                    for t in self.candidates(&r) {
                        let s = t[0].clone();
                        let (n, x) = self.fresh_var(v, &s);
                        let ts = (x.clone(), s.clone());
                        let mut g = vec![inst.guard.clone(), self.member(&[ts.clone()], &d.bound, &inst.ctx)?];
                        if d.disj {
                            let k = inst.terms.len();
                            for prev in &inst.terms[k - vi..] {
                                if prev.1 == s {
                                    g.push(Term::not(Term::eq(prev.0.clone(), x.clone())));
                                }
                            }
                        }
                        let mut binders = inst.binders.clone();
                        binders.push((n, s.clone()));
                        let mut terms = inst.terms.clone();
                        terms.push(ts);
                        next.push(Inst { binders, terms, guard: Term::and(g), ctx: inst.ctx.with(v, x, s) });
                    }
                }
                out = next;
            }
        }
        Ok(out)
    }

    /// Uniqueness over instances: any two satisfying instances coincide.
    fn at_most_one(&mut self, a: &[(Vec<Binder>, Vec<TS>, Term)], b: &[(Vec<Binder>, Vec<TS>, Term)]) -> Term {
        let mut parts = Vec::new();
        for (ba, ta, fa) in a {
            for (bb, tb, fb) in b {
                let vs = [ba.clone(), bb.clone()].concat();
                parts.push(Term::forall(vs, Term::implies(Term::and([fa.clone(), fb.clone()]), Self::tuple_eq(ta, tb))));
            }
        }
        Term::and(parts)
    }

    fn exactly_one(&mut self, a: &[(Vec<Binder>, Vec<TS>, Term)], b: &[(Vec<Binder>, Vec<TS>, Term)]) -> Term {
        let mut alts = Vec::new();
        for (ba, ta, fa) in a {
            let mut uniq = vec![fa.clone()];
            for (bb, tb, fb) in b {
                uniq.push(Term::forall(bb.clone(), Term::implies(fb.clone(), Self::tuple_eq(ta, tb))));
            }
            alts.push(Term::exists(ba.clone(), Term::and(uniq)));
        }
        Term::or(alts)
    }

    fn quant(&mut self, q: Quant, ds: &[Decl], body: &Formula, ctx: &Ctx) -> Result<Term> {
        let mut cases = Vec::new();
        for inst in self.instances(ds, ctx)? {
            let b = self.formula(body, &inst.ctx)?;
            cases.push((inst.binders, inst.terms, inst.guard, b));
        }
        Ok(match q {
            Quant::All => Term::and(cases.into_iter().map(|(v, _, g, b)| Term::forall(v, Term::implies(g, b))).collect::<Vec<_>>()),
            Quant::Some => Term::or(cases.into_iter().map(|(v, _, g, b)| Term::exists(v, Term::and([g, b]))).collect::<Vec<_>>()),
            Quant::No => Term::and(
                cases.into_iter().map(|(v, _, g, b)| Term::forall(v, Term::implies(g, Term::not(b)))).collect::<Vec<_>>(),
            ),
            Quant::One | Quant::Lone => {
                let a: Vec<_> = cases.iter().map(|(v, t, g, b)| (v.clone(), t.clone(), Term::and([g.clone(), b.clone()]))).collect();
                // primed copies with fresh binder names
                let mut primed = Vec::new();
                for inst in self.instances(ds, ctx)? {
                    let b = self.formula(body, &inst.ctx)?;
                    primed.push((inst.binders, inst.terms, Term::and([inst.guard, b])));
                }
                if q == Quant::Lone {
                    self.at_most_one(&a, &primed)
                } else {
                    self.exactly_one(&a, &primed)
                }
            }
        })
    }

    fn view_cases(&mut self, v: &View, ctx: &Ctx) -> Result<Vec<(Vec<Binder>, Vec<TS>, Term)>> {
        let r = self.view_res(v, ctx);
        let mut out = Vec::new();
        for t in self.candidates(&r) {
            let (bs, ts) = self.fresh_tuple(&t, "m");
            let m = self.view_member(v, &ts, ctx)?;
            out.push((bs, ts, m));
        }
        Ok(out)
    }

    fn mult_view(&mut self, op: MultOp, v: &View, ctx: &Ctx) -> Result<Term> {
        if self.opts.scalar_opt && v.prefix.is_empty() && v.suffix.is_empty() {
            if let Some(c) = self.cast(v.base, ctx)? {
                if c.args.is_empty() {
                    self.log_cast(v.base, &c, "multiplicity");
                    return Ok(match op {
                        MultOp::Some | MultOp::One => c.guard,
                        MultOp::No => Term::not(c.guard),
                        MultOp::Lone => TRUE,
                    });
                }
            }
        }
        let some = |cases: &[(Vec<Binder>, Vec<TS>, Term)]| {
            Term::or(cases.iter().map(|(b, _, m)| Term::exists(b.clone(), m.clone())).collect::<Vec<_>>())
        };
        let cases = self.view_cases(v, ctx)?;
        Ok(match op {
            MultOp::Some => some(&cases),
            MultOp::No => Term::not(some(&cases)),
            MultOp::Lone | MultOp::One => {
                let primed = self.view_cases(v, ctx)?;
                if op == MultOp::Lone {
                    self.at_most_one(&cases, &primed)
                } else {
                    self.exactly_one(&cases, &primed)
                }
            }
        })
    }

    /// `v in e` with plain set semantics.
    fn subset(&mut self, v: &View, e: &Expr, ctx: &Ctx) -> Result<Term> {
        let mut parts = Vec::new();
        for (bs, ts, m) in self.view_cases(v, ctx)? {
            let r = self.member(&ts, e, ctx)?;
            parts.push(Term::forall(bs, Term::implies(m, r)));
        }
        Ok(Term::and(parts))
    }

    /// `v in a m->n b`: containment plus the multiplicity constraints of each side, recursively.
    fn decl_formula(&mut self, v: &View, e: &Expr, ctx: &Ctx) -> Result<Term> {
        let EK::Product(a, lm, rm, b) = &e.kind else { return self.subset(v, e, ctx) };
        let mut parts = vec![self.subset(v, e, ctx)?];
        let mult = |m: &Option<Mult>| match m {
            Some(Mult::One) => Some(MultOp::One),
            Some(Mult::Lone) => Some(MultOp::Lone),
            Some(Mult::Some) => Some(MultOp::Some),
            _ => None,
        };
        let (ra, rb) = (self.res(a, ctx), self.res(b, ctx));
        let (rn, ln) = (mult(rm), mult(lm));
        if rn.is_some() || has_mults(b) {
            for t in self.candidates(&ra) {
                let (bs, ts) = self.fresh_tuple(&t, "d");
                let inner = View { prefix: [v.prefix.clone(), ts.clone()].concat(), ..v.clone() };
                let guard = self.member(&ts, a, ctx)?;
                let mut cs = Vec::new();
                if let Some(op) = rn {
                    cs.push(self.mult_view(op, &inner, ctx)?);
                }
                if has_mults(b) {
                    cs.push(self.decl_formula(&inner, b, ctx)?);
                }
                parts.push(Term::forall(bs, Term::implies(guard, Term::and(cs))));
            }
        }
        if ln.is_some() || has_mults(a) {
            for t in self.candidates(&rb) {
                let (bs, ts) = self.fresh_tuple(&t, "r");
                let inner = View { suffix: [ts.clone(), v.suffix.clone()].concat(), ..v.clone() };
                let guard = self.member(&ts, b, ctx)?;
                let mut cs = Vec::new();
                if let Some(op) = ln {
                    cs.push(self.mult_view(op, &inner, ctx)?);
                }
                if has_mults(a) {
                    cs.push(self.decl_formula(&inner, a, ctx)?);
                }
                parts.push(Term::forall(bs, Term::implies(guard, Term::and(cs))));
            }
        }
        Ok(Term::and(parts))
    }

    fn in_formula(&mut self, a: &Expr, b: &Expr, ctx: &Ctx) -> Result<Term> {
        if has_mults(b) {
            return self.decl_formula(&View::of(a), b, ctx);
        }
        if self.opts.scalar_opt {
            if let Some(c) = self.cast(a, ctx)? {
                self.log_cast(a, &c, "in");
                let (g, v) = c.apply(&c.arg_terms());
                let mut tup = c.arg_ts();
                tup.push((v, c.sort.clone()));
                let m = self.member(&tup, b, ctx)?;
                return Ok(Term::forall(c.args.clone(), Term::implies(g, m)));
            }
        }
        self.subset(&View::of(a), b, ctx)
    }

    fn eq_formula(&mut self, a: &Expr, b: &Expr, ctx: &Ctx) -> Result<Term> {
        if self.opts.scalar_opt {
            if let (Some(ca), Some(cb)) = (self.cast_shape(a, ctx), self.cast_shape(b, ctx)) {
                if ca.0 == cb.0 {
                    let ca = self.cast(a, ctx)?.unwrap();
                    let cb = self.cast(b, ctx)?.unwrap();
                    self.log_cast(a, &ca, "eq");
                    self.log_cast(b, &cb, "eq");
                    let args = ca.arg_terms();
                    let (g1, v1) = ca.apply(&args);
                    let (g2, v2) = cb.apply(&args);
                    let both_empty = Term::and([Term::not(g1.clone()), Term::not(g2.clone())]);
                    let body = if ca.sort == cb.sort {
                        Term::or([Term::and([g1, g2, Term::eq(v1, v2)]), both_empty])
                    } else {
                        both_empty
                    };
                    return Ok(Term::forall(ca.args.clone(), body));
                }
            }
        }
        let r = self.res(a, ctx).union(&self.res(b, ctx));
        let mut parts = Vec::new();
        for t in self.candidates(&r) {
            let (bs, ts) = self.fresh_tuple(&t, "e");
            let x = self.member(&ts, a, ctx)?;
            let y = self.member(&ts, b, ctx)?;
            parts.push(Term::forall(bs, Term::iff(x, y)));
        }
        Ok(Term::and(parts))
    }

    pub fn formula(&mut self, f: &Formula, ctx: &Ctx) -> Result<Term> {
        Ok(match f {
            Formula::True => TRUE,
            Formula::False => FALSE,
            Formula::Not(a) => Term::not(self.formula(a, ctx)?),
            Formula::And(fs) => {
                let mut out = Vec::new();
                for g in fs {
                    out.push(self.formula(g, ctx)?);
                }
                Term::and(out)
            }
            Formula::Or(fs) => {
                let mut out = Vec::new();
                for g in fs {
                    out.push(self.formula(g, ctx)?);
                }
                Term::or(out)
            }
            Formula::Implies(a, b) => {
                let x = self.formula(a, ctx)?;
                Term::implies(x, self.formula(b, ctx)?)
            }
            Formula::Iff(a, b) => {
                let x = self.formula(a, ctx)?;
                Term::iff(x, self.formula(b, ctx)?)
            }
            Formula::Ite(c, a, b) => {
                let c = self.formula(c, ctx)?;
                let x = self.formula(a, ctx)?;
                Term::ite(c, x, self.formula(b, ctx)?)
            }
            Formula::In(a, b) => self.in_formula(a, b, ctx)?,
            Formula::Eq(a, b) => self.eq_formula(a, b, ctx)?,
            Formula::IntCmp(op, a, b) => {
                let x = self.int(a, ctx)?;
                let y = self.int(b, ctx)?;
                match op {
                    CmpOp::Eq => Term::eq(x, y),
                    CmpOp::Lt => Term::cmp(crate::ir::Cmp::Lt, x, y),
                    CmpOp::Le => Term::cmp(crate::ir::Cmp::Le, x, y),
                    CmpOp::Gt => Term::cmp(crate::ir::Cmp::Lt, y, x),
                    CmpOp::Ge => Term::cmp(crate::ir::Cmp::Le, y, x),
                }
            }
            Formula::Mult(op, e) => self.mult_view(*op, &View::of(e), ctx)?,
            Formula::Quant(q, ds, b) => self.quant(*q, ds, b, ctx)?,
            Formula::Call(p, args) => {
                let def = self.m.def(p).unwrap();
                let Body::Formula(body) = &def.body else { unreachable!("predicate call to a function") };
                let map = |v: &str| def.params.iter().position(|x| x.name == v).map(|i| args[i].clone());
                let body = body.subst(&map);
                let mut params = Vec::new();
                let (inner, extra) = self.call_frame(&body.free_vars(), ctx, &mut params);
                let b = self.formula(&body, &inner)?;
                let name = self.define(p, p, params, Ret::Bool, b);
                Term::app(&name, extra)
            }
        })
    }

    fn lit(&self, n: i64) -> Term {
        Term::Int(wrap(n, self.th.bitwidth))
    }

    /// Enumerates every element tuple of every candidate sort tuple of `e`.
    fn element_tuples(&self, e: &Expr, ctx: &Ctx) -> Vec<Vec<TS>> {
        let r = self.res(e, ctx);
        let mut out = Vec::new();
        for t in &r.tuples {
            let mut acc: Vec<Vec<TS>> = vec![vec![]];
            for s in t {
                let es = self.elements(s);
                acc = acc
                    .into_iter()
                    .flat_map(|p| es.iter().map(move |x| [p.clone(), vec![(x.clone(), s.clone())]].concat()))
                    .collect();
            }
            out.extend(acc);
        }
        out
    }

    fn sum_over(&mut self, ds: &[Decl], i: usize, j: usize, ctx: &Ctx, guard: Term, body: &IntExpr, out: &mut Vec<Term>) -> Result<()> {
        if i == ds.len() {
            let v = self.int(body, ctx)?;
            out.push(Term::ite(guard, v, Term::Int(0)));
            return Ok(());
        }
        let d = &ds[i];
        if j == d.vars.len() {
            return self.sum_over(ds, i + 1, 0, ctx, guard, body, out);
        }
        let r = self.res(&d.bound, ctx);
        for t in r.tuples.iter() {
            for x in self.elements(&t[0]) {
                let ts = (x.clone(), t[0].clone());
                if d.disj {
                    let clash = d.vars[..j].iter().any(|w| ctx.get(w).map(|(y, _)| *y == x).unwrap_or(false));
                    if clash {
                        continue;
                    }
                }
                let m = self.member(&[ts], &d.bound, ctx)?;
                let g = Term::and([guard.clone(), m]);
                if g.is_false() {
                    continue;
                }
                let c = ctx.with(&d.vars[j], x, t[0].clone());
                self.sum_over(ds, i, j + 1, &c, g, body, out)?;
            }
        }
        Ok(())
    }

    pub fn int(&mut self, ie: &IntExpr, ctx: &Ctx) -> Result<Term> {
        Ok(match ie {
            IntExpr::Lit(n) => self.lit(*n),
            IntExpr::Card(e) => {
                if self.opts.scalar_opt {
                    if let Some(c) = self.cast(e, ctx)? {
                        if c.args.is_empty() {
                            self.log_cast(e, &c, "cardinality");
                            return Ok(Term::ite(c.guard, Term::Int(1), Term::Int(0)));
                        }
                    }
                }
                let mut terms = Vec::new();
                for ts in self.element_tuples(e, ctx) {
                    let m = self.member(&ts, e, ctx)?;
                    terms.push(Term::ite(m, Term::Int(1), Term::Int(0)));
                }
                Term::sum(terms)
            }
            IntExpr::Bin(op, a, b) => {
                let x = self.int(a, ctx)?;
                let y = self.int(b, ctx)?;
                let op = match op {
                    crate::frontend::ast::IntOp::Add => crate::ir::IntOp::Add,
                    crate::frontend::ast::IntOp::Sub => crate::ir::IntOp::Sub,
                    crate::frontend::ast::IntOp::Mul => crate::ir::IntOp::Mul,
                    crate::frontend::ast::IntOp::Div => crate::ir::IntOp::Div,
                    crate::frontend::ast::IntOp::Rem => crate::ir::IntOp::Rem,
                };
                Term::int_bin(op, x, y)
            }
            IntExpr::Neg(a) => {
                let x = self.int(a, ctx)?;
                Term::int_bin(crate::ir::IntOp::Sub, Term::Int(0), x)
            }
            IntExpr::FromRel(e) => {
                if self.opts.scalar_opt {
                    if let Some(c) = self.cast(e, ctx)? {
                        if c.args.is_empty() && c.sort == Sort::Int {
                            self.log_cast(e, &c, "int");
                            return Ok(Term::ite(c.guard, c.value, Term::Int(0)));
                        }
                    }
                }
                if !self.res(e, ctx).tuples.contains(&vec![Sort::Int]) {
                    return Ok(Term::Int(0));
                }
                let mut terms = Vec::new();
                for x in self.elements(&Sort::Int) {
                    let m = self.member(&[(x.clone(), Sort::Int)], e, ctx)?;
                    terms.push(Term::ite(m, x, Term::Int(0)));
                }
                Term::sum(terms)
            }
            IntExpr::Sum(ds, body) => {
                let mut out = Vec::new();
                self.sum_over(ds, 0, 0, ctx, TRUE, body, &mut out)?;
                Term::sum(out)
            }
            IntExpr::Ite(c, a, b) => {
                let c = self.formula(c, ctx)?;
                let x = self.int(a, ctx)?;
                Term::ite(c, x, self.int(b, ctx)?)
            }
            IntExpr::Call(f, args) => {
                let def = self.m.def(f).unwrap();
                let Body::Int(body) = &def.body else { unreachable!("integer call to a non-integer function") };
                let map = |v: &str| def.params.iter().position(|x| x.name == v).map(|i| args[i].clone());
                let body = body.subst(&map);
                let mut params = Vec::new();
                let (inner, extra) = self.call_frame(&body.free_vars(), ctx, &mut params);
                let b = self.int(&body, &inner)?;
                let name = self.define(f, f, params, Ret::Sort(Sort::Int), b);
                Term::app(&name, extra)
            }
        })
    }
}
