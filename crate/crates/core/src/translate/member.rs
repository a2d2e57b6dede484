//! Tuple membership in relational expressions.

use super::*;

fn sorts(ts: &[TS]) -> Vec<Sort> {
    ts.iter().map(|t| t.1.clone()).collect()
}

impl Translator<'_> {
    /// The formula stating that `ts` is a tuple of `e`.
    pub fn member(&mut self, ts: &[TS], e: &Expr, ctx: &Ctx) -> Result<Term> {
        debug_assert_eq!(ts.len(), e.arity, "arity mismatch for {e}");
        if self.opts.scalar_opt {
            if let Some(c) = self.cast(e, ctx)? {
                self.log_cast(e, &c, "membership");
                return Ok(c.member(ts));
            }
        }
        let n = ts.len();
        Ok(match &e.kind {
            EK::Sig(s) => self.sig_member(s, &ts[0]),
            EK::Field(f) => self.field_member(f, ts),
            EK::Var(v) => match ctx.get(v) {
                Some((t, s)) if *s == ts[0].1 => Term::eq(ts[0].0.clone(), t.clone()),
                Some(_) => FALSE,
                None => return Err(Error::type_error(e.span, format!("unbound variable `{v}`"))),
            },
            EK::Univ => self.univ(&ts[0]),
            EK::Iden => {
                if ts[0].1 != ts[1].1 {
                    FALSE
                } else {
                    Term::and([Term::eq(ts[0].0.clone(), ts[1].0.clone()), self.univ(&ts[0])])
                }
            }
            EK::None => FALSE,
            EK::IntSig => Term::Bool(ts[0].1 == Sort::Int),
            EK::Ord(r, s) => self.ord_member(*r, s, ts),
            EK::Union(a, b) => {
                let x = self.member(ts, a, ctx)?;
                let y = self.member(ts, b, ctx)?;
                Term::or([x, y])
            }
            EK::Diff(a, b) => {
                let x = self.member(ts, a, ctx)?;
                if self.opts.inject_bug == Some(InjectedBug::DiffIgnoresRight) {
                    return Ok(x);
                }
                let y = self.member(ts, b, ctx)?;
                Term::and([x, Term::not(y)])
            }
            EK::Inter(a, b) => {
                let x = self.member(ts, a, ctx)?;
                let y = self.member(ts, b, ctx)?;
                Term::and([x, y])
            }
            EK::Override(a, b) => self.override_member(ts, a, b, ctx)?,
            EK::Join(a, b) => self.join_member(ts, a, b, ctx)?,
            EK::Product(a, _, _, b) => {
                let x = self.member(&ts[..a.arity], a, ctx)?;
                let y = self.member(&ts[a.arity..], b, ctx)?;
                Term::and([x, y])
            }
            EK::DomR(a, b) => {
                let x = self.member(&ts[..1], a, ctx)?;
                let y = self.member(ts, b, ctx)?;
                Term::and([x, y])
            }
            EK::RanR(a, b) => {
                let x = self.member(ts, a, ctx)?;
                let y = self.member(&ts[n - 1..], b, ctx)?;
                Term::and([x, y])
            }
            EK::Transpose(a) => self.member(&[ts[1].clone(), ts[0].clone()], a, ctx)?,
            EK::Closure(a) => self.closure_member(ts, a, false, ctx)?,
            EK::RClosure(a) => self.closure_member(ts, a, true, ctx)?,
            EK::Ite(c, a, b) => {
                let c = self.formula(c, ctx)?;
                let x = self.member(ts, a, ctx)?;
                let y = self.member(ts, b, ctx)?;
                Term::ite(c, x, y)
            }
            EK::Compr(ds, f) => {
                let mut c = ctx.clone();
                let mut parts = Vec::new();
                let mut k = 0;
                for d in ds {
                    let first = k;
                    for v in &d.vars {
                        parts.push(self.member(&ts[k..k + 1], &d.bound, &c)?);
                        c = c.with(v, ts[k].0.clone(), ts[k].1.clone());
                        k += 1;
                    }
                    if d.disj {
                        for i in first..k {
                            for j in i + 1..k {
                                if ts[i].1 == ts[j].1 {
                                    parts.push(Term::not(Term::eq(ts[i].0.clone(), ts[j].0.clone())));
                                }
                            }
                        }
                    }
                }
                parts.push(self.formula(f, &c)?);
                Term::and(parts)
            }
            EK::Call(f, args) => self.call_member(ts, f, args, e.span, ctx)?,
            EK::IntAtom(ie) => {
                if ts[0].1 != Sort::Int {
                    FALSE
                } else {
                    let v = self.int(ie, ctx)?;
                    Term::eq(ts[0].0.clone(), v)
                }
            }
        })
    }

    fn field_member(&self, f: &str, ts: &[TS]) -> Term {
        match &self.fields[f] {
            FieldRepr::Pred { sym, sorts: fs } => {
                if sorts(ts) != *fs {
                    return FALSE;
                }
                Term::app(sym, ts.iter().map(|t| t.0.clone()).collect())
            }
            FieldRepr::Func { sym, args, ret, params, guard } => {
                let n = args.len();
                if sorts(&ts[..n]) != *args || ts[n].1 != *ret {
                    return FALSE;
                }
                let pairs: Vec<(Sym, Term)> = params.iter().cloned().zip(ts[..n].iter().map(|t| t.0.clone())).collect();
                let val = Term::app(sym, ts[..n].iter().map(|t| t.0.clone()).collect());
                Term::and([guard.subst_vars(&pairs), Term::eq(ts[n].0.clone(), val)])
            }
        }
    }

    /// Lazily defined successor (or predecessor) function of an ordering.
    pub fn ord_fn(&mut self, sig: &str, next: bool) -> Option<(Sym, OrdInfo)> {
        let info = self.ords.get(sig)?.clone();
        if info.elems.len() < 2 {
            return None;
        }
        let have = if next { &info.next } else { &info.prev };
        if let Some(f) = have {
            return Some((f.clone(), info));
        }
        let name = sym(&format!("{}${sig}", if next { "next" } else { "prev" }));
        let sort = Sort::U(info.sort.clone());
        let x = self.fresh("x");
        let xt = Term::var(&x, &sort);
        let el = |i: u32| Term::Elem(info.sort.clone(), i);
        let k = info.elems.len();
        // next: a1 -> a2, ..., a_{k-2} -> a_{k-1}, else a_k
        // prev: a_k -> a_{k-1}, ..., a_3 -> a_2, else a_1
        let (pairs, last): (Vec<(u32, u32)>, u32) = if next {
            ((0..k - 2).map(|i| (info.elems[i], info.elems[i + 1])).collect(), info.elems[k - 1])
        } else {
            ((2..k).rev().map(|i| (info.elems[i], info.elems[i - 1])).collect(), info.elems[0])
        };
        let body = pairs.iter().rev().fold(el(last), |acc, (a, b)| Term::ite(Term::eq(xt.clone(), el(*a)), el(*b), acc));
        self.th.defs.push(FuncDef { name: name.clone(), params: vec![(x, sort.clone())], ret: Ret::Sort(sort), body });
        let e = self.ords.get_mut(sig).unwrap();
        if next {
            e.next = Some(name.clone());
        } else {
            e.prev = Some(name.clone());
        }
        Some((name, self.ords[sig].clone()))
    }

    fn ord_member(&mut self, r: OrdRel, sig: &str, ts: &[TS]) -> Term {
        let Some(info) = self.ords.get(sig).cloned() else { return FALSE };
        let sort = Sort::U(info.sort.clone());
        if ts.iter().any(|t| t.1 != sort) || info.elems.is_empty() {
            return FALSE;
        }
        let el = |i: u32| Term::Elem(info.sort.clone(), i);
        let (first, last) = (el(info.elems[0]), el(*info.elems.last().unwrap()));
        match r {
            OrdRel::First => Term::eq(ts[0].0.clone(), first),
            OrdRel::Last => Term::eq(ts[0].0.clone(), last),
            OrdRel::Next | OrdRel::Prev => {
                let next = r == OrdRel::Next;
                let Some((f, _)) = self.ord_fn(sig, next) else { return FALSE };
                let end = if next { last } else { first };
                Term::and([
                    self.sig_member(sig, &ts[0]),
                    Term::not(Term::eq(ts[0].0.clone(), end)),
                    Term::eq(Term::app(&f, vec![ts[0].0.clone()]), ts[1].0.clone()),
                ])
            }
        }
    }

    fn override_member(&mut self, ts: &[TS], a: &Expr, b: &Expr, ctx: &Ctx) -> Result<Term> {
        let in_b = self.member(ts, b, ctx)?;
        let in_a = self.member(ts, a, ctx)?;
        if ts.len() == 1 {
            return Ok(Term::or([in_b, in_a]));
        }
        let rb = self.res(b, ctx);
        let mut witnesses = Vec::new();
        for t in self.candidates(&rb) {
            if t[0] != ts[0].1 {
                continue;
            }
            let vs: Vec<(Sym, Term)> = t[1..].iter().map(|s| self.fresh_var("o", s)).collect();
            let mut tup = vec![ts[0].clone()];
            tup.extend(vs.iter().zip(&t[1..]).map(|((_, v), s)| (v.clone(), s.clone())));
            let body = self.member(&tup, b, ctx)?;
            witnesses.push(Term::exists(vs.into_iter().map(|(n, _)| n).zip(t[1..].iter().cloned()).collect(), body));
        }
        Ok(Term::or([in_b, Term::and([in_a, Term::not(Term::or(witnesses))])]))
    }

    fn join_member(&mut self, ts: &[TS], a: &Expr, b: &Expr, ctx: &Ctx) -> Result<Term> {
        let na = a.arity;
        let (left, right) = ts.split_at(na - 1);
        if self.opts.scalar_opt {
            if let Some(c) = self.cast(a, ctx)? {
                self.log_cast(a, &c, "join-left");
                if sorts(left) != c.arg_sorts() {
                    return Ok(FALSE);
                }
                let (g, v) = c.apply(&left.iter().map(|t| t.0.clone()).collect::<Vec<_>>());
                let mut tup = vec![(v, c.sort.clone())];
                tup.extend(right.iter().cloned());
                let m = self.member(&tup, b, ctx)?;
                return Ok(Term::and([g, m]));
            }
            if b.arity == 1 {
                if let Some(c) = self.cast(b, ctx)? {
                    self.log_cast(b, &c, "join-right");
                    let (g, v) = c.apply(&[]);
                    let mut tup = left.to_vec();
                    tup.push((v, c.sort.clone()));
                    let m = self.member(&tup, a, ctx)?;
                    return Ok(Term::and([g, m]));
                }
            }
        }
        let (ra, rb) = (self.res(a, ctx), self.res(b, ctx));
        let ls = sorts(left);
        let rs = sorts(right);
        let from_a: BTreeSet<Sort> =
            ra.tuples.iter().filter(|t| t[..na - 1] == ls[..]).map(|t| t[na - 1].clone()).collect();
        let from_b: BTreeSet<Sort> = rb.tuples.iter().filter(|t| t[1..] == rs[..]).map(|t| t[0].clone()).collect();
        let mut mids: Vec<Sort> = from_a.intersection(&from_b).cloned().collect();
        if mids.is_empty() && !self.opts.short_circuit {
            mids = self.pol.all_sorts();
        }
        let mut out = Vec::new();
        for s in mids {
            let (z, zt) = self.fresh_var("j", &s);
            let mut l = left.to_vec();
            l.push((zt.clone(), s.clone()));
            let mut r = vec![(zt, s.clone())];
            r.extend(right.iter().cloned());
            let x = self.member(&l, a, ctx)?;
            let y = self.member(&r, b, ctx)?;
            out.push(Term::exists(vec![(z, s)], Term::and([x, y])));
        }
        Ok(Term::or(out))
    }

    /// The single sort of a closure operand, or an error when none exists.
    fn closure_sort(&self, a: &Expr, ctx: &Ctx) -> Result<Option<Sort>> {
        let r = self.res(a, ctx);
        let all: BTreeSet<Sort> = r.column(0).union(&r.column(1)).cloned().collect();
        if all.len() > 1 {
            if all.contains(&Sort::Int) {
                return Err(sorts::int_mix_error(self.m, &self.pol, a, "closure operand"));
            }
            let merge = vec![all.iter().flat_map(|s| self.pol.tops_in(self.m, s)).map(|t| t.name.clone()).collect()];
            return Err(Error::IndefiniteSort {
                span: a.span,
                message: "closure operand spans several sorts".into(),
                merge,
            });
        }
        Ok(all.into_iter().next())
    }

    fn closure_member(&mut self, ts: &[TS], a: &Expr, reflexive: bool, ctx: &Ctx) -> Result<Term> {
        let iden = |t: &Self| {
            if ts[0].1 == ts[1].1 {
                Term::and([Term::eq(ts[0].0.clone(), ts[1].0.clone()), t.univ(&ts[0])])
            } else {
                FALSE
            }
        };
        let sort = self.closure_sort(a, ctx)?;
        let Some(s) = sort.filter(|s| ts[0].1 == *s && ts[1].1 == *s) else {
            return Ok(if reflexive { iden(self) } else { FALSE });
        };
        if self.opts.scalar_opt {
            if let Some(c) = self.cast(a, ctx)? {
                if c.arg_sorts() == [s.clone()] && c.sort == s {
                    self.log_cast(a, &c, "closure");
                    let depth = self.pol.size(&s).max(1) as usize;
                    let x2 = ts[1].0.clone();
                    let mut cur = vec![ts[0].0.clone()];
                    // built inside out: level i holds e^i(x1)
                    let mut levels = Vec::new();
                    for _ in 0..depth {
                        let (g, v) = c.apply(&cur);
                        levels.push((g, v.clone()));
                        cur = vec![v];
                    }
                    let mut acc = FALSE;
                    for (g, v) in levels.into_iter().rev() {
                        acc = Term::and([g, Term::or([Term::eq(x2.clone(), v), acc])]);
                    }
                    return Ok(if reflexive { Term::or([iden(self), acc]) } else { acc });
                }
            }
        }
        let free = a.free_vars();
        let mut params: Vec<Binder> = Vec::new();
        let mut args = Vec::new();
        let (x, xt) = self.fresh_var("x", &s);
        let (y, yt) = self.fresh_var("y", &s);
        params.push((x, s.clone()));
        params.push((y, s.clone()));
        let mut inner = Ctx::default();
        for v in &free {
            let Some((t, vs)) = ctx.get(v) else { continue };
            let (p, pt) = self.fresh_var(v, vs);
            params.push((p, vs.clone()));
            args.push(t.clone());
            inner = inner.with(v, pt, vs.clone());
        }
        let body = self.member(&[(xt, s.clone()), (yt, s.clone())], a, &inner)?;
        let def = self.define("closure", "aux", params, Ret::Bool, body);
        let c = Term::Closure {
            reflexive,
            def,
            x: Box::new(ts[0].0.clone()),
            y: Box::new(ts[1].0.clone()),
            args,
        };
        Ok(if reflexive { Term::and([self.univ(&ts[0]), c]) } else { c })
    }

    /// Adds a definition, or reuses an alpha-equivalent one recorded under the same key.
    pub fn define(&mut self, key: &str, base: &str, params: Vec<Binder>, ret: Ret, body: Term) -> Sym {
        for (k, name) in &self.def_cache {
            if k != key {
                continue;
            }
            let d = self.th.def(name).unwrap();
            if d.ret != ret || d.params.len() != params.len() || d.params.iter().zip(&params).any(|(a, b)| a.1 != b.1) {
                continue;
            }
            let pairs: Vec<(Sym, Sym)> = params.iter().zip(&d.params).map(|(a, b)| (a.0.clone(), b.0.clone())).collect();
            if alpha_equivalent(&body, &d.body, &pairs) {
                return name.clone();
            }
        }
        let name = self.fresh(base);
        self.th.defs.push(FuncDef { name: name.clone(), params, ret, body });
        self.def_cache.push((key.to_string(), name.clone()));
        name
    }

    fn call_member(&mut self, ts: &[TS], f: &str, args: &[Expr], span: crate::span::Span, ctx: &Ctx) -> Result<Term> {
        let def = self.m.def(f).unwrap();
        let Body::Rel(body) = &def.body else {
            return Err(Error::type_error(span, format!("`{f}` is not a relational function")));
        };
        let map = |v: &str| def.params.iter().position(|p| p.name == v).map(|i| args[i].clone());
        let body = body.subst(&map);
        let mut params = Vec::new();
        let mut pts = Vec::new();
        for t in ts {
            let (p, pt) = self.fresh_var("t", &t.1);
            params.push((p, t.1.clone()));
            pts.push((pt, t.1.clone()));
        }
        let (inner, extra) = self.call_frame(&body.free_vars(), ctx, &mut params);
        let b = self.member(&pts, &body, &inner)?;
        let name = self.define(f, f, params, Ret::Bool, b);
        let mut actual: Vec<Term> = ts.iter().map(|t| t.0.clone()).collect();
        actual.extend(extra);
        Ok(Term::app(&name, actual))
    }

    /// Parameters for the free variables of an inlined call body, with the outer terms they receive.
    pub fn call_frame(&mut self, free: &[String], ctx: &Ctx, params: &mut Vec<Binder>) -> (Ctx, Vec<Term>) {
        let mut inner = Ctx::default();
        let mut extra = Vec::new();
        for v in free {
            let Some((t, s)) = ctx.get(v) else { continue };
            let (p, pt) = self.fresh_var(v, s);
            params.push((p, s.clone()));
            extra.push(t.clone());
            inner = inner.with(v, pt, s.clone());
        }
        (inner, extra)
    }
}

use std::collections::BTreeSet;
