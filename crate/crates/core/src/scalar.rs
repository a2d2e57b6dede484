//! Recognition of scalar expressions: relations holding at most one value per argument tuple.

use crate::error::Result;
use crate::frontend::ast::*;
use crate::ir::*;
use crate::translate::{Ctx, FieldRepr, SigRepr, Translator, TS};
use serde::Serialize;

/// `(x̄, y) ∈ e  ⇔  guard(x̄) ∧ y = value(x̄)` where `x̄` are the `args`.
#[derive(Clone, Debug)]
pub struct Cast {
    pub args: Vec<Binder>,
    pub value: Term,
    pub guard: Term,
    pub sort: Sort,
}

impl Cast {
    pub fn arg_sorts(&self) -> Vec<Sort> {
        self.args.iter().map(|(_, s)| s.clone()).collect()
    }

    pub fn arg_terms(&self) -> Vec<Term> {
        self.args.iter().map(|(n, s)| Term::var(n, s)).collect()
    }

    pub(crate) fn arg_ts(&self) -> Vec<TS> {
        self.args.iter().map(|(n, s)| (Term::var(n, s), s.clone())).collect()
    }

    /// Guard and value at the given argument terms.
    pub fn apply(&self, ts: &[Term]) -> (Term, Term) {
        let pairs: Vec<(Sym, Term)> = self.args.iter().map(|(n, _)| n.clone()).zip(ts.iter().cloned()).collect();
        (self.guard.subst_vars(&pairs), self.value.subst_vars(&pairs))
    }

    pub(crate) fn member(&self, ts: &[TS]) -> Term {
        let n = self.args.len();
        if ts[..n].iter().zip(&self.args).any(|(t, (_, s))| t.1 != *s) || ts[n].1 != self.sort {
            return FALSE;
        }
        let (g, v) = self.apply(&ts[..n].iter().map(|t| t.0.clone()).collect::<Vec<_>>());
        Term::and([g, Term::eq(ts[n].0.clone(), v)])
    }
}

/// One recognised cast site, for `--dump-casts`.
#[derive(Clone, Debug, Serialize)]
pub struct CastLog {
    pub site: String,
    pub expr: String,
    pub line: u32,
    pub col: u32,
    pub args: Vec<String>,
    pub sort: String,
    pub value: String,
    pub guard: String,
}

type Shape = (Vec<Sort>, Sort);

impl Translator<'_> {
    /// Argument and value sorts of the cast of `e`, without building it.
    pub(crate) fn cast_shape(&self, e: &Expr, ctx: &Ctx) -> Option<Shape> {
        match &e.kind {
            EK::Var(v) => ctx.get(v).map(|(_, s)| (vec![], s.clone())),
            EK::IntAtom(_) => Some((vec![], Sort::Int)),
            EK::Ord(r, sig) => {
                let info = self.ords.get(sig)?;
                let s = Sort::U(info.sort.clone());
                match r {
                    OrdRel::First | OrdRel::Last if !info.elems.is_empty() => Some((vec![], s)),
                    OrdRel::Next | OrdRel::Prev if info.elems.len() >= 2 => Some((vec![s.clone()], s)),
                    _ => None,
                }
            }
            EK::Sig(s) => match self.sigs.get(s)? {
                SigRepr::Const(Term::Elem(so, _)) => Some((vec![], Sort::U(so.clone()))),
                _ => None,
            },
            EK::Field(f) => match self.fields.get(f)? {
                FieldRepr::Func { args, ret, .. } => Some((args.clone(), ret.clone())),
                _ => None,
            },
            EK::Join(a, b) => {
                let (aa, ar) = self.cast_shape(a, ctx)?;
                let (ba, br) = self.cast_shape(b, ctx)?;
                if ba.first() != Some(&ar) {
                    return None;
                }
                Some(([aa, ba[1..].to_vec()].concat(), br))
            }
            EK::Ite(_, a, b) => {
                let sa = self.cast_shape(a, ctx)?;
                (self.cast_shape(b, ctx)? == sa).then_some(sa)
            }
            EK::Inter(a, b) => self.cast_shape(a, ctx).or_else(|| self.cast_shape(b, ctx)),
            EK::Diff(a, _) => self.cast_shape(a, ctx),
            EK::DomR(_, b) => self.cast_shape(b, ctx),
            EK::RanR(a, b) => self.cast_shape(a, ctx).or_else(|| {
                let (ba, bs) = self.cast_shape(b, ctx)?;
                if !ba.is_empty() {
                    return None;
                }
                let r = self.res(a, ctx);
                let t = r.tuples.iter().filter(|t| t.last() == Some(&bs)).collect::<Vec<_>>();
                (t.len() == 1).then(|| (t[0][..t[0].len() - 1].to_vec(), bs))
            }),
            EK::Override(a, b) if e.arity == 2 => {
                let sa = self.cast_shape(a, ctx)?;
                (self.cast_shape(b, ctx)? == sa).then_some(sa)
            }
            EK::Product(a, _, _, b) => {
                let (ba, bs) = self.cast_shape(b, ctx)?;
                if !ba.is_empty() {
                    return None;
                }
                let ra = self.res(a, ctx);
                ra.definite().map(|t| (t.clone(), bs))
            }
            EK::Transpose(p) => {
                let EK::Product(a, _, _, b) = &p.kind else { return None };
                if b.arity != 1 {
                    return None;
                }
                let (aa, as_) = self.cast_shape(a, ctx)?;
                if !aa.is_empty() {
                    return None;
                }
                let rb = self.res(b, ctx);
                rb.definite().map(|t| (t.clone(), as_))
            }
            _ => None,
        }
    }

    fn fresh_args(&mut self, sorts: &[Sort]) -> (Vec<Binder>, Vec<TS>) {
        let mut bs = Vec::new();
        let mut ts = Vec::new();
        for s in sorts {
            let (n, t) = self.fresh_var("s", s);
            bs.push((n, s.clone()));
            ts.push((t, s.clone()));
        }
        (bs, ts)
    }

    /// The cast of `e`, when one of the scalar rules applies.
    pub(crate) fn cast(&mut self, e: &Expr, ctx: &Ctx) -> Result<Option<Cast>> {
        let Some((args, sort)) = self.cast_shape(e, ctx) else { return Ok(None) };
        let (binders, ts) = self.fresh_args(&args);
        let terms: Vec<Term> = ts.iter().map(|t| t.0.clone()).collect();
        let (value, guard) = self.build(e, &ts, &terms, ctx)?;
        Ok(Some(Cast { args: binders, value, guard, sort }))
    }

    /// Value and guard of a cast whose shape is known to exist, at argument terms `ts`.
    fn build(&mut self, e: &Expr, ts: &[TS], terms: &[Term], ctx: &Ctx) -> Result<(Term, Term)> {
        Ok(match &e.kind {
            EK::Var(v) => (ctx.get(v).unwrap().0.clone(), TRUE),
            EK::IntAtom(ie) => (self.int(ie, ctx)?, TRUE),
            EK::Ord(r, sig) => {
                let info = self.ords[sig].clone();
                let el = |i: u32| Term::Elem(info.sort.clone(), i);
                match r {
                    OrdRel::First => (el(info.elems[0]), TRUE),
                    OrdRel::Last => (el(*info.elems.last().unwrap()), TRUE),
                    OrdRel::Next | OrdRel::Prev => {
                        let next = *r == OrdRel::Next;
                        let (f, info) = self.ord_fn(sig, next).unwrap();
                        let end = if next { *info.elems.last().unwrap() } else { info.elems[0] };
                        let g = Term::and([self.sig_member(sig, &ts[0]), Term::not(Term::eq(terms[0].clone(), el(end)))]);
                        (Term::app(&f, vec![terms[0].clone()]), g)
                    }
                }
            }
            EK::Sig(s) => match &self.sigs[s] {
                SigRepr::Const(c) => (c.clone(), TRUE),
                _ => unreachable!(),
            },
            EK::Field(f) => match &self.fields[f] {
                FieldRepr::Func { sym, params, guard, .. } => {
                    let pairs: Vec<(Sym, Term)> = params.iter().cloned().zip(terms.iter().cloned()).collect();
                    (Term::app(sym, terms.to_vec()), guard.subst_vars(&pairs))
                }
                _ => unreachable!(),
            },
            EK::Join(a, b) => {
                let (aa, ar) = self.cast_shape(a, ctx).unwrap();
                let n = aa.len();
                let (va, ga) = self.build(a, &ts[..n], &terms[..n], ctx)?;
                let mut bts = vec![(va.clone(), ar)];
                bts.extend(ts[n..].iter().cloned());
                let mut bterms = vec![va];
                bterms.extend(terms[n..].iter().cloned());
                let (vb, gb) = self.build(b, &bts, &bterms, ctx)?;
                (vb, Term::and([ga, gb]))
            }
            EK::Ite(c, a, b) => {
                let c = self.formula(c, ctx)?;
                let (va, ga) = self.build(a, ts, terms, ctx)?;
                let (vb, gb) = self.build(b, ts, terms, ctx)?;
                (Term::ite(c.clone(), va, vb), Term::ite(c, ga, gb))
            }
            EK::Inter(a, b) => {
                let (first, other) = if self.cast_shape(a, ctx).is_some() { (a, b) } else { (b, a) };
                let (v, g) = self.build(first, ts, terms, ctx)?;
                let so = self.cast_shape(first, ctx).unwrap().1;
                let mut tup = ts.to_vec();
                tup.push((v.clone(), so));
                let m = self.member(&tup, other, ctx)?;
                (v, Term::and([g, m]))
            }
            EK::Diff(a, b) => {
                let (v, g) = self.build(a, ts, terms, ctx)?;
                let so = self.cast_shape(a, ctx).unwrap().1;
                let mut tup = ts.to_vec();
                tup.push((v.clone(), so));
                let m = self.member(&tup, b, ctx)?;
                (v, Term::and([g, Term::not(m)]))
            }
            EK::DomR(a, b) => {
                let (v, g) = self.build(b, ts, terms, ctx)?;
                let first = match ts.first() {
                    Some(t) => t.clone(),
                    None => (v.clone(), self.cast_shape(b, ctx).unwrap().1),
                };
                let m = self.member(&[first], a, ctx)?;
                (v, Term::and([g, m]))
            }
            EK::RanR(a, b) => {
                if let Some((_, so)) = self.cast_shape(a, ctx) {
                    let (v, g) = self.build(a, ts, terms, ctx)?;
                    let m = self.member(&[(v.clone(), so)], b, ctx)?;
                    (v, Term::and([g, m]))
                } else {
                    let (vb, gb) = self.build(b, &[], &[], ctx)?;
                    let so = self.cast_shape(b, ctx).unwrap().1;
                    let mut tup = ts.to_vec();
                    tup.push((vb.clone(), so));
                    let m = self.member(&tup, a, ctx)?;
                    (vb, Term::and([gb, m]))
                }
            }
            EK::Override(a, b) => {
                let (va, ga) = self.build(a, ts, terms, ctx)?;
                let (vb, gb) = self.build(b, ts, terms, ctx)?;
                (Term::ite(gb.clone(), vb, va), Term::or([ga, gb]))
            }
            EK::Product(a, _, _, b) => {
                let (vb, gb) = self.build(b, &[], &[], ctx)?;
                let m = self.member(ts, a, ctx)?;
                (vb, Term::and([m, gb]))
            }
            EK::Transpose(p) => {
                let EK::Product(a, _, _, b) = &p.kind else { unreachable!() };
                let (va, ga) = self.build(a, &[], &[], ctx)?;
                let m = self.member(ts, b, ctx)?;
                (va, Term::and([m, ga]))
            }
            _ => unreachable!("no cast for {e}"),
        })
    }
}
