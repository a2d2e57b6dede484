use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::instance::{Atom, Instance, Tuple};
use crate::ir::{int_op, wrap, IntOp as Op};
use std::collections::BTreeSet;

pub type TupleSet = BTreeSet<Tuple>;

#[derive(Clone, Debug)]
enum Value {
    Bool(bool),
    Rel(TupleSet),
    Int(i64),
}

/// Relational evaluator over a fixed instance.
pub struct Evaluator<'a> {
    pub model: &'a Model,
    pub inst: &'a Instance,
    univ: BTreeSet<Atom>,
}

type Env = Vec<(String, TupleSet)>;

fn unary(atoms: impl IntoIterator<Item = Atom>) -> TupleSet {
    atoms.into_iter().map(|a| vec![a]).collect()
}

fn err(msg: impl Into<String>) -> Error {
    Error::Eval(msg.into())
}

fn mult_ok(m: Option<Mult>, n: usize) -> bool {
    match m {
        Some(Mult::One) => n == 1,
        Some(Mult::Lone) => n <= 1,
        Some(Mult::Some) => n >= 1,
        _ => true,
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a Model, inst: &'a Instance) -> Self {
        let mut univ: BTreeSet<Atom> = model
            .top_level()
            .flat_map(|s| inst.sig_atoms.get(&s.name).into_iter().flatten().cloned())
            .collect();
        univ.extend(Self::int_range(inst.bitwidth).map(Atom::Int));
        Evaluator { model, inst, univ }
    }

    fn int_range(bits: u32) -> std::ops::RangeInclusive<i64> {
        -(1i64 << (bits - 1))..=(1i64 << (bits - 1)) - 1
    }

    fn wrap(&self, v: i64) -> i64 {
        wrap(v, self.inst.bitwidth)
    }

    pub fn formula(&self, f: &Formula) -> Result<bool> {
        self.f(f, &mut Vec::new())
    }

    pub fn expr(&self, e: &Expr) -> Result<TupleSet> {
        self.e(e, &mut Vec::new())
    }

    pub fn int(&self, i: &IntExpr) -> Result<i64> {
        self.i(i, &mut Vec::new())
    }

    /// Evaluates with `this` bound to the given atom.
    pub fn formula_with(&self, var: &str, atom: &Atom, f: &Formula) -> Result<bool> {
        self.f(f, &mut vec![(var.to_string(), unary([atom.clone()]))])
    }

    pub fn expr_with(&self, var: &str, atom: &Atom, e: &Expr) -> Result<TupleSet> {
        self.e(e, &mut vec![(var.to_string(), unary([atom.clone()]))])
    }

    /// `s in b` where arrows in `b` may carry multiplicities.
    pub fn in_decl_with(&self, var: &str, atom: &Atom, s: &TupleSet, b: &Expr) -> Result<bool> {
        self.in_decl(s, b, &mut vec![(var.to_string(), unary([atom.clone()]))])
    }

    fn sig(&self, s: &str) -> TupleSet {
        unary(self.inst.sig_atoms.get(s).into_iter().flatten().cloned())
    }

    fn ordering(&self, sig: &str) -> Result<&Vec<Atom>> {
        self.inst.orderings.get(sig).ok_or_else(|| err(format!("instance has no ordering for `{sig}`")))
    }

    fn e(&self, e: &Expr, env: &mut Env) -> Result<TupleSet> {
        Ok(match &e.kind {
            EK::Sig(s) => self.sig(s),
            EK::Field(f) => self.inst.field_tuples.get(f).cloned().ok_or_else(|| err(format!("unbound field `{f}`")))?,
            EK::Var(v) => env.iter().rev().find(|(n, _)| n == v).map(|(_, s)| s.clone()).ok_or_else(|| err(format!("unbound variable `{v}`")))?,
            EK::Univ => unary(self.univ.iter().cloned()),
            EK::Iden => self.univ.iter().map(|a| vec![a.clone(), a.clone()]).collect(),
            EK::None => TupleSet::new(),
            EK::IntSig => unary(Self::int_range(self.inst.bitwidth).map(Atom::Int)),
            EK::Ord(r, sig) => {
                let o = self.ordering(sig)?;
                match r {
                    OrdRel::First => unary(o.first().cloned()),
                    OrdRel::Last => unary(o.last().cloned()),
                    OrdRel::Next => o.windows(2).map(|w| w.to_vec()).collect(),
                    OrdRel::Prev => o.windows(2).map(|w| vec![w[1].clone(), w[0].clone()]).collect(),
                }
            }
            EK::Union(a, b) => {
                let mut s = self.e(a, env)?;
                s.extend(self.e(b, env)?);
                s
            }
            EK::Diff(a, b) => {
                let b = self.e(b, env)?;
                self.e(a, env)?.into_iter().filter(|t| !b.contains(t)).collect()
            }
            EK::Inter(a, b) => {
                let b = self.e(b, env)?;
                self.e(a, env)?.into_iter().filter(|t| b.contains(t)).collect()
            }
            EK::Override(a, b) => {
                let b = self.e(b, env)?;
                let dom: BTreeSet<&Atom> = b.iter().map(|t| &t[0]).collect();
                let mut s: TupleSet = self.e(a, env)?.into_iter().filter(|t| !dom.contains(&t[0])).collect();
                s.extend(b.iter().cloned());
                s
            }
            EK::Join(a, b) => join(&self.e(a, env)?, &self.e(b, env)?),
            EK::Product(a, _, _, b) => {
                let b = self.e(b, env)?;
                let mut s = TupleSet::new();
                for x in self.e(a, env)? {
                    for y in &b {
                        s.insert([x.clone(), y.clone()].concat());
                    }
                }
                s
            }
            EK::DomR(a, b) => {
                let a = self.e(a, env)?;
                self.e(b, env)?.into_iter().filter(|t| a.contains(&t[..1].to_vec())).collect()
            }
            EK::RanR(a, b) => {
                let b = self.e(b, env)?;
                self.e(a, env)?.into_iter().filter(|t| b.contains(&t[t.len() - 1..].to_vec())).collect()
            }
            EK::Transpose(a) => self.e(a, env)?.into_iter().map(|t| vec![t[1].clone(), t[0].clone()]).collect(),
            EK::Closure(a) => closure(&self.e(a, env)?),
            EK::RClosure(a) => {
                let mut s = closure(&self.e(a, env)?);
                s.extend(self.univ.iter().map(|a| vec![a.clone(), a.clone()]));
                s
            }
            EK::Ite(c, a, b) => {
                if self.f(c, env)? {
                    self.e(a, env)?
                } else {
                    self.e(b, env)?
                }
            }
            EK::Compr(ds, body) => {
                let mut out = TupleSet::new();
                self.bindings(ds, env, &mut |ev, env, tup| {
                    if ev.f(body, env)? {
                        out.insert(tup.to_vec());
                    }
                    Ok(true)
                })?;
                out
            }
            EK::Call(name, args) => match self.call(name, args, env)? {
                Value::Rel(s) => s,
                Value::Int(n) => unary([Atom::Int(n)]),
                Value::Bool(_) => return Err(err(format!("predicate `{name}` used as an expression"))),
            },
            EK::IntAtom(i) => unary([Atom::Int(self.i(i, env)?)]),
        })
    }

    fn call(&self, name: &str, args: &[Expr], env: &mut Env) -> Result<Value> {
        let d = self.model.def(name).ok_or_else(|| err(format!("unknown function `{name}`")))?;
        let mut inner: Env = Vec::new();
        for (p, a) in d.params.iter().zip(args) {
            inner.push((p.name.clone(), self.e(a, env)?));
        }
        Ok(match &d.body {
            Body::Formula(f) => Value::Bool(self.f(f, &mut inner)?),
            Body::Rel(e) => Value::Rel(self.e(e, &mut inner)?),
            Body::Int(i) => Value::Int(self.i(i, &mut inner)?),
        })
    }

    /// Calls `k` for every binding of the declared variables, with the bound atoms,
    /// until `k` returns false.
    fn bindings(&self, ds: &[Decl], env: &mut Env, k: &mut dyn FnMut(&Self, &mut Env, &[Atom]) -> Result<bool>) -> Result<bool> {
        let vars: Vec<(usize, usize)> = ds.iter().enumerate().flat_map(|(i, d)| (0..d.vars.len()).map(move |j| (i, j))).collect();
        let mut tup = Vec::new();
        self.bind_from(ds, &vars, 0, env, &mut tup, k)
    }

    fn bind_from(
        &self,
        ds: &[Decl],
        vars: &[(usize, usize)],
        n: usize,
        env: &mut Env,
        tup: &mut Vec<Atom>,
        k: &mut dyn FnMut(&Self, &mut Env, &[Atom]) -> Result<bool>,
    ) -> Result<bool> {
        if n == vars.len() {
            return k(self, env, tup);
        }
        let (i, j) = vars[n];
        let d = &ds[i];
        let bound = self.e(&d.bound, env)?;
        for t in bound {
            let a = t[0].clone();
            if d.disj && (0..j).any(|p| tup[n - j + p] == a) {
                continue;
            }
            env.push((d.vars[j].clone(), unary([a.clone()])));
            tup.push(a);
            let r = self.bind_from(ds, vars, n + 1, env, tup, k);
            tup.pop();
            env.pop();
            if !r? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn count(&self, ds: &[Decl], body: &Formula, env: &mut Env, limit: usize) -> Result<usize> {
        let mut n = 0;
        self.bindings(ds, env, &mut |ev, env, _| {
            if ev.f(body, env)? {
                n += 1;
            }
            Ok(n < limit)
        })?;
        Ok(n)
    }

    fn f(&self, f: &Formula, env: &mut Env) -> Result<bool> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Not(a) => !self.f(a, env)?,
            Formula::And(xs) => {
                for x in xs {
                    if !self.f(x, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(xs) => {
                for x in xs {
                    if self.f(x, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !self.f(a, env)? || self.f(b, env)?,
            Formula::Iff(a, b) => self.f(a, env)? == self.f(b, env)?,
            Formula::Ite(c, a, b) => {
                if self.f(c, env)? {
                    self.f(a, env)?
                } else {
                    self.f(b, env)?
                }
            }
            Formula::In(a, b) => {
                let s = self.e(a, env)?;
                self.in_decl(&s, b, env)?
            }
            Formula::Eq(a, b) => self.e(a, env)? == self.e(b, env)?,
            Formula::IntCmp(op, a, b) => {
                let (a, b) = (self.i(a, env)?, self.i(b, env)?);
                match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Lt => a < b,
                    CmpOp::Gt => a > b,
                    CmpOp::Le => a <= b,
                    CmpOp::Ge => a >= b,
                }
            }
            Formula::Mult(m, e) => {
                let n = self.e(e, env)?.len();
                match m {
                    MultOp::No => n == 0,
                    MultOp::Some => n > 0,
                    MultOp::Lone => n <= 1,
                    MultOp::One => n == 1,
                }
            }
            Formula::Quant(q, ds, body) => match q {
                Quant::All => self.count(ds, &Formula::not(body.as_ref().clone()), env, 1)? == 0,
                Quant::Some => self.count(ds, body, env, 1)? >= 1,
                Quant::No => self.count(ds, body, env, 1)? == 0,
                Quant::One => self.count(ds, body, env, 2)? == 1,
                Quant::Lone => self.count(ds, body, env, 2)? <= 1,
            },
            Formula::Call(name, args) => match self.call(name, args, env)? {
                Value::Bool(b) => b,
                _ => return Err(err(format!("`{name}` is not a predicate"))),
            },
        })
    }

    fn in_decl(&self, s: &TupleSet, b: &Expr, env: &mut Env) -> Result<bool> {
        if let EK::Product(x, mx, my, y) = &b.kind {
            if has_mults(b) {
                let xs = self.e(x, env)?;
                let ys = self.e(y, env)?;
                let i = x.arity;
                if !s.iter().all(|t| xs.contains(&t[..i].to_vec()) && ys.contains(&t[i..].to_vec())) {
                    return Ok(false);
                }
                for tx in &xs {
                    let sub: TupleSet = s.iter().filter(|t| t[..i] == tx[..]).map(|t| t[i..].to_vec()).collect();
                    if !mult_ok(*my, sub.len()) || !self.in_decl(&sub, y, env)? {
                        return Ok(false);
                    }
                }
                for ty in &ys {
                    let sub: TupleSet = s.iter().filter(|t| t[i..] == ty[..]).map(|t| t[..i].to_vec()).collect();
                    if !mult_ok(*mx, sub.len()) || !self.in_decl(&sub, x, env)? {
                        return Ok(false);
                    }
                }
                return Ok(true);
            }
        }
        let b = self.e(b, env)?;
        Ok(s.is_subset(&b))
    }

    fn i(&self, i: &IntExpr, env: &mut Env) -> Result<i64> {
        Ok(match i {
            IntExpr::Lit(n) => self.wrap(*n),
            IntExpr::Card(e) => self.wrap(self.e(e, env)?.len() as i64),
            IntExpr::Bin(op, a, b) => {
                let op = match op {
                    IntOp::Add => Op::Add,
                    IntOp::Sub => Op::Sub,
                    IntOp::Mul => Op::Mul,
                    IntOp::Div => Op::Div,
                    IntOp::Rem => Op::Rem,
                };
                int_op(op, self.i(a, env)?, self.i(b, env)?, self.inst.bitwidth)
            }
            IntExpr::Neg(a) => self.wrap(-self.i(a, env)?),
            IntExpr::FromRel(e) => self.sum_ints(&self.e(e, env)?),
            IntExpr::Sum(ds, body) => {
                let mut total = 0i64;
                self.bindings(ds, env, &mut |ev, env, _| {
                    total = total.wrapping_add(ev.i(body, env)?);
                    Ok(true)
                })?;
                self.wrap(total)
            }
            IntExpr::Ite(c, a, b) => {
                if self.f(c, env)? {
                    self.i(a, env)?
                } else {
                    self.i(b, env)?
                }
            }
            IntExpr::Call(name, args) => match self.call(name, args, env)? {
                Value::Int(n) => n,
                Value::Rel(s) => self.sum_ints(&s),
                Value::Bool(_) => return Err(err(format!("predicate `{name}` used as an integer"))),
            },
        })
    }

    fn sum_ints(&self, s: &TupleSet) -> i64 {
        let total = s.iter().filter_map(|t| match t.as_slice() {
            [Atom::Int(n)] => Some(*n),
            _ => None,
        });
        self.wrap(total.fold(0i64, |a, b| a.wrapping_add(b)))
    }
}

fn has_mults(e: &Expr) -> bool {
    match &e.kind {
        EK::Product(a, ma, mb, b) => ma.is_some() || mb.is_some() || has_mults(a) || has_mults(b),
        _ => false,
    }
}

pub fn join(a: &TupleSet, b: &TupleSet) -> TupleSet {
    let mut out = TupleSet::new();
    for x in a {
        for y in b {
            if x.last() == y.first() {
                out.insert([&x[..x.len() - 1], &y[1..]].concat());
            }
        }
    }
    out
}

/// Transitive closure of a binary relation, by fixed point.
pub fn closure(r: &TupleSet) -> TupleSet {
    let mut c = r.clone();
    loop {
        let step = join(&c, r);
        let before = c.len();
        c.extend(step);
        if c.len() == before {
            return c;
        }
    }
}
