use crate::error::{Error, Result};
use crate::ir::*;
use std::collections::{BTreeSet, HashMap};

/// Values of the uninterpreted symbols; values are `Elem`, `Int` or `Bool` terms.
#[derive(Clone, Debug, Default)]
pub struct Interp {
    pub consts: HashMap<Sym, Term>,
    pub funcs: HashMap<Sym, HashMap<Vec<Term>, Term>>,
}

impl Interp {
    pub fn set(&mut self, f: &Sym, args: Vec<Term>, v: Term) {
        if args.is_empty() {
            self.consts.insert(f.clone(), v);
        } else {
            self.funcs.entry(f.clone()).or_default().insert(args, v);
        }
    }
}

/// Value of `t` under `interp`, expanding quantifiers and closures by enumeration.
pub fn eval(th: &Theory, interp: &Interp, t: &Term) -> Result<Term> {
    Ev { th, i: interp }.ev(t, &mut Vec::new())
}

struct Ev<'a> {
    th: &'a Theory,
    i: &'a Interp,
}

fn bad(t: &Term) -> Error {
    Error::Eval(format!("ill-sorted value in {t}"))
}

impl Ev<'_> {
    fn bool(&self, t: &Term, env: &mut Vec<(Sym, Term)>) -> Result<bool> {
        match self.ev(t, env)? {
            Term::Bool(b) => Ok(b),
            _ => Err(bad(t)),
        }
    }

    fn int(&self, t: &Term, env: &mut Vec<(Sym, Term)>) -> Result<i64> {
        match self.ev(t, env)? {
            Term::Int(n) => Ok(n),
            _ => Err(bad(t)),
        }
    }

    fn apply(&self, f: &Sym, args: Vec<Term>) -> Result<Term> {
        if let Some(d) = self.th.def(f) {
            let mut env: Vec<(Sym, Term)> = d.params.iter().map(|p| p.0.clone()).zip(args).collect();
            return self.ev(&d.body, &mut env);
        }
        let v = if args.is_empty() { self.i.consts.get(f) } else { self.i.funcs.get(f).and_then(|m| m.get(&args)) };
        v.cloned().ok_or_else(|| Error::Eval(format!("no value for {f} at {args:?}")))
    }

    fn quant(&self, forall: bool, vs: &[Binder], body: &Term, env: &mut Vec<(Sym, Term)>) -> Result<bool> {
        let sorts: Vec<Sort> = vs.iter().map(|v| v.1.clone()).collect();
        for tup in super::tuples(self.th, &sorts) {
            let mark = env.len();
            env.extend(vs.iter().map(|v| v.0.clone()).zip(tup));
            let r = self.bool(body, env);
            env.truncate(mark);
            if r? != forall {
                return Ok(!forall);
            }
        }
        Ok(forall)
    }

    fn ev(&self, t: &Term, env: &mut Vec<(Sym, Term)>) -> Result<Term> {
        Ok(match t {
            Term::Var(v, _) => {
                env.iter().rev().find(|(k, _)| k == v).map(|(_, x)| x.clone()).ok_or_else(|| Error::Eval(format!("unbound variable {v}")))?
            }
            Term::Elem(..) | Term::Int(_) | Term::Bool(_) => t.clone(),
            Term::App(f, args) => {
                let args = args.iter().map(|a| self.ev(a, env)).collect::<Result<Vec<_>>>()?;
                self.apply(f, args)?
            }
            Term::Eq(a, b) => Bool(self.ev(a, env)? == self.ev(b, env)?),
            Term::Not(a) => Bool(!self.bool(a, env)?),
            Term::And(xs) => {
                for x in xs {
                    if !self.bool(x, env)? {
                        return Ok(FALSE);
                    }
                }
                TRUE
            }
            Term::Or(xs) => {
                for x in xs {
                    if self.bool(x, env)? {
                        return Ok(TRUE);
                    }
                }
                FALSE
            }
            Term::Implies(a, b) => Bool(!self.bool(a, env)? || self.bool(b, env)?),
            Term::Iff(a, b) => Bool(self.bool(a, env)? == self.bool(b, env)?),
            Term::Ite(c, a, b) => {
                if self.bool(c, env)? {
                    self.ev(a, env)?
                } else {
                    self.ev(b, env)?
                }
            }
            Term::Forall(vs, b) => Bool(self.quant(true, vs, b, env)?),
            Term::Exists(vs, b) => Bool(self.quant(false, vs, b, env)?),
            Term::Closure { reflexive, def, x, y, args } => {
                let x = self.ev(x, env)?;
                let y = self.ev(y, env)?;
                let args = args.iter().map(|a| self.ev(a, env)).collect::<Result<Vec<_>>>()?;
                if *reflexive && x == y {
                    return Ok(TRUE);
                }
                let d = self.th.def(def).ok_or_else(|| Error::Eval(format!("unknown definition {def}")))?;
                let els = self.th.elements(&d.params[0].1);
                let step = |a: &Term, b: &Term| {
                    let mut v = vec![a.clone(), b.clone()];
                    v.extend(args.iter().cloned());
                    self.apply(def, v).map(|r| r == TRUE)
                };
                let mut seen = BTreeSet::new();
                let mut frontier = vec![x];
                while let Some(a) = frontier.pop() {
                    for b in &els {
                        if !seen.contains(b) && step(&a, b)? {
                            seen.insert(b.clone());
                            frontier.push(b.clone());
                        }
                    }
                }
                Bool(seen.contains(&y))
            }
            Term::IntBin(op, a, b) => Term::Int(int_op(*op, self.int(a, env)?, self.int(b, env)?, self.th.bitwidth)),
            Term::Cmp(op, a, b) => {
                let (a, b) = (self.int(a, env)?, self.int(b, env)?);
                Bool(match op {
                    Cmp::Lt => a < b,
                    Cmp::Le => a <= b,
                })
            }
            Term::Sum(xs) => {
                let mut s = 0i64;
                for x in xs {
                    s = s.wrapping_add(self.int(x, env)?);
                }
                Term::Int(wrap(s, self.th.bitwidth))
            }
        })
    }
}
