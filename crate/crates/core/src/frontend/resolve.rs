//! Name resolution and typing: surface tree to [`Model`].

use super::ast::*;
use super::syntax::*;
use crate::error::{Error, Result};
use crate::span::Span;
use std::collections::{BTreeMap, HashSet};

const ORD_HELPERS: &[&str] = &["lt", "gt", "lte", "gte", "nexts", "prevs", "larger", "smaller", "max", "min"];
const INT_BUILTINS: &[&str] = &["plus", "add", "minus", "sub", "mul", "div", "rem", "negate", "int", "sum"];

#[derive(Clone, Debug)]
enum R {
    F(Formula),
    E(Expr),
    I(IntExpr),
}

#[derive(Clone)]
enum Binding {
    Var(String, usize),
    Let(R),
}

#[derive(Clone, Default)]
struct Env {
    frames: Vec<(String, Binding)>,
    /// Signature whose fields may be named without `this.`.
    this_sig: Option<String>,
}

impl Env {
    fn lookup(&self, n: &str) -> Option<&Binding> {
        self.frames.iter().rev().find(|(k, _)| k == n).map(|(_, b)| b)
    }

    fn push(&mut self, n: &str, b: Binding) {
        self.frames.push((n.to_string(), b));
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum DefKind {
    Pred,
    RelFun,
    IntFun,
}

struct DefSig {
    kind: DefKind,
    params: Vec<Param>,
    ret_arity: usize,
}

struct Resolver<'a> {
    sm: &'a SModel,
    model: Model,
    defs: BTreeMap<String, DefSig>,
    allocated: HashSet<String>,
    globals: HashSet<String>,
}

pub fn resolve(sm: &SModel) -> Result<Model> {
    let mut r = Resolver {
        sm,
        model: Model::default(),
        defs: BTreeMap::new(),
        allocated: HashSet::new(),
        globals: HashSet::new(),
    };
    r.run()?;
    Ok(r.model)
}

fn mismatch(span: Span, what: &str, a: usize, b: usize) -> Error {
    Error::type_error(span, format!("{what}: arity mismatch ({a} vs {b})"))
}

impl<'a> Resolver<'a> {
    fn fresh(&mut self, base: &str) -> String {
        let base = if base == "this" { "this_" } else { base };
        if !self.allocated.contains(base) && !self.globals.contains(base) && !base.ends_with('_') {
            self.allocated.insert(base.to_string());
            return base.to_string();
        }
        let stem = base.trim_end_matches('_');
        for i in 1.. {
            let cand = format!("{stem}_{i}");
            if !self.allocated.contains(&cand) && !self.globals.contains(&cand) {
                self.allocated.insert(cand.clone());
                return cand;
            }
        }
        unreachable!()
    }

    fn run(&mut self) -> Result<()> {
        self.declare_sigs()?;
        self.declare_orderings()?;
        for d in &self.sm.defs {
            if !self.globals.insert(d.name.clone()) {
                return Err(Error::type_error(d.span, format!("duplicate name `{}`", d.name)));
            }
        }
        self.declare_fields()?;
        self.declare_defs()?;

        let mut facts = Vec::new();
        for s in &self.sm.sigs {
            if let Some(body) = &s.fact {
                for (name, sp) in &s.names {
                    let v = self.fresh("this");
                    let mut env = Env { this_sig: Some(name.clone()), ..Env::default() };
                    env.push("this", Binding::Var(v.clone(), 1));
                    let f = self.formula(body, &env)?;
                    let decl = Decl {
                        vars: vec![v],
                        disj: false,
                        bound: Expr::new(EK::Sig(name.clone()), 1, *sp),
                        span: *sp,
                    };
                    facts.push(Formula::Quant(Quant::All, vec![decl], Box::new(f)));
                }
            }
        }
        for f in &self.sm.facts {
            facts.push(self.formula(&f.body, &Env::default())?);
        }
        self.model.facts = facts;
        self.define_bodies()?;
        self.check_recursion()?;
        self.commands()?;
        Ok(())
    }

    fn declare_sigs(&mut self) -> Result<()> {
        for s in &self.sm.sigs {
            for (name, sp) in &s.names {
                if !self.globals.insert(name.clone()) {
                    return Err(Error::type_error(*sp, format!("duplicate name `{name}`")));
                }
                let parent = match &s.parent {
                    SParent::None => Parent::Top,
                    SParent::Extends(p, psp) => {
                        if p == "Int" || p == "univ" {
                            return Err(Error::unsupported(*psp, format!("signature extending {p}")));
                        }
                        Parent::Extends(p.clone())
                    }
                    SParent::In(ps) => {
                        if let Some((p, psp)) = ps.iter().find(|(p, _)| p == "Int" || p == "univ") {
                            return Err(Error::unsupported(*psp, format!("subset of {p}")));
                        }
                        if s.is_abstract {
                            return Err(Error::type_error(*sp, "a subset signature cannot be abstract"));
                        }
                        Parent::In(ps.iter().map(|(p, _)| p.clone()).collect())
                    }
                };
                self.model.sigs.push(Sig {
                    name: name.clone(),
                    parent,
                    is_abstract: s.is_abstract,
                    mult: s.mult,
                    fields: Vec::new(),
                    ordered: false,
                    span: *sp,
                });
            }
        }
        // parents exist and the hierarchy is acyclic
        for s in &self.sm.sigs {
            let all: Vec<(String, Span)> = match &s.parent {
                SParent::None => vec![],
                SParent::Extends(p, sp) => vec![(p.clone(), *sp)],
                SParent::In(ps) => ps.clone(),
            };
            for (p, sp) in all {
                if self.model.sig(&p).is_none() {
                    return Err(Error::type_error(sp, format!("unknown signature `{p}`")));
                }
            }
        }
        for s in &self.model.sigs {
            let mut seen = HashSet::new();
            let mut stack = vec![s.name.clone()];
            while let Some(n) = stack.pop() {
                let sig = self.model.sig(&n).unwrap();
                let ps: Vec<String> = match &sig.parent {
                    Parent::Top => vec![],
                    Parent::Extends(p) => vec![p.clone()],
                    Parent::In(ps) => ps.clone(),
                };
                for p in ps {
                    if p == s.name {
                        return Err(Error::type_error(s.span, format!("cyclic signature hierarchy at `{}`", s.name)));
                    }
                    if seen.insert(p.clone()) {
                        stack.push(p);
                    }
                }
            }
        }
        Ok(())
    }

    fn declare_orderings(&mut self) -> Result<()> {
        for o in &self.sm.opens {
            if o.path != "util/ordering" {
                return Err(Error::unsupported(o.span, format!("module `{}`", o.path)));
            }
            if o.args.len() != 1 {
                return Err(Error::type_error(o.span, "util/ordering takes exactly one signature"));
            }
            let (sig, sp) = &o.args[0];
            if self.model.sig(sig).is_none() {
                return Err(Error::type_error(*sp, format!("unknown signature `{sig}`")));
            }
            if let Some(a) = &o.alias {
                self.globals.insert(a.clone());
            }
            self.model.orderings.push(Ordering { sig: sig.clone(), alias: o.alias.clone(), span: o.span });
        }
        Ok(())
    }

    fn declare_fields(&mut self) -> Result<()> {
        for s in &self.sm.sigs {
            for (owner, _) in &s.names {
                for fd in &s.fields {
                    for (fname, fsp) in &fd.names {
                        if !self.globals.insert(fname.clone()) {
                            return Err(Error::type_error(*fsp, format!("duplicate name `{fname}`")));
                        }
                    }
                    let mut env = Env { this_sig: Some(owner.clone()), ..Env::default() };
                    env.push("this", Binding::Var("this".into(), 1));
                    let bound = self.rel(&fd.bound, &env)?;
                    let mult = match fd.mult {
                        Some(m) => m,
                        None if bound.arity == 1 => Mult::One,
                        None => Mult::Set,
                    };
                    if bound.arity > 1 && fd.mult.is_some_and(|m| m != Mult::Set) {
                        return Err(Error::type_error(fd.span, "multiplicity on a relational bound must be `set`"));
                    }
                    for (fname, fsp) in &fd.names {
                        self.model.fields.push(Field {
                            name: fname.clone(),
                            owner: owner.clone(),
                            bound: bound.clone(),
                            mult,
                            span: *fsp,
                        });
                        let sig = self.model.sigs.iter_mut().find(|x| x.name == *owner).unwrap();
                        sig.fields.push(fname.clone());
                    }
                }
            }
        }
        Ok(())
    }

    fn declare_defs(&mut self) -> Result<()> {
        for d in &self.sm.defs {
            let mut env = Env::default();
            let mut params = Vec::new();
            if let Some((recv, sp)) = &d.receiver {
                if self.model.sig(recv).is_none() {
                    return Err(Error::type_error(*sp, format!("unknown signature `{recv}`")));
                }
                let v = self.fresh("this");
                env.push("this", Binding::Var(v.clone(), 1));
                env.this_sig = Some(recv.clone());
                params.push(Param { name: v, mult: None, bound: Expr::new(EK::Sig(recv.clone()), 1, *sp) });
            }
            for decl in &d.params {
                let bound = self.rel(&decl.bound, &env)?;
                for (n, _) in &decl.names {
                    let v = self.fresh(n);
                    env.push(n, Binding::Var(v.clone(), bound.arity));
                    params.push(Param { name: v, mult: decl.mult, bound: bound.clone() });
                }
            }
            let (kind, ret_arity, ret) = match &d.ret {
                None => (DefKind::Pred, 0, None),
                Some((m, node)) => {
                    let e = self.rel(node, &env)?;
                    let int_valued = matches!(node.kind, NK::IntSig) && matches!(m, None | Some(Mult::One));
                    let k = if int_valued { DefKind::IntFun } else { DefKind::RelFun };
                    (k, e.arity, Some((*m, e)))
                }
            };
            self.defs.insert(d.name.clone(), DefSig { kind, params: params.clone(), ret_arity });
            let placeholder = match kind {
                DefKind::Pred => Body::Formula(Formula::True),
                DefKind::RelFun => Body::Rel(Expr::new(EK::None, ret_arity, d.span)),
                DefKind::IntFun => Body::Int(IntExpr::Lit(0)),
            };
            self.model.defs.push(PredFun { name: d.name.clone(), params, body: placeholder, ret, span: d.span });
        }
        Ok(())
    }

    fn define_bodies(&mut self) -> Result<()> {
        for (i, d) in self.sm.defs.iter().enumerate() {
            let mut env = Env::default();
            let params = self.model.defs[i].params.clone();
            let mut pi = 0;
            if let Some((recv, _)) = &d.receiver {
                env.push("this", Binding::Var(params[0].name.clone(), 1));
                env.this_sig = Some(recv.clone());
                pi = 1;
            }
            for decl in &d.params {
                for (n, _) in &decl.names {
                    env.push(n, Binding::Var(params[pi].name.clone(), params[pi].bound.arity));
                    pi += 1;
                }
            }
            let kind = self.defs[&d.name].kind;
            let body = match kind {
                DefKind::Pred => Body::Formula(self.formula(&d.body, &env)?),
                DefKind::IntFun => Body::Int(self.int(&d.body, &env)?),
                DefKind::RelFun => {
                    let e = self.rel(&d.body, &env)?;
                    let want = self.defs[&d.name].ret_arity;
                    if e.arity != want {
                        return Err(mismatch(d.body.span, "function body", e.arity, want));
                    }
                    Body::Rel(e)
                }
            };
            self.model.defs[i].body = body;
        }
        Ok(())
    }

    fn check_recursion(&self) -> Result<()> {
        let mut graph: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for d in &self.model.defs {
            let mut calls = Vec::new();
            match &d.body {
                Body::Formula(f) => calls_formula(f, &mut calls),
                Body::Rel(e) => calls_expr(e, &mut calls),
                Body::Int(i) => calls_int(i, &mut calls),
            }
            for p in &d.params {
                calls_expr(&p.bound, &mut calls);
            }
            graph.insert(&d.name, calls);
        }
        // depth-first search with colours
        fn visit<'g>(
            n: &'g str,
            g: &'g BTreeMap<&str, Vec<String>>,
            state: &mut BTreeMap<&'g str, u8>,
        ) -> Option<&'g str> {
            match state.get(n) {
                Some(1) => return Some(n),
                Some(2) => return None,
                _ => {}
            }
            state.insert(n, 1);
            for c in g.get(n).into_iter().flatten() {
                if let Some(bad) = visit(c, g, state) {
                    return Some(bad);
                }
            }
            state.insert(n, 2);
            None
        }
        let mut state = BTreeMap::new();
        for d in &self.model.defs {
            if let Some(bad) = visit(&d.name, &graph, &mut state) {
                let span = self.model.def(bad).map(|d| d.span).unwrap_or_default();
                return Err(Error::unsupported(span, format!("recursion through `{bad}`")));
            }
        }
        Ok(())
    }

    fn commands(&mut self) -> Result<()> {
        for (i, c) in self.sm.cmds.iter().enumerate() {
            let (body, default_name) = match &c.target {
                CmdTarget::Block(b) => {
                    (self.formula(b, &Env::default())?, format!("{}{}", if c.check { "check" } else { "run" }, i))
                }
                CmdTarget::Name(n, sp) => {
                    if c.check {
                        let a = self
                            .sm
                            .asserts
                            .iter()
                            .find(|a| a.name == *n)
                            .ok_or_else(|| Error::type_error(*sp, format!("unknown assertion `{n}`")))?;
                        (self.formula(&a.body, &Env::default())?, n.clone())
                    } else {
                        (self.run_pred(n, *sp)?, n.clone())
                    }
                }
            };
            let mut scopes = Vec::new();
            for (s, n, exact, sp) in &c.scope.sigs {
                if self.model.sig(s).is_none() {
                    return Err(Error::type_error(*sp, format!("unknown signature `{s}` in scope")));
                }
                scopes.push(ScopeDecl { sig: s.clone(), size: *n, exact: *exact, span: *sp });
            }
            self.model.commands.push(Command {
                name: c.label.clone().unwrap_or(default_name),
                check: c.check,
                body,
                default_scope: c.scope.default,
                scopes,
                bitwidth: c.scope.bitwidth,
                span: c.span,
            });
        }
        Ok(())
    }

    fn run_pred(&mut self, n: &str, sp: Span) -> Result<Formula> {
        let ds = self.defs.get(n).ok_or_else(|| Error::type_error(sp, format!("unknown predicate `{n}`")))?;
        if ds.kind != DefKind::Pred {
            return Err(Error::type_error(sp, format!("`{n}` is not a predicate")));
        }
        let params = ds.params.clone();
        if params.is_empty() {
            return Ok(Formula::Call(n.to_string(), vec![]));
        }
        let mut decls = Vec::new();
        let mut args = Vec::new();
        let mut renames: Vec<(String, String)> = Vec::new();
        for p in &params {
            if p.bound.arity != 1 || matches!(p.mult, Some(Mult::Set | Mult::Some | Mult::Lone)) {
                return Err(Error::unsupported(sp, "second-order quantifier"));
            }
            let v = self.fresh(&p.name);
            let r = renames.clone();
            let bound = p.bound.subst(&|x: &str| r.iter().find(|(a, _)| a == x).map(|(_, b)| Expr::var(b, sp)));
            renames.push((p.name.clone(), v.clone()));
            decls.push(Decl { vars: vec![v.clone()], disj: false, bound, span: sp });
            args.push(Expr::var(&v, sp));
        }
        Ok(Formula::Quant(Quant::Some, decls, Box::new(Formula::Call(n.to_string(), args))))
    }

    // ---- coercions ----

    fn formula(&mut self, n: &Node, env: &Env) -> Result<Formula> {
        match self.node(n, env)? {
            R::F(f) => Ok(f),
            _ => Err(Error::type_error(n.span, "expected a formula")),
        }
    }

    fn rel(&mut self, n: &Node, env: &Env) -> Result<Expr> {
        let r = self.node(n, env)?;
        to_rel(r, n.span)
    }

    fn int(&mut self, n: &Node, env: &Env) -> Result<IntExpr> {
        match self.node(n, env)? {
            R::I(i) => Ok(i),
            R::E(e) => Ok(IntExpr::FromRel(e)),
            R::F(_) => Err(Error::type_error(n.span, "expected an integer expression, found a formula")),
        }
    }

    fn decls(&mut self, ds: &[SDecl], env: &Env, allow_disj: bool) -> Result<(Vec<Decl>, Env)> {
        let mut env = env.clone();
        let mut out = Vec::new();
        for d in ds {
            let bound = self.rel(&d.bound, &env)?;
            if bound.arity != 1 || matches!(d.mult, Some(Mult::Set | Mult::Some | Mult::Lone)) {
                return Err(Error::unsupported(d.span, "second-order quantifier"));
            }
            if d.disj && !allow_disj {
                return Err(Error::unsupported(d.span, "disj in this position"));
            }
            let mut vars = Vec::new();
            for (n, _) in &d.names {
                let v = self.fresh(n);
                vars.push(v);
            }
            for ((n, _), v) in d.names.iter().zip(&vars) {
                env.push(n, Binding::Var(v.clone(), 1));
            }
            out.push(Decl { vars, disj: d.disj, bound, span: d.span });
        }
        Ok((out, env))
    }

    fn node(&mut self, n: &Node, env: &Env) -> Result<R> {
        let sp = n.span;
        Ok(match &n.kind {
            NK::Name(s) => self.name(s, sp, env)?,
            NK::At(s) => match self.model.field(s) {
                Some(f) => R::E(Expr::new(EK::Field(s.clone()), f.arity(), sp)),
                None => return Err(Error::type_error(sp, format!("unknown field `{s}`"))),
            },
            NK::This => match env.lookup("this") {
                Some(Binding::Var(v, a)) => R::E(Expr::new(EK::Var(v.clone()), *a, sp)),
                _ => return Err(Error::type_error(sp, "`this` outside a signature context")),
            },
            NK::Num(k) => R::I(IntExpr::Lit(*k)),
            NK::Univ => R::E(Expr::new(EK::Univ, 1, sp)),
            NK::Iden => R::E(Expr::new(EK::Iden, 2, sp)),
            NK::NoneE => R::E(Expr::new(EK::None, 1, sp)),
            NK::IntSig => R::E(Expr::new(EK::IntSig, 1, sp)),
            NK::Neg(a) => match &a.kind {
                NK::Num(k) => R::I(IntExpr::Lit(-k)),
                _ => R::I(IntExpr::Neg(Box::new(self.int(a, env)?))),
            },
            NK::Not(a) => R::F(Formula::not(self.formula(a, env)?)),
            NK::Bin(op, a, b) => self.bin(*op, a, b, sp, env)?,
            NK::Cmp(op, neg, a, b) => {
                let f = self.cmp(*op, a, b, sp, env)?;
                R::F(if *neg { Formula::not(f) } else { f })
            }
            NK::Arrow(a, lm, rm, b) => {
                let x = self.rel(a, env)?;
                let y = self.rel(b, env)?;
                let arity = x.arity + y.arity;
                R::E(Expr::new(EK::Product(Box::new(x), *lm, *rm, Box::new(y)), arity, sp))
            }
            NK::Unary(SUn::Card, a) => R::I(IntExpr::Card(self.rel(a, env)?)),
            NK::Unary(op, a) => {
                let x = self.rel(a, env)?;
                if x.arity != 2 {
                    return Err(Error::type_error(sp, "operand of ~, ^ or * must be binary"));
                }
                let k = match op {
                    SUn::Transpose => EK::Transpose(Box::new(x)),
                    SUn::Closure => EK::Closure(Box::new(x)),
                    _ => EK::RClosure(Box::new(x)),
                };
                R::E(Expr::new(k, 2, sp))
            }
            NK::MultF(m, a) => {
                let e = self.rel(a, env)?;
                R::F(match m {
                    SMultF::No => Formula::Mult(MultOp::No, e),
                    SMultF::Some => Formula::Mult(MultOp::Some, e),
                    SMultF::Lone => Formula::Mult(MultOp::Lone, e),
                    SMultF::One => Formula::Mult(MultOp::One, e),
                    SMultF::Set => Formula::True,
                })
            }
            NK::IfElse(c, a, b) => {
                let c = self.formula(c, env)?;
                let x = self.node(a, env)?;
                let y = self.node(b, env)?;
                match (x, y) {
                    (R::F(x), R::F(y)) => R::F(Formula::Ite(Box::new(c), Box::new(x), Box::new(y))),
                    (R::I(x), R::I(y)) => R::I(IntExpr::Ite(Box::new(c), Box::new(x), Box::new(y))),
                    (x, y) => {
                        let x = to_rel(x, a.span)?;
                        let y = to_rel(y, b.span)?;
                        if x.arity != y.arity {
                            return Err(mismatch(sp, "conditional branches", x.arity, y.arity));
                        }
                        let arity = x.arity;
                        R::E(Expr::new(EK::Ite(Box::new(c), Box::new(x), Box::new(y)), arity, sp))
                    }
                }
            }
            NK::BoxJoin(t, args) => self.box_join(t, args, sp, env)?,
            NK::Quant(q, ds, body) => {
                let (decls, inner) = self.decls(ds, env, true)?;
                match q {
                    SQuant::Sum => {
                        if decls.iter().any(|d| d.disj) {
                            return Err(Error::unsupported(sp, "disj in sum"));
                        }
                        R::I(IntExpr::Sum(decls, Box::new(self.int(body, &inner)?)))
                    }
                    _ => {
                        let q = match q {
                            SQuant::All => Quant::All,
                            SQuant::Some => Quant::Some,
                            SQuant::No => Quant::No,
                            SQuant::One => Quant::One,
                            _ => Quant::Lone,
                        };
                        R::F(Formula::Quant(q, decls, Box::new(self.formula(body, &inner)?)))
                    }
                }
            }
            NK::Let(binds, body) => {
                let mut inner = env.clone();
                for (name, _, val) in binds {
                    let v = self.node(val, &inner)?;
                    inner.push(name, Binding::Let(v));
                }
                self.node(body, &inner)?
            }
            NK::Compr(ds, body) => {
                let (decls, inner) = self.decls(ds, env, true)?;
                let f = self.formula(body, &inner)?;
                let arity = decls.iter().map(|d| d.vars.len()).sum();
                R::E(Expr::new(EK::Compr(decls, Box::new(f)), arity, sp))
            }
            NK::Block(items) if items.len() == 1 => self.node(&items[0], env)?,
            NK::Block(items) => {
                let mut fs = Vec::new();
                for it in items {
                    fs.push(self.formula(it, env)?);
                }
                R::F(match fs.len() {
                    0 => Formula::True,
                    1 => fs.pop().unwrap(),
                    _ => Formula::And(fs),
                })
            }
        })
    }

    fn field_of_this(&self, s: &str, env: &Env) -> bool {
        let Some(ts) = &env.this_sig else { return false };
        let Some(f) = self.model.field(s) else { return false };
        f.owner == *ts || self.model.ancestors(ts).contains(&f.owner)
    }

    fn ord_for(&self, name: &str, sp: Span) -> Result<Option<(String, String)>> {
        // returns (sig, bare name) for ordering-module names
        if let Some((alias, bare)) = name.split_once('/') {
            if let Some(o) = self.model.orderings.iter().find(|o| o.alias.as_deref() == Some(alias)) {
                return Ok(Some((o.sig.clone(), bare.to_string())));
            }
            if alias == "ordering" && self.model.orderings.len() == 1 {
                return Ok(Some((self.model.orderings[0].sig.clone(), bare.to_string())));
            }
            return Ok(None);
        }
        match self.model.orderings.len() {
            0 => Ok(None),
            1 => Ok(Some((self.model.orderings[0].sig.clone(), name.to_string()))),
            _ => Err(Error::type_error(sp, format!("`{name}` is ambiguous between several orderings; qualify it"))),
        }
    }

    fn ord_rel(bare: &str) -> Option<OrdRel> {
        match bare {
            "first" => Some(OrdRel::First),
            "last" => Some(OrdRel::Last),
            "next" => Some(OrdRel::Next),
            "prev" => Some(OrdRel::Prev),
            _ => None,
        }
    }

    fn name(&mut self, s: &str, sp: Span, env: &Env) -> Result<R> {
        if let Some(b) = env.lookup(s) {
            return Ok(match b {
                Binding::Var(v, a) => R::E(Expr::new(EK::Var(v.clone()), *a, sp)),
                Binding::Let(r) => r.clone(),
            });
        }
        if self.field_of_this(s, env) {
            let Some(Binding::Var(this, _)) = env.lookup("this") else { unreachable!() };
            let f = self.model.field(s).unwrap();
            let fe = Expr::new(EK::Field(s.to_string()), f.arity(), sp);
            return Ok(R::E(Expr::join(Expr::var(this, sp), fe)));
        }
        if self.model.sig(s).is_some() {
            return Ok(R::E(Expr::new(EK::Sig(s.to_string()), 1, sp)));
        }
        if let Some(f) = self.model.field(s) {
            return Ok(R::E(Expr::new(EK::Field(s.to_string()), f.arity(), sp)));
        }
        if self.sm.sigs.iter().flat_map(|x| &x.fields).flat_map(|f| &f.names).any(|(n, _)| n == s) {
            return Err(Error::type_error(sp, format!("field `{s}` used before its declaration")));
        }
        if self.defs.contains_key(s) {
            return self.call(s, vec![], sp);
        }
        let bare = s.rsplit('/').next().unwrap_or(s);
        if Self::ord_rel(bare).is_some() || (s.contains('/') && ORD_HELPERS.contains(&bare)) {
            if let Some((sig, bare)) = self.ord_for(s, sp)? {
                if let Some(r) = Self::ord_rel(&bare) {
                    let arity = if matches!(r, OrdRel::Next | OrdRel::Prev) { 2 } else { 1 };
                    return Ok(R::E(Expr::new(EK::Ord(r, sig), arity, sp)));
                }
            }
        }
        Err(Error::type_error(sp, format!("unknown name `{s}`")))
    }

    fn call(&mut self, name: &str, args: Vec<Expr>, sp: Span) -> Result<R> {
        let ds = &self.defs[name];
        if ds.params.len() != args.len() {
            return Err(Error::type_error(
                sp,
                format!("`{name}` expects {} arguments, got {}", ds.params.len(), args.len()),
            ));
        }
        for (p, a) in ds.params.iter().zip(&args) {
            if p.bound.arity != a.arity {
                return Err(mismatch(a.span, "argument", a.arity, p.bound.arity));
            }
        }
        Ok(match ds.kind {
            DefKind::Pred => R::F(Formula::Call(name.to_string(), args)),
            DefKind::IntFun => R::I(IntExpr::Call(name.to_string(), args)),
            DefKind::RelFun => R::E(Expr::new(EK::Call(name.to_string(), args), ds.ret_arity, sp)),
        })
    }

    fn is_local(env: &Env, n: &str) -> bool {
        env.lookup(n).is_some()
    }

    fn box_join(&mut self, t: &Node, args: &[Node], sp: Span, env: &Env) -> Result<R> {
        if let NK::Name(name) = &t.kind {
            if !Self::is_local(env, name) && !self.field_of_this(name, env) {
                if self.defs.contains_key(name.as_str()) {
                    let mut es = Vec::new();
                    for a in args {
                        es.push(self.rel(a, env)?);
                    }
                    return self.call(name, es, sp);
                }
                let bare = name.rsplit('/').next().unwrap_or(name);
                if ORD_HELPERS.contains(&bare) && self.model.sig(name).is_none() && self.model.field(name).is_none() {
                    if let Some((sig, bare)) = self.ord_for(name, sp)? {
                        return self.ord_helper(&sig, &bare, args, sp, env);
                    }
                }
                if INT_BUILTINS.contains(&name.as_str()) && self.model.sig(name).is_none() && self.model.field(name).is_none() {
                    return self.int_builtin(name, args, sp, env);
                }
                if name == "disj" {
                    let mut es = Vec::new();
                    for a in args {
                        es.push(self.rel(a, env)?);
                    }
                    let mut fs = Vec::new();
                    for i in 0..es.len() {
                        for j in i + 1..es.len() {
                            if es[i].arity != es[j].arity {
                                return Err(mismatch(sp, "disj", es[i].arity, es[j].arity));
                            }
                            let a = es[i].arity;
                            let inter = Expr::new(EK::Inter(Box::new(es[i].clone()), Box::new(es[j].clone())), a, sp);
                            fs.push(Formula::Mult(MultOp::No, inter));
                        }
                    }
                    return Ok(R::F(Formula::and(fs)));
                }
            }
        }
        if let NK::IntSig = t.kind {
            if args.len() == 1 {
                let i = self.int(&args[0], env)?;
                return Ok(R::E(Expr::new(EK::IntAtom(Box::new(i)), 1, sp)));
            }
        }
        if let NK::Bin(SBin::Join, recv, m) = &t.kind {
            if let NK::Name(name) = &m.kind {
                if !Self::is_local(env, name) && self.defs.contains_key(name.as_str()) && !self.field_of_this(name, env) {
                    let mut es = vec![self.rel(recv, env)?];
                    for a in args {
                        es.push(self.rel(a, env)?);
                    }
                    return self.call(name, es, sp);
                }
            }
        }
        let mut e = self.rel(t, env)?;
        for a in args {
            let x = self.rel(a, env)?;
            e = self.checked_join(x, e, sp)?;
        }
        Ok(R::E(e))
    }

    fn checked_join(&self, a: Expr, b: Expr, sp: Span) -> Result<Expr> {
        if a.arity + b.arity < 3 {
            return Err(Error::type_error(sp, "join of two unary expressions"));
        }
        let arity = a.arity + b.arity - 2;
        Ok(Expr::new(EK::Join(Box::new(a), Box::new(b)), arity, sp))
    }

    fn int_builtin(&mut self, name: &str, args: &[Node], sp: Span, env: &Env) -> Result<R> {
        let want = match name {
            "negate" | "int" | "sum" => 1,
            _ => 2,
        };
        if args.len() != want {
            return Err(Error::type_error(sp, format!("`{name}` expects {want} arguments")));
        }
        if name == "int" || name == "sum" {
            return Ok(R::I(IntExpr::FromRel(self.rel(&args[0], env)?)));
        }
        let a = self.int(&args[0], env)?;
        if name == "negate" {
            return Ok(R::I(IntExpr::Neg(Box::new(a))));
        }
        let b = self.int(&args[1], env)?;
        let op = match name {
            "plus" | "add" => IntOp::Add,
            "minus" | "sub" => IntOp::Sub,
            "mul" => IntOp::Mul,
            "div" => IntOp::Div,
            _ => IntOp::Rem,
        };
        Ok(R::I(IntExpr::Bin(op, Box::new(a), Box::new(b))))
    }

    fn ord_helper(&mut self, sig: &str, h: &str, args: &[Node], sp: Span, env: &Env) -> Result<R> {
        let mut es = Vec::new();
        for a in args {
            let e = self.rel(a, env)?;
            if e.arity != 1 {
                return Err(Error::type_error(a.span, format!("`{h}` expects unary arguments")));
            }
            es.push(e);
        }
        let want = if matches!(h, "nexts" | "prevs" | "max" | "min") { 1 } else { 2 };
        if es.len() != want {
            return Err(Error::type_error(sp, format!("`{h}` expects {want} arguments")));
        }
        let rel = |r: OrdRel| Expr::new(EK::Ord(r, sig.to_string()), 2, sp);
        let clos = |r: OrdRel| Expr::new(EK::Closure(Box::new(rel(r))), 2, sp);
        let lt = |a: &Expr, b: &Expr| Formula::In(a.clone(), Expr::join(b.clone(), clos(OrdRel::Prev)));
        let gt = |a: &Expr, b: &Expr| Formula::In(a.clone(), Expr::join(b.clone(), clos(OrdRel::Next)));
        Ok(match h {
            "lt" => R::F(lt(&es[0], &es[1])),
            "gt" => R::F(gt(&es[0], &es[1])),
            "lte" => R::F(Formula::Or(vec![lt(&es[0], &es[1]), Formula::Eq(es[0].clone(), es[1].clone())])),
            "gte" => R::F(Formula::Or(vec![gt(&es[0], &es[1]), Formula::Eq(es[0].clone(), es[1].clone())])),
            "nexts" => R::E(Expr::join(es[0].clone(), clos(OrdRel::Next))),
            "prevs" => R::E(Expr::join(es[0].clone(), clos(OrdRel::Prev))),
            "larger" => R::E(Expr::new(
                EK::Ite(Box::new(lt(&es[0], &es[1])), Box::new(es[1].clone()), Box::new(es[0].clone())),
                1,
                sp,
            )),
            "smaller" => R::E(Expr::new(
                EK::Ite(Box::new(lt(&es[0], &es[1])), Box::new(es[0].clone()), Box::new(es[1].clone())),
                1,
                sp,
            )),
            "max" => R::E(Expr::diff(es[0].clone(), Expr::join(es[0].clone(), clos(OrdRel::Prev)))),
            _ => R::E(Expr::diff(es[0].clone(), Expr::join(es[0].clone(), clos(OrdRel::Next)))),
        })
    }

    fn bin(&mut self, op: SBin, a: &Node, b: &Node, sp: Span, env: &Env) -> Result<R> {
        let logical = |k: fn(Formula, Formula) -> Formula, s: &mut Self| -> Result<R> {
            let x = s.formula(a, env)?;
            let y = s.formula(b, env)?;
            Ok(R::F(k(x, y)))
        };
        match op {
            SBin::Or => return logical(|x, y| Formula::Or(vec![x, y]), self),
            SBin::And => return logical(|x, y| Formula::And(vec![x, y]), self),
            SBin::Iff => return logical(|x, y| Formula::Iff(Box::new(x), Box::new(y)), self),
            SBin::Implies => return logical(|x, y| Formula::Implies(Box::new(x), Box::new(y)), self),
            _ => {}
        }
        if op == SBin::Join {
            if let NK::Name(name) = &b.kind {
                if !Self::is_local(env, name) && self.defs.contains_key(name.as_str()) && !self.field_of_this(name, env) {
                    let recv = self.rel(a, env)?;
                    return self.call(name, vec![recv], sp);
                }
            }
        }
        let x = self.rel(a, env)?;
        let y = self.rel(b, env)?;
        let (xa, ya) = (x.arity, y.arity);
        let bx = Box::new(x);
        let by = Box::new(y);
        let (kind, arity) = match op {
            SBin::Union | SBin::Diff | SBin::Inter | SBin::Override => {
                if xa != ya {
                    return Err(mismatch(sp, "set operator", xa, ya));
                }
                let k = match op {
                    SBin::Union => EK::Union(bx, by),
                    SBin::Diff => EK::Diff(bx, by),
                    SBin::Inter => EK::Inter(bx, by),
                    _ => EK::Override(bx, by),
                };
                (k, xa)
            }
            SBin::DomR => {
                if xa != 1 {
                    return Err(Error::type_error(sp, "left operand of <: must be unary"));
                }
                (EK::DomR(bx, by), ya)
            }
            SBin::RanR => {
                if ya != 1 {
                    return Err(Error::type_error(sp, "right operand of :> must be unary"));
                }
                (EK::RanR(bx, by), xa)
            }
            SBin::Join => return Ok(R::E(self.checked_join(*bx, *by, sp)?)),
            _ => unreachable!(),
        };
        Ok(R::E(Expr::new(kind, arity, sp)))
    }

    fn cmp(&mut self, op: SCmp, a: &Node, b: &Node, sp: Span, env: &Env) -> Result<Formula> {
        match op {
            SCmp::In | SCmp::Eq => {
                let x = self.node(a, env)?;
                let y = self.node(b, env)?;
                if op == SCmp::Eq {
                    if let (R::I(x), R::I(y)) = (&x, &y) {
                        return Ok(Formula::IntCmp(CmpOp::Eq, x.clone(), y.clone()));
                    }
                }
                let x = to_rel(x, a.span)?;
                let y = to_rel(y, b.span)?;
                if x.arity != y.arity {
                    return Err(mismatch(sp, "comparison", x.arity, y.arity));
                }
                Ok(if op == SCmp::In { Formula::In(x, y) } else { Formula::Eq(x, y) })
            }
            _ => {
                let x = self.int(a, env)?;
                let y = self.int(b, env)?;
                let c = match op {
                    SCmp::Lt => CmpOp::Lt,
                    SCmp::Gt => CmpOp::Gt,
                    SCmp::Le => CmpOp::Le,
                    _ => CmpOp::Ge,
                };
                Ok(Formula::IntCmp(c, x, y))
            }
        }
    }
}

fn to_rel(r: R, span: Span) -> Result<Expr> {
    match r {
        R::E(e) => Ok(e),
        R::I(i) => Ok(Expr::new(EK::IntAtom(Box::new(i)), 1, span)),
        R::F(_) => Err(Error::type_error(span, "expected an expression, found a formula")),
    }
}

pub(crate) fn calls_expr(e: &Expr, out: &mut Vec<String>) {
    match &e.kind {
        EK::Call(n, _) => out.push(n.clone()),
        EK::Ite(c, _, _) => calls_formula(c, out),
        EK::Compr(ds, f) => {
            ds.iter().for_each(|d| calls_expr(&d.bound, out));
            calls_formula(f, out);
        }
        EK::IntAtom(i) => calls_int(i, out),
        _ => {}
    }
    for c in e.children() {
        calls_expr(c, out);
    }
}

pub(crate) fn calls_int(i: &IntExpr, out: &mut Vec<String>) {
    match i {
        IntExpr::Lit(_) => {}
        IntExpr::Card(e) | IntExpr::FromRel(e) => calls_expr(e, out),
        IntExpr::Bin(_, a, b) => {
            calls_int(a, out);
            calls_int(b, out);
        }
        IntExpr::Neg(a) => calls_int(a, out),
        IntExpr::Sum(ds, x) => {
            ds.iter().for_each(|d| calls_expr(&d.bound, out));
            calls_int(x, out);
        }
        IntExpr::Ite(c, a, b) => {
            calls_formula(c, out);
            calls_int(a, out);
            calls_int(b, out);
        }
        IntExpr::Call(n, args) => {
            out.push(n.clone());
            args.iter().for_each(|a| calls_expr(a, out));
        }
    }
}

pub(crate) fn calls_formula(f: &Formula, out: &mut Vec<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Not(a) => calls_formula(a, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| calls_formula(f, out)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            calls_formula(a, out);
            calls_formula(b, out);
        }
        Formula::Ite(c, a, b) => {
            calls_formula(c, out);
            calls_formula(a, out);
            calls_formula(b, out);
        }
        Formula::In(a, b) | Formula::Eq(a, b) => {
            calls_expr(a, out);
            calls_expr(b, out);
        }
        Formula::IntCmp(_, a, b) => {
            calls_int(a, out);
            calls_int(b, out);
        }
        Formula::Mult(_, e) => calls_expr(e, out),
        Formula::Quant(_, ds, f) => {
            ds.iter().for_each(|d| calls_expr(&d.bound, out));
            calls_formula(f, out);
        }
        Formula::Call(n, args) => {
            out.push(n.clone());
            args.iter().for_each(|a| calls_expr(a, out));
        }
    }
}
