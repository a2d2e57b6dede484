//! Resolved, typed syntax tree.

use crate::span::Span;
pub use super::syntax::Mult;
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrdRel {
    First,
    Last,
    Next,
    Prev,
}

impl OrdRel {
    pub fn name(self) -> &'static str {
        match self {
            OrdRel::First => "first",
            OrdRel::Last => "last",
            OrdRel::Next => "next",
            OrdRel::Prev => "prev",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: EK,
    pub arity: usize,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EK {
    Sig(String),
    Field(String),
    Var(String),
    Univ,
    Iden,
    None,
    /// The set of all integer atoms.
    IntSig,
    Ord(OrdRel, String),
    Union(Box<Expr>, Box<Expr>),
    Diff(Box<Expr>, Box<Expr>),
    Inter(Box<Expr>, Box<Expr>),
    Override(Box<Expr>, Box<Expr>),
    Join(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Option<Mult>, Option<Mult>, Box<Expr>),
    DomR(Box<Expr>, Box<Expr>),
    RanR(Box<Expr>, Box<Expr>),
    Transpose(Box<Expr>),
    Closure(Box<Expr>),
    RClosure(Box<Expr>),
    Ite(Box<Formula>, Box<Expr>, Box<Expr>),
    Compr(Vec<Decl>, Box<Formula>),
    Call(String, Vec<Expr>),
    IntAtom(Box<IntExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntExpr {
    Lit(i64),
    Card(Expr),
    Bin(IntOp, Box<IntExpr>, Box<IntExpr>),
    Neg(Box<IntExpr>),
    /// Sum of the integer atoms in a relational expression.
    FromRel(Expr),
    Sum(Vec<Decl>, Box<IntExpr>),
    Ite(Box<Formula>, Box<IntExpr>, Box<IntExpr>),
    Call(String, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultOp {
    No,
    Some,
    Lone,
    One,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quant {
    All,
    Some,
    No,
    One,
    Lone,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Ite(Box<Formula>, Box<Formula>, Box<Formula>),
    In(Expr, Expr),
    Eq(Expr, Expr),
    IntCmp(CmpOp, IntExpr, IntExpr),
    Mult(MultOp, Expr),
    Quant(Quant, Vec<Decl>, Box<Formula>),
    Call(String, Vec<Expr>),
}

/// Binder `x, y: bound`; every bound variable is a single atom.
#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub vars: Vec<String>,
    pub disj: bool,
    pub bound: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Parent {
    Top,
    Extends(String),
    In(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct Sig {
    pub name: String,
    pub parent: Parent,
    pub is_abstract: bool,
    pub mult: Option<Mult>,
    pub fields: Vec<String>,
    pub ordered: bool,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Field {
    pub name: String,
    pub owner: String,
    /// Bound with the owner atom as free variable `this`.
    pub bound: Expr,
    pub mult: Mult,
    pub span: Span,
}

impl Field {
    pub fn arity(&self) -> usize {
        self.bound.arity + 1
    }
}

#[derive(Clone, Debug)]
pub struct Param {
    pub name: String,
    pub mult: Option<Mult>,
    pub bound: Expr,
}

#[derive(Clone, Debug)]
pub enum Body {
    Formula(Formula),
    Rel(Expr),
    Int(IntExpr),
}

#[derive(Clone, Debug)]
pub struct PredFun {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Body,
    pub ret: Option<(Option<Mult>, Expr)>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeDecl {
    pub sig: String,
    pub size: u32,
    pub exact: bool,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Command {
    pub name: String,
    pub check: bool,
    /// Run body or the asserted formula, not yet negated.
    pub body: Formula,
    pub default_scope: Option<u32>,
    pub scopes: Vec<ScopeDecl>,
    pub bitwidth: Option<u32>,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct Ordering {
    pub sig: String,
    pub alias: Option<String>,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct Model {
    pub sigs: Vec<Sig>,
    pub fields: Vec<Field>,
    pub facts: Vec<Formula>,
    pub defs: Vec<PredFun>,
    pub commands: Vec<Command>,
    pub orderings: Vec<Ordering>,
}

impl Model {
    pub fn sig(&self, name: &str) -> Option<&Sig> {
        self.sigs.iter().find(|s| s.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn def(&self, name: &str) -> Option<&PredFun> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn top_level(&self) -> impl Iterator<Item = &Sig> {
        self.sigs.iter().filter(|s| s.parent == Parent::Top)
    }

    /// The top-level ancestors of a signature (several for subset sigs).
    pub fn tops_of(&self, name: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![name.to_string()];
        while let Some(n) = stack.pop() {
            match self.sig(&n).map(|s| &s.parent) {
                Some(Parent::Top) => {
                    out.insert(n);
                }
                Some(Parent::Extends(p)) => stack.push(p.clone()),
                Some(Parent::In(ps)) => stack.extend(ps.iter().cloned()),
                None => {}
            }
        }
        out
    }

    pub fn children(&self, name: &str) -> impl Iterator<Item = &Sig> + '_ {
        let name = name.to_string();
        self.sigs.iter().filter(move |s| matches!(&s.parent, Parent::Extends(p) if *p == name))
    }

    /// Ancestors along `extends` edges, nearest first.
    pub fn ancestors(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = name.to_string();
        while let Some(Parent::Extends(p)) = self.sig(&cur).map(|s| &s.parent) {
            out.push(p.clone());
            cur = p.clone();
        }
        out
    }

    pub fn is_subset_sig(&self, name: &str) -> bool {
        matches!(self.sig(name).map(|s| &s.parent), Some(Parent::In(_)))
    }

    pub fn ordering_of(&self, sig: &str) -> Option<&Ordering> {
        self.orderings.iter().find(|o| o.sig == sig)
    }
}

impl Expr {
    pub fn new(kind: EK, arity: usize, span: Span) -> Expr {
        Expr { kind, arity, span }
    }

    pub fn var(name: &str, span: Span) -> Expr {
        Expr::new(EK::Var(name.to_string()), 1, span)
    }

    pub fn join(a: Expr, b: Expr) -> Expr {
        let arity = a.arity + b.arity - 2;
        let span = a.span.to(b.span);
        Expr::new(EK::Join(Box::new(a), Box::new(b)), arity, span)
    }

    pub fn product(a: Expr, b: Expr) -> Expr {
        let arity = a.arity + b.arity;
        let span = a.span.to(b.span);
        Expr::new(EK::Product(Box::new(a), None, None, Box::new(b)), arity, span)
    }

    pub fn union(a: Expr, b: Expr) -> Expr {
        let arity = a.arity;
        let span = a.span.to(b.span);
        Expr::new(EK::Union(Box::new(a), Box::new(b)), arity, span)
    }

    pub fn diff(a: Expr, b: Expr) -> Expr {
        let arity = a.arity;
        let span = a.span.to(b.span);
        Expr::new(EK::Diff(Box::new(a), Box::new(b)), arity, span)
    }

    /// Direct subexpressions, formulas and integer expressions excluded.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            EK::Union(a, b)
            | EK::Diff(a, b)
            | EK::Inter(a, b)
            | EK::Override(a, b)
            | EK::Join(a, b)
            | EK::Product(a, _, _, b)
            | EK::DomR(a, b)
            | EK::RanR(a, b) => vec![a, b],
            EK::Transpose(a) | EK::Closure(a) | EK::RClosure(a) => vec![a],
            EK::Ite(_, a, b) => vec![a, b],
            EK::Call(_, args) => args.iter().collect(),
            _ => vec![],
        }
    }
}

/// Capture-avoiding substitution is unnecessary because binder names are unique per model.
pub trait Subst {
    fn subst(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Self;
}

impl Subst for Expr {
    fn subst(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        let b = |e: &Expr| Box::new(e.subst(map));
        let kind = match &self.kind {
            EK::Var(v) => {
                if let Some(e) = map(v) {
                    return e;
                }
                EK::Var(v.clone())
            }
            EK::Union(x, y) => EK::Union(b(x), b(y)),
            EK::Diff(x, y) => EK::Diff(b(x), b(y)),
            EK::Inter(x, y) => EK::Inter(b(x), b(y)),
            EK::Override(x, y) => EK::Override(b(x), b(y)),
            EK::Join(x, y) => EK::Join(b(x), b(y)),
            EK::Product(x, l, r, y) => EK::Product(b(x), *l, *r, b(y)),
            EK::DomR(x, y) => EK::DomR(b(x), b(y)),
            EK::RanR(x, y) => EK::RanR(b(x), b(y)),
            EK::Transpose(x) => EK::Transpose(b(x)),
            EK::Closure(x) => EK::Closure(b(x)),
            EK::RClosure(x) => EK::RClosure(b(x)),
            EK::Ite(c, x, y) => EK::Ite(Box::new(c.subst(map)), b(x), b(y)),
            EK::Compr(ds, f) => EK::Compr(subst_decls(ds, map), Box::new(f.subst(map))),
            EK::Call(n, args) => EK::Call(n.clone(), args.iter().map(|a| a.subst(map)).collect()),
            EK::IntAtom(i) => EK::IntAtom(Box::new(i.subst(map))),
            k => k.clone(),
        };
        Expr { kind, arity: self.arity, span: self.span }
    }
}

fn subst_decls(ds: &[Decl], map: &dyn Fn(&str) -> Option<Expr>) -> Vec<Decl> {
    ds.iter().map(|d| Decl { bound: d.bound.subst(map), ..d.clone() }).collect()
}

impl Subst for IntExpr {
    fn subst(&self, map: &dyn Fn(&str) -> Option<Expr>) -> IntExpr {
        let b = |e: &IntExpr| Box::new(e.subst(map));
        match self {
            IntExpr::Lit(n) => IntExpr::Lit(*n),
            IntExpr::Card(e) => IntExpr::Card(e.subst(map)),
            IntExpr::Bin(op, x, y) => IntExpr::Bin(*op, b(x), b(y)),
            IntExpr::Neg(x) => IntExpr::Neg(b(x)),
            IntExpr::FromRel(e) => IntExpr::FromRel(e.subst(map)),
            IntExpr::Sum(ds, x) => IntExpr::Sum(subst_decls(ds, map), b(x)),
            IntExpr::Ite(c, x, y) => IntExpr::Ite(Box::new(c.subst(map)), b(x), b(y)),
            IntExpr::Call(n, args) => IntExpr::Call(n.clone(), args.iter().map(|a| a.subst(map)).collect()),
        }
    }
}

impl Subst for Formula {
    fn subst(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Formula {
        let b = |f: &Formula| Box::new(f.subst(map));
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Not(f) => Formula::Not(b(f)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst(map)).collect()),
            Formula::Implies(x, y) => Formula::Implies(b(x), b(y)),
            Formula::Iff(x, y) => Formula::Iff(b(x), b(y)),
            Formula::Ite(c, x, y) => Formula::Ite(b(c), b(x), b(y)),
            Formula::In(x, y) => Formula::In(x.subst(map), y.subst(map)),
            Formula::Eq(x, y) => Formula::Eq(x.subst(map), y.subst(map)),
            Formula::IntCmp(op, x, y) => Formula::IntCmp(*op, x.subst(map), y.subst(map)),
            Formula::Mult(m, e) => Formula::Mult(*m, e.subst(map)),
            Formula::Quant(q, ds, f) => Formula::Quant(*q, subst_decls(ds, map), b(f)),
            Formula::Call(n, args) => Formula::Call(n.clone(), args.iter().map(|a| a.subst(map)).collect()),
        }
    }
}

/// Free variables, in order of first occurrence.
pub trait FreeVars {
    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut Vec<String>);

    fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }
}

fn decls_free_vars(ds: &[Decl], bound: &mut Vec<String>, out: &mut Vec<String>) -> usize {
    let n = bound.len();
    for d in ds {
        d.bound.free_vars_into(bound, out);
        bound.extend(d.vars.iter().cloned());
    }
    n
}

impl FreeVars for Expr {
    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match &self.kind {
            EK::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            EK::Ite(c, a, b) => {
                c.free_vars_into(bound, out);
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            EK::Compr(ds, f) => {
                let n = decls_free_vars(ds, bound, out);
                f.free_vars_into(bound, out);
                bound.truncate(n);
            }
            EK::IntAtom(i) => i.free_vars_into(bound, out),
            _ => {
                for c in self.children() {
                    c.free_vars_into(bound, out);
                }
            }
        }
    }
}

impl FreeVars for IntExpr {
    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            IntExpr::Lit(_) => {}
            IntExpr::Card(e) | IntExpr::FromRel(e) => e.free_vars_into(bound, out),
            IntExpr::Bin(_, a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            IntExpr::Neg(a) => a.free_vars_into(bound, out),
            IntExpr::Sum(ds, x) => {
                let n = decls_free_vars(ds, bound, out);
                x.free_vars_into(bound, out);
                bound.truncate(n);
            }
            IntExpr::Ite(c, a, b) => {
                c.free_vars_into(bound, out);
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            IntExpr::Call(_, args) => args.iter().for_each(|a| a.free_vars_into(bound, out)),
        }
    }
}

impl FreeVars for Formula {
    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Not(f) => f.free_vars_into(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.free_vars_into(bound, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::Ite(c, a, b) => {
                c.free_vars_into(bound, out);
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::In(a, b) | Formula::Eq(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::IntCmp(_, a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::Mult(_, e) => e.free_vars_into(bound, out),
            Formula::Quant(_, ds, f) => {
                let n = decls_free_vars(ds, bound, out);
                f.free_vars_into(bound, out);
                bound.truncate(n);
            }
            Formula::Call(_, args) => args.iter().for_each(|a| a.free_vars_into(bound, out)),
        }
    }
}

impl Formula {
    pub fn and(fs: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::And(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
}
