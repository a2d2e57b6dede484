//! Many-sorted first-order intermediate representation.

mod alpha;
mod check;
pub mod print;

pub use alpha::alpha_equivalent;
pub use check::{sort_of, well_sorted, SortError};
pub use print::print_theory;

use serde::Serialize;
use std::fmt;
use std::sync::Arc;

pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sort {
    Int,
    U(Sym),
}

impl Sort {
    pub fn named(s: &str) -> Sort {
        Sort::U(sym(s))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => write!(f, "Int"),
            Sort::U(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Lt,
    Le,
}

pub type Binder = (Sym, Sort);

/// Integer operations wrap around at the theory bitwidth; `x div 0 = 0` and `x rem 0 = x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Sym, Sort),
    /// Domain element `index` (1-based) of an uninterpreted sort.
    Elem(Sym, u32),
    Int(i64),
    Bool(bool),
    App(Sym, Vec<Term>),
    Eq(Box<Term>, Box<Term>),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Iff(Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Forall(Vec<Binder>, Box<Term>),
    Exists(Vec<Binder>, Box<Term>),
    /// Transitive (or reflexive-transitive) closure of the binary definition `def`
    /// applied to `(x, y)` with trailing arguments.
    Closure { reflexive: bool, def: Sym, x: Box<Term>, y: Box<Term>, args: Vec<Term> },
    IntBin(IntOp, Box<Term>, Box<Term>),
    Cmp(Cmp, Box<Term>, Box<Term>),
    Sum(Vec<Term>),
}

pub use Term::Bool;

pub const TRUE: Term = Term::Bool(true);
pub const FALSE: Term = Term::Bool(false);

impl Term {
    pub fn var(name: &Sym, sort: &Sort) -> Term {
        Term::Var(name.clone(), sort.clone())
    }

    pub fn elem(sort: &Sym, i: u32) -> Term {
        Term::Elem(sort.clone(), i)
    }

    pub fn app(f: &Sym, args: Vec<Term>) -> Term {
        Term::App(f.clone(), args)
    }

    pub fn is_true(&self) -> bool {
        *self == TRUE
    }

    pub fn is_false(&self) -> bool {
        *self == FALSE
    }

    pub fn and(ts: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in ts {
            match t {
                Term::Bool(true) => {}
                Term::Bool(false) => return FALSE,
                Term::And(xs) => out.extend(xs),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => TRUE,
            1 => out.pop().unwrap(),
            _ => Term::And(out),
        }
    }

    pub fn or(ts: impl IntoIterator<Item = Term>) -> Term {
        let mut out = Vec::new();
        for t in ts {
            match t {
                Term::Bool(false) => {}
                Term::Bool(true) => return TRUE,
                Term::Or(xs) => out.extend(xs),
                t => out.push(t),
            }
        }
        match out.len() {
            0 => FALSE,
            1 => out.pop().unwrap(),
            _ => Term::Or(out),
        }
    }

    pub fn not(t: Term) -> Term {
        match t {
            Term::Bool(b) => Term::Bool(!b),
            Term::Not(x) => *x,
            t => Term::Not(Box::new(t)),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Bool(false), _) | (_, Term::Bool(true)) => TRUE,
            (Term::Bool(true), _) => b,
            (_, Term::Bool(false)) => Term::not(a),
            _ => Term::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn iff(a: Term, b: Term) -> Term {
        match (&a, &b) {
            (Term::Bool(true), _) => b,
            (_, Term::Bool(true)) => a,
            (Term::Bool(false), _) => Term::not(b),
            (_, Term::Bool(false)) => Term::not(a),
            _ if a == b => TRUE,
            _ => Term::Iff(Box::new(a), Box::new(b)),
        }
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        match c {
            Term::Bool(true) => a,
            Term::Bool(false) => b,
            c if a == b => {
                let _ = c;
                a
            }
            c => match (&a, &b) {
                (Term::Bool(true), Term::Bool(false)) => c,
                (Term::Bool(false), Term::Bool(true)) => Term::not(c),
                (Term::Bool(true), _) => Term::or([c, b]),
                (Term::Bool(false), _) => Term::and([Term::not(c), b]),
                (_, Term::Bool(true)) => Term::or([Term::not(c), a]),
                (_, Term::Bool(false)) => Term::and([c, a]),
                _ => Term::Ite(Box::new(c), Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn eq(a: Term, b: Term) -> Term {
        if a == b {
            return TRUE;
        }
        match (&a, &b) {
            (Term::Elem(s, i), Term::Elem(t, j)) if s == t && i != j => FALSE,
            (Term::Int(i), Term::Int(j)) if i != j => FALSE,
            (Term::Bool(_), _) | (_, Term::Bool(_)) => Term::iff(a, b),
            _ => Term::Eq(Box::new(a), Box::new(b)),
        }
    }

    pub fn forall(vs: Vec<Binder>, body: Term) -> Term {
        if vs.is_empty() || matches!(body, Term::Bool(_)) {
            return body;
        }
        Term::Forall(vs, Box::new(body))
    }

    pub fn exists(vs: Vec<Binder>, body: Term) -> Term {
        if vs.is_empty() || matches!(body, Term::Bool(_)) {
            return body;
        }
        Term::Exists(vs, Box::new(body))
    }

    pub fn int_bin(op: IntOp, a: Term, b: Term) -> Term {
        Term::IntBin(op, Box::new(a), Box::new(b))
    }

    pub fn cmp(op: Cmp, a: Term, b: Term) -> Term {
        Term::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn sum(ts: Vec<Term>) -> Term {
        let ts: Vec<Term> = ts.into_iter().filter(|t| *t != Term::Int(0)).collect();
        if ts.is_empty() {
            return Term::Int(0);
        }
        Term::Sum(ts)
    }

    /// Replaces free variables; binder names are globally unique so no capture can occur.
    pub fn subst(&self, map: &dyn Fn(&Sym) -> Option<Term>) -> Term {
        let s = |t: &Term| t.subst(map);
        let b = |t: &Term| Box::new(t.subst(map));
        match self {
            Term::Var(v, _) => map(v).unwrap_or_else(|| self.clone()),
            Term::Elem(..) | Term::Int(_) | Term::Bool(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(s).collect()),
            Term::Eq(a, c) => Term::Eq(b(a), b(c)),
            Term::Not(a) => Term::Not(b(a)),
            Term::And(xs) => Term::And(xs.iter().map(s).collect()),
            Term::Or(xs) => Term::Or(xs.iter().map(s).collect()),
            Term::Implies(a, c) => Term::Implies(b(a), b(c)),
            Term::Iff(a, c) => Term::Iff(b(a), b(c)),
            Term::Ite(c, x, y) => Term::Ite(b(c), b(x), b(y)),
            Term::Forall(vs, body) => Term::Forall(vs.clone(), b(body)),
            Term::Exists(vs, body) => Term::Exists(vs.clone(), b(body)),
            Term::Closure { reflexive, def, x, y, args } => Term::Closure {
                reflexive: *reflexive,
                def: def.clone(),
                x: b(x),
                y: b(y),
                args: args.iter().map(s).collect(),
            },
            Term::IntBin(op, x, y) => Term::IntBin(*op, b(x), b(y)),
            Term::Cmp(op, x, y) => Term::Cmp(*op, b(x), b(y)),
            Term::Sum(xs) => Term::Sum(xs.iter().map(s).collect()),
        }
    }

    /// Substitutes the listed variables by terms.
    pub fn subst_vars(&self, pairs: &[(Sym, Term)]) -> Term {
        if pairs.is_empty() {
            return self.clone();
        }
        self.subst(&|v| pairs.iter().find(|(k, _)| k == v).map(|(_, t)| t.clone()))
    }

    pub fn contains_var(&self, v: &Sym) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if let Term::Var(x, _) = t {
                if x == v {
                    found = true;
                }
            }
        });
        found
    }

    /// Pre-order traversal of all subterms.
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Var(..) | Term::Elem(..) | Term::Int(_) | Term::Bool(_) => {}
            Term::App(_, xs) | Term::And(xs) | Term::Or(xs) | Term::Sum(xs) => xs.iter().for_each(|x| x.visit(f)),
            Term::Eq(a, b) | Term::Implies(a, b) | Term::Iff(a, b) | Term::IntBin(_, a, b) | Term::Cmp(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Not(a) => a.visit(f),
            Term::Ite(c, a, b) => {
                c.visit(f);
                a.visit(f);
                b.visit(f);
            }
            Term::Forall(_, b) | Term::Exists(_, b) => b.visit(f),
            Term::Closure { x, y, args, .. } => {
                x.visit(f);
                y.visit(f);
                args.iter().for_each(|a| a.visit(f));
            }
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Ret {
    Bool,
    Sort(Sort),
}

impl fmt::Display for Ret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ret::Bool => write!(f, "Bool"),
            Ret::Sort(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncDecl {
    pub name: Sym,
    pub args: Vec<Sort>,
    pub ret: Ret,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuncDef {
    pub name: Sym,
    pub params: Vec<Binder>,
    pub ret: Ret,
    pub body: Term,
}

/// Element of an extracted instance: a domain element or an integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Val {
    U(Sym, u32),
    I(i64),
}

impl Val {
    pub fn term(&self) -> Term {
        match self {
            Val::U(s, i) => Term::Elem(s.clone(), *i),
            Val::I(n) => Term::Int(*n),
        }
    }
}

#[derive(Clone, Debug)]
pub enum FieldRows {
    /// Membership formula per candidate tuple.
    Pred(Vec<(Vec<Val>, Term)>),
    /// Domain guard and value per argument tuple of a function-encoded field.
    Func(Vec<(Vec<Val>, Term, Term)>),
}

/// Ground terms whose values determine an Alloy instance.
#[derive(Clone, Debug, Default)]
pub struct Extraction {
    pub sigs: Vec<(String, Vec<(Val, Term)>)>,
    pub fields: Vec<(String, FieldRows)>,
    pub orderings: Vec<(String, Vec<Val>)>,
}

#[derive(Clone, Debug, Default)]
pub struct Theory {
    pub sorts: Vec<(Sym, u32)>,
    pub bitwidth: u32,
    pub consts: Vec<(Sym, Sort)>,
    pub funcs: Vec<FuncDecl>,
    pub defs: Vec<FuncDef>,
    pub axioms: Vec<Term>,
    pub extraction: Extraction,
}

impl Theory {
    pub fn sort_size(&self, s: &Sort) -> u64 {
        match s {
            Sort::Int => 1u64 << self.bitwidth,
            Sort::U(n) => self.sorts.iter().find(|(m, _)| m == n).map(|(_, k)| *k as u64).unwrap_or(0),
        }
    }

    pub fn min_int(&self) -> i64 {
        -(1i64 << (self.bitwidth - 1))
    }

    pub fn max_int(&self) -> i64 {
        (1i64 << (self.bitwidth - 1)) - 1
    }

    /// All values of a sort, in index order (integers ascending).
    pub fn elements(&self, s: &Sort) -> Vec<Term> {
        match s {
            Sort::Int => (self.min_int()..=self.max_int()).map(Term::Int).collect(),
            Sort::U(n) => (1..=self.sort_size(s) as u32).map(|i| Term::Elem(n.clone(), i)).collect(),
        }
    }

    pub fn def(&self, name: &str) -> Option<&FuncDef> {
        self.defs.iter().find(|d| &*d.name == name)
    }

    pub fn func(&self, name: &str) -> Option<&FuncDecl> {
        self.funcs.iter().find(|d| &*d.name == name)
    }

    pub fn const_sort(&self, name: &str) -> Option<&Sort> {
        self.consts.iter().find(|(n, _)| &**n == name).map(|(_, s)| s)
    }
}

/// Two's-complement wraparound at `bits`.
pub fn wrap(v: i64, bits: u32) -> i64 {
    let m = 1i128 << bits;
    let h = 1i128 << (bits - 1);
    ((((v as i128) + h).rem_euclid(m)) - h) as i64
}

/// Integer operation with the wraparound semantics of the IR.
pub fn int_op(op: IntOp, a: i64, b: i64, bits: u32) -> i64 {
    let r = match op {
        IntOp::Add => a.wrapping_add(b),
        IntOp::Sub => a.wrapping_sub(b),
        IntOp::Mul => a.wrapping_mul(b),
        IntOp::Div => {
            if b == 0 {
                0
            } else {
                a.wrapping_div(b)
            }
        }
        IntOp::Rem => {
            if b == 0 {
                a
            } else {
                a.wrapping_rem(b)
            }
        }
    };
    wrap(r, bits)
}
