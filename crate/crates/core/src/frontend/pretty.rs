//! Fully parenthesised printer that re-parses to an alpha-equivalent model.

use super::ast::*;
use std::fmt::{self, Display, Formatter, Write};

fn join<T: Display>(xs: &[T], sep: &str) -> String {
    let mut s = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push_str(sep);
        }
        write!(s, "{x}").unwrap();
    }
    s
}

impl Display for Decl {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}{}", self.vars.join(", "), if self.disj { "disj " } else { "" }, self.bound)
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EK::Sig(n) => write!(f, "{n}"),
            EK::Field(n) => write!(f, "@{n}"),
            EK::Var(v) => write!(f, "{v}"),
            EK::Univ => write!(f, "univ"),
            EK::Iden => write!(f, "iden"),
            EK::None => {
                if self.arity == 1 {
                    write!(f, "none")
                } else {
                    write!(f, "(none")?;
                    for _ in 1..self.arity {
                        write!(f, " -> none")?;
                    }
                    write!(f, ")")
                }
            }
            EK::IntSig => write!(f, "Int"),
            EK::Ord(r, sig) => write!(f, "{}", ord_name(*r, sig)),
            EK::Union(a, b) => write!(f, "({a} + {b})"),
            EK::Diff(a, b) => write!(f, "({a} - {b})"),
            EK::Inter(a, b) => write!(f, "({a} & {b})"),
            EK::Override(a, b) => write!(f, "({a} ++ {b})"),
            EK::Join(a, b) => write!(f, "({a} . {b})"),
            EK::Product(a, l, r, b) => {
                let l = l.map(|m| format!(" {}", m.text())).unwrap_or_default();
                let r = r.map(|m| format!("{} ", m.text())).unwrap_or_default();
                write!(f, "({a}{l} -> {r}{b})")
            }
            EK::DomR(a, b) => write!(f, "({a} <: {b})"),
            EK::RanR(a, b) => write!(f, "({a} :> {b})"),
            EK::Transpose(a) => write!(f, "(~{a})"),
            EK::Closure(a) => write!(f, "(^{a})"),
            EK::RClosure(a) => write!(f, "(*{a})"),
            EK::Ite(c, a, b) => write!(f, "({c} => {a} else {b})"),
            EK::Compr(ds, body) => write!(f, "{{{} | {body}}}", join(ds, ", ")),
            EK::Call(n, args) => write!(f, "({n}[{}])", join(args, ", ")),
            EK::IntAtom(i) => write!(f, "Int[{i}]"),
        }
    }
}

// Ordering aliases of the model being printed.
thread_local! {
    static ALIASES: std::cell::RefCell<Vec<(String, Option<String>)>> = const { std::cell::RefCell::new(Vec::new()) };
}

fn ord_name(r: OrdRel, sig: &str) -> String {
    ALIASES.with(|a| {
        let a = a.borrow();
        match a.iter().find(|(s, _)| s == sig) {
            Some((_, Some(alias))) => format!("{alias}/{}", r.name()),
            _ => r.name().to_string(),
        }
    })
}

impl Display for IntExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            IntExpr::Lit(n) if *n < 0 => write!(f, "(-{})", -n),
            IntExpr::Lit(n) => write!(f, "{n}"),
            IntExpr::Card(e) => write!(f, "(#{e})"),
            IntExpr::Bin(op, a, b) => {
                let n = match op {
                    IntOp::Add => "plus",
                    IntOp::Sub => "minus",
                    IntOp::Mul => "mul",
                    IntOp::Div => "div",
                    IntOp::Rem => "rem",
                };
                write!(f, "{n}[{a}, {b}]")
            }
            IntExpr::Neg(a) => write!(f, "negate[{a}]"),
            IntExpr::FromRel(e) => write!(f, "int[{e}]"),
            IntExpr::Sum(ds, b) => write!(f, "(sum {} | {b})", join(ds, ", ")),
            IntExpr::Ite(c, a, b) => write!(f, "({c} => {a} else {b})"),
            IntExpr::Call(n, args) => write!(f, "({n}[{}])", join(args, ", ")),
        }
    }
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "{{}}"),
            Formula::False => write!(f, "(!{{}})"),
            Formula::Not(a) => write!(f, "(!{a})"),
            Formula::And(fs) => write!(f, "{{ {} }}", join(fs, " ")),
            Formula::Or(fs) => write!(f, "({})", join(fs, " or ")),
            Formula::Implies(a, b) => write!(f, "({a} => {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <=> {b})"),
            Formula::Ite(c, a, b) => write!(f, "({c} => {a} else {b})"),
            Formula::In(a, b) => write!(f, "({a} in {b})"),
            Formula::Eq(a, b) => write!(f, "({a} = {b})"),
            Formula::IntCmp(op, a, b) => {
                let o = match op {
                    CmpOp::Eq => "=",
                    CmpOp::Lt => "<",
                    CmpOp::Gt => ">",
                    CmpOp::Le => "=<",
                    CmpOp::Ge => ">=",
                };
                write!(f, "({a} {o} {b})")
            }
            Formula::Mult(m, e) => {
                let k = match m {
                    MultOp::No => "no",
                    MultOp::Some => "some",
                    MultOp::Lone => "lone",
                    MultOp::One => "one",
                };
                write!(f, "({k} {e})")
            }
            Formula::Quant(q, ds, body) => {
                let k = match q {
                    Quant::All => "all",
                    Quant::Some => "some",
                    Quant::No => "no",
                    Quant::One => "one",
                    Quant::Lone => "lone",
                };
                write!(f, "({k} {} | {body})", join(ds, ", "))
            }
            Formula::Call(n, args) => write!(f, "{n}[{}]", join(args, ", ")),
        }
    }
}

/// Renders a whole model as source text.
pub fn print_model(m: &Model) -> String {
    ALIASES.with(|a| *a.borrow_mut() = m.orderings.iter().map(|o| (o.sig.clone(), o.alias.clone())).collect());
    let mut s = String::new();
    for o in &m.orderings {
        write!(s, "open util/ordering[{}]", o.sig).unwrap();
        if let Some(a) = &o.alias {
            write!(s, " as {a}").unwrap();
        }
        s.push('\n');
    }
    for sig in &m.sigs {
        if sig.is_abstract {
            s.push_str("abstract ");
        }
        if let Some(mu) = sig.mult {
            write!(s, "{} ", mu.text()).unwrap();
        }
        write!(s, "sig {}", sig.name).unwrap();
        match &sig.parent {
            Parent::Top => {}
            Parent::Extends(p) => write!(s, " extends {p}").unwrap(),
            Parent::In(ps) => write!(s, " in {}", ps.join(" + ")).unwrap(),
        }
        s.push_str(" {");
        for (i, fname) in sig.fields.iter().enumerate() {
            let fd = m.field(fname).unwrap();
            let mult = if fd.bound.arity == 1 { format!("{} ", fd.mult.text()) } else { String::new() };
            write!(s, "{}\n  {}: {}{}", if i > 0 { "," } else { "" }, fd.name, mult, fd.bound).unwrap();
        }
        s.push_str(if sig.fields.is_empty() { "}\n" } else { "\n}\n" });
    }
    for f in &m.facts {
        writeln!(s, "fact {{ {f} }}").unwrap();
    }
    for d in &m.defs {
        let params: Vec<String> = d
            .params
            .iter()
            .map(|p| {
                let mu = p.mult.map(|m| format!("{} ", m.text())).unwrap_or_default();
                format!("{}: {mu}{}", p.name, p.bound)
            })
            .collect();
        match (&d.ret, &d.body) {
            (None, Body::Formula(b)) => writeln!(s, "pred {}[{}] {{ {b} }}", d.name, params.join(", ")).unwrap(),
            (Some((mu, r)), body) => {
                let mu = mu.map(|m| format!("{} ", m.text())).unwrap_or_default();
                let b = match body {
                    Body::Rel(e) => e.to_string(),
                    Body::Int(i) => i.to_string(),
                    Body::Formula(f) => f.to_string(),
                };
                writeln!(s, "fun {}[{}]: {mu}{r} {{ {b} }}", d.name, params.join(", ")).unwrap()
            }
            _ => {}
        }
    }
    for c in &m.commands {
        write!(s, "{}: {} {{ {} }}", c.name, if c.check { "check" } else { "run" }, c.body).unwrap();
        let mut items: Vec<String> =
            c.scopes.iter().map(|d| format!("{}{} {}", if d.exact { "exactly " } else { "" }, d.size, d.sig)).collect();
        if let Some(b) = c.bitwidth {
            items.push(format!("{b} Int"));
        }
        match (c.default_scope, items.is_empty()) {
            (Some(n), true) => write!(s, " for {n}").unwrap(),
            (Some(n), false) => write!(s, " for {n} but {}", items.join(", ")).unwrap(),
            (None, false) => write!(s, " for {}", items.join(", ")).unwrap(),
            (None, true) => {}
        }
        s.push('\n');
    }
    s
}
