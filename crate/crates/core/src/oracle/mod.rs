//! Brute-force instance enumeration and relational evaluation, used as ground truth.

mod eval;

pub use eval::{closure, join, Evaluator, TupleSet};

use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::frontend::query::Query;
use crate::instance::{Atom, Instance, Tuple};
use std::collections::{BTreeMap, BTreeSet};

pub const DEFAULT_CAP: u64 = 10_000_000;

/// Largest candidate tuple set whose subsets are enumerated for one field of one atom.
const MAX_FIELD_CANDIDATES: usize = 20;

#[derive(Clone, Debug)]
pub enum Verdict {
    Sat(Instance),
    Unsat,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub verdict: Verdict,
    /// Number of complete candidate instances evaluated.
    pub candidates: u64,
}

impl OracleResult {
    pub fn is_sat(&self) -> bool {
        matches!(self.verdict, Verdict::Sat(_))
    }
}

fn within_scope(q: &Query, sig: &Sig, n: usize) -> bool {
    let sc = q.scope(&sig.name);
    let n = n as u32;
    let mult = match sig.mult {
        Some(Mult::One) => n == 1,
        Some(Mult::Lone) => n <= 1,
        Some(Mult::Some) => n >= 1,
        _ => true,
    };
    mult && n <= sc.size && (!sc.exact || n == sc.size)
}

/// All subsets of `items` with `min..=max` elements, smallest first, each in the original order.
fn subsets<T: Clone>(items: &[T], min: usize, max: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in min..=max.min(items.len()) {
        go(items, k, 0, &mut Vec::new(), &mut out);
    }
    out
}

enum Step<'a> {
    Top(&'a Sig),
    Children(&'a Sig, Vec<&'a Sig>),
    Subset(&'a Sig),
}

fn steps(m: &Model) -> Vec<Step<'_>> {
    let mut out = Vec::new();
    let mut queue: Vec<&Sig> = m.top_level().collect();
    out.extend(queue.iter().map(|s| Step::Top(s)));
    let mut i = 0;
    while i < queue.len() {
        let kids: Vec<&Sig> = m.children(&queue[i].name).collect();
        if !kids.is_empty() {
            out.push(Step::Children(queue[i], kids.clone()));
            queue.extend(kids);
        }
        i += 1;
    }
    let mut done: BTreeSet<&str> = queue.iter().map(|s| s.name.as_str()).collect();
    let mut pending: Vec<&Sig> = m.sigs.iter().filter(|s| matches!(s.parent, Parent::In(_))).collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|s| {
            let Parent::In(ps) = &s.parent else { return false };
            if ps.iter().all(|p| done.contains(p.as_str())) {
                out.push(Step::Subset(s));
                done.insert(&s.name);
                false
            } else {
                true
            }
        });
        if pending.len() == before {
            break;
        }
    }
    out
}

type Sigs = BTreeMap<String, Vec<Atom>>;

/// Every assignment of atoms to signatures consistent with the hierarchy and scopes.
fn sig_assignments(q: &Query) -> Vec<Sigs> {
    let m = &q.model;
    let mut states: Vec<Sigs> = vec![Sigs::new()];
    for step in steps(m) {
        let mut next = Vec::new();
        for st in states {
            match &step {
                Step::Top(s) => {
                    let c = q.scope(&s.name).size as usize;
                    for n in 0..=c {
                        if within_scope(q, s, n) {
                            let mut st = st.clone();
                            st.insert(s.name.clone(), (1..=n).map(|i| Atom::Name(format!("{}${i}", s.name))).collect());
                            next.push(st);
                        }
                    }
                }
                Step::Children(p, kids) => {
                    let atoms = &st[&p.name];
                    let choices = kids.len() + 1;
                    let total = (choices as u64).pow(atoms.len() as u32);
                    for code in 0..total {
                        let mut parts: Vec<Vec<Atom>> = vec![Vec::new(); choices];
                        let mut c = code;
                        for a in atoms {
                            parts[(c % choices as u64) as usize].push(a.clone());
                            c /= choices as u64;
                        }
                        if p.is_abstract && !parts[0].is_empty() {
                            continue;
                        }
                        if kids.iter().zip(&parts[1..]).all(|(k, v)| within_scope(q, k, v.len())) {
                            let mut st = st.clone();
                            for (k, v) in kids.iter().zip(parts.into_iter().skip(1)) {
                                st.insert(k.name.clone(), v);
                            }
                            next.push(st);
                        }
                    }
                }
                Step::Subset(s) => {
                    let Parent::In(ps) = &s.parent else { unreachable!() };
                    let mut pool: Vec<Atom> = Vec::new();
                    for p in ps {
                        for a in &st[p] {
                            if !pool.contains(a) {
                                pool.push(a.clone());
                            }
                        }
                    }
                    pool.sort();
                    for sub in subsets(&pool, 0, pool.len()) {
                        if within_scope(q, s, sub.len()) {
                            let mut st = st.clone();
                            st.insert(s.name.clone(), sub);
                            next.push(st);
                        }
                    }
                }
            }
        }
        states = next;
    }
    states
}

/// Fields in an order where each bound only mentions fields placed before it, when possible.
fn field_order(m: &Model) -> Vec<(&Field, bool)> {
    let mut placed: Vec<(&Field, bool)> = Vec::new();
    let mut rest: Vec<&Field> = m.fields.iter().collect();
    while !rest.is_empty() {
        let pos = rest.iter().position(|f| {
            let mut refs = Vec::new();
            collect_fields(&f.bound, &mut refs);
            refs.iter().all(|r| placed.iter().any(|(p, _)| p.name == *r))
        });
        match pos {
            Some(i) => placed.push((rest.remove(i), true)),
            None => placed.push((rest.remove(0), false)),
        }
    }
    placed
}

fn collect_fields(e: &Expr, out: &mut Vec<String>) {
    if let EK::Field(f) = &e.kind {
        out.push(f.clone());
    }
    for c in e.children() {
        collect_fields(c, out);
    }
}

struct Search<'a> {
    q: &'a Query,
    cap: u64,
    count: u64,
    fields: Vec<(&'a Field, bool)>,
    recheck: bool,
}

impl Search<'_> {
    fn leaf(&mut self, inst: &Instance) -> Result<bool> {
        self.count += 1;
        if self.count > self.cap {
            return Err(Error::Resource(format!("oracle search exceeds {} candidate instances", self.cap)));
        }
        let ev = Evaluator::new(&self.q.model, inst);
        if self.recheck && !field_violations(&self.q.model, &ev, inst)?.is_empty() {
            return Ok(false);
        }
        ev.formula(&self.q.goal)
    }

    /// Candidate extents of field `fi` for owner atom `oi`.
    fn options(&self, inst: &Instance, fi: usize, owner: &Atom) -> Result<Vec<TupleSet>> {
        let (f, ordered) = self.fields[fi];
        let ev = Evaluator::new(&self.q.model, inst);
        let ub: Vec<Tuple> = if ordered {
            ev.expr_with("this", owner, &f.bound)?.into_iter().collect()
        } else {
            let atoms: Vec<Atom> = inst.sig_atoms.iter().filter(|(s, _)| self.q.model.sig(s).map(|s| s.parent == Parent::Top).unwrap_or(false)).flat_map(|(_, a)| a.iter().cloned()).collect();
            let mut ts: Vec<Tuple> = vec![vec![]];
            for _ in 0..f.bound.arity {
                ts = ts.into_iter().flat_map(|t| atoms.iter().map(move |a| [t.clone(), vec![a.clone()]].concat())).collect();
            }
            ts
        };
        if ub.len() > MAX_FIELD_CANDIDATES {
            return Err(Error::Resource(format!(
                "field `{}` has {} candidate tuples per atom; the oracle enumerates at most {MAX_FIELD_CANDIDATES}",
                f.name,
                ub.len()
            )));
        }
        let (lo, hi) = match (f.bound.arity, f.mult) {
            (1, Mult::One) => (1, 1),
            (1, Mult::Lone) => (0, 1),
            (1, Mult::Some) => (1, ub.len()),
            _ => (0, ub.len()),
        };
        let mut out = Vec::new();
        for s in subsets(&ub, lo, hi.min(ub.len())) {
            let s: TupleSet = s.into_iter().collect();
            if !ordered || ev.in_decl_with("this", owner, &s, &f.bound)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Depth-first over fields and owners; returns a satisfying instance if one exists.
    fn fields_from(&mut self, inst: &mut Instance, fi: usize, oi: usize) -> Result<bool> {
        if fi == self.fields.len() {
            return self.leaf(inst);
        }
        let f = self.fields[fi].0;
        let owners = inst.sig_atoms[&f.owner].iter().cloned().collect::<Vec<_>>();
        if oi == owners.len() {
            return self.fields_from(inst, fi + 1, 0);
        }
        let owner = &owners[oi];
        for opt in self.options(inst, fi, owner)? {
            let prev = inst.field_tuples[&f.name].clone();
            inst.field_tuples.get_mut(&f.name).unwrap().extend(opt.into_iter().map(|t| [vec![owner.clone()], t].concat()));
            if self.fields_from(inst, fi, oi + 1)? {
                return Ok(true);
            }
            inst.field_tuples.insert(f.name.clone(), prev);
        }
        Ok(false)
    }
}

/// Searches all instances of the query's scopes for one satisfying its goal.
pub fn enumerate(q: &Query, cap: u64) -> Result<OracleResult> {
    let fields = field_order(&q.model);
    let recheck = fields.iter().any(|(_, ordered)| !ordered);
    let mut search = Search { q, cap, count: 0, fields, recheck };
    for sigs in sig_assignments(q) {
        let mut inst = Instance { bitwidth: q.bitwidth, ..Instance::default() };
        for s in &q.model.sigs {
            if s.ordered {
                inst.orderings.insert(s.name.clone(), sigs[&s.name].clone());
            }
        }
        inst.sig_atoms = sigs.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
        for f in &q.model.fields {
            inst.field_tuples.insert(f.name.clone(), TupleSet::new());
        }
        if search.fields_from(&mut inst, 0, 0)? {
            return Ok(OracleResult { verdict: Verdict::Sat(inst), candidates: search.count });
        }
    }
    Ok(OracleResult { verdict: Verdict::Unsat, candidates: search.count })
}

fn field_violations(m: &Model, ev: &Evaluator, inst: &Instance) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for f in &m.fields {
        let Some(ts) = inst.field_tuples.get(&f.name) else {
            out.push(format!("field `{}` missing", f.name));
            continue;
        };
        let owners = inst.sig_atoms.get(&f.owner).cloned().unwrap_or_default();
        if let Some(t) = ts.iter().find(|t| t.len() != f.arity() || !owners.contains(&t[0])) {
            out.push(format!("tuple {t:?} of `{}` outside its owner `{}`", f.name, f.owner));
        }
        for a in &owners {
            let s: TupleSet = ts.iter().filter(|t| t[0] == *a).map(|t| t[1..].to_vec()).collect();
            let mult = f.bound.arity != 1
                || match f.mult {
                    Mult::One => s.len() == 1,
                    Mult::Lone => s.len() <= 1,
                    Mult::Some => !s.is_empty(),
                    Mult::Set => true,
                };
            if !mult || !ev.in_decl_with("this", a, &s, &f.bound)? {
                out.push(format!("field `{}` violates its declaration at {a}", f.name));
            }
        }
    }
    Ok(out)
}

/// Every way `inst` fails to be an instance of the query satisfying its goal; empty when valid.
pub fn check_instance(q: &Query, inst: &Instance) -> Result<Vec<String>> {
    let m = &q.model;
    let mut out = Vec::new();
    let empty = BTreeSet::new();
    let atoms = |s: &str| inst.sig_atoms.get(s).unwrap_or(&empty);
    for s in &m.sigs {
        if !inst.sig_atoms.contains_key(&s.name) {
            out.push(format!("signature `{}` missing", s.name));
            continue;
        }
        let mine = atoms(&s.name);
        if !within_scope(q, s, mine.len()) {
            out.push(format!("signature `{}` has {} atoms, outside its scope or multiplicity", s.name, mine.len()));
        }
        match &s.parent {
            Parent::Top => {}
            Parent::Extends(p) if !mine.is_subset(atoms(p)) => out.push(format!("`{}` not within its parent `{p}`", s.name)),
            Parent::In(ps) if !mine.iter().all(|a| ps.iter().any(|p| atoms(p).contains(a))) => {
                out.push(format!("`{}` not within its parents", s.name))
            }
            _ => {}
        }
        let kids: Vec<&Sig> = m.children(&s.name).collect();
        for (i, a) in kids.iter().enumerate() {
            for b in &kids[i + 1..] {
                if !atoms(&a.name).is_disjoint(atoms(&b.name)) {
                    out.push(format!("siblings `{}` and `{}` overlap", a.name, b.name));
                }
            }
        }
        if s.is_abstract && !kids.is_empty() {
            let covered: BTreeSet<&Atom> = kids.iter().flat_map(|k| atoms(&k.name)).collect();
            if mine.iter().any(|a| !covered.contains(a)) {
                out.push(format!("abstract `{}` has atoms outside its children", s.name));
            }
        }
        if s.ordered {
            let ord = inst.orderings.get(&s.name).cloned().unwrap_or_default();
            let set: BTreeSet<Atom> = ord.iter().cloned().collect();
            if set.len() != ord.len() || set != *mine {
                out.push(format!("ordering of `{}` is not a permutation of its atoms", s.name));
            }
        }
    }
    let tops: Vec<&Sig> = m.top_level().collect();
    for (i, a) in tops.iter().enumerate() {
        for b in &tops[i + 1..] {
            if !atoms(&a.name).is_disjoint(atoms(&b.name)) {
                out.push(format!("top-level `{}` and `{}` overlap", a.name, b.name));
            }
        }
    }
    if !out.is_empty() {
        return Ok(out);
    }
    let ev = Evaluator::new(m, inst);
    out.extend(field_violations(m, &ev, inst)?);
    if out.is_empty() && !ev.formula(&q.goal)? {
        out.push("goal is false".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
