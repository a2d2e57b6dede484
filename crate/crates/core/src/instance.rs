//! Alloy-level instances: atoms per signature and tuples per field.

use crate::error::{Error, Result};
use crate::ir::{Extraction, FieldRows, Term, Val};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// An atom: a named element of a sort, or an integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Atom {
    Int(i64),
    Name(String),
}

impl Atom {
    pub fn name(s: impl Into<String>) -> Atom {
        Atom::Name(s.into())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(n) => write!(f, "{n}"),
            Atom::Name(s) => f.write_str(s),
        }
    }
}

impl From<&Val> for Atom {
    fn from(v: &Val) -> Atom {
        match v {
            Val::U(s, i) => Atom::Name(format!("{s}${i}")),
            Val::I(n) => Atom::Int(*n),
        }
    }
}

pub type Tuple = Vec<Atom>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Instance {
    pub sig_atoms: BTreeMap<String, BTreeSet<Atom>>,
    pub field_tuples: BTreeMap<String, BTreeSet<Tuple>>,
    /// Atoms of each ordered signature, first to last.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub orderings: BTreeMap<String, Vec<Atom>>,
    pub bitwidth: u32,
}

fn atom_of(t: &Term) -> Result<Atom> {
    match t {
        Term::Elem(s, i) => Ok(Atom::Name(format!("{s}${i}"))),
        Term::Int(n) => Ok(Atom::Int(*n)),
        t => Err(Error::ModelParse(format!("expected a domain element or integer, found {t}"))),
    }
}

fn holds(t: Term) -> Result<bool> {
    match t {
        Term::Bool(b) => Ok(b),
        t => Err(Error::ModelParse(format!("expected a truth value, found {t}"))),
    }
}

impl Instance {
    /// Reads an instance off the extraction terms, using `value` to evaluate each term.
    pub fn extract(ex: &Extraction, bitwidth: u32, mut value: impl FnMut(&Term) -> Result<Term>) -> Result<Instance> {
        let mut inst = Instance { bitwidth, ..Instance::default() };
        for (sig, rows) in &ex.sigs {
            let set = inst.sig_atoms.entry(sig.clone()).or_default();
            for (v, t) in rows {
                if holds(value(t)?)? {
                    set.insert(Atom::from(v));
                }
            }
        }
        for (f, rows) in &ex.fields {
            let set = inst.field_tuples.entry(f.clone()).or_default();
            match rows {
                FieldRows::Pred(rs) => {
                    for (vs, t) in rs {
                        if holds(value(t)?)? {
                            set.insert(vs.iter().map(Atom::from).collect());
                        }
                    }
                }
                FieldRows::Func(rs) => {
                    for (vs, guard, v) in rs {
                        if holds(value(guard)?)? {
                            let mut tup: Tuple = vs.iter().map(Atom::from).collect();
                            tup.push(atom_of(&value(v)?)?);
                            set.insert(tup);
                        }
                    }
                }
            }
        }
        for (sig, vs) in &ex.orderings {
            inst.orderings.insert(sig.clone(), vs.iter().map(Atom::from).collect());
        }
        Ok(inst)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple = |t: &Tuple| t.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("->");
        for (s, atoms) in &self.sig_atoms {
            writeln!(f, "{s} = {{{}}}", atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", "))?;
        }
        for (n, ts) in &self.field_tuples {
            writeln!(f, "{n} = {{{}}}", ts.iter().map(tuple).collect::<Vec<_>>().join(", "))?;
        }
        Ok(())
    }
}
