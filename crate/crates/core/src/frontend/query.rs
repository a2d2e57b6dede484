use super::ast::*;
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

pub const DEFAULT_SCOPE: u32 = 3;
pub const DEFAULT_BITWIDTH: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Scope {
    pub size: u32,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub enum Selector {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for Selector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Selector::Index(i),
            Err(_) => Selector::Name(s.to_string()),
        })
    }
}

/// A model together with one selected command.
#[derive(Clone, Debug)]
pub struct Query {
    pub model: Arc<Model>,
    pub command: usize,
    /// Facts conjoined with the run body or the negated assertion.
    pub goal: Formula,
    pub scopes: BTreeMap<String, Scope>,
    pub bitwidth: u32,
}

impl Query {
    pub fn scope(&self, sig: &str) -> Scope {
        self.scopes[sig]
    }

    pub fn cmd(&self) -> &Command {
        &self.model.commands[self.command]
    }
}

pub fn select_command(model: &Arc<Model>, selector: &Selector) -> Result<Query> {
    let idx = match selector {
        Selector::Index(i) if *i < model.commands.len() => *i,
        Selector::Index(i) => {
            return Err(Error::NotFound(format!("command {i} (model has {})", model.commands.len())))
        }
        Selector::Name(n) => model
            .commands
            .iter()
            .position(|c| c.name == *n)
            .ok_or_else(|| Error::NotFound(format!("command `{n}`")))?,
    };
    let cmd = &model.commands[idx];
    let mut goal: Vec<Formula> = model.facts.clone();
    goal.push(if cmd.check { Formula::not(cmd.body.clone()) } else { cmd.body.clone() });
    let scopes = resolve_scopes(model, cmd)?;
    let bitwidth = cmd.bitwidth.unwrap_or(DEFAULT_BITWIDTH);
    if bitwidth == 0 || bitwidth > 30 {
        return Err(Error::Scope { span: Some(cmd.span), message: format!("unsupported bitwidth {bitwidth}") });
    }
    Ok(Query { model: model.clone(), command: idx, goal: Formula::and(goal), scopes, bitwidth })
}

fn scope_err(d: &ScopeDecl, message: String) -> Error {
    Error::Scope { span: Some(d.span), message }
}

fn resolve_scopes(model: &Model, cmd: &Command) -> Result<BTreeMap<String, Scope>> {
    let default = cmd.default_scope.unwrap_or(DEFAULT_SCOPE);
    let stated: BTreeMap<&str, &ScopeDecl> = cmd.scopes.iter().map(|d| (d.sig.as_str(), d)).collect();
    for d in &cmd.scopes {
        let sig = model.sig(&d.sig).unwrap();
        if sig.mult == Some(Mult::One) && d.size != 1 {
            return Err(scope_err(d, format!("`one sig {}` must have scope 1", d.sig)));
        }
        if sig.mult == Some(Mult::Lone) && d.size > 1 {
            return Err(scope_err(d, format!("`lone sig {}` cannot have scope {}", d.sig, d.size)));
        }
        if sig.mult == Some(Mult::Some) && d.size == 0 {
            return Err(scope_err(d, format!("`some sig {}` cannot have scope 0", d.sig)));
        }
    }

    // minimum number of atoms a signature must hold
    fn min_size(model: &Model, stated: &BTreeMap<&str, &ScopeDecl>, name: &str) -> u32 {
        let sig = model.sig(name).unwrap();
        let mut m: u32 = model.children(name).map(|c| min_size(model, stated, &c.name)).sum();
        if let Some(d) = stated.get(name) {
            if d.exact {
                m = m.max(d.size);
            }
        }
        if matches!(sig.mult, Some(Mult::One | Mult::Some)) {
            m = m.max(1);
        }
        m
    }

    let mut out: BTreeMap<String, Scope> = BTreeMap::new();
    // top-down over the extends forest, then subset sigs
    let mut order: Vec<&Sig> = model.top_level().collect();
    let mut i = 0;
    while i < order.len() {
        let kids: Vec<&Sig> = model.children(&order[i].name).collect();
        order.extend(kids);
        i += 1;
    }
    for s in &order {
        let name = s.name.as_str();
        let mut sc = match (stated.get(name), &s.parent) {
            (Some(d), _) => Scope { size: d.size, exact: d.exact },
            (None, _) if s.mult == Some(Mult::One) => Scope { size: 1, exact: true },
            (None, Parent::Top) => {
                let size = default.max(min_size(model, &stated, name));
                Scope { size: if s.mult == Some(Mult::Lone) { size.min(1) } else { size }, exact: false }
            }
            (None, Parent::Extends(p)) => {
                let size = out[p.as_str()].size;
                Scope { size: if s.mult == Some(Mult::Lone) { size.min(1) } else { size }, exact: false }
            }
            (None, Parent::In(_)) => unreachable!(),
        };
        if s.mult == Some(Mult::One) {
            sc.exact = true;
        }
        if s.ordered {
            sc.exact = true;
        }
        if let Parent::Extends(p) = &s.parent {
            let ps = out[p.as_str()];
            if sc.size > ps.size {
                let d = stated.get(name).copied();
                let message = format!("scope {} of `{name}` exceeds scope {} of its parent `{p}`", sc.size, ps.size);
                return Err(match d {
                    Some(d) => scope_err(d, message),
                    None => Error::scope(message),
                });
            }
        }
        let need = min_size(model, &stated, name);
        if sc.size < need {
            let message = format!("scope {} of `{name}` is smaller than the {need} atoms its subsignatures require", sc.size);
            return Err(match stated.get(name) {
                Some(d) => scope_err(d, message),
                None => Error::scope(message),
            });
        }
        out.insert(s.name.clone(), sc);
    }
    // subset sigs: parents may themselves be subset sigs, so iterate to a fixed point
    let mut pending: Vec<&Sig> = model.sigs.iter().filter(|s| matches!(s.parent, Parent::In(_))).collect();
    while !pending.is_empty() {
        let before = pending.len();
        pending.retain(|s| {
            let Parent::In(ps) = &s.parent else { return false };
            if !ps.iter().all(|p| out.contains_key(p)) {
                return true;
            }
            let bound: u32 = ps.iter().map(|p| out[p].size).sum();
            let sc = match stated.get(s.name.as_str()) {
                Some(d) => Scope { size: d.size, exact: d.exact },
                None if s.mult == Some(Mult::One) => Scope { size: 1, exact: true },
                None => Scope { size: bound, exact: false },
            };
            out.insert(s.name.clone(), sc);
            false
        });
        if pending.len() == before {
            return Err(Error::scope("cyclic subset signatures"));
        }
    }
    Ok(out)
}
