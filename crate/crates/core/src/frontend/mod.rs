//! Parsing, name resolution, ordering expansion and command selection.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod query;
pub mod resolve;
pub mod syntax;

use crate::error::{Error, Result};
use ast::Model;

/// Parses and resolves source text; ordering flags are not yet set.
pub fn parse_model(text: &str) -> Result<Model> {
    let surface = parser::parse_surface(text)?;
    resolve::resolve(&surface)
}

/// Flags every signature opened with `util/ordering` and rejects unsupported combinations.
pub fn expand_ordering(mut model: Model) -> Result<Model> {
    let ords = model.orderings.clone();
    for (i, o) in ords.iter().enumerate() {
        if ords[..i].iter().any(|p| p.sig == o.sig) {
            return Err(Error::unsupported(o.span, format!("signature `{}` ordered twice", o.sig)));
        }
        if model.is_subset_sig(&o.sig) {
            return Err(Error::unsupported(o.span, format!("ordering of subset signature `{}`", o.sig)));
        }
    }
    for o in &ords {
        if let Some(a) = model.ancestors(&o.sig).into_iter().find(|a| ords.iter().any(|p| p.sig == *a)) {
            return Err(Error::unsupported(
                o.span,
                format!("ordering both signature `{}` and its ancestor `{a}`", o.sig),
            ));
        }
    }
    for s in &mut model.sigs {
        if ords.iter().any(|o| o.sig == s.name) {
            s.ordered = true;
        }
    }
    Ok(model)
}

/// `parse_model` followed by `expand_ordering`.
pub fn load(text: &str) -> Result<Model> {
    expand_ordering(parse_model(text)?)
}
