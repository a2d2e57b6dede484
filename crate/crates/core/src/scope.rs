//! Scope constraints on signature sizes, as cardinalities or as distinguished constants.

use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::ir::*;
use crate::translate::{Ctx, ScopeStyle, SigRepr, Translator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeSpec {
    pub sig: String,
    pub size: u32,
    pub exact: bool,
    pub sort: Sort,
    pub sort_size: u32,
}

fn pairwise_distinct(ts: &[Term]) -> Vec<Term> {
    let mut out = Vec::new();
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            out.push(Term::not(Term::eq(ts[i].clone(), ts[j].clone())));
        }
    }
    out
}

/// Fresh constants and axioms fixing the size of a signature given its membership formula.
pub fn constants_scope_axioms(spec: &ScopeSpec, member: &dyn Fn(&Term) -> Term) -> (Vec<(Sym, Sort)>, Vec<Term>) {
    let mut consts = Vec::new();
    let mut axioms = Vec::new();
    if spec.exact && spec.size > spec.sort_size {
        axioms.push(FALSE);
        return (consts, axioms);
    }
    let mut group = |kind: &str, n: u32, inside: bool, consts: &mut Vec<(Sym, Sort)>| {
        let ts: Vec<Term> = (1..=n)
            .map(|i| {
                let name = sym(&format!("scope_{}_{kind}_{i}", spec.sig));
                consts.push((name.clone(), spec.sort.clone()));
                Term::app(&name, vec![])
            })
            .collect();
        axioms.extend(pairwise_distinct(&ts));
        for t in &ts {
            let m = member(t);
            axioms.push(if inside { m } else { Term::not(m) });
        }
    };
    if spec.size < spec.sort_size {
        group("out", spec.sort_size - spec.size, false, &mut consts);
    }
    if spec.exact {
        group("in", spec.size, true, &mut consts);
    }
    (consts, axioms)
}

/// `#A = c` for exact scopes, `#A <= c` otherwise; nothing when a non-exact scope covers the sort.
pub fn cardinality_scope_axioms(spec: &ScopeSpec, card: Term) -> Vec<Term> {
    let c = Term::Int(spec.size as i64);
    if spec.exact {
        vec![Term::eq(card, c)]
    } else if spec.size < spec.sort_size {
        vec![Term::cmp(Cmp::Le, card, c)]
    } else {
        vec![]
    }
}

impl Translator<'_> {
    pub(crate) fn scope_axioms(&mut self) -> Result<()> {
        let m = self.m;
        if self.opts.scope_axioms == ScopeStyle::Cardinality {
            let max = (1i64 << (self.th.bitwidth - 1)) - 1;
            if let Some((s, k)) = self.pol.sort_sizes.iter().find(|(_, k)| *k as i64 > max) {
                return Err(Error::Scope {
                    span: None,
                    message: format!(
                        "bitwidth {} cannot represent the size {k} of sort {s}; increase the Int scope",
                        self.th.bitwidth
                    ),
                });
            }
        }
        for s in &m.sigs {
            if matches!(self.sigs[&s.name], SigRepr::Elided | SigRepr::Const(_)) {
                continue;
            }
            let sort = self.sig_sort(&s.name)?;
            let sc = self.q.scope(&s.name);
            let spec = ScopeSpec {
                sig: s.name.clone(),
                size: sc.size,
                exact: sc.exact,
                sort: sort.clone(),
                sort_size: self.pol.size(&sort) as u32,
            };
            match self.opts.scope_axioms {
                ScopeStyle::Constants => {
                    let member = |t: &Term| self.sig_member(&s.name, &(t.clone(), sort.clone()));
                    let (consts, axioms) = constants_scope_axioms(&spec, &member);
                    self.th.consts.extend(consts);
                    self.th.axioms.extend(axioms);
                }
                ScopeStyle::Cardinality => {
                    let e = Expr::new(EK::Sig(s.name.clone()), 1, s.span);
                    let card = self.int(&IntExpr::Card(e), &Ctx::default())?;
                    self.th.axioms.extend(cardinality_scope_axioms(&spec, card));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(size: u32, exact: bool, sort_size: u32) -> ScopeSpec {
        ScopeSpec { sig: "A".into(), size, exact, sort: Sort::named("S"), sort_size }
    }

    fn member(t: &Term) -> Term {
        Term::app(&sym("in$A"), vec![t.clone()])
    }

    #[test]
    fn non_exact_constants() {
        let (c, a) = constants_scope_axioms(&spec(2, false, 3), &member);
        assert_eq!(c.len(), 1);
        assert_eq!(a.len(), 1);
        assert!(matches!(&a[0], Term::Not(_)));
    }

    #[test]
    fn exact_constants() {
        let (c, a) = constants_scope_axioms(&spec(2, true, 3), &member);
        assert_eq!(c.iter().map(|x| x.0.to_string()).collect::<Vec<_>>(), ["scope_A_out_1", "scope_A_in_1", "scope_A_in_2"]);
        // out: one negated membership; in: one distinctness and two memberships
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn full_non_exact_needs_nothing() {
        let (c, a) = constants_scope_axioms(&spec(3, false, 3), &member);
        assert!(c.is_empty() && a.is_empty());
        assert!(cardinality_scope_axioms(&spec(5, false, 5), Term::Int(0)).is_empty());
    }

    #[test]
    fn cardinality_forms() {
        let card = Term::var(&sym("n"), &Sort::Int);
        assert_eq!(cardinality_scope_axioms(&spec(3, true, 5), card.clone()), vec![Term::eq(card.clone(), Term::Int(3))]);
        assert_eq!(cardinality_scope_axioms(&spec(0, true, 1), card.clone()), vec![Term::eq(card, Term::Int(0))]);
    }
}
