use super::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("ill-sorted term: {0}")]
pub struct SortError(pub String);

fn err<T>(msg: String) -> std::result::Result<T, SortError> {
    Err(SortError(msg))
}

fn expect(th: &Theory, t: &Term, want: &Ret) -> std::result::Result<(), SortError> {
    let got = sort_of(th, t)?;
    if got != *want {
        return err(format!("expected {want}, found {got} in {}", print::term(t)));
    }
    Ok(())
}

fn signature(th: &Theory, f: &str) -> Option<(Vec<Sort>, Ret)> {
    if let Some(s) = th.const_sort(f) {
        return Some((vec![], Ret::Sort(s.clone())));
    }
    if let Some(d) = th.func(f) {
        return Some((d.args.clone(), d.ret.clone()));
    }
    th.def(f).map(|d| (d.params.iter().map(|(_, s)| s.clone()).collect(), d.ret.clone()))
}

/// Sort of a term under the symbols declared in `th`.
pub fn sort_of(th: &Theory, t: &Term) -> std::result::Result<Ret, SortError> {
    let int = Ret::Sort(Sort::Int);
    Ok(match t {
        Term::Var(_, s) => Ret::Sort(s.clone()),
        Term::Elem(s, i) => {
            let sort = Sort::U(s.clone());
            if *i == 0 || *i as u64 > th.sort_size(&sort) {
                return err(format!("element {i} out of range for sort {s}"));
            }
            Ret::Sort(sort)
        }
        Term::Int(_) => int,
        Term::Bool(_) => Ret::Bool,
        Term::App(f, args) => {
            let Some((params, ret)) = signature(th, f) else { return err(format!("undeclared symbol {f}")) };
            if params.len() != args.len() {
                return err(format!("{f} expects {} arguments, got {}", params.len(), args.len()));
            }
            for (a, p) in args.iter().zip(&params) {
                expect(th, a, &Ret::Sort(p.clone()))?;
            }
            ret
        }
        Term::Eq(a, b) => {
            let sa = sort_of(th, a)?;
            expect(th, b, &sa)?;
            Ret::Bool
        }
        Term::Not(a) => {
            expect(th, a, &Ret::Bool)?;
            Ret::Bool
        }
        Term::And(xs) | Term::Or(xs) => {
            for x in xs {
                expect(th, x, &Ret::Bool)?;
            }
            Ret::Bool
        }
        Term::Implies(a, b) | Term::Iff(a, b) => {
            expect(th, a, &Ret::Bool)?;
            expect(th, b, &Ret::Bool)?;
            Ret::Bool
        }
        Term::Ite(c, a, b) => {
            expect(th, c, &Ret::Bool)?;
            let s = sort_of(th, a)?;
            expect(th, b, &s)?;
            s
        }
        Term::Forall(vs, body) | Term::Exists(vs, body) => {
            for (v, s) in vs {
                if let Sort::U(n) = s {
                    if !th.sorts.iter().any(|(m, _)| m == n) {
                        return err(format!("binder {v} has undeclared sort {n}"));
                    }
                }
            }
            expect(th, body, &Ret::Bool)?;
            Ret::Bool
        }
        Term::Closure { def, x, y, args, .. } => {
            let Some(d) = th.def(def) else { return err(format!("undefined closure body {def}")) };
            if d.ret != Ret::Bool || d.params.len() != args.len() + 2 || d.params[0].1 != d.params[1].1 {
                return err(format!("{def} is not a homogeneous binary relation"));
            }
            let all = std::iter::once(&**x).chain(std::iter::once(&**y)).chain(args.iter());
            for (a, (_, s)) in all.zip(&d.params) {
                expect(th, a, &Ret::Sort(s.clone()))?;
            }
            Ret::Bool
        }
        Term::IntBin(_, a, b) | Term::Cmp(_, a, b) => {
            expect(th, a, &int)?;
            expect(th, b, &int)?;
            if matches!(t, Term::Cmp(..)) {
                Ret::Bool
            } else {
                int
            }
        }
        Term::Sum(xs) => {
            for x in xs {
                expect(th, x, &int)?;
            }
            int
        }
    })
}

/// Checks every definition body and axiom of a theory, collecting all errors.
/// Definitions may only refer to definitions that precede them.
pub fn well_sorted(th: &Theory) -> std::result::Result<(), Vec<SortError>> {
    let mut errs = Vec::new();
    for (i, d) in th.defs.iter().enumerate() {
        if let Err(e) = expect(th, &d.body, &d.ret) {
            errs.push(SortError(format!("in {}: {}", d.name, e.0)));
        }
        d.body.visit(&mut |t| {
            let callee = match t {
                Term::App(f, _) => f,
                Term::Closure { def, .. } => def,
                _ => return,
            };
            if let Some(j) = th.defs.iter().position(|e| &e.name == callee) {
                if j >= i {
                    errs.push(SortError(format!("definition {} refers to later definition {callee}", d.name)));
                }
            }
        });
    }
    for a in &th.axioms {
        if let Err(e) = expect(th, a, &Ret::Bool) {
            errs.push(e);
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_theory_ok() {
        assert!(well_sorted(&Theory { bitwidth: 4, ..Default::default() }).is_ok());
    }

    #[test]
    fn argument_sort_mismatch() {
        let mut th = Theory { bitwidth: 4, sorts: vec![(sym("S1"), 2), (sym("S2"), 2)], ..Default::default() };
        th.funcs.push(FuncDecl { name: sym("f"), args: vec![Sort::named("S1")], ret: Ret::Bool });
        th.axioms.push(Term::app(&sym("f"), vec![Term::elem(&sym("S2"), 1)]));
        assert_eq!(well_sorted(&th).unwrap_err().len(), 1);
    }

    #[test]
    fn forward_definition_reference() {
        let mut th = Theory { bitwidth: 4, ..Default::default() };
        th.defs.push(FuncDef { name: sym("p"), params: vec![], ret: Ret::Bool, body: Term::app(&sym("q"), vec![]) });
        th.defs.push(FuncDef { name: sym("q"), params: vec![], ret: Ret::Bool, body: TRUE });
        let errs = well_sorted(&th).unwrap_err();
        assert!(errs.iter().any(|e| e.0.contains("later definition")));
    }
}
