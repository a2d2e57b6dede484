use super::*;

/// Structural equality up to renaming of bound variables. Free variables listed
/// positionally in `pairs` are treated as bound to each other.
pub fn alpha_equivalent(a: &Term, b: &Term, pairs: &[(Sym, Sym)]) -> bool {
    let mut env: Vec<(Sym, Sym)> = pairs.to_vec();
    eq(a, b, &mut env)
}

fn eq(a: &Term, b: &Term, env: &mut Vec<(Sym, Sym)>) -> bool {
    let all = |xs: &[Term], ys: &[Term], env: &mut Vec<(Sym, Sym)>| {
        xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| eq(x, y, env))
    };
    match (a, b) {
        (Term::Var(x, s), Term::Var(y, t)) => {
            s == t
                && match env.iter().rev().find(|(l, r)| l == x || r == y) {
                    Some((l, r)) => l == x && r == y,
                    None => x == y,
                }
        }
        (Term::App(f, xs), Term::App(g, ys)) => f == g && all(xs, ys, env),
        (Term::Eq(a1, a2), Term::Eq(b1, b2))
        | (Term::Implies(a1, a2), Term::Implies(b1, b2))
        | (Term::Iff(a1, a2), Term::Iff(b1, b2)) => eq(a1, b1, env) && eq(a2, b2, env),
        (Term::IntBin(o, a1, a2), Term::IntBin(p, b1, b2)) => o == p && eq(a1, b1, env) && eq(a2, b2, env),
        (Term::Cmp(o, a1, a2), Term::Cmp(p, b1, b2)) => o == p && eq(a1, b1, env) && eq(a2, b2, env),
        (Term::Not(x), Term::Not(y)) => eq(x, y, env),
        (Term::And(xs), Term::And(ys)) | (Term::Or(xs), Term::Or(ys)) | (Term::Sum(xs), Term::Sum(ys)) => {
            all(xs, ys, env)
        }
        (Term::Ite(c, x, y), Term::Ite(d, u, v)) => eq(c, d, env) && eq(x, u, env) && eq(y, v, env),
        (Term::Forall(vs, x), Term::Forall(ws, y)) | (Term::Exists(vs, x), Term::Exists(ws, y)) => {
            if vs.len() != ws.len() || vs.iter().zip(ws).any(|(a, b)| a.1 != b.1) {
                return false;
            }
            let n = env.len();
            env.extend(vs.iter().zip(ws).map(|(a, b)| (a.0.clone(), b.0.clone())));
            let r = eq(x, y, env);
            env.truncate(n);
            r
        }
        (
            Term::Closure { reflexive: r1, def: d1, x: x1, y: y1, args: a1 },
            Term::Closure { reflexive: r2, def: d2, x: x2, y: y2, args: a2 },
        ) => r1 == r2 && d1 == d2 && eq(x1, x2, env) && eq(y1, y2, env) && all(a1, a2, env),
        _ => a == b && !matches!(a, Term::Var(..)),
    }
}
