use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gen {
    rng: ChaCha8Rng,
    sigs: Vec<String>,
    /// Field name, owner, target.
    fields: Vec<(String, String, String)>,
    vars: Vec<(String, String)>,
    fresh: usize,
}

impl Gen {
    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).unwrap().clone()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn unary(&mut self, depth: u32) -> String {
        let leaf = depth == 0 || self.chance(0.35);
        if leaf {
            if !self.vars.is_empty() && self.chance(0.4) {
                let v = self.pick(&self.vars.clone());
                return v.0;
            }
            return self.pick(&self.sigs.clone());
        }
        match self.rng.gen_range(0..6) {
            0 => format!("({} + {})", self.unary(depth - 1), self.unary(depth - 1)),
            1 => format!("({} - {})", self.unary(depth - 1), self.unary(depth - 1)),
            2 => format!("({} & {})", self.unary(depth - 1), self.unary(depth - 1)),
            _ if !self.fields.is_empty() => {
                let f = self.pick(&self.fields.clone());
                match (self.rng.gen_range(0..3), self.binary()) {
                    (0, _) | (_, None) => format!("{}.{}", self.unary(depth - 1), f.0),
                    (1, _) => format!("{}.{}", f.0, self.unary(depth - 1)),
                    (_, Some(r)) => format!("{}.^{r}", self.unary(depth - 1)),
                }
            }
            _ => self.pick(&self.sigs.clone()),
        }
    }

    /// A binary relation over a single signature, for closures.
    fn binary(&mut self) -> Option<String> {
        let hom: Vec<String> = self.fields.iter().filter(|(_, o, t)| o == t).map(|f| f.0.clone()).collect();
        if hom.is_empty() {
            return None;
        }
        let f = self.pick(&hom);
        Some(match self.rng.gen_range(0..3) {
            0 => f,
            1 => format!("~{f}"),
            _ => format!("({f} + ~{f})"),
        })
    }

    fn formula(&mut self, depth: u32) -> String {
        let leaf = depth == 0 || self.chance(0.3);
        if leaf {
            return match self.rng.gen_range(0..5) {
                0 => format!("{} in {}", self.unary(2), self.unary(2)),
                1 => format!("{} = {}", self.unary(2), self.unary(2)),
                2 => {
                    let op = self.pick(&["=", "<", ">", "<=", ">="]);
                    let n = self.rng.gen_range(0..4);
                    format!("#{} {op} {n}", self.unary(2))
                }
                _ => {
                    let m = self.pick(&["some", "no", "one", "lone"]);
                    format!("{m} {}", self.unary(2))
                }
            };
        }
        match self.rng.gen_range(0..5) {
            0 => format!("not ({})", self.formula(depth - 1)),
            1 => format!("({} and {})", self.formula(depth - 1), self.formula(depth - 1)),
            2 => format!("({} or {})", self.formula(depth - 1), self.formula(depth - 1)),
            _ => {
                let q = self.pick(&["all", "some", "no", "one", "lone"]);
                let s = self.pick(&self.sigs.clone());
                self.fresh += 1;
                let v = format!("x{}", self.fresh);
                self.vars.push((v.clone(), s.clone()));
                let body = self.formula(depth - 1);
                self.vars.pop();
                format!("({q} {v}: {s} | {body})")
            }
        }
    }
}

/// Deterministic small random models, each with one `run` command.
pub fn generate_models(seed: u64, count: usize) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 0..count {
        let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(rng.gen()), sigs: vec![], fields: vec![], vars: vec![], fresh: 0 };
        let mut src = String::new();
        let tops = g.rng.gen_range(1..=2);
        for t in ["A", "B"].iter().take(tops) {
            g.sigs.push(t.to_string());
        }
        if g.chance(0.5) {
            let abs = if g.chance(0.5) { "abstract " } else { "" };
            src.push_str(&format!("{abs}sig A {{}}\nsig A1, A2 extends A {{}}\n"));
            g.sigs.extend(["A1".to_string(), "A2".to_string()]);
        } else {
            src.push_str("sig A {}\n");
        }
        if tops == 2 {
            src.push_str("sig B {}\n");
        }
        if g.chance(0.3) {
            src.push_str("sig S in A {}\n");
            g.sigs.push("S".into());
        }
        let nf = g.rng.gen_range(0..=2);
        let tops_v: Vec<String> = ["A", "B"].iter().take(tops).map(|s| s.to_string()).collect();
        for i in 0..nf {
            let owner = g.pick(&tops_v);
            let target = g.pick(&g.sigs.clone());
            let m = g.pick(&["one", "lone", "set", "some"]);
            let name = format!("f{i}");
            src = add_field(&src, &owner, &format!("{name}: {m} {target}"));
            g.fields.push((name, owner, target));
        }
        let goal = g.formula(3);
        src.push_str(&format!("run {{ {goal} }} for 2\n"));
        out.push((format!("gen-{seed}-{n}"), src));
    }
    out
}

/// Inserts a field declaration into the body of `sig owner {}`.
fn add_field(src: &str, owner: &str, decl: &str) -> String {
    let head = format!("sig {owner} {{");
    let i = src.find(&head).expect("owner declared");
    let at = i + head.len();
    let close = at + src[at..].find('}').unwrap();
    let body = src[at..close].trim();
    let body = if body.is_empty() { format!(" {decl} ") } else { format!(" {body}, {decl} ") };
    format!("{}{}{}", &src[..at], body, &src[close..])
}
