//! SMT-LIB emission, solver invocation and model extraction.

pub mod emit;
mod sexp;

pub use emit::{elem_name, emit_smtlib, model_terms, quote};
pub use sexp::{parse_sexps, Sexp};

use crate::error::{Error, Result};
use crate::ground::{eval, GroundTheory, Interp};
use crate::instance::Instance;
use crate::ir::*;
use serde::Serialize;
use std::collections::HashMap;
use std::time::Duration;

pub const DEFAULT_SOLVER: &str = "z3";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Unknown => "UNKNOWN",
            Status::Timeout => "TIMEOUT",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub path: String,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { path: DEFAULT_SOLVER.into(), timeout: DEFAULT_TIMEOUT }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverStats {
    pub solver: String,
    pub wall_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct SatResult {
    pub status: Status,
    pub instance: Option<Instance>,
    pub stats: SolverStats,
}

/// Raw solver verdict and the text that followed it.
pub struct RawAnswer {
    pub status: Status,
    pub rest: String,
    pub wall: Duration,
}

/// Runs `<solver> <file>` on `script`, killing it after the timeout.
#[cfg(not(target_arch = "wasm32"))]
pub fn run_solver(script: &str, cfg: &SolverConfig) -> Result<RawAnswer> {
    use std::io::Write;
    use std::process::{Command, Stdio};
    use std::time::Instant;
    let mut input = tempfile::Builder::new().prefix("portus").suffix(".smt2").tempfile()?;
    input.write_all(script.as_bytes())?;
    input.flush()?;
    let output = tempfile::tempfile()?;
    let errors = tempfile::tempfile()?;
    let start = Instant::now();
    let mut child = Command::new(&cfg.path)
        .arg(input.path())
        .stdin(Stdio::null())
        .stdout(output.try_clone()?)
        .stderr(errors.try_clone()?)
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot start {}: {e}", cfg.path)))?;
    let status = loop {
        if let Some(st) = child.try_wait()? {
            break st;
        }
        if start.elapsed() >= cfg.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(RawAnswer { status: Status::Timeout, rest: String::new(), wall: start.elapsed() });
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let wall = start.elapsed();
    let read = |mut f: std::fs::File| -> Result<String> {
        use std::io::{Read, Seek};
        let mut s = String::new();
        f.seek(std::io::SeekFrom::Start(0))?;
        f.read_to_string(&mut s)?;
        Ok(s)
    };
    let out = read(output)?;
    let mut lines = out.splitn(2, '\n');
    let first = lines.next().unwrap_or("").trim();
    let verdict = match first {
        "sat" => Status::Sat,
        "unsat" => Status::Unsat,
        "unknown" => Status::Unknown,
        "timeout" => Status::Timeout,
        _ => {
            let err = read(errors)?;
            return Err(Error::Solver(format!(
                "{} exited with {status} without a verdict: {}",
                cfg.path,
                [first, err.trim()].join(" ").trim()
            )));
        }
    };
    Ok(RawAnswer { status: verdict, rest: lines.next().unwrap_or("").to_string(), wall })
}

#[cfg(target_arch = "wasm32")]
pub fn run_solver(_script: &str, cfg: &SolverConfig) -> Result<RawAnswer> {
    Err(Error::Solver(format!("cannot start {}: no external processes on this platform", cfg.path)))
}

/// Interpretation of the declared symbols from a `get-value` response to `model_terms`.
pub fn parse_model(g: &GroundTheory, text: &str) -> Result<Interp> {
    let terms = model_terms(g);
    let mut interp = Interp::default();
    if terms.is_empty() {
        return Ok(interp);
    }
    let sexps = parse_sexps(text)?;
    let Some(Sexp::List(pairs)) = sexps.into_iter().find(|s| matches!(s, Sexp::List(_))) else {
        return Err(Error::ModelParse("missing get-value response".into()));
    };
    if pairs.len() != terms.len() {
        return Err(Error::ModelParse(format!("expected {} values, found {}", terms.len(), pairs.len())));
    }
    let values: Vec<&Sexp> = pairs
        .iter()
        .map(|p| match p {
            Sexp::List(xs) if xs.len() == 2 => Ok(&xs[1]),
            _ => Err(Error::ModelParse(format!("malformed value pair {p}"))),
        })
        .collect::<Result<_>>()?;
    let mut abstracts: HashMap<String, Term> = HashMap::new();
    let mut i = 0;
    for (n, k) in &g.theory.sorts {
        for e in 1..=*k {
            abstracts.insert(values[i].to_string(), Term::Elem(n.clone(), e));
            i += 1;
        }
    }
    let value = |s: &Sexp| -> Result<Term> {
        match s {
            Sexp::Atom(a) if a == "true" => Ok(TRUE),
            Sexp::Atom(a) if a == "false" => Ok(FALSE),
            Sexp::Atom(a) if a.chars().all(|c| c.is_ascii_digit()) => {
                a.parse().map(Term::Int).map_err(|_| Error::ModelParse(format!("bad numeral {a}")))
            }
            Sexp::List(xs) if xs.len() == 2 && xs[0] == Sexp::Atom("-".into()) => match &xs[1] {
                Sexp::Atom(a) => a.parse::<i64>().map(|n| Term::Int(-n)).map_err(|_| Error::ModelParse(format!("bad numeral {a}"))),
                _ => Err(Error::ModelParse(format!("unexpected value {s}"))),
            },
            s => abstracts.get(&s.to_string()).cloned().ok_or_else(|| Error::ModelParse(format!("unknown value {s}"))),
        }
    };
    for t in &terms[i..] {
        let v = value(values[i])?;
        let Term::App(f, args) = t else { unreachable!() };
        interp.set(f, args.clone(), v);
        i += 1;
    }
    Ok(interp)
}

/// Emits, solves and, on sat, extracts an instance.
pub fn solve(g: &GroundTheory, cfg: &SolverConfig) -> Result<SatResult> {
    let script = emit_smtlib(g);
    let ans = run_solver(&script, cfg)?;
    let stats = SolverStats { solver: cfg.path.clone(), wall_ms: ans.wall.as_millis() };
    let instance = if ans.status == Status::Sat {
        let interp = parse_model(g, &ans.rest)?;
        Some(extract_instance(g, &interp)?)
    } else {
        None
    };
    Ok(SatResult { status: ans.status, instance, stats })
}

pub fn extract_instance(g: &GroundTheory, interp: &Interp) -> Result<Instance> {
    Instance::extract(&g.theory.extraction, g.theory.bitwidth, |t| {
        eval(&g.theory, interp, t).map_err(|e| Error::ModelParse(e.to_string()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground, DEFAULT_BUDGET};

    fn one_sort() -> Theory {
        let mut th = Theory { sorts: vec![(sym("S"), 2)], bitwidth: 4, ..Theory::default() };
        th.funcs.push(FuncDecl { name: sym("in$A"), args: vec![Sort::named("S")], ret: Ret::Bool });
        th
    }

    #[test]
    fn structure_of_emitted_script() {
        let g = ground(&one_sort(), DEFAULT_BUDGET).unwrap();
        let s = emit_smtlib(&g);
        assert_eq!(s.matches("(declare-sort").count(), 1);
        assert_eq!(s.matches("(declare-const |elem$").count(), 2);
        assert_eq!(s.matches("(assert (distinct").count(), 1);
        assert!(s.starts_with("(set-logic QF_UF)"));
        assert_eq!(s, emit_smtlib(&g));
    }

    #[test]
    fn integer_theories_use_arithmetic() {
        let mut th = one_sort();
        th.consts.push((sym("n"), Sort::Int));
        let g = ground(&th, DEFAULT_BUDGET).unwrap();
        assert!(emit_smtlib(&g).starts_with("(set-logic QF_UFLIA)"));
    }

    #[test]
    fn missing_solver_is_an_error() {
        let g = ground(&one_sort(), DEFAULT_BUDGET).unwrap();
        let cfg = SolverConfig { path: "/nonexistent/solver".into(), timeout: Duration::from_secs(5) };
        assert!(matches!(solve(&g, &cfg), Err(Error::Solver(_))));
    }

    #[test]
    fn model_values_map_through_elements() {
        let g = ground(&one_sort(), DEFAULT_BUDGET).unwrap();
        let text = "((|elem$S$1| S!val!1) (|elem$S$2| S!val!0) ((|in$A| |elem$S$1|) true) ((|in$A| |elem$S$2|) false))";
        let i = parse_model(&g, text).unwrap();
        assert_eq!(i.funcs[&sym("in$A")][&vec![Term::elem(&sym("S"), 1)]], TRUE);
    }
}
