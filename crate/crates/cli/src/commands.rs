use crate::{Command, DifftestArgs, OracleArgs, SolveArgs, TranslateArgs};
use anyhow::{Context, Result};
use portus_core::difftest::{check_source, generate_models, CaseReport, DiffOptions, Report};
use portus_core::frontend::query::Query;
use portus_core::oracle::{enumerate, Verdict};
use portus_core::pipeline::{load_query, translate_and_ground, PipelineOptions};
use portus_core::smt::{emit::emit_smtlib, solve, Status};
use portus_core::translate::{translate_query, TransOptions};
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;
use tracing::{debug, info};

macro_rules! out {
    ($($t:tt)*) => {
        say(&format!($($t)*))?
    };
}

macro_rules! outln {
    ($($t:tt)*) => {{
        say(&format!($($t)*))?;
        say("\n")?;
    }};
}

pub fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Translate(a) => translate(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Difftest(a) => difftest(a),
    }
}

fn read_source(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(portus_core::Error::from)
        .with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path, sel: &portus_core::frontend::query::Selector) -> Result<Query> {
    let text = read_source(path)?;
    let q = load_query(&text, sel).with_context(|| path.display().to_string())?;
    info!(file = %path.display(), command = q.command, "loaded");
    Ok(q)
}

fn say(text: &str) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).map_err(portus_core::Error::from).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => {
            say(text)?;
            if !text.ends_with('\n') {
                say("\n")?;
            }
            Ok(())
        }
    }
}

fn translate(a: TranslateArgs) -> Result<u8> {
    let q = load(&a.file, &a.trans.selector)?;
    let opts = a.trans.options();
    let start = Instant::now();
    let t = translate_query(&q, &opts).with_context(|| a.file.display().to_string())?;
    info!(
        sorts = t.theory.sorts.len(),
        functions = t.theory.funcs.len(),
        axioms = t.theory.axioms.len(),
        ms = start.elapsed().as_millis() as u64,
        "translated"
    );
    if a.dump_sorts {
        let v = portus_core::sorts::dump_sorts(&q.model, &t.policy);
        outln!("{}", serde_json::to_string_pretty(&v)?);
    }
    if a.dump_casts {
        outln!("{}", serde_json::to_string_pretty(&t.casts)?);
    }
    if a.dump_theory {
        out!("{}", portus_core::ir::print_theory(&t.theory));
    }
    let dumping = a.dump_sorts || a.dump_casts || a.dump_theory || a.dump_ground;
    if !a.dump_ground && dumping && a.output.is_none() {
        return Ok(0);
    }
    let start = Instant::now();
    let g = portus_core::ground::ground(&t.theory, a.trans.ground_budget)?;
    info!(nodes = g.nodes, ms = start.elapsed().as_millis() as u64, "grounded");
    if a.dump_ground {
        let mut text = portus_core::ir::print_theory(&g.theory);
        for r in &g.range {
            text.push_str(&format!("range {}\n", portus_core::ir::print::term(r)));
        }
        out!("{text}");
    }
    if a.output.is_some() || !dumping {
        write_or_print(a.output.as_deref(), &emit_smtlib(&g))?;
    }
    Ok(0)
}

fn solve_cmd(a: SolveArgs) -> Result<u8> {
    let q = load(&a.file, &a.trans.selector)?;
    let opts = PipelineOptions { trans: a.trans.options(), budget: a.trans.ground_budget, solver: a.solver.config()? };
    let start = Instant::now();
    let (_, g) = translate_and_ground(&q, &opts).with_context(|| a.file.display().to_string())?;
    debug!(nodes = g.nodes, "grounded");
    let r = solve(&g, &opts.solver)?;
    let elapsed = start.elapsed().as_secs_f64();
    info!(status = %r.status, solver = %r.stats.solver, solver_ms = r.stats.wall_ms as u64, "solved");
    match r.status {
        Status::Sat | Status::Unsat => outln!("{}", r.status),
        Status::Unknown | Status::Timeout => outln!("{} after {elapsed:.2}s", r.status),
    }
    if let Some(inst) = &r.instance {
        match &a.instance_json {
            Some(p) => write_or_print(Some(p), &serde_json::to_string_pretty(inst)?)?,
            None => out!("{inst}"),
        }
    }
    Ok(match r.status {
        Status::Sat => 0,
        Status::Unsat => 1,
        Status::Unknown | Status::Timeout => 5,
    })
}

fn oracle(a: OracleArgs) -> Result<u8> {
    let q = load(&a.file, &a.selector)?;
    let start = Instant::now();
    let r = enumerate(&q, a.cap).with_context(|| a.file.display().to_string())?;
    info!(candidates = r.candidates, ms = start.elapsed().as_millis() as u64, "enumerated");
    match r.verdict {
        Verdict::Sat(inst) => {
            outln!("sat");
            outln!("{}", serde_json::to_string_pretty(&inst)?);
            Ok(0)
        }
        Verdict::Unsat => {
            outln!("unsat");
            Ok(1)
        }
    }
}

fn corpus_sources(dir: &Path) -> Result<Vec<(String, String)>> {
    let entries = std::fs::read_dir(dir).map_err(portus_core::Error::from).with_context(|| format!("cannot read {}", dir.display()))?;
    let mut paths = Vec::new();
    for e in entries {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "als") {
            paths.push(p);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok((name, read_source(&p)?))
        })
        .collect()
}

fn difftest(a: DifftestArgs) -> Result<u8> {
    let models = match &a.corpus {
        Some(dir) => corpus_sources(dir)?,
        None => generate_models(a.seed, a.count),
    };
    let configs = TransOptions::configurations()
        .into_iter()
        .map(|(n, t)| (n, TransOptions { inject_bug: a.inject_bug, ..t }))
        .collect();
    let opts = DiffOptions {
        pipeline: PipelineOptions { budget: a.ground_budget, solver: a.solver.config()?, ..PipelineOptions::default() },
        configs,
        oracle_cap: a.cap,
    };
    let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    info!(models = models.len(), jobs, "difftest started");

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Vec<CaseReport>>>> = Mutex::new(vec![None; models.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.min(models.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((name, src)) = models.get(i) else { break };
                let cases = check_source(name, src, &opts);
                for c in &cases {
                    if c.passed() {
                        debug!(model = %c.name, command = c.command, oracle = %c.oracle, "agree");
                    } else {
                        info!(model = %c.name, command = c.command, oracle = %c.oracle, "disagreement");
                    }
                }
                results.lock().unwrap()[i] = Some(cases);
            });
        }
    });
    let report = Report { cases: results.into_inner().unwrap().into_iter().flatten().flatten().collect() };

    if let Some(path) = &a.report {
        let html = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("html") || x.eq_ignore_ascii_case("htm"));
        let text = if html { report.html() } else { serde_json::to_string_pretty(&report)? };
        write_or_print(Some(path), &text)?;
    }
    for c in report.cases.iter().filter(|c| !c.passed()) {
        let got: Vec<String> = c
            .outcomes
            .iter()
            .filter(|o| !o.agrees || !o.violations.is_empty())
            .map(|o| match o.violations.first() {
                Some(v) => format!("{}={} with invalid instance ({v})", o.config, o.status),
                None => format!("{}={}", o.config, o.status),
            })
            .collect();
        outln!("FAIL {} cmd {}: oracle {} but {}", c.name, c.command, c.oracle, got.join(", "));
    }
    outln!(
        "{} models, {} commands, {} runs, {} agreeing, {} failing commands",
        models.len(),
        report.cases.len(),
        report.runs(),
        report.agreeing_runs(),
        report.failures()
    );
    Ok(if report.failures() == 0 { 0 } else { 1 })
}
