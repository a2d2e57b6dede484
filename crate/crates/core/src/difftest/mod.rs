//! Differential testing of the translation pipeline against the brute-force oracle.

mod generate;

pub use generate::generate_models;

use crate::error::Result;
use crate::frontend::query::{Query, Selector};
use crate::ground::ground;
use crate::oracle::{check_instance, enumerate, Verdict};
use crate::pipeline::{load_query, PipelineOptions};
use crate::smt::{solve, Status};
use crate::translate::{translate_query, TransOptions};
use serde::Serialize;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct DiffOptions {
    pub pipeline: PipelineOptions,
    pub configs: Vec<(String, TransOptions)>,
    pub oracle_cap: u64,
}

impl Default for DiffOptions {
    fn default() -> Self {
        DiffOptions { pipeline: PipelineOptions::default(), configs: TransOptions::configurations(), oracle_cap: crate::oracle::DEFAULT_CAP }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigOutcome {
    pub config: String,
    /// `sat`, `unsat`, `unknown`, `timeout` or an error message.
    pub status: String,
    pub agrees: bool,
    /// Ways the extracted instance fails under the oracle's evaluator; empty when valid.
    pub violations: Vec<String>,
    pub millis: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub command: usize,
    pub oracle: String,
    pub outcomes: Vec<ConfigOutcome>,
    /// Cardinality and constants scope styles disagree for some policy and scalar setting.
    pub style_mismatch: bool,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        !self.oracle.starts_with("error") && !self.style_mismatch && self.outcomes.iter().all(|o| o.agrees && o.violations.is_empty())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub cases: Vec<CaseReport>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed()).count()
    }

    pub fn runs(&self) -> usize {
        self.cases.iter().map(|c| c.outcomes.len()).sum()
    }

    pub fn agreeing_runs(&self) -> usize {
        self.cases.iter().flat_map(|c| &c.outcomes).filter(|o| o.agrees).count()
    }

    pub fn html(&self) -> String {
        let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let mut out = String::from("<!doctype html><meta charset=utf-8><title>difftest</title>\n");
        out.push_str(&format!(
            "<p>{} cases, {} runs, {} agreeing, {} failing cases</p>\n<table border=1>\n<tr><th>model</th><th>cmd</th><th>oracle</th>",
            self.cases.len(),
            self.runs(),
            self.agreeing_runs(),
            self.failures()
        ));
        if let Some(c) = self.cases.first() {
            for o in &c.outcomes {
                out.push_str(&format!("<th>{}</th>", esc(&o.config)));
            }
        }
        out.push_str("</tr>\n");
        for c in &self.cases {
            out.push_str(&format!("<tr><td>{}</td><td>{}</td><td>{}</td>", esc(&c.name), c.command, esc(&c.oracle)));
            for o in &c.outcomes {
                let bg = if o.agrees && o.violations.is_empty() { "#cfc" } else { "#fcc" };
                out.push_str(&format!("<td style=background:{bg}>{} ({} ms)</td>", esc(&o.status), o.millis));
            }
            out.push_str("</tr>\n");
        }
        out.push_str("</table>\n");
        out
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Sat => "sat",
        Status::Unsat => "unsat",
        Status::Unknown => "unknown",
        Status::Timeout => "timeout",
    }
}

/// Runs one configuration; the status string and, when sat, the instance's violations.
fn run_config(q: &Query, opts: &PipelineOptions, trans: &TransOptions) -> (String, Vec<String>) {
    let run = || -> Result<(Status, Vec<String>)> {
        let t = translate_query(q, trans)?;
        let g = ground(&t.theory, opts.budget)?;
        let r = solve(&g, &opts.solver)?;
        let violations = match &r.instance {
            Some(i) => check_instance(q, i)?,
            None => vec![],
        };
        Ok((r.status, violations))
    };
    match run() {
        Ok((s, v)) => (status_name(s).to_string(), v),
        Err(e) => (format!("error: {e}"), vec![]),
    }
}

/// Compares every configuration with the oracle on one query.
pub fn check_query(name: &str, q: &Query, opts: &DiffOptions) -> CaseReport {
    let oracle = match enumerate(q, opts.oracle_cap) {
        Ok(r) => match r.verdict {
            Verdict::Sat(_) => "sat".to_string(),
            Verdict::Unsat => "unsat".to_string(),
        },
        Err(e) => format!("error: {e}"),
    };
    let mut outcomes = Vec::new();
    for (cname, trans) in &opts.configs {
        let start = Instant::now();
        let (status, violations) = run_config(q, &opts.pipeline, trans);
        outcomes.push(ConfigOutcome {
            config: cname.clone(),
            agrees: status == oracle,
            status,
            violations,
            millis: start.elapsed().as_millis(),
        });
    }
    let mut style_mismatch = false;
    for (i, (_, a)) in opts.configs.iter().enumerate() {
        for (j, (_, b)) in opts.configs.iter().enumerate().skip(i + 1) {
            let same_rest = a.policy == b.policy && a.scalar_opt == b.scalar_opt;
            if same_rest && a.scope_axioms != b.scope_axioms && outcomes[i].status != outcomes[j].status {
                style_mismatch = true;
            }
        }
    }
    CaseReport { name: name.to_string(), command: q.command, oracle, outcomes, style_mismatch }
}

/// Checks every command of a model source.
pub fn check_source(name: &str, text: &str, opts: &DiffOptions) -> Vec<CaseReport> {
    let model = match crate::frontend::load(text) {
        Ok(m) => std::sync::Arc::new(m),
        Err(e) => {
            return vec![CaseReport {
                name: name.to_string(),
                command: 0,
                oracle: format!("error: {e}"),
                outcomes: vec![],
                style_mismatch: false,
            }]
        }
    };
    (0..model.commands.len())
        .map(|i| match crate::frontend::query::select_command(&model, &Selector::Index(i)) {
            Ok(q) => check_query(name, &q, opts),
            Err(e) => CaseReport {
                name: name.to_string(),
                command: i,
                oracle: format!("error: {e}"),
                outcomes: vec![],
                style_mismatch: false,
            },
        })
        .collect()
}

/// Like `check_source` for a single selected command.
pub fn check_command(name: &str, text: &str, sel: &Selector, opts: &DiffOptions) -> Result<CaseReport> {
    let q = load_query(text, sel)?;
    Ok(check_query(name, &q, opts))
}
