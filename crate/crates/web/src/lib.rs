//! WebAssembly bindings for the browser playground in `www/`.
//!
//! Every entry point takes model source text and returns a string; failures
//! come back as a JSON object `{"error", "kind", "line", "col"}`.

use portus_core::frontend::query::{Query, Selector};
use portus_core::ground::{ground, DEFAULT_BUDGET};
use portus_core::oracle::{enumerate, Verdict};
use portus_core::pipeline::load_query;
use portus_core::smt::emit_smtlib;
use portus_core::sorts::{dump_sorts, make_policy, PolicyMode};
use portus_core::translate::{translate_query, ScopeStyle, TransOptions};
use portus_core::Error;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Smaller than the command-line default so a page never hangs for long.
pub const ORACLE_CAP: u64 = 200_000;

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Type { .. } => "type",
        Error::Unsupported { .. } => "unsupported",
        Error::IndefiniteSort { .. } => "indefinite-sort",
        Error::Scope { .. } => "scope",
        Error::NotFound(_) => "not-found",
        Error::Resource(_) => "resource",
        _ => "internal",
    }
}

fn report(e: Error) -> String {
    let span = e.span();
    json!({
        "error": e.to_string(),
        "kind": kind(&e),
        "line": span.map(|s| s.line),
        "col": span.map(|s| s.col),
    })
    .to_string()
}

fn query(src: &str, cmd: &str) -> Result<Query, Error> {
    let sel = match cmd.trim() {
        "" => Selector::Index(0),
        c => c.parse().unwrap_or(Selector::Index(0)),
    };
    load_query(src, &sel)
}

fn options(policy: &str, scalar_opt: bool, scope_axioms: &str) -> Result<TransOptions, Error> {
    let policy: PolicyMode = policy.parse().map_err(Error::NotFound)?;
    let scope_axioms: ScopeStyle = scope_axioms.parse().map_err(Error::NotFound)?;
    Ok(TransOptions { policy, scalar_opt, scope_axioms, ..TransOptions::default() })
}

/// Grounds one command and prints it as an SMT-LIB script.
pub fn smtlib(src: &str, cmd: &str, policy: &str, scalar_opt: bool, scope_axioms: &str) -> Result<String, String> {
    let run = || {
        let q = query(src, cmd)?;
        let t = translate_query(&q, &options(policy, scalar_opt, scope_axioms)?)?;
        Ok(emit_smtlib(&ground(&t.theory, DEFAULT_BUDGET)?))
    };
    run().map_err(report)
}

/// The sort assigned to each signature, as pretty JSON.
pub fn sorts(src: &str, cmd: &str, policy: &str) -> Result<String, String> {
    let run = || {
        let q = query(src, cmd)?;
        let mode: PolicyMode = policy.parse().map_err(Error::NotFound)?;
        let p = make_policy(&q, mode)?;
        Ok(serde_json::to_string_pretty(&dump_sorts(&q.model, &p)).expect("json"))
    };
    run().map_err(report)
}

/// Decides one command by enumeration: `{"verdict", "candidates", "instance"}`.
pub fn decide(src: &str, cmd: &str, cap: u64) -> Result<String, String> {
    let run = || {
        let q = query(src, cmd)?;
        let r = enumerate(&q, cap)?;
        let (verdict, instance) = match r.verdict {
            Verdict::Sat(i) => ("sat", Some(i)),
            Verdict::Unsat => ("unsat", None),
        };
        Ok(serde_json::to_string_pretty(&json!({
            "verdict": verdict,
            "candidates": r.candidates,
            "instance": instance,
        }))
        .expect("json"))
    };
    run().map_err(report)
}

#[wasm_bindgen(js_name = translate)]
pub fn translate_js(src: &str, cmd: &str, policy: &str, scalar_opt: bool, scope_axioms: &str) -> Result<String, JsValue> {
    smtlib(src, cmd, policy, scalar_opt, scope_axioms).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = sorts)]
pub fn sorts_js(src: &str, cmd: &str, policy: &str) -> Result<String, JsValue> {
    sorts(src, cmd, policy).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = oracle)]
pub fn oracle_js(src: &str, cmd: &str) -> Result<String, JsValue> {
    decide(src, cmd, ORACLE_CAP).map_err(|e| JsValue::from_str(&e))
}
