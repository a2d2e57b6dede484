//! End-to-end driver: source text to translated theory, ground theory and solver verdict.

use crate::error::Result;
use crate::frontend::query::{select_command, Query, Selector};
use crate::ground::{ground, GroundTheory, DEFAULT_BUDGET};
use crate::smt::{solve, SatResult, SolverConfig};
use crate::translate::{translate_query, TransOptions, Translation};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub trans: TransOptions,
    pub budget: usize,
    pub solver: SolverConfig,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { trans: TransOptions::default(), budget: DEFAULT_BUDGET, solver: SolverConfig::default() }
    }
}

/// Parses `text` and selects one command.
pub fn load_query(text: &str, selector: &Selector) -> Result<Query> {
    let model = Arc::new(crate::frontend::load(text)?);
    select_command(&model, selector)
}

pub fn translate_and_ground(q: &Query, opts: &PipelineOptions) -> Result<(Translation, GroundTheory)> {
    let t = translate_query(q, &opts.trans)?;
    let g = ground(&t.theory, opts.budget)?;
    Ok((t, g))
}

/// Whether the goal of `q` (facts and run body, or facts and negated assertion) is satisfiable.
pub fn solve_query(q: &Query, opts: &PipelineOptions) -> Result<SatResult> {
    let (_, g) = translate_and_ground(q, opts)?;
    solve(&g, &opts.solver)
}
