//! Translator from an Alloy subset to many-sorted first-order logic, with
//! grounding, SMT-LIB emission, model extraction and a brute-force oracle.

pub mod difftest;
pub mod error;
pub mod ir;
pub mod scalar;
pub mod pipeline;
pub mod scope;
pub mod smt;
pub mod frontend;
pub mod ground;
pub mod instance;
pub mod oracle;
pub mod sorts;
pub mod span;
pub mod translate;

pub use error::{Error, Result};
