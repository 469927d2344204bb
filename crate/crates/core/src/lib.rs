//! Compiler and simulator for linguistic fuzzy control rules.
//!
//! Rules written in a small parenthesized language (`.fzr`) are parsed,
//! split into conjunctive form and resolved against a dictionary of 16-level
//! membership functions (`.fzd`). The result is loaded into a [`ChipObject`]
//! that simulates the inference hardware, and can then be emitted either as
//! an inference-chip rule image (`.fzc`) or as a precomputed memory-chip
//! address table (`.tbl` / `.bin`).
//!
//! ```
//! use fuzzchip::{compile_rules, ChipObject, ChipType, FuzzyDictionary};
//!
//! let dict = FuzzyDictionary::parse(
//!     "(DEFINE HOT (0 0 0 0 0 0 0 0 0 3 6 9 12 15 15 15))\n\
//!      (DEFINE LOW (15 15 12 9 6 3 0 0 0 0 0 0 0 0 0 0))\n",
//! )
//! .unwrap();
//! let (_, compiled) = compile_rules(
//!     "demo",
//!     "(INPUT TEMP (0 200)) (OUTPUT POWER (0 10)) (IF TEMP IS HOT THEN POWER IS LOW)",
//!     &dict,
//! )
//! .unwrap();
//! let chip = ChipObject::new("DEMO", ChipType::MinMax, compiled).unwrap();
//! let result = chip.assert_input(&[180.0]).unwrap();
//! assert!(result.outputs[0].value().unwrap() < 2.0);
//! ```

pub mod codegen;
pub mod dictionary;
pub mod engine;
pub mod membership;
pub mod network;
pub mod rulelang;

use thiserror::Error;

pub use codegen::{
    emit_table, emit_table_binary, gen_table, parse_table, write_rule_image, AddressTable, ChipImage, CodegenError,
    TableValue,
};
pub use dictionary::{DictionaryError, FuzzyDictionary};
pub use engine::{
    create_chip, defuzzify, update_chip, Activation, ChipObject, ChipType, CrispOutput, EngineError, Inference,
    OutputMembership,
};
pub use membership::{
    apply_adverb, bin_center, make_normal, make_triangle, quantize, Adverb, MembershipError, MembershipFunction,
    TruthLevel, Universe, LEVELS, MAX_TRUTH,
};
pub use network::{ChipNetwork, Connection, NetworkError, Propagation};
pub use rulelang::{
    format, normalize, parse, parse_named, resolve, CompiledRule, CompiledRuleSet, ParseError, ResolveError, RuleSet,
};

/// Failure anywhere between rule text and a compiled rule set.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

impl CompileError {
    pub fn location(&self) -> Option<rulelang::Location> {
        match self {
            CompileError::Parse(e) => Some(e.location),
            CompileError::Resolve(ResolveError::UnknownAdjective { location, .. })
            | CompileError::Resolve(ResolveError::NotNormalized { location, .. }) => Some(*location),
            CompileError::Resolve(ResolveError::Malformed(_)) => None,
        }
    }
}

/// Parses, normalizes and resolves rule text in one step. Returns the
/// normalized rule set alongside the compiled one.
pub fn compile_rules(
    source: &str,
    text: &str,
    dict: &FuzzyDictionary,
) -> Result<(RuleSet, CompiledRuleSet), CompileError> {
    let parsed = parse_named(source, text)?;
    let normalized = normalize(&parsed);
    let compiled = resolve(&normalized, dict)?;
    Ok((normalized, compiled))
}
