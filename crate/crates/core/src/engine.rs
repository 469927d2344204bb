//! Chip objects and compositional inference.
//!
//! A chip evaluates its rules in three stages: rule activation (minimum of
//! the antecedent truths at the quantized inputs), composition of the
//! consequents into one output membership per output (max-min for
//! [`ChipType::MinMax`], max-product for [`ChipType::Multiplicative`]), and
//! centroid defuzzification over the bin centers.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::membership::{TruthLevel, Universe, LEVELS, MAX_TRUTH};
use crate::rulelang::CompiledRuleSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("chip {0} has no rules")]
    EmptyRuleSet(String),
    #[error("invalid chip name {0:?}")]
    InvalidName(String),
    #[error("expected {expected} {what}, got {got}")]
    Arity {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("input level {level} at position {position} is outside 0..=15")]
    LevelOutOfRange { position: usize, level: TruthLevel },
    #[error("activation kind does not match a {0} chip")]
    ActivationKind(ChipType),
    #[error("new rules for chip {0} change its input/output declarations")]
    SignatureMismatch(String),
    #[error("unknown chip type {0:?} (expected minmax or mult)")]
    UnknownType(String),
}

/// How a chip combines rule consequents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChipType {
    /// Max of min; pure 4-bit integer arithmetic, the inference-chip semantics.
    MinMax,
    /// Max of product, in real arithmetic.
    Multiplicative,
}

impl ChipType {
    pub fn keyword(&self) -> &'static str {
        match self {
            ChipType::MinMax => "MINMAX",
            ChipType::Multiplicative => "MULTIPLICATIVE",
        }
    }
}

impl fmt::Display for ChipType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for ChipType {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "minmax" | "min-max" => Ok(ChipType::MinMax),
            "mult" | "multiplicative" | "product" => Ok(ChipType::Multiplicative),
            _ => Err(EngineError::UnknownType(s.to_string())),
        }
    }
}

/// Per-rule activation strengths.
#[derive(Debug, Clone, PartialEq)]
pub enum Activation {
    /// Truth levels, for min-max chips.
    Levels(Vec<TruthLevel>),
    /// Truth normalized to `[0, 1]`, for multiplicative chips.
    Scaled(Vec<f64>),
}

impl Activation {
    pub fn len(&self) -> usize {
        match self {
            Activation::Levels(v) => v.len(),
            Activation::Scaled(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Activation::Levels(v) => v.iter().map(|&a| a as f64).collect(),
            Activation::Scaled(v) => v.clone(),
        }
    }
}

/// Composed output membership, one 16-bin vector per declared output.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputMembership {
    Levels(Vec<[TruthLevel; LEVELS]>),
    Scaled(Vec<[f64; LEVELS]>),
}

impl OutputMembership {
    pub fn len(&self) -> usize {
        match self {
            OutputMembership::Levels(v) => v.len(),
            OutputMembership::Scaled(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<[f64; LEVELS]> {
        match self {
            OutputMembership::Levels(v) => v.iter().map(|b| b.map(f64::from)).collect(),
            OutputMembership::Scaled(v) => v.clone(),
        }
    }
}

/// A defuzzified output value, or the marker that no rule contributed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrispOutput {
    Value(f64),
    NoActivation,
}

impl CrispOutput {
    pub fn value(&self) -> Option<f64> {
        match *self {
            CrispOutput::Value(v) => Some(v),
            CrispOutput::NoActivation => None,
        }
    }
}

impl fmt::Display for CrispOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrispOutput::Value(v) => write!(f, "{v}"),
            CrispOutput::NoActivation => f.write_str("NO-ACTIVATION"),
        }
    }
}

/// Everything one evaluation produces, stage by stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub levels: Vec<TruthLevel>,
    pub activation: Activation,
    pub membership: OutputMembership,
    pub outputs: Vec<CrispOutput>,
}

/// Centroid of a 16-bin membership vector over the bin centers of `u`.
pub fn defuzzify<T: Copy + Into<f64>>(b: &[T; LEVELS], u: &Universe) -> CrispOutput {
    let mut weighted = 0.0;
    let mut total = 0.0;
    for (k, &v) in b.iter().enumerate() {
        let v: f64 = v.into();
        weighted += v * k as f64;
        total += v;
    }
    if !(total > 0.0) {
        return CrispOutput::NoActivation;
    }
    // centroid in bin units, then onto the physical axis
    let index = (weighted / total).clamp(0.0, (LEVELS - 1) as f64);
    CrispOutput::Value(u.position(index))
}

/// A named inference unit holding an immutable snapshot of compiled rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipObject {
    name: String,
    kind: ChipType,
    compiled: CompiledRuleSet,
}

impl ChipObject {
    pub fn new(name: &str, kind: ChipType, compiled: CompiledRuleSet) -> Result<Self, EngineError> {
        if !crate::dictionary::is_valid_name(name) {
            return Err(EngineError::InvalidName(name.to_string()));
        }
        let name = name.to_ascii_uppercase();
        if compiled.rules().is_empty() {
            return Err(EngineError::EmptyRuleSet(name));
        }
        Ok(ChipObject { name, kind, compiled })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ChipType {
        self.kind
    }

    pub fn compiled(&self) -> &CompiledRuleSet {
        &self.compiled
    }

    pub fn input_count(&self) -> usize {
        self.compiled.inputs().len()
    }

    pub fn output_count(&self) -> usize {
        self.compiled.outputs().len()
    }

    pub fn rule_count(&self) -> usize {
        self.compiled.rules().len()
    }

    /// Same chip with a re-resolved rule set; declarations must not change.
    pub fn update(&self, compiled: CompiledRuleSet) -> Result<Self, EngineError> {
        if !self.compiled.same_signature(&compiled) {
            return Err(EngineError::SignatureMismatch(self.name.clone()));
        }
        ChipObject::new(&self.name, self.kind, compiled)
    }

    /// Same rules under a different combination method.
    pub fn with_kind(&self, kind: ChipType) -> Self {
        ChipObject {
            kind,
            ..self.clone()
        }
    }

    pub fn quantize_inputs(&self, xs: &[f64]) -> Result<Vec<TruthLevel>, EngineError> {
        self.check_arity("inputs", self.input_count(), xs.len())?;
        Ok(xs
            .iter()
            .zip(self.compiled.inputs())
            .map(|(&x, d)| d.universe.quantize(x))
            .collect())
    }

    /// Minimum over antecedent truths at the given input levels, per rule.
    pub fn rule_strength(&self, levels: &[TruthLevel]) -> Result<Activation, EngineError> {
        self.check_arity("input levels", self.input_count(), levels.len())?;
        if let Some((position, &level)) = levels.iter().enumerate().find(|(_, &l)| l > MAX_TRUTH) {
            return Err(EngineError::LevelOutOfRange { position, level });
        }
        let alphas = self.compiled.rules().iter().map(|rule| {
            rule.antecedent
                .iter()
                .zip(levels)
                .map(|(mf, &l)| mf.at(l as usize))
                .min()
                .unwrap_or(MAX_TRUTH)
        });
        Ok(match self.kind {
            ChipType::MinMax => Activation::Levels(alphas.collect()),
            ChipType::Multiplicative => Activation::Scaled(alphas.map(|a| a as f64 / MAX_TRUTH as f64).collect()),
        })
    }

    /// Combines the consequents weighted by `activation`.
    pub fn output_membership(&self, activation: &Activation) -> Result<OutputMembership, EngineError> {
        self.check_arity("activations", self.rule_count(), activation.len())?;
        let rules = self.compiled.rules();
        let outputs = self.output_count();
        match (self.kind, activation) {
            (ChipType::MinMax, Activation::Levels(alphas)) => {
                let mut out = vec![[0; LEVELS]; outputs];
                for (rule, &alpha) in rules.iter().zip(alphas) {
                    for (acc, mf) in out.iter_mut().zip(&rule.consequent) {
                        for (slot, &b) in acc.iter_mut().zip(mf.levels()) {
                            *slot = (*slot).max(alpha.min(b));
                        }
                    }
                }
                Ok(OutputMembership::Levels(out))
            }
            (ChipType::Multiplicative, Activation::Scaled(alphas)) => {
                let mut out = vec![[0.0f64; LEVELS]; outputs];
                for (rule, &alpha) in rules.iter().zip(alphas) {
                    for (acc, mf) in out.iter_mut().zip(&rule.consequent) {
                        for (slot, &b) in acc.iter_mut().zip(mf.levels()) {
                            *slot = slot.max(alpha * (b as f64 / MAX_TRUTH as f64));
                        }
                    }
                }
                Ok(OutputMembership::Scaled(out))
            }
            _ => Err(EngineError::ActivationKind(self.kind)),
        }
    }

    pub fn defuzzify_all(&self, membership: &OutputMembership) -> Vec<CrispOutput> {
        let universes = self.compiled.outputs().iter().map(|d| &d.universe);
        match membership {
            OutputMembership::Levels(bs) => bs.iter().zip(universes).map(|(b, u)| defuzzify(b, u)).collect(),
            OutputMembership::Scaled(bs) => bs.iter().zip(universes).map(|(b, u)| defuzzify(b, u)).collect(),
        }
    }

    /// Runs the whole pipeline on already-quantized input levels.
    pub fn infer_levels(&self, levels: &[TruthLevel]) -> Result<Inference, EngineError> {
        let activation = self.rule_strength(levels)?;
        let membership = self.output_membership(&activation)?;
        let outputs = self.defuzzify_all(&membership);
        Ok(Inference {
            levels: levels.to_vec(),
            activation,
            membership,
            outputs,
        })
    }

    /// Quantizes physical inputs, then runs the pipeline.
    pub fn assert_input(&self, xs: &[f64]) -> Result<Inference, EngineError> {
        let levels = self.quantize_inputs(xs)?;
        self.infer_levels(&levels)
    }

    fn check_arity(&self, what: &'static str, expected: usize, got: usize) -> Result<(), EngineError> {
        if expected == got {
            Ok(())
        } else {
            Err(EngineError::Arity { what, expected, got })
        }
    }
}

pub fn create_chip(name: &str, kind: ChipType, compiled: CompiledRuleSet) -> Result<ChipObject, EngineError> {
    ChipObject::new(name, kind, compiled)
}

pub fn update_chip(chip: &ChipObject, compiled: CompiledRuleSet) -> Result<ChipObject, EngineError> {
    chip.update(compiled)
}
