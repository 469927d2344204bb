//! The rule-file language.
//!
//! ```text
//! (* Rules for Boiler Control)
//! (INPUT TEMPERATURE (0 200) PRESSURE (0 500))
//! (OUTPUT HEATER.POWER (0 10) VALVE.OPENING (0 10))
//! (IF TEMPERATURE IS ABOVE AVERAGE.TEMP AND PRESSURE IS VERY HIGH.PRESS
//!  THEN HEATER.POWER IS LOW AND VALVE.OPENING IS VERY LARGE)
//! ```
//!
//! Parsing yields a [`RuleSet`] whose antecedents are in disjunctive normal
//! form. [`normalize`] splits disjunctive rules into conjunctive ones and
//! [`resolve`] looks adjectives up in a dictionary to produce the numeric
//! [`CompiledRuleSet`] that chips run.

mod format;
mod lexer;
mod parser;
mod resolve;

use std::fmt;

use crate::membership::{Adverb, Universe};

pub use format::format;
pub use parser::{parse, parse_named, ParseError, ParseErrorKind};
pub use resolve::{resolve, CompiledRule, CompiledRuleSet, ResolveError};

/// Line and column (both 1-based) of a token in rule text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Input,
    Output,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Input => "INPUT",
            Direction::Output => "OUTPUT",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalDecl {
    pub name: String,
    pub universe: Universe,
    pub direction: Direction,
    /// 0-based position among signals of the same direction.
    pub position: usize,
}

/// `SIGNAL IS [ADVERB...] ADJECTIVE`. Equality ignores the source location.
#[derive(Debug, Clone)]
pub struct Clause {
    pub signal: String,
    pub adverbs: Vec<Adverb>,
    pub adjective: String,
    pub location: Location,
}

impl Clause {
    pub fn new(signal: &str, adverbs: Vec<Adverb>, adjective: &str) -> Self {
        Clause {
            signal: signal.to_ascii_uppercase(),
            adverbs,
            adjective: adjective.to_ascii_uppercase(),
            location: Location::default(),
        }
    }
}

impl PartialEq for Clause {
    fn eq(&self, other: &Self) -> bool {
        self.signal == other.signal && self.adverbs == other.adverbs && self.adjective == other.adjective
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} IS", self.signal)?;
        for a in &self.adverbs {
            write!(f, " {a}")?;
        }
        write!(f, " {}", self.adjective)
    }
}

/// One rule. The antecedent is an OR of AND-groups; a conjunctive rule has
/// exactly one group.
#[derive(Debug, Clone)]
pub struct Rule {
    pub antecedent: Vec<Vec<Clause>>,
    pub consequent: Vec<Clause>,
    pub location: Location,
}

impl Rule {
    pub fn is_conjunctive(&self) -> bool {
        self.antecedent.len() == 1
    }
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.antecedent == other.antecedent && self.consequent == other.consequent
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub source: String,
    pub inputs: Vec<SignalDecl>,
    pub outputs: Vec<SignalDecl>,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn is_normalized(&self) -> bool {
        self.rules.iter().all(Rule::is_conjunctive)
    }

    pub fn input(&self, name: &str) -> Option<&SignalDecl> {
        self.inputs.iter().find(|d| d.name.eq_ignore_ascii_case(name))
    }

    pub fn output(&self, name: &str) -> Option<&SignalDecl> {
        self.outputs.iter().find(|d| d.name.eq_ignore_ascii_case(name))
    }

    /// Number of rules once every disjunct is split out.
    pub fn disjunct_count(&self) -> usize {
        self.rules.iter().map(|r| r.antecedent.len()).sum()
    }
}

/// Rewrites every disjunctive rule as consecutive conjunctive rules sharing
/// its consequent. Idempotent.
pub fn normalize(rs: &RuleSet) -> RuleSet {
    let rules = rs
        .rules
        .iter()
        .flat_map(|rule| {
            rule.antecedent.iter().map(move |group| Rule {
                antecedent: vec![group.clone()],
                consequent: rule.consequent.clone(),
                location: rule.location,
            })
        })
        .collect();
    RuleSet {
        source: rs.source.clone(),
        inputs: rs.inputs.clone(),
        outputs: rs.outputs.clone(),
        rules,
    }
}
