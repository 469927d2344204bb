use thiserror::Error;

use super::{Clause, Direction, Location, RuleSet, SignalDecl};
use crate::dictionary::FuzzyDictionary;
use crate::membership::MembershipFunction;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("{location}: unknown adjective {adjective} in clause \"{clause}\"")]
    UnknownAdjective {
        adjective: String,
        clause: String,
        location: Location,
    },
    #[error("{location}: rule {rule} is disjunctive; normalize the rule set before resolving")]
    NotNormalized { rule: usize, location: Location },
    #[error("malformed compiled rule set: {0}")]
    Malformed(String),
}

/// A conjunctive rule with every input and output slot filled in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompiledRule {
    /// One function per declared input, in declaration order.
    pub antecedent: Vec<MembershipFunction>,
    /// One function per declared output, in declaration order.
    pub consequent: Vec<MembershipFunction>,
}

/// Rules resolved to numbers, ready to load into a chip.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledRuleSet {
    inputs: Vec<SignalDecl>,
    outputs: Vec<SignalDecl>,
    rules: Vec<CompiledRule>,
}

impl CompiledRuleSet {
    /// Checks that declarations are well formed and every rule has one slot
    /// per declared signal. An empty rule list is allowed here; chips reject it.
    pub fn new(
        inputs: Vec<SignalDecl>,
        outputs: Vec<SignalDecl>,
        rules: Vec<CompiledRule>,
    ) -> Result<Self, ResolveError> {
        if inputs.is_empty() || outputs.is_empty() {
            return Err(ResolveError::Malformed("at least one input and one output are required".into()));
        }
        for (list, dir) in [(&inputs, Direction::Input), (&outputs, Direction::Output)] {
            for (i, d) in list.iter().enumerate() {
                if d.direction != dir || d.position != i {
                    return Err(ResolveError::Malformed(format!(
                        "signal {} is not {dir} position {i}",
                        d.name
                    )));
                }
            }
        }
        for (i, r) in rules.iter().enumerate() {
            if r.antecedent.len() != inputs.len() || r.consequent.len() != outputs.len() {
                return Err(ResolveError::Malformed(format!(
                    "rule {} has {}/{} slots, expected {}/{}",
                    i + 1,
                    r.antecedent.len(),
                    r.consequent.len(),
                    inputs.len(),
                    outputs.len()
                )));
            }
        }
        Ok(CompiledRuleSet { inputs, outputs, rules })
    }

    pub fn inputs(&self) -> &[SignalDecl] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SignalDecl] {
        &self.outputs
    }

    pub fn rules(&self) -> &[CompiledRule] {
        &self.rules
    }

    /// Same declarations (names, universes, order).
    pub fn same_signature(&self, other: &CompiledRuleSet) -> bool {
        self.inputs == other.inputs && self.outputs == other.outputs
    }
}

fn clause_function(clause: &Clause, dict: &FuzzyDictionary) -> Result<MembershipFunction, ResolveError> {
    dict.lookup(&clause.adjective)
        .map(|mf| mf.hedge_chain(&clause.adverbs))
        .ok_or_else(|| ResolveError::UnknownAdjective {
            adjective: clause.adjective.clone(),
            clause: clause.to_string(),
            location: clause.location,
        })
}

/// Looks up every clause's adjective, applies its adverbs and pads unused
/// input slots with ANY and unused output slots with NULL.
pub fn resolve(rs: &RuleSet, dict: &FuzzyDictionary) -> Result<CompiledRuleSet, ResolveError> {
    let slot = |decls: &[SignalDecl], name: &str| decls.iter().position(|d| d.name == name);
    let mut rules = Vec::with_capacity(rs.rules.len());
    for (index, rule) in rs.rules.iter().enumerate() {
        if !rule.is_conjunctive() {
            return Err(ResolveError::NotNormalized {
                rule: index + 1,
                location: rule.location,
            });
        }
        let mut antecedent = vec![MembershipFunction::ANY; rs.inputs.len()];
        for clause in &rule.antecedent[0] {
            let i = slot(&rs.inputs, &clause.signal)
                .ok_or_else(|| ResolveError::Malformed(format!("undeclared input {}", clause.signal)))?;
            antecedent[i] = clause_function(clause, dict)?;
        }
        let mut consequent = vec![MembershipFunction::NULL; rs.outputs.len()];
        for clause in &rule.consequent {
            let i = slot(&rs.outputs, &clause.signal)
                .ok_or_else(|| ResolveError::Malformed(format!("undeclared output {}", clause.signal)))?;
            consequent[i] = clause_function(clause, dict)?;
        }
        rules.push(CompiledRule { antecedent, consequent });
    }
    CompiledRuleSet::new(rs.inputs.clone(), rs.outputs.clone(), rules)
}
