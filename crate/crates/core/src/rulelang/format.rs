use std::fmt::Write;

use super::{Clause, RuleSet, SignalDecl};

/// Canonical text for a rule set: upper-case keywords, one declaration line
/// per direction, one rule per paragraph. Comments are not preserved.
pub fn format(rs: &RuleSet) -> String {
    let mut out = String::new();
    declarations(&mut out, "INPUT", &rs.inputs);
    declarations(&mut out, "OUTPUT", &rs.outputs);
    for rule in &rs.rules {
        out.push_str("\n(IF ");
        if rule.is_conjunctive() {
            out.push_str(&conjunction(&rule.antecedent[0]));
        } else {
            let groups: Vec<String> = rule
                .antecedent
                .iter()
                .map(|g| format!("({})", conjunction(g)))
                .collect();
            out.push_str(&groups.join(" OR "));
        }
        out.push_str("\n THEN ");
        out.push_str(&conjunction(&rule.consequent));
        out.push_str(")\n");
    }
    out
}

fn declarations(out: &mut String, keyword: &str, decls: &[SignalDecl]) {
    out.push('(');
    out.push_str(keyword);
    for d in decls {
        // f64 Display is the shortest text that parses back to the same value
        let _ = write!(out, " {} ({} {})", d.name, d.universe.lo(), d.universe.hi());
    }
    out.push_str(")\n");
}

fn conjunction(clauses: &[Clause]) -> String {
    clauses
        .iter()
        .map(Clause::to_string)
        .collect::<Vec<_>>()
        .join(" AND ")
}
