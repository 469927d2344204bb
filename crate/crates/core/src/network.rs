//! Cascaded chips: one chip's crisp output drives other chips' inputs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::engine::{ChipObject, CrispOutput, EngineError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("unknown chip {0}")]
    UnknownChip(String),
    #[error("chip {0} already exists")]
    DuplicateChip(String),
    #[error("chip {chip} has no {what} {position}")]
    BadPosition {
        chip: String,
        what: &'static str,
        position: usize,
    },
    #[error("{chip} input {input} is already driven by {src} output {output}")]
    AlreadyDriven {
        chip: String,
        input: usize,
        src: String,
        output: usize,
    },
    #[error("connecting {src} to {dst} would create a cycle")]
    Cycle { src: String, dst: String },
    #[error("{chip} input {input} has no external value and no connection")]
    MissingInput { chip: String, input: usize },
    #[error("{chip} input {input} is connected and cannot also be asserted externally")]
    DrivenTwice { chip: String, input: usize },
    #[error("chip {chip} is connected; disconnect it before removing or changing its interface")]
    InUse { chip: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `src` output `src_output` drives `dst` input `dst_input`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Connection {
    pub src: String,
    pub src_output: usize,
    pub dst: String,
    pub dst_input: usize,
}

impl Connection {
    pub fn new(src: &str, src_output: usize, dst: &str, dst_input: usize) -> Self {
        Connection {
            src: src.to_ascii_uppercase(),
            src_output,
            dst: dst.to_ascii_uppercase(),
            dst_input,
        }
    }
}

/// Non-fatal finding about a connection.
#[derive(Debug, Clone, PartialEq)]
pub struct Lint {
    pub connection: Connection,
    pub message: String,
}

/// Result of propagating one set of external inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    /// Crisp value of every chip output, keyed by (chip, output position).
    pub outputs: BTreeMap<(String, usize), CrispOutput>,
    /// Chips in the order they were evaluated; each appears once.
    pub order: Vec<String>,
}

impl Propagation {
    pub fn get(&self, chip: &str, output: usize) -> Option<CrispOutput> {
        self.outputs.get(&(chip.to_ascii_uppercase(), output)).copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChipNetwork {
    chips: BTreeMap<String, ChipObject>,
    connections: Vec<Connection>,
}

impl ChipNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_chip(&mut self, chip: ChipObject) -> Result<(), NetworkError> {
        if self.chips.contains_key(chip.name()) {
            return Err(NetworkError::DuplicateChip(chip.name().to_string()));
        }
        self.chips.insert(chip.name().to_string(), chip);
        Ok(())
    }

    /// Swaps in a new snapshot of an existing chip. Connected chips must keep
    /// their input and output counts.
    pub fn replace_chip(&mut self, chip: ChipObject) -> Result<ChipObject, NetworkError> {
        let old = self
            .chips
            .get(chip.name())
            .ok_or_else(|| NetworkError::UnknownChip(chip.name().to_string()))?;
        let connected = self.connections.iter().any(|c| c.src == chip.name() || c.dst == chip.name());
        if connected && (old.input_count() != chip.input_count() || old.output_count() != chip.output_count()) {
            return Err(NetworkError::InUse {
                chip: chip.name().to_string(),
            });
        }
        Ok(self.chips.insert(chip.name().to_string(), chip).expect("checked above"))
    }

    pub fn remove_chip(&mut self, name: &str) -> Result<ChipObject, NetworkError> {
        let key = name.to_ascii_uppercase();
        if self.connections.iter().any(|c| c.src == key || c.dst == key) {
            return Err(NetworkError::InUse { chip: key });
        }
        self.chips.remove(&key).ok_or(NetworkError::UnknownChip(key))
    }

    pub fn chip(&self, name: &str) -> Option<&ChipObject> {
        self.chips.get(&name.to_ascii_uppercase())
    }

    pub fn chips(&self) -> impl Iterator<Item = &ChipObject> {
        self.chips.values()
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    fn existing(&self, name: &str) -> Result<&ChipObject, NetworkError> {
        self.chips
            .get(name)
            .ok_or_else(|| NetworkError::UnknownChip(name.to_string()))
    }

    fn driver_of(&self, chip: &str, input: usize) -> Option<&Connection> {
        self.connections.iter().find(|c| c.dst == chip && c.dst_input == input)
    }

    /// True when `to` is reachable from `from` along existing connections.
    fn reaches(&self, from: &str, to: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(node) = stack.pop() {
            if node == to {
                return true;
            }
            if seen.insert(node) {
                stack.extend(self.connections.iter().filter(|c| c.src == node).map(|c| c.dst.as_str()));
            }
        }
        false
    }

    /// Adds a connection. Returns lints, e.g. when the source universe does
    /// not fit inside the destination universe.
    pub fn connect(&mut self, c: Connection) -> Result<Vec<Lint>, NetworkError> {
        let c = Connection::new(&c.src, c.src_output, &c.dst, c.dst_input);
        let src = self.existing(&c.src)?;
        let dst = self.existing(&c.dst)?;
        if c.src_output >= src.output_count() {
            return Err(NetworkError::BadPosition {
                chip: c.src.clone(),
                what: "output",
                position: c.src_output,
            });
        }
        if c.dst_input >= dst.input_count() {
            return Err(NetworkError::BadPosition {
                chip: c.dst.clone(),
                what: "input",
                position: c.dst_input,
            });
        }
        if let Some(existing) = self.driver_of(&c.dst, c.dst_input) {
            return Err(NetworkError::AlreadyDriven {
                chip: c.dst.clone(),
                input: c.dst_input,
                src: existing.src.clone(),
                output: existing.src_output,
            });
        }
        if c.src == c.dst || self.reaches(&c.dst, &c.src) {
            return Err(NetworkError::Cycle {
                src: c.src.clone(),
                dst: c.dst.clone(),
            });
        }
        let from = &src.compiled().outputs()[c.src_output];
        let to = &dst.compiled().inputs()[c.dst_input];
        let mut lints = Vec::new();
        if !from.universe.is_within(&to.universe) {
            lints.push(Lint {
                connection: c.clone(),
                message: format!(
                    "{}.{} ranges over [{}, {}] but {}.{} only covers [{}, {}]; values outside will clamp",
                    c.src,
                    from.name,
                    from.universe.lo(),
                    from.universe.hi(),
                    c.dst,
                    to.name,
                    to.universe.lo(),
                    to.universe.hi()
                ),
            });
        }
        self.connections.push(c);
        Ok(lints)
    }

    pub fn disconnect(&mut self, c: &Connection) -> bool {
        let c = Connection::new(&c.src, c.src_output, &c.dst, c.dst_input);
        let before = self.connections.len();
        self.connections.retain(|x| *x != c);
        self.connections.len() != before
    }

    /// Inputs that must be supplied externally.
    pub fn undriven_inputs(&self) -> Vec<(String, usize)> {
        self.chips
            .values()
            .flat_map(|chip| (0..chip.input_count()).map(move |i| (chip.name().to_string(), i)))
            .filter(|(chip, i)| self.driver_of(chip, *i).is_none())
            .collect()
    }

    /// Kahn's algorithm; ties broken by chip name so the order is stable.
    fn topological_order(&self) -> Vec<&str> {
        let mut indegree: BTreeMap<&str, usize> = self.chips.keys().map(|k| (k.as_str(), 0)).collect();
        for c in &self.connections {
            *indegree.get_mut(c.dst.as_str()).expect("connections reference chips") += 1;
        }
        let mut ready: VecDeque<&str> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&k, _)| k).collect();
        let mut order = Vec::with_capacity(self.chips.len());
        while let Some(node) = ready.pop_front() {
            order.push(node);
            let mut next = BTreeSet::new();
            for c in self.connections.iter().filter(|c| c.src == node) {
                let d = indegree.get_mut(c.dst.as_str()).expect("connections reference chips");
                *d -= 1;
                if *d == 0 {
                    next.insert(c.dst.as_str());
                }
            }
            ready.extend(next);
        }
        order
    }

    /// Evaluates every chip once, upstream first. `external` supplies every
    /// input that has no connection, keyed by (chip, input position).
    pub fn propagate(&self, external: &BTreeMap<(String, usize), f64>) -> Result<Propagation, NetworkError> {
        let external: BTreeMap<(String, usize), f64> = external
            .iter()
            .map(|((chip, i), &v)| ((chip.to_ascii_uppercase(), *i), v))
            .collect();
        for (chip, input) in external.keys() {
            let c = self.existing(chip)?;
            if *input >= c.input_count() {
                return Err(NetworkError::BadPosition {
                    chip: chip.clone(),
                    what: "input",
                    position: *input,
                });
            }
            if self.driver_of(chip, *input).is_some() {
                return Err(NetworkError::DrivenTwice {
                    chip: chip.clone(),
                    input: *input,
                });
            }
        }
        if let Some((chip, input)) = self
            .undriven_inputs()
            .into_iter()
            .find(|key| !external.contains_key(key))
        {
            return Err(NetworkError::MissingInput { chip, input });
        }

        let mut outputs = BTreeMap::new();
        let mut order = Vec::with_capacity(self.chips.len());
        for name in self.topological_order() {
            let chip = &self.chips[name];
            let mut xs = Vec::with_capacity(chip.input_count());
            let mut starved = false;
            for i in 0..chip.input_count() {
                let value = match self.driver_of(name, i) {
                    Some(c) => outputs[&(c.src.clone(), c.src_output)],
                    None => CrispOutput::Value(external[&(name.to_string(), i)]),
                };
                match value {
                    CrispOutput::Value(v) => xs.push(v),
                    CrispOutput::NoActivation => starved = true,
                }
            }
            let results = if starved {
                vec![CrispOutput::NoActivation; chip.output_count()]
            } else {
                chip.assert_input(&xs)?.outputs
            };
            for (o, r) in results.into_iter().enumerate() {
                outputs.insert((name.to_string(), o), r);
            }
            order.push(name.to_string());
        }
        Ok(Propagation { outputs, order })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ChipType;
    use crate::membership::{make_triangle, MembershipFunction, Universe};
    use crate::rulelang::{CompiledRule, CompiledRuleSet, Direction, SignalDecl};

    fn chip(name: &str, inputs: usize, outputs: usize, range: (f64, f64)) -> ChipObject {
        let decl = |prefix: &str, i: usize, direction| SignalDecl {
            name: format!("{prefix}{i}"),
            universe: Universe::new(range.0, range.1).unwrap(),
            direction,
            position: i,
        };
        let rules = vec![
            CompiledRule {
                antecedent: (0..inputs).map(|i| make_triangle(3 + i, 9).unwrap()).collect(),
                consequent: (0..outputs).map(|o| make_triangle(4 + o, 1).unwrap()).collect(),
            },
            CompiledRule {
                antecedent: (0..inputs).map(|i| make_triangle(12 - i, 8).unwrap()).collect(),
                consequent: (0..outputs).map(|o| make_triangle(11 - o, 14).unwrap()).collect(),
            },
        ];
        let compiled = CompiledRuleSet::new(
            (0..inputs).map(|i| decl("IN", i, Direction::Input)).collect(),
            (0..outputs).map(|o| decl("OUT", o, Direction::Output)).collect(),
            rules,
        )
        .unwrap();
        ChipObject::new(name, ChipType::MinMax, compiled).unwrap()
    }

    fn ext(items: &[(&str, usize, f64)]) -> BTreeMap<(String, usize), f64> {
        items.iter().map(|&(c, i, v)| ((c.to_string(), i), v)).collect()
    }

    fn abc() -> ChipNetwork {
        let mut net = ChipNetwork::new();
        net.add_chip(chip("A", 1, 1, (0.0, 10.0))).unwrap();
        net.add_chip(chip("B", 2, 1, (0.0, 10.0))).unwrap();
        net.add_chip(chip("C", 1, 2, (0.0, 10.0))).unwrap();
        net
    }

    #[test]
    fn fan_out_is_allowed() {
        let mut net = abc();
        assert!(net.connect(Connection::new("A", 0, "B", 0)).unwrap().is_empty());
        assert!(net.connect(Connection::new("a", 0, "c", 0)).unwrap().is_empty());
        assert_eq!(net.connections().len(), 2);
    }

    #[test]
    fn cycles_and_double_drivers_rejected() {
        let mut net = abc();
        net.connect(Connection::new("A", 0, "B", 0)).unwrap();
        assert!(matches!(
            net.connect(Connection::new("B", 0, "A", 0)),
            Err(NetworkError::Cycle { .. })
        ));
        assert!(matches!(
            net.connect(Connection::new("C", 0, "B", 0)),
            Err(NetworkError::AlreadyDriven { .. })
        ));
        assert!(matches!(
            net.connect(Connection::new("C", 0, "C", 0)),
            Err(NetworkError::Cycle { .. })
        ));
        net.connect(Connection::new("B", 0, "C", 0)).unwrap();
        assert!(matches!(
            net.connect(Connection::new("C", 1, "A", 0)),
            Err(NetworkError::Cycle { .. })
        ));
        assert!(matches!(
            net.connect(Connection::new("A", 1, "B", 1)),
            Err(NetworkError::BadPosition { what: "output", .. })
        ));
        assert!(matches!(
            net.connect(Connection::new("Z", 0, "B", 1)),
            Err(NetworkError::UnknownChip(_))
        ));
    }

    #[test]
    fn universe_mismatch_is_a_lint() {
        let mut net = ChipNetwork::new();
        net.add_chip(chip("WIDE", 1, 1, (0.0, 500.0))).unwrap();
        net.add_chip(chip("NARROW", 1, 1, (0.0, 10.0))).unwrap();
        let lints = net.connect(Connection::new("WIDE", 0, "NARROW", 0)).unwrap();
        assert_eq!(lints.len(), 1);
        assert!(lints[0].message.contains("clamp"));
        assert!(net.connect(Connection::new("NARROW", 0, "WIDE", 0)).is_err());
    }

    #[test]
    fn single_chip_matches_assert_input() {
        let mut net = ChipNetwork::new();
        let b = chip("B", 2, 1, (0.0, 10.0));
        net.add_chip(b.clone()).unwrap();
        let p = net.propagate(&ext(&[("B", 0, 3.3), ("B", 1, 7.1)])).unwrap();
        assert_eq!(p.get("B", 0).unwrap(), b.assert_input(&[3.3, 7.1]).unwrap().outputs[0]);
        assert_eq!(p.order, vec!["B"]);
    }

    #[test]
    fn cascade_matches_manual_composition() {
        let mut net = abc();
        net.connect(Connection::new("A", 0, "B", 1)).unwrap();
        net.connect(Connection::new("B", 0, "C", 0)).unwrap();
        let p = net.propagate(&ext(&[("A", 0, 9.0), ("B", 0, 9.0)])).unwrap();
        let a = net.chip("A").unwrap().assert_input(&[9.0]).unwrap().outputs[0].value().unwrap();
        let b = net.chip("B").unwrap().assert_input(&[9.0, a]).unwrap().outputs[0].value().unwrap();
        let c = net.chip("C").unwrap().assert_input(&[b]).unwrap().outputs;
        assert_eq!(p.get("C", 0), Some(c[0]));
        assert_eq!(p.get("C", 1), Some(c[1]));
        assert_eq!(p.order, vec!["A", "B", "C"]);
    }

    #[test]
    fn missing_and_doubly_driven_inputs() {
        let mut net = abc();
        net.connect(Connection::new("A", 0, "B", 1)).unwrap();
        assert_eq!(
            net.propagate(&ext(&[("A", 0, 1.0), ("B", 0, 1.0)])),
            Err(NetworkError::MissingInput { chip: "C".into(), input: 0 })
        );
        assert_eq!(
            net.propagate(&ext(&[("A", 0, 1.0), ("B", 0, 1.0), ("B", 1, 1.0), ("C", 0, 1.0)])),
            Err(NetworkError::DrivenTwice { chip: "B".into(), input: 1 })
        );
    }

    #[test]
    fn no_activation_is_absorbing() {
        let dead = {
            let inputs = vec![SignalDecl {
                name: "X".into(),
                universe: Universe::new(0.0, 10.0).unwrap(),
                direction: Direction::Input,
                position: 0,
            }];
            let outputs = vec![SignalDecl {
                name: "Y".into(),
                universe: Universe::new(0.0, 10.0).unwrap(),
                direction: Direction::Output,
                position: 0,
            }];
            let rules = vec![CompiledRule {
                antecedent: vec![MembershipFunction::NULL],
                consequent: vec![MembershipFunction::ANY],
            }];
            ChipObject::new("DEAD", ChipType::MinMax, CompiledRuleSet::new(inputs, outputs, rules).unwrap()).unwrap()
        };
        let mut net = abc();
        net.add_chip(dead).unwrap();
        net.connect(Connection::new("DEAD", 0, "B", 0)).unwrap();
        net.connect(Connection::new("B", 0, "C", 0)).unwrap();
        let p = net
            .propagate(&ext(&[("DEAD", 0, 5.0), ("B", 1, 2.0), ("A", 0, 4.0)]))
            .unwrap();
        assert_eq!(p.get("DEAD", 0), Some(CrispOutput::NoActivation));
        assert_eq!(p.get("B", 0), Some(CrispOutput::NoActivation));
        assert_eq!(p.get("C", 0), Some(CrispOutput::NoActivation));
        assert_eq!(p.get("C", 1), Some(CrispOutput::NoActivation));
        assert!(p.get("A", 0).unwrap().value().is_some());
        assert_eq!(p.order.len(), 4);
    }

    #[test]
    fn disconnect_restores_behavior() {
        let mut net = abc();
        let inputs = ext(&[("A", 0, 1.5), ("B", 0, 2.5), ("B", 1, 8.0), ("C", 0, 4.0)]);
        let before = net.propagate(&inputs).unwrap();
        let conn = Connection::new("A", 0, "C", 0);
        net.connect(conn.clone()).unwrap();
        assert!(net.propagate(&inputs).is_err());
        assert!(net.disconnect(&conn));
        assert_eq!(net.propagate(&inputs).unwrap(), before);
    }

    #[test]
    fn insertion_order_does_not_matter() {
        let mut fwd = ChipNetwork::new();
        let mut rev = ChipNetwork::new();
        let chips = [chip("A", 1, 1, (0.0, 10.0)), chip("B", 2, 1, (0.0, 10.0)), chip("C", 1, 2, (0.0, 10.0))];
        for c in &chips {
            fwd.add_chip(c.clone()).unwrap();
        }
        for c in chips.iter().rev() {
            rev.add_chip(c.clone()).unwrap();
        }
        for net in [&mut fwd, &mut rev] {
            net.connect(Connection::new("B", 0, "A", 0)).unwrap();
            net.connect(Connection::new("A", 0, "C", 0)).unwrap();
        }
        let inputs = ext(&[("B", 0, 2.5), ("B", 1, 8.0)]);
        assert_eq!(fwd.propagate(&inputs).unwrap(), rev.propagate(&inputs).unwrap());
    }

    #[test]
    fn replace_and_remove() {
        let mut net = abc();
        net.connect(Connection::new("A", 0, "B", 0)).unwrap();
        assert!(matches!(net.remove_chip("A"), Err(NetworkError::InUse { .. })));
        assert!(net.replace_chip(chip("A", 1, 1, (0.0, 20.0))).is_ok());
        assert!(matches!(net.replace_chip(chip("A", 2, 1, (0.0, 20.0))), Err(NetworkError::InUse { .. })));
        assert!(net.remove_chip("C").is_ok());
        assert!(matches!(net.add_chip(chip("B", 1, 1, (0.0, 1.0))), Err(NetworkError::DuplicateChip(_))));
    }
}
