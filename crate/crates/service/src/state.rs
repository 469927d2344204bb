//! The workbench session: one dictionary, the chips built from it and the
//! network that wires them together.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fuzzchip::network::Lint;
use fuzzchip::rulelang::Location;
use fuzzchip::{
    normalize, parse_named, resolve, ChipNetwork, ChipObject, ChipType, CompileError, CompiledRuleSet, Connection,
    DictionaryError, EngineError, FuzzyDictionary, MembershipFunction, NetworkError, RuleSet,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Option<Location>, message: String) -> Self {
        Diagnostic {
            severity: "error",
            line: location.map(|l| l.line),
            column: location.map(|l| l.column),
            message,
        }
    }

    fn warning(message: String) -> Self {
        Diagnostic {
            severity: "warning",
            line: None,
            column: None,
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalInfo {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChipSummary {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub inputs: Vec<SignalInfo>,
    pub outputs: Vec<SignalInfo>,
    pub rule_count: usize,
    pub normalized_rule_count: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Rule text kept so chips can be rebuilt when the dictionary changes.
#[derive(Debug, Clone)]
struct ChipSource {
    text: String,
    rule_count: usize,
    warnings: Vec<Diagnostic>,
}

#[derive(Debug, Default)]
pub struct SessionState {
    dictionary: FuzzyDictionary,
    dict_path: Option<PathBuf>,
    network: ChipNetwork,
    sources: BTreeMap<String, ChipSource>,
}

fn unused_inputs(rs: &RuleSet) -> Vec<Diagnostic> {
    rs.inputs
        .iter()
        .filter(|d| {
            !rs.rules
                .iter()
                .flat_map(|r| r.antecedent.iter().flatten())
                .any(|c| c.signal == d.name)
        })
        .map(|d| Diagnostic::warning(format!("input {} is not used by any rule", d.name)))
        .collect()
}

fn compile(name: &str, text: &str, dict: &FuzzyDictionary) -> Result<(RuleSet, CompiledRuleSet), CompileError> {
    let parsed = parse_named(name, text)?;
    let compiled = resolve(&normalize(&parsed), dict)?;
    Ok((parsed, compiled))
}

impl SessionState {
    /// An in-memory session; definition writes are not persisted.
    pub fn new(dictionary: FuzzyDictionary) -> Self {
        SessionState {
            dictionary,
            ..Default::default()
        }
    }

    /// A session backed by a dictionary file. A missing file starts empty
    /// and is created on the first definition write.
    pub fn open(dict_path: impl Into<PathBuf>) -> Result<Self, SessionError> {
        let dict_path = dict_path.into();
        let dictionary = if dict_path.exists() {
            FuzzyDictionary::load(&dict_path)?
        } else {
            FuzzyDictionary::new()
        };
        Ok(SessionState {
            dictionary,
            dict_path: Some(dict_path),
            ..Default::default()
        })
    }

    pub fn dictionary(&self) -> &FuzzyDictionary {
        &self.dictionary
    }

    pub fn dict_path(&self) -> Option<&Path> {
        self.dict_path.as_deref()
    }

    pub fn network(&self) -> &ChipNetwork {
        &self.network
    }

    pub fn chip(&self, name: &str) -> Option<&ChipObject> {
        self.network.chip(name)
    }

    /// Builds a chip from rule text and adds it to the session.
    pub fn create_chip(&mut self, name: &str, kind: ChipType, text: &str) -> Result<ChipSummary, SessionError> {
        let key = name.to_ascii_uppercase();
        if self.network.chip(&key).is_some() {
            return Err(NetworkError::DuplicateChip(key).into());
        }
        let (parsed, compiled) = compile(&key, text, &self.dictionary)?;
        let chip = ChipObject::new(&key, kind, compiled)?;
        self.network.add_chip(chip)?;
        self.sources.insert(
            key.clone(),
            ChipSource {
                text: text.to_string(),
                rule_count: parsed.rules.len(),
                warnings: unused_inputs(&parsed),
            },
        );
        Ok(self.summary(&key).expect("just added"))
    }

    /// Loads every `.fzr` file in `dir` as a chip named after the file stem.
    pub fn load_rule_dir(&mut self, dir: &Path, kind: ChipType) -> Result<Vec<String>, SessionError> {
        let io = |e: std::io::Error| SessionError::Io {
            path: dir.to_path_buf(),
            message: e.to_string(),
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("fzr")))
            .collect();
        paths.sort();
        let mut names = Vec::new();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|e| SessionError::Io {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            let summary = self.create_chip(&stem, kind, &text)?;
            names.push(summary.name);
        }
        Ok(names)
    }

    pub fn summary(&self, name: &str) -> Option<ChipSummary> {
        let chip = self.network.chip(name)?;
        let source = &self.sources[chip.name()];
        let info = |decls: &[fuzzchip::rulelang::SignalDecl]| {
            decls
                .iter()
                .map(|d| SignalInfo {
                    name: d.name.clone(),
                    lo: d.universe.lo(),
                    hi: d.universe.hi(),
                })
                .collect()
        };
        Some(ChipSummary {
            name: chip.name().to_string(),
            kind: chip.kind().keyword(),
            inputs: info(chip.compiled().inputs()),
            outputs: info(chip.compiled().outputs()),
            rule_count: source.rule_count,
            normalized_rule_count: chip.rule_count(),
            diagnostics: source.warnings.clone(),
        })
    }

    pub fn summaries(&self) -> Vec<ChipSummary> {
        self.network.chips().filter_map(|c| self.summary(c.name())).collect()
    }

    /// Stores a definition, rebuilds every chip against the new dictionary and
    /// persists the file. Nothing changes unless all three succeed.
    pub fn put_definition(&mut self, name: &str, mf: MembershipFunction) -> Result<(), SessionError> {
        let mut dictionary = self.dictionary.clone();
        dictionary.set(name, mf)?;
        let mut network = self.network.clone();
        for (chip_name, source) in &self.sources {
            let (_, compiled) = compile(chip_name, &source.text, &dictionary)?;
            let chip = network.chip(chip_name).expect("sources track chips").update(compiled)?;
            network.replace_chip(chip)?;
        }
        if let Some(path) = &self.dict_path {
            dictionary.save(path)?;
        }
        self.dictionary = dictionary;
        self.network = network;
        Ok(())
    }

    pub fn connect(&mut self, connection: Connection) -> Result<Vec<Lint>, SessionError> {
        Ok(self.network.connect(connection)?)
    }
}
