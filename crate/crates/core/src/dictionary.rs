//! Named fuzzy-variable definitions and their text file format.
//!
//! One definition per line:
//!
//! ```text
//! (* comment *)
//! (DEFINE HIGH.TEMP (0 0 0 0 0 0 0 0 0 1 4 8 11 15 15 15))
//! ```
//!
//! Names are case-insensitive and stored upper-cased.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::membership::{MembershipError, MembershipFunction};

/// Names that always resolve to the padding functions and cannot be redefined.
pub const RESERVED_NAMES: [&str; 2] = ["ANY", "NULL"];

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate definition {name}")]
    DuplicateLine { line: usize, name: String },
    #[error("duplicate definition {0}")]
    Duplicate(String),
    #[error("invalid definition name {0:?}")]
    InvalidName(String),
    #[error("{0} is a reserved name")]
    Reserved(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Checks `[A-Za-z][A-Za-z0-9._-]*`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FuzzyDictionary {
    entries: BTreeMap<String, MembershipFunction>,
}

impl FuzzyDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&MembershipFunction> {
        self.entries.get(&name.to_ascii_uppercase())
    }

    /// Looks up a definition, falling back to the reserved ANY/NULL functions.
    pub fn lookup(&self, name: &str) -> Option<MembershipFunction> {
        let key = name.to_ascii_uppercase();
        match key.as_str() {
            "ANY" => Some(MembershipFunction::ANY),
            "NULL" => Some(MembershipFunction::NULL),
            _ => self.entries.get(&key).copied(),
        }
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Adds a new definition; fails if the name is taken.
    pub fn insert(&mut self, name: &str, mf: MembershipFunction) -> Result<(), DictionaryError> {
        let key = Self::key(name)?;
        if self.entries.contains_key(&key) {
            return Err(DictionaryError::Duplicate(key));
        }
        self.entries.insert(key, mf);
        Ok(())
    }

    /// Adds or replaces a definition, returning the previous one.
    pub fn set(
        &mut self,
        name: &str,
        mf: MembershipFunction,
    ) -> Result<Option<MembershipFunction>, DictionaryError> {
        let key = Self::key(name)?;
        Ok(self.entries.insert(key, mf))
    }

    pub fn remove(&mut self, name: &str) -> Option<MembershipFunction> {
        self.entries.remove(&name.to_ascii_uppercase())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MembershipFunction)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn key(name: &str) -> Result<String, DictionaryError> {
        if !is_valid_name(name) {
            return Err(DictionaryError::InvalidName(name.to_string()));
        }
        let key = name.to_ascii_uppercase();
        if RESERVED_NAMES.contains(&key.as_str()) {
            return Err(DictionaryError::Reserved(key));
        }
        Ok(key)
    }

    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut dict = FuzzyDictionary::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with("(*") {
                continue;
            }
            let (name, mf) = parse_define(trimmed).map_err(|message| DictionaryError::Parse { line, message })?;
            match dict.insert(&name, mf) {
                Ok(()) => {}
                Err(DictionaryError::Duplicate(name)) => {
                    return Err(DictionaryError::DuplicateLine { line, name })
                }
                Err(e) => {
                    return Err(DictionaryError::Parse {
                        line,
                        message: e.to_string(),
                    })
                }
            }
        }
        Ok(dict)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(name, mf)| define_line(name, mf))
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DictionaryError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DictionaryError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Renders one `(DEFINE ...)` line, newline included.
pub fn define_line(name: &str, mf: &MembershipFunction) -> String {
    format!("(DEFINE {} {})\n", name.to_ascii_uppercase(), mf)
}

fn parse_define(line: &str) -> Result<(String, MembershipFunction), String> {
    let body = line
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| "expected (DEFINE <NAME> (<16 levels>))".to_string())?;
    let mut parts = body.trim_start().splitn(2, char::is_whitespace);
    let keyword = parts.next().unwrap_or_default();
    if !keyword.eq_ignore_ascii_case("DEFINE") {
        return Err(format!("expected DEFINE, found {keyword:?}"));
    }
    let rest = parts.next().unwrap_or_default().trim_start();
    let (name, vector) = rest
        .split_once(|c: char| c.is_whitespace() || c == '(')
        .map(|(n, _)| (n, rest[n.len()..].trim()))
        .ok_or_else(|| "missing level vector".to_string())?;
    if !is_valid_name(name) {
        return Err(format!("invalid definition name {name:?}"));
    }
    let inner = vector
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| "level vector must be parenthesized".to_string())?;
    let values = inner
        .split_whitespace()
        .map(|tok| {
            tok.parse::<i64>()
                .map_err(|_| format!("truth value {tok:?} is not an integer"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mf = MembershipFunction::from_slice(&values).map_err(|e: MembershipError| e.to_string())?;
    Ok((name.to_string(), mf))
}
