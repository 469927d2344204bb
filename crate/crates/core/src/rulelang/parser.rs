use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use super::lexer::{tokenize, Token, TokenKind};
use super::{Clause, Direction, Location, Rule, RuleSet, SignalDecl};
use crate::membership::{Adverb, Universe};

const KEYWORDS: [&str; 7] = ["IF", "THEN", "AND", "OR", "IS", "INPUT", "OUTPUT"];

/// Upper bound on antecedent groups produced by distributing AND over OR.
const MAX_DISJUNCTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Lexical(String),
    #[error("unterminated comment")]
    UnterminatedComment,
    #[error("unbalanced parentheses: {0}")]
    Unbalanced(&'static str),
    #[error("expected {expected}, found {found}")]
    Expected { expected: String, found: String },
    #[error("unknown signal {0}")]
    UnknownSignal(String),
    #[error("{signal} is an {actual} signal and cannot appear in the {part}")]
    WrongDirection {
        signal: String,
        actual: Direction,
        part: &'static str,
    },
    #[error("duplicate declaration of {0}")]
    DuplicateDeclaration(String),
    #[error("signal {0} appears twice in one conjunction")]
    DuplicateClause(String),
    #[error("{0} is a reserved word")]
    Reserved(String),
    #[error("invalid universe: {0}")]
    InvalidUniverse(String),
    #[error("OR is only allowed in the antecedent")]
    DisjunctiveConsequent,
    #[error("antecedent expands to more than {MAX_DISJUNCTS} conjunctive groups")]
    TooManyDisjuncts,
    #[error("no rules")]
    NoRules,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{location}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub location: Location,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, location: Location) -> Self {
        ParseError { kind, location }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Open => f.write_str("'('"),
            TokenKind::Close => f.write_str("')'"),
            TokenKind::Word(w) => write!(f, "{w}"),
            TokenKind::Number(n) => write!(f, "{n}"),
        }
    }
}

/// Parses rule text whose origin is not a named file.
pub fn parse(text: &str) -> Result<RuleSet, ParseError> {
    parse_named("<input>", text)
}

pub fn parse_named(source: &str, text: &str) -> Result<RuleSet, ParseError> {
    let tokens = tokenize(text)?;
    check_balance(&tokens)?;
    let end = tokens
        .last()
        .map(|t| Location {
            line: t.location.line,
            column: t.location.column + 1,
        })
        .unwrap_or(Location { line: 1, column: 1 });
    if tokens.is_empty() {
        return Err(ParseError::new(ParseErrorKind::NoRules, end));
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    p.declarations(Direction::Input)?;
    p.declarations(Direction::Output)?;
    let mut rules = Vec::new();
    while p.pos < p.tokens.len() {
        rules.push(p.rule()?);
    }
    if rules.is_empty() {
        return Err(ParseError::new(ParseErrorKind::NoRules, end));
    }
    Ok(RuleSet {
        source: source.to_string(),
        inputs: p.inputs,
        outputs: p.outputs,
        rules,
    })
}

fn check_balance(tokens: &[Token]) -> Result<(), ParseError> {
    let mut open = Vec::new();
    for t in tokens {
        match t.kind {
            TokenKind::Open => open.push(t.location),
            TokenKind::Close if open.pop().is_none() => {
                return Err(ParseError::new(ParseErrorKind::Unbalanced("unmatched ')'"), t.location));
            }
            _ => {}
        }
    }
    match open.pop() {
        Some(loc) => Err(ParseError::new(ParseErrorKind::Unbalanced("'(' is never closed"), loc)),
        None => Ok(()),
    }
}

type Dnf = Vec<Vec<Clause>>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Location,
    inputs: Vec<SignalDecl>,
    outputs: Vec<SignalDecl>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn location(&self) -> Location {
        self.peek().map(|t| t.location).unwrap_or(self.end)
    }

    fn found(&self) -> String {
        self.peek()
            .map(|t| t.kind.to_string())
            .unwrap_or_else(|| "end of file".to_string())
    }

    fn expected<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::new(
            ParseErrorKind::Expected {
                expected: expected.to_string(),
                found: self.found(),
            },
            self.location(),
        ))
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Word(w), .. }) if w == word)
    }

    fn at_open(&self) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Open, .. }))
    }

    fn expect_open(&mut self) -> Result<Location, ParseError> {
        if self.at_open() {
            let loc = self.location();
            self.pos += 1;
            Ok(loc)
        } else {
            self.expected("'('")
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token { kind: TokenKind::Close, .. }) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.expected("')'"),
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.at_word(word) {
            self.pos += 1;
            Ok(())
        } else {
            self.expected(word)
        }
    }

    fn expect_number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Number(n),
                ..
            }) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.expected("a number"),
        }
    }

    /// A NAME that is not a keyword.
    fn expect_name(&mut self, what: &str) -> Result<(String, Location), ParseError> {
        let loc = self.location();
        match self.peek() {
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) => {
                if KEYWORDS.contains(&w.as_str()) || Adverb::from_keyword(w).is_some() {
                    return Err(ParseError::new(ParseErrorKind::Reserved(w.clone()), loc));
                }
                let w = w.clone();
                self.pos += 1;
                Ok((w, loc))
            }
            _ => self.expected(what),
        }
    }

    fn declarations(&mut self, direction: Direction) -> Result<(), ParseError> {
        self.expect_open()?;
        self.expect_keyword(&direction.to_string())?;
        let mut count = 0;
        while !matches!(self.peek(), Some(Token { kind: TokenKind::Close, .. }) | None) {
            let (name, loc) = self.expect_name("a signal name")?;
            if self.lookup(&name).is_some() {
                return Err(ParseError::new(ParseErrorKind::DuplicateDeclaration(name), loc));
            }
            let range_loc = self.expect_open()?;
            let lo = self.expect_number()?;
            let hi = self.expect_number()?;
            self.expect_close()?;
            let universe = Universe::new(lo, hi)
                .map_err(|e| ParseError::new(ParseErrorKind::InvalidUniverse(e.to_string()), range_loc))?;
            let list = match direction {
                Direction::Input => &mut self.inputs,
                Direction::Output => &mut self.outputs,
            };
            list.push(SignalDecl {
                name,
                universe,
                direction,
                position: list.len(),
            });
            count += 1;
        }
        if count == 0 {
            return self.expected("a signal declaration");
        }
        self.expect_close()
    }

    fn lookup(&self, name: &str) -> Option<&SignalDecl> {
        self.inputs.iter().chain(&self.outputs).find(|d| d.name == name)
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let location = self.expect_open()?;
        self.expect_keyword("IF")?;
        let antecedent = self.expr()?;
        for group in &antecedent {
            check_unique(group)?;
        }
        self.expect_keyword("THEN")?;
        let mut consequent = vec![self.clause(Direction::Output)?];
        while self.at_word("AND") {
            self.pos += 1;
            consequent.push(self.clause(Direction::Output)?);
        }
        if self.at_word("OR") {
            return Err(ParseError::new(ParseErrorKind::DisjunctiveConsequent, self.location()));
        }
        check_unique(&consequent)?;
        self.expect_close()?;
        Ok(Rule {
            antecedent,
            consequent,
            location,
        })
    }

    fn expr(&mut self) -> Result<Dnf, ParseError> {
        let mut dnf = self.term()?;
        while self.at_word("OR") {
            self.pos += 1;
            let loc = self.location();
            dnf.extend(self.term()?);
            if dnf.len() > MAX_DISJUNCTS {
                return Err(ParseError::new(ParseErrorKind::TooManyDisjuncts, loc));
            }
        }
        Ok(dnf)
    }

    fn term(&mut self) -> Result<Dnf, ParseError> {
        let mut dnf = self.factor()?;
        while self.at_word("AND") {
            self.pos += 1;
            let loc = self.location();
            let rhs = self.factor()?;
            if dnf.len() * rhs.len() > MAX_DISJUNCTS {
                return Err(ParseError::new(ParseErrorKind::TooManyDisjuncts, loc));
            }
            dnf = dnf
                .iter()
                .flat_map(|l| {
                    rhs.iter().map(move |r| {
                        let mut group = l.clone();
                        group.extend(r.iter().cloned());
                        group
                    })
                })
                .collect();
        }
        Ok(dnf)
    }

    fn factor(&mut self) -> Result<Dnf, ParseError> {
        if self.at_open() {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect_close()?;
            Ok(inner)
        } else {
            Ok(vec![vec![self.clause(Direction::Input)?]])
        }
    }

    fn clause(&mut self, side: Direction) -> Result<Clause, ParseError> {
        let (signal, location) = self.expect_name("a signal name")?;
        let decl = self
            .lookup(&signal)
            .ok_or_else(|| ParseError::new(ParseErrorKind::UnknownSignal(signal.clone()), location))?;
        if decl.direction != side {
            return Err(ParseError::new(
                ParseErrorKind::WrongDirection {
                    signal,
                    actual: decl.direction,
                    part: match side {
                        Direction::Input => "antecedent",
                        Direction::Output => "consequent",
                    },
                },
                location,
            ));
        }
        self.expect_keyword("IS")?;
        let mut adverbs = Vec::new();
        while let Some(Token {
            kind: TokenKind::Word(w),
            ..
        }) = self.peek()
        {
            match Adverb::from_keyword(w) {
                Some(a) => {
                    adverbs.push(a);
                    self.pos += 1;
                }
                None => break,
            }
        }
        let (adjective, _) = self.expect_name("an adjective")?;
        Ok(Clause {
            signal,
            adverbs,
            adjective,
            location,
        })
    }
}

fn check_unique(group: &[Clause]) -> Result<(), ParseError> {
    let mut seen = HashSet::new();
    for c in group {
        if !seen.insert(c.signal.as_str()) {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateClause(c.signal.clone()),
                c.location,
            ));
        }
    }
    Ok(())
}
