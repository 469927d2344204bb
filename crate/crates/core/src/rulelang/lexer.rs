use super::parser::{ParseError, ParseErrorKind};
use super::Location;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Open,
    Close,
    /// Upper-cased identifier or keyword.
    Word(String),
    Number(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub location: Location,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')'
}

/// Splits rule text into tokens, dropping `(* ... )` comments.
pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut line = 1;
    let mut line_start = 0;
    let loc_of = |offset: usize, line: usize, line_start: usize| Location {
        line,
        column: text[line_start..offset].chars().count() + 1,
    };

    while let Some(&(offset, c)) = chars.peek() {
        let location = loc_of(offset, line, line_start);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                line_start = offset + 1;
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                if matches!(chars.peek(), Some((_, '*'))) {
                    // comment runs to the first closing paren
                    loop {
                        match chars.next() {
                            Some((_, ')')) => break,
                            Some((o, '\n')) => {
                                line += 1;
                                line_start = o + 1;
                            }
                            Some(_) => {}
                            None => {
                                return Err(ParseError::new(ParseErrorKind::UnterminatedComment, location))
                            }
                        }
                    }
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Open,
                        location,
                    });
                }
            }
            ')' => {
                chars.next();
                tokens.push(Token {
                    kind: TokenKind::Close,
                    location,
                });
            }
            _ => {
                let start = offset;
                let mut end = offset;
                while let Some(&(o, ch)) = chars.peek() {
                    if is_delimiter(ch) {
                        break;
                    }
                    end = o + ch.len_utf8();
                    chars.next();
                }
                let word = &text[start..end];
                tokens.push(Token {
                    kind: classify(word, location)?,
                    location,
                });
            }
        }
    }
    Ok(tokens)
}

fn classify(word: &str, location: Location) -> Result<TokenKind, ParseError> {
    let first = word.chars().next().unwrap_or(' ');
    if first.is_ascii_alphabetic() {
        if let Some(bad) = word
            .chars()
            .find(|&c| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-')))
        {
            return Err(ParseError::new(
                ParseErrorKind::Lexical(format!("unexpected character {bad:?} in {word:?}")),
                location,
            ));
        }
        return Ok(TokenKind::Word(word.to_ascii_uppercase()));
    }
    if first.is_ascii_digit() || matches!(first, '-' | '+' | '.') {
        return match word.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(TokenKind::Number(v)),
            _ => Err(ParseError::new(
                ParseErrorKind::Lexical(format!("malformed number {word:?}")),
                location,
            )),
        };
    }
    Err(ParseError::new(
        ParseErrorKind::Lexical(format!("unexpected character {first:?}")),
        location,
    ))
}
