//! Line-oriented text helpers shared by the instance file formats.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            msg: msg.into(),
        }
    }
}

/// Non-blank lines with `#` comments stripped, paired with 1-based line numbers.
pub fn content_lines(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.lines().enumerate().filter_map(|(i, l)| {
        let l = match l.find('#') {
            Some(c) => &l[..c],
            None => l,
        };
        let l = l.trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| ParseError::new(line, format!("expected {what}")))
}
