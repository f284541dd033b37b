//! Objective and constraint mini-language.
//!
//! ```text
//! objective  := ("min" | "max") expr
//! constraint := expr ("<=" | "=" | ">=") number
//! expr       := ["-"] term (("+" | "-") term)*
//! term       := [number "*"] key
//! ```
//!
//! Keys are the quantity keys of the model: `total_cost`, `total_outcome`,
//! `activity:<id>`, `receptor:<name>`, `emission:<name>`, `indicator:<name>`.

use std::fmt;

use indexmap::IndexMap;
use planopt_core::lp::{Relation, Sense};
use planopt_core::model::{ObjectiveSpec, QuantityKey, UserConstraint};

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub input: String,
    /// Byte offset of the offending token.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let column = self.input[..self.offset.min(self.input.len())].chars().count();
        writeln!(f, "{}", self.message)?;
        writeln!(f, "  {}", self.input)?;
        write!(f, "  {}^", " ".repeat(column))
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Word(String),
    Plus,
    Minus,
    Star,
    Rel(Relation),
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(v) => write!(f, "number {v}"),
            Token::Word(w) => write!(f, "{w:?}"),
            Token::Plus => f.write_str("'+'"),
            Token::Minus => f.write_str("'-'"),
            Token::Star => f.write_str("'*'"),
            Token::Rel(r) => write!(f, "'{r}'"),
            Token::End => f.write_str("end of input"),
        }
    }
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '+' | '*' | '<' | '>' | '=')
}

fn tokenize(input: &str) -> Result<Vec<(usize, Token)>, SpecError> {
    let err = |offset, message: String| SpecError {
        input: input.to_string(),
        offset,
        message,
    };
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(at, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let rest = &input[at..];
        let (len, token) = match c {
            '+' => (1, Token::Plus),
            '-' => (1, Token::Minus),
            '*' => (1, Token::Star),
            '<' | '>' => {
                if !rest[1..].starts_with('=') {
                    return Err(err(at, format!("expected '{c}=', found '{c}'")));
                }
                (2, Token::Rel(if c == '<' { Relation::Le } else { Relation::Ge }))
            }
            '=' => (if rest[1..].starts_with('=') { 2 } else { 1 }, Token::Rel(Relation::Eq)),
            c if c.is_ascii_digit() || c == '.' => {
                let len = number_len(rest);
                let text = &rest[..len];
                let v: f64 = text.parse().map_err(|_| err(at, format!("invalid number {text:?}")))?;
                if !v.is_finite() {
                    return Err(err(at, format!("number {text:?} is not finite")));
                }
                (len, Token::Number(v))
            }
            _ => {
                let len = rest.find(|c: char| !is_word_char(c)).unwrap_or(rest.len());
                (len, Token::Word(rest[..len].to_string()))
            }
        };
        out.push((at, token));
        while chars.peek().is_some_and(|&(i, _)| i < at + len) {
            chars.next();
        }
    }
    out.push((input.len(), Token::End));
    Ok(out)
}

/// Length of the numeric literal at the start of `s`, exponent included.
fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Result<Self, SpecError> {
        Ok(Self {
            input,
            tokens: tokenize(input)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> SpecError {
        SpecError {
            input: self.input.to_string(),
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> SpecError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn key(&mut self) -> Result<QuantityKey, SpecError> {
        match self.peek().clone() {
            Token::Word(w) => {
                let key = w.parse().map_err(|e: String| self.error(e))?;
                self.next();
                Ok(key)
            }
            _ => Err(self.unexpected("a quantity key")),
        }
    }

    fn term(&mut self, sign: f64, terms: &mut IndexMap<QuantityKey, f64>) -> Result<(), SpecError> {
        let coef = match *self.peek() {
            Token::Number(v) => {
                self.next();
                if *self.peek() != Token::Star {
                    return Err(self.unexpected("'*'"));
                }
                self.next();
                v
            }
            _ => 1.0,
        };
        let key = self.key()?;
        *terms.entry(key).or_insert(0.0) += sign * coef;
        Ok(())
    }

    fn expr(&mut self) -> Result<IndexMap<QuantityKey, f64>, SpecError> {
        let mut terms = IndexMap::new();
        let mut sign = 1.0;
        if *self.peek() == Token::Minus {
            self.next();
            sign = -1.0;
        }
        self.term(sign, &mut terms)?;
        loop {
            sign = match self.peek() {
                Token::Plus => 1.0,
                Token::Minus => -1.0,
                _ => break,
            };
            self.next();
            self.term(sign, &mut terms)?;
        }
        Ok(terms)
    }

    fn number(&mut self) -> Result<f64, SpecError> {
        let sign = match self.peek() {
            Token::Minus => {
                self.next();
                -1.0
            }
            Token::Plus => {
                self.next();
                1.0
            }
            _ => 1.0,
        };
        match *self.peek() {
            Token::Number(v) => {
                self.next();
                Ok(sign * v)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn end(&self) -> Result<(), SpecError> {
        if *self.peek() == Token::End {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}

/// Collapses runs of whitespace so equivalent specs share a label.
pub fn canonical_label(input: &str) -> String {
    input.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn parse_objective(input: &str) -> Result<ObjectiveSpec, SpecError> {
    let mut p = Parser::new(input)?;
    let sense = match p.peek() {
        Token::Word(w) if w == "min" => Sense::Minimize,
        Token::Word(w) if w == "max" => Sense::Maximize,
        _ => return Err(p.unexpected("'min' or 'max'")),
    };
    p.next();
    let terms = p.expr()?;
    p.end()?;
    Ok(ObjectiveSpec {
        terms,
        sense,
        label: canonical_label(input),
    })
}

pub fn parse_constraint(input: &str) -> Result<UserConstraint, SpecError> {
    let mut p = Parser::new(input)?;
    let terms = p.expr()?;
    let relation = match *p.peek() {
        Token::Rel(r) => r,
        _ => return Err(p.unexpected("'<=', '=' or '>='")),
    };
    p.next();
    let rhs = p.number()?;
    p.end()?;
    Ok(UserConstraint { terms, relation, rhs })
}

/// Splits `spec;spec;...` and parses each objective, reporting offsets
/// relative to the whole argument.
pub fn parse_objectives(input: &str) -> Result<Vec<ObjectiveSpec>, SpecError> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in input.split(';') {
        if !part.trim().is_empty() {
            out.push(parse_objective(part).map_err(|e| SpecError {
                input: input.to_string(),
                offset: start + e.offset,
                message: e.message,
            })?);
        }
        start += part.len() + 1;
    }
    Ok(out)
}
