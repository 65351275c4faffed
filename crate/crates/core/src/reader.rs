//! Tokenizer and S-expression reader.
//!
//! The reader is a pure function of its input text. It understands
//! `;` comments, string literals, signed 64-bit integers, and the two
//! reflection shorthands: `'e` reads as `(quote e)` and `!e` reads as
//! `(excla e)`. A mark written as the head of a list stands for the
//! operator itself, so `(! e)` is also `(excla e)`.

use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::value::Value;

/// Line and column of a token, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Position {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Open,
    Close,
    Quote,
    Excla,
    Number,
    Symbol,
    Str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text of the token; for strings, the decoded contents.
    pub text: String,
    pub position: Position,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("unterminated string literal starting at {0}")]
    UnterminatedString(Position),
    #[error("unknown escape `\\{1}` in string at {0}")]
    BadEscape(Position, char),
    #[error("integer literal `{1}` out of range at {0}")]
    NumberOutOfRange(Position, String),
    #[error("unexpected `)` at {0}")]
    UnexpectedClose(Position),
    #[error("unclosed `(` opened at {0}")]
    Unclosed(Position),
    #[error("`{1}` at {0} is not followed by an expression")]
    DanglingPrefix(Position, char),
}

/// Parsed program text.
///
/// `Datum` never comes out of the reader. It carries runtime values that
/// were spliced into a list before that list is turned back into program
/// text by `excla` (for example the `+` primitive in `(cons f (car l))`).
#[derive(Clone, Debug)]
pub enum SourceExpr {
    Symbol(Rc<str>),
    Number(i64),
    Str(Rc<str>),
    List(Vec<SourceExpr>),
    Datum(Value),
}

impl SourceExpr {
    pub fn symbol(name: &str) -> Self {
        SourceExpr::Symbol(Rc::from(name))
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SourceExpr::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SourceExpr]> {
        match self {
            SourceExpr::List(items) => Some(items),
            _ => None,
        }
    }
}

/// Structural equality. Embedded data compare by identity of their
/// printed form, which is enough for the reader's own round trips.
impl PartialEq for SourceExpr {
    fn eq(&self, other: &Self) -> bool {
        use SourceExpr::*;
        match (self, other) {
            (Symbol(a), Symbol(b)) => a == b,
            (Number(a), Number(b)) => a == b,
            (Str(a), Str(b)) => a == b,
            (List(a), List(b)) => a == b,
            (Datum(a), Datum(b)) => a.same_datum(b),
            _ => false,
        }
    }
}

impl fmt::Display for SourceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceExpr::Symbol(s) => f.write_str(s),
            SourceExpr::Number(n) => write!(f, "{}", n),
            SourceExpr::Str(s) => write_string_literal(f, s),
            SourceExpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", item)?;
                }
                f.write_str(")")
            }
            SourceExpr::Datum(v) => write!(f, "{}", v),
        }
    }
}

pub(crate) fn write_string_literal<W: fmt::Write>(out: &mut W, s: &str) -> fmt::Result {
    out.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            '\t' => out.write_str("\\t")?,
            c => out.write_char(c)?,
        }
    }
    out.write_char('"')
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '\'' | '!' | ';' | '"')
}

fn looks_numeric(text: &str) -> bool {
    let digits = text.strip_prefix('-').unwrap_or(text);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut pos = Position { line: 1, column: 1 };

    fn advance(pos: &mut Position, c: char) {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    }

    while let Some(&c) = chars.peek() {
        let start = pos;
        let single = match c {
            '(' => Some(TokenKind::Open),
            ')' => Some(TokenKind::Close),
            '\'' => Some(TokenKind::Quote),
            '!' => Some(TokenKind::Excla),
            _ => None,
        };
        if let Some(kind) = single {
            chars.next();
            advance(&mut pos, c);
            tokens.push(Token { kind, text: String::from(c), position: start });
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            advance(&mut pos, c);
            continue;
        }
        if c == ';' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(&mut pos, c);
            }
            continue;
        }
        if c == '"' {
            chars.next();
            advance(&mut pos, c);
            let mut content = String::new();
            loop {
                let Some(c) = chars.next() else {
                    return Err(SyntaxError::UnterminatedString(start));
                };
                let at = pos;
                advance(&mut pos, c);
                match c {
                    '"' => break,
                    '\\' => {
                        let Some(e) = chars.next() else {
                            return Err(SyntaxError::UnterminatedString(start));
                        };
                        advance(&mut pos, e);
                        content.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            '"' => '"',
                            '\\' => '\\',
                            other => return Err(SyntaxError::BadEscape(at, other)),
                        });
                    }
                    c => content.push(c),
                }
            }
            tokens.push(Token { kind: TokenKind::Str, text: content, position: start });
            continue;
        }

        let mut atom = String::new();
        while let Some(&c) = chars.peek() {
            if is_delimiter(c) {
                break;
            }
            atom.push(c);
            chars.next();
            advance(&mut pos, c);
        }
        let kind = if looks_numeric(&atom) {
            if atom.parse::<i64>().is_err() {
                return Err(SyntaxError::NumberOutOfRange(start, atom));
            }
            TokenKind::Number
        } else {
            TokenKind::Symbol
        };
        tokens.push(Token { kind, text: atom, position: start });
    }
    Ok(tokens)
}

/// Reads one expression from the front of `tokens`.
///
/// Returns `Ok(None)` when the stream is empty (end of input).
pub fn read_expr(tokens: &[Token]) -> Result<Option<(SourceExpr, &[Token])>, SyntaxError> {
    let Some((first, rest)) = tokens.split_first() else {
        return Ok(None);
    };
    let expr = match first.kind {
        TokenKind::Number => {
            // The tokenizer already range-checked the literal.
            let n = first
                .text
                .parse::<i64>()
                .map_err(|_| SyntaxError::NumberOutOfRange(first.position, first.text.clone()))?;
            return Ok(Some((SourceExpr::Number(n), rest)));
        }
        TokenKind::Symbol => SourceExpr::Symbol(Rc::from(first.text.as_str())),
        TokenKind::Str => SourceExpr::Str(Rc::from(first.text.as_str())),
        TokenKind::Close => return Err(SyntaxError::UnexpectedClose(first.position)),
        TokenKind::Quote | TokenKind::Excla => {
            let (mark, head) = if first.kind == TokenKind::Quote {
                ('\'', "quote")
            } else {
                ('!', "excla")
            };
            let Some((inner, rest)) = read_expr(rest)? else {
                return Err(SyntaxError::DanglingPrefix(first.position, mark));
            };
            let form = SourceExpr::List(alloc::vec![SourceExpr::symbol(head), inner]);
            return Ok(Some((form, rest)));
        }
        TokenKind::Open => {
            let mut items = Vec::new();
            let mut cursor = rest;
            loop {
                match cursor.first() {
                    None => return Err(SyntaxError::Unclosed(first.position)),
                    Some(t) if t.kind == TokenKind::Close => {
                        return Ok(Some((SourceExpr::List(items), &cursor[1..])));
                    }
                    // A mark in operator position names the operator, so
                    // `(! e)` is `(excla e)` just like `!e`.
                    Some(t) if items.is_empty() && matches!(t.kind, TokenKind::Quote | TokenKind::Excla) => {
                        let head = if t.kind == TokenKind::Quote { "quote" } else { "excla" };
                        items.push(SourceExpr::symbol(head));
                        cursor = &cursor[1..];
                    }
                    Some(_) => {
                        let Some((item, next)) = read_expr(cursor)? else {
                            return Err(SyntaxError::Unclosed(first.position));
                        };
                        items.push(item);
                        cursor = next;
                    }
                }
            }
        }
    };
    Ok(Some((expr, rest)))
}

pub fn read_program(text: &str) -> Result<Vec<SourceExpr>, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut cursor: &[Token] = &tokens;
    let mut exprs = Vec::new();
    while let Some((expr, rest)) = read_expr(cursor)? {
        exprs.push(expr);
        cursor = rest;
    }
    Ok(exprs)
}
