//! Tokens for the text format. `#` starts a line comment. There are no
//! reserved words: keywords are recognized by position, so declaration
//! names are unrestricted identifiers.

use super::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Equals,
    Arrow,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Int(n) => format!("`{n}`"),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::Equals => "`=`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'' | '@' | '#')
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut i = 0usize;

    let mut push = |kind: TokenKind, start: usize, end: usize, line: u32, col: u32| {
        tokens.push(Token {
            kind,
            span: Span {
                start,
                end,
                line,
                col,
            },
        });
    };

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => {
                col += 1;
                i += 1;
            }
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ',' | ';' | ':' | '=' => {
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    ',' => TokenKind::Comma,
                    ';' => TokenKind::Semi,
                    ':' => TokenKind::Colon,
                    _ => TokenKind::Equals,
                };
                push(kind, i, i + 1, line, col);
                col += 1;
                i += 1;
            }
            '-' => {
                let start = i;
                let start_col = col;
                if i + 1 < bytes.len() && bytes[i + 1] == b'>' {
                    push(TokenKind::Arrow, start, i + 2, line, start_col);
                    i += 2;
                    col += 2;
                } else if i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    let mut j = i + 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    let n: i64 = text[i..j].parse().map_err(|_| Diagnostic::error(
                        format!("integer literal `{}` out of range", &text[i..j]),
                        Some(Span {
                            start,
                            end: j,
                            line,
                            col: start_col,
                        }),
                    ))?;
                    push(TokenKind::Int(n), start, j, line, start_col);
                    col += (j - i) as u32;
                    i = j;
                } else {
                    return Err(Diagnostic::error(
                        "stray `-` (expected `->` or a negative integer)".to_string(),
                        Some(Span {
                            start,
                            end: i + 1,
                            line,
                            col,
                        }),
                    ));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let start_col = col;
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let n: i64 = text[i..j].parse().map_err(|_| Diagnostic::error(
                    format!("integer literal `{}` out of range", &text[i..j]),
                    Some(Span {
                        start,
                        end: j,
                        line,
                        col: start_col,
                    }),
                ))?;
                push(TokenKind::Int(n), start, j, line, start_col);
                col += (j - i) as u32;
                i = j;
            }
            c if is_ident_start(c) => {
                let start = i;
                let start_col = col;
                let mut j = i;
                while j < bytes.len() && is_ident_continue(bytes[j] as char) {
                    j += 1;
                }
                push(
                    TokenKind::Ident(text[start..j].to_string()),
                    start,
                    j,
                    line,
                    start_col,
                );
                col += (j - i) as u32;
                i = j;
            }
            other => {
                return Err(Diagnostic::error(
                    format!("unexpected character `{other}`"),
                    Some(Span {
                        start: i,
                        end: i + 1,
                        line,
                        col,
                    }),
                ));
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span {
            start: text.len(),
            end: text.len(),
            line,
            col,
        },
    });
    Ok(tokens)
}
