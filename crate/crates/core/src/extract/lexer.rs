//! Minimal Java tokenizer.
//!
//! Produces identifiers and single-character punctuation only. Comments,
//! string literals (including `"""` text blocks), char literals and numeric
//! literals are consumed without producing tokens.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexError {
    #[error("line {0}: unterminated block comment")]
    UnterminatedComment(usize),
    #[error("line {0}: unterminated string literal")]
    UnterminatedString(usize),
    #[error("line {0}: unterminated char literal")]
    UnterminatedChar(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Punct(char),
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl Cursor<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c == Some('\n') {
            self.line += 1;
        }
        c
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.bump() {
        match c {
            c if c.is_whitespace() => {}
            '/' if cur.eat('/') => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            '/' if cur.eat('*') => {
                let start = cur.line;
                let mut prev = '\0';
                loop {
                    match cur.bump() {
                        Some('/') if prev == '*' => break,
                        Some(c) => prev = c,
                        None => return Err(LexError::UnterminatedComment(start)),
                    }
                }
            }
            '"' => {
                let start = cur.line;
                if cur.eat('"') {
                    if cur.eat('"') {
                        skip_text_block(&mut cur, start)?;
                    }
                    // otherwise: empty string literal
                } else {
                    skip_quoted(&mut cur, '"').map_err(|_| LexError::UnterminatedString(start))?;
                }
            }
            '\'' => {
                let start = cur.line;
                skip_quoted(&mut cur, '\'').map_err(|_| LexError::UnterminatedChar(start))?;
            }
            c if c.is_ascii_digit() => {
                while let Some(c) = cur.peek() {
                    if is_ident_part(c) || c == '.' {
                        cur.bump();
                    } else {
                        break;
                    }
                }
            }
            c if is_ident_start(c) => {
                let mut ident = String::from(c);
                while let Some(c) = cur.peek() {
                    if is_ident_part(c) {
                        ident.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Ident(ident));
            }
            '\\' => {
                // unicode escape outside literals, e.g. \u0041
                while let Some(c) = cur.peek() {
                    if c.is_ascii_alphanumeric() {
                        cur.bump();
                    } else {
                        break;
                    }
                }
            }
            other => tokens.push(Token::Punct(other)),
        }
    }
    Ok(tokens)
}

/// Skips to the closing quote on the same line.
fn skip_quoted(cur: &mut Cursor<'_>, quote: char) -> Result<(), ()> {
    loop {
        match cur.bump() {
            Some('\\') => {
                if cur.bump().is_none() {
                    return Err(());
                }
            }
            Some('\n') | None => return Err(()),
            Some(c) if c == quote => return Ok(()),
            Some(_) => {}
        }
    }
}

fn skip_text_block(cur: &mut Cursor<'_>, start: usize) -> Result<(), LexError> {
    let mut quotes = 0;
    loop {
        match cur.bump() {
            Some('\\') => {
                quotes = 0;
                cur.bump();
            }
            Some('"') => {
                quotes += 1;
                if quotes == 3 {
                    return Ok(());
                }
            }
            Some(_) => quotes = 0,
            None => return Err(LexError::UnterminatedString(start)),
        }
    }
}
