//! Position-aware tokenizer.
//!
//! Every token carries the raw source text it was cut from, so the
//! concatenation of token texts and the skipped whitespace/comments is the
//! original source. Columns and lengths are counted in characters.

use std::fmt;

use thiserror::Error;

/// Prefix of identifiers produced by the desugaring pass. `$` cannot start
/// a user-written identifier, so only `$fe_<digits>` lexes with it.
pub const GENERATED_PREFIX: &str = "$fe_";

pub const KEYWORDS: &[&str] = &[
    "type",
    "interface",
    "inputPort",
    "outputPort",
    "Location",
    "Protocol",
    "Interfaces",
    "RequestResponse",
    "OneWay",
    "main",
    "for",
    "foreach",
    "if",
    "else",
    "true",
    "false",
    "string",
    "int",
    "bool",
    "double",
    "void",
    "undefined",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    StringLiteral,
    IntLiteral,
    DoubleLiteral,
    Punctuation,
    Arrow,
    Colon,
    Hash,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Identifier => "identifier",
            TokenKind::Keyword => "keyword",
            TokenKind::StringLiteral => "string literal",
            TokenKind::IntLiteral => "integer literal",
            TokenKind::DoubleLiteral => "double literal",
            TokenKind::Punctuation => "punctuation",
            TokenKind::Arrow => "`->`",
            TokenKind::Colon => "`:`",
            TokenKind::Hash => "`#`",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Raw source text, quotes and escapes included for string literals.
    pub text: String,
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

impl Token {
    /// Whether the 1-based column `col` on this token's line falls inside it.
    pub fn covers(&self, line: usize, col: usize) -> bool {
        self.line == line && col >= self.col && col < self.col + self.len
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.text == p
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == k
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

// Longest first so that `<=` wins over `<`.
const PUNCTUATION: &[&str] = &[
    "++", "<=", ">=", "==", "!=", "&&", "||", "{", "}", "(", ")", "[", "]", ".", ",", ";", "=",
    "+", "-", "*", "/", "<", ">", "!", "@",
];

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, col: usize, message: impl Into<String>) -> LexError {
        LexError {
            line,
            col,
            message: message.into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `source` into tokens, skipping whitespace and `//` comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor::new(source);
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if cur.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }

        let (line, col) = (cur.line, cur.col);
        let start = cur.pos;
        let kind = if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            let word: String = cur.chars[start..cur.pos].iter().collect();
            if is_keyword(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c == '$' {
            if !cur.starts_with(GENERATED_PREFIX)
                || !cur
                    .peek_at(GENERATED_PREFIX.len())
                    .is_some_and(|d| d.is_ascii_digit())
            {
                return Err(cur.error(line, col, "illegal character `$`"));
            }
            for _ in 0..GENERATED_PREFIX.len() {
                cur.bump();
            }
            while cur.peek().is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
            }
            if cur.peek().is_some_and(is_ident_continue) {
                return Err(cur.error(line, col, "malformed generated identifier"));
            }
            TokenKind::Identifier
        } else if c.is_ascii_digit() {
            while cur.peek().is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
            }
            if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                while cur.peek().is_some_and(|d| d.is_ascii_digit()) {
                    cur.bump();
                }
                TokenKind::DoubleLiteral
            } else {
                TokenKind::IntLiteral
            }
        } else if c == '"' {
            cur.bump();
            loop {
                match cur.peek() {
                    None | Some('\n') => {
                        return Err(cur.error(line, col, "unterminated string literal"));
                    }
                    Some('"') => {
                        cur.bump();
                        break;
                    }
                    Some('\\') => {
                        let (el, ec) = (cur.line, cur.col);
                        cur.bump();
                        match cur.peek() {
                            Some('"') | Some('\\') => {
                                cur.bump();
                            }
                            None | Some('\n') => {
                                return Err(cur.error(line, col, "unterminated string literal"));
                            }
                            Some(other) => {
                                return Err(cur.error(
                                    el,
                                    ec,
                                    format!("unsupported escape `\\{other}`"),
                                ));
                            }
                        }
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            TokenKind::StringLiteral
        } else if cur.starts_with("->") {
            cur.bump();
            cur.bump();
            TokenKind::Arrow
        } else if c == ':' {
            cur.bump();
            TokenKind::Colon
        } else if c == '#' {
            cur.bump();
            TokenKind::Hash
        } else if let Some(p) = PUNCTUATION.iter().find(|p| cur.starts_with(p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punctuation
        } else {
            return Err(cur.error(line, col, format!("illegal character `{c}`")));
        };

        tokens.push(Token {
            kind,
            text: cur.chars[start..cur.pos].iter().collect(),
            line,
            col,
            len: cur.pos - start,
        });
    }

    Ok(tokens)
}

/// Decodes the raw text of a string-literal token.
pub fn unescape_string(raw: &str) -> String {
    let inner = &raw[1..raw.len() - 1];
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub fn escape_string(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Returns the token under the cursor, if any.
///
/// Sources that fail to lex yield `None`; callers needing a best effort on
/// broken buffers should fall back to line-based heuristics.
pub fn token_at(source: &str, line: usize, col: usize) -> Option<Token> {
    if line == 0 || col == 0 {
        return None;
    }
    tokenize(source)
        .ok()?
        .into_iter()
        .find(|t| t.covers(line, col))
}
