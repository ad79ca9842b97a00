//! Inline documentation for the deployment part.
//!
//! The pipeline runs in three steps:
//!
//! 1. find the word under the cursor and decide whether it can carry
//!    documentation at all ([`categorize`]);
//! 2. look the word up in the table for its category ([`lookup`]);
//! 3. hand back markdown, which [`render_html`] can turn into a page.
//!
//! Only protocol names and interface names are documented. Protocol docs
//! come from JSON categorization files; interface docs come from the same
//! files or, preferably, are synthesized from the declarations in the file
//! being edited.
//!
//! When the buffer does not parse, categorization falls back to looking at
//! the text of the cursor line.

mod markdown;

use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};
use std::sync::LazyLock;

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{is_keyword, tokenize, Program, Span, TokenKind};

pub use markdown::{escape_html, first_paragraph, render_html};

const STARTER_DB: &str = include_str!("../../data/protocols.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Protocol,
    Interface,
    NotDocumentable,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Protocol => "protocol",
            Category::Interface => "interface",
            Category::NotDocumentable => "notdocumentable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {reason}")]
pub struct DocDbError {
    pub path: PathBuf,
    pub reason: String,
}

/// On-disk schema of a categorization file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocFile {
    #[serde(default)]
    protocols: IndexMap<String, String>,
    #[serde(default)]
    interfaces: IndexMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocDatabase {
    pub protocols: IndexMap<String, String>,
    pub interfaces: IndexMap<String, String>,
    /// Generated from the interface declarations of the open program.
    pub source_interfaces: IndexMap<String, String>,
}

impl DocDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    /// The documentation that ships with the tool.
    pub fn starter() -> Self {
        Self::from_json(STARTER_DB, FsPath::new("<builtin>")).expect("builtin docs are valid")
    }

    /// Parses one categorization file; `origin` is only used in errors.
    pub fn from_json(text: &str, origin: &FsPath) -> Result<Self, DocDbError> {
        let file: DocFile = serde_json::from_str(text).map_err(|e| DocDbError {
            path: origin.to_path_buf(),
            reason: e.to_string(),
        })?;
        Ok(DocDatabase {
            protocols: file.protocols,
            interfaces: file.interfaces,
            source_interfaces: IndexMap::new(),
        })
    }

    pub fn from_file(path: &FsPath) -> Result<Self, DocDbError> {
        let text = std::fs::read_to_string(path).map_err(|e| DocDbError {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text, path)
    }

    /// Entries of `other` replace same-named entries of `self`.
    pub fn overlay(&mut self, other: DocDatabase) {
        self.protocols.extend(other.protocols);
        self.interfaces.extend(other.interfaces);
        self.source_interfaces.extend(other.source_interfaces);
    }

    /// Replaces the synthesized interface docs with ones for `program`.
    pub fn set_program(&mut self, program: &Program) {
        self.source_interfaces = program
            .interfaces
            .iter()
            .map(|iface| {
                let mut md = format!("### interface `{}`\n", iface.name);
                if iface.operations.is_empty() {
                    md.push_str("- no operations\n");
                }
                for op in &iface.operations {
                    let _ = write!(
                        md,
                        "- `{}` ({}): request `{}`",
                        op.name,
                        op.kind.as_str(),
                        op.request
                    );
                    if let Some(resp) = &op.response {
                        let _ = write!(md, ", response `{resp}`");
                    }
                    md.push('\n');
                }
                (iface.name.clone(), md)
            })
            .collect();
    }
}

/// Merges the files at `paths` in order, later files winning per key, and
/// synthesizes interface docs when a program is given.
pub fn load_doc_db<P: AsRef<FsPath>>(
    paths: &[P],
    program: Option<&Program>,
) -> Result<DocDatabase, DocDbError> {
    let mut db = DocDatabase::new();
    for p in paths {
        db.overlay(DocDatabase::from_file(p.as_ref())?);
    }
    if let Some(program) = program {
        db.set_program(program);
    }
    Ok(db)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HoverResult {
    pub word: String,
    pub category: Category,
    pub markdown: String,
    pub html_available: bool,
}

/// Finds the word under the cursor and what kind of documentation it may
/// have. `program` must be the parse of `source`; pass `None` when the
/// buffer does not parse to get the line-based fallback.
pub fn categorize(
    program: Option<&Program>,
    source: &str,
    line: usize,
    col: usize,
) -> (String, Category) {
    match (program, tokenize(source)) {
        (Some(program), Ok(tokens)) => {
            let Some(tok) = tokens.into_iter().find(|t| t.covers(line, col)) else {
                return (String::new(), Category::NotDocumentable);
            };
            if tok.kind != TokenKind::Identifier {
                return (tok.text, Category::NotDocumentable);
            }
            let span = Span {
                line: tok.line,
                col: tok.col,
                len: tok.len,
            };
            let category = if program.ports.iter().any(|p| p.protocol_span == span) {
                Category::Protocol
            } else if program
                .ports
                .iter()
                .any(|p| p.interface_spans.contains(&span))
                || program.interfaces.iter().any(|i| i.name_span == span)
            {
                Category::Interface
            } else {
                Category::NotDocumentable
            };
            (tok.text, category)
        }
        _ => categorize_line(source, line, col),
    }
}

static AFTER_PROTOCOL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bProtocol\s*:\s*$").expect("valid regex"));
static AFTER_INTERFACES: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\bInterfaces\s*:\s*(?:[A-Za-z_][A-Za-z0-9_]*\s*,\s*)*$").expect("valid regex")
});
static AFTER_INTERFACE_KEYWORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\binterface\s+$").expect("valid regex"));

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whether the text after `prefix` sits inside a `//` comment or an
/// unterminated string literal.
fn in_comment_or_string(prefix: &str) -> bool {
    let mut in_string = false;
    let mut chars = prefix.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if in_string => {
                chars.next();
            }
            '"' => in_string = !in_string,
            '/' if !in_string && chars.peek() == Some(&'/') => return true,
            _ => {}
        }
    }
    in_string
}

/// Line-based categorization for buffers that do not parse.
pub fn categorize_line(source: &str, line: usize, col: usize) -> (String, Category) {
    let none = (String::new(), Category::NotDocumentable);
    if line == 0 || col == 0 {
        return none;
    }
    let Some(text) = source.lines().nth(line - 1) else {
        return none;
    };
    let chars: Vec<char> = text.chars().collect();
    let Some(&under) = chars.get(col - 1) else {
        return none;
    };
    if under.is_whitespace() {
        return none;
    }
    if !is_word_char(under) {
        return (under.to_string(), Category::NotDocumentable);
    }

    let mut start = col - 1;
    while start > 0 && is_word_char(chars[start - 1]) {
        start -= 1;
    }
    let mut end = col - 1;
    while end < chars.len() && is_word_char(chars[end]) {
        end += 1;
    }
    let word: String = chars[start..end].iter().collect();
    let prefix: String = chars[..start].iter().collect();

    let starts_like_ident = word.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_');
    if !starts_like_ident || is_keyword(&word) || in_comment_or_string(&prefix) {
        return (word, Category::NotDocumentable);
    }
    let category = if AFTER_PROTOCOL.is_match(&prefix) {
        Category::Protocol
    } else if AFTER_INTERFACES.is_match(&prefix) || AFTER_INTERFACE_KEYWORD.is_match(&prefix) {
        Category::Interface
    } else {
        Category::NotDocumentable
    };
    (word, category)
}

/// Looks `word` up in the table for `category`. For interfaces the
/// synthesized in-file documentation takes precedence over file entries.
pub fn lookup(db: &DocDatabase, word: &str, category: Category) -> Option<HoverResult> {
    let markdown = match category {
        Category::Protocol => db.protocols.get(word),
        Category::Interface => db
            .source_interfaces
            .get(word)
            .or_else(|| db.interfaces.get(word)),
        Category::NotDocumentable => None,
    }?;
    if markdown.trim().is_empty() {
        return None;
    }
    Some(HoverResult {
        word: word.to_string(),
        category,
        markdown: markdown.clone(),
        html_available: true,
    })
}

/// Full pipeline: categorize the cursor position, then look the word up.
pub fn hover(
    program: Option<&Program>,
    source: &str,
    line: usize,
    col: usize,
    db: &DocDatabase,
) -> Option<HoverResult> {
    let (word, category) = categorize(program, source, line, col);
    lookup(db, &word, category)
}
