//! Lexing, parsing and printing of the language subset.

mod ast;
mod parser;
mod printer;
mod token;

pub use ast::*;
pub use parser::{parse_program, ParseError};
pub use printer::{format_double, format_expr, format_path, pretty_print};
pub use token::{
    escape_string, is_keyword, token_at, tokenize, unescape_string, LexError, Token, TokenKind,
    GENERATED_PREFIX, KEYWORDS,
};
