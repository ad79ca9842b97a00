//! Recursive-descent parser.
//!
//! Grammar summary (full EBNF in `docs/grammar.md`):
//!
//! ```text
//! program   = { typeDecl | interfaceDecl | portDecl } "main" block
//! block     = "{" [ stmt { [";"] stmt } [";"] ] "}"
//! stmt      = for | foreach | if | println | IDENT "->" path | path "=" expr
//! ```
//!
//! A `;` between two statements may be omitted only when the first ends
//! with a `}`.

use std::collections::HashSet;

use thiserror::Error;

use super::ast::*;
use super::token::{tokenize, unescape_string, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            line: e.line,
            col: e.col,
            expected: "a valid token".into(),
            found: e.message,
        }
    }
}

pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(source)?;
    let eof = end_position(source);
    let mut parser = Parser {
        tokens,
        pos: 0,
        eof,
    };
    let program = parser.program()?;
    validate(&program)?;
    Ok(program)
}

fn end_position(source: &str) -> Pos {
    let mut pos = Pos::new(1, 1);
    for c in source.chars() {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    }
    pos
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: Pos,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_nth(&self, n: usize) -> Option<&Token> {
        self.tokens.get(self.pos + n)
    }

    fn here(&self) -> Pos {
        self.peek()
            .map(|t| Pos::new(t.line, t.col))
            .unwrap_or(self.eof)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        let (pos, found) = match self.peek() {
            Some(t) => (Pos::new(t.line, t.col), format!("`{}`", t.text)),
            None => (self.eof, "end of input".to_string()),
        };
        ParseError {
            line: pos.line,
            col: pos.col,
            expected: expected.into(),
            found,
        }
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_keyword(&self, k: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(k))
    }

    fn at_kind(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.at_punct(p) {
            Ok(self.advance().expect("peeked"))
        } else {
            Err(self.error(format!("`{p}`")))
        }
    }

    fn expect_keyword(&mut self, k: &str) -> PResult<Token> {
        if self.at_keyword(k) {
            Ok(self.advance().expect("peeked"))
        } else {
            Err(self.error(format!("`{k}`")))
        }
    }

    fn expect_kind(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.at_kind(kind) {
            Ok(self.advance().expect("peeked"))
        } else {
            Err(self.error(kind.to_string()))
        }
    }

    fn ident(&mut self) -> PResult<Token> {
        self.expect_kind(TokenKind::Identifier)
    }

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        loop {
            if self.at_keyword("type") {
                let at = self.peek_nth(1).map(span_of).unwrap_or_default();
                let decl = self.type_decl()?;
                if program.types.iter().any(|t| t.name == decl.name) {
                    return Err(validation_error(
                        at,
                        "a unique type name",
                        &format!("duplicate type `{}`", decl.name),
                    ));
                }
                program.types.push(decl);
            } else if self.at_keyword("interface") {
                program.interfaces.push(self.interface_decl()?);
            } else if self.at_keyword("inputPort") || self.at_keyword("outputPort") {
                let at = self.peek_nth(1).map(span_of).unwrap_or_default();
                let port = self.port_decl()?;
                if program.ports.iter().any(|p| p.name == port.name) {
                    return Err(validation_error(
                        at,
                        "a unique port name",
                        &format!("duplicate port `{}`", port.name),
                    ));
                }
                program.ports.push(port);
            } else if self.at_keyword("main") {
                break;
            } else {
                return Err(self.error("a declaration or `main`"));
            }
        }
        self.expect_keyword("main")?;
        program.main = self.block()?;
        if self.peek().is_some() {
            return Err(self.error("end of input"));
        }
        Ok(program)
    }

    // ---- deployment part ----

    fn native_type(&mut self) -> PResult<NativeType> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => {
                if let Some(nt) = NativeType::from_keyword(&t.text) {
                    self.pos += 1;
                    return Ok(nt);
                }
                Err(self.error("a native type"))
            }
            _ => Err(self.error("a native type")),
        }
    }

    fn type_decl(&mut self) -> PResult<TypeDecl> {
        self.expect_keyword("type")?;
        let name = self.ident()?.text;
        self.expect_kind(TokenKind::Colon)?;
        let body = self.type_body()?;
        Ok(TypeDecl { name, body })
    }

    fn type_body(&mut self) -> PResult<TypeBody> {
        let root = self.native_type()?;
        let mut subnodes = Vec::new();
        if self.eat_punct("{") {
            while !self.eat_punct("}") {
                let at = self.peek_nth(1).map(span_of).unwrap_or_default();
                let sub = self.subnode_decl()?;
                if subnodes.iter().any(|s: &SubnodeDecl| s.name == sub.name) {
                    return Err(validation_error(
                        at,
                        "unique subnode names",
                        &format!("duplicate subnode `{}`", sub.name),
                    ));
                }
                subnodes.push(sub);
            }
        }
        Ok(TypeBody { root, subnodes })
    }

    fn subnode_decl(&mut self) -> PResult<SubnodeDecl> {
        self.expect_punct(".")?;
        let name = self.ident()?.text;
        let mut cardinality = Cardinality::default();
        if self.eat_punct("[") {
            let min = self.cardinality_bound()?;
            self.expect_punct(",")?;
            let max = if self.eat_punct("*") {
                None
            } else {
                Some(self.cardinality_bound()?)
            };
            let close = self.here();
            self.expect_punct("]")?;
            if max.is_some_and(|m| m < min) {
                return Err(ParseError {
                    line: close.line,
                    col: close.col,
                    expected: "a maximum not below the minimum".into(),
                    found: format!("[{min},{}]", max.unwrap_or_default()),
                });
            }
            cardinality = Cardinality { min, max };
        }
        self.expect_kind(TokenKind::Colon)?;
        let body = self.type_body()?;
        Ok(SubnodeDecl {
            name,
            cardinality,
            body,
        })
    }

    fn cardinality_bound(&mut self) -> PResult<u64> {
        let here = self.here();
        let t = self.expect_kind(TokenKind::IntLiteral)?;
        t.text.parse().map_err(|_| ParseError {
            line: here.line,
            col: here.col,
            expected: "a cardinality bound".into(),
            found: t.text.clone(),
        })
    }

    fn type_name(&mut self) -> PResult<String> {
        if let Ok(nt) = self.native_type() {
            return Ok(nt.as_str().to_string());
        }
        if self.at_kind(TokenKind::Identifier) {
            return Ok(self.advance().expect("peeked").text);
        }
        Err(self.error("a type name"))
    }

    fn interface_decl(&mut self) -> PResult<InterfaceDecl> {
        self.expect_keyword("interface")?;
        let name_tok = self.ident()?;
        self.expect_punct("{")?;
        let mut operations = Vec::new();
        while !self.eat_punct("}") {
            let kind = if self.at_keyword("RequestResponse") {
                OperationKind::RequestResponse
            } else if self.at_keyword("OneWay") {
                OperationKind::OneWay
            } else {
                return Err(self.error("`RequestResponse`, `OneWay` or `}`"));
            };
            self.pos += 1;
            self.expect_kind(TokenKind::Colon)?;
            loop {
                let op_name = self.ident()?.text;
                self.expect_punct("(")?;
                let request = self.type_name()?;
                self.expect_punct(")")?;
                let response = match kind {
                    OperationKind::RequestResponse => {
                        self.expect_punct("(")?;
                        let r = self.type_name()?;
                        self.expect_punct(")")?;
                        Some(r)
                    }
                    OperationKind::OneWay => None,
                };
                operations.push(Operation {
                    name: op_name,
                    kind,
                    request,
                    response,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        Ok(InterfaceDecl {
            name: name_tok.text.clone(),
            name_span: span_of(&name_tok),
            operations,
        })
    }

    fn port_decl(&mut self) -> PResult<PortDecl> {
        let dir_tok = self.advance().expect("caller checked");
        let direction = if dir_tok.text == "inputPort" {
            PortDirection::Input
        } else {
            PortDirection::Output
        };
        let name = self.ident()?.text;
        self.expect_punct("{")?;

        let mut location: Option<String> = None;
        let mut protocol: Option<(String, Span)> = None;
        let mut interfaces: Option<(Vec<String>, Vec<Span>)> = None;
        while !self.at_punct("}") {
            let clause = self.here();
            if self.at_keyword("Location") && location.is_none() {
                self.pos += 1;
                self.expect_kind(TokenKind::Colon)?;
                let t = self.expect_kind(TokenKind::StringLiteral)?;
                location = Some(unescape_string(&t.text));
            } else if self.at_keyword("Protocol") && protocol.is_none() {
                self.pos += 1;
                self.expect_kind(TokenKind::Colon)?;
                let t = self.ident()?;
                protocol = Some((t.text.clone(), span_of(&t)));
            } else if self.at_keyword("Interfaces") && interfaces.is_none() {
                self.pos += 1;
                self.expect_kind(TokenKind::Colon)?;
                let mut names = Vec::new();
                let mut spans = Vec::new();
                loop {
                    let t = self.ident()?;
                    names.push(t.text.clone());
                    spans.push(span_of(&t));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                interfaces = Some((names, spans));
            } else {
                let mut err = self.error("a `Location`, `Protocol` or `Interfaces` clause");
                err.line = clause.line;
                err.col = clause.col;
                return Err(err);
            }
        }
        let missing = |what: &str| {
            let e = self.error(format!("a `{what}` clause"));
            Err::<PortDecl, _>(e)
        };
        let Some(location) = location else {
            return missing("Location");
        };
        let Some((protocol, protocol_span)) = protocol else {
            return missing("Protocol");
        };
        let Some((interfaces, interface_spans)) = interfaces else {
            return missing("Interfaces");
        };
        self.expect_punct("}")?;
        Ok(PortDecl {
            direction,
            name,
            location,
            protocol,
            interfaces,
            protocol_span,
            interface_spans,
        })
    }

    // ---- behavior part ----

    fn block(&mut self) -> PResult<Stmt> {
        let open = self.expect_punct("{")?;
        let mut items = Vec::new();
        loop {
            if self.eat_punct("}") {
                break;
            }
            let stmt = self.stmt()?;
            let ends_with_block = matches!(
                stmt.kind,
                StmtKind::For { .. }
                    | StmtKind::ForeachArrow { .. }
                    | StmtKind::ForeachColon { .. }
                    | StmtKind::If { .. }
            );
            items.push(stmt);
            if self.eat_punct(";") || self.at_punct("}") || ends_with_block {
                continue;
            }
            return Err(self.error("`;` or `}`"));
        }
        Ok(Stmt::at(
            StmtKind::Seq(items),
            Pos::new(open.line, open.col),
        ))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.here();
        let kind = if self.at_keyword("for") {
            self.for_stmt()?
        } else if self.at_keyword("foreach") {
            self.foreach_stmt()?
        } else if self.at_keyword("if") {
            self.if_stmt()?
        } else if self.at_kind(TokenKind::Identifier) {
            let is_println = self.peek().is_some_and(|t| t.text == "println")
                && self
                    .peek_nth(1)
                    .is_some_and(|t| t.is_punct("(") || t.is_punct("@"));
            if is_println {
                self.println_stmt()?
            } else {
                self.assign_or_alias()?
            }
        } else {
            return Err(self.error("a statement"));
        };
        Ok(Stmt::at(kind, pos))
    }

    fn println_stmt(&mut self) -> PResult<StmtKind> {
        self.advance();
        if self.eat_punct("@") {
            let target = self.ident()?;
            if target.text != "Console" {
                return Err(ParseError {
                    line: target.line,
                    col: target.col,
                    expected: "`Console`".into(),
                    found: format!("`{}`", target.text),
                });
            }
        }
        self.expect_punct("(")?;
        let e = self.expr()?;
        self.expect_punct(")")?;
        Ok(StmtKind::Println(e))
    }

    fn assign_or_alias(&mut self) -> PResult<StmtKind> {
        let (path, _) = self.path()?;
        if self.at_kind(TokenKind::Arrow) {
            let Some(name) = path.as_bare_name().map(str::to_string) else {
                return Err(self.error("`=` (only a plain name can be aliased)"));
            };
            self.advance();
            let (target, _) = self.path()?;
            return Ok(StmtKind::AliasBind(name, target));
        }
        self.expect_punct("=")?;
        let value = self.expr()?;
        Ok(StmtKind::Assign(path, value))
    }

    fn counter_update(&mut self, allow_increment: bool) -> PResult<CounterUpdate> {
        let name = self.ident()?.text;
        if allow_increment && self.eat_punct("++") {
            return Ok(CounterUpdate {
                value: Expr::binary(BinaryOp::Add, Expr::var(name.clone()), Expr::int(1)),
                name,
            });
        }
        self.expect_punct("=")?;
        let value = self.expr()?;
        Ok(CounterUpdate { name, value })
    }

    fn for_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_keyword("for")?;
        self.expect_punct("(")?;
        let init = self.counter_update(false)?;
        self.expect_punct(",")?;
        let cond = self.expr()?;
        self.expect_punct(",")?;
        let post = self.counter_update(true)?;
        self.expect_punct(")")?;
        let body = Box::new(self.block()?);
        Ok(StmtKind::For {
            init,
            cond,
            post,
            body,
        })
    }

    fn foreach_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_keyword("foreach")?;
        self.expect_punct("(")?;
        let var = self.ident()?.text;
        let arrow = if self.at_kind(TokenKind::Arrow) {
            true
        } else if self.at_kind(TokenKind::Colon) {
            false
        } else {
            return Err(self.error("`->` or `:`"));
        };
        self.advance();
        let (target, last_index_at) = self.path()?;
        if arrow {
            if let Some(at) = last_index_at {
                return Err(ParseError {
                    line: at.line,
                    col: at.col,
                    expected: "a node path (the foreach target must not end in an index)".into(),
                    found: "`[`".into(),
                });
            }
        }
        self.expect_punct(")")?;
        let body = Box::new(self.block()?);
        Ok(if arrow {
            StmtKind::ForeachArrow {
                alias: var,
                target,
                body,
            }
        } else {
            StmtKind::ForeachColon {
                key: var,
                target,
                body,
            }
        })
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        self.expect_keyword("if")?;
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let then = Box::new(self.block()?);
        let otherwise = if self.at_keyword("else") {
            self.advance();
            if self.at_keyword("if") {
                let pos = self.here();
                Some(Box::new(Stmt::at(self.if_stmt()?, pos)))
            } else {
                Some(Box::new(self.block()?))
            }
        } else {
            None
        };
        Ok(StmtKind::If {
            cond,
            then,
            otherwise,
        })
    }

    /// Parses a path; also returns where the final segment's `[` was, if any.
    fn path(&mut self) -> PResult<(Path, Option<Pos>)> {
        let mut segments = Vec::new();
        let mut last_index_at;
        loop {
            let name = self.ident()?.text;
            last_index_at = None;
            let index = if self.at_punct("[") {
                last_index_at = Some(self.here());
                self.advance();
                let e = self.expr()?;
                self.expect_punct("]")?;
                Some(e)
            } else {
                None
            };
            segments.push(Segment { name, index });
            if !self.eat_punct(".") {
                break;
            }
        }
        Ok((Path::new(segments), last_index_at))
    }

    // ---- expressions (precedence climbing) ----

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn peek_binary_op(&self) -> Option<BinaryOp> {
        let t = self.peek()?;
        if t.kind != TokenKind::Punctuation {
            return None;
        }
        Some(match t.text.as_str() {
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "&&" => BinaryOp::And,
            "||" => BinaryOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_punct("!") {
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)));
        }
        if self.eat_punct("-") {
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.error("an expression"));
        };
        match t.kind {
            TokenKind::IntLiteral => {
                self.advance();
                let v = t.text.parse::<i64>().map_err(|_| ParseError {
                    line: t.line,
                    col: t.col,
                    expected: "an integer that fits in 64 bits".into(),
                    found: t.text.clone(),
                })?;
                Ok(Expr::int(v))
            }
            TokenKind::DoubleLiteral => {
                self.advance();
                let v = t
                    .text
                    .parse::<f64>()
                    .expect("lexer guarantees digits.digits");
                Ok(Expr::Literal(Literal::Double(v)))
            }
            TokenKind::StringLiteral => {
                self.advance();
                Ok(Expr::str(unescape_string(&t.text)))
            }
            TokenKind::Keyword if t.text == "true" || t.text == "false" => {
                self.advance();
                Ok(Expr::Literal(Literal::Bool(t.text == "true")))
            }
            TokenKind::Hash => {
                self.advance();
                let (path, last_index_at) = self.path()?;
                if let Some(at) = last_index_at {
                    return Err(ParseError {
                        line: at.line,
                        col: at.col,
                        expected: "a node path after `#`".into(),
                        found: "`[`".into(),
                    });
                }
                Ok(Expr::Count(path))
            }
            TokenKind::Identifier => {
                let (path, _) = self.path()?;
                Ok(match path.as_bare_name() {
                    Some(name) => Expr::VarRead(name.to_string()),
                    None => Expr::PathRead(path),
                })
            }
            TokenKind::Punctuation if t.text == "(" => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.error("an expression")),
        }
    }
}

fn span_of(t: &Token) -> Span {
    Span {
        line: t.line,
        col: t.col,
        len: t.len,
    }
}

fn validation_error(span: Span, expected: &str, found: &str) -> ParseError {
    ParseError {
        line: span.line,
        col: span.col,
        expected: expected.into(),
        found: found.into(),
    }
}

/// Declaration-level checks that the grammar alone cannot express.
fn validate(program: &Program) -> PResult<()> {
    let mut seen = HashSet::new();
    for iface in &program.interfaces {
        if !seen.insert(iface.name.as_str()) {
            return Err(validation_error(
                iface.name_span,
                "a unique interface name",
                &format!("duplicate interface `{}`", iface.name),
            ));
        }
        let mut ops = HashSet::new();
        for op in &iface.operations {
            if !ops.insert(op.name.as_str()) {
                return Err(validation_error(
                    iface.name_span,
                    "unique operation names",
                    &format!("duplicate operation `{}` in `{}`", op.name, iface.name),
                ));
            }
        }
    }

    for port in &program.ports {
        for (name, span) in port.interfaces.iter().zip(&port.interface_spans) {
            if !program.interfaces.iter().any(|i| &i.name == name) {
                return Err(validation_error(
                    *span,
                    "a declared interface",
                    &format!("`{name}`"),
                ));
            }
        }
    }
    Ok(())
}
