//! Canonical source rendering of a [`Program`].
//!
//! Output re-parses to a structurally equal tree. Declarations are emitted
//! grouped by kind (types, interfaces, ports) ahead of `main`.

use std::fmt::Write;

use super::ast::*;
use super::token::escape_string;

const INDENT: &str = "  ";

pub fn pretty_print(program: &Program) -> String {
    let mut p = Printer::default();
    for t in &program.types {
        p.type_decl(t);
        p.out.push('\n');
    }
    for i in &program.interfaces {
        p.interface_decl(i);
        p.out.push('\n');
    }
    for port in &program.ports {
        p.port_decl(port);
        p.out.push('\n');
    }
    p.out.push_str("main ");
    p.block(&program.main);
    p.out.push('\n');
    p.out
}

/// Shortest round-trip decimal form, always with a fractional part.
pub fn format_double(v: f64) -> String {
    let mut s = format!("{v}");
    if v.is_finite() && !s.contains('.') {
        s.push_str(".0");
    }
    s
}

pub fn format_expr(e: &Expr) -> String {
    let mut p = Printer::default();
    p.expr(e);
    p.out
}

pub fn format_path(path: &Path) -> String {
    let mut p = Printer::default();
    p.path(path);
    p.out
}

#[derive(Default)]
struct Printer {
    out: String,
    depth: usize,
}

impl Printer {
    fn indent(&mut self) {
        for _ in 0..self.depth {
            self.out.push_str(INDENT);
        }
    }

    fn type_decl(&mut self, t: &TypeDecl) {
        let _ = write!(self.out, "type {}: ", t.name);
        self.type_body(&t.body);
        self.out.push('\n');
    }

    fn type_body(&mut self, body: &TypeBody) {
        self.out.push_str(body.root.as_str());
        if body.subnodes.is_empty() {
            return;
        }
        self.out.push_str(" {\n");
        self.depth += 1;
        for sub in &body.subnodes {
            self.indent();
            let _ = write!(self.out, ".{}", sub.name);
            if sub.cardinality != Cardinality::default() {
                let max = sub
                    .cardinality
                    .max
                    .map_or_else(|| "*".to_string(), |m| m.to_string());
                let _ = write!(self.out, "[{},{}]", sub.cardinality.min, max);
            }
            self.out.push_str(": ");
            self.type_body(&sub.body);
            self.out.push('\n');
        }
        self.depth -= 1;
        self.indent();
        self.out.push('}');
    }

    fn interface_decl(&mut self, i: &InterfaceDecl) {
        let _ = writeln!(self.out, "interface {} {{", i.name);
        for op in &i.operations {
            let _ = write!(
                self.out,
                "{INDENT}{}: {}({})",
                op.kind.as_str(),
                op.name,
                op.request
            );
            if let Some(resp) = &op.response {
                let _ = write!(self.out, "({resp})");
            }
            self.out.push('\n');
        }
        self.out.push_str("}\n");
    }

    fn port_decl(&mut self, port: &PortDecl) {
        let _ = writeln!(self.out, "{} {} {{", port.direction.keyword(), port.name);
        let _ = writeln!(
            self.out,
            "{INDENT}Location: {}",
            escape_string(&port.location)
        );
        let _ = writeln!(self.out, "{INDENT}Protocol: {}", port.protocol);
        let _ = writeln!(
            self.out,
            "{INDENT}Interfaces: {}",
            port.interfaces.join(", ")
        );
        self.out.push_str("}\n");
    }

    /// Prints `{ ... }` for a Seq (or wraps a lone statement).
    fn block(&mut self, stmt: &Stmt) {
        let single;
        let items: &[Stmt] = match &stmt.kind {
            StmtKind::Seq(items) => items,
            _ => {
                single = [stmt.clone()];
                &single
            }
        };
        self.out.push_str("{\n");
        self.depth += 1;
        for (i, s) in items.iter().enumerate() {
            self.indent();
            self.stmt(s);
            if i + 1 < items.len() {
                self.out.push(';');
            }
            self.out.push('\n');
        }
        self.depth -= 1;
        self.indent();
        self.out.push('}');
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Assign(path, e) => {
                self.path(path);
                self.out.push_str(" = ");
                self.expr(e);
            }
            StmtKind::AliasBind(name, target) => {
                let _ = write!(self.out, "{name} -> ");
                self.path(target);
            }
            StmtKind::Println(e) => {
                self.out.push_str("println(");
                self.expr(e);
                self.out.push(')');
            }
            StmtKind::For {
                init,
                cond,
                post,
                body,
            } => {
                let _ = write!(self.out, "for ({} = ", init.name);
                self.expr(&init.value);
                self.out.push_str(", ");
                self.expr(cond);
                self.out.push_str(", ");
                let increment =
                    Expr::binary(BinaryOp::Add, Expr::var(post.name.clone()), Expr::int(1));
                if post.value == increment {
                    let _ = write!(self.out, "{}++", post.name);
                } else {
                    let _ = write!(self.out, "{} = ", post.name);
                    self.expr(&post.value);
                }
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::ForeachColon { key, target, body } => {
                let _ = write!(self.out, "foreach ({key} : ");
                self.path(target);
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::ForeachArrow {
                alias,
                target,
                body,
            } => {
                let _ = write!(self.out, "foreach ({alias} -> ");
                self.path(target);
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                self.out.push_str("if (");
                self.expr(cond);
                self.out.push_str(") ");
                self.block(then);
                if let Some(other) = otherwise {
                    self.out.push_str(" else ");
                    if matches!(other.kind, StmtKind::If { .. }) {
                        self.stmt(other);
                    } else {
                        self.block(other);
                    }
                }
            }
            StmtKind::Seq(_) => self.block(stmt),
        }
    }

    fn path(&mut self, path: &Path) {
        for (i, seg) in path.segments().iter().enumerate() {
            if i > 0 {
                self.out.push('.');
            }
            self.out.push_str(&seg.name);
            if let Some(idx) = &seg.index {
                self.out.push('[');
                self.expr(idx);
                self.out.push(']');
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Literal(Literal::Int(v)) => {
                let _ = write!(self.out, "{v}");
            }
            Expr::Literal(Literal::Double(v)) => self.out.push_str(&format_double(*v)),
            Expr::Literal(Literal::Bool(b)) => {
                let _ = write!(self.out, "{b}");
            }
            Expr::Literal(Literal::String(s)) => self.out.push_str(&escape_string(s)),
            Expr::VarRead(name) => self.out.push_str(name),
            Expr::PathRead(path) => self.path(path),
            Expr::Count(path) => {
                self.out.push('#');
                self.path(path);
            }
            Expr::Unary(op, inner) => {
                self.out.push(match op {
                    UnaryOp::Not => '!',
                    UnaryOp::Neg => '-',
                });
                self.operand(inner, |_| true);
            }
            Expr::Binary(op, lhs, rhs) => {
                let prec = op.precedence();
                self.operand(lhs, |p| p < prec);
                let _ = write!(self.out, " {} ", op.symbol());
                self.operand(rhs, |p| p <= prec);
            }
        }
    }

    /// Prints a binary sub-expression, parenthesised when `needs_parens`
    /// holds for its precedence.
    fn operand(&mut self, e: &Expr, needs_parens: impl Fn(u8) -> bool) {
        match e {
            Expr::Binary(op, ..) if needs_parens(op.precedence()) => {
                self.out.push('(');
                self.expr(e);
                self.out.push(')');
            }
            _ => self.expr(e),
        }
    }
}
