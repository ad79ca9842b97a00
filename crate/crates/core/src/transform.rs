//! Lowering of `foreach (alias -> node) { body }` into an indexed loop.
//!
//! ```text
//! foreach (v -> a.b) { B }
//!   ==>
//! for ($fe_0 = 0, $fe_0 < #a.b, $fe_0++) { v -> a.b[$fe_0]; B }
//! ```
//!
//! The hidden index uses the `$fe_` prefix, which ordinary identifiers
//! cannot start with. Printed output must re-parse, so `$fe_<digits>` does
//! lex; the allocator therefore also skips any name already present in the
//! program.
//! The loop bound sits in the `for` condition and is therefore evaluated
//! before every iteration; a body that appends to the node lengthens the
//! loop.

use std::collections::HashSet;

use crate::syntax::*;

/// Allocates hidden loop-index names.
#[derive(Debug, Clone)]
pub struct FreshNameSource {
    counter: usize,
    prefix: String,
}

impl Default for FreshNameSource {
    fn default() -> Self {
        FreshNameSource {
            counter: 0,
            prefix: GENERATED_PREFIX.to_string(),
        }
    }
}

impl FreshNameSource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    /// Next name that is neither in `taken` nor previously returned.
    pub fn fresh_index_name(&mut self, taken: &HashSet<String>) -> String {
        loop {
            let name = format!("{}{}", self.prefix, self.counter);
            self.counter += 1;
            if !taken.contains(&name) {
                return name;
            }
        }
    }
}

/// Rewrites every arrow-foreach in `main`. Declarations are left untouched.
pub fn desugar(program: &Program) -> Program {
    let taken = identifiers(program);
    let mut names = FreshNameSource::new();
    Program {
        types: program.types.clone(),
        interfaces: program.interfaces.clone(),
        ports: program.ports.clone(),
        main: lower_stmt(&program.main, &mut names, &taken),
    }
}

fn lower_block(body: &Stmt, names: &mut FreshNameSource, taken: &HashSet<String>) -> Box<Stmt> {
    Box::new(lower_stmt(body, names, taken))
}

fn lower_stmt(stmt: &Stmt, names: &mut FreshNameSource, taken: &HashSet<String>) -> Stmt {
    let kind = match &stmt.kind {
        StmtKind::ForeachArrow {
            alias,
            target,
            body,
        } => {
            // outer index first, so nested loops number from the outside in
            let idx = names.fresh_index_name(taken);
            let body = lower_stmt(body, names, taken);

            let bind = Stmt::at(
                StmtKind::AliasBind(
                    alias.clone(),
                    target.with_last_index(Expr::var(idx.clone())),
                ),
                stmt.pos,
            );
            let mut items = vec![bind];
            match body.kind {
                StmtKind::Seq(inner) => items.extend(inner),
                other => items.push(Stmt::at(other, body.pos)),
            }

            StmtKind::For {
                init: CounterUpdate {
                    name: idx.clone(),
                    value: Expr::int(0),
                },
                cond: Expr::binary(
                    BinaryOp::Lt,
                    Expr::var(idx.clone()),
                    Expr::Count(target.clone()),
                ),
                post: CounterUpdate {
                    name: idx.clone(),
                    value: Expr::binary(BinaryOp::Add, Expr::var(idx), Expr::int(1)),
                },
                body: Box::new(Stmt::at(StmtKind::Seq(items), body.pos)),
            }
        }
        StmtKind::For {
            init,
            cond,
            post,
            body,
        } => StmtKind::For {
            init: init.clone(),
            cond: cond.clone(),
            post: post.clone(),
            body: lower_block(body, names, taken),
        },
        StmtKind::ForeachColon { key, target, body } => StmtKind::ForeachColon {
            key: key.clone(),
            target: target.clone(),
            body: lower_block(body, names, taken),
        },
        StmtKind::If {
            cond,
            then,
            otherwise,
        } => StmtKind::If {
            cond: cond.clone(),
            then: lower_block(then, names, taken),
            otherwise: otherwise.as_ref().map(|o| lower_block(o, names, taken)),
        },
        StmtKind::Seq(items) => {
            StmtKind::Seq(items.iter().map(|s| lower_stmt(s, names, taken)).collect())
        }
        other @ (StmtKind::Assign(..) | StmtKind::AliasBind(..) | StmtKind::Println(_)) => {
            other.clone()
        }
    };
    Stmt::at(kind, stmt.pos)
}

/// Every identifier occurring anywhere in the program.
pub fn identifiers(program: &Program) -> HashSet<String> {
    let mut out = HashSet::new();
    for t in &program.types {
        out.insert(t.name.clone());
        collect_type_body(&t.body, &mut out);
    }
    for i in &program.interfaces {
        out.insert(i.name.clone());
        for op in &i.operations {
            out.insert(op.name.clone());
            out.insert(op.request.clone());
            out.extend(op.response.clone());
        }
    }
    for p in &program.ports {
        out.insert(p.name.clone());
        out.insert(p.protocol.clone());
        out.extend(p.interfaces.iter().cloned());
    }
    collect_stmt(&program.main, &mut out);
    out
}

fn collect_type_body(body: &TypeBody, out: &mut HashSet<String>) {
    for sub in &body.subnodes {
        out.insert(sub.name.clone());
        collect_type_body(&sub.body, out);
    }
}

fn collect_stmt(stmt: &Stmt, out: &mut HashSet<String>) {
    match &stmt.kind {
        StmtKind::Assign(path, e) => {
            collect_path(path, out);
            collect_expr(e, out);
        }
        StmtKind::AliasBind(name, target) => {
            out.insert(name.clone());
            collect_path(target, out);
        }
        StmtKind::Println(e) => collect_expr(e, out),
        StmtKind::For {
            init,
            cond,
            post,
            body,
        } => {
            out.insert(init.name.clone());
            collect_expr(&init.value, out);
            collect_expr(cond, out);
            out.insert(post.name.clone());
            collect_expr(&post.value, out);
            collect_stmt(body, out);
        }
        StmtKind::ForeachColon {
            key: var,
            target,
            body,
        }
        | StmtKind::ForeachArrow {
            alias: var,
            target,
            body,
        } => {
            out.insert(var.clone());
            collect_path(target, out);
            collect_stmt(body, out);
        }
        StmtKind::If {
            cond,
            then,
            otherwise,
        } => {
            collect_expr(cond, out);
            collect_stmt(then, out);
            if let Some(o) = otherwise {
                collect_stmt(o, out);
            }
        }
        StmtKind::Seq(items) => items.iter().for_each(|s| collect_stmt(s, out)),
    }
}

fn collect_path(path: &Path, out: &mut HashSet<String>) {
    for seg in path.segments() {
        out.insert(seg.name.clone());
        if let Some(idx) = &seg.index {
            collect_expr(idx, out);
        }
    }
}

fn collect_expr(e: &Expr, out: &mut HashSet<String>) {
    match e {
        Expr::Literal(_) => {}
        Expr::VarRead(name) => {
            out.insert(name.clone());
        }
        Expr::PathRead(p) | Expr::Count(p) => collect_path(p, out),
        Expr::Unary(_, inner) => collect_expr(inner, out),
        Expr::Binary(_, l, r) => {
            collect_expr(l, out);
            collect_expr(r, out);
        }
    }
}

/// Whether any arrow-foreach remains in `stmt`.
pub fn contains_arrow_foreach(stmt: &Stmt) -> bool {
    match &stmt.kind {
        StmtKind::ForeachArrow { .. } => true,
        StmtKind::For { body, .. } | StmtKind::ForeachColon { body, .. } => {
            contains_arrow_foreach(body)
        }
        StmtKind::If {
            then, otherwise, ..
        } => {
            contains_arrow_foreach(then) || otherwise.as_deref().is_some_and(contains_arrow_foreach)
        }
        StmtKind::Seq(items) => items.iter().any(contains_arrow_foreach),
        StmtKind::Assign(..) | StmtKind::AliasBind(..) | StmtKind::Println(_) => false,
    }
}
