//! Tree-walking evaluator for the behavior part.
//!
//! Loop counters introduced by `for` headers live in a flat environment
//! beside the tree store. A bare name is looked up there first, then as an
//! alias or root variable.
//!
//! Every executed statement costs one unit of the step budget. The direct
//! arrow-foreach is charged exactly like its lowered `for` form (one unit
//! for the loop, two per iteration for the body block and the alias
//! rebinding), so a program and its desugared form exhaust the budget at
//! the same point.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{BinaryOp, Expr, Literal, Path, Pos, Program, Stmt, StmtKind, UnaryOp};
use crate::valuetree::{ResolvedPath, Scalar, Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FaultKind {
    MissingNode,
    UndefinedValue,
    AliasCycle,
    NegativeIndex,
    IndexTooLarge,
    TypeMismatch,
    DivisionByZero,
    IntegerOverflow,
    BudgetExhausted,
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}: {message}")]
pub struct RuntimeFault {
    pub kind: FaultKind,
    /// Position of the statement being executed.
    pub pos: Pos,
    pub message: String,
}

/// A fault before it is attributed to a statement.
#[derive(Debug, Clone)]
struct Fault {
    kind: FaultKind,
    message: String,
}

impl Fault {
    fn new(kind: FaultKind, message: impl Into<String>) -> Self {
        Fault {
            kind,
            message: message.into(),
        }
    }

    fn mismatch(message: impl Into<String>) -> Self {
        Fault::new(FaultKind::TypeMismatch, message)
    }

    fn at(self, pos: Pos) -> RuntimeFault {
        RuntimeFault {
            kind: self.kind,
            pos,
            message: self.message,
        }
    }
}

impl From<StoreError> for Fault {
    fn from(e: StoreError) -> Self {
        let kind = match e {
            StoreError::AliasCycle(_) => FaultKind::AliasCycle,
            StoreError::NegativeIndex(_) => FaultKind::NegativeIndex,
            StoreError::IndexTooLarge(_) => FaultKind::IndexTooLarge,
            StoreError::MissingNode(_) => FaultKind::MissingNode,
            StoreError::UndefinedValue(_) => FaultKind::UndefinedValue,
        };
        Fault::new(kind, e.to_string())
    }
}

type EvalResult<T> = Result<T, Fault>;
type ExecResult = Result<(), RuntimeFault>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub output: Vec<String>,
    pub dump: String,
}

/// A run that stopped on a fault, with whatever it produced until then.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{fault}")]
pub struct RunFailure {
    pub fault: RuntimeFault,
    pub output: Vec<String>,
    pub dump: String,
}

/// Executes `main` with at most `step_budget` statement executions.
pub fn run(program: &Program, step_budget: u64) -> Result<Execution, RunFailure> {
    let mut ctx = ExecContext::new(step_budget);
    match ctx.exec(&program.main) {
        Ok(()) => Ok(Execution {
            output: ctx.output,
            dump: ctx.store.dump(),
        }),
        Err(fault) => Err(RunFailure {
            fault,
            dump: ctx.store.dump(),
            output: ctx.output,
        }),
    }
}

#[derive(Debug)]
pub struct ExecContext {
    pub store: Store,
    counters: HashMap<String, Scalar>,
    output: Vec<String>,
    budget: u64,
}

impl ExecContext {
    pub fn new(step_budget: u64) -> Self {
        ExecContext {
            store: Store::new(),
            counters: HashMap::new(),
            output: Vec::new(),
            budget: step_budget,
        }
    }

    pub fn output(&self) -> &[String] {
        &self.output
    }

    pub fn remaining_budget(&self) -> u64 {
        self.budget
    }

    pub fn counter(&self, name: &str) -> Option<&Scalar> {
        self.counters.get(name)
    }

    fn charge(&mut self, pos: Pos) -> ExecResult {
        if self.budget == 0 {
            return Err(Fault::new(FaultKind::BudgetExhausted, "step budget exhausted").at(pos));
        }
        self.budget -= 1;
        Ok(())
    }

    pub fn exec(&mut self, stmt: &Stmt) -> ExecResult {
        self.charge(stmt.pos)?;
        let at = |f: Fault| f.at(stmt.pos);
        match &stmt.kind {
            StmtKind::Assign(path, e) => {
                let value = self.eval(e).map_err(at)?;
                self.assign(path, value).map_err(at)
            }
            StmtKind::AliasBind(name, target) => {
                self.store.bind_alias(name.clone(), target.clone());
                Ok(())
            }
            StmtKind::Println(e) => {
                let v = self.eval(e).map_err(at)?;
                self.output.push(v.to_string());
                Ok(())
            }
            StmtKind::For {
                init,
                cond,
                post,
                body,
            } => {
                let start = self.eval(&init.value).map_err(at)?;
                self.counters.insert(init.name.clone(), start);
                while self.eval_bool(cond).map_err(at)? {
                    self.exec(body)?;
                    let next = self.eval(&post.value).map_err(at)?;
                    self.counters.insert(post.name.clone(), next);
                }
                Ok(())
            }
            StmtKind::ForeachColon { key, target, body } => {
                self.exec_foreach_colon(key, target, body, stmt.pos)
            }
            StmtKind::ForeachArrow {
                alias,
                target,
                body,
            } => self.exec_foreach_arrow(alias, target, body, stmt.pos),
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                if self.eval_bool(cond).map_err(at)? {
                    self.exec(then)
                } else if let Some(o) = otherwise {
                    self.exec(o)
                } else {
                    Ok(())
                }
            }
            StmtKind::Seq(items) => items.iter().try_for_each(|s| self.exec(s)),
        }
    }

    /// Iterates the child names of the node addressed by `target`, binding
    /// each to `key` as a string value. A missing node means no iterations.
    pub fn exec_foreach_colon(
        &mut self,
        key: &str,
        target: &Path,
        body: &Stmt,
        pos: Pos,
    ) -> ExecResult {
        let resolved = self.resolve(target).map_err(|f| f.at(pos))?;
        let names: Vec<String> = match self.store.node(&resolved) {
            Some(node) => node.children.keys().cloned().collect(),
            None => return Ok(()),
        };
        let key_path = Path::simple(&[key]);
        for name in names {
            self.assign(&key_path, Scalar::String(name))
                .map_err(|f| f.at(pos))?;
            self.exec(body)?;
        }
        Ok(())
    }

    /// Direct semantics of `foreach (alias -> target) { body }`: while
    /// `j < #target`, rebind `alias` to `target[j]` and run the body. The
    /// bound is re-read before every iteration.
    ///
    /// `j` is a hidden counter owned by this loop statement, and the alias
    /// refers to it rather than to its current value, as in the lowered
    /// form. So after the loop the alias addresses `target[#target]`
    /// unless the body rebound it.
    pub fn exec_foreach_arrow(
        &mut self,
        alias: &str,
        target: &Path,
        body: &Stmt,
        pos: Pos,
    ) -> ExecResult {
        // Not a lexable identifier, and distinct for every loop statement.
        let hidden = format!("@{body:p}");
        let bound = target.with_last_index(Expr::var(hidden.clone()));
        let mut j: i64 = 0;
        loop {
            self.counters.insert(hidden.clone(), Scalar::Int(j));
            let n = self.count(target).map_err(|f| f.at(pos))?;
            if j >= n {
                break;
            }
            self.charge(body.pos)?;
            self.charge(pos)?;
            self.store.bind_alias(alias, bound.clone());
            match &body.kind {
                StmtKind::Seq(items) => items.iter().try_for_each(|s| self.exec(s))?,
                _ => self.exec(body)?,
            }
            j += 1;
        }
        Ok(())
    }

    fn assign(&mut self, path: &Path, value: Scalar) -> EvalResult<()> {
        if let Some(name) = path.as_bare_name() {
            if let Some(slot) = self.counters.get_mut(name) {
                *slot = value;
                return Ok(());
            }
        }
        let resolved = self.resolve(path)?;
        self.store.write(&resolved, value)?;
        Ok(())
    }

    fn resolve(&self, path: &Path) -> EvalResult<ResolvedPath> {
        self.store.resolve(path, &mut |e| self.eval_index(e))
    }

    fn eval_index(&self, e: &Expr) -> EvalResult<i64> {
        match self.eval(e)? {
            Scalar::Int(v) => Ok(v),
            other => Err(Fault::mismatch(format!(
                "index must be an int, got {}",
                other.type_name()
            ))),
        }
    }

    fn count(&self, path: &Path) -> EvalResult<i64> {
        let resolved = self.resolve(path)?;
        Ok(self.store.count(&resolved) as i64)
    }

    fn eval_bool(&self, e: &Expr) -> EvalResult<bool> {
        match self.eval(e)? {
            Scalar::Bool(b) => Ok(b),
            other => Err(Fault::mismatch(format!(
                "condition must be a bool, got {}",
                other.type_name()
            ))),
        }
    }

    pub fn eval_expr(&self, e: &Expr) -> Result<Scalar, RuntimeFault> {
        self.eval(e).map_err(|f| f.at(Pos::default()))
    }

    fn eval(&self, e: &Expr) -> EvalResult<Scalar> {
        match e {
            Expr::Literal(lit) => Ok(match lit {
                Literal::String(s) => Scalar::String(s.clone()),
                Literal::Int(v) => Scalar::Int(*v),
                Literal::Bool(b) => Scalar::Bool(*b),
                Literal::Double(v) => Scalar::Double(*v),
            }),
            Expr::VarRead(name) => {
                if let Some(v) = self.counters.get(name) {
                    return Ok(v.clone());
                }
                self.read_path(&Path::simple(&[name]))
            }
            Expr::PathRead(path) => self.read_path(path),
            Expr::Count(path) => self.count(path).map(Scalar::Int),
            Expr::Unary(op, inner) => {
                let v = self.eval(inner)?;
                match (op, v) {
                    (UnaryOp::Not, Scalar::Bool(b)) => Ok(Scalar::Bool(!b)),
                    (UnaryOp::Neg, Scalar::Int(i)) => {
                        i.checked_neg().map(Scalar::Int).ok_or_else(|| {
                            Fault::new(FaultKind::IntegerOverflow, "negation overflows")
                        })
                    }
                    (UnaryOp::Neg, Scalar::Double(d)) => Ok(Scalar::Double(-d)),
                    (op, v) => Err(Fault::mismatch(format!(
                        "cannot apply `{}` to {}",
                        if *op == UnaryOp::Not { "!" } else { "-" },
                        v.type_name()
                    ))),
                }
            }
            Expr::Binary(op @ (BinaryOp::And | BinaryOp::Or), lhs, rhs) => {
                let l = self.eval_bool_operand(lhs, *op)?;
                let short = if *op == BinaryOp::And { !l } else { l };
                if short {
                    return Ok(Scalar::Bool(l));
                }
                self.eval_bool_operand(rhs, *op).map(Scalar::Bool)
            }
            Expr::Binary(op, lhs, rhs) => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                binary(*op, l, r)
            }
        }
    }

    fn eval_bool_operand(&self, e: &Expr, op: BinaryOp) -> EvalResult<bool> {
        match self.eval(e)? {
            Scalar::Bool(b) => Ok(b),
            other => Err(Fault::mismatch(format!(
                "`{}` needs bool operands, got {}",
                op.symbol(),
                other.type_name()
            ))),
        }
    }

    fn read_path(&self, path: &Path) -> EvalResult<Scalar> {
        let resolved = self.resolve(path)?;
        Ok(self.store.read(&resolved)?.clone())
    }
}

enum Num {
    Int(i64, i64),
    Double(f64, f64),
}

fn numeric(l: &Scalar, r: &Scalar) -> Option<Num> {
    Some(match (l, r) {
        (Scalar::Int(a), Scalar::Int(b)) => Num::Int(*a, *b),
        (Scalar::Int(a), Scalar::Double(b)) => Num::Double(*a as f64, *b),
        (Scalar::Double(a), Scalar::Int(b)) => Num::Double(*a, *b as f64),
        (Scalar::Double(a), Scalar::Double(b)) => Num::Double(*a, *b),
        _ => return None,
    })
}

fn binary(op: BinaryOp, l: Scalar, r: Scalar) -> EvalResult<Scalar> {
    let mismatch = |l: &Scalar, r: &Scalar| {
        Fault::mismatch(format!(
            "cannot apply `{}` to {} and {}",
            op.symbol(),
            l.type_name(),
            r.type_name()
        ))
    };
    let overflow = || {
        Fault::new(
            FaultKind::IntegerOverflow,
            format!("`{}` overflows", op.symbol()),
        )
    };

    match op {
        BinaryOp::Eq | BinaryOp::Ne => {
            let equal = match numeric(&l, &r) {
                Some(Num::Int(a, b)) => a == b,
                Some(Num::Double(a, b)) => a == b,
                None => l == r,
            };
            Ok(Scalar::Bool(equal == (op == BinaryOp::Eq)))
        }
        BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
            let ord = match (numeric(&l, &r), &l, &r) {
                (Some(Num::Int(a, b)), ..) => a.partial_cmp(&b),
                (Some(Num::Double(a, b)), ..) => a.partial_cmp(&b),
                (None, Scalar::String(a), Scalar::String(b)) => a.partial_cmp(b),
                _ => return Err(mismatch(&l, &r)),
            };
            let result = ord.is_some_and(|o| match op {
                BinaryOp::Lt => o.is_lt(),
                BinaryOp::Le => o.is_le(),
                BinaryOp::Gt => o.is_gt(),
                _ => o.is_ge(),
            });
            Ok(Scalar::Bool(result))
        }
        BinaryOp::Add => match (&l, &r) {
            (Scalar::String(a), Scalar::String(b)) => Ok(Scalar::String(format!("{a}{b}"))),
            _ => match numeric(&l, &r) {
                Some(Num::Int(a, b)) => a.checked_add(b).map(Scalar::Int).ok_or_else(overflow),
                Some(Num::Double(a, b)) => Ok(Scalar::Double(a + b)),
                None => Err(mismatch(&l, &r)),
            },
        },
        BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div => match numeric(&l, &r) {
            Some(Num::Int(a, b)) => {
                let v = match op {
                    BinaryOp::Sub => a.checked_sub(b),
                    BinaryOp::Mul => a.checked_mul(b),
                    _ => {
                        if b == 0 {
                            return Err(Fault::new(FaultKind::DivisionByZero, "division by zero"));
                        }
                        a.checked_div(b)
                    }
                };
                v.map(Scalar::Int).ok_or_else(overflow)
            }
            Some(Num::Double(a, b)) => Ok(Scalar::Double(match op {
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                _ => {
                    if b == 0.0 {
                        return Err(Fault::new(FaultKind::DivisionByZero, "division by zero"));
                    }
                    a / b
                }
            })),
            None => Err(mismatch(&l, &r)),
        },
        BinaryOp::And | BinaryOp::Or => unreachable!("short-circuit operators handled by caller"),
    }
}
