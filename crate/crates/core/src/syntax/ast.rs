//! Syntax tree for the deployment and behavior parts of a program.
//!
//! Source positions are carried for diagnostics and hover lookups but are
//! not part of structural identity: two trees that differ only in where
//! their nodes came from compare equal.

use std::fmt;

/// 1-based line/column of the first character of a node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn new(line: usize, col: usize) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Location of a single token: line, starting column, length in characters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub types: Vec<TypeDecl>,
    pub interfaces: Vec<InterfaceDecl>,
    pub ports: Vec<PortDecl>,
    pub main: Stmt,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.types == other.types
            && self.interfaces == other.interfaces
            && self.ports == other.ports
            && self.main == other.main
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NativeType {
    String,
    Int,
    Bool,
    Double,
    Void,
    Undefined,
}

impl NativeType {
    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "string" => NativeType::String,
            "int" => NativeType::Int,
            "bool" => NativeType::Bool,
            "double" => NativeType::Double,
            "void" => NativeType::Void,
            "undefined" => NativeType::Undefined,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NativeType::String => "string",
            NativeType::Int => "int",
            NativeType::Bool => "bool",
            NativeType::Double => "double",
            NativeType::Void => "void",
            NativeType::Undefined => "undefined",
        }
    }
}

/// `[min, max]` occurrence bounds of a subnode; `max == None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cardinality {
    pub min: u64,
    pub max: Option<u64>,
}

impl Default for Cardinality {
    fn default() -> Self {
        Cardinality {
            min: 1,
            max: Some(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub body: TypeBody,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeBody {
    pub root: NativeType,
    pub subnodes: Vec<SubnodeDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubnodeDecl {
    pub name: String,
    pub cardinality: Cardinality,
    pub body: TypeBody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperationKind {
    RequestResponse,
    OneWay,
}

impl OperationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperationKind::RequestResponse => "RequestResponse",
            OperationKind::OneWay => "OneWay",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    pub name: String,
    pub kind: OperationKind,
    pub request: String,
    pub response: Option<String>,
}

#[derive(Debug, Clone)]
pub struct InterfaceDecl {
    pub name: String,
    pub name_span: Span,
    pub operations: Vec<Operation>,
}

impl PartialEq for InterfaceDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.operations == other.operations
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortDirection {
    Input,
    Output,
}

impl PortDirection {
    pub fn keyword(self) -> &'static str {
        match self {
            PortDirection::Input => "inputPort",
            PortDirection::Output => "outputPort",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PortDecl {
    pub direction: PortDirection,
    pub name: String,
    pub location: String,
    pub protocol: String,
    pub interfaces: Vec<String>,
    pub protocol_span: Span,
    /// One span per entry of `interfaces`, same order.
    pub interface_spans: Vec<Span>,
}

impl PartialEq for PortDecl {
    fn eq(&self, other: &Self) -> bool {
        self.direction == other.direction
            && self.name == other.name
            && self.location == other.location
            && self.protocol == other.protocol
            && self.interfaces == other.interfaces
    }
}

/// One step of a variable path: a name with an optional index expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub name: String,
    pub index: Option<Expr>,
}

impl Segment {
    pub fn new(name: impl Into<String>) -> Self {
        Segment {
            name: name.into(),
            index: None,
        }
    }

    pub fn indexed(name: impl Into<String>, index: Expr) -> Self {
        Segment {
            name: name.into(),
            index: Some(index),
        }
    }
}

/// A dotted variable path such as `a.b[i].c`. The first segment is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    segments: Vec<Segment>,
}

impl Path {
    /// Panics if `segments` is empty.
    pub fn new(segments: Vec<Segment>) -> Self {
        assert!(!segments.is_empty(), "a path needs a root segment");
        Path { segments }
    }

    /// Unindexed path from dotted names, e.g. `Path::simple(&["a", "b"])`.
    pub fn simple(names: &[&str]) -> Self {
        Path::new(names.iter().map(|n| Segment::new(*n)).collect())
    }

    pub fn root(&self) -> &str {
        &self.segments[0].name
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segments_mut(&mut self) -> &mut [Segment] {
        &mut self.segments
    }

    pub fn last(&self) -> &Segment {
        self.segments.last().expect("non-empty")
    }

    /// Whether the path is a single bare name (`x`, no index, no dots).
    pub fn as_bare_name(&self) -> Option<&str> {
        match self.segments.as_slice() {
            [only] if only.index.is_none() => Some(&only.name),
            _ => None,
        }
    }

    /// The same path with `index` placed on its final segment.
    pub fn with_last_index(&self, index: Expr) -> Path {
        let mut p = self.clone();
        p.segments.last_mut().expect("non-empty").index = Some(index);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter. All levels are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    String(String),
    Int(i64),
    Bool(bool),
    Double(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Literal),
    /// A bare name: a loop counter if one is live, otherwise an alias or root.
    VarRead(String),
    PathRead(Path),
    /// `#path`, the number of values under the path's final name.
    Count(Path),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn int(v: i64) -> Self {
        Expr::Literal(Literal::Int(v))
    }

    pub fn str(v: impl Into<String>) -> Self {
        Expr::Literal(Literal::String(v.into()))
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::VarRead(name.into())
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Default for Stmt {
    fn default() -> Self {
        Stmt::new(StmtKind::Seq(Vec::new()))
    }
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Self {
        Stmt {
            kind,
            pos: Pos::default(),
        }
    }

    pub fn at(kind: StmtKind, pos: Pos) -> Self {
        Stmt { kind, pos }
    }
}

/// A `for` header assignment: `name = expr` in init or post position.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterUpdate {
    pub name: String,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign(Path, Expr),
    /// `name -> target`
    AliasBind(String, Path),
    Println(Expr),
    For {
        init: CounterUpdate,
        cond: Expr,
        post: CounterUpdate,
        body: Box<Stmt>,
    },
    /// Legacy `foreach (key : target)` over child names.
    ForeachColon {
        key: String,
        target: Path,
        body: Box<Stmt>,
    },
    /// `foreach (alias -> target)` over the values of a node.
    ForeachArrow {
        alias: String,
        target: Path,
        body: Box<Stmt>,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
        otherwise: Option<Box<Stmt>>,
    },
    Seq(Vec<Stmt>),
}

impl StmtKind {
    pub fn seq_items(&self) -> Option<&[Stmt]> {
        match self {
            StmtKind::Seq(items) => Some(items),
            _ => None,
        }
    }
}
