//! Tree-structured variable store.
//!
//! Every variable is a list of nodes; each node holds an optional scalar and
//! an ordered map from child name to a non-empty list of nodes. The length
//! of such a list is what `#` reports. Writes create missing structure,
//! reads never do.
//!
//! Aliases map a name to an unevaluated [`Path`]. The target is resolved
//! again at every use, so index expressions inside it see the current
//! environment.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::syntax::{escape_string, format_double, Expr, Path};

/// Largest index a write may vivify up to. Guards against a single
/// assignment allocating an unbounded list.
pub const MAX_WRITE_INDEX: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    String(String),
    Int(i64),
    Bool(bool),
    Double(f64),
}

impl Scalar {
    pub fn type_name(&self) -> &'static str {
        match self {
            Scalar::String(_) => "string",
            Scalar::Int(_) => "int",
            Scalar::Bool(_) => "bool",
            Scalar::Double(_) => "double",
        }
    }

    /// Rendering used in store dumps: strings are quoted so that `"1"` and
    /// `1` stay distinguishable.
    pub fn dump_repr(&self) -> String {
        match self {
            Scalar::String(s) => escape_string(s),
            other => other.to_string(),
        }
    }
}

/// Console rendering: strings unquoted, doubles always with a fraction.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::String(s) => f.write_str(s),
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Double(v) => f.write_str(&format_double(*v)),
        }
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::String(s.to_string())
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValueNode {
    pub scalar: Option<Scalar>,
    pub children: IndexMap<String, Vec<ValueNode>>,
}

impl ValueNode {
    pub fn child(&self, name: &str, index: usize) -> Option<&ValueNode> {
        self.children.get(name)?.get(index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub name: String,
    pub index: usize,
}

/// A fully evaluated address: no aliases, every index a concrete number.
/// The first step is the root variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResolvedPath {
    steps: Vec<Step>,
}

impl ResolvedPath {
    /// Panics if `steps` is empty.
    pub fn new(steps: Vec<Step>) -> Self {
        assert!(!steps.is_empty(), "a resolved path needs a root");
        ResolvedPath { steps }
    }

    /// Builds from `(name, index)` pairs, e.g. `[("a", 0), ("b", 2)]`.
    pub fn from_pairs(pairs: &[(&str, usize)]) -> Self {
        ResolvedPath::new(
            pairs
                .iter()
                .map(|(n, i)| Step {
                    name: n.to_string(),
                    index: *i,
                })
                .collect(),
        )
    }

    pub fn root(&self) -> &str {
        &self.steps[0].name
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn push(&mut self, name: impl Into<String>, index: usize) {
        self.steps.push(Step {
            name: name.into(),
            index,
        });
    }
}

impl fmt::Display for ResolvedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}[{}]", s.name, s.index)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("alias cycle through `{0}`")]
    AliasCycle(String),
    #[error("negative index {0}")]
    NegativeIndex(i64),
    #[error("index {0} exceeds the write limit")]
    IndexTooLarge(usize),
    #[error("no node at {0}")]
    MissingNode(String),
    #[error("node {0} holds no value")]
    UndefinedValue(String),
}

#[derive(Debug, Default)]
pub struct Store {
    roots: IndexMap<String, Vec<ValueNode>>,
    aliases: HashMap<String, Path>,
    /// Aliases currently being expanded; index expressions evaluated during
    /// an expansion may re-enter `resolve`.
    expanding: RefCell<Vec<String>>,
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn roots(&self) -> &IndexMap<String, Vec<ValueNode>> {
        &self.roots
    }

    pub fn alias(&self, name: &str) -> Option<&Path> {
        self.aliases.get(name)
    }

    /// Binds (or rebinds) `name` to `target`. Nothing is evaluated here.
    pub fn bind_alias(&mut self, name: impl Into<String>, target: Path) {
        self.aliases.insert(name.into(), target);
    }

    /// Expands aliases and evaluates every index in `path`.
    ///
    /// An index on an alias name replaces the index of the alias target's
    /// last step, so with `v -> a.b`, `v[2]` addresses `a.b[2]`. Missing
    /// indexes evaluate to 0.
    pub fn resolve<E, F>(&self, path: &Path, eval_index: &mut F) -> Result<ResolvedPath, E>
    where
        F: FnMut(&Expr) -> Result<i64, E>,
        E: From<StoreError>,
    {
        let segments = path.segments();
        let root = &segments[0];
        let mut resolved = match self.aliases.get(&root.name) {
            Some(target) => {
                if self.expanding.borrow().contains(&root.name) {
                    return Err(StoreError::AliasCycle(root.name.clone()).into());
                }
                self.expanding.borrow_mut().push(root.name.clone());
                let expanded = self.resolve(target, eval_index);
                self.expanding.borrow_mut().pop();
                let mut expanded = expanded?;
                if let Some(idx) = &root.index {
                    let i = Self::eval(idx, eval_index)?;
                    expanded.steps.last_mut().expect("non-empty").index = i;
                }
                expanded
            }
            None => ResolvedPath::new(vec![Step {
                name: root.name.clone(),
                index: Self::eval_opt(root.index.as_ref(), eval_index)?,
            }]),
        };
        for seg in &segments[1..] {
            let index = Self::eval_opt(seg.index.as_ref(), eval_index)?;
            resolved.push(seg.name.clone(), index);
        }
        Ok(resolved)
    }

    fn eval<E, F>(e: &Expr, eval_index: &mut F) -> Result<usize, E>
    where
        F: FnMut(&Expr) -> Result<i64, E>,
        E: From<StoreError>,
    {
        let v = eval_index(e)?;
        usize::try_from(v).map_err(|_| StoreError::NegativeIndex(v).into())
    }

    fn eval_opt<E, F>(e: Option<&Expr>, eval_index: &mut F) -> Result<usize, E>
    where
        F: FnMut(&Expr) -> Result<i64, E>,
        E: From<StoreError>,
    {
        match e {
            Some(e) => Self::eval(e, eval_index),
            None => Ok(0),
        }
    }

    pub fn node(&self, path: &ResolvedPath) -> Option<&ValueNode> {
        let (first, rest) = path.steps.split_first().expect("non-empty");
        let mut node = self.roots.get(&first.name)?.get(first.index)?;
        for step in rest {
            node = node.child(&step.name, step.index)?;
        }
        Some(node)
    }

    /// Returns the node at `path`, creating every missing node on the way.
    pub fn node_mut(&mut self, path: &ResolvedPath) -> Result<&mut ValueNode, StoreError> {
        if let Some(step) = path.steps.iter().find(|s| s.index > MAX_WRITE_INDEX) {
            return Err(StoreError::IndexTooLarge(step.index));
        }
        let (first, rest) = path.steps.split_first().expect("non-empty");
        let mut list = self.roots.entry(first.name.clone()).or_default();
        let mut node = vivify(list, first.index);
        for step in rest {
            list = node.children.entry(step.name.clone()).or_default();
            node = vivify(list, step.index);
        }
        Ok(node)
    }

    pub fn write(&mut self, path: &ResolvedPath, value: Scalar) -> Result<(), StoreError> {
        self.node_mut(path)?.scalar = Some(value);
        Ok(())
    }

    pub fn read(&self, path: &ResolvedPath) -> Result<&Scalar, StoreError> {
        let node = self
            .node(path)
            .ok_or_else(|| StoreError::MissingNode(path.to_string()))?;
        node.scalar
            .as_ref()
            .ok_or_else(|| StoreError::UndefinedValue(path.to_string()))
    }

    /// Number of values under the last step's name, below the (indexed)
    /// parent chain. The last step's own index is ignored. Missing ⇒ 0.
    pub fn count(&self, path: &ResolvedPath) -> usize {
        let (last, parents) = path.steps.split_last().expect("non-empty");
        if parents.is_empty() {
            return self.roots.get(&last.name).map_or(0, Vec::len);
        }
        let parent = ResolvedPath {
            steps: parents.to_vec(),
        };
        self.node(&parent)
            .and_then(|n| n.children.get(&last.name))
            .map_or(0, Vec::len)
    }

    /// Deterministic text tree: one line per node in insertion order,
    /// `path = value` for nodes holding a scalar, bare `path` otherwise.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (name, list) in &self.roots {
            for (i, node) in list.iter().enumerate() {
                dump_node(&mut out, &format!("{name}[{i}]"), node);
            }
        }
        out
    }
}

fn vivify(list: &mut Vec<ValueNode>, index: usize) -> &mut ValueNode {
    if list.len() <= index {
        list.resize_with(index + 1, ValueNode::default);
    }
    &mut list[index]
}

fn dump_node(out: &mut String, prefix: &str, node: &ValueNode) {
    out.push_str(prefix);
    if let Some(s) = &node.scalar {
        out.push_str(" = ");
        out.push_str(&s.dump_repr());
    }
    out.push('\n');
    for (name, list) in &node.children {
        for (i, child) in list.iter().enumerate() {
            dump_node(out, &format!("{prefix}.{name}[{i}]"), child);
        }
    }
}
