//! Generators and reference implementations shared by the integration
//! tests of this crate and the acceptance suite of the CLI crate.

#![allow(dead_code)]

use std::fmt::Write as _;

use joliet_core::docengine::Category;
use joliet_core::interp::run;
use joliet_core::syntax::{Expr, Literal, Path, Segment, UnaryOp};
use joliet_core::transform::desugar;
use joliet_core::valuetree::{ResolvedPath, Scalar, Store, StoreError};
use joliet_core::Program;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Behaviour generator

const ROOTS: &[&str] = &["a", "n", "m"];
const CHILDREN: &[&str] = &["b", "c", "s"];
const LEAVES: &[&str] = &["x", "y"];
const ALIASES: &[&str] = &["v", "w", "u", "r"];
const COUNTERS: &[&str] = &["i", "j", "k"];

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_arrow_depth: usize,
    pub max_block: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_arrow_depth: 3,
            max_block: 4,
        }
    }
}

/// Builds program text. Most reads are of nodes known to hold ints so
/// that runs get deep into their loops; a small share of reads is
/// unconstrained so faults are exercised too.
struct ProgramGen<'r, R: Rng> {
    rng: &'r mut R,
    cfg: GenConfig,
    arrow_depth: usize,
    nesting: usize,
    /// Node lists populated by the setup, every element holding an int.
    lists: Vec<String>,
    /// Live arrow aliases.
    aliases: Vec<String>,
    /// Live counters with the node they range over.
    counters: Vec<(String, String)>,
}

impl<R: Rng> ProgramGen<'_, R> {
    fn pick(&mut self, xs: &[&str]) -> String {
        xs.choose(self.rng).expect("non-empty").to_string()
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn live_alias(&mut self) -> Option<String> {
        self.aliases.choose(self.rng).cloned()
    }

    /// A path naming a node list, never indexed on its last segment.
    fn node_path(&mut self) -> String {
        match self.rng.random_range(0..20) {
            0 => format!("{}.z", self.pick(ROOTS)),
            1..=3 if !self.aliases.is_empty() => {
                let alias = self.live_alias().expect("non-empty");
                format!("{alias}.{}", self.pick(LEAVES))
            }
            _ => self
                .lists
                .choose(self.rng)
                .expect("setup populates lists")
                .clone(),
        }
    }

    /// A path whose read is expected to succeed.
    fn safe_read(&mut self) -> String {
        match self.rng.random_range(0..10) {
            0..=2 if !self.aliases.is_empty() => self.live_alias().expect("non-empty"),
            3..=4 if !self.counters.is_empty() => {
                let (c, node) = self.counters.choose(self.rng).expect("non-empty").clone();
                format!("{node}[{c}]")
            }
            _ => {
                let root = self.pick(ROOTS);
                let child = self.pick(CHILDREN);
                format!("{root}.{child}[{}]", self.rng.random_range(0..2))
            }
        }
    }

    fn index(&mut self) -> String {
        if !self.counters.is_empty() && self.chance(0.4) {
            self.counters.choose(self.rng).expect("non-empty").0.clone()
        } else {
            self.rng.random_range(0..4).to_string()
        }
    }

    /// A path naming a single value, for writes or unconstrained reads.
    fn value_path(&mut self) -> String {
        if !self.aliases.is_empty() && self.chance(0.45) {
            let alias = self.live_alias().expect("non-empty");
            return match self.rng.random_range(0..3) {
                0 => alias,
                1 => format!("{alias}.{}", self.pick(LEAVES)),
                _ => format!("{alias}.{}[{}]", self.pick(LEAVES), self.index()),
            };
        }
        let node = self.node_path();
        format!("{node}[{}]", self.index())
    }

    fn atom(&mut self) -> String {
        match self.rng.random_range(0..40) {
            0..=9 => self.rng.random_range(-5..50).to_string(),
            10..=15 => format!("#{}", self.node_path()),
            16..=19 if !self.counters.is_empty() => {
                self.counters.choose(self.rng).expect("non-empty").0.clone()
            }
            20 => self.value_path(),
            _ => self.safe_read(),
        }
    }

    fn expr(&mut self) -> String {
        match self.rng.random_range(0..8) {
            0 | 1 => format!("{} + {}", self.atom(), self.atom()),
            2 => format!("{} - {}", self.atom(), self.atom()),
            3 => format!("{} * {}", self.atom(), self.rng.random_range(1..4)),
            4 if self.chance(0.1) => format!("\"{}\"", self.pick(&["s", "t", "uv"])),
            _ => self.atom(),
        }
    }

    fn cond(&mut self) -> String {
        let op = self.pick(&["<", "<=", ">", ">=", "==", "!="]);
        let lhs = if self.chance(0.5) {
            format!("#{}", self.node_path())
        } else {
            self.atom()
        };
        let rhs = self.rng.random_range(0..25);
        if self.chance(0.15) {
            format!("{lhs} {op} {rhs} || !({} > {rhs})", self.atom())
        } else {
            format!("{lhs} {op} {rhs}")
        }
    }

    fn block_of(&mut self, mut stmts: Vec<String>) -> String {
        self.nesting += 1;
        let n = self.rng.random_range(1..=self.cfg.max_block);
        stmts.extend((0..n).map(|_| self.stmt()));
        let pad = "  ".repeat(self.nesting + 1);
        self.nesting -= 1;
        let mut out = String::from("{\n");
        for (i, s) in stmts.iter().enumerate() {
            let sep = if i + 1 < stmts.len() { ";" } else { "" };
            let _ = writeln!(out, "{pad}{s}{sep}");
        }
        out.push_str(&"  ".repeat(self.nesting + 1));
        out.push('}');
        out
    }

    fn arrow_foreach(&mut self) -> String {
        let alias = self.pick(ALIASES);
        let target = self.node_path();
        self.arrow_depth += 1;
        self.aliases.push(alias.clone());
        let mut first = Vec::new();
        // Mutation through the alias is the point of the construct.
        if self.chance(0.6) {
            let value = if self.chance(0.5) {
                format!("{alias} + {}", self.rng.random_range(1..10))
            } else {
                self.expr()
            };
            first.push(format!("{alias} = {value}"));
        }
        if self.chance(0.5) {
            first.push(format!("println({alias})"));
        }
        let body = self.block_of(first);
        self.aliases.pop();
        self.arrow_depth -= 1;
        format!("foreach ({alias} -> {target}) {body}")
    }

    fn stmt(&mut self) -> String {
        let roll = self.rng.random_range(0..20);
        match roll {
            0..=3 => format!("{} = {}", self.value_path(), self.expr()),
            4..=7 => format!("println({})", self.expr()),
            8..=11 if self.arrow_depth < self.cfg.max_arrow_depth => self.arrow_foreach(),
            12 | 13 if self.nesting < 4 => {
                let free: Vec<&str> = COUNTERS
                    .iter()
                    .copied()
                    .filter(|c| !self.counters.iter().any(|(x, _)| x == c))
                    .collect();
                if free.is_empty() {
                    return format!("println({})", self.atom());
                }
                let c = self.pick(&free);
                let node = self.node_path();
                self.counters.push((c.clone(), node.clone()));
                let body = self.block_of(vec![format!("println({node}[{c}])")]);
                self.counters.pop();
                format!("for ({c} = 0, {c} < #{node}, {c}++) {body}")
            }
            14 | 15 if self.nesting < 4 => {
                let cond = self.cond();
                let then = self.block_of(Vec::new());
                if self.chance(0.5) {
                    let other = self.block_of(Vec::new());
                    format!("if ({cond}) {then} else {other}")
                } else {
                    format!("if ({cond}) {then}")
                }
            }
            16 => {
                let alias = self.pick(&["p", "q"]);
                let target = match self.rng.random_range(0..10) {
                    0..=1 if !self.aliases.is_empty() => self.live_alias().expect("non-empty"),
                    2 => self.value_path(),
                    _ => format!(
                        "{}.{}[{}]",
                        self.pick(ROOTS),
                        self.pick(CHILDREN),
                        self.rng.random_range(0..2)
                    ),
                };
                format!("{alias} -> {target}")
            }
            17 if self.nesting < 4 => {
                let root = self.pick(ROOTS);
                let body = self.block_of(vec!["println(key)".into()]);
                format!("foreach (key : {root}) {body}")
            }
            18 => format!("println(p + {})", self.atom()),
            _ => format!("{} = {}", self.value_path(), self.expr()),
        }
    }

    fn setup(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        for root in ROOTS {
            for child in CHILDREN {
                let len = self.rng.random_range(2..=4);
                for i in 0..len {
                    out.push(format!(
                        "{root}.{child}[{i}] = {}",
                        self.rng.random_range(0..100)
                    ));
                }
                self.lists.push(format!("{root}.{child}"));
                if self.chance(0.3) {
                    let k = self.rng.random_range(0..2);
                    let leaf = self.pick(LEAVES);
                    for j in 0..self.rng.random_range(1..=3) {
                        let v = self.rng.random_range(0..100);
                        out.push(format!("{root}.{child}[{k}].{leaf}[{j}] = {v}"));
                    }
                    self.lists.push(format!("{root}.{child}[{k}].{leaf}"));
                }
            }
        }
        out.push("p -> a.b[0]".into());
        out
    }
}

/// A random `main` block exercising tree writes, nested arrow loops with
/// mutation through the alias, counters, conditionals and aliases.
pub fn gen_main<R: Rng>(rng: &mut R, cfg: GenConfig) -> String {
    let mut g = ProgramGen {
        rng,
        cfg,
        arrow_depth: 0,
        nesting: 0,
        lists: Vec::new(),
        aliases: Vec::new(),
        counters: Vec::new(),
    };
    let mut stmts = g.setup();
    for _ in 0..g.rng.random_range(1..=4) {
        stmts.push(g.stmt());
    }
    if cfg.max_arrow_depth > 0 && (!stmts.iter().any(|s| s.contains("foreach (")) || g.chance(0.5))
    {
        stmts.push(g.arrow_foreach());
    }
    let mut out = String::from("main {\n");
    for (i, s) in stmts.iter().enumerate() {
        let sep = if i + 1 < stmts.len() { ";" } else { "" };
        let _ = writeln!(out, "  {s}{sep}");
    }
    out.push_str("}\n");
    out
}

/// Everything observable about a run: output, dump, and fault kind if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub output: Vec<String>,
    pub dump: String,
    pub fault: Option<String>,
}

pub fn observe(program: &Program, budget: u64) -> Observation {
    match run(program, budget) {
        Ok(ex) => Observation {
            output: ex.output,
            dump: ex.dump,
            fault: None,
        },
        Err(f) => Observation {
            output: f.output,
            dump: f.dump,
            fault: Some(f.fault.kind.to_string()),
        },
    }
}

/// Runs `program` directly and after desugaring.
pub fn observe_both(program: &Program, budget: u64) -> (Observation, Observation) {
    (observe(program, budget), observe(&desugar(program), budget))
}

// ---------------------------------------------------------------------------
// Deployment generator with a position oracle

/// Where a documentable word was placed, 1-based, in characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placed {
    pub line: usize,
    pub col: usize,
    pub word: String,
    pub category: Category,
}

#[derive(Debug, Default)]
struct Writer {
    text: String,
    line: usize,
    col: usize,
    placed: Vec<Placed>,
}

impl Writer {
    fn new() -> Self {
        Writer {
            line: 1,
            col: 1,
            ..Default::default()
        }
    }

    fn put(&mut self, s: &str) {
        for c in s.chars() {
            self.text.push(c);
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }

    fn mark(&mut self, word: &str, category: Category) {
        self.placed.push(Placed {
            line: self.line,
            col: self.col,
            word: word.to_string(),
            category,
        });
        self.put(word);
    }
}

pub const PROTOCOL_POOL: &[&str] = &["sodep", "http", "https", "soap", "xmlrpc", "ftp"];

/// A random deployment part followed by `main_block`, plus the oracle list
/// of protocol and interface word positions.
pub fn gen_deployment<R: Rng>(rng: &mut R, main_block: &str) -> (String, Vec<Placed>) {
    let mut w = Writer::new();
    let n_types = rng.random_range(0..3);
    for t in 0..n_types {
        w.put(&format!(
            "type T{t}: void {{\n  .x[0,*]: int\n  .name: string\n}}\n"
        ));
    }
    let n_ifaces = rng.random_range(1..4);
    for i in 0..n_ifaces {
        w.put("interface ");
        w.mark(&format!("I{i}"), Category::Interface);
        w.put(" {\n  OneWay: f(string)");
        if rng.random_bool(0.5) {
            let resp = if n_types > 0 { "T0" } else { "int" };
            w.put(&format!("\n  RequestResponse: g(int)({resp})"));
        }
        w.put("\n}\n");
    }
    for p in 0..rng.random_range(1..3) {
        let dir = if rng.random_bool(0.5) {
            "inputPort"
        } else {
            "outputPort"
        };
        w.put(&format!(
            "{dir} P{p} {{\n  Location: \"socket://localhost:{}\"",
            8000 + p
        ));
        w.put(if rng.random_bool(0.5) { " " } else { "\n  " });
        w.put("Protocol: ");
        let proto = PROTOCOL_POOL.choose(rng).expect("non-empty");
        w.mark(proto, Category::Protocol);
        w.put("\n  Interfaces: ");
        let k = rng.random_range(1..=n_ifaces);
        for j in 0..k {
            if j > 0 {
                w.put(if rng.random_bool(0.5) { ", " } else { " ,  " });
            }
            w.mark(&format!("I{j}"), Category::Interface);
        }
        w.put("\n}\n");
    }
    w.put(main_block);
    (w.text, w.placed)
}

/// Category the oracle expects at a cursor position.
pub fn expected_category(placed: &[Placed], line: usize, col: usize) -> Option<&Placed> {
    placed
        .iter()
        .find(|p| p.line == line && col >= p.col && col < p.col + p.word.chars().count())
}

// ---------------------------------------------------------------------------
// Reference value store: plain nested lists and linear scans.

#[derive(Debug, Clone, Default)]
pub struct RefNode {
    pub value: Option<i64>,
    pub kids: Vec<(String, Vec<RefNode>)>,
}

/// A path in a store script: segments with literal (possibly negative)
/// indexes; the first segment is the root.
pub type ScriptPath = Vec<(String, Option<i64>)>;

#[derive(Debug, Clone)]
pub enum StoreOp {
    Write(ScriptPath, i64),
    Read(ScriptPath),
    Count(ScriptPath),
    Bind(String, ScriptPath),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Value(i64),
    Count(usize),
    Error(&'static str),
}

#[derive(Debug, Default)]
pub struct RefStore {
    roots: Vec<(String, Vec<RefNode>)>,
    aliases: Vec<(String, ScriptPath)>,
}

fn find_list<'a>(lists: &'a [(String, Vec<RefNode>)], name: &str) -> Option<&'a Vec<RefNode>> {
    lists.iter().find(|(n, _)| n == name).map(|(_, l)| l)
}

fn find_list_mut<'a>(
    lists: &'a mut Vec<(String, Vec<RefNode>)>,
    name: &str,
) -> &'a mut Vec<RefNode> {
    let pos = match lists.iter().position(|(n, _)| n == name) {
        Some(p) => p,
        None => {
            lists.push((name.to_string(), Vec::new()));
            lists.len() - 1
        }
    };
    &mut lists[pos].1
}

impl RefStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn alias(&self, name: &str) -> Option<&ScriptPath> {
        self.aliases.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    fn idx(i: Option<i64>) -> Result<usize, &'static str> {
        match i {
            None => Ok(0),
            Some(v) if v < 0 => Err("NegativeIndex"),
            Some(v) => Ok(v as usize),
        }
    }

    fn expand(
        &self,
        path: &ScriptPath,
        visiting: &mut Vec<String>,
    ) -> Result<Vec<(String, usize)>, &'static str> {
        let (root, root_idx) = &path[0];
        let mut out = match self.alias(root) {
            Some(target) => {
                if visiting.contains(root) {
                    return Err("AliasCycle");
                }
                visiting.push(root.clone());
                let target = target.clone();
                let expanded = self.expand(&target, visiting);
                visiting.pop();
                let mut expanded = expanded?;
                if root_idx.is_some() {
                    let last = expanded.len() - 1;
                    expanded[last].1 = Self::idx(*root_idx)?;
                }
                expanded
            }
            None => vec![(root.clone(), Self::idx(*root_idx)?)],
        };
        for (name, i) in &path[1..] {
            out.push((name.clone(), Self::idx(*i)?));
        }
        Ok(out)
    }

    fn get(&self, steps: &[(String, usize)]) -> Option<&RefNode> {
        let mut lists = &self.roots;
        let mut node = None;
        for (name, i) in steps {
            let n = find_list(lists, name)?.get(*i)?;
            lists = &n.kids;
            node = Some(n);
        }
        node
    }

    pub fn apply(&mut self, op: &StoreOp) -> Outcome {
        let result = match op {
            StoreOp::Bind(name, target) => {
                self.aliases.retain(|(n, _)| n != name);
                self.aliases.push((name.clone(), target.clone()));
                Ok(Outcome::Done)
            }
            StoreOp::Write(path, v) => self.expand(path, &mut Vec::new()).map(|steps| {
                vivify(&mut self.roots, &steps).value = Some(*v);
                Outcome::Done
            }),
            StoreOp::Read(path) => self
                .expand(path, &mut Vec::new())
                .and_then(|steps| match self.get(&steps) {
                    None => Err("MissingNode"),
                    Some(RefNode { value: None, .. }) => Err("UndefinedValue"),
                    Some(RefNode { value: Some(v), .. }) => Ok(Outcome::Value(*v)),
                }),
            StoreOp::Count(path) => self.expand(path, &mut Vec::new()).map(|steps| {
                let (last, parents) = steps.split_last().expect("non-empty");
                let n = if parents.is_empty() {
                    find_list(&self.roots, &last.0).map_or(0, Vec::len)
                } else {
                    self.get(parents)
                        .and_then(|p| find_list(&p.kids, &last.0))
                        .map_or(0, Vec::len)
                };
                Outcome::Count(n)
            }),
        };
        result.unwrap_or_else(Outcome::Error)
    }

    pub fn dump(&self) -> String {
        fn walk(out: &mut String, prefix: &str, node: &RefNode) {
            out.push_str(prefix);
            if let Some(v) = node.value {
                let _ = write!(out, " = {v}");
            }
            out.push('\n');
            for (name, list) in &node.kids {
                for (i, kid) in list.iter().enumerate() {
                    walk(out, &format!("{prefix}.{name}[{i}]"), kid);
                }
            }
        }
        let mut out = String::new();
        for (name, list) in &self.roots {
            for (i, node) in list.iter().enumerate() {
                walk(&mut out, &format!("{name}[{i}]"), node);
            }
        }
        out
    }
}

fn vivify<'a>(
    lists: &'a mut Vec<(String, Vec<RefNode>)>,
    steps: &[(String, usize)],
) -> &'a mut RefNode {
    let (name, i) = &steps[0];
    let list = find_list_mut(lists, name);
    while list.len() <= *i {
        list.push(RefNode::default());
    }
    let node = &mut list[*i];
    if steps.len() == 1 {
        node
    } else {
        vivify(&mut node.kids, &steps[1..])
    }
}

/// Applies the same script operations to the production store.
pub struct RealStore {
    store: Store,
}

fn to_path(p: &ScriptPath) -> Path {
    Path::new(
        p.iter()
            .map(|(name, idx)| match idx {
                None => Segment::new(name.clone()),
                Some(v) if *v < 0 => Segment::indexed(
                    name.clone(),
                    Expr::Unary(UnaryOp::Neg, Box::new(Expr::int(-v))),
                ),
                Some(v) => Segment::indexed(name.clone(), Expr::int(*v)),
            })
            .collect(),
    )
}

fn literal_index(e: &Expr) -> Result<i64, StoreError> {
    match e {
        Expr::Literal(Literal::Int(v)) => Ok(*v),
        Expr::Unary(UnaryOp::Neg, inner) => literal_index(inner).map(|v| -v),
        other => panic!("script indexes are literals, got {other:?}"),
    }
}

fn error_name(e: &StoreError) -> &'static str {
    match e {
        StoreError::AliasCycle(_) => "AliasCycle",
        StoreError::NegativeIndex(_) => "NegativeIndex",
        StoreError::IndexTooLarge(_) => "IndexTooLarge",
        StoreError::MissingNode(_) => "MissingNode",
        StoreError::UndefinedValue(_) => "UndefinedValue",
    }
}

impl Default for RealStore {
    fn default() -> Self {
        RealStore {
            store: Store::new(),
        }
    }
}

impl RealStore {
    fn resolve(&self, p: &ScriptPath) -> Result<ResolvedPath, StoreError> {
        self.store.resolve(&to_path(p), &mut literal_index)
    }

    pub fn apply(&mut self, op: &StoreOp) -> Outcome {
        let result = match op {
            StoreOp::Bind(name, target) => {
                self.store.bind_alias(name.clone(), to_path(target));
                Ok(Outcome::Done)
            }
            StoreOp::Write(p, v) => self
                .resolve(p)
                .and_then(|r| self.store.write(&r, Scalar::Int(*v)))
                .map(|_| Outcome::Done),
            StoreOp::Read(p) => self.resolve(p).and_then(|r| match self.store.read(&r)? {
                Scalar::Int(v) => Ok(Outcome::Value(*v)),
                other => panic!("script stores only ints, got {other:?}"),
            }),
            StoreOp::Count(p) => self
                .resolve(p)
                .map(|r| Outcome::Count(self.store.count(&r))),
        };
        result.unwrap_or_else(|e| Outcome::Error(error_name(&e)))
    }

    pub fn dump(&self) -> String {
        self.store.dump()
    }
}

const STORE_ROOTS: &[&str] = &["a", "b", "p", "q"];
const STORE_NAMES: &[&str] = &["b", "c", "d"];
const STORE_ALIASES: &[&str] = &["p", "q", "z"];

fn script_index<R: Rng>(rng: &mut R) -> Option<i64> {
    match rng.random_range(0..40) {
        0 => Some(-rng.random_range(1..3)),
        1..=14 => None,
        _ => Some(rng.random_range(0..4)),
    }
}

fn script_path<R: Rng>(rng: &mut R, roots: &[&str]) -> ScriptPath {
    let len = rng.random_range(1..=4);
    (0..len)
        .map(|i| {
            let name = if i == 0 {
                roots.choose(rng).expect("non-empty")
            } else {
                STORE_NAMES.choose(rng).expect("non-empty")
            };
            (name.to_string(), script_index(rng))
        })
        .collect()
}

/// A previously used path, possibly cut short or with one index changed.
fn variant<R: Rng>(rng: &mut R, seen: &[ScriptPath]) -> ScriptPath {
    let mut p = seen.choose(rng).expect("non-empty").clone();
    match rng.random_range(0..4) {
        0 => p.truncate(rng.random_range(1..=p.len())),
        1 => {
            let i = rng.random_range(0..p.len());
            p[i].1 = script_index(rng);
        }
        _ => {}
    }
    p
}

/// A random write/read/count/alias script of at most `max_len` operations.
/// Later operations tend to revisit earlier paths so that reads and counts
/// hit populated nodes; alias names overlap with root names so shadowing
/// is exercised.
pub fn gen_store_script<R: Rng>(rng: &mut R, max_len: usize) -> Vec<StoreOp> {
    let len = rng.random_range(1..=max_len);
    let mut seen: Vec<ScriptPath> = Vec::new();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let reuse = !seen.is_empty() && rng.random_bool(0.65);
        let path = if reuse {
            variant(rng, &seen)
        } else {
            script_path(rng, STORE_ROOTS)
        };
        let op = match rng.random_range(0..20) {
            0..=7 => {
                seen.push(path.clone());
                StoreOp::Write(path, rng.random_range(-50..50))
            }
            8..=12 => StoreOp::Read(path),
            13..=16 => StoreOp::Count(path),
            _ => {
                let name = STORE_ALIASES.choose(rng).expect("non-empty").to_string();
                StoreOp::Bind(name, path)
            }
        };
        out.push(op);
    }
    out
}

/// Runs `script` on both stores; returns the first disagreement.
pub fn compare_store_script(script: &[StoreOp]) -> Result<(), String> {
    let mut reference = RefStore::new();
    let mut real = RealStore::default();
    for (i, op) in script.iter().enumerate() {
        let want = reference.apply(op);
        let got = real.apply(op);
        if want != got {
            return Err(format!("op {i} {op:?}: reference {want:?}, store {got:?}"));
        }
    }
    let (want, got) = (reference.dump(), real.dump());
    if want != got {
        return Err(format!("final dumps differ:\n{want}\nvs\n{got}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Markdown fuzzing and a naive HTML checker

const MD_PIECES: &[&str] = &[
    "#",
    "##",
    "###",
    "####",
    " ",
    " ",
    " ",
    "\n",
    "\n",
    "\n\n",
    "- ",
    "**",
    "`",
    "[",
    "]",
    "(",
    ")",
    "](",
    "<",
    ">",
    "&",
    "\"",
    "'",
    "a",
    "b",
    "word",
    "x y",
    "é",
    "→",
    "http://e.x/?a=1&b=2",
    "<script>",
    "&amp;",
    "\t",
    "*",
];

/// A random string of at most `max_bytes` bytes, biased towards markdown
/// syntax and characters that need escaping.
pub fn gen_markdown<R: Rng>(rng: &mut R, max_bytes: usize) -> String {
    let target = rng.random_range(0..=max_bytes);
    let mut out = String::new();
    loop {
        let piece: String = if rng.random_bool(0.1) {
            char::from_u32(rng.random_range(0x20..0x3000))
                .unwrap_or('?')
                .to_string()
        } else {
            MD_PIECES.choose(rng).expect("non-empty").to_string()
        };
        if out.len() + piece.len() > target {
            return out;
        }
        out.push_str(&piece);
    }
}

const TAGS: &[&str] = &["h1", "h2", "h3", "p", "ul", "li", "strong", "code", "a"];
const ENTITIES: &[&str] = &["&amp;", "&lt;", "&gt;", "&quot;"];

/// Checks that `html` uses only the renderer's tags, that they nest and
/// balance, that `a` carries exactly an `href` attribute, and that text
/// and attribute values contain no raw `<`, `>`, `"` or bare `&`.
pub fn check_html(html: &str) -> Result<(), String> {
    fn check_text(text: &str) -> Result<(), String> {
        for (i, c) in text.char_indices() {
            match c {
                '<' | '>' | '"' => return Err(format!("raw {c:?} in text {text:?}")),
                '&' if !ENTITIES.iter().any(|e| text[i..].starts_with(e)) => {
                    return Err(format!("bare & in text {text:?}"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    let mut stack: Vec<String> = Vec::new();
    let mut rest = html;
    while let Some(open) = rest.find('<') {
        check_text(&rest[..open])?;
        let after = &rest[open + 1..];
        let close = after.find('>').ok_or("unclosed tag")?;
        let tag = &after[..close];
        rest = &after[close + 1..];
        if let Some(name) = tag.strip_prefix('/') {
            match stack.pop() {
                Some(top) if top == name => {}
                other => return Err(format!("</{name}> closes {other:?}")),
            }
            continue;
        }
        let (name, attrs) = tag.split_once(' ').unwrap_or((tag, ""));
        if !TAGS.contains(&name) {
            return Err(format!("unknown tag <{tag}>"));
        }
        if name == "a" {
            let value = attrs
                .strip_prefix("href=\"")
                .and_then(|v| v.strip_suffix('"'))
                .ok_or_else(|| format!("bad anchor attributes {attrs:?}"))?;
            check_text(value)?;
        } else if !attrs.is_empty() {
            return Err(format!("unexpected attributes on <{name}>"));
        }
        stack.push(name.to_string());
    }
    check_text(rest)?;
    if stack.is_empty() {
        Ok(())
    } else {
        Err(format!("unclosed {stack:?}"))
    }
}

/// Text content of rendered HTML with entities decoded; used to check
/// that rendering never drops or invents characters outside markup.
pub fn html_text(html: &str) -> String {
    let mut out = String::new();
    let mut in_tag = false;
    for c in html.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&amp;", "&")
}
