//! Workloads for the `pipeline` benchmarks.

use joliet_core::{parse_program, Program};

/// The deployment fixture from the core corpus: types, interfaces, ports
/// and a short `main`.
pub const DEPLOYMENT: &str = include_str!("../../core/tests/corpus/deployment.jol");

/// A program that fills `a.b` with `width` elements, each with `width`
/// children under `c`, then walks them with `depth` nested arrow loops
/// (alternating between the two levels) summing into `total`.
pub fn nested_loops(width: usize, depth: usize) -> String {
    let mut src = String::from("main {\n");
    for i in 0..width {
        for j in 0..width {
            src.push_str(&format!("  a.b[{i}].c[{j}] = {};\n", i * width + j));
        }
    }
    src.push_str("  total = 0;\n");
    let mut close = String::new();
    for d in 0..depth {
        let target = if d % 2 == 0 {
            "a.b".to_string()
        } else {
            format!("v{}.c", d - 1)
        };
        src.push_str(&format!("  foreach (v{d} -> {target}) {{\n"));
        close.push_str("  };\n");
    }
    src.push_str("  total = total + 1\n");
    src.push_str(&close);
    src.push_str("  println(total)\n}\n");
    src
}

/// A long straight-line program: `n` assignments into a growing list
/// followed by an indexed loop that prints them.
pub fn straight_line(n: usize) -> String {
    let mut src = String::from("main {\n");
    for i in 0..n {
        src.push_str(&format!("  xs.item[{i}] = \"v{i}\";\n"));
    }
    src.push_str("  for (i = 0, i < #xs.item, i++) { println(xs.item[i]) }\n}\n");
    src
}

/// Parses a workload, panicking on the (impossible) error.
pub fn parsed(source: &str) -> Program {
    parse_program(source).unwrap_or_else(|e| panic!("benchmark workload: {e}"))
}
